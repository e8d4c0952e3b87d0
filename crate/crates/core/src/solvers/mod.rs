//! Combinatorial solvers shared by the consensus modules.

pub mod assignment;
pub mod flow;

pub use assignment::{solve_assignment, Assignment, AssignmentInstance};
pub use flow::{solve_min_cost_flow, FlowEdge, FlowNetwork, FlowSolution};
