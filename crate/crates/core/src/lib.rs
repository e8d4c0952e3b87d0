//! Consensus answers over probabilistic relations.
//!
//! Relations are probabilistic and/xor trees: OR nodes pick at most one
//! child, AND nodes keep all children, and leaves are `(key, value)` tuple
//! alternatives. A consensus answer is a deterministic answer minimizing the
//! expected distance to the answer of a random possible world.

pub mod aggregate;
pub mod cli;
pub mod cluster;
pub mod error;
pub mod generate;
pub mod genfunc;
pub mod io;
pub mod model;
pub mod oracle;
pub mod set_consensus;
pub mod solvers;
pub mod topk;

pub use error::{Error, Result};
pub use model::{AndXorTree, Node, PossibleWorld, TupleAlternative, Value};
