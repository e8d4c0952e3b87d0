use consensusdb::error::Error;
use consensusdb::solvers::{solve_assignment, solve_min_cost_flow, AssignmentInstance, FlowNetwork};
use proptest::prelude::*;

/// Cheapest way to send one unit from each left node to an allowed right
/// node while every right node `j` receives between `lo[j]` and `hi[j]`.
fn brute_transport(cost: &[Vec<Option<i32>>], lo: &[i64], hi: &[i64]) -> Option<f64> {
    fn go(
        i: usize,
        cost: &[Vec<Option<i32>>],
        load: &mut Vec<i64>,
        lo: &[i64],
        hi: &[i64],
        acc: f64,
        best: &mut Option<f64>,
    ) {
        if i == cost.len() {
            if load.iter().zip(lo).all(|(l, b)| l >= b) && best.is_none_or(|b| acc < b) {
                *best = Some(acc);
            }
            return;
        }
        for (j, c) in cost[i].iter().enumerate() {
            if let Some(c) = c {
                if load[j] < hi[j] {
                    load[j] += 1;
                    go(i + 1, cost, load, lo, hi, acc + *c as f64, best);
                    load[j] -= 1;
                }
            }
        }
    }
    let mut best = None;
    go(0, cost, &mut vec![0; lo.len()], lo, hi, 0.0, &mut best);
    best
}

type Transport = (Vec<Vec<Option<i32>>>, Vec<(i64, i64)>);

fn transport() -> impl Strategy<Value = Transport> {
    (1usize..=6, 1usize..=3).prop_flat_map(|(n, m)| {
        (
            prop::collection::vec(prop::collection::vec(prop::option::weighted(0.8, -5i32..10), m), n),
            prop::collection::vec((0i64..=2, 0i64..=3).prop_map(|(l, extra)| (l, l + extra)), m),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn flow_matches_brute_force((cost, bounds) in transport()) {
        let n = cost.len();
        let m = bounds.len();
        let source = 0;
        let sink = n + m + 1;
        let mut net = FlowNetwork::new(n + m + 2, source, sink, n as i64);
        for (i, row) in cost.iter().enumerate() {
            net.add_edge(source, 1 + i, 0, 1, 0.0);
            for (j, c) in row.iter().enumerate() {
                if let Some(c) = c {
                    net.add_edge(1 + i, 1 + n + j, 0, 1, *c as f64);
                }
            }
        }
        for (j, &(lo, hi)) in bounds.iter().enumerate() {
            net.add_edge(1 + n + j, sink, lo, hi, 0.0);
        }
        let lo: Vec<i64> = bounds.iter().map(|b| b.0).collect();
        let hi: Vec<i64> = bounds.iter().map(|b| b.1).collect();
        match (solve_min_cost_flow(&net), brute_transport(&cost, &lo, &hi)) {
            (Ok(sol), Some(best)) => {
                prop_assert!((sol.total_cost - best).abs() < 1e-9);
                for (e, f) in net.edges.iter().zip(&sol.flow) {
                    prop_assert!(e.lower <= *f && *f <= e.upper);
                }
                let recomputed: f64 = net.edges.iter().zip(&sol.flow).map(|(e, f)| e.cost * *f as f64).sum();
                prop_assert!((recomputed - sol.total_cost).abs() < 1e-9);
            }
            (Err(Error::Infeasible), None) => {}
            (got, want) => prop_assert!(false, "solver {:?}, brute force {:?}", got, want),
        }
    }

    #[test]
    fn assignment_is_injective(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 3..7)) {
        let sol = solve_assignment(&AssignmentInstance::new(rows.clone(), 3).unwrap()).unwrap();
        let mut agents = sol.matching.clone();
        agents.sort();
        agents.dedup();
        prop_assert_eq!(agents.len(), 3);
        let total: f64 = sol.matching.iter().enumerate().map(|(j, &t)| rows[t][j]).sum();
        prop_assert!((total - sol.total_profit).abs() < 1e-9);
    }
}

#[test]
fn assignment_rejects_bad_input() {
    assert!(matches!(
        AssignmentInstance::new(vec![vec![1.0, 2.0]], 2),
        Err(Error::TooFewAgents { .. })
    ));
    assert!(matches!(
        AssignmentInstance::new(vec![vec![f64::NAN]], 1),
        Err(Error::NonFiniteProfit { .. })
    ));
    assert!(matches!(
        AssignmentInstance::new(vec![vec![1.0]], 2),
        Err(Error::Dimension { .. })
    ));
}
