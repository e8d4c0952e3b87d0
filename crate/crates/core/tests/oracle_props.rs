use consensusdb::cluster::Clustering;
use consensusdb::error::Error;
use consensusdb::generate::{random_groups, random_tree, TreeParams};
use consensusdb::oracle::{
    exhaustive_optimum, expected_distance, Answer, AnswerSpace, Method, OracleConfig, Query, Source,
};
use consensusdb::set_consensus::{median_world_symdiff, SetMetric};
use consensusdb::topk::{median_topk_symdiff, TopKMetric};
use consensusdb::AndXorTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn trees(seed: u64, count: usize, labels: bool) -> Vec<AndXorTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let params = TreeParams {
        max_leaves: 10,
        labels,
        ..TreeParams::default()
    };
    (0..count).map(|_| random_tree(&mut rng, &params)).collect()
}

fn sampled(world_limit: usize, seed: u64) -> OracleConfig {
    OracleConfig {
        world_limit,
        samples: 20_000,
        seed,
        ..OracleConfig::default()
    }
}

#[test]
fn monte_carlo_lies_within_its_interval() {
    for (i, t) in trees(11, 12, false).iter().enumerate() {
        let k = t.keys().len().min(2);
        let q = Query::TopK {
            k,
            metric: TopKMetric::Kendall,
        };
        let ans = Answer::TopK(t.keys()[..k].to_vec());
        let exact = expected_distance(Source::Tree(t), q, &ans, &OracleConfig::default()).unwrap();
        let mc = expected_distance(Source::Tree(t), q, &ans, &sampled(0, i as u64)).unwrap();
        assert_eq!(exact.method, Method::Enumeration);
        assert_eq!(mc.method, Method::MonteCarlo);
        assert_eq!(mc.sample_count, 20_000);
        let hw = mc.ci_half_width.unwrap();
        assert!(
            (mc.expected_distance - exact.expected_distance).abs() <= hw.max(1e-12),
            "tree {i}: {} vs {} (±{hw})",
            mc.expected_distance,
            exact.expected_distance
        );
    }
}

#[test]
fn group_monte_carlo_lies_within_its_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for i in 0..8 {
        let p = random_groups(&mut rng, 6, 3);
        let ans = Answer::Counts(vec![2.0, 2.0, 2.0]);
        let exact = expected_distance(Source::Groups(&p), Query::GroupBy, &ans, &OracleConfig::default()).unwrap();
        let mc = expected_distance(Source::Groups(&p), Query::GroupBy, &ans, &sampled(1, i)).unwrap();
        assert!((mc.expected_distance - exact.expected_distance).abs() <= mc.ci_half_width.unwrap());
    }
}

#[test]
fn solvers_match_median_search() {
    for t in trees(13, 30, false) {
        let best = exhaustive_optimum(
            Source::Tree(&t),
            Query::Set(SetMetric::SymDiff),
            AnswerSpace::Median,
            &OracleConfig::default(),
        )
        .unwrap();
        assert!((median_world_symdiff(&t).expected_distance - best.expected_distance).abs() < 1e-9);
        let k = t.keys().len().min(2);
        let q = Query::TopK {
            k,
            metric: TopKMetric::SymDiff,
        };
        let ans = median_topk_symdiff(&t, k).unwrap();
        let got = expected_distance(
            Source::Tree(&t),
            q,
            &Answer::TopK(ans.items.clone()),
            &OracleConfig::default(),
        )
        .unwrap();
        let worlds = exhaustive_optimum(Source::Tree(&t), q, AnswerSpace::Median, &OracleConfig::default()).unwrap();
        assert!(got.expected_distance >= worlds.expected_distance - 1e-9);
        assert!((got.expected_distance - ans.expected_distance).abs() < 1e-9);
    }
}

#[test]
fn limits_are_reported() {
    let t = &trees(14, 1, true)[0];
    let c = Clustering::from_labels(t.keys().to_vec(), &vec![0; t.keys().len()]).unwrap();
    let tiny = OracleConfig {
        space_limit: 1,
        ..OracleConfig::default()
    };
    if t.keys().len() > 1 {
        assert!(matches!(
            exhaustive_optimum(Source::Tree(t), Query::Cluster, AnswerSpace::Mean, &tiny),
            Err(Error::SpaceTooLarge { .. })
        ));
    }
    let strict = OracleConfig {
        world_limit: 0,
        ..OracleConfig::default()
    };
    assert!(matches!(
        exhaustive_optimum(Source::Tree(t), Query::Cluster, AnswerSpace::Mean, &strict),
        Err(Error::TooManyWorlds { .. })
    ));
    assert!(expected_distance(
        Source::Tree(t),
        Query::Cluster,
        &Answer::Clustering(c),
        &OracleConfig::default()
    )
    .is_ok());
    let p = random_groups(&mut ChaCha8Rng::seed_from_u64(1), 3, 2);
    assert!(matches!(
        exhaustive_optimum(
            Source::Groups(&p),
            Query::GroupBy,
            AnswerSpace::Mean,
            &OracleConfig::default()
        ),
        Err(Error::ContinuousSpace(_))
    ));
}

#[test]
fn query_parsing() {
    assert_eq!(
        Query::parse("set", "jaccard", None).unwrap(),
        Query::Set(SetMetric::Jaccard)
    );
    assert_eq!(
        Query::parse("topk", "footrule", Some(2)).unwrap(),
        Query::TopK {
            k: 2,
            metric: TopKMetric::Footrule
        }
    );
    assert!(matches!(
        Query::parse("topk", "jaccard", Some(2)),
        Err(Error::MetricMismatch { .. })
    ));
    assert!(matches!(Query::parse("topk", "kendall", Some(0)), Err(Error::ZeroK)));
    assert!(matches!(
        Query::parse("groupby", "pairs", None),
        Err(Error::MetricMismatch { .. })
    ));
    assert!(Query::parse("cluster", "pairs", None).is_ok());
}
