use consensusdb::io::parse_tree;
use consensusdb::oracle::{expected_distance, Answer, OracleConfig, Query, Source};
use consensusdb::topk::TopKMetric;
use serde_json::Value as Json;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_consensusdb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Json {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn topk_mean_on_the_three_world_example() {
    let out = run(&[
        "topk",
        &fixture("three_worlds.json"),
        "-k",
        "2",
        "--metric",
        "symdiff",
        "--kind",
        "mean",
    ]);
    assert!(out.status.success());
    let doc = json(&out);
    assert_eq!(doc["answer"], serde_json::json!(["t3", "t4"]));
    assert_eq!(doc["expected_distance"], serde_json::json!(0.3));
    assert_eq!(doc["diagnostics"]["input"]["format"], "tree-json");
}

#[test]
fn median_world_on_the_three_world_example() {
    let doc = json(&run(&[
        "set-consensus",
        &fixture("three_worlds.json"),
        "--metric",
        "symdiff",
        "--kind",
        "median",
    ]));
    assert_eq!(
        doc["answer"],
        serde_json::json!([{"key": "t3", "value": 8.0}, {"key": "t4", "value": 4.0}, {"key": "t5", "value": 3.0}])
    );
    assert_eq!(doc["expected_distance"], serde_json::json!(3.6));
    assert_eq!(doc["diagnostics"]["warnings"].as_array().map(Vec::len), Some(1));
}

#[test]
fn invalid_tree_exits_with_two() {
    let out = run(&["validate", &fixture("bad.json")]);
    assert_eq!(out.status.code(), Some(2));
    let doc = json(&out);
    assert_eq!(doc["answer"]["valid"], false);
    assert_eq!(doc["answer"]["violations"][0]["path"], "$.children[0]");
    assert!(String::from_utf8_lossy(&out.stderr).contains("probability"));
    assert_eq!(
        run(&[
            "topk",
            &fixture("bad.json"),
            "-k",
            "1",
            "--metric",
            "symdiff",
            "--kind",
            "mean"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(
        run(&[
            "topk",
            &fixture("three_worlds.json"),
            "-k",
            "0",
            "--metric",
            "symdiff",
            "--kind",
            "mean"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "topk",
            &fixture("three_worlds.json"),
            "-k",
            "2",
            "--metric",
            "jaccard",
            "--kind",
            "mean"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run(&[
            "topk",
            &fixture("three_worlds.json"),
            "-k",
            "2",
            "--metric",
            "kendall",
            "--kind",
            "median"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["validate", &fixture("missing.json")]).status.code(), Some(2));
}

#[test]
fn world_limit_is_enforced() {
    let out = Command::new(env!("CARGO_BIN_EXE_consensusdb"))
        .args(["worlds", &fixture("three_worlds.json")])
        .env("CONSENSUSDB_WORLD_LIMIT", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_consensusdb"))
        .args(["worlds", &fixture("three_worlds.json")])
        .env("CONSENSUSDB_WORLD_LIMIT", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_agrees_with_the_library() {
    let tree = parse_tree(&std::fs::read_to_string(fixture("three_worlds.json")).unwrap()).unwrap();
    for metric in TopKMetric::ALL {
        let out = run(&[
            "eval",
            &fixture("three_worlds.json"),
            "--query",
            "topk",
            "--metric",
            metric.name(),
            "-k",
            "2",
            "--answer",
            r#"["t4","t1"]"#,
        ]);
        assert!(out.status.success());
        let doc = json(&out);
        let want = expected_distance(
            Source::Tree(&tree),
            Query::TopK { k: 2, metric },
            &Answer::TopK(vec!["t4".into(), "t1".into()]),
            &OracleConfig::default(),
        )
        .unwrap();
        assert!((doc["expected_distance"].as_f64().unwrap() - want.expected_distance).abs() < 1e-11);
        assert_eq!(doc["method"], "enumeration");
    }
    let doc = json(&run(&[
        "eval",
        &fixture("three_worlds.json"),
        "--query",
        "set",
        "--metric",
        "symdiff",
        "--answer",
        r#"[["t3", 8]]"#,
    ]));
    assert!(doc["expected_distance"].as_f64().is_some());
}

#[test]
fn group_and_cluster_commands() {
    let doc = json(&run(&["groupby", &fixture("groups.csv"), "--kind", "median"]));
    assert_eq!(
        doc["answer"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .sum::<u64>(),
        5
    );
    let doc = json(&run(&["cluster", &fixture("labels.csv"), "--seed", "1"]));
    let members: usize = doc["answer"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_array().unwrap().len())
        .sum();
    assert_eq!(members, 4);
    assert_eq!(
        run(&["groupby", &fixture("three_worlds.json"), "--kind", "median"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn output_is_stable_across_runs() {
    let args = [
        "topk",
        &fixture("sensors.csv"),
        "-k",
        "2",
        "--metric",
        "kendall",
        "--kind",
        "mean",
        "--seed",
        "9",
    ];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
