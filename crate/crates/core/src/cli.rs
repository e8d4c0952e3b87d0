//! Command-line driver. Every command prints one JSON object
//! `{answer, expected_distance, method, diagnostics}` on stdout.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 infeasible or over
//! a limit.

use crate::aggregate::{self, GroupMatrix};
use crate::cluster::{self, Clustering};
use crate::error::{Error, Result};
use crate::io::{self, normalize_json, value_to_json, Data, Dataset, Format};
use crate::model::{AndXorTree, TupleAlternative, Value};
use crate::oracle::{self, Answer, OracleConfig, Query, Source};
use crate::set_consensus::{self, WorldAnswer};
use crate::topk::{self, TopKAnswer, TopKMetric};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value as Json};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const WORLD_LIMIT_VAR: &str = "CONSENSUSDB_WORLD_LIMIT";

#[derive(Parser, Debug)]
#[command(
    name = "consensusdb",
    version,
    about = "Consensus answers over probabilistic and/xor-tree relations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Mean,
    Median,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SetMetricArg {
    Symdiff,
    Jaccard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TopKMetricArg {
    Symdiff,
    Intersection,
    Footrule,
    Kendall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Approx {
    #[value(name = "upsilon-h")]
    UpsilonH,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the probability and key constraints of a dataset.
    Validate { file: PathBuf },
    /// List the possible worlds with their probabilities.
    Worlds {
        file: PathBuf,
        /// Fail when more worlds than this exist.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Marginal probability of every tuple alternative.
    Marginals { file: PathBuf },
    /// Mean or median world under symmetric difference or Jaccard distance.
    SetConsensus {
        file: PathBuf,
        #[arg(long, value_enum)]
        metric: SetMetricArg,
        #[arg(long, value_enum, default_value = "mean")]
        kind: Kind,
    },
    /// Consensus top-k answer.
    Topk {
        file: PathBuf,
        /// List length.
        #[arg(short = 'k')]
        k: usize,
        #[arg(long, value_enum)]
        metric: TopKMetricArg,
        #[arg(long, value_enum, default_value = "mean")]
        kind: Kind,
        /// Approximate intersection-metric answer instead of the exact one.
        #[arg(long, value_enum)]
        approx: Option<Approx>,
        /// Pivot runs for the kendall metric.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mean or median group-by count vector.
    Groupby {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "mean")]
        kind: Kind,
    },
    /// Consensus clustering by equal values.
    Cluster {
        file: PathBuf,
        /// Pivot runs; the cheapest clustering wins.
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Expected distance of a given answer, by enumeration or sampling.
    Eval {
        file: PathBuf,
        /// set, topk, groupby or cluster
        #[arg(long)]
        query: String,
        /// symdiff, jaccard, intersection, footrule, kendall, sqdist or pairs
        #[arg(long)]
        metric: String,
        /// The answer as JSON.
        #[arg(long)]
        answer: String,
        /// List length, for topk queries.
        #[arg(short = 'k')]
        k: Option<usize>,
        /// Monte Carlo samples when the worlds cannot be enumerated.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Failure of one command, with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Output printed before failing, if any.
    output: Option<Json>,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
            output: None,
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
        output: None,
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::MetricMismatch { .. } | Error::ZeroK => 1,
        Error::TooManyWorlds { .. }
        | Error::SpaceTooLarge { .. }
        | Error::Infeasible
        | Error::NegativeCycle
        | Error::ContinuousSpace(_) => 3,
        _ => 2,
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match run(cli.command) {
        Ok(doc) => {
            let _ = writeln!(out, "{}", render(doc));
            0
        }
        Err(f) => {
            if let Some(doc) = f.output {
                let _ = writeln!(out, "{}", render(doc));
            }
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn render(doc: Json) -> String {
    serde_json::to_string(&normalize_json(doc)).expect("JSON values serialize")
}

fn world_limit() -> std::result::Result<usize, Failure> {
    match std::env::var(WORLD_LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{WORLD_LIMIT_VAR} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(oracle::DEFAULT_WORLD_LIMIT),
    }
}

fn load(path: &Path) -> std::result::Result<Dataset, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
        output: None,
    })?;
    Ok(io::parse_dataset(&text)?)
}

fn input_info(path: &Path, ds: &Dataset) -> Json {
    json!({
        "path": path.display().to_string(),
        "format": ds.format.name(),
        "sha256": ds.checksum,
    })
}

fn tree_of(ds: &Dataset) -> Result<&AndXorTree> {
    match &ds.data {
        Data::Tree(t) => Ok(t),
        Data::Groups(_) => Err(Error::WrongModel("an and/xor tree (got a group matrix)")),
    }
}

fn groups_of(ds: &Dataset) -> Result<GroupMatrix> {
    match &ds.data {
        Data::Tree(t) => GroupMatrix::from_tree(t),
        Data::Groups(p) => Ok(p.clone()),
    }
}

fn alternative_json(a: &TupleAlternative) -> Json {
    json!({"key": a.key, "value": value_to_json(&a.value)})
}

fn output(answer: Json, expected: Option<f64>, method: &str, diagnostics: Map<String, Json>) -> Json {
    json!({
        "answer": answer,
        "expected_distance": expected,
        "method": method,
        "diagnostics": Json::Object(diagnostics),
    })
}

fn diagnostics(path: &Path, ds: &Dataset, warnings: &[String]) -> Map<String, Json> {
    let mut d = Map::new();
    d.insert("input".into(), input_info(path, ds));
    d.insert("warnings".into(), json!(warnings));
    d
}

fn run(command: Command) -> std::result::Result<Json, Failure> {
    match command {
        Command::Validate { file } => validate(&file),
        Command::Worlds { file, limit } => {
            let ds = load(&file)?;
            let tree = tree_of(&ds)?;
            let limit = match limit {
                Some(l) => l,
                None => world_limit()?,
            };
            let worlds = tree.enumerate_worlds(limit)?;
            let answer: Vec<Json> = worlds
                .iter()
                .map(|w| {
                    json!({
                        "alternatives": w.alternatives.iter().map(alternative_json).collect::<Vec<_>>(),
                        "prob": w.prob,
                    })
                })
                .collect();
            let mut d = diagnostics(&file, &ds, &[]);
            d.insert("world_count".into(), json!(worlds.len()));
            Ok(output(Json::Array(answer), None, "enumeration", d))
        }
        Command::Marginals { file } => {
            let ds = load(&file)?;
            let tree = tree_of(&ds)?;
            let answer: Vec<Json> = crate::genfunc::alternative_marginals(tree)
                .iter()
                .map(|(a, p)| json!({"key": a.key, "value": value_to_json(&a.value), "prob": p}))
                .collect();
            Ok(output(
                Json::Array(answer),
                None,
                "tree-walk",
                diagnostics(&file, &ds, &[]),
            ))
        }
        Command::SetConsensus { file, metric, kind } => {
            let ds = load(&file)?;
            let tree = tree_of(&ds)?;
            let (ans, method): (WorldAnswer, &str) = match (metric, kind) {
                (SetMetricArg::Symdiff, Kind::Mean) => (set_consensus::mean_world_symdiff(tree), "threshold"),
                (SetMetricArg::Symdiff, Kind::Median) => {
                    let a = set_consensus::median_world_symdiff(tree);
                    let m = if a.warnings.is_empty() {
                        "threshold"
                    } else {
                        "tree-walk"
                    };
                    (a, m)
                }
                (SetMetricArg::Jaccard, Kind::Mean) => {
                    (set_consensus::mean_world_jaccard_independent(tree)?, "prefix-scan")
                }
                (SetMetricArg::Jaccard, Kind::Median) => {
                    (set_consensus::median_world_jaccard_bid(tree)?, "prefix-scan")
                }
            };
            let answer = Json::Array(ans.alternatives.iter().map(alternative_json).collect());
            let mut d = diagnostics(&file, &ds, &ans.warnings);
            d.insert("metric".into(), json!(ans.metric.to_string()));
            d.insert("kind".into(), json!(ans.kind.to_string()));
            Ok(output(answer, Some(ans.expected_distance), method, d))
        }
        Command::Topk {
            file,
            k,
            metric,
            kind,
            approx,
            trials,
            seed,
        } => {
            let ds = load(&file)?;
            let tree = tree_of(&ds)?;
            let metric = match metric {
                TopKMetricArg::Symdiff => TopKMetric::SymDiff,
                TopKMetricArg::Intersection => TopKMetric::Intersection,
                TopKMetricArg::Footrule => TopKMetric::Footrule,
                TopKMetricArg::Kendall => TopKMetric::Kendall,
            };
            let ans: TopKAnswer = match approx {
                Some(Approx::UpsilonH) => {
                    if metric != TopKMetric::Intersection || kind != Kind::Mean {
                        return Err(usage("--approx upsilon-h applies to --metric intersection --kind mean"));
                    }
                    topk::approx_topk_intersection_upsilon_h(tree, k)?
                }
                None => topk::consensus_topk(tree, k, metric, kind == Kind::Median, trials, seed)?,
            };
            let mut warnings = Vec::new();
            if ans.short {
                warnings.push(format!("no possible world yields {k} tuples; the answer is shorter"));
            }
            let mut d = diagnostics(&file, &ds, &warnings);
            d.insert("k".into(), json!(k));
            d.insert("metric".into(), json!(metric.name()));
            d.insert("short".into(), json!(ans.short));
            if metric == TopKMetric::Kendall {
                d.insert("trials".into(), json!(trials));
                d.insert("seed".into(), json!(seed));
            }
            Ok(output(json!(ans.items), Some(ans.expected_distance), &ans.method, d))
        }
        Command::Groupby { file, kind } => {
            let ds = load(&file)?;
            let p = groups_of(&ds)?;
            let mut d = diagnostics(&file, &ds, &[]);
            d.insert("groups".into(), json!(p.groups()));
            let mean = aggregate::mean_counts(&p);
            match kind {
                Kind::Mean => {
                    let e = aggregate::expected_sq_distance(&p, &mean)?;
                    Ok(output(json!(mean), Some(e), "column-sums", d))
                }
                Kind::Median => {
                    let med = aggregate::median_counts(&p)?;
                    d.insert("mean".into(), json!(med.mean));
                    Ok(output(
                        json!(med.counts),
                        Some(med.expected_distance),
                        "min-cost-flow",
                        d,
                    ))
                }
            }
        }
        Command::Cluster { file, trials, seed } => {
            let ds = load(&file)?;
            let tree = tree_of(&ds)?;
            let ans = cluster::consensus_cluster(tree, trials, seed)?;
            let mut d = diagnostics(&file, &ds, &[]);
            d.insert("trials".into(), json!(ans.trials));
            d.insert("seed".into(), json!(seed));
            Ok(output(
                json!(ans.clustering.clusters()),
                Some(ans.expected_cost),
                "pivot",
                d,
            ))
        }
        Command::Eval {
            file,
            query,
            metric,
            answer,
            k,
            samples,
            seed,
        } => {
            let ds = load(&file)?;
            let q = Query::parse(&query, &metric, k)?;
            let config = OracleConfig {
                world_limit: world_limit()?,
                samples: samples.unwrap_or(oracle::DEFAULT_SAMPLES),
                seed,
                ..OracleConfig::default()
            };
            let doc: Json = serde_json::from_str(&answer).map_err(|e| usage(format!("--answer is not JSON: {e}")))?;
            let groups;
            let source = match q {
                Query::GroupBy => {
                    groups = groups_of(&ds)?;
                    Source::Groups(&groups)
                }
                _ => Source::Tree(tree_of(&ds)?),
            };
            let parsed = parse_answer(source, q, &doc)?;
            let report = oracle::expected_distance(source, q, &parsed, &config)?;
            let mut d = diagnostics(&file, &ds, &[]);
            d.insert("query".into(), json!(query));
            d.insert("metric".into(), json!(metric));
            d.insert("sample_count".into(), json!(report.sample_count));
            d.insert("seed".into(), json!(report.seed));
            d.insert("ci_half_width".into(), json!(report.ci_half_width));
            Ok(output(
                doc,
                Some(report.expected_distance),
                &report.method.to_string(),
                d,
            ))
        }
    }
}

fn validate(file: &Path) -> std::result::Result<Json, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| Failure {
        code: 2,
        message: format!("cannot read {}: {e}", file.display()),
        output: None,
    })?;
    let format = io::detect_format(&text);
    let checksum = io::sha256_hex(text.as_bytes());
    let mut d = Map::new();
    d.insert(
        "input".into(),
        json!({"path": file.display().to_string(), "format": format.name(), "sha256": checksum}),
    );
    d.insert("warnings".into(), json!([]));
    let summary = match format {
        Format::TreeJson => {
            let tree = io::parse_tree_unchecked(&text)?;
            let report = tree.validate();
            if !report.is_valid() {
                let violations: Vec<Json> = report
                    .violations
                    .iter()
                    .map(|v| json!({"path": v.path, "message": v.to_string()}))
                    .collect();
                return Err(Failure {
                    code: 2,
                    message: format!("invalid and/xor tree: {report}"),
                    output: Some(output(
                        json!({"valid": false, "violations": violations}),
                        None,
                        "validate",
                        d,
                    )),
                });
            }
            json!({"valid": true, "keys": tree.keys().len(), "leaves": tree.leaf_count()})
        }
        Format::BidCsv => {
            let tree = io::parse_bid_csv(&text)?;
            json!({"valid": true, "keys": tree.keys().len(), "leaves": tree.leaf_count()})
        }
        Format::GroupCsv => {
            let p = io::parse_group_csv(&text)?;
            json!({"valid": true, "tuples": p.tuple_count(), "groups": p.group_count()})
        }
    };
    Ok(output(summary, None, "validate", d))
}

fn json_value(doc: &Json) -> Result<Value> {
    match doc {
        Json::Number(n) => Ok(Value::Number(n.as_f64().unwrap_or(f64::NAN))),
        Json::String(s) => Ok(Value::Label(s.clone())),
        other => Err(Error::BadAnswer(format!("`{other}` is not a number or string"))),
    }
}

fn json_alternative(doc: &Json) -> Result<TupleAlternative> {
    let (key, value) = match doc {
        Json::Object(o) => (o.get("key"), o.get("value")),
        Json::Array(a) if a.len() == 2 => (a.first(), a.get(1)),
        _ => (None, None),
    };
    match (key.and_then(Json::as_str), value) {
        (Some(k), Some(v)) => Ok(TupleAlternative::new(k, json_value(v)?)),
        _ => Err(Error::BadAnswer(format!("`{doc}` is not a tuple alternative"))),
    }
}

fn strings(doc: &Json) -> Result<Vec<String>> {
    doc.as_array()
        .ok_or_else(|| Error::BadAnswer("expected an array".into()))?
        .iter()
        .map(|x| {
            x.as_str()
                .map(str::to_string)
                .ok_or_else(|| Error::BadAnswer(format!("`{x}` is not a string")))
        })
        .collect()
}

fn parse_answer(source: Source, query: Query, doc: &Json) -> Result<Answer> {
    let items = || {
        doc.as_array()
            .ok_or_else(|| Error::BadAnswer("expected an array".into()))
    };
    Ok(match query {
        Query::Set(_) => {
            let mut set = items()?.iter().map(json_alternative).collect::<Result<Vec<_>>>()?;
            set.sort();
            set.dedup();
            Answer::Set(set)
        }
        Query::TopK { .. } => Answer::TopK(strings(doc)?),
        Query::GroupBy => Answer::Counts(
            items()?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| Error::BadAnswer(format!("`{x}` is not a number")))
                })
                .collect::<Result<_>>()?,
        ),
        Query::Cluster => {
            let Source::Tree(tree) = source else {
                return Err(Error::WrongModel("an and/xor tree"));
            };
            let clusters = items()?.iter().map(strings).collect::<Result<Vec<_>>>()?;
            Answer::Clustering(Clustering::from_clusters(tree.keys(), &clusters)?)
        }
    })
}
