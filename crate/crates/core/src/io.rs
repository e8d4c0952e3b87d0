//! Dataset formats.
//!
//! * Tree documents are JSON. Every node has `"node": "and" | "or" | "leaf"`;
//!   inner nodes list `children`, children of an OR node also carry `prob`,
//!   and leaves carry `key` and `value` (number or string).
//! * BID tables are CSV with the header `key,value,prob`.
//! * Group matrices are CSV whose header names the groups; each further row
//!   holds one tuple's group probabilities.

use crate::aggregate::GroupMatrix;
use crate::error::{Error, Result};
use crate::model::{from_bid, AndXorTree, BidRow, Node, Value};
use serde_json::{json, Map, Value as Json};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    TreeJson,
    BidCsv,
    GroupCsv,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::TreeJson => "tree-json",
            Format::BidCsv => "bid-csv",
            Format::GroupCsv => "group-csv",
        }
    }
}

#[derive(Clone, Debug)]
pub enum Data {
    Tree(AndXorTree),
    Groups(GroupMatrix),
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub data: Data,
    pub format: Format,
    /// Hex SHA-256 of the raw input.
    pub checksum: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Guesses the format from the content: JSON documents start with `{`, BID
/// tables have the header `key,value,prob`, anything else is a group matrix.
pub fn detect_format(text: &str) -> Format {
    let trimmed = text.trim_start_matches('\u{feff}').trim_start();
    if trimmed.starts_with('{') {
        return Format::TreeJson;
    }
    let header: Vec<String> = trimmed
        .lines()
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.trim().to_ascii_lowercase())
        .collect();
    if header == ["key", "value", "prob"] {
        Format::BidCsv
    } else {
        Format::GroupCsv
    }
}

pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let format = detect_format(text);
    let data = match format {
        Format::TreeJson => Data::Tree(parse_tree(text)?),
        Format::BidCsv => Data::Tree(parse_bid_csv(text)?),
        Format::GroupCsv => Data::Groups(parse_group_csv(text)?),
    };
    Ok(Dataset {
        data,
        format,
        checksum: sha256_hex(text.as_bytes()),
    })
}

/// Parses a tree document and validates it.
pub fn parse_tree(text: &str) -> Result<AndXorTree> {
    let tree = parse_tree_unchecked(text)?;
    let report = tree.validate();
    if report.is_valid() {
        Ok(tree)
    } else {
        Err(Error::InvalidTree(report))
    }
}

/// Parses a tree document without checking the probability and key
/// constraints.
pub fn parse_tree_unchecked(text: &str) -> Result<AndXorTree> {
    let doc: Json = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(AndXorTree::unchecked(node_from_json(&doc, "$", false)?.1))
}

fn structure(path: &str, message: impl Into<String>) -> Error {
    Error::Structure {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Returns the node and, for OR children, its edge probability.
fn node_from_json(doc: &Json, path: &str, or_child: bool) -> Result<(f64, Node)> {
    let obj = doc.as_object().ok_or_else(|| structure(path, "expected an object"))?;
    let kind = obj
        .get("node")
        .and_then(Json::as_str)
        .ok_or_else(|| structure(path, "missing string field `node`"))?;
    let allowed: &[&str] = match kind {
        "leaf" => &["node", "key", "value", "prob"],
        "and" | "or" => &["node", "children", "prob"],
        other => return Err(structure(path, format!("unknown node kind `{other}`"))),
    };
    if let Some(extra) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(structure(path, format!("unexpected field `{extra}`")));
    }
    let prob = match (obj.get("prob"), or_child) {
        (Some(p), true) => p.as_f64().ok_or_else(|| structure(path, "`prob` must be a number"))?,
        (None, true) => return Err(structure(path, "child of an OR node needs `prob`")),
        (Some(_), false) => return Err(structure(path, "`prob` is only allowed on children of an OR node")),
        (None, false) => 1.0,
    };
    let node = match kind {
        "leaf" => {
            let key = obj
                .get("key")
                .and_then(Json::as_str)
                .ok_or_else(|| structure(path, "leaf needs a string `key`"))?;
            let value = match obj.get("value") {
                Some(Json::Number(n)) => Value::Number(n.as_f64().ok_or_else(|| structure(path, "bad number"))?),
                Some(Json::String(s)) => Value::Label(s.clone()),
                _ => return Err(structure(path, "leaf needs a number or string `value`")),
            };
            Node::Leaf(crate::model::TupleAlternative::new(key, value))
        }
        _ => {
            let children = obj
                .get("children")
                .and_then(Json::as_array)
                .ok_or_else(|| structure(path, "missing array field `children`"))?;
            let parsed: Vec<(f64, Node)> = children
                .iter()
                .enumerate()
                .map(|(i, c)| node_from_json(c, &format!("{path}.children[{i}]"), kind == "or"))
                .collect::<Result<_>>()?;
            if kind == "or" {
                Node::Or(parsed)
            } else {
                Node::And(parsed.into_iter().map(|(_, n)| n).collect())
            }
        }
    };
    Ok((prob, node))
}

pub fn value_to_json(v: &Value) -> Json {
    match v {
        Value::Number(x) => json!(x),
        Value::Label(s) => json!(s),
    }
}

fn node_to_json(node: &Node, prob: Option<f64>) -> Json {
    let mut obj = Map::new();
    match node {
        Node::Leaf(a) => {
            obj.insert("node".into(), json!("leaf"));
            obj.insert("key".into(), json!(a.key));
            obj.insert("value".into(), value_to_json(&a.value));
        }
        Node::And(children) => {
            obj.insert("node".into(), json!("and"));
            obj.insert(
                "children".into(),
                children.iter().map(|c| node_to_json(c, None)).collect(),
            );
        }
        Node::Or(children) => {
            obj.insert("node".into(), json!("or"));
            obj.insert(
                "children".into(),
                children.iter().map(|(p, c)| node_to_json(c, Some(*p))).collect(),
            );
        }
    }
    if let Some(p) = prob {
        obj.insert("prob".into(), json!(p));
    }
    Json::Object(obj)
}

pub fn serialize_tree(tree: &AndXorTree) -> String {
    serde_json::to_string_pretty(&node_to_json(tree.root(), None)).expect("JSON values serialize")
}

fn parse_value(field: &str) -> Value {
    match field.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Value::Number(x),
        _ => Value::Label(field.trim().to_string()),
    }
}

pub fn parse_bid_csv(text: &str) -> Result<AndXorTree> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.to_ascii_lowercase()).collect();
    if header != ["key", "value", "prob"] {
        return Err(Error::Bid(format!(
            "expected header key,value,prob, got {}",
            header.join(",")
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let prob: f64 = record[2]
            .parse()
            .map_err(|_| Error::Bid(format!("line {line}: `{}` is not a probability", &record[2])))?;
        rows.push(BidRow::new(&record[0], parse_value(&record[1]), prob));
    }
    from_bid(&rows)
}

pub fn serialize_bid_csv(tree: &AndXorTree) -> Result<String> {
    let blocks = tree.as_bid().ok_or(Error::WrongModel("a BID relation"))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["key", "value", "prob"])?;
    for b in blocks {
        for (v, p) in &b.alternatives {
            w.write_record([b.key.clone(), v.to_string(), p.to_string()])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

pub fn parse_group_csv(text: &str) -> Result<GroupMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let groups: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::GroupMatrix(format!("line {line}: `{f}` is not a probability")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    GroupMatrix::new(groups, rows)
}

pub fn serialize_group_csv(p: &GroupMatrix) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(p.groups())?;
    for row in p.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

/// Rounds to 12 significant digits so printed output is stable.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Copies `doc` with every float rounded by [`round12`].
pub fn normalize_json(doc: Json) -> Json {
    match doc {
        Json::Number(n) if n.is_f64() => json!(round12(n.as_f64().expect("f64 number"))),
        Json::Array(items) => Json::Array(items.into_iter().map(normalize_json).collect()),
        Json::Object(obj) => Json::Object(obj.into_iter().map(|(k, v)| (k, normalize_json(v))).collect()),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::three_world_example;

    const THREE_WORLDS: &str = r#"{"node": "or", "children": [
        {"prob": 0.3, "node": "and", "children": [
            {"node": "leaf", "key": "t3", "value": 6},
            {"node": "leaf", "key": "t2", "value": 5},
            {"node": "leaf", "key": "t1", "value": 1}]},
        {"prob": 0.3, "node": "and", "children": [
            {"node": "leaf", "key": "t3", "value": 9},
            {"node": "leaf", "key": "t1", "value": 7},
            {"node": "leaf", "key": "t4", "value": 0}]},
        {"prob": 0.4, "node": "and", "children": [
            {"node": "leaf", "key": "t3", "value": 8},
            {"node": "leaf", "key": "t4", "value": 4},
            {"node": "leaf", "key": "t5", "value": 3}]}]}"#;

    #[test]
    fn parses_the_three_world_tree() {
        let tree = parse_tree(THREE_WORLDS).unwrap();
        assert_eq!(tree.root(), three_world_example().root());
        assert_eq!(tree.enumerate_worlds(10).unwrap().len(), 3);
    }

    #[test]
    fn bare_leaf() {
        let tree = parse_tree(r#"{"node":"leaf","key":"a","value":"x"}"#).unwrap();
        assert_eq!(tree.enumerate_worlds(10).unwrap().len(), 1);
    }

    #[test]
    fn probability_overflow_names_the_node() {
        let text = r#"{"node":"and","children":[{"node":"or","children":[
            {"prob":0.7,"node":"leaf","key":"a","value":1},
            {"prob":0.5,"node":"leaf","key":"a","value":2}]}]}"#;
        match parse_tree(text) {
            Err(Error::InvalidTree(report)) => assert!(report.to_string().contains("$.children[0]")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_and_structure_errors() {
        assert!(matches!(
            parse_tree("{\n  \"node\": }"),
            Err(Error::Syntax { line: 2, .. })
        ));
        match parse_tree(r#"{"node":"and","children":[{"node":"leaf","key":"a"}]}"#) {
            Err(Error::Structure { path, .. }) => assert_eq!(path, "$.children[0]"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_tree(r#"{"node":"and","children":[{"node":"leaf","key":"a","value":1,"prob":0.5}]}"#),
            Err(Error::Structure { .. })
        ));
        assert!(matches!(
            parse_tree(r#"{"node":"or","children":[{"node":"leaf","key":"a","value":1}]}"#),
            Err(Error::Structure { .. })
        ));
    }

    #[test]
    fn tree_round_trip() {
        let tree = parse_tree(THREE_WORLDS).unwrap();
        let again = parse_tree(&serialize_tree(&tree)).unwrap();
        assert_eq!(tree.root(), again.root());
    }

    #[test]
    fn bid_csv() {
        let text = "key,value,prob\nt1,1,0.4\nt1,2,0.5\nt2,x,1\nt3,3,0.2\nt3,4,0.3\nt4,5,0.6\nt4,6,0.1\n";
        let tree = parse_bid_csv(text).unwrap();
        assert_eq!(tree.keys().len(), 4);
        assert_eq!(tree.as_bid().unwrap().len(), 4);
        let again = parse_bid_csv(&serialize_bid_csv(&tree).unwrap()).unwrap();
        assert_eq!(tree.root(), again.root());
        let empty = parse_bid_csv("key,value,prob\n").unwrap();
        assert_eq!(empty.enumerate_worlds(10).unwrap().len(), 1);
        assert!(parse_bid_csv("key,value,prob\nt1,1,1.5\n").is_err());
        assert!(parse_bid_csv("key,value,prob\nt1,1,abc\n").is_err());
        assert!(parse_bid_csv("k,v\n").is_err());
    }

    #[test]
    fn group_csv() {
        let text = "A,B\n0.5,0.5\n1,0\n";
        let p = parse_group_csv(text).unwrap();
        assert_eq!(p.groups(), &["A".to_string(), "B".to_string()]);
        assert_eq!(parse_group_csv(&serialize_group_csv(&p).unwrap()).unwrap(), p);
        assert!(parse_group_csv("A,B\n0.5,0.4\n").is_err());
        assert!(parse_group_csv("A,B\n0.5,x\n").is_err());
    }

    #[test]
    fn detection() {
        assert_eq!(detect_format("  {\"node\":1}"), Format::TreeJson);
        assert_eq!(detect_format("key, value, prob\n"), Format::BidCsv);
        assert_eq!(detect_format("A,B\n1,0\n"), Format::GroupCsv);
    }

    #[test]
    fn rounding() {
        assert_eq!(round12(0.1 + 0.2), 0.3);
        assert_eq!(round12(-0.0).to_string(), "0");
        assert_eq!(round12(123456.7890123456), 123456.789012);
    }
}
