//! Plain-text edge list: one `src dst weight [directed|undirected]` per line,
//! `#` starts a comment.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write;

use super::{DuplicatePolicy, Edge, Graph, GraphBuilder, NodeId};
use crate::error::GraphError;

struct RawLine<'a> {
    line: usize,
    src: &'a str,
    dst: &'a str,
    weight: f64,
    undirected: bool,
}

/// Node tokens are compacted to dense ids: integer tokens first in numeric
/// order, then everything else lexicographically. Integer-labelled graphs with
/// ids `0..m` therefore keep their ids.
fn label_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => Ordering::Less,
        (Err(_), Ok(_)) => Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

pub fn load_edge_list(text: &str) -> Result<Graph, GraphError> {
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_err = |message: String| GraphError::Parse {
            line: line_no,
            message,
        };
        if !(3..=4).contains(&fields.len()) {
            return Err(parse_err(format!(
                "expected `src dst weight [directed|undirected]`, got {} fields",
                fields.len()
            )));
        }
        let weight: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(format!("weight {:?} is not a number", fields[2])))?;
        if !(weight.is_finite() && weight > 0.0) {
            return Err(parse_err(format!("weight {weight} must be positive")));
        }
        let undirected = match fields.get(3) {
            None | Some(&"directed") => false,
            Some(&"undirected") => true,
            Some(other) => {
                return Err(parse_err(format!(
                    "direction must be `directed` or `undirected`, got {other:?}"
                )))
            }
        };
        raw.push(RawLine {
            line: line_no,
            src: fields[0],
            dst: fields[1],
            weight,
            undirected,
        });
    }
    if raw.is_empty() {
        return Err(GraphError::Empty);
    }

    let mut labels: Vec<&str> = raw.iter().flat_map(|r| [r.src, r.dst]).collect();
    labels.sort_by(|a, b| label_order(a, b));
    labels.dedup();
    let index: HashMap<&str, NodeId> = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, NodeId(i)))
        .collect();

    let mut builder = GraphBuilder::new(labels.len());
    for r in &raw {
        let (s, d) = (index[r.src], index[r.dst]);
        let mut add = |src, dst| {
            builder
                .add(
                    Edge {
                        src,
                        dst,
                        weight: r.weight,
                    },
                    DuplicatePolicy::Reject,
                )
                .map_err(|e| GraphError::Parse {
                    line: r.line,
                    message: e.to_string(),
                })
        };
        add(s, d)?;
        if r.undirected {
            add(d, s)?;
        }
    }
    let graph = builder.finish();
    if graph.edge_count() == 0 {
        return Err(GraphError::Empty);
    }
    Ok(graph.with_labels(labels.into_iter().map(str::to_owned).collect()))
}

/// Serializes every stored edge as a `directed` line using node labels.
pub fn to_edge_list(graph: &Graph) -> String {
    let mut out = String::new();
    for e in graph.edges() {
        writeln!(
            out,
            "{} {} {} directed",
            graph.label(e.src),
            graph.label(e.dst),
            e.weight
        )
        .unwrap();
    }
    out
}
