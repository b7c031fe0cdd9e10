//! GraphML subset: nodes and edges carrying one numeric weight attribute.
//!
//! Road-network exports (e.g. from OSMnx) are multigraphs; parallel edges
//! collapse to their minimum weight.

use std::collections::HashMap;
use std::fmt::Write;
use std::path::Path;

use super::{DuplicatePolicy, Edge, Graph, GraphBuilder, NodeId};
use crate::error::GraphError;

pub const DEFAULT_WEIGHT_ATTR: &str = "length";

const GRAPHML_NS: &str = "http://graphml.graphdrawing.org/xmlns";

pub fn load_graphml(path: &Path, weight_attr: &str) -> Result<Graph, GraphError> {
    let text = std::fs::read_to_string(path).map_err(|source| GraphError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_graphml(&text, weight_attr)
}

struct WeightKey<'a> {
    id: &'a str,
    default: Option<&'a str>,
}

pub fn parse_graphml(text: &str, weight_attr: &str) -> Result<Graph, GraphError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| GraphError::GraphMl(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(GraphError::GraphMl(format!(
            "root element is <{}>, expected <graphml>",
            root.tag_name().name()
        )));
    }

    // Match on attr.name first; fall back to a key whose id equals the name.
    let keys: Vec<_> = root
        .children()
        .filter(|n| n.has_tag_name("key"))
        .filter(|n| matches!(n.attribute("for"), Some("edge") | Some("all") | None))
        .collect();
    let key_node = keys
        .iter()
        .find(|n| n.attribute("attr.name") == Some(weight_attr))
        .or_else(|| keys.iter().find(|n| n.attribute("id") == Some(weight_attr)));
    let weight_key = key_node.and_then(|n| {
        Some(WeightKey {
            id: n.attribute("id")?,
            default: n
                .children()
                .find(|c| c.has_tag_name("default"))
                .and_then(|c| c.text())
                .map(str::trim),
        })
    });

    let graph_el = root
        .children()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| GraphError::GraphMl("no <graph> element".into()))?;
    let undirected_default = graph_el.attribute("edgedefault") == Some("undirected");

    let mut labels = Vec::new();
    let mut index = HashMap::new();
    for node in graph_el.children().filter(|n| n.has_tag_name("node")) {
        let id = node
            .attribute("id")
            .ok_or_else(|| GraphError::GraphMl("<node> without id".into()))?;
        if index.insert(id, NodeId(labels.len())).is_some() {
            return Err(GraphError::GraphMl(format!("duplicate node id {id:?}")));
        }
        labels.push(id.to_owned());
    }

    let mut builder = GraphBuilder::new(labels.len());
    let mut edge_seen = false;
    for el in graph_el.children().filter(|n| n.has_tag_name("edge")) {
        edge_seen = true;
        let (src, dst) = match (el.attribute("source"), el.attribute("target")) {
            (Some(s), Some(t)) => (s, t),
            _ => return Err(GraphError::GraphMl("<edge> without source/target".into())),
        };
        let name = match el.attribute("id") {
            Some(id) => format!("{id:?} ({src} -> {dst})"),
            None => format!("{src} -> {dst}"),
        };
        let lookup = |id: &str| {
            index.get(id).copied().ok_or_else(|| {
                GraphError::GraphMl(format!("edge {name} references unknown node {id:?}"))
            })
        };
        let (s, d) = (lookup(src)?, lookup(dst)?);

        let raw = weight_key.as_ref().and_then(|k| {
            el.children()
                .find(|c| c.has_tag_name("data") && c.attribute("key") == Some(k.id))
                .map(|c| c.text().unwrap_or("").trim())
                .or(k.default)
        });
        let raw = raw.ok_or_else(|| GraphError::MissingWeight {
            edge: name.clone(),
            attr: weight_attr.to_owned(),
        })?;
        let weight: f64 = raw.parse().map_err(|_| GraphError::NonNumericWeight {
            edge: name.clone(),
            attr: weight_attr.to_owned(),
            value: raw.to_owned(),
        })?;
        if s != d && !(weight.is_finite() && weight > 0.0) {
            return Err(GraphError::InvalidWeight {
                src: s,
                dst: d,
                weight,
            });
        }

        let undirected = match el.attribute("directed") {
            Some("true") => false,
            Some("false") => true,
            _ => undirected_default,
        };
        builder.add(
            Edge {
                src: s,
                dst: d,
                weight,
            },
            DuplicatePolicy::KeepMin,
        )?;
        if undirected {
            builder.add(
                Edge {
                    src: d,
                    dst: s,
                    weight,
                },
                DuplicatePolicy::KeepMin,
            )?;
        }
    }
    if !edge_seen {
        return Err(GraphError::Empty);
    }
    Ok(builder.finish().with_labels(labels))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Writes a directed GraphML document carrying edge weights under `weight_attr`.
pub fn to_graphml(graph: &Graph, weight_attr: &str) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(out, "<graphml xmlns=\"{GRAPHML_NS}\">").unwrap();
    writeln!(
        out,
        "  <key id=\"w\" for=\"edge\" attr.name=\"{}\" attr.type=\"double\"/>",
        escape(weight_attr)
    )
    .unwrap();
    out.push_str("  <graph edgedefault=\"directed\">\n");
    for v in graph.nodes() {
        writeln!(out, "    <node id=\"{}\"/>", escape(graph.label(v))).unwrap();
    }
    for e in graph.edges() {
        writeln!(
            out,
            "    <edge source=\"{}\" target=\"{}\"><data key=\"w\">{}</data></edge>",
            escape(graph.label(e.src)),
            escape(graph.label(e.dst)),
            e.weight
        )
        .unwrap();
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
