//! Tree files: the JSON exchange format and DOT export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::label::Label;
use crate::tree::{LabeledTree, TreeError};
use crate::vertex::VertexId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: VertexId,
    pub label: Label,
}

/// On-disk form of a [`LabeledTree`]:
///
/// ```json
/// { "vertices": [{"id": "1", "label": "1/2"}], "edges": [["1", "2"]], "frontier": [] }
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<(VertexId, VertexId)>,
    #[serde(default)]
    pub frontier: Vec<VertexId>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error("malformed tree JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

impl TreeFile {
    pub fn from_tree(tree: &LabeledTree) -> Self {
        TreeFile {
            vertices: tree
                .ids()
                .iter()
                .zip(tree.labels())
                .map(|(id, label)| VertexRecord {
                    id: id.clone(),
                    label: label.clone(),
                })
                .collect(),
            edges: tree.edges().map(|e| (e.0, e.1)).collect(),
            frontier: tree.frontier().cloned().collect(),
        }
    }

    pub fn into_tree(self) -> Result<LabeledTree, TreeError> {
        LabeledTree::build_with_frontier(
            self.edges,
            self.vertices.into_iter().map(|r| (r.id, r.label.into_rational())),
            self.frontier,
        )
    }
}

pub fn tree_from_json(text: &str) -> Result<LabeledTree, ReadError> {
    let file: TreeFile = serde_json::from_str(text)?;
    Ok(file.into_tree()?)
}

pub fn tree_to_json(tree: &LabeledTree) -> String {
    serde_json::to_string_pretty(&TreeFile::from_tree(tree)).expect("tree serializes")
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn quote(s: &str) -> String {
    format!("\"{}\"", escape(s))
}

/// Undirected DOT graph. Each vertex shows its label; frontier vertices are
/// drawn dashed so truncation boundaries stay visible.
pub fn tree_to_dot(tree: &LabeledTree, name: &str) -> String {
    let mut out = String::new();
    writeln!(out, "graph {} {{", quote(name)).unwrap();
    writeln!(out, "  node [shape=circle];").unwrap();
    for (i, id) in tree.ids().iter().enumerate() {
        let text = id.to_string();
        let label = format!("\"{}\\nl={}\"", escape(&text), tree.label_at(i));
        if tree.frontier_at(i) {
            writeln!(
                out,
                "  {} [label={}, style=dashed, frontier=true];",
                quote(&text),
                label
            )
            .unwrap();
        } else {
            writeln!(out, "  {} [label={}];", quote(&text), label).unwrap();
        }
    }
    for e in tree.edges() {
        writeln!(out, "  {} -- {};", quote(&e.0.to_string()), quote(&e.1.to_string())).unwrap();
    }
    out.push_str("}\n");
    out
}
