//! JSON graph files.
//!
//! ```json
//! {"vertex_count": 3, "root": 0, "edges": [[0, 1, 1.0], [1, 2, 0.5]]}
//! ```
//!
//! Edges are listed once with `u < v`. Weights use shortest round-trip decimal
//! formatting. The optional `interior_radius` key records a generator's
//! declared interior radius.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{max_vertices_from_env, Edge, WeightedGraph};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub vertex_count: usize,
    pub root: usize,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior_radius: Option<usize>,
}

impl From<&WeightedGraph> for GraphFile {
    fn from(g: &WeightedGraph) -> Self {
        GraphFile {
            vertex_count: g.vertex_count(),
            root: g.root(),
            edges: g
                .edges()
                .iter()
                .map(|&Edge { u, v, weight }| (u, v, weight))
                .collect(),
            interior_radius: g.interior_radius(),
        }
    }
}

impl GraphFile {
    pub fn into_graph(self) -> Result<WeightedGraph> {
        let cap = max_vertices_from_env();
        if self.vertex_count > cap {
            return Err(Error::Resource(format!(
                "{} vertices exceeds the cap of {cap}",
                self.vertex_count
            )));
        }
        if let Some((i, &(u, v, _))) = self.edges.iter().enumerate().find(|(_, e)| e.0 >= e.1) {
            return Err(Error::Validation(format!(
                "edges[{i}] = ({u}, {v}) must be listed with u < v"
            )));
        }
        Ok(
            WeightedGraph::new(self.vertex_count, self.root, self.edges)?
                .with_interior_radius(self.interior_radius),
        )
    }
}

pub fn graph_to_json(g: &WeightedGraph) -> String {
    let mut s = serde_json::to_string(&GraphFile::from(g)).expect("graph serialization");
    s.push('\n');
    s
}

pub fn graph_from_json(text: &str) -> Result<WeightedGraph> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: GraphFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        Error::Parse {
            location: format!(
                "line {} column {} field `{}`",
                inner.line(),
                inner.column(),
                e.path()
            ),
            message: inner.to_string(),
        }
    })?;
    file.into_graph()
}

pub fn save_graph(g: &WeightedGraph, destination: impl AsRef<Path>) -> Result<()> {
    fs::write(destination, graph_to_json(g))?;
    Ok(())
}

pub fn load_graph(source: impl AsRef<Path>) -> Result<WeightedGraph> {
    graph_from_json(&fs::read_to_string(source)?)
}
