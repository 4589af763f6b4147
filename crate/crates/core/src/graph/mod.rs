//! Finite weighted graphs with a distinguished root, and their metric structure.
//!
//! A [`WeightedGraph`] is always a finite truncation of the (possibly infinite)
//! host graph of interest. Vertex ids are dense `0..vertex_count`, the root is
//! always id `0`, and every undirected edge is stored once as `(u, v, w)` with
//! `u < v`, sorted lexicographically.

mod generators;
mod io;
mod profile;

pub use generators::{build_lattice, build_radial_model, build_tree, GeneratorLimits};
pub use io::{graph_from_json, graph_to_json, load_graph, save_graph, GraphFile};
pub use profile::{ball_profile, BallProfile};

use std::collections::{HashSet, VecDeque};

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Env var capping the vertex count of generated or loaded graphs.
pub const MAX_VERTICES_ENV: &str = "P_POTENTIAL_MAX_VERTICES";
pub const DEFAULT_MAX_VERTICES: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    interior_radius: Option<usize>,
    offsets: Vec<usize>,
    adjacency: Vec<(VertexId, f64)>,
    measure: Vec<f64>,
}

impl WeightedGraph {
    /// Validates and canonicalizes a graph.
    ///
    /// Edges may be given in either orientation. If `root != 0`, ids `root`
    /// and `0` are swapped so that the root becomes id `0`.
    pub fn new(
        vertex_count: usize,
        root: VertexId,
        edges: impl IntoIterator<Item = (VertexId, VertexId, f64)>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Validation("graph has no vertices".into()));
        }
        if root >= vertex_count {
            return Err(Error::Validation(format!(
                "root {root} out of range for {vertex_count} vertices"
            )));
        }
        let relabel = |x: VertexId| {
            if x == root {
                0
            } else if x == 0 {
                root
            } else {
                x
            }
        };

        let mut seen = HashSet::new();
        let mut list = Vec::new();
        for (a, b, w) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if a == b {
                return Err(Error::Validation(format!("self-loop at vertex {a}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Validation(format!(
                    "edge ({a}, {b}) has nonpositive or non-finite weight {w}"
                )));
            }
            let (a, b) = (relabel(a), relabel(b));
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !seen.insert((u, v)) {
                return Err(Error::Validation(format!("duplicate edge ({u}, {v})")));
            }
            list.push(Edge { u, v, weight: w });
        }
        list.sort_by_key(|e| (e.u, e.v));
        Self::from_canonical(vertex_count, list, None)
    }

    fn from_canonical(
        vertex_count: usize,
        edges: Vec<Edge>,
        interior_radius: Option<usize>,
    ) -> Result<Self> {
        let mut degree = vec![0usize; vertex_count];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut offsets = vec![0usize; vertex_count + 1];
        for x in 0..vertex_count {
            offsets[x + 1] = offsets[x] + degree[x];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![(0usize, 0.0f64); offsets[vertex_count]];
        let mut measure = vec![0.0; vertex_count];
        for e in &edges {
            adjacency[fill[e.u]] = (e.v, e.weight);
            fill[e.u] += 1;
            adjacency[fill[e.v]] = (e.u, e.weight);
            fill[e.v] += 1;
            measure[e.u] += e.weight;
            measure[e.v] += e.weight;
        }
        for x in 0..vertex_count {
            adjacency[offsets[x]..offsets[x + 1]].sort_by_key(|&(y, _)| y);
        }
        let g = WeightedGraph {
            vertex_count,
            edges,
            interior_radius,
            offsets,
            adjacency,
            measure,
        };
        // W_0 = μ(o) must be positive.
        if g.edges.is_empty() {
            return Err(Error::Validation("graph has no edges".into()));
        }
        let reached = g.bfs_radii().iter().filter(|r| r.is_some()).count();
        if reached != vertex_count {
            return Err(Error::Validation(format!(
                "graph is disconnected: {reached} of {vertex_count} vertices reachable from the root"
            )));
        }
        Ok(g)
    }

    /// Declares the largest radius for which balls of this truncation agree
    /// with the host graph. Used by generators whose boundary clips balls.
    pub fn with_interior_radius(mut self, radius: Option<usize>) -> Self {
        self.interior_radius = radius;
        self
    }

    pub fn interior_radius(&self) -> Option<usize> {
        self.interior_radius
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn root(&self) -> VertexId {
        0
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbors of `x` with edge weights, sorted by neighbor id.
    pub fn neighbors(&self, x: VertexId) -> &[(VertexId, f64)] {
        &self.adjacency[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn degree(&self, x: VertexId) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    /// Vertex measure `μ(x) = Σ_{y∼x} μ_xy`.
    pub fn measure(&self, x: VertexId) -> f64 {
        self.measure[x]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measure
    }

    pub fn weight(&self, x: VertexId, y: VertexId) -> Option<f64> {
        let nb = self.neighbors(x);
        nb.binary_search_by_key(&y, |&(z, _)| z)
            .ok()
            .map(|i| nb[i].1)
    }

    /// Breadth-first graph distance from the root; `None` for unreachable vertices.
    pub(crate) fn bfs_radii(&self) -> Vec<Option<usize>> {
        let mut radius = vec![None; self.vertex_count];
        radius[0] = Some(0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            let rx = radius[x].unwrap_or(0);
            for &(y, _) in self.neighbors(x) {
                if radius[y].is_none() {
                    radius[y] = Some(rx + 1);
                    queue.push_back(y);
                }
            }
        }
        radius
    }
}

/// Reads the vertex cap from [`MAX_VERTICES_ENV`], falling back to the default.
pub fn max_vertices_from_env() -> usize {
    std::env::var(MAX_VERTICES_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_VERTICES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_is_swapped_to_zero() {
        let g = WeightedGraph::new(3, 2, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        assert_eq!(g.root(), 0);
        // old root 2 is now 0, old 0 is now 2
        assert_eq!(g.weight(0, 1), Some(2.0));
        assert_eq!(g.weight(1, 2), Some(1.0));
        assert_eq!(g.measure(1), 3.0);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(matches!(
            WeightedGraph::new(2, 0, [(0, 1, 0.0)]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            WeightedGraph::new(2, 0, [(0, 1, 1.0), (1, 0, 1.0)]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            WeightedGraph::new(2, 0, [(1, 1, 1.0)]),
            Err(Error::Validation(_))
        ));
        assert!(matches!(
            WeightedGraph::new(3, 0, [(0, 1, 1.0)]),
            Err(Error::Validation(_))
        ));
        assert!(WeightedGraph::new(2, 0, [(0, 1, f64::NAN)]).is_err());
    }
}
