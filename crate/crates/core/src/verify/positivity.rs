use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{VertexId, WeightedGraph};
use crate::operator::{p_laplacian, VertexFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityVerdict {
    StrictlyPositive,
    IdenticallyZero,
}

/// Strong minimum principle on `region` (all vertices when `None`).
///
/// A nonnegative `u` that is p-superharmonic on a connected region is either
/// positive there or vanishes there together with all neighbours. Any other
/// zero pattern contains a zero vertex with a positive neighbour, where
/// `−Δ_p u < 0`; that vertex is returned as a counterexample, with the
/// breadth-first path through zeros that reaches it.
pub fn positivity_propagation(
    graph: &WeightedGraph,
    u: &VertexFunction,
    p: f64,
    region: Option<&[VertexId]>,
) -> Result<PositivityVerdict> {
    u.validate_for(graph)?;
    let n = graph.vertex_count();
    let mut inside = vec![region.is_none(); n];
    if let Some(region) = region {
        for &x in region {
            if x >= n {
                return Err(Error::Argument(format!("region vertex {x} out of range")));
            }
            inside[x] = true;
        }
    }
    if let Some(x) = (0..n).find(|&x| inside[x] && u.values[x] < 0.0) {
        return Err(Error::Argument(format!(
            "u must be nonnegative, u({x}) = {}",
            u.values[x]
        )));
    }
    let zero = |x: VertexId| u.values[x] == 0.0;
    let Some(start) = (0..n).find(|&x| inside[x] && zero(x)) else {
        return Ok(PositivityVerdict::StrictlyPositive);
    };

    let mut parent = vec![usize::MAX; n];
    parent[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if let Some(&(y, _)) = graph.neighbors(x).iter().find(|&&(y, _)| !zero(y)) {
            let mut witness = vec![y, x];
            let mut v = x;
            while parent[v] != v {
                v = parent[v];
                witness.push(v);
            }
            witness.reverse();
            let lap = -p_laplacian(graph, u, x, p);
            return Err(Error::Counterexample {
                message: format!(
                    "u vanishes at {x} but not at its neighbour {y}; −Δ_p u({x}) = {lap:e} < 0"
                ),
                witness,
            });
        }
        for &(y, _) in graph.neighbors(x) {
            if inside[y] && parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    if let Some(x) = (0..n).find(|&x| inside[x] && !zero(x)) {
        return Err(Error::Precondition(format!(
            "region is not connected: vertex {x} is unreachable from the zero at {start}"
        )));
    }
    Ok(PositivityVerdict::IdenticallyZero)
}
