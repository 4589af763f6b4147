use serde::Serialize;

use super::UnitFlow;
use crate::error::{Error, Result};
use crate::graph::VertexId;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPath {
    /// `x_0 = o, …, x_m = ∂`.
    pub vertices: Vec<VertexId>,
    pub probability: f64,
}

/// Probability measure on directed paths from the source to the sink.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathMeasure {
    pub paths: Vec<WeightedPath>,
    pub source: VertexId,
    pub sink: VertexId,
    pub radius: usize,
    /// Flow left at the source when extraction stopped.
    pub unextracted: f64,
    /// Total current on edges dropped at dead ends.
    pub dropped: f64,
}

impl PathMeasure {
    pub fn total_probability(&self) -> f64 {
        self.paths.iter().map(|q| q.probability).sum()
    }
}

/// Residual current below which the source counts as exhausted.
const STOP: f64 = 1e-13;
/// Residual current treated as zero after a subtraction.
const ZERO: f64 = 1e-15;
/// Floor for the largest bottleneck that may be dropped at a dead end.
const DEAD_END_DROP: f64 = 1e-10;

/// Greedy path extraction: from the source, always follow the outgoing edge
/// with the largest residual current (ties to the smaller head id), give the
/// path the bottleneck current as probability and subtract it.
pub fn decompose_paths(flow: &UnitFlow) -> Result<PathMeasure> {
    let n = flow.sink + 1;
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in flow.edges.iter().enumerate() {
        out[e.tail].push(i);
    }
    let mut residual: Vec<f64> = flow.edges.iter().map(|e| e.theta).collect();
    // Current stranded at a dead end is conservation error accumulated upstream.
    let dead_end_limit =
        DEAD_END_DROP.max(flow.topological_order.len() as f64 * flow.max_divergence);
    let best_out = |residual: &[f64], v: VertexId| -> Option<usize> {
        let mut best: Option<usize> = None;
        for &i in &out[v] {
            if residual[i] <= ZERO {
                continue;
            }
            best = match best {
                Some(b)
                    if residual[b] > residual[i]
                        || (residual[b] == residual[i]
                            && flow.edges[b].head < flow.edges[i].head) =>
                {
                    Some(b)
                }
                _ => Some(i),
            };
        }
        best
    };

    let mut paths = Vec::new();
    let mut dropped = 0.0;
    let max_rounds = flow.edges.len() + 1;
    let mut rounds = 0;
    loop {
        let remaining: f64 = out[flow.source].iter().map(|&i| residual[i]).sum();
        if remaining <= STOP {
            break;
        }
        rounds += 1;
        if rounds > max_rounds {
            return Err(Error::Internal(format!(
                "path extraction did not terminate within {max_rounds} rounds"
            )));
        }
        let mut vertices = vec![flow.source];
        let mut used = Vec::new();
        let mut v = flow.source;
        let mut dead_end = false;
        while v != flow.sink {
            match best_out(&residual, v) {
                Some(i) => {
                    used.push(i);
                    v = flow.edges[i].head;
                    vertices.push(v);
                }
                None => {
                    dead_end = true;
                    break;
                }
            }
        }
        if used.is_empty() {
            break;
        }
        let bottleneck = used
            .iter()
            .map(|&i| residual[i])
            .fold(f64::INFINITY, f64::min);
        if dead_end {
            if bottleneck > dead_end_limit {
                return Err(Error::Internal(format!(
                    "path extraction stuck at vertex {v} with {bottleneck:e} current in transit"
                )));
            }
            for &i in &used {
                if residual[i] <= bottleneck {
                    dropped += residual[i];
                    residual[i] = 0.0;
                }
            }
            continue;
        }
        for &i in &used {
            residual[i] -= bottleneck;
            if residual[i] <= ZERO {
                residual[i] = 0.0;
            }
        }
        paths.push(WeightedPath {
            vertices,
            probability: bottleneck,
        });
    }
    let unextracted = out[flow.source].iter().map(|&i| residual[i]).sum();
    Ok(PathMeasure {
        paths,
        source: flow.source,
        sink: flow.sink,
        radius: flow.radius,
        unextracted,
        dropped,
    })
}

/// Largest `|Σ_{γ ∋ e} P(γ) − θ_e|` over retained edges, together with
/// the number of path edges not present in the flow.
pub fn edge_marginal_deviation(flow: &UnitFlow, measure: &PathMeasure) -> (f64, usize) {
    let mut marginal = vec![0.0; flow.edges.len()];
    let mut foreign = 0;
    for path in &measure.paths {
        for w in path.vertices.windows(2) {
            match flow
                .edges
                .binary_search_by_key(&(w[0], w[1]), |e| (e.tail, e.head))
            {
                Ok(i) => marginal[i] += path.probability,
                Err(_) => foreign += 1,
            }
        }
    }
    let dev = flow
        .edges
        .iter()
        .zip(&marginal)
        .map(|(e, m)| (e.theta - m).abs())
        .fold(0.0, f64::max);
    (dev, foreign)
}
