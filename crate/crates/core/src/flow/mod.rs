//! The unit p-current induced by a Green function and its path decomposition.
//!
//! `B_R^c` is collapsed to a single sink `∂` with id `vertex_count`; an edge
//! from `x ∈ B_R` to the sink carries the total weight of `x`'s edges leaving
//! `B_R`. Every edge is oriented from the larger to the smaller value of
//! `g_R`, with drop `δ_e > 0` and current `θ_e = μ_e δ_e^{p−1}`.

mod bound;
mod decompose;

pub use bound::{
    cut_lower_bound, empirical_lower_bound, first_exit_indices, parallel_sum, path_hardy_check,
    ChainStep, FirstExits, LowerBoundReport, PerRadiusExit,
};
pub use decompose::{decompose_paths, edge_marginal_deviation, PathMeasure, WeightedPath};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BallProfile, VertexId, WeightedGraph};
use crate::green::GreenFunction;

/// A below-threshold drop is only discarded if its current is also below this.
const DISCARD_CURRENT: f64 = 1e-12;

/// Largest Green function residual accepted by [`orient_flow`].
pub const MAX_GREEN_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectedEdge {
    pub tail: VertexId,
    pub head: VertexId,
    pub theta: f64,
    pub delta: f64,
    pub conductance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitFlow {
    /// Retained edges, sorted by `(tail, head)`.
    pub edges: Vec<DirectedEdge>,
    pub source: VertexId,
    pub sink: VertexId,
    pub radius: usize,
    pub p: f64,
    /// Edges whose drop fell at or below the zero-drop threshold.
    pub discarded: usize,
    pub zero_drop_threshold: f64,
    /// Largest `|net outflow − source/sink term|` over `B_R ∪ {∂}`.
    pub max_divergence: f64,
    pub divergence_tolerance: f64,
    /// Vertices of `B_R ∪ {∂}` in decreasing order of `g_R`.
    pub topological_order: Vec<VertexId>,
}

impl UnitFlow {
    /// Value of `g_R` at any vertex of the collapsed network.
    pub fn potential(green: &GreenFunction, sink: VertexId, x: VertexId) -> f64 {
        if x == sink {
            0.0
        } else {
            green.at(x)
        }
    }
}

/// Undirected edges of the collapsed network on `B_R ∪ {∂}` as `(x, y, μ^{(R)})`.
pub(crate) fn collapsed_edges(
    graph: &WeightedGraph,
    profile: &BallProfile,
    radius: usize,
) -> Vec<(VertexId, VertexId, f64)> {
    let sink = graph.vertex_count();
    let mut to_sink = vec![0.0; graph.vertex_count()];
    let mut out = Vec::new();
    for e in graph.edges() {
        match (profile.in_ball(e.u, radius), profile.in_ball(e.v, radius)) {
            (true, true) => out.push((e.u, e.v, e.weight)),
            (true, false) => to_sink[e.u] += e.weight,
            (false, true) => to_sink[e.v] += e.weight,
            (false, false) => {}
        }
    }
    for (x, &w) in to_sink.iter().enumerate() {
        if w > 0.0 {
            out.push((x, sink, w));
        }
    }
    out
}

/// Orients the p-current of `green` (whose pole must be the root).
///
/// An edge is discarded when its drop is at most `zero_drop_threshold`
/// (default `1e-12 · max drop`) and its current at most `1e-12`; with very
/// uneven weights a tiny drop can still carry real current.
pub fn orient_flow(
    graph: &WeightedGraph,
    profile: &BallProfile,
    green: &GreenFunction,
    zero_drop_threshold: Option<f64>,
) -> Result<UnitFlow> {
    if green.center != graph.root() {
        return Err(Error::Precondition(
            "current must originate at the root".into(),
        ));
    }
    if !(green.residual <= MAX_GREEN_RESIDUAL) {
        return Err(Error::Precondition(format!(
            "Green function residual {:e} exceeds {MAX_GREEN_RESIDUAL:e}",
            green.residual
        )));
    }
    let radius = green.radius;
    let sink = graph.vertex_count();
    let p = green.p;
    let pot = |x: VertexId| UnitFlow::potential(green, sink, x);

    let raw = collapsed_edges(graph, profile, radius);
    let max_drop = raw
        .iter()
        .map(|&(x, y, _)| (pot(x) - pot(y)).abs())
        .fold(0.0, f64::max);
    let threshold = zero_drop_threshold.unwrap_or(1e-12 * max_drop);

    let n = graph.vertex_count() + 1;
    let mut net_out = vec![0.0; n];
    let mut slack = vec![0.0; n];
    let mut edges = Vec::with_capacity(raw.len());
    let mut discarded = 0;
    for (x, y, w) in raw {
        let d = pot(x) - pot(y);
        let (tail, head, delta) = if d >= 0.0 { (x, y, d) } else { (y, x, -d) };
        let theta = w * delta.powf(p - 1.0);
        if delta <= threshold && theta <= DISCARD_CURRENT {
            discarded += 1;
            slack[tail] += theta;
            slack[head] += theta;
            continue;
        }
        net_out[tail] += theta;
        net_out[head] -= theta;
        edges.push(DirectedEdge {
            tail,
            head,
            theta,
            delta,
            conductance: w,
        });
    }
    edges.sort_by_key(|e| (e.tail, e.head));

    let ball = profile.ball(radius);
    let scale_floor = f64::EPSILON * graph.measures().iter().fold(1.0, |m: f64, &v| m.max(v));
    let base_tol = 100.0 * green.residual.max(scale_floor);
    let mut max_divergence = 0.0f64;
    for &x in ball.iter().chain(std::iter::once(&sink)) {
        let expected = if x == green.center {
            1.0
        } else if x == sink {
            -1.0
        } else {
            0.0
        };
        let div = (net_out[x] - expected).abs();
        max_divergence = max_divergence.max(div);
        if div > base_tol + slack[x] {
            return Err(Error::Consistency(format!(
                "current not conserved at vertex {x}: divergence {div:e} exceeds {:e}",
                base_tol + slack[x]
            )));
        }
    }

    if let Some(e) = edges.iter().find(|e| e.head == green.center) {
        return Err(Error::Consistency(format!(
            "retained edge {} -> {} enters the source",
            e.tail, e.head
        )));
    }
    if let Some(e) = edges.iter().find(|e| e.tail == sink) {
        return Err(Error::Consistency(format!(
            "retained edge {} -> {} leaves the sink",
            e.tail, e.head
        )));
    }

    let mut order: Vec<VertexId> = ball.clone();
    order.sort_by(|&a, &b| pot(b).total_cmp(&pot(a)).then(a.cmp(&b)));
    order.push(sink);
    let mut position = vec![usize::MAX; n];
    for (i, &x) in order.iter().enumerate() {
        position[x] = i;
    }
    if let Some(e) = edges.iter().find(|e| position[e.tail] >= position[e.head]) {
        return Err(Error::Consistency(format!(
            "edge {} -> {} violates the order by g_R",
            e.tail, e.head
        )));
    }

    Ok(UnitFlow {
        edges,
        source: green.center,
        sink,
        radius,
        p,
        discarded,
        zero_drop_threshold: threshold,
        max_divergence,
        divergence_tolerance: base_tol,
        topological_order: order,
    })
}
