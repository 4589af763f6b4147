//! The path-wise lower bound for `L_R` and its chain of intermediate inequalities.

use serde::Serialize;

use super::{PathMeasure, UnitFlow};
use crate::error::{Error, Result};
use crate::exec::{map_range, ExecMode};
use crate::graph::{BallProfile, VertexId, WeightedGraph};
use crate::green::{compute_l, GreenFunction};
use crate::operator::{pow_nonneg, ExponentParams};

/// Relative tolerance for every chain inequality.
pub const CHAIN_TOLERANCE: f64 = 1e-9;

/// `(Σ y_k^{−1/r})^{−r}`.
pub fn parallel_sum(values: &[f64], r: f64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Argument(format!("r must be positive, got {r}")));
    }
    if values.is_empty() {
        return Err(Error::Argument("parallel sum of no values".into()));
    }
    if let Some(y) = values.iter().find(|&&y| !(y > 0.0)) {
        return Err(Error::Argument(format!(
            "parallel sum needs positive values, got {y}"
        )));
    }
    let s: f64 = values.iter().map(|y| y.powf(-1.0 / r)).sum();
    Ok(s.powf(-r))
}

/// Both sides of the deterministic Hardy estimate along one path.
///
/// `values` are `V_0 > V_1 > … > V_m ≥ 0`.
/// Returns `(Σ_{i<m} V_i^σ/δ_i^r, c_{p,σ} Σ_{j=1}^{m−1} j^r V_j^η)`.
pub fn path_hardy_check(values: &[f64], params: &ExponentParams) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::Argument("a path needs at least two values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) || values[values.len() - 1] < 0.0 {
        return Err(Error::Argument(
            "path values must be finite and nonnegative".into(),
        ));
    }
    if let Some(i) = (0..values.len() - 1).find(|&i| values[i] <= values[i + 1]) {
        return Err(Error::Argument(format!(
            "path values must strictly decrease, V_{i} = {} ≤ V_{} = {}",
            values[i],
            i + 1,
            values[i + 1]
        )));
    }
    let (r, sigma, eta) = (params.r(), params.sigma, params.eta());
    let m = values.len() - 1;
    let lhs = (0..m)
        .map(|i| pow_nonneg(values[i], sigma) / (values[i] - values[i + 1]).powf(r))
        .sum();
    let rhs = params.c_hardy()
        * (1..m)
            .map(|j| (j as f64).powf(r) * pow_nonneg(values[j], eta))
            .sum::<f64>();
    Ok((lhs, rhs))
}

/// `c_{p,σ} Σ_{n=1}^R n^r (Σ_{k=n}^R b_k^{−1/r})^η`, a lower bound for `L_R`.
pub fn cut_lower_bound(profile: &BallProfile, params: &ExponentParams, radius: usize) -> f64 {
    let (r, eta) = (params.r(), params.eta());
    let cuts = profile.cuts();
    let mut inner = 0.0;
    let mut total = 0.0;
    for n in (1..=radius).rev() {
        inner += cuts[n].powf(-1.0 / r);
        total += (n as f64).powf(r) * inner.powf(eta);
    }
    params.c_hardy() * total
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FirstExits {
    /// First index with `radius(x_i) = n`.
    pub tau: usize,
    /// `α_k` for `k = n..=R`: the first `i ≥ τ_n` with `radius(x_i) ≤ k < radius(x_{i+1})`.
    pub exits: Vec<usize>,
}

/// First-exit edge indices of a path ending at the sink, which has radius `R + 1`.
pub fn first_exit_indices(
    path: &[VertexId],
    profile: &BallProfile,
    radius: usize,
    sink: VertexId,
    n: usize,
) -> Result<FirstExits> {
    if n > radius {
        return Err(Error::Argument(format!("n = {n} exceeds R = {radius}")));
    }
    let rad = |x: VertexId| {
        if x == sink {
            radius + 1
        } else {
            profile.radius_of(x)
        }
    };
    let radii: Vec<usize> = path.iter().map(|&x| rad(x)).collect();
    let tau = radii
        .iter()
        .position(|&d| d == n)
        .ok_or_else(|| Error::Argument(format!("path never reaches radius {n}")))?;
    let mut exits = Vec::with_capacity(radius - n + 1);
    for k in n..=radius {
        let alpha = (tau..radii.len() - 1)
            .find(|&i| radii[i] <= k && k < radii[i + 1])
            .ok_or_else(|| Error::Argument(format!("path never leaves B_{k}")))?;
        exits.push(alpha);
    }
    Ok(FirstExits { tau, exits })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainStep {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs ≤ rhs` up to [`CHAIN_TOLERANCE`].
    pub holds: bool,
}

impl ChainStep {
    fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs + CHAIN_TOLERANCE * lhs.abs().max(rhs.abs());
        ChainStep {
            name: name.into(),
            lhs,
            rhs,
            holds,
        }
    }

    fn eq(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let holds = (lhs - rhs).abs() <= CHAIN_TOLERANCE * lhs.abs().max(rhs.abs());
        ChainStep {
            name: name.into(),
            lhs,
            rhs,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerRadiusExit {
    pub n: usize,
    /// `E g_R(x_{τ_n})^η`.
    pub expected_green_eta: f64,
    /// `E g_R(x_{τ_n})^{−r}`.
    pub expected_green_neg_r: f64,
    /// `E P(Y_n, …, Y_R)`.
    pub expected_parallel_sum: f64,
    /// `P(E Y_n, …, E Y_R)`.
    pub parallel_sum_of_expectations: f64,
    /// `P(b_n, …, b_R)`.
    pub parallel_sum_of_cuts: f64,
    /// `(Σ_{k=n}^R b_k^{−1/r})^η`.
    pub cut_term: f64,
    /// `E Y_k` for `k = n..=R`.
    pub expected_y: Vec<f64>,
    /// Smallest `g_R(x_{τ_n}) − Σ_k δ_{α_k}` over paths.
    pub tail_sum_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub radius: usize,
    pub p: f64,
    pub sigma: f64,
    pub c: f64,
    pub l_r: f64,
    /// `c Σ_{n=1}^R n^r (Σ_{k=n}^R b_k^{−1/r})^η`.
    pub rhs: f64,
    /// `E Σ_i V_i^σ / δ_i^r`.
    pub path_mass: f64,
    /// `Σ_e θ_e g_R(e^−)^σ / δ_e^r`.
    pub edge_mass: f64,
    /// Smallest `μ(x) − Σ` retained outgoing conductances of `x`.
    pub conductance_slack: f64,
    /// Paths violating the per-path Hardy estimate.
    pub hardy_violations: usize,
    pub per_radius: Vec<PerRadiusExit>,
    pub steps: Vec<ChainStep>,
}

impl LowerBoundReport {
    pub fn all_hold(&self) -> bool {
        self.steps.iter().all(|s| s.holds)
    }

    pub fn first_failure(&self) -> Option<&ChainStep> {
        self.steps.iter().find(|s| !s.holds)
    }

    /// Converts a failed chain into a verification error naming the step.
    pub fn into_result(self) -> Result<Self> {
        match self.first_failure() {
            Some(s) => Err(Error::Verification {
                step: s.name.clone(),
                lhs: s.lhs,
                rhs: s.rhs,
            }),
            None => Ok(self),
        }
    }
}

/// Evaluates `L_R`, the cut-series lower bound and every intermediate step
/// as exact expectations over `measure`.
pub fn empirical_lower_bound(
    graph: &WeightedGraph,
    profile: &BallProfile,
    green: &GreenFunction,
    flow: &UnitFlow,
    measure: &PathMeasure,
    params: &ExponentParams,
    mode: ExecMode,
) -> Result<LowerBoundReport> {
    if (params.p - green.p).abs() > 0.0 || flow.radius != green.radius {
        return Err(Error::Argument(
            "flow, Green function and parameters disagree".into(),
        ));
    }
    let radius = green.radius;
    let sink = flow.sink;
    let (r, sigma, eta, c) = (params.r(), params.sigma, params.eta(), params.c_hardy());
    let pot = |x: VertexId| UnitFlow::potential(green, sink, x);
    let l_r = compute_l(graph, green, sigma)?;
    let cuts = profile.cuts();

    let rhs = cut_lower_bound(profile, params, radius);

    let values: Vec<Vec<f64>> = measure
        .paths
        .iter()
        .map(|q| q.vertices.iter().map(|&x| pot(x)).collect())
        .collect();

    let mut path_mass = 0.0;
    let mut hardy_lhs = 0.0;
    let mut hardy_rhs = 0.0;
    let mut hardy_violations = 0;
    let mut full_index_sum = 0.0;
    for (q, v) in measure.paths.iter().zip(&values) {
        let (lhs, rhs) = path_hardy_check(v, params)?;
        if lhs < rhs * (1.0 - CHAIN_TOLERANCE) {
            hardy_violations += 1;
        }
        path_mass += q.probability * lhs;
        hardy_lhs += q.probability * lhs;
        hardy_rhs += q.probability * rhs;
        let m = v.len() - 1;
        full_index_sum += q.probability
            * (1..m)
                .map(|j| (j as f64).powf(r) * pow_nonneg(v[j], eta))
                .sum::<f64>();
    }

    let edge_mass: f64 = flow
        .edges
        .iter()
        .map(|e| e.theta * pow_nonneg(pot(e.tail), sigma) / e.delta.powf(r))
        .sum();
    let mut outgoing = vec![0.0; graph.vertex_count()];
    for e in &flow.edges {
        outgoing[e.tail] += e.conductance;
    }
    let conductance_slack = profile
        .ball(radius)
        .iter()
        .map(|&x| graph.measure(x) - outgoing[x])
        .fold(f64::INFINITY, f64::min);

    let per_radius: Vec<Result<PerRadiusExit>> = map_range(mode, radius, |i| {
        let n = i + 1;
        let mut e_eta = 0.0;
        let mut e_neg_r = 0.0;
        let mut e_par = 0.0;
        let mut e_y = vec![0.0; radius - n + 1];
        let mut margin = f64::INFINITY;
        for (q, v) in measure.paths.iter().zip(&values) {
            let exits = first_exit_indices(&q.vertices, profile, radius, sink, n)?;
            let top = v[exits.tau];
            let ys: Vec<f64> = exits
                .exits
                .iter()
                .map(|&a| (v[a] - v[a + 1]).powf(-r))
                .collect();
            let tail: f64 = exits.exits.iter().map(|&a| v[a] - v[a + 1]).sum();
            margin = margin.min(top - tail);
            e_eta += q.probability * pow_nonneg(top, eta);
            e_neg_r += q.probability * top.powf(-r);
            e_par += q.probability * parallel_sum(&ys, r)?;
            for (acc, y) in e_y.iter_mut().zip(&ys) {
                *acc += q.probability * y;
            }
        }
        let par_e = parallel_sum(&e_y, r)?;
        let par_b = parallel_sum(&cuts[n..=radius], r)?;
        let cut_term = (n..=radius)
            .map(|k| cuts[k].powf(-1.0 / r))
            .sum::<f64>()
            .powf(eta);
        Ok(PerRadiusExit {
            n,
            expected_green_eta: e_eta,
            expected_green_neg_r: e_neg_r,
            expected_parallel_sum: e_par,
            parallel_sum_of_expectations: par_e,
            parallel_sum_of_cuts: par_b,
            cut_term,
            expected_y: e_y,
            tail_sum_margin: margin,
        })
    });
    let per_radius: Vec<PerRadiusExit> = per_radius.into_iter().collect::<Result<_>>()?;

    let restricted: f64 = per_radius
        .iter()
        .map(|t| (t.n as f64).powf(r) * t.expected_green_eta)
        .sum();

    let mut steps = vec![
        ChainStep::eq("path-mass-identity", path_mass, edge_mass),
        ChainStep::le("conductance-slack", 0.0, conductance_slack),
        ChainStep::le("edge-mass-bound", path_mass, l_r),
        ChainStep::le("path-hardy", hardy_rhs, hardy_lhs),
        ChainStep::le("first-exit-restriction", c * restricted, c * full_index_sum),
    ];
    for t in &per_radius {
        let n = t.n;
        steps.push(ChainStep::le(
            format!("tail-sum[n={n}]"),
            0.0,
            t.tail_sum_margin,
        ));
        for (j, (ey, b)) in t.expected_y.iter().zip(&cuts[n..=radius]).enumerate() {
            steps.push(ChainStep::le(
                format!("exit-cut[n={n},k={}]", n + j),
                *ey,
                *b,
            ));
        }
        steps.push(ChainStep::le(
            format!("pointwise-parallel-sum[n={n}]"),
            t.expected_green_neg_r,
            t.expected_parallel_sum,
        ));
        steps.push(ChainStep::le(
            format!("jensen-parallel-sum[n={n}]"),
            t.expected_parallel_sum,
            t.parallel_sum_of_expectations,
        ));
        steps.push(ChainStep::le(
            format!("monotone-parallel-sum[n={n}]"),
            t.parallel_sum_of_expectations,
            t.parallel_sum_of_cuts,
        ));
        steps.push(ChainStep::le(
            format!("jensen-power[n={n}]"),
            t.expected_green_neg_r.powf(-eta / r),
            t.expected_green_eta,
        ));
        steps.push(ChainStep::le(
            format!("cut-term[n={n}]"),
            t.cut_term,
            t.expected_green_eta,
        ));
    }
    steps.push(ChainStep::le("lower-bound", rhs, l_r));
    if hardy_violations > 0 {
        steps.push(ChainStep::le(
            "path-hardy-per-path",
            hardy_violations as f64,
            0.0,
        ));
    }

    Ok(LowerBoundReport {
        radius,
        p: params.p,
        sigma,
        c,
        l_r,
        rhs,
        path_mass,
        edge_mass,
        conductance_slack,
        hardy_violations,
        per_radius,
        steps,
    })
}
