//! p-Green functions of balls, p-capacities, parabolicity probes and `L_R`.
//!
//! The Green function `g_R = g_{B_R}(·, o)` is the minimizer of
//! `(1/p) Σ μ_xy |v(x) − v(y)|^p − v(o)` over functions vanishing outside
//! `B_R`. Its Euler–Lagrange equation is the Dirichlet problem
//! `−Δ_p g_R = μ(o)^{-1} δ_o` on `B_R`, equivalently `𝓔_p(g_R, ψ) = ψ(o)` for
//! every `ψ` supported in `B_R`.

mod cg;
mod newton;
mod probe;

pub use newton::{InitialGuess, SolverOptions, SolverReport};
pub use probe::{parabolicity_probe, ParabolicityLabel, ProbeReport, ProbeRow, TemplateFit};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{BallProfile, VertexId, WeightedGraph};
use crate::operator::{
    check_p, default_defect_tolerance, dirichlet_pairing, pow_nonneg, supersolution_defect,
    ExponentParams, VertexFunction,
};
use newton::DirichletProblem;

/// Solved p-Green function of `B_R` with pole at `center`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GreenFunction {
    pub values: VertexFunction,
    pub radius: usize,
    pub center: VertexId,
    pub p: f64,
    /// `max_{x∈B_R} |μ(x)(−Δ_p g)(x) − δ_center(x)|`.
    pub residual: f64,
    pub report: SolverReport,
}

impl GreenFunction {
    pub fn at(&self, x: VertexId) -> f64 {
        self.values.values[x]
    }

    /// Value at the pole.
    pub fn at_center(&self) -> f64 {
        self.values.values[self.center]
    }
}

fn check_radius(profile: &BallProfile, radius: usize) -> Result<()> {
    if radius > profile.r_max() {
        return Err(Error::Precondition(format!(
            "radius {radius} exceeds the interior radius {} of this graph",
            profile.r_max()
        )));
    }
    Ok(())
}

/// Solves the Dirichlet problem for `g_{B_R}(·, center)`.
pub fn solve_green(
    graph: &WeightedGraph,
    profile: &BallProfile,
    radius: usize,
    center: VertexId,
    p: f64,
    options: &SolverOptions,
) -> Result<GreenFunction> {
    check_p(p)?;
    check_radius(profile, radius)?;
    if center >= graph.vertex_count() || !profile.in_ball(center, radius) {
        return Err(Error::Precondition(format!(
            "center {center} is not inside B_{radius}"
        )));
    }
    let n = graph.vertex_count();
    let mut source = vec![0.0; n];
    source[center] = 1.0;
    let problem = DirichletProblem::new(graph, profile.ball(radius), vec![0.0; n], &source, p);
    let sol = problem.solve(options)?;

    if let Some(x) = profile
        .ball(radius)
        .into_iter()
        .find(|&x| !(sol.values[x] > 0.0))
    {
        return Err(Error::Consistency(format!(
            "Green function is not positive at vertex {x} of B_{radius}: {}",
            sol.values[x]
        )));
    }
    Ok(GreenFunction {
        values: VertexFunction::new(sol.values),
        radius,
        center,
        p,
        residual: sol.residual,
        report: sol.report,
    })
}

/// Largest normalized deviation `|𝓔_p(g_R, ψ) − ψ(center)| / max(1, ‖ψ‖_∞)`
/// over `trials` random `ψ` supported in `B_R`.
pub fn green_normalization_check(
    graph: &WeightedGraph,
    profile: &BallProfile,
    green: &GreenFunction,
    trials: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ball = profile.ball(green.radius);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let mut psi = VertexFunction::zeros(graph.vertex_count());
        for &x in &ball {
            psi.values[x] = rng.random_range(-1.0..1.0);
        }
        worst = worst.max(normalization_deviation(graph, profile, green, &psi));
    }
    worst
}

/// Deviation for a single test function; `ψ` is first projected onto `B_R`.
pub fn normalization_deviation(
    graph: &WeightedGraph,
    profile: &BallProfile,
    green: &GreenFunction,
    psi: &VertexFunction,
) -> f64 {
    let mut projected = psi.clone();
    for (x, v) in projected.values.iter_mut().enumerate() {
        if !profile.in_ball(x, green.radius) {
            *v = 0.0;
        }
    }
    let pairing = dirichlet_pairing(graph, &green.values, &projected, green.p);
    (pairing - projected.values[green.center]).abs() / projected.sup_norm().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Capacity {
    pub value: f64,
    /// Equilibrium potential: 1 on `A`, 0 outside `B_R`.
    pub potential: VertexFunction,
    pub residual: f64,
    pub report: SolverReport,
}

/// `cap_p(A)` relative to `B_R`: the least p-energy of `v` with `v = 1` on
/// `A` and `v = 0` outside `B_R`.
pub fn capacity(
    graph: &WeightedGraph,
    profile: &BallProfile,
    set: &[VertexId],
    radius: usize,
    p: f64,
    options: &SolverOptions,
) -> Result<Capacity> {
    check_p(p)?;
    check_radius(profile, radius)?;
    if set.is_empty() {
        return Err(Error::Precondition("capacity of an empty set".into()));
    }
    let n = graph.vertex_count();
    let mut fixed = vec![0.0; n];
    for &a in set {
        if a >= n || !profile.in_ball(a, radius) {
            return Err(Error::Precondition(format!(
                "vertex {a} is not inside B_{radius}"
            )));
        }
        fixed[a] = 1.0;
    }
    let free: Vec<VertexId> = profile
        .ball(radius)
        .into_iter()
        .filter(|&x| fixed[x] == 0.0)
        .collect();
    let problem = DirichletProblem::new(graph, free, fixed, &vec![0.0; n], p);
    let sol = problem.solve(options)?;
    let potential = VertexFunction::new(sol.values);
    Ok(Capacity {
        value: crate::operator::p_energy(graph, &potential, p),
        potential,
        residual: sol.residual,
        report: sol.report,
    })
}

/// `L_R = Σ_{x∈B_R} g_R(x)^σ μ(x)`.
pub fn compute_l(graph: &WeightedGraph, green: &GreenFunction, sigma: f64) -> Result<f64> {
    ExponentParams::new(green.p, sigma)?;
    Ok(green
        .values
        .values
        .iter()
        .enumerate()
        .map(|(x, &g)| pow_nonneg(g, sigma) * graph.measure(x))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UpperBound {
    pub l_r: f64,
    /// `(σ/η) (g_R(o) / u(o))^η`.
    pub bound: f64,
}

impl UpperBound {
    pub fn holds(&self, rel_tol: f64) -> bool {
        self.l_r <= self.bound * (1.0 + rel_tol)
    }
}

/// `L_R` and the upper bound `(σ/η)(g_R(o)/u(o))^η` valid for any positive
/// supersolution `u` of `−Δ_p u ≥ u^σ` on `B_R`.
pub fn sandwich_upper_bound(
    graph: &WeightedGraph,
    profile: &BallProfile,
    green: &GreenFunction,
    u: &VertexFunction,
    params: &ExponentParams,
) -> Result<UpperBound> {
    if params.p != green.p {
        return Err(Error::Argument(format!(
            "params p = {} but Green function solved for p = {}",
            params.p, green.p
        )));
    }
    let ball = profile.ball(green.radius);
    let defect = supersolution_defect(graph, u, params, &ball)?;
    let tol = default_defect_tolerance(u, params);
    if let Some((i, d)) = defect
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .filter(|(_, d)| **d < -tol)
    {
        return Err(Error::Precondition(format!(
            "u is not a supersolution on B_{}: defect {d:e} at vertex {}",
            green.radius, ball[i]
        )));
    }
    let u_o = u.values[green.center];
    if !(u_o > 0.0) {
        return Err(Error::Precondition("u must be positive at the pole".into()));
    }
    let eta = params.eta();
    Ok(UpperBound {
        l_r: compute_l(graph, green, params.sigma)?,
        bound: params.sigma / eta * (green.at_center() / u_o).powf(eta),
    })
}
