use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::cut_lower_bound;
use crate::graph::{BallProfile, WeightedGraph};
use crate::green::{sandwich_upper_bound, solve_green, SolverOptions};
use crate::operator::{
    default_defect_tolerance, pow_nonneg, supersolution_defect, ExponentParams, VertexFunction,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingOutcome {
    pub u0: f64,
    /// `u` is positive and a verified supersolution on `B_{R_max}`.
    pub success: bool,
    /// Largest `R` such that `u > 0` and `−Δ_p u ≥ u^σ` on `B_R`, if any.
    pub verified_radius: Option<usize>,
    /// First sphere where the shot value reached zero.
    pub broke_at: Option<usize>,
    /// Value of `u` on each sphere.
    pub layer_values: Vec<f64>,
    /// Chosen drop `u_k − u_{k+1}` for each shot sphere.
    pub drops: Vec<f64>,
    /// Smallest `−Δ_p u − u^σ` over `B_{verified_radius}`; infinite when empty.
    pub min_defect: f64,
    pub defect_tolerance: f64,
    #[serde(skip)]
    pub function: VertexFunction,
}

/// Shoots a radial supersolution outward from `u(o) = u0`.
///
/// On sphere `k` a vertex `x` with child weight `C_x`, parent weight `P_x`
/// needs `C_x d_k^r ≥ μ(x) u_k^σ + P_x d_{k−1}^r`; the drop `d_k` is the
/// smallest value meeting this at every vertex of the sphere, so equality
/// holds at the extremal vertex. Requires every edge to join consecutive
/// spheres. Once a value reaches zero it is clamped and the rest of `u`
/// vanishes; the sphere before the break is then left unverified.
pub fn shoot_radial_supersolution(
    graph: &WeightedGraph,
    profile: &BallProfile,
    params: &ExponentParams,
    u0: f64,
) -> Result<ShootingOutcome> {
    if !(u0 >= 0.0 && u0.is_finite()) {
        return Err(Error::Argument(format!(
            "u0 = {u0} must be finite and nonnegative"
        )));
    }
    if let Some(e) = graph
        .edges()
        .iter()
        .find(|e| profile.radius_of(e.u).abs_diff(profile.radius_of(e.v)) != 1)
    {
        return Err(Error::Precondition(format!(
            "edge {}–{} does not join consecutive spheres",
            e.u, e.v
        )));
    }
    let n = graph.vertex_count();
    let ecc = profile.eccentricity();
    if u0 == 0.0 {
        return Ok(ShootingOutcome {
            u0,
            success: true,
            verified_radius: Some(profile.r_max()),
            broke_at: None,
            layer_values: vec![0.0; ecc + 1],
            drops: Vec::new(),
            min_defect: 0.0,
            defect_tolerance: 0.0,
            function: VertexFunction::zeros(n),
        });
    }

    let (r, sigma) = (params.r(), params.sigma);
    let mut layer_values = vec![u0];
    let mut drops: Vec<f64> = Vec::new();
    let mut broke_at = None;
    for k in 0..ecc {
        let u_k = layer_values[k];
        let prev = drops.last().map_or(0.0, |d| d.powf(r));
        let mut need = 0.0f64;
        let mut childless = false;
        for &x in profile.sphere(k) {
            let (mut child, mut parent) = (0.0, 0.0);
            for &(y, w) in graph.neighbors(x) {
                if profile.radius_of(y) > k {
                    child += w;
                } else {
                    parent += w;
                }
            }
            if child == 0.0 {
                childless = true;
                break;
            }
            need = need.max((graph.measure(x) * pow_nonneg(u_k, sigma) + parent * prev) / child);
        }
        if childless {
            break;
        }
        let d = need.powf(1.0 / r);
        drops.push(d);
        let next = u_k - d;
        if next <= 0.0 {
            broke_at = Some(k + 1);
            layer_values.push(0.0);
            break;
        }
        layer_values.push(next);
    }
    let shot = drops.len();
    let fill = *layer_values.last().expect("u0 is recorded");
    layer_values.resize(ecc + 1, fill);
    let function =
        VertexFunction::new((0..n).map(|x| layer_values[profile.radius_of(x)]).collect());

    // at a break b the clamped drop on sphere b − 1 is too small
    let limit = match broke_at {
        Some(b) => b.checked_sub(2),
        None => Some(usize::MAX),
    };
    let verified = limit.zip(shot.checked_sub(1)).map(|(a, b)| a.min(b));
    let interior = verified.map_or_else(Vec::new, |v| profile.ball(v));
    let defect = supersolution_defect(graph, &function, params, &interior)?;
    let min_defect = defect.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = default_defect_tolerance(&function, params);
    if min_defect < -tol {
        return Err(Error::Internal(format!(
            "shot function misses the supersolution inequality by {min_defect:e}"
        )));
    }
    Ok(ShootingOutcome {
        u0,
        success: verified.is_some_and(|v| v >= profile.r_max()),
        verified_radius: verified,
        broke_at,
        layer_values,
        drops,
        min_defect,
        defect_tolerance: tol,
        function,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub radius: usize,
    pub p: f64,
    pub sigma: f64,
    pub u0: f64,
    pub green_at_root: f64,
    /// `c_{p,σ} Σ_{n=1}^R n^r (Σ_{k=n}^R b_k^{−1/r})^η`.
    pub lower: f64,
    pub l_r: f64,
    /// `(σ/η)(g_R(o)/u(o))^η`.
    pub upper: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

/// Places `L_R` between the cut-series lower bound and the supersolution
/// upper bound, with `u` shot from `u(o) = u0`.
pub fn sandwich_demo(
    graph: &WeightedGraph,
    profile: &BallProfile,
    params: &ExponentParams,
    radius: usize,
    u0: f64,
    options: &SolverOptions,
) -> Result<SandwichReport> {
    let shot = shoot_radial_supersolution(graph, profile, params, u0)?;
    if !(u0 > 0.0) || !shot.verified_radius.is_some_and(|v| v >= radius) {
        return Err(Error::Precondition(format!(
            "no positive supersolution on B_{radius}: shooting from u0 = {u0} verified {}",
            shot.verified_radius
                .map_or_else(|| "no ball".to_string(), |v| format!("only B_{v}"))
        )));
    }
    let green = solve_green(graph, profile, radius, graph.root(), params.p, options)?;
    let upper = sandwich_upper_bound(graph, profile, &green, &shot.function, params)?;
    let lower = cut_lower_bound(profile, params, radius);
    let l_r = upper.l_r;
    let tol = 1e-9 * l_r.abs().max(1e-300);
    if lower > l_r + tol {
        return Err(Error::Verification {
            step: "lower".into(),
            lhs: lower,
            rhs: l_r,
        });
    }
    if l_r > upper.bound + tol {
        return Err(Error::Verification {
            step: "upper".into(),
            lhs: l_r,
            rhs: upper.bound,
        });
    }
    Ok(SandwichReport {
        radius,
        p: params.p,
        sigma: params.sigma,
        u0,
        green_at_root: green.at_center(),
        lower,
        l_r,
        upper: upper.bound,
        lower_margin: l_r - lower,
        upper_margin: upper.bound - l_r,
    })
}
