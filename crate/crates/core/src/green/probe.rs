//! Finite-scale probe of p-parabolicity.
//!
//! On a finite truncation parabolicity cannot be decided; the probe records
//! `g_R(o)` and `cap_R({o})` over a ladder of radii and fits the growth of
//! `g_R(o)` against bounded and unbounded templates.

use serde::Serialize;

use super::{capacity, solve_green, SolverOptions};
use crate::error::{Error, Result};
use crate::exec::{map_slice, ExecMode};
use crate::graph::{BallProfile, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParabolicityLabel {
    LooksParabolic,
    LooksNonParabolic,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub radius: usize,
    pub green_at_root: f64,
    pub capacity_of_root: f64,
    /// `g_R(o) − g_{R_prev}(o)`; zero for the first radius.
    pub increment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TemplateFit {
    /// `constant`, `log`, or `power`.
    pub template: &'static str,
    pub a: f64,
    pub b: f64,
    /// Exponent for the power template, `None` otherwise.
    pub beta: Option<f64>,
    /// Root-mean-square residual per degree of freedom over the mean of `g`.
    pub rel_error: f64,
    /// Whether the template stays bounded as `R → ∞`.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub p: f64,
    pub rows: Vec<ProbeRow>,
    pub fits: Vec<TemplateFit>,
    pub winner: Option<TemplateFit>,
    pub label: ParabolicityLabel,
}

/// Relative last increment below which growth counts as stalled.
const STALL: f64 = 1e-3;
/// Relative fit error below which an unbounded template is trusted.
const FIT_OK: f64 = 0.1;

pub fn parabolicity_probe(
    graph: &WeightedGraph,
    profile: &BallProfile,
    p: f64,
    radii: &[usize],
    options: &SolverOptions,
    mode: ExecMode,
) -> Result<ProbeReport> {
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument("radii must be strictly increasing".into()));
    }
    let solved = map_slice(mode, radii, |&r| -> Result<(f64, f64)> {
        let g = solve_green(graph, profile, r, graph.root(), p, options)?;
        let cap = capacity(graph, profile, &[graph.root()], r, p, options)?;
        Ok((g.at_center(), cap.value))
    });
    let mut rows = Vec::with_capacity(radii.len());
    for (&radius, res) in radii.iter().zip(solved) {
        let (g, cap) = res?;
        let increment = rows
            .last()
            .map_or(0.0, |prev: &ProbeRow| g - prev.green_at_root);
        rows.push(ProbeRow {
            radius,
            green_at_root: g,
            capacity_of_root: cap,
            increment,
        });
    }
    let (fits, winner, label) = classify_growth(&rows);
    Ok(ProbeReport {
        p,
        rows,
        fits,
        winner,
        label,
    })
}

fn classify_growth(
    rows: &[ProbeRow],
) -> (Vec<TemplateFit>, Option<TemplateFit>, ParabolicityLabel) {
    if rows.len() < 3 {
        return (Vec::new(), None, ParabolicityLabel::Inconclusive);
    }
    let take = rows.len().div_ceil(2).max(3);
    let window = &rows[rows.len() - take..];
    let xs: Vec<f64> = window.iter().map(|r| r.radius as f64).collect();
    let ys: Vec<f64> = window.iter().map(|r| r.green_at_root).collect();

    let mut fits = vec![fit_constant(&ys)];
    fits.push(fit_linear(&xs, &ys, "log", None, |x| x.ln()));
    if xs.len() > 3 {
        let best_power = (-80..=40)
            .filter(|&k| k != 0)
            .map(|k| {
                let beta = k as f64 * 0.05;
                fit_linear(&xs, &ys, "power", Some(beta), |x| x.powf(beta))
            })
            .min_by(|a, b| a.rel_error.total_cmp(&b.rel_error));
        fits.extend(best_power);
    }
    // fewer parameters win exact ties
    let winner = fits
        .iter()
        .min_by(|a, b| a.rel_error.total_cmp(&b.rel_error))
        .cloned();

    let last = &rows[rows.len() - 1];
    let stalled = last.increment <= STALL * last.green_at_root;
    let label = match &winner {
        Some(w) if w.bounded && stalled => ParabolicityLabel::LooksNonParabolic,
        Some(w) if !w.bounded && w.b > 0.0 && w.rel_error < FIT_OK && !stalled => {
            ParabolicityLabel::LooksParabolic
        }
        _ => ParabolicityLabel::Inconclusive,
    };
    (fits, winner, label)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn fit_constant(ys: &[f64]) -> TemplateFit {
    let m = mean(ys);
    let sse: f64 = ys.iter().map(|y| (y - m).powi(2)).sum();
    TemplateFit {
        template: "constant",
        a: m,
        b: 0.0,
        beta: None,
        rel_error: (sse / (ys.len() - 1) as f64).sqrt() / m.abs(),
        bounded: true,
    }
}

/// Least squares for `y ≈ a + b·φ(x)`.
fn fit_linear(
    xs: &[f64],
    ys: &[f64],
    template: &'static str,
    beta: Option<f64>,
    phi: impl Fn(f64) -> f64,
) -> TemplateFit {
    let fx: Vec<f64> = xs.iter().map(|&x| phi(x)).collect();
    let (mx, my) = (mean(&fx), mean(ys));
    let sxx: f64 = fx.iter().map(|f| (f - mx).powi(2)).sum();
    let sxy: f64 = fx.iter().zip(ys).map(|(f, y)| (f - mx) * (y - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let sse: f64 = fx
        .iter()
        .zip(ys)
        .map(|(f, y)| (y - a - b * f).powi(2))
        .sum();
    // power fits spend one extra degree of freedom on beta
    let params = if beta.is_some() { 3 } else { 2 };
    let dof = xs.len().saturating_sub(params).max(1) as f64;
    let bounded = matches!(beta, Some(beta) if beta < 0.0);
    TemplateFit {
        template,
        a,
        b,
        beta,
        rel_error: (sse / dof).sqrt() / my.abs(),
        bounded,
    }
}
