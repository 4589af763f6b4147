//! Property harnesses for the standalone inequalities, and radial
//! supersolutions for exercising the two-sided bounds on `L_R`.

mod positivity;
mod shooting;
mod suites;

pub use positivity::{positivity_propagation, PositivityVerdict};
pub use shooting::{sandwich_demo, shoot_radial_supersolution, SandwichReport, ShootingOutcome};
pub use suites::{hardy_suite, picone_suite, SuiteOptions, SuiteReport, Witness};

use crate::error::{Error, Result};
use crate::operator::{phi_p, pow_nonneg, ExponentParams};

/// Both sides of `Φ_p(a−b)(s^σ − t^σ) ≤ (σ/η) Φ_p(as − bt)(s^η − t^η)`.
pub fn picone_check(a: f64, b: f64, s: f64, t: f64, params: &ExponentParams) -> Result<(f64, f64)> {
    for (name, v) in [("a", a), ("b", b), ("s", s), ("t", t)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::Argument(format!(
                "{name} = {v} must be finite and nonnegative"
            )));
        }
    }
    let (p, sigma, eta) = (params.p, params.sigma, params.eta());
    let lhs = phi_p(a - b, p) * (pow_nonneg(s, sigma) - pow_nonneg(t, sigma));
    let rhs = sigma / eta * phi_p(a * s - b * t, p) * (pow_nonneg(s, eta) - pow_nonneg(t, eta));
    Ok((lhs, rhs))
}

/// Magnitude against which Picone round-off is measured: the larger of the
/// two products formed from absolute values of their factors.
pub fn picone_scale(a: f64, b: f64, s: f64, t: f64, params: &ExponentParams) -> f64 {
    let (p, sigma, eta) = (params.p, params.sigma, params.eta());
    let left = phi_p(a - b, p).abs() * pow_nonneg(s, sigma).max(pow_nonneg(t, sigma));
    let right =
        sigma / eta * (a * s).max(b * t).powf(p - 1.0) * pow_nonneg(s, eta).max(pow_nonneg(t, eta));
    left.max(right)
}

/// Both sides of `Σ a_i^{−r} ≥ 2^{−(r+1)} Σ_j (j / A_j)^r`, `A_j` the prefix sums.
pub fn hardy_check(a: &[f64], r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Argument(format!("r = {r} must be positive")));
    }
    if let Some(x) = a.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::Argument(format!(
            "entries must be positive, got {x}"
        )));
    }
    let lhs = a.iter().map(|x| x.powf(-r)).sum();
    let mut prefix = 0.0;
    let mut rhs = 0.0;
    for (j, x) in a.iter().enumerate() {
        prefix += x;
        rhs += ((j + 1) as f64 / prefix).powf(r);
    }
    Ok((lhs, 2f64.powf(-(r + 1.0)) * rhs))
}

/// Smallest `A_{2k} − k a_k` and `A_{2k+1} − k a_k` over an increasingly sorted
/// array; both are nonnegative.
pub fn even_odd_margin(sorted: &[f64]) -> f64 {
    let mut prefix = vec![0.0; sorted.len() + 1];
    for (i, x) in sorted.iter().enumerate() {
        prefix[i + 1] = prefix[i] + x;
    }
    let mut worst = f64::INFINITY;
    for k in 1..=sorted.len() / 2 {
        let a_k = sorted[k - 1];
        let tail: f64 = prefix[2 * k] - prefix[k];
        worst = worst.min(prefix[2 * k] - tail).min(tail - k as f64 * a_k);
        if 2 * k < sorted.len() {
            worst = worst.min(prefix[2 * k + 1] - k as f64 * a_k);
        }
    }
    worst
}
