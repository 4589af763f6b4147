//! Volume-growth and cut-conductance series, and a finite-horizon verdict on
//! their divergence.
//!
//! No finite computation decides divergence. [`classify`] fits
//! `t_n ≈ c·n^{−β}(log n)^{−γ}` on the top half of the horizon and answers
//! `inconclusive` whenever the fit lands within `margin` of the boundary
//! `β = 1, γ = 1`.

mod dyadic;

pub use dyadic::{
    cut_volume_check, cut_volume_margins, dyadic_blocks, holder_row, midrange_cut_bound,
    CutVolumeReport, DyadicBlock, DyadicReport, MidrangeReport, MidrangeRow,
};

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BallProfile;
use crate::operator::ExponentParams;

/// Default half-width of the undecided band around `β = 1` and `γ = 1`.
pub const DEFAULT_MARGIN: f64 = 0.05;
/// Horizons shorter than this are always inconclusive.
pub const MIN_HORIZON: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Diverges,
    Converges,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFit {
    pub classification: Classification,
    pub beta: f64,
    pub gamma: f64,
    pub log_constant: f64,
    /// Root-mean-square residual of the fit in `log t_n`.
    pub fit_error: f64,
    /// First and last `n` of the fit window.
    pub window: (usize, usize),
    /// Reason the verdict was forced, if it was.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesReport {
    /// `t_1, …, t_N`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub horizon: usize,
    pub classification: Classification,
    pub fitted_exponents: (f64, f64),
    pub fit_error: f64,
    pub fit: SeriesFit,
}

/// Ball volumes `W_n` and cut conductances `b_n` for `n = 0..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialProfile {
    pub volumes: Vec<f64>,
    pub cuts: Vec<f64>,
}

#[derive(Deserialize)]
struct ProfileRow {
    n: usize,
    volume: f64,
    cut: f64,
}

impl RadialProfile {
    /// Truncates a ball profile at its largest interior radius.
    pub fn from_ball_profile(profile: &BallProfile) -> Self {
        let h = profile.r_max();
        RadialProfile {
            volumes: profile.volumes()[..=h].to_vec(),
            cuts: profile.cuts()[..=h].to_vec(),
        }
    }

    /// Reads CSV with header `n,volume,cut` and rows `n = 0, 1, 2, …`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let mut volumes = Vec::new();
        let mut cuts = Vec::new();
        for (i, row) in reader.deserialize::<ProfileRow>().enumerate() {
            let row = row?;
            if row.n != i {
                return Err(Error::Parse {
                    location: format!("line {}", i + 2),
                    message: format!("expected n = {i}, found {}", row.n),
                });
            }
            if !(row.volume > 0.0 && row.volume.is_finite())
                || !(row.cut >= 0.0 && row.cut.is_finite())
            {
                return Err(Error::Validation(format!(
                    "row n = {i}: volume must be positive and cut nonnegative"
                )));
            }
            volumes.push(row.volume);
            cuts.push(row.cut);
        }
        if volumes.len() < 2 {
            return Err(Error::Validation(
                "profile needs rows n = 0 and n = 1".into(),
            ));
        }
        Ok(RadialProfile { volumes, cuts })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Resource(format!("cannot read {}: {e}", path.display())))?;
        Self::from_csv(&text)
    }

    pub fn horizon(&self) -> usize {
        self.volumes.len() - 1
    }

    /// `M_N = Σ_{k≤N} b_k`.
    pub fn cut_prefix(&self) -> Vec<f64> {
        self.cuts
            .iter()
            .scan(0.0, |acc, b| {
                *acc += b;
                Some(*acc)
            })
            .collect()
    }
}

/// `t_n = n^{pσ/(p−1)−1} / W_n^{η/r}` for `n = 1..=W.len()`; `volumes[i]` is `W_{i+1}`.
pub fn volume_series_terms(volumes: &[f64], params: &ExponentParams) -> Result<Vec<f64>> {
    if let Some((i, w)) = volumes
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
    {
        return Err(Error::Argument(format!(
            "W_{} = {w} must be positive",
            i + 1
        )));
    }
    let a = params.volume_exponent();
    let q = params.eta() / params.r();
    Ok(volumes
        .iter()
        .enumerate()
        .map(|(i, &w)| (a * ((i + 1) as f64).ln() - q * w.ln()).exp())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailExtrapolation {
    /// `geometric` (`b_k ≈ A q^k`) or `power` (`b_k ≈ A k^β`).
    pub model: &'static str,
    pub amplitude: f64,
    /// `q` or `β`.
    pub rate: f64,
    /// Estimated `Σ_{k>R} b_k^{−1/r}`; infinite when the fitted tail diverges.
    pub tail_sum: f64,
    /// `n^r (inner_n + tail_sum)^η` for `n = 1..=R`.
    pub terms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutSeries {
    pub radius: usize,
    /// `s_n = n^r (Σ_{k=n}^R b_k^{−1/r})^η` for `n = 1..=R`.
    pub terms: Vec<f64>,
    /// Truncated inner sums `Σ_{k=n}^R b_k^{−1/r}` for `n = 1..=R`.
    pub inner_sums: Vec<f64>,
    /// Smallest `k ≤ R` with `b_k = 0`; the inner sums up to it are infinite.
    pub zero_cut: Option<usize>,
    pub tail: Option<TailExtrapolation>,
}

/// Cut-conductance series truncated at `R`; `cuts[k]` is `b_k`.
pub fn cut_series_terms(cuts: &[f64], params: &ExponentParams, radius: usize) -> Result<CutSeries> {
    if cuts.len() <= radius {
        return Err(Error::Argument(format!(
            "need b_0..b_{radius}, got {} values",
            cuts.len()
        )));
    }
    if let Some(b) = cuts[..=radius]
        .iter()
        .find(|b| !(**b >= 0.0 && b.is_finite()))
    {
        return Err(Error::Argument(format!(
            "cut conductance {b} must be nonnegative"
        )));
    }
    let (r, eta) = (params.r(), params.eta());
    let zero_cut = cuts[..=radius].iter().position(|&b| b == 0.0);
    let mut inner_sums = vec![0.0; radius];
    let mut acc = 0.0;
    for n in (1..=radius).rev() {
        acc += cuts[n].powf(-1.0 / r);
        inner_sums[n - 1] = acc;
    }
    let term = |n: usize, s: f64| (n as f64).powf(r) * s.powf(eta);
    let terms = (1..=radius).map(|n| term(n, inner_sums[n - 1])).collect();
    let tail = fit_cut_tail(&cuts[..=radius], r).map(|(model, amplitude, rate, tail_sum)| {
        TailExtrapolation {
            model,
            amplitude,
            rate,
            tail_sum,
            terms: (1..=radius)
                .map(|n| term(n, inner_sums[n - 1] + tail_sum))
                .collect(),
        }
    });
    Ok(CutSeries {
        radius,
        terms,
        inner_sums,
        zero_cut,
        tail,
    })
}

/// Fits the last quarter of `b` with geometric and power laws and sums the
/// better model past the end. `None` if fewer than four positive values remain.
fn fit_cut_tail(cuts: &[f64], r: f64) -> Option<(&'static str, f64, f64, f64)> {
    let len = cuts.len();
    let start = (len - len / 4).min(len.saturating_sub(4)).max(1);
    let pts: Vec<(f64, f64)> = (start..len)
        .filter(|&k| cuts[k] > 0.0)
        .map(|k| (k as f64, cuts[k].ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let geo = line_fit(pts.iter().map(|&(k, y)| (k, y)));
    let pow = line_fit(pts.iter().map(|&(k, y)| (k.ln(), y)));
    let next = len as f64;
    if geo.2 <= pow.2 {
        let (log_a, log_q) = (geo.0, geo.1);
        let (a, q) = (log_a.exp(), log_q.exp());
        // Σ_{k≥next} A^{−1/r} q^{−k/r}
        let ratio = (-log_q / r).exp();
        let tail = if ratio < 1.0 {
            a.powf(-1.0 / r) * ratio.powf(next) / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        Some(("geometric", a, q, tail))
    } else {
        let (a, beta) = (pow.0.exp(), pow.1);
        let decay = beta / r;
        // integral comparison from next − 1/2
        let tail = if decay > 1.0 {
            a.powf(-1.0 / r) * (next - 0.5).powf(1.0 - decay) / (decay - 1.0)
        } else {
            f64::INFINITY
        };
        Some(("power", a, beta, tail))
    }
}

/// Ordinary least squares `y ≈ a + b x`; returns `(a, b, sse)`.
fn line_fit(pts: impl Iterator<Item = (f64, f64)> + Clone) -> (f64, f64, f64) {
    let n = pts.clone().count() as f64;
    let (sx, sy) = pts
        .clone()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = pts.clone().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx).powi(2), b + (x - mx) * (y - my))
    });
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let icept = my - slope * mx;
    let sse = pts.map(|(x, y)| (y - icept - slope * x).powi(2)).sum();
    (icept, slope, sse)
}

/// Both sides of `pσ/(p−1) − 1 = r + η + η/r`.
pub fn exponent_identity(params: &ExponentParams) -> (f64, f64) {
    let (p, sigma) = (params.p, params.sigma);
    let (r, eta) = (params.r(), params.eta());
    (p * sigma / (p - 1.0) - 1.0, r + eta + eta / r)
}

/// Fits `log t_n = log c − β log n − γ log log n` over `n ∈ [N/2, N]` and
/// applies the margin rule.
pub fn classify(terms: &[f64], margin: f64) -> Result<SeriesFit> {
    let horizon = terms.len();
    if let Some((i, t)) = terms
        .iter()
        .enumerate()
        .find(|(_, t)| !(**t >= 0.0) || t.is_nan())
    {
        return Err(Error::Argument(format!(
            "term t_{} = {t} is not a nonnegative number",
            i + 1
        )));
    }
    if let Some(i) = terms.iter().position(|t| t.is_infinite()) {
        return Ok(SeriesFit {
            classification: Classification::Diverges,
            beta: f64::NAN,
            gamma: f64::NAN,
            log_constant: f64::NAN,
            fit_error: 0.0,
            window: (i + 1, i + 1),
            note: Some(format!("term t_{} is infinite", i + 1)),
        });
    }
    let lo = (horizon / 2).max(3);
    let window: Vec<usize> = (lo..=horizon).filter(|&n| terms[n - 1] > 0.0).collect();
    if window.len() < 4 {
        return Ok(SeriesFit {
            classification: Classification::Inconclusive,
            beta: f64::NAN,
            gamma: f64::NAN,
            log_constant: f64::NAN,
            fit_error: f64::NAN,
            window: (lo, horizon),
            note: Some("too few positive terms to fit".into()),
        });
    }
    let rows = window.len();
    let design = DMatrix::from_fn(rows, 3, |i, j| {
        let n = window[i] as f64;
        match j {
            0 => 1.0,
            1 => -n.ln(),
            _ => -n.ln().ln(),
        }
    });
    let target = DVector::from_iterator(rows, window.iter().map(|&n| terms[n - 1].ln()));
    // equilibrate columns before the SVD; log n and log log n are nearly collinear
    let scales: Vec<f64> = (0..3).map(|j| design.column(j).norm()).collect();
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let coef = scaled
        .svd(true, true)
        .solve(&target, 1e-13)
        .map_err(|e| Error::Internal(format!("least squares failed: {e}")))?;
    let (log_c, beta, gamma) = (
        coef[0] / scales[0],
        coef[1] / scales[1],
        coef[2] / scales[2],
    );
    let fitted = &design * DVector::from_vec(vec![log_c, beta, gamma]);
    let fit_error = ((&target - fitted).norm_squared() / rows as f64).sqrt();

    let mut note = None;
    let classification = if horizon < MIN_HORIZON {
        note = Some(format!("horizon {horizon} is below {MIN_HORIZON}"));
        Classification::Inconclusive
    } else if beta < 1.0 - margin || ((beta - 1.0).abs() <= margin && gamma <= 1.0 - margin) {
        Classification::Diverges
    } else if beta > 1.0 + margin || ((beta - 1.0).abs() <= margin && gamma >= 1.0 + margin) {
        Classification::Converges
    } else {
        Classification::Inconclusive
    };
    Ok(SeriesFit {
        classification,
        beta,
        gamma,
        log_constant: log_c,
        fit_error,
        window: (lo, horizon),
        note,
    })
}

/// Partial sums, fit and verdict for a series of nonnegative terms.
pub fn series_report(terms: Vec<f64>, margin: f64) -> Result<SeriesReport> {
    let fit = classify(&terms, margin)?;
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    Ok(SeriesReport {
        horizon: terms.len(),
        terms,
        partial_sums,
        classification: fit.classification,
        fitted_exponents: (fit.beta, fit.gamma),
        fit_error: fit.fit_error,
        fit,
    })
}
