use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::BallProfile;
use crate::operator::ExponentParams;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutVolumeReport {
    /// `W_N − M_N` for `N = 0..=eccentricity`.
    pub margins: Vec<f64>,
    pub worst_margin: f64,
    pub worst_radius: usize,
}

/// Compares cumulative cut conductance `M_N` with ball volume `W_N`.
pub fn cut_volume_check(profile: &BallProfile) -> CutVolumeReport {
    cut_volume_margins(profile.volumes(), profile.cut_prefix())
}

/// `W_N − M_N` from arrays indexed by `N`.
pub fn cut_volume_margins(volumes: &[f64], cut_prefix: &[f64]) -> CutVolumeReport {
    let margins: Vec<f64> = volumes.iter().zip(cut_prefix).map(|(w, m)| w - m).collect();
    let (worst_radius, worst_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0, 0.0));
    CutVolumeReport {
        margins,
        worst_margin,
        worst_radius,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicBlock {
    pub n: usize,
    /// `D_N = N^{r+η+η/r+1} / M_N^{η/r}`.
    pub d: f64,
    /// `Σ_{n=N}^{2N−1} t_n`.
    pub block_sum: f64,
    /// `block_sum / D_N`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicReport {
    pub blocks: Vec<DyadicBlock>,
    /// Largest observed `block_sum / D_N`.
    pub empirical_constant: f64,
    /// `2^{r+η+η/r}`, valid whenever `W_n ≥ M_N` on each block.
    pub theoretical_constant: f64,
    pub partial_sums: Vec<f64>,
}

/// Dyadic blocks at `N = 1, 2, 4, …` while `2N − 1 ≤ terms.len()`.
///
/// `terms[n − 1]` is `t_n` and `cut_prefix[N]` is `M_N`.
pub fn dyadic_blocks(
    terms: &[f64],
    cut_prefix: &[f64],
    params: &ExponentParams,
) -> Result<DyadicReport> {
    if let Some(i) = (1..cut_prefix.len()).find(|&i| cut_prefix[i] < cut_prefix[i - 1]) {
        return Err(Error::Argument(format!(
            "M must be nondecreasing, M_{} = {} > M_{i} = {}",
            i - 1,
            cut_prefix[i - 1],
            cut_prefix[i]
        )));
    }
    let (r, eta) = (params.r(), params.eta());
    let a = params.volume_exponent();
    let mut blocks = Vec::new();
    let mut n = 1usize;
    while 2 * n - 1 <= terms.len() && n < cut_prefix.len() {
        let m = cut_prefix[n];
        if !(m > 0.0) {
            return Err(Error::Argument(format!("M_{n} = {m} must be positive")));
        }
        let d = ((a + 1.0) * (n as f64).ln() - eta / r * m.ln()).exp();
        let block_sum: f64 = terms[n - 1..2 * n - 1].iter().sum();
        blocks.push(DyadicBlock {
            n,
            d,
            block_sum,
            ratio: block_sum / d,
        });
        n *= 2;
    }
    let empirical_constant = blocks.iter().map(|b| b.ratio).fold(0.0, f64::max);
    let partial_sums = blocks
        .iter()
        .scan(0.0, |acc, b| {
            *acc += b.d;
            Some(*acc)
        })
        .collect();
    Ok(DyadicReport {
        blocks,
        empirical_constant,
        theoretical_constant: 2f64.powf(a),
        partial_sums,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidrangeRow {
    pub m: usize,
    /// `Σ_{k=m}^N b_k^{−1/r}`.
    pub lhs: f64,
    /// `(N − m + 1)^{1+1/r} / M_N^{1/r}`, the exact Hölder bound.
    pub rhs: f64,
    /// `c_m = ((N − m + 1)/N)^{1+1/r}`, so that `rhs = c_m N^{1+1/r}/M_N^{1/r}`.
    pub constant: f64,
    /// `lhs / rhs`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MidrangeReport {
    pub n: usize,
    pub m_n: f64,
    pub rows: Vec<MidrangeRow>,
    /// `4^{−(1+1/r)}`, a lower bound for every `c_m` with `m ≤ 3N/4`.
    pub uniform_constant: f64,
    pub min_slack: f64,
}

/// Hölder lower bound for one window `[m, N]` of cut conductances.
pub fn holder_row(
    profile: &BallProfile,
    params: &ExponentParams,
    m: usize,
    n: usize,
) -> Result<MidrangeRow> {
    if m > n || n >= profile.cuts().len() {
        return Err(Error::Argument(format!(
            "window [{m}, {n}] outside the profile"
        )));
    }
    let r = params.r();
    let cuts = &profile.cuts()[m..=n];
    let m_n = profile.cut_prefix()[n];
    let lhs: f64 = cuts.iter().map(|b| b.powf(-1.0 / r)).sum();
    let len = (n - m + 1) as f64;
    let rhs = len.powf(1.0 + 1.0 / r) / m_n.powf(1.0 / r);
    Ok(MidrangeRow {
        m,
        lhs,
        rhs,
        constant: (len / n as f64).powf(1.0 + 1.0 / r),
        slack: lhs / rhs,
    })
}

/// Hölder bounds for every `m ∈ [⌈N/2⌉, ⌊3N/4⌋]`.
pub fn midrange_cut_bound(
    profile: &BallProfile,
    params: &ExponentParams,
    n: usize,
) -> Result<MidrangeReport> {
    if n < 4 || n > profile.r_max() {
        return Err(Error::Precondition(format!(
            "need 4 ≤ N ≤ {}, got N = {n}",
            profile.r_max()
        )));
    }
    let rows = (n.div_ceil(2)..=3 * n / 4)
        .map(|m| holder_row(profile, params, m, n))
        .collect::<Result<Vec<_>>>()?;
    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    Ok(MidrangeReport {
        n,
        m_n: profile.cut_prefix()[n],
        rows,
        uniform_constant: 4f64.powf(-(1.0 + 1.0 / params.r())),
        min_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        ball_profile, build_lattice, build_radial_model, build_tree, GeneratorLimits,
    };

    #[test]
    fn path_margin_is_two_n() {
        let g = build_lattice(1, 10, GeneratorLimits::default()).unwrap();
        let rep = cut_volume_check(&ball_profile(&g));
        for n in 0..10 {
            assert_eq!(rep.margins[n], 2.0 * n as f64);
        }
        assert!(rep.worst_margin >= 0.0);
    }

    #[test]
    fn radial_edges_counted_twice_in_volume() {
        let g = build_radial_model(
            &[1, 1, 1, 1, 1],
            &[1.0, 2.0, 3.0, 4.0],
            GeneratorLimits::default(),
        )
        .unwrap();
        let rep = cut_volume_check(&ball_profile(&g));
        assert!(rep.margins[1..].iter().all(|&m| m > 0.0));
        assert_eq!(rep.margins[0], 0.0);
    }

    #[test]
    fn lattice_blocks_grow() {
        let p = ExponentParams::new(2.0, 3.0).unwrap();
        let m: Vec<f64> = (0..=64).map(|n| 2.0 * (n + 1) as f64).collect();
        let w: Vec<f64> = (1..=64).map(|n| 2.0 * (2 * n + 1) as f64).collect();
        let t = crate::criterion::volume_series_terms(&w, &p).unwrap();
        let rep = dyadic_blocks(&t, &m, &p).unwrap();
        for b in &rep.blocks {
            let n = b.n as f64;
            assert!((b.d - n.powi(6) / (2.0 * n + 2.0).powi(2)).abs() < 1e-9 * b.d);
            assert!(b.block_sum <= rep.theoretical_constant * b.d);
        }
        assert!(rep.empirical_constant <= rep.theoretical_constant);
    }

    #[test]
    fn critical_cut_growth_gives_constant_blocks() {
        let p = ExponentParams::new(2.0, 3.0).unwrap();
        // (a + 1) r / η = 6 / 2 = 3
        let m: Vec<f64> = (0..=256).map(|n| ((n as f64).max(1.0)).powi(3)).collect();
        let t = vec![1.0; 256];
        let rep = dyadic_blocks(&t, &m, &p).unwrap();
        for b in &rep.blocks {
            assert!((b.d - 1.0).abs() < 1e-12);
        }
        assert!(dyadic_blocks(&t, &[1.0, 2.0, 1.5], &p).is_err());
    }

    #[test]
    fn holder_bound_constant_cuts() {
        let g = build_lattice(1, 20, GeneratorLimits::default()).unwrap();
        let prof = ball_profile(&g);
        let p = ExponentParams::new(3.0, 4.0).unwrap();
        let rep = midrange_cut_bound(&prof, &p, 12).unwrap();
        assert_eq!(rep.rows.first().unwrap().m, 6);
        assert_eq!(rep.rows.last().unwrap().m, 9);
        for row in &rep.rows {
            let len = (12 - row.m + 1) as f64;
            assert!((row.lhs - len * 2f64.powf(-0.5)).abs() < 1e-12);
            assert!(row.constant >= rep.uniform_constant);
            assert!(row.slack >= 1.0 - 1e-9);
        }
        let single = holder_row(&prof, &p, 12, 12).unwrap();
        assert!(single.slack >= 1.0);
        assert!(midrange_cut_bound(&prof, &p, 3).is_err());
    }

    #[test]
    fn holder_bound_on_tree() {
        let g = build_tree(2, 9, GeneratorLimits::default()).unwrap();
        let prof = ball_profile(&g);
        let p = ExponentParams::new(1.5, 2.0).unwrap();
        let rep = midrange_cut_bound(&prof, &p, 8).unwrap();
        assert!(rep.min_slack >= 1.0 - 1e-9);
    }
}
