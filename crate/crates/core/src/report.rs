//! The full pipeline on one graph: Green functions over a radius ladder, the
//! current and its path decomposition, the series criteria and the radial
//! supersolution sandwich, assembled into one deterministic bundle.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::criterion::{
    cut_series_terms, cut_volume_margins, dyadic_blocks, exponent_identity, series_report,
    volume_series_terms, CutSeries, CutVolumeReport, DyadicReport, RadialProfile, SeriesReport,
    DEFAULT_MARGIN,
};
use crate::error::{Error, Result};
use crate::exec::{map_slice, ExecMode};
use crate::flow::{
    cut_lower_bound, decompose_paths, edge_marginal_deviation, empirical_lower_bound, orient_flow,
    ChainStep,
};
use crate::graph::{ball_profile, WeightedGraph};
use crate::green::{
    green_normalization_check, parabolicity_probe, sandwich_upper_bound, solve_green, ProbeReport,
    SolverOptions,
};
use crate::operator::ExponentParams;
use crate::verify::{
    positivity_propagation, shoot_radial_supersolution, PositivityVerdict, ShootingOutcome,
};

#[derive(Debug, Clone)]
pub struct ReportConfig {
    pub params: ExponentParams,
    pub radii: Vec<usize>,
    /// Starting value for the radial supersolution.
    pub u0: f64,
    pub seed: u64,
    pub normalization_trials: usize,
    pub margin: f64,
    pub solver: SolverOptions,
    pub mode: ExecMode,
}

impl ReportConfig {
    pub fn new(params: ExponentParams, radii: Vec<usize>) -> Self {
        ReportConfig {
            params,
            radii,
            u0: 0.05,
            seed: 0,
            normalization_trials: 100,
            margin: DEFAULT_MARGIN,
            solver: SolverOptions::default(),
            mode: ExecMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphSummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub eccentricity: usize,
    pub r_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub radius: usize,
    pub green_at_root: f64,
    pub residual: f64,
    pub newton_iterations: usize,
    pub normalization_deviation: f64,
    pub positivity: PositivityVerdict,
    pub l_r: f64,
    pub lower: f64,
    /// Present where the shot supersolution is verified on `B_R`.
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSummary {
    pub radius: usize,
    pub retained_edges: usize,
    pub discarded_edges: usize,
    pub max_divergence: f64,
    pub divergence_tolerance: f64,
    pub paths: usize,
    pub total_probability: f64,
    pub marginal_deviation: f64,
    pub chain_holds: bool,
    pub steps: Vec<ChainStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionSection {
    pub exponent_identity: (f64, f64),
    pub volume_series: SeriesReport,
    pub cut_series: CutSeries,
    pub cut_volume: CutVolumeReport,
    pub dyadic: DyadicReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportBundle {
    pub graph: GraphSummary,
    pub p: f64,
    pub sigma: f64,
    pub seed: u64,
    pub ladder: Vec<LadderRow>,
    pub flows: Vec<FlowSummary>,
    pub probe: ProbeReport,
    pub criterion: CriterionSection,
    /// Absent when the graph has edges inside a sphere.
    pub shooting: Option<ShootingOutcome>,
    pub shooting_note: Option<String>,
    pub all_checks_hold: bool,
}

impl ReportBundle {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Internal(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// Columns `R, g_R(o), L_R, lower, upper, residual`; a missing upper bound is empty.
    pub fn ladder_csv(&self) -> String {
        let mut out = String::from("radius,green_at_root,l_r,lower,upper,residual\n");
        for row in &self.ladder {
            let upper = row.upper.map_or(String::new(), |u| format!("{u:e}"));
            let _ = writeln!(
                out,
                "{},{:e},{:e},{:e},{},{:e}",
                row.radius, row.green_at_root, row.l_r, row.lower, upper, row.residual
            );
        }
        out
    }

    /// Columns `n, t_n, partial_sum` of the volume series.
    pub fn series_csv(&self) -> String {
        series_csv(&self.criterion.volume_series)
    }

    /// Writes `report.json`, `ladder.csv` and `series.csv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;
        std::fs::write(dir.join("ladder.csv"), self.ladder_csv())?;
        std::fs::write(dir.join("series.csv"), self.series_csv())?;
        Ok(())
    }
}

pub fn series_csv(report: &SeriesReport) -> String {
    let mut out = String::from("n,t_n,partial_sum\n");
    for (i, (t, s)) in report.terms.iter().zip(&report.partial_sums).enumerate() {
        let _ = writeln!(out, "{},{t:e},{s:e}", i + 1);
    }
    out
}

/// Series criteria of a profile up to `horizon` (at most the profile's own).
pub fn criterion_section(
    profile: &RadialProfile,
    params: &ExponentParams,
    horizon: usize,
    margin: f64,
) -> Result<CriterionSection> {
    let horizon = horizon.min(profile.horizon());
    if horizon == 0 {
        return Err(Error::Precondition(
            "criterion needs a horizon of at least 1".into(),
        ));
    }
    let prefix = profile.cut_prefix();
    let terms = volume_series_terms(&profile.volumes[1..=horizon], params)?;
    let dyadic = dyadic_blocks(&terms, &prefix[..=horizon], params)?;
    Ok(CriterionSection {
        exponent_identity: exponent_identity(params),
        volume_series: series_report(terms, margin)?,
        cut_series: cut_series_terms(&profile.cuts, params, horizon)?,
        cut_volume: cut_volume_margins(&profile.volumes[..=horizon], &prefix[..=horizon]),
        dyadic,
    })
}

struct RadiusResult {
    row: LadderRow,
    flow: FlowSummary,
}

pub fn run_report(graph: &WeightedGraph, config: &ReportConfig) -> Result<ReportBundle> {
    let profile = ball_profile(graph);
    let params = &config.params;
    if config.radii.is_empty() {
        return Err(Error::Argument("the radius ladder is empty".into()));
    }
    if let Some(&r) = config.radii.iter().find(|&&r| r > profile.r_max()) {
        return Err(Error::Precondition(format!(
            "radius {r} exceeds R_max = {}",
            profile.r_max()
        )));
    }
    let (shooting, shooting_note) =
        match shoot_radial_supersolution(graph, &profile, params, config.u0) {
            Ok(out) => (Some(out), None),
            Err(Error::Precondition(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        };

    let results = map_slice(
        config.mode,
        &config.radii,
        |&radius| -> Result<RadiusResult> {
            let green = solve_green(
                graph,
                &profile,
                radius,
                graph.root(),
                params.p,
                &config.solver,
            )?;
            let normalization = green_normalization_check(
                graph,
                &profile,
                &green,
                config.normalization_trials,
                config.seed.wrapping_add(radius as u64),
            );
            let ball = profile.ball(radius);
            let positivity = positivity_propagation(graph, &green.values, params.p, Some(&ball))?;
            let flow = orient_flow(graph, &profile, &green, None)?;
            let measure = decompose_paths(&flow)?;
            let (marginal_deviation, _) = edge_marginal_deviation(&flow, &measure);
            let chain = empirical_lower_bound(
                graph,
                &profile,
                &green,
                &flow,
                &measure,
                params,
                ExecMode::Sequential,
            )?;
            let upper = match &shooting {
                Some(shot)
                    if config.u0 > 0.0 && shot.verified_radius.is_some_and(|v| v >= radius) =>
                {
                    Some(
                        sandwich_upper_bound(graph, &profile, &green, &shot.function, params)?
                            .bound,
                    )
                }
                _ => None,
            };
            Ok(RadiusResult {
                row: LadderRow {
                    radius,
                    green_at_root: green.at_center(),
                    residual: green.residual,
                    newton_iterations: green.report.iterations,
                    normalization_deviation: normalization,
                    positivity,
                    l_r: chain.l_r,
                    lower: cut_lower_bound(&profile, params, radius),
                    upper,
                },
                flow: FlowSummary {
                    radius,
                    retained_edges: flow.edges.len(),
                    discarded_edges: flow.discarded,
                    max_divergence: flow.max_divergence,
                    divergence_tolerance: flow.divergence_tolerance,
                    paths: measure.paths.len(),
                    total_probability: measure.total_probability(),
                    marginal_deviation,
                    chain_holds: chain.all_hold(),
                    steps: chain.steps,
                },
            })
        },
    );
    let mut ladder = Vec::with_capacity(results.len());
    let mut flows = Vec::with_capacity(results.len());
    for res in results {
        let res = res?;
        ladder.push(res.row);
        flows.push(res.flow);
    }

    let mut probe_radii = config.radii.clone();
    probe_radii.sort_unstable();
    probe_radii.dedup();
    let probe = parabolicity_probe(
        graph,
        &profile,
        params.p,
        &probe_radii,
        &config.solver,
        config.mode,
    )?;
    let radial = RadialProfile::from_ball_profile(&profile);
    let criterion = criterion_section(&radial, params, radial.horizon(), config.margin)?;

    let sandwich_ok = ladder.iter().all(|row| {
        row.lower <= row.l_r * (1.0 + 1e-9) && row.upper.is_none_or(|u| row.l_r <= u * (1.0 + 1e-9))
    });
    let all_checks_hold = sandwich_ok
        && flows.iter().all(|f| f.chain_holds)
        && criterion.cut_volume.worst_margin >= 0.0;

    Ok(ReportBundle {
        graph: GraphSummary {
            vertex_count: graph.vertex_count(),
            edge_count: graph.edge_count(),
            eccentricity: profile.eccentricity(),
            r_max: profile.r_max(),
        },
        p: params.p,
        sigma: params.sigma,
        seed: config.seed,
        ladder,
        flows,
        probe,
        criterion,
        shooting,
        shooting_note,
        all_checks_hold,
    })
}
