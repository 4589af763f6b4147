//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{binary_tree_green_at_root, families, line_green_at_root, linear_green, rel_err};
use ppot_core::criterion::{
    classify, cut_volume_check, exponent_identity, volume_series_terms, Classification,
    DEFAULT_MARGIN,
};
use ppot_core::flow::{
    cut_lower_bound, decompose_paths, edge_marginal_deviation, empirical_lower_bound, orient_flow,
};
use ppot_core::graph::{
    ball_profile, build_lattice, build_radial_model, build_tree, BallProfile, GeneratorLimits,
};
use ppot_core::green::{
    compute_l, green_normalization_check, solve_green, GreenFunction, SolverOptions,
};
use ppot_core::report::{run_report, ReportConfig};
use ppot_core::verify::{hardy_check, hardy_suite, picone_suite, sandwich_demo, SuiteOptions};
use ppot_core::{ExecMode, ExponentParams, WeightedGraph};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lim() -> GeneratorLimits {
    GeneratorLimits::default()
}

fn solve(
    g: &WeightedGraph,
    prof: &BallProfile,
    radius: usize,
    p: f64,
) -> Result<GreenFunction, String> {
    solve_green(g, prof, radius, g.root(), p, &SolverOptions::default())
        .map_err(|e| format!("solve failed (p={p}, R={radius}): {e}"))
}

/// Every (family, p, R) the flow and normalization criteria run over.
fn instances() -> Vec<(String, WeightedGraph, f64, usize)> {
    let mut out = Vec::new();
    for (name, g) in families() {
        let r_max = ball_profile(&g).r_max();
        for p in [1.5, 2.0, 3.0] {
            for radius in 1..=r_max.min(4) {
                out.push((name.clone(), g.clone(), p, radius));
            }
        }
    }
    out
}

fn green_closed_forms() -> Outcome {
    let line = build_lattice(1, 10, lim()).unwrap();
    let tree = build_tree(2, 9, lim()).unwrap();
    let (lp, tp) = (ball_profile(&line), ball_profile(&tree));
    let mut worst = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        for radius in [2, 4, 8] {
            worst = worst.max(rel_err(
                solve(&line, &lp, radius, p)?.at_center(),
                line_green_at_root(p, radius),
            ));
            worst = worst.max(rel_err(
                solve(&tree, &tp, radius, p)?.at_center(),
                binary_tree_green_at_root(p, radius),
            ));
        }
    }
    check(worst <= 1e-6, format!("worst relative error {worst:.2e}"))
}

fn normalization() -> Outcome {
    let (mut worst_res, mut worst_ratio, mut count) = (0.0f64, 0.0f64, 0);
    for (i, (name, g, p, radius)) in instances().into_iter().enumerate() {
        let prof = ball_profile(&g);
        let sol = solve(&g, &prof, radius, p)?;
        let dev = green_normalization_check(&g, &prof, &sol, 100, i as u64);
        worst_res = worst_res.max(sol.residual);
        // a residual of exactly zero is read at machine precision
        let ratio = dev / sol.residual.max(f64::EPSILON);
        worst_ratio = worst_ratio.max(ratio);
        if sol.residual > 1e-9 || ratio > 10.0 {
            return Err(format!(
                "{name} p={p} R={radius}: residual {:.2e}, deviation {dev:.2e}",
                sol.residual
            ));
        }
        count += 1;
    }
    check(
        true,
        format!("{count} instances, max residual {worst_res:.2e}, max deviation/residual {worst_ratio:.2}"),
    )
}

fn linear_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut sizes = Vec::new();
    for (dim, half, radius) in [(1, 400, 399), (2, 70, 69), (3, 10, 9)] {
        let g = build_lattice(dim, half, lim()).unwrap();
        let prof = ball_profile(&g);
        let sol = solve(&g, &prof, radius, 2.0)?;
        let exact = linear_green(&g, radius);
        for x in 0..g.vertex_count() {
            worst = worst.max((sol.at(x) - exact[x]).abs());
        }
        sizes.push(prof.ball_size(radius));
    }
    check(
        worst <= 1e-8,
        format!("ball sizes {sizes:?}, worst absolute error {worst:.2e}"),
    )
}

fn monotonicity() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (name, g) in families() {
        let prof = ball_profile(&g);
        for p in [1.5, 2.0, 3.0] {
            let mut prev = solve(&g, &prof, 0, p)?;
            for radius in 1..=prof.r_max() {
                let next = solve(&g, &prof, radius, p)?;
                for x in 0..g.vertex_count() {
                    let drop = prev.at(x) - next.at(x);
                    worst = worst.max(drop);
                    if drop > 1e-8 {
                        return Err(format!("{name} p={p} R={radius} x={x}: drop {drop:.2e}"));
                    }
                }
                prev = next;
            }
        }
    }
    check(true, format!("largest decrease {worst:.2e}"))
}

fn conservation() -> Outcome {
    let mut count = 0;
    for (name, g, p, radius) in instances() {
        let prof = ball_profile(&g);
        let sol = solve(&g, &prof, radius, p)?;
        let flow = orient_flow(&g, &prof, &sol, None)
            .map_err(|e| format!("{name} p={p} R={radius}: {e}"))?;
        let bound = 100.0 * sol.residual.max(f64::EPSILON * max_measure(&g));
        let pos = |x| flow.topological_order.iter().position(|&y| y == x);
        let ordered = flow
            .edges
            .iter()
            .all(|e| matches!((pos(e.tail), pos(e.head)), (Some(a), Some(b)) if a < b));
        let orient = flow
            .edges
            .iter()
            .all(|e| e.head != flow.source && e.tail != flow.sink);
        if flow.max_divergence > bound || !ordered || !orient {
            return Err(format!(
                "{name} p={p} R={radius}: divergence {:.2e} (bound {bound:.2e}), ordered {ordered}, oriented {orient}",
                flow.max_divergence
            ));
        }
        count += 1;
    }
    check(true, format!("{count} instances"))
}

fn max_measure(g: &WeightedGraph) -> f64 {
    g.measures().iter().fold(1.0, |m: f64, &v| m.max(v))
}

fn marginals() -> Outcome {
    let (mut worst_dev, mut worst_mass, mut count) = (0.0f64, 0.0f64, 0);
    for (name, g, p, radius) in instances() {
        let prof = ball_profile(&g);
        let sol = solve(&g, &prof, radius, p)?;
        let flow = orient_flow(&g, &prof, &sol, None).map_err(|e| format!("{name}: {e}"))?;
        let measure = decompose_paths(&flow).map_err(|e| format!("{name}: {e}"))?;
        let (dev, foreign) = edge_marginal_deviation(&flow, &measure);
        let mass = (measure.total_probability() - 1.0).abs();
        worst_dev = worst_dev.max(dev);
        worst_mass = worst_mass.max(mass);
        if dev > 1e-9 || foreign > 0 || mass > 1e-10 || measure.paths.len() > flow.edges.len() {
            return Err(format!(
                "{name} p={p} R={radius}: deviation {dev:.2e}, mass error {mass:.2e}, {} paths on {} edges",
                measure.paths.len(),
                flow.edges.len()
            ));
        }
        count += 1;
    }
    check(
        true,
        format!("{count} instances, worst marginal {worst_dev:.2e}, worst mass {worst_mass:.2e}"),
    )
}

fn picone() -> Outcome {
    let rep = picone_suite(&SuiteOptions::new(1_000_000, 7)).map_err(|e| e.to_string())?;
    let t = &rep.properties[0];
    check(
        rep.passed,
        format!(
            "{} tuples, {} violations, worst margin {:.2e}",
            t.checked, t.violations, t.worst_margin
        ),
    )
}

fn hardy() -> Outcome {
    let rep = hardy_suite(&SuiteOptions::new(100_000, 11)).map_err(|e| e.to_string())?;
    let violations: usize = rep.properties.iter().map(|t| t.violations).sum();
    let (_, rhs) = hardy_check(&[1.0, 2.0, 4.0, 8.0], 1.0).map_err(|e| e.to_string())?;
    check(
        rep.passed && (rhs - 0.59048).abs() <= 1e-5,
        format!(
            "{} arrays, {violations} violations, example rhs {rhs:.5}",
            rep.trials
        ),
    )
}

fn chain() -> Outcome {
    let mut steps = 0;
    for (name, g) in [
        ("line", build_lattice(1, 8, lim()).unwrap()),
        ("binary-tree", build_tree(2, 6, lim()).unwrap()),
    ] {
        let prof = ball_profile(&g);
        for p in [2.0, 3.0] {
            let params = ExponentParams::new(p, p + 1.0).unwrap();
            for radius in [3, 4] {
                let sol = solve(&g, &prof, radius, p)?;
                let flow = orient_flow(&g, &prof, &sol, None).map_err(|e| e.to_string())?;
                let measure = decompose_paths(&flow).map_err(|e| e.to_string())?;
                let rep = empirical_lower_bound(
                    &g,
                    &prof,
                    &sol,
                    &flow,
                    &measure,
                    &params,
                    ExecMode::default(),
                )
                .map_err(|e| e.to_string())?;
                let l = compute_l(&g, &sol, params.sigma).map_err(|e| e.to_string())?;
                let lower = cut_lower_bound(&prof, &params, radius);
                if !rep.all_hold() || lower > l {
                    return Err(format!(
                        "{name} p={p} R={radius}: {:?}, lower {lower:.6e} vs L_R {l:.6e}",
                        rep.first_failure()
                    ));
                }
                steps += rep.steps.len();
            }
        }
    }
    check(true, format!("8 instances, {steps} chain steps verified"))
}

fn sandwich() -> Outcome {
    let g = build_tree(2, 6, lim()).unwrap();
    let prof = ball_profile(&g);
    let params = ExponentParams::new(2.0, 3.0).unwrap();
    let mut margins = Vec::new();
    for radius in 1..=4 {
        let rep = sandwich_demo(&g, &prof, &params, radius, 0.05, &SolverOptions::default())
            .map_err(|e| format!("R={radius}: {e}"))?;
        if !(rep.lower_margin > 0.0 && rep.upper_margin > 0.0) {
            return Err(format!(
                "R={radius}: margins {:.3e} and {:.3e}",
                rep.lower_margin, rep.upper_margin
            ));
        }
        margins.push(rep.lower_margin.min(rep.upper_margin));
    }
    let least = margins.iter().copied().fold(f64::INFINITY, f64::min);
    check(true, format!("R = 1..4, smallest margin {least:.3e}"))
}

fn criterion_families() -> Outcome {
    let horizon = 10_000;
    let params = ExponentParams::new(2.0, 3.0).unwrap();
    let harmonic: Vec<f64> = (1..=horizon).map(|n| 1.0 / n as f64).collect();
    let cubic: Vec<f64> = (1..=horizon).map(|n| (n as f64).powi(3)).collect();
    // shifted by one so that W_1 is positive; the tail is unchanged
    let log_cubic: Vec<f64> = (1..=horizon)
        .map(|n| {
            let n = n as f64;
            n.powi(3) * (1.0 + n.ln()).powf(1.2)
        })
        .collect();
    let verdict = |terms: &[f64]| classify(terms, DEFAULT_MARGIN).map(|f| f.classification);
    let a = verdict(&harmonic).map_err(|e| e.to_string())?;
    let b = verdict(&volume_series_terms(&cubic, &params).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let c = verdict(&volume_series_terms(&log_cubic, &params).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = 1.0 + 5.0 * (1.0 - rng.random::<f64>());
        let sigma = (p - 1.0) + 10.0 * (1.0 - rng.random::<f64>());
        let params = ExponentParams::new(p, sigma).unwrap();
        let (lhs, rhs) = exponent_identity(&params);
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    check(
        a == Classification::Diverges
            && b == Classification::Diverges
            && c == Classification::Converges
            && worst <= 1e-12,
        format!("1/n {a:?}, n^3 {b:?}, n^3 log^1.2 {c:?}, identity error {worst:.1e}"),
    )
}

fn cut_volume() -> Outcome {
    let mut graphs: Vec<(String, WeightedGraph)> = families();
    for dim in 1..=3 {
        for half in [1, 2, 5, 8] {
            graphs.push((
                format!("lattice {dim}d/{half}"),
                build_lattice(dim, half, lim()).unwrap(),
            ));
        }
    }
    for branching in 2..=4 {
        for depth in [1, 3, 5] {
            graphs.push((
                format!("tree {branching}/{depth}"),
                build_tree(branching, depth, lim()).unwrap(),
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for i in 0..200 {
        let layers = rng.random_range(2..=12);
        let mut sizes = vec![1usize];
        for _ in 1..layers {
            let last = *sizes.last().unwrap();
            sizes.push(last + rng.random_range(0..=4));
        }
        let weights: Vec<f64> = (1..layers)
            .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
            .collect();
        graphs.push((
            format!("radial #{i}"),
            build_radial_model(&sizes, &weights, lim()).unwrap(),
        ));
    }
    let mut least = f64::INFINITY;
    for (name, g) in &graphs {
        let rep = cut_volume_check(&ball_profile(g));
        least = least.min(rep.worst_margin);
        if rep.worst_margin < 0.0 {
            return Err(format!("{name}: margin {:.3e}", rep.worst_margin));
        }
    }
    check(
        true,
        format!("{} graphs, smallest margin {least:.3e}", graphs.len()),
    )
}

fn determinism() -> Outcome {
    let g = build_tree(2, 6, lim()).unwrap();
    let params = ExponentParams::new(2.0, 3.0).unwrap();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bundles = Vec::new();
    for (i, mode) in [
        ExecMode::default(),
        ExecMode::default(),
        ExecMode::Sequential,
    ]
    .into_iter()
    .enumerate()
    {
        let mut config = ReportConfig::new(params, vec![1, 2, 3, 4]);
        config.mode = mode;
        let bundle = run_report(&g, &config).map_err(|e| e.to_string())?;
        let out = dir.path().join(i.to_string());
        bundle.write_to(&out).map_err(|e| e.to_string())?;
        let mut files = Vec::new();
        for name in ["report.json", "ladder.csv", "series.csv"] {
            files.push(std::fs::read(out.join(name)).map_err(|e| e.to_string())?);
        }
        bundles.push(files);
    }
    let bytes: usize = bundles[0].iter().map(Vec::len).sum();
    check(
        bundles.windows(2).all(|w| w[0] == w[1]),
        format!("3 runs (two default, one sequential), {bytes} bytes each"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("green closed forms", green_closed_forms),
        ("normalization", normalization),
        ("p = 2 linear oracle", linear_oracle),
        ("monotonicity in R", monotonicity),
        ("flow conservation and acyclicity", conservation),
        ("path decomposition marginals", marginals),
        ("Picone inequality", picone),
        ("Hardy inequality", hardy),
        ("lower-bound chain", chain),
        ("supersolution sandwich", sandwich),
        ("series classification", criterion_families),
        ("cut-volume comparison", cut_volume),
        ("report determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
