use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ppot_core::criterion::{RadialProfile, DEFAULT_MARGIN};
use ppot_core::flow::{
    decompose_paths, edge_marginal_deviation, empirical_lower_bound, orient_flow,
};
use ppot_core::graph::{
    ball_profile, build_lattice, build_radial_model, build_tree, load_graph, save_graph,
    GeneratorLimits,
};
use ppot_core::green::{green_normalization_check, solve_green, SolverOptions};
use ppot_core::report::{criterion_section, run_report, series_csv, ReportConfig};
use ppot_core::verify::{
    hardy_suite, picone_suite, positivity_propagation, sandwich_demo, PositivityVerdict,
    SuiteOptions,
};
use ppot_core::{Error, ExecMode, ExponentParams, Result, VertexFunction, WeightedGraph};

/// Green functions, currents and volume-growth criteria for the p-Laplacian on weighted graphs.
#[derive(Parser)]
#[command(name = "ppot", version)]
struct Cli {
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a lattice, tree or radial model graph.
    Gen(GenArgs),
    /// Solve for the Green function of a ball.
    Green(GreenArgs),
    /// Orient the unit current, decompose it into paths and check the lower-bound chain.
    Flow(FlowArgs),
    /// Evaluate the volume and cut series and classify their divergence.
    Criterion(CriterionArgs),
    /// Run the randomized inequality suites and the graph checks.
    Verify(VerifyArgs),
    /// Run the full pipeline and write a report bundle.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Lattice,
    Tree,
    Radial,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long)]
    half_side: Option<usize>,
    #[arg(long, default_value_t = 2)]
    branching: usize,
    #[arg(long)]
    depth: Option<usize>,
    /// Sphere sizes for the radial model, starting with 1.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Weights between consecutive spheres of the radial model.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GreenArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long = "R")]
    radius: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    center: Option<usize>,
    /// Output CSV; a JSON solver report is written next to it.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FlowArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long = "R")]
    radius: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    sigma: f64,
    /// Directory for `paths.json` and `verification.json`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CriterionArgs {
    #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
    graph: Option<PathBuf>,
    /// CSV with header `n,volume,cut`.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    /// Directory for `criterion.json` and `terms.csv`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Picone,
    Hardy,
    Positivity,
    Sandwich,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Graph for the positivity and sandwich checks; a binary tree of depth 6 when absent.
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 3.0)]
    sigma: f64,
    #[arg(long = "R", default_value_t = 4)]
    radius: usize,
    #[arg(long, default_value_t = 0.05)]
    u0: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long = "R", value_delimiter = ',', required = true)]
    radii: Vec<usize>,
    #[arg(long, default_value_t = 0.05)]
    u0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = if cli.sequential {
        ExecMode::Sequential
    } else {
        ExecMode::default()
    };
    let outcome = match cli.command {
        Command::Gen(args) => gen(args),
        Command::Green(args) => green(args),
        Command::Flow(args) => flow(args, mode),
        Command::Criterion(args) => criterion(args),
        Command::Verify(args) => verify(args, mode),
        Command::Report(args) => report(args, mode),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Internal(format!("serialization failed: {e}")))?;
    // a closed pipe surfaces as an I/O error instead of a panic
    writeln!(std::io::stdout().lock(), "{text}")?;
    Ok(())
}

fn gen(args: GenArgs) -> Result<ExitCode> {
    let limits = GeneratorLimits::default();
    let g = match args.family {
        Family::Lattice => {
            let half = args
                .half_side
                .ok_or_else(|| Error::Argument("--half-side is required for lattices".into()))?;
            build_lattice(args.dim, half, limits)?
        }
        Family::Tree => {
            let depth = args
                .depth
                .ok_or_else(|| Error::Argument("--depth is required for trees".into()))?;
            build_tree(args.branching, depth, limits)?
        }
        Family::Radial => build_radial_model(&args.sizes, &args.weights, limits)?,
    };
    save_graph(&g, &args.out)?;
    Ok(ExitCode::SUCCESS)
}

fn green(args: GreenArgs) -> Result<ExitCode> {
    let g = load_graph(&args.graph)?;
    let profile = ball_profile(&g);
    let center = args.center.unwrap_or(g.root());
    let sol = solve_green(
        &g,
        &profile,
        args.radius,
        center,
        args.p,
        &SolverOptions::default(),
    )?;
    sol.values.save_csv(&args.out)?;
    let deviation = green_normalization_check(&g, &profile, &sol, 100, args.seed);
    let sidecar = json!({
        "radius": sol.radius,
        "center": sol.center,
        "p": sol.p,
        "green_at_center": sol.at_center(),
        "residual": sol.residual,
        "normalization_deviation": deviation,
        "solver": sol.report,
    });
    write_json(&args.out.with_extension("json"), &sidecar)?;
    Ok(ExitCode::SUCCESS)
}

fn flow(args: FlowArgs, mode: ExecMode) -> Result<ExitCode> {
    let g = load_graph(&args.graph)?;
    let profile = ball_profile(&g);
    let params = ExponentParams::new(args.p, args.sigma)?;
    let green = solve_green(
        &g,
        &profile,
        args.radius,
        g.root(),
        args.p,
        &SolverOptions::default(),
    )?;
    let current = orient_flow(&g, &profile, &green, None)?;
    let measure = decompose_paths(&current)?;
    let (marginal_deviation, foreign_edges) = edge_marginal_deviation(&current, &measure);
    let chain = empirical_lower_bound(&g, &profile, &green, &current, &measure, &params, mode)?;
    let verification = json!({
        "radius": args.radius,
        "p": args.p,
        "sigma": args.sigma,
        "residual": green.residual,
        "retained_edges": current.edges.len(),
        "discarded_edges": current.discarded,
        "max_divergence": current.max_divergence,
        "divergence_tolerance": current.divergence_tolerance,
        "total_probability": measure.total_probability(),
        "marginal_deviation": marginal_deviation,
        "foreign_edges": foreign_edges,
        "chain": chain,
    });
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_json(&dir.join("paths.json"), &json!(measure))?;
            write_json(&dir.join("verification.json"), &verification)?;
        }
        None => print_json(&json!({ "paths": measure, "verification": verification }))?,
    }
    chain.into_result()?;
    Ok(ExitCode::SUCCESS)
}

fn criterion(args: CriterionArgs) -> Result<ExitCode> {
    let params = ExponentParams::new(args.p, args.sigma)?;
    let profile = match (&args.graph, &args.profile) {
        (Some(path), _) => RadialProfile::from_ball_profile(&ball_profile(&load_graph(path)?)),
        (None, Some(path)) => RadialProfile::load_csv(path)?,
        (None, None) => {
            return Err(Error::Argument(
                "one of --graph or --profile is required".into(),
            ))
        }
    };
    let horizon = args.horizon.unwrap_or(profile.horizon());
    let section = criterion_section(&profile, &params, horizon, args.margin)?;
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            write_json(&dir.join("criterion.json"), &json!(section))?;
            std::fs::write(dir.join("terms.csv"), series_csv(&section.volume_series))?;
        }
        None => print_json(&json!(section))?,
    }
    Ok(ExitCode::SUCCESS)
}

fn default_test_graph() -> Result<WeightedGraph> {
    build_tree(2, 6, GeneratorLimits::default())
}

fn verify(args: VerifyArgs, mode: ExecMode) -> Result<ExitCode> {
    let wants = |s: Suite| args.suite == s || args.suite == Suite::All;
    let options = SuiteOptions::new(args.trials, args.seed).with_mode(mode);
    let mut passed = true;
    let mut report = serde_json::Map::new();
    if wants(Suite::Picone) {
        let r = picone_suite(&options)?;
        passed &= r.passed;
        report.insert("picone".into(), json!(r));
    }
    if wants(Suite::Hardy) {
        let r = hardy_suite(&options)?;
        passed &= r.passed;
        report.insert("hardy".into(), json!(r));
    }
    if wants(Suite::Positivity) || wants(Suite::Sandwich) {
        let g = match &args.graph {
            Some(path) => load_graph(path)?,
            None => default_test_graph()?,
        };
        let profile = ball_profile(&g);
        let params = ExponentParams::new(args.p, args.sigma)?;
        if wants(Suite::Positivity) {
            let zero =
                positivity_propagation(&g, &VertexFunction::zeros(g.vertex_count()), args.p, None)?;
            let mut rows = Vec::new();
            let mut ok = zero == PositivityVerdict::IdenticallyZero;
            for radius in 0..=args.radius.min(profile.r_max()) {
                let sol = solve_green(
                    &g,
                    &profile,
                    radius,
                    g.root(),
                    args.p,
                    &SolverOptions::default(),
                )?;
                let ball = profile.ball(radius);
                let verdict = positivity_propagation(&g, &sol.values, args.p, Some(&ball))?;
                ok &= verdict == PositivityVerdict::StrictlyPositive;
                rows.push(json!({ "radius": radius, "verdict": verdict }));
            }
            passed &= ok;
            report.insert(
                "positivity".into(),
                json!({ "zero_function": zero, "green_functions": rows, "passed": ok }),
            );
        }
        if wants(Suite::Sandwich) {
            let mut rows = Vec::new();
            for radius in 1..=args.radius {
                let r = sandwich_demo(
                    &g,
                    &profile,
                    &params,
                    radius,
                    args.u0,
                    &SolverOptions::default(),
                )?;
                rows.push(r);
            }
            report.insert("sandwich".into(), json!({ "rows": rows, "passed": true }));
        }
    }
    report.insert("passed".into(), json!(passed));
    let value = serde_json::Value::Object(report);
    match &args.out {
        Some(path) => write_json(path, &value)?,
        None => print_json(&value)?,
    }
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn report(args: ReportArgs, mode: ExecMode) -> Result<ExitCode> {
    let g = load_graph(&args.graph)?;
    let params = ExponentParams::new(args.p, args.sigma)?;
    let mut config = ReportConfig::new(params, args.radii);
    config.u0 = args.u0;
    config.seed = args.seed;
    config.mode = mode;
    let bundle = run_report(&g, &config)?;
    bundle.write_to(&args.out)?;
    Ok(if bundle.all_checks_hold {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
