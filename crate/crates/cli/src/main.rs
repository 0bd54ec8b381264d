use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use l1inf_core::bench::{self, BenchConfig};
use l1inf_core::oracle::{oracle_prox_bisection, oracle_prox_enumerate};
use l1inf_core::solver::{
    self, accuracy, classify, planted_classification, MultiTaskProblem, SolverConfig, StepRule,
};
use l1inf_core::{project_linf1_with_solution, prox_l1inf, DenseMatrix, InnerProjection, ProxSolution};

mod error;
mod io;
mod meta;

use error::{CliError, CliResult};
use meta::{BoundReport, FitMetadata, FitReport, RunMetadata};

#[derive(Debug, Parser)]
#[command(name = "l1inf", version, about = "Prox of the l1,inf norm, projection onto the linf,1 ball, and related tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Proximal operator of lambda * ||.||_1,inf.
    Prox(ProxArgs),
    /// Euclidean projection onto the linf,1 ball of radius tau.
    Project(ProjectArgs),
    /// Time both inner projection strategies over a grid of sizes and radii.
    Bench(BenchArgs),
    /// Fit a multi-task least-squares classifier under an linf,1 constraint.
    Fit(FitArgs),
    /// Reference solvers, for debugging.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Strategy {
    Sort,
    Michelot,
}

impl From<Strategy> for InnerProjection {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Sort => InnerProjection::Sort,
            Strategy::Michelot => InnerProjection::Michelot,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// Output file; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Metadata JSON file; standard error when omitted.
    #[arg(long)]
    meta: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "michelot")]
    strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Input matrix CSV.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct ProxArgs {
    /// Regularization weight.
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[command(flatten)]
    matrix: MatrixArgs,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Ball radius.
    #[arg(long, allow_hyphen_values = true)]
    tau: f64,
    #[command(flatten)]
    matrix: MatrixArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated ROWSxCOLS sizes.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated radius fractions in (0, 1].
    #[arg(long, allow_hyphen_values = true)]
    alphas: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated strategies.
    #[arg(long)]
    methods: Option<String>,
    /// Start from the full published grid instead of the desk-scale one.
    #[arg(long)]
    paper_grid: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Step {
    Fixed,
    Backtracking,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Data matrix CSV, one sample per row.
    #[arg(long, required_unless_present = "planted", requires = "labels")]
    input: Option<PathBuf>,
    /// Integer class labels, one per line.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Number of classes; defaults to the largest label plus one.
    #[arg(long)]
    classes: Option<usize>,
    /// Generate a planted synthetic dataset instead of reading one.
    #[arg(long, conflicts_with = "input")]
    planted: bool,
    #[arg(long, default_value_t = 200)]
    planted_samples: usize,
    #[arg(long, default_value_t = 50)]
    planted_features: usize,
    #[arg(long, default_value_t = 5)]
    planted_classes: usize,
    /// Ball radius. Defaults to the planted radius with --planted.
    #[arg(long, conflicts_with = "tau_grid", allow_hyphen_values = true)]
    tau: Option<f64>,
    /// Comma-separated radii; the most accurate fit is written out.
    #[arg(long, allow_hyphen_values = true)]
    tau_grid: Option<String>,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    grad_tol: f64,
    #[arg(long, value_enum, default_value = "fixed")]
    step: Step,
    /// A feature is reported as selected when its largest weight is at least
    /// this fraction of the largest weight overall.
    #[arg(long, default_value_t = 1e-6)]
    support_tol: f64,
    /// Center and scale every feature before fitting.
    #[arg(long)]
    standardize: bool,
    /// Feature ranking output, one index per line.
    #[arg(long)]
    ranking: Option<PathBuf>,
    /// Predicted labels output, one per line.
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OracleMethod {
    Bisection,
    Enumerate,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, value_enum, default_value = "bisection")]
    method: OracleMethod,
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prox(args) => cmd_matrix(args.matrix, args.lambda, false),
        Command::Project(args) => cmd_matrix(args.matrix, args.tau, true),
        Command::Bench(args) => cmd_bench(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Oracle(args) => cmd_oracle(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn check_positive(name: &str, value: f64) -> CliResult<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("{name} must be finite and positive, got {value}")))
    }
}

fn cmd_matrix(args: MatrixArgs, radius: f64, project: bool) -> CliResult<()> {
    let name = if project { "tau" } else { "lambda" };
    check_positive(name, radius)?;
    let v = io::read_matrix(&args.input)?;
    let strategy = InnerProjection::from(args.common.strategy);

    let start = Instant::now();
    let (out, solution): (DenseMatrix, ProxSolution) = if project {
        let p = project_linf1_with_solution(&v, radius, strategy)?;
        (p.projected, p.solution)
    } else {
        let s = prox_l1inf(&v, radius, strategy)?;
        (s.x_star.clone(), s)
    };
    let elapsed = start.elapsed().as_secs_f64();

    io::write_matrix(args.common.output.as_deref(), &out)?;
    let meta = RunMetadata {
        command: meta::command_line(),
        subcommand: if project { "project" } else { "prox" },
        strategy: strategy.as_str(),
        lambda: (!project).then_some(radius),
        tau: project.then_some(radius),
        t_star: solution.t_star,
        iterations: solution.iterations,
        lower_bound_used: BoundReport {
            value: solution.initial_bound.value,
            provenance: solution.initial_bound.provenance.as_str(),
        },
        active_columns: solution.active_cols,
        rows: v.rows(),
        cols: v.cols(),
        elapsed_seconds: elapsed,
    };
    meta::emit(args.common.meta.as_deref(), &meta)
}

fn parse_list<T, F>(flag: &str, text: &str, parse: F) -> CliResult<Vec<T>>
where
    F: Fn(&str) -> Option<T>,
{
    let items: Option<Vec<T>> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(&parse)
        .collect();
    match items {
        Some(v) if !v.is_empty() => Ok(v),
        _ => Err(CliError::Invalid(format!("cannot parse --{flag} '{text}'"))),
    }
}

fn parse_size(s: &str) -> Option<(usize, usize)> {
    let (n, m) = s.split_once(['x', 'X'])?;
    Some((n.trim().parse().ok()?, m.trim().parse().ok()?))
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let mut config = if args.paper_grid {
        BenchConfig::paper_grid()
    } else {
        BenchConfig::desk()
    };
    config.seed = args.common.seed;
    if let Some(s) = &args.sizes {
        config.sizes = parse_list("sizes", s, parse_size)?;
    }
    if let Some(s) = &args.alphas {
        config.alphas = parse_list("alphas", s, |a| a.parse().ok())?;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = &args.methods {
        config.methods = parse_list("methods", s, |m| m.parse().ok())?;
    }
    config.validate()?;

    let records = bench::run_benchmark(&config)?;
    io::with_output(args.common.output.as_deref(), |w| bench::write_csv(&records, w))?;
    let table = bench::summary_table(&records);
    if args.common.output.is_some() {
        print!("{table}");
    } else {
        eprint!("{table}");
    }
    Ok(())
}

struct Dataset {
    x: DenseMatrix,
    labels: Vec<usize>,
    classes: usize,
    default_tau: Option<f64>,
    planted_support: Option<Vec<usize>>,
}

fn load_dataset(args: &FitArgs) -> CliResult<Dataset> {
    if args.planted {
        let planted = planted_classification(
            args.common.seed,
            args.planted_samples,
            args.planted_features,
            args.planted_classes,
        )?;
        return Ok(Dataset {
            x: planted.problem.x,
            labels: planted.labels,
            classes: args.planted_classes,
            default_tau: Some(planted.problem.tau),
            planted_support: Some(planted.support),
        });
    }
    let input = args.input.as_deref().expect("clap requires --input without --planted");
    let label_path = args.labels.as_deref().expect("clap requires --labels with --input");
    let x = io::read_matrix(input)?;
    let labels = io::read_labels(label_path)?;
    if labels.len() != x.rows() {
        return Err(label_error(
            label_path,
            labels.len() as u64 + 1,
            format!("{} labels for {} data rows", labels.len(), x.rows()),
        ));
    }
    let observed = labels.iter().max().map_or(1, |&l| l + 1);
    let classes = args.classes.unwrap_or(observed);
    if let Some(pos) = labels.iter().position(|&l| l >= classes) {
        return Err(label_error(
            label_path,
            pos as u64 + 1,
            format!("label {} out of range for {classes} classes", labels[pos]),
        ));
    }
    Ok(Dataset {
        x,
        labels,
        classes,
        default_tau: None,
        planted_support: None,
    })
}

fn label_error(path: &Path, line: u64, message: String) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        column: 1,
        message,
    }
}

fn cmd_fit(args: FitArgs) -> CliResult<()> {
    if args.max_iters == 0 {
        return Err(CliError::Invalid("--max-iters must be at least 1".into()));
    }
    check_positive("grad-tol", args.grad_tol)?;
    if !(0.0..=1.0).contains(&args.support_tol) {
        return Err(CliError::Invalid(format!(
            "--support-tol must lie in [0, 1], got {}",
            args.support_tol
        )));
    }
    if let Some(c) = args.classes {
        if c == 0 {
            return Err(CliError::Invalid("--classes must be at least 1".into()));
        }
    }
    let taus_flag = match (&args.tau, &args.tau_grid) {
        (Some(t), _) => Some(vec![*t]),
        (None, Some(grid)) => Some(parse_list("tau-grid", grid, |t| t.parse().ok())?),
        (None, None) => None,
    };
    if let Some(taus) = &taus_flag {
        for &t in taus {
            check_positive("tau", t)?;
        }
    }

    let start = Instant::now();
    let data = load_dataset(&args)?;
    let taus = match (taus_flag, data.default_tau) {
        (Some(t), _) => t,
        (None, Some(t)) => vec![t],
        (None, None) => return Err(CliError::Invalid("one of --tau or --tau-grid is required".into())),
    };
    let x = if args.standardize {
        solver::standardize(&data.x).0
    } else {
        data.x
    };

    let config = SolverConfig {
        max_iters: args.max_iters,
        step_rule: match args.step {
            Step::Fixed => StepRule::FixedInverseLipschitz,
            Step::Backtracking => StepRule::Backtracking,
        },
        grad_tol: args.grad_tol,
        history: false,
        strategy: args.common.strategy.into(),
    };

    let mut reports = Vec::with_capacity(taus.len());
    let mut best: Option<(usize, solver::FitResult, Vec<usize>)> = None;
    for (i, &tau) in taus.iter().enumerate() {
        let fit_start = Instant::now();
        let problem = MultiTaskProblem::from_labels(x.clone(), &data.labels, data.classes, tau)?;
        let fit = solver::pgd_fit(&problem, &config)?;
        let predicted = classify(&x, &fit.w)?;
        let acc = accuracy(&predicted, &data.labels);
        let support = selected_features(&fit.w, args.support_tol);
        eprintln!(
            "tau={tau:.6e} iterations={} converged={} accuracy={acc:.4}",
            fit.iterations, fit.converged
        );
        reports.push(FitReport {
            tau,
            iterations: fit.iterations,
            converged: fit.converged,
            objective: fit.objective,
            gradient_mapping: fit.gradient_mapping,
            training_accuracy: acc,
            support,
            elapsed_seconds: fit_start.elapsed().as_secs_f64(),
        });
        if best.as_ref().is_none_or(|(b, _, _)| acc > reports[*b].training_accuracy) {
            best = Some((i, fit, predicted));
        }
    }
    let (selected, fit, predicted) = best.expect("at least one tau");

    io::write_matrix(args.common.output.as_deref(), &fit.w)?;
    if let Some(p) = &args.ranking {
        io::write_lines(Some(p), &fit.feature_ranking)?;
    }
    if let Some(p) = &args.predictions {
        io::write_lines(Some(p), &predicted)?;
    }
    let meta = FitMetadata {
        command: meta::command_line(),
        subcommand: "fit",
        strategy: config.strategy.as_str(),
        standardize: args.standardize,
        support_tol: args.support_tol,
        samples: x.rows(),
        features: x.cols(),
        classes: data.classes,
        fits: reports,
        selected,
        planted_support: data.planted_support,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    meta::emit(args.common.meta.as_deref(), &meta)
}

fn selected_features(w: &DenseMatrix, tol: f64) -> Vec<usize> {
    let peaks: Vec<f64> = (0..w.cols())
        .map(|c| w.column(c).iter().fold(0.0_f64, |a, v| a.max(v.abs())))
        .collect();
    let top = peaks.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Vec::new();
    }
    (0..peaks.len()).filter(|&c| peaks[c] >= tol * top).collect()
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    check_positive("lambda", args.lambda)?;
    let v = io::read_matrix(&args.input)?;
    let result = match args.method {
        OracleMethod::Bisection => oracle_prox_bisection(&v, args.lambda, args.tol)?,
        OracleMethod::Enumerate => oracle_prox_enumerate(&v, args.lambda)?,
    };
    io::write_matrix(args.output.as_deref(), &result.x_star)?;
    eprintln!("t_star={:.16e} residual={:.3e}", result.t_star, result.residual);
    Ok(())
}
