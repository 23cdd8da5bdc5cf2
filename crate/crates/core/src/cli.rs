//! The `gapbench` command line: problem manifests, benchmark runs, rate
//! tables, single-problem spectra and plots.

use std::f64::consts::FRAC_PI_2;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{GapError, Result};
use crate::experiment::{
    generate_manifest, manifest_csv, read_results, run_experiment, split_methods, ExperimentConfig, MANIFEST_FILE,
};
use crate::operators::{build_dense_operator, preset, Preset};
use crate::rates::{log_grid, rates_csv, rates_plot, rates_table, scatter_plot};
use crate::spectral::{
    classify_convergence, dense_eigenvalues, predict_eigenvalues, spectrum_distance, subdominant_magnitude,
    PairDims, DEFAULT_UNIT_TOL,
};

#[derive(Debug, Parser)]
#[command(name = "gapbench", version, about = "Generalized alternating projections benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate problems and write their manifest.
    Gen(SweepArgs),
    /// Run every method on every problem and write results.
    Run(SweepArgs),
    /// Tabulate closed-form rates and predicted iteration counts.
    Rates(RatesArgs),
    /// Compare predicted and computed spectra for one problem.
    Spectrum(SpectrumArgs),
    /// Render a results file as a log-log scatter plot.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iters")]
    max_iters: Option<usize>,
    /// Comma-separated `n_rows_A` values.
    #[arg(long, value_delimiter = ',')]
    categories: Option<Vec<usize>>,
    #[arg(long = "per-category")]
    per_category: Option<usize>,
    /// Comma-separated method names.
    #[arg(long)]
    methods: Option<String>,
}

#[derive(Debug, Args)]
struct RatesArgs {
    /// Comma-separated Friedrichs angles in radians.
    #[arg(long = "theta-f", value_delimiter = ',')]
    theta_f: Option<Vec<f64>>,
    /// Largest principal angle; enables PRAP.
    #[arg(long = "theta-p")]
    theta_p: Option<f64>,
    /// Number of log-spaced angles on [1e-3, pi/2] when no angle is given.
    #[arg(long, default_value_t = 40)]
    points: usize,
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for rates.csv and rates.svg; prints CSV when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    /// `n_rows_A` of the problem.
    #[arg(long, default_value_t = 99)]
    category: usize,
    /// Problem index within the category.
    #[arg(long, default_value_t = 0)]
    index: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "GAP_STAR")]
    method: String,
    /// Also print every predicted eigenvalue.
    #[arg(long)]
    all: bool,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Results file written by `run`.
    #[arg(long)]
    input: PathBuf,
    /// SVG path; defaults to `iterations.svg` next to the input.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

/// Failure classes with distinct exit codes.
enum Failure {
    Usage(String),
    Runtime(GapError),
}

impl From<GapError> for Failure {
    fn from(e: GapError) -> Self {
        Failure::Runtime(e)
    }
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 2 for usage and configuration errors, 1 for runtime failures.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run `gapbench --help` for usage");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Run(args) => run(args),
        Command::Rates(args) => rates(args),
        Command::Spectrum(args) => spectrum(args),
        Command::Plot(args) => plot(args),
    }
}

fn sweep_config(args: &SweepArgs) -> std::result::Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(jobs) = args.jobs {
        cfg.jobs = jobs;
    }
    if let Some(tol) = args.tol {
        cfg.stopping.tolerance = tol;
    }
    if let Some(m) = args.max_iters {
        cfg.stopping.max_iterations = m;
    }
    if let Some(c) = &args.categories {
        cfg.categories = c.clone();
    }
    if let Some(n) = args.per_category {
        cfg.problems_per_category = n;
    }
    if let Some(m) = &args.methods {
        cfg.methods = split_methods(m)
            .into_iter()
            .map(str::parse)
            .collect::<Result<_>>()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    cfg.stopping = crate::solvers::StoppingRule::new(cfg.stopping.tolerance, cfg.stopping.max_iterations)
        .map_err(|e| Failure::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn write_out(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn gen(args: SweepArgs) -> std::result::Result<(), Failure> {
    let cfg = sweep_config(&args)?;
    let entries = generate_manifest(&cfg)?;
    let path = cfg.output_dir.join(MANIFEST_FILE);
    write_out(&path, &manifest_csv(&entries))?;
    println!("wrote {} problems to {}", entries.len(), path.display());
    Ok(())
}

fn run(args: SweepArgs) -> std::result::Result<(), Failure> {
    let cfg = sweep_config(&args)?;
    let out = run_experiment(&cfg)?;
    let unconverged = out.records.iter().filter(|r| !r.converged()).count();
    println!(
        "wrote {} runs to {} ({} hit the iteration limit)",
        out.records.len(),
        out.results.display(),
        unconverged
    );
    Ok(())
}

fn rates(args: RatesArgs) -> std::result::Result<(), Failure> {
    let grid = match &args.theta_f {
        Some(g) => g.clone(),
        None => log_grid(1e-3, FRAC_PI_2, args.points).map_err(|e| Failure::Usage(e.to_string()))?,
    };
    if let Some(t) = grid.iter().find(|t| !(**t > 0.0 && **t <= FRAC_PI_2)) {
        return Err(Failure::Usage(format!("theta-f {t} outside (0, pi/2]")));
    }
    let tol = args.tol.unwrap_or(1e-8);
    let methods = crate::rates::default_rate_methods(args.theta_p.is_some());
    let rows = if args.tol.is_some() {
        crate::rates::rates_table_with(&grid, args.theta_p, &methods, tol)
    } else {
        rates_table(&grid, args.theta_p)
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let csv = rates_csv(&rows);
    match &args.out {
        Some(dir) => {
            write_out(&dir.join("rates.csv"), &csv)?;
            write_out(&dir.join("rates.svg"), &rates_plot(&rows).to_svg())?;
            println!("wrote {}", dir.join("rates.csv").display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn spectrum(args: SpectrumArgs) -> std::result::Result<(), Failure> {
    let method: Preset = args.method.parse().map_err(|e: GapError| Failure::Usage(e.to_string()))?;
    if method.is_adaptive() {
        return Err(Failure::Usage("the adaptive method has no fixed spectrum".into()));
    }
    let cfg = ExperimentConfig {
        categories: vec![args.category],
        base_seed: args.seed,
        ..Default::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let problem = cfg.generate(args.category, args.index)?;
    let params = preset(method, Some(problem.theta_f), Some(problem.theta_p))?;
    let (u, v) = (problem.u(), problem.v());
    let dims = PairDims::new(u.dim(), v.dim(), u.ambient_dim());
    let predicted = predict_eigenvalues(&params, &problem.angles, dims)?;
    let dense = build_dense_operator(&params, u, v)?;
    let oracle_gamma = subdominant_magnitude(&dense, DEFAULT_UNIT_TOL)?;
    let distance = spectrum_distance(&predicted.expanded(), &dense_eigenvalues(&dense)?)?;
    let report = classify_convergence(&dense, DEFAULT_UNIT_TOL)?;
    println!("problem {} seed {}", problem.id, problem.seed);
    println!("dim U {} dim V {} dim U∩V {}", u.dim(), v.dim(), problem.angles.intersection_dim());
    println!("theta_f {:?} theta_p {:?}", problem.theta_f, problem.theta_p);
    println!(
        "method {} alpha {:?} alpha1 {:?} alpha2 {:?} ({:?})",
        method,
        params.alpha,
        params.alpha1,
        params.alpha2,
        params.classify()
    );
    println!("predicted gamma {:?}", predicted.gamma);
    println!("computed gamma  {:?}", oracle_gamma);
    println!("gamma difference {:e}", (predicted.gamma - oracle_gamma).abs());
    println!("max eigenvalue distance {distance:e}");
    println!("classification {:?}", report.verdict);
    if args.all {
        for (lambda, mult) in &predicted.eigenvalues {
            println!("{:?} {:?} x{mult}", lambda.re, lambda.im);
        }
    }
    Ok(())
}

fn plot(args: PlotArgs) -> std::result::Result<(), Failure> {
    let records = read_results(&args.input)?;
    let out = args.out.unwrap_or_else(|| {
        args.input
            .parent()
            .map(|d| d.join("iterations.svg"))
            .unwrap_or_else(|| PathBuf::from("iterations.svg"))
    });
    write_out(&out, &scatter_plot(&records, args.tol).to_svg())?;
    println!("wrote {}", out.display());
    Ok(())
}
