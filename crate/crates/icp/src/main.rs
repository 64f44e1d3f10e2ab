use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use icp::bench::{rows_table, run_benchmark, BenchConfig};
use icp::csv_io::{dataset_table, read_table_file, write_table};
use icp::report::{round12, to_json, AnalysisConfig, AnalysisReport};
use icp::{Error, Result};
use icp_core::hidden::{run_hidden_icp, GridCentering, HiddenConfig};
use icp_core::seed::rng_from_seed;
use icp_core::sem::Fixture;
use icp_core::{run_icp, Dataset};

/// Invariant causal prediction: find the predictors whose relation to a
/// target stays the same across environments.
#[derive(Parser)]
#[command(name = "icp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse a CSV dataset and print a JSON report. Exits with 2 when no
    /// set of predictors is invariant.
    Analyze(AnalyzeArgs),
    /// Run ICP on randomly generated scenarios and report success and error
    /// rates.
    Simulate(SimulateArgs),
    /// Write one of the built-in example datasets as CSV.
    ExportFixture(ExportArgs),
    /// Score externally computed baseline predictions against the runs of a
    /// simulation sweep.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Centering {
    Bracketed,
    Ols,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    csv: PathBuf,
    #[arg(long)]
    target: String,
    /// Column holding the environment of each row.
    #[arg(long, conflicts_with = "split", required_unless_present = "split")]
    env: Option<String>,
    /// Build environments by binning this predictor at `--cutpoints`.
    #[arg(long, requires = "cutpoints")]
    split: Option<String>,
    /// Increasing bin boundaries, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    cutpoints: Option<Vec<f64>>,
    /// Keep the split variable as a predictor.
    #[arg(long, requires = "split")]
    keep_split: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// 1: exact prediction test; 2: residual mean and variance tests.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    method: u8,
    #[arg(long)]
    max_set_size: Option<usize>,
    /// Screen down to this many predictors before the search.
    #[arg(long)]
    preselect: Option<usize>,
    /// Declare the model rejected when the best p-value is below this.
    #[arg(long, default_value_t = 0.0)]
    gof_cutoff: f64,
    /// Number of environments that may be left out per set.
    #[arg(long, default_value_t = 0)]
    robust_v: usize,
    /// Allow hidden confounding (grid search over coefficients).
    #[arg(long)]
    hidden: bool,
    #[arg(long, default_value_t = 11)]
    grid_points: usize,
    /// Grid padding in standard errors.
    #[arg(long, default_value_t = 6.0)]
    grid_c: f64,
    #[arg(long, value_enum, default_value_t = Centering::Bracketed)]
    grid_centering: Centering,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Held-out rows per environment for method 1; 0 uses all rows.
    #[arg(long, default_value_t = 500)]
    subsample_cap: usize,
    #[arg(long)]
    no_early_stop: bool,
    /// Include wall-clock time in the report.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    scenarios: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    reps: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    method: u8,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// 0 removes the cap.
    #[arg(long, default_value_t = 3)]
    max_set_size: usize,
    /// 0 disables screening.
    #[arg(long, default_value_t = 10)]
    preselect: usize,
    #[arg(long, default_value_t = 500)]
    subsample_cap: usize,
    /// One row per scenario and replicate.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Aggregate report; printed to stdout when absent.
    #[arg(long)]
    out_json: Option<PathBuf>,
    /// Parameters and models of every scenario.
    #[arg(long)]
    scenarios_json: Option<PathBuf>,
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ExportArgs {
    /// appendix_a, remark_i, remark_ii or prop5.
    name: String,
    /// Rows per environment.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Per-run CSV written by `simulate --out-csv`.
    #[arg(long)]
    runs: PathBuf,
    /// CSV with columns scenario, rep, method, selected.
    #[arg(long)]
    predictions: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn nonzero(v: usize) -> Option<usize> {
    (v > 0).then_some(v)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Error::io(p.display().to_string(), e)),
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn load(args: &AnalyzeArgs, notes: &mut Vec<String>) -> Result<Dataset> {
    let table = read_table_file(&args.csv)?;
    if let Some(env) = &args.env {
        return Ok(Dataset::from_table(&table, &args.target, env)?);
    }
    let (Some(col), Some(cuts)) = (&args.split, &args.cutpoints) else {
        return Err(Error::Usage("either --env or --split with --cutpoints is required".into()));
    };
    let d = Dataset::from_table_single_env(&table, &args.target)?;
    let out = d.split_by_variable(col, cuts, args.keep_split)?;
    for b in &out.empty_bins {
        notes.push(format!("bin {b} of {col} is empty and was dropped"));
    }
    Ok(out.dataset)
}

fn analyze(args: AnalyzeArgs) -> Result<bool> {
    let start = Instant::now();
    if args.hidden && args.robust_v > 0 {
        return Err(Error::Usage("--hidden cannot be combined with --robust-v".into()));
    }
    let mut notes = Vec::new();
    let d = load(&args, &mut notes)?;
    let config = AnalysisConfig {
        target: args.target.clone(),
        env_col: args.env.clone(),
        split_col: args.split.clone(),
        cutpoints: args.cutpoints.clone(),
        keep_split: args.keep_split,
        alpha: args.alpha,
        method: args.method,
        max_set_size: args.max_set_size,
        preselect: args.preselect,
        gof_cutoff: args.gof_cutoff,
        robust_v: args.robust_v,
        hidden: args.hidden,
        seed: args.seed,
        subsample_cap: nonzero(args.subsample_cap),
        early_stopping: !args.no_early_stop,
    };
    let cfg = config.icp_config();
    let result = if args.hidden {
        let centering = match args.grid_centering {
            Centering::Bracketed => GridCentering::Bracketed,
            Centering::Ols => GridCentering::Ols,
        };
        let hidden = HiddenConfig { c: args.grid_c, points_per_axis: args.grid_points, centering };
        notes.push(format!(
            "hidden mode: intervals are boxes of grid points ({} per axis) and only as fine as the grid",
            args.grid_points
        ));
        run_hidden_icp(&d, &cfg, &hidden)?
    } else {
        run_icp(&d, &cfg)?
    };
    if result.stopped_early && !result.accepted.is_empty() {
        notes.push("search stopped early: the estimate is empty and intervals are unbounded".into());
    }
    if d.num_envs() < 2 {
        notes.push("only one environment: nothing can be rejected".into());
    }
    let mut report = AnalysisReport::new(config, &d, &result, notes);
    if args.timing {
        report.runtime_seconds = Some(round12(start.elapsed().as_secs_f64()));
    }
    write_output(args.out.as_deref(), to_json(&report)?.as_bytes())?;
    Ok(report.model_rejected)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = BenchConfig {
        scenarios: args.scenarios as usize,
        reps: args.reps as usize,
        seed: args.seed,
        method: args.method,
        alpha: args.alpha,
        max_set_size: nonzero(args.max_set_size),
        preselect: nonzero(args.preselect),
        subsample_cap: nonzero(args.subsample_cap),
        timing: args.timing,
    };
    let out = run_benchmark(&cfg)?;
    if let Some(p) = &args.out_csv {
        let mut buf = Vec::new();
        write_table(&rows_table(&out.rows, args.timing), &mut buf)?;
        write_output(Some(p), &buf)?;
    }
    if let Some(p) = &args.scenarios_json {
        write_output(Some(p), to_json(&out.scenarios)?.as_bytes())?;
    }
    write_output(args.out_json.as_deref(), to_json(&out.report)?.as_bytes())
}

fn export(args: ExportArgs) -> Result<()> {
    let fixture = Fixture::from_name(&args.name)?;
    let d = fixture.generate(args.n, &mut rng_from_seed(args.seed))?;
    let mut buf = Vec::new();
    write_table(&dataset_table(&d, "env"), &mut buf)?;
    write_output(args.out.as_deref(), &buf)
}

fn compare(args: CompareArgs) -> Result<()> {
    let report = icp::compare::compare(&read_table_file(&args.runs)?, &read_table_file(&args.predictions)?)?;
    write_output(args.out.as_deref(), to_json(&report)?.as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Analyze(a) => analyze(a).map(|rejected| if rejected { 2 } else { 0 }),
        Command::Simulate(a) => simulate(a).map(|_| 0),
        Command::ExportFixture(a) => export(a).map(|_| 0),
        Command::Compare(a) => compare(a).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
