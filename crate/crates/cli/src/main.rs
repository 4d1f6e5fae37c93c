//! `mvnt` — multivariate normality testing and Monte-Carlo power studies.
//!
//! Exit codes: 0 = completed (a rejected null is data, not an error),
//! 1 = usage or parse error, 2 = I/O failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mvnt::dist::{sample, DistributionSpec, Law, SeedScheme};
use mvnt::hz::hz_normality_test;
use mvnt::kb::{kb_normality_test, KbOptions, NullMode};
use mvnt::{Error as MvntError, KernelSpec, NullParams, Sample, TestOutcome};
use serde_json::json;

use mvnt_cli::config::{load_config, ConfigError};
use mvnt_cli::dataset::{read_dataset, write_dataset, DatasetError};
use mvnt_cli::experiment::run_experiment;
use mvnt_cli::report::{render_text, write_report};

#[derive(Parser)]
#[command(
    name = "mvnt",
    version,
    about = "Multivariate normality tests and power-study harness"
)]
struct Cli {
    /// Size of the worker thread pool (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo power study described by a TOML config file.
    RunExperiment(RunExperimentArgs),
    /// Run a normality test on a delimiter-separated dataset file.
    Test(TestArgs),
    /// Generate a dataset file from a named distribution.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct RunExperimentArgs {
    /// Path to the experiment configuration.
    config: PathBuf,
    /// Override the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the report output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestChoice {
    Kb,
    Hz,
}

#[derive(Clone, Copy, ValueEnum)]
enum NullChoice {
    Gamma,
    Permutation,
}

#[derive(Args)]
struct TestArgs {
    /// Dataset file, one observation per row.
    dataset: PathBuf,
    /// Which normality test to run.
    #[arg(long, value_enum)]
    test: TestChoice,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Fixed kernel bandwidth; the median heuristic is used when absent.
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Null model for the kb test.
    #[arg(long, value_enum, default_value_t = NullChoice::Gamma)]
    null: NullChoice,
    /// Shuffle count for the permutation null.
    #[arg(long, default_value_t = 500)]
    shuffles: usize,
    /// Seed for the permutation null.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    /// Distribution tag, e.g. "NormalStdIso", "ChiSq(1)", "Beta(8,2)".
    #[arg(long)]
    distribution: String,
    /// Number of observations.
    #[arg(long)]
    n: usize,
    /// Dimension.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file path.
    #[arg(long)]
    output: PathBuf,
}

// Failure classes mapped onto exit codes.
enum Failure {
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(io) => Failure::Io(io.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: failed to size the thread pool: {e}");
            return ExitCode::from(1);
        }
    }

    let result = match cli.command {
        Command::RunExperiment(args) => cmd_run_experiment(args),
        Command::Test(args) => cmd_test(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn cmd_run_experiment(args: RunExperimentArgs) -> Result<(), Failure> {
    let mut loaded = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        loaded.experiment.master_seed = seed;
    }
    let output_dir = args
        .output
        .or(loaded.output_dir)
        .unwrap_or_else(|| PathBuf::from("report"));

    let report = run_experiment(&loaded.experiment);
    print!("{}", render_text(&report));
    let (cells, summary) = write_report(&report, &output_dir)
        .map_err(|e| Failure::Io(format!("writing report to {}: {e}", output_dir.display())))?;
    println!("wrote {} and {}", cells.display(), summary.display());
    Ok(())
}

fn cmd_test(args: TestArgs) -> Result<(), Failure> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(Failure::Usage(format!(
            "--alpha must lie in (0, 1), got {}",
            args.alpha
        )));
    }
    if let Some(b) = args.bandwidth {
        if !(b > 0.0) {
            return Err(Failure::Usage(format!(
                "--bandwidth must be positive, got {b}"
            )));
        }
    }
    let data = read_dataset(&args.dataset)?;

    let kernel = match args.bandwidth {
        Some(b) => KernelSpec::fixed(b),
        None => KernelSpec::median_heuristic(),
    };
    let outcome = match args.test {
        TestChoice::Kb => {
            let null = match args.null {
                NullChoice::Gamma => NullMode::Gamma,
                NullChoice::Permutation => NullMode::Permutation {
                    shuffles: args.shuffles,
                    seed: args.seed,
                },
            };
            let opts = KbOptions {
                kernel,
                null,
                shuffle_seed: None,
            };
            kb_normality_test(&data, args.alpha, &opts)
        }
        TestChoice::Hz => hz_normality_test(&data, args.alpha),
    };

    let record = match outcome {
        Ok(o) => render_outcome(&args, &data, &o),
        // precondition failures are a reported verdict, not a crash
        Err(
            e @ (MvntError::InsufficientData(_)
            | MvntError::DegenerateSample(_)
            | MvntError::DegenerateNull(_)
            | MvntError::SingularCovariance(_)),
        ) => json!({
            "dataset": args.dataset.display().to_string(),
            "rows": data.n(),
            "cols": data.d(),
            "test": test_name(args.test),
            "alpha": args.alpha,
            "status": "inapplicable",
            "reason": e.to_string(),
        }),
        Err(e) => return Err(Failure::Usage(e.to_string())),
    };
    println!("{}", serde_json::to_string_pretty(&record).expect("valid json"));
    Ok(())
}

fn test_name(choice: TestChoice) -> &'static str {
    match choice {
        TestChoice::Kb => "kb",
        TestChoice::Hz => "hz",
    }
}

fn render_outcome(args: &TestArgs, data: &Sample, o: &TestOutcome) -> serde_json::Value {
    let null_params = match &o.null {
        NullParams::Gamma(g) => json!({"type": "gamma", "shape": g.shape, "scale": g.scale}),
        NullParams::LogNormal(l) => {
            json!({"type": "lognormal", "log_mean": l.log_mean, "log_sd": l.log_sd})
        }
        NullParams::Permutation { shuffles } => {
            json!({"type": "permutation", "shuffles": shuffles})
        }
    };
    let options = json!({
        "bandwidth": args.bandwidth,
        "null": match args.null {
            NullChoice::Gamma => "gamma",
            NullChoice::Permutation => "permutation",
        },
        "shuffles": args.shuffles,
        "seed": args.seed,
    });
    json!({
        "dataset": args.dataset.display().to_string(),
        "rows": data.n(),
        "cols": data.d(),
        "test": test_name(args.test),
        "alpha": o.alpha,
        "options": options,
        "status": "ok",
        "statistic": o.statistic,
        "threshold": o.threshold,
        "p_value": o.p_value,
        "reject": o.reject,
        "null": null_params,
    })
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let law: Law = args
        .distribution
        .parse()
        .map_err(|e: MvntError| Failure::Usage(e.to_string()))?;
    let spec =
        DistributionSpec::new(law, args.d).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut rng = SeedScheme::new(args.seed).stream(0);
    let data = sample(&spec, args.n, &mut rng).map_err(|e| Failure::Usage(e.to_string()))?;
    write_dataset(&data, &args.output).map_err(|e| {
        Failure::Io(format!("writing {}: {e}", args.output.display()))
    })?;
    println!(
        "wrote {} ({} rows, {} columns, seed {})",
        args.output.display(),
        data.n(),
        data.d(),
        args.seed
    );
    Ok(())
}
