use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tclsim_core::metrics::{MetricsConfig, MetricsReport};
use tclsim_core::output::{
    sample_tcls, write_bids_sample_csv, write_metrics_csv, write_steps_csv, write_trace_csv,
};
use tclsim_core::{scenarios, Error, Scenario};

/// Loads sampled into bids_sample.csv.
const BID_SAMPLE: usize = 20;

#[derive(Parser)]
#[command(
    name = "tclsim",
    version,
    about = "Market-coordinated air-conditioner population simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its outputs.
    Run(RunArgs),
    /// Check a scenario file without running it.
    Validate {
        /// Scenario file (TOML).
        file: PathBuf,
    },
    /// List the built-in scenarios.
    List,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Built-in scenario name or path to a TOML scenario file.
    #[arg(long)]
    scenario: String,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory. Defaults to <TCLSIM_OUT>/<scenario name>.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Default output root when --out is not given.
    #[arg(long, env = "TCLSIM_OUT", default_value = "out", hide = true)]
    out_root: PathBuf,
    /// Keep every n-th physics step in steps.csv.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    decimate: u64,
    /// Files to write besides scenario.json.
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["trace", "metrics", "bids"])]
    emit: Vec<Emit>,
    /// Validate and echo the resolved scenario, then stop.
    #[arg(long)]
    validate_only: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Trace,
    Metrics,
    Bids,
    Steps,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(args) => run(args).map(|()| ExitCode::SUCCESS),
        Command::Validate { file } => {
            let scenario = read_scenario_file(&file)?;
            Ok(report_validation(&scenario))
        }
        Command::List => {
            for s in scenarios::all() {
                println!(
                    "{:<18} {} TCLs, {} min, ambient {} C",
                    s.name, s.population.count, s.horizon_min, s.population.ambient
                );
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_scenario_file(path: &Path) -> Result<Scenario> {
    if !path.is_file() {
        bail!("scenario file not found: {}", path.display());
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
}

fn resolve_scenario(spec: &str) -> Result<Scenario> {
    match scenarios::builtin(spec) {
        Some(s) => Ok(s),
        None => read_scenario_file(Path::new(spec)).with_context(|| {
            format!(
                "'{spec}' is neither a built-in scenario ({}) nor a readable file",
                scenarios::BUILTIN_NAMES.join(", ")
            )
        }),
    }
}

fn report_validation(scenario: &Scenario) -> ExitCode {
    let violations = scenario.violations();
    if violations.is_empty() {
        println!("OK");
        print!("{}", scenario.to_toml());
        ExitCode::SUCCESS
    } else {
        for v in &violations {
            println!("{}: {}", v.field, v.message);
        }
        println!("{} violation(s)", violations.len());
        ExitCode::FAILURE
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn run(args: RunArgs) -> Result<()> {
    let mut scenario = resolve_scenario(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if args.validate_only {
        if report_validation(&scenario) == ExitCode::SUCCESS {
            return Ok(());
        }
        bail!("scenario '{}' is invalid", scenario.name);
    }
    if let Err(Error::Invalid(violations)) = scenario.validate() {
        for v in &violations {
            eprintln!("{}: {}", v.field, v.message);
        }
        bail!(
            "scenario '{}' has {} violation(s)",
            scenario.name,
            violations.len()
        );
    }

    let dir = args
        .out
        .unwrap_or_else(|| args.out_root.join(&scenario.name));
    fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;

    let started = Instant::now();
    let trace = tclsim_core::run(&scenario)?;
    let elapsed = started.elapsed();
    let report = MetricsReport::compute(&trace, &MetricsConfig::default());

    serde_json::to_writer_pretty(create(&dir, "scenario.json")?, &scenario)?;
    let mut written = vec!["scenario.json"];
    if args.emit.contains(&Emit::Trace) {
        write_trace_csv(&trace, create(&dir, "trace.csv")?)?;
        written.push("trace.csv");
    }
    if args.emit.contains(&Emit::Metrics) {
        write_metrics_csv(&report, create(&dir, "metrics.csv")?)?;
        written.push("metrics.csv");
    }
    if args.emit.contains(&Emit::Bids) {
        let ids = sample_tcls(trace.params.len(), BID_SAMPLE, scenario.seed);
        write_bids_sample_csv(&trace, &ids, create(&dir, "bids_sample.csv")?)?;
        written.push("bids_sample.csv");
    }
    if args.emit.contains(&Emit::Steps) {
        write_steps_csv(&trace, args.decimate as usize, create(&dir, "steps.csv")?)?;
        written.push("steps.csv");
    }

    let peak = trace
        .intervals
        .iter()
        .map(|r| r.avg_demand)
        .fold(0.0, f64::max);
    println!("scenario        {} (seed {})", scenario.name, scenario.seed);
    println!(
        "population      {} TCLs, capacity {:.0} kW",
        trace.params.len(),
        trace.capacity
    );
    println!("feeder limit    {:.0} kW", trace.feeder_limit);
    println!(
        "horizon         {} min, {} intervals, {} steps ({:.2} s)",
        scenario.horizon_min,
        trace.intervals.len(),
        trace.steps.len(),
        elapsed.as_secs_f64()
    );
    println!(
        "feeder hits     {} of {} intervals",
        report.feeder_hits,
        trace.intervals.len()
    );
    println!("peak demand     {peak:.0} kW (5-min average)");
    println!("max sync index  {:.3}", report.max_sync_index);
    println!(
        "max peak-peak   {:.0} kW over {} min windows",
        report.max_peak_to_peak,
        MetricsConfig::default().window_intervals as f64 * trace.interval_min()
    );
    println!(
        "wrote           {} in {}",
        written.join(", "),
        dir.display()
    );
    Ok(())
}
