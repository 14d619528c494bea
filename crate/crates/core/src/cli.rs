//! Command-line interface.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::info::excess_tdmi;
use crate::io::{
    load_json_config, parse_series_csv, write_json, write_log_csv, write_report_csv,
    write_report_json, write_series_csv, OutputPaths, ReportDocument, SeriesFile,
};
use crate::scenarios::{measure_log, monkey_reward_rate, run, ScenarioConfig, ScenarioKind};
use crate::tom::{InterpretationMode, PiklInstance};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cimeasure",
    version,
    about = "Excess-TDMI measurement and multi-agent scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the three-agent orchestrator scenario and measure it.
    SimulateTriadic {
        #[arg(long, value_enum)]
        mode: Option<TriadicMode>,
        #[arg(long)]
        delay: Option<usize>,
        #[command(flatten)]
        common: SimArgs,
    },
    /// Run matching pennies against a predictor algorithm and measure it.
    SimulateMp {
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=2))]
        algo: Option<u8>,
        #[command(flatten)]
        common: SimArgs,
    },
    /// Measure excess TDMI of a series CSV.
    Measure {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        taus: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a KL-regularised policy instance.
    PiklDemo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = DemoMode::Diagnostic)]
        mode: DemoMode,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct SimArgs {
    /// JSON scenario config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TriadicMode {
    A,
    B,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DemoMode {
    Diagnostic,
    Coupled,
}

/// Errors before any work starts are usage errors; later ones are runtime.
enum Failure {
    Usage(Error),
    Runtime(Error),
}

fn usage<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Usage)
}

fn runtime<T>(r: Result<T>) -> std::result::Result<T, Failure> {
    r.map_err(Failure::Runtime)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    match command {
        Command::SimulateTriadic {
            mode,
            delay,
            common,
        } => {
            let mut config = usage(base_config(&common))?;
            match mode {
                Some(TriadicMode::A) => config.kind = ScenarioKind::TriadicA,
                Some(TriadicMode::B) => config.kind = ScenarioKind::TriadicB,
                None if config.kind == ScenarioKind::MatchingPennies => {
                    return Err(Failure::Usage(Error::Config(
                        "config describes a matching-pennies run".into(),
                    )))
                }
                None => {}
            }
            if let Some(d) = delay {
                config.delay = d;
            }
            simulate(config, &common.out, out)
        }
        Command::SimulateMp { algo, common } => {
            let mut config = usage(base_config(&common))?;
            config.kind = ScenarioKind::MatchingPennies;
            if let Some(a) = algo {
                config.algorithm = a;
            }
            simulate(config, &common.out, out)
        }
        Command::Measure {
            input,
            taus,
            out: dir,
        } => measure(&input, &taus, &dir, out),
        Command::PiklDemo {
            config,
            mode,
            out: dir,
        } => {
            let instance: PiklInstance = usage(load_json_config(&config))?;
            let mode = match mode {
                DemoMode::Diagnostic => InterpretationMode::Diagnostic,
                DemoMode::Coupled => InterpretationMode::Coupled,
            };
            let solution = usage(instance.solve(mode))?;
            let paths = runtime(OutputPaths::create(&dir))?;
            runtime(write_json(&paths.dir.join("pikl.json"), &solution))?;
            let o = &solution.objective;
            runtime(
                writeln!(
                    out,
                    "mode {:?}\nexpected_reward {:.6}\nanchor_kl {:.6}\ntom_kl {:.6}\ntotal {:.6}",
                    mode, o.expected_reward, o.anchor_kl, o.tom_kl, o.total
                )
                .map_err(Error::from),
            )
        }
    }
}

fn base_config(args: &SimArgs) -> Result<ScenarioConfig> {
    let mut config = match &args.config {
        Some(path) => load_json_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(steps) = args.steps {
        config.steps = steps;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(taus) = &args.taus {
        config.taus = taus.clone();
    }
    Ok(config)
}

fn simulate(
    config: ScenarioConfig,
    dir: &Path,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    usage(config.validate())?;
    let log = runtime(run(&config))?;
    let reports = runtime(measure_log(&log, &config.taus))?;
    let names = log.agent_names();
    let series = SeriesFile {
        names: names.clone(),
        series: runtime(log.state_series())?,
    };
    let doc = runtime(ReportDocument::new(names, reports))?;

    let paths = runtime(OutputPaths::create(dir))?;
    runtime(write_json(&paths.dir.join("config.json"), &config))?;
    runtime(write_log_csv(&paths.log(), &log))?;
    runtime(write_series_csv(&paths.series(), &series))?;
    runtime(write_reports(&paths, &doc))?;

    let mut summary = doc.summary_table();
    if let Some(rate) = monkey_reward_rate(&log) {
        summary.push_str(&format!("monkey reward rate {rate:.6}\n"));
    }
    runtime(write!(out, "{summary}").map_err(Error::from))
}

fn measure(
    input: &Path,
    taus: &[usize],
    dir: &Path,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    if taus.is_empty() || taus.contains(&0) {
        return Err(Failure::Usage(Error::Config(
            "taus must be positive".into(),
        )));
    }
    let file = runtime(parse_series_csv(input))?;
    let reports = runtime(taus.iter().map(|&t| excess_tdmi(&file.series, t)).collect())?;
    let doc = runtime(ReportDocument::new(file.names, reports))?;
    let paths = runtime(OutputPaths::create(dir))?;
    runtime(write_reports(&paths, &doc))?;
    runtime(write!(out, "{}", doc.summary_table()).map_err(Error::from))
}

fn write_reports(paths: &OutputPaths, doc: &ReportDocument) -> Result<()> {
    write_report_csv(&paths.report_csv(), doc)?;
    write_report_json(&paths.report_json(), doc)
}
