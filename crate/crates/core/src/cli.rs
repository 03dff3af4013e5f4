//! `clockspec` command-line front end.
//!
//! Exit codes: 0 success with every gate passed, 1 gate failure (reports are
//! still written), 2 configuration or usage error, 3 numeric failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::potential::PotentialModel;
use crate::stats::{
    run_experiment, ExperimentConfig, ExperimentKind, ExperimentParams, ExperimentReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_GATE_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Output directory used when neither `--out` nor the config sets one.
pub const OUT_ENV: &str = "CLOCKSPEC_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "clockspec",
    version,
    about = "Eigenvalue statistics of decaying random Schrödinger operators"
)]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
    /// JSON document with sections `model`, `experiment`, `run`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the logical CPU count.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Rescaled eigenvalue gaps along the n ladder.
    Clock,
    /// Relative phase `Θ(c) - c` along the n ladder.
    Theta,
    /// Log-log slope of the `J` increment second moment.
    Holder,
    /// Dyadic-block second moments of `R` and `J`.
    Moments,
    /// Laplace functional of the eigenvalue process vs the clock prediction.
    Laplace,
    /// Eigenvalue window of one realization.
    Spectrum,
    /// Per-cell Prüfer trajectory of one realization.
    PhaseDump,
    /// Correlation curve and decay-rate fit of the amplitude process.
    Corr,
    /// Symbolic-dynamics checks.
    DynsysCheck,
}

impl From<Command> for ExperimentKind {
    fn from(c: Command) -> Self {
        match c {
            Command::Clock => ExperimentKind::Clock,
            Command::Theta => ExperimentKind::Theta,
            Command::Holder => ExperimentKind::Holder,
            Command::Moments => ExperimentKind::Moments,
            Command::Laplace => ExperimentKind::Laplace,
            Command::Spectrum => ExperimentKind::Spectrum,
            Command::PhaseDump => ExperimentKind::PhaseDump,
            Command::Corr => ExperimentKind::Corr,
            Command::DynsysCheck => ExperimentKind::DynsysCheck,
        }
    }
}

/// The JSON config document.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default = "PotentialModel::free")]
    pub model: PotentialModel,
    #[serde(default)]
    pub experiment: ExperimentParams,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        Self {
            model: PotentialModel::free(),
            experiment: ExperimentParams::default(),
            run: RunSection::default(),
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }
}

/// Everything needed to run one subcommand, after merging flags, config and
/// environment.
#[derive(Clone, Debug)]
pub struct Invocation {
    pub kind: ExperimentKind,
    pub experiment: ExperimentConfig,
    pub workers: usize,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Invocation {
    pub fn resolve(cli: &CliConfig) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let seed = cli.seed.or(file.run.seed).unwrap_or(0);
        let workers = match cli.workers.or(file.run.workers) {
            Some(0) => return Err(Error::config("workers must be at least 1")),
            Some(w) => w,
            None => std::thread::available_parallelism().map_or(1, usize::from),
        };
        let out = cli
            .out
            .clone()
            .or(file.run.out)
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."));
        let experiment = ExperimentConfig::new(file.model, file.experiment, seed);
        experiment.validate()?;
        Ok(Self {
            kind: cli.command.into(),
            experiment,
            workers,
            out,
            quiet: cli.quiet,
        })
    }

    /// Runs the experiment on a dedicated pool and writes the report.
    pub fn execute(&self) -> Result<(ExperimentReport, PathBuf, PathBuf)> {
        fs::create_dir_all(&self.out)
            .map_err(|e| Error::config(format!("output directory {}: {e}", self.out.display())))?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::config(format!("worker pool: {e}")))?;
        let report = pool.install(|| run_experiment(self.kind, &self.experiment))?;
        let (json, csv) = report
            .write(&self.out)
            .map_err(|e| Error::config(format!("cannot write to {}: {e}", self.out.display())))?;
        Ok((report, json, csv))
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_CONFIG
    }
}

fn print_summary(report: &ExperimentReport, json: &Path, csv: &Path) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{} seed={} hash={}",
        report.experiment, report.seed, report.config_hash
    );
    for fit in &report.fits {
        let _ = writeln!(
            out,
            "  fit {} = {:.6} ± {:.6}",
            fit.name, fit.value, fit.stderr
        );
    }
    for gate in &report.gates {
        let verdict = if gate.passed { "pass" } else { "FAIL" };
        let _ = writeln!(
            out,
            "  {verdict} {}: {:.6e} {} {:.6e}",
            gate.name,
            gate.value,
            gate.comparison.symbol(),
            gate.threshold
        );
    }
    let _ = writeln!(out, "  wrote {} and {}", json.display(), csv.display());
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match CliConfig::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let invocation = match Invocation::resolve(&cli) {
        Ok(inv) => inv,
        Err(e) => {
            eprintln!("clockspec: {e}");
            return EXIT_CONFIG;
        }
    };
    match invocation.execute() {
        Ok((report, json, csv)) => {
            if !invocation.quiet {
                print_summary(&report, &json, &csv);
            }
            if report.passed {
                EXIT_OK
            } else {
                EXIT_GATE_FAILED
            }
        }
        Err(e) => {
            eprintln!("clockspec: {e}");
            exit_code(&e)
        }
    }
}
