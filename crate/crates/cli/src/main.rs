use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rmwalk_cli::config::{Command, ExperimentConfig, SeedRange};
use rmwalk_cli::resources::peak_rss_kb;
use rmwalk_cli::{run, CliError};
use rmwalk_core::analysis::DriftKind;
use rmwalk_core::Model;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DriftArg {
    Zero,
    PlusExtremal,
    MinusExtremal,
}

/// Integer flag that also accepts exact scientific forms such as `1e7`.
fn count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("'{s}' is not a count"))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 1.8e19 {
        Ok(f as u64)
    } else {
        Err(format!("'{s}' is not a nonnegative integer"))
    }
}

/// Simulate random multiplicative walks and check the series numerics behind them.
///
/// Flags override values read from --config. CSV goes to --out, the JSON run
/// summary to --summary (stdout when absent).
#[derive(Debug, Parser)]
#[command(name = "rmwalk", version)]
struct Cli {
    command: Command,
    /// JSON config with flat keys named like the flags (underscores for dashes).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<ModelArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Inclusive range `a..b`.
    #[arg(long)]
    seeds: Option<SeedRange>,
    /// Walk length N.
    #[arg(long, value_parser = count)]
    n: Option<u64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long, value_parser = count)]
    p_max: Option<u64>,
    /// Dirichlet-series length for `expansion`.
    #[arg(long, value_parser = count)]
    n_max: Option<u64>,
    #[arg(long)]
    m_max: Option<u32>,
    /// Number of σ_k = 1/2 + 2^-k steps in the scans.
    #[arg(long)]
    k_max: Option<u32>,
    /// Upper limit of the scan truncation schedule.
    #[arg(long, value_parser = count)]
    p_cap: Option<u64>,
    #[arg(long)]
    drift: Option<DriftArg>,
    /// Integrate λ + M without the absolute value.
    #[arg(long)]
    signed: bool,
    /// Integral checkpoints.
    #[arg(long, value_delimiter = ',', value_parser = count)]
    x: Vec<u64>,
    /// Visit targets.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    targets: Vec<i64>,
    /// Tail levels as multiples of √V.
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Suppress timestamps and timings so reruns are byte-identical.
    #[arg(long)]
    deterministic: bool,
    /// Print elapsed time and peak resident memory to stderr.
    #[arg(long)]
    report_resources: bool,
}

impl Cli {
    fn into_config(self) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        c.command = self.command;
        if let Some(m) = self.model {
            c.model = Some(match m {
                ModelArg::OneD => Model::Rademacher1D,
                ModelArg::TwoD => Model::Quarternary2D,
            });
        }
        if self.seed.is_some() || self.seeds.is_some() {
            c.seed = self.seed;
            c.seeds = self.seeds;
        }
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    c.$field = v;
                }
            )*};
        }
        macro_rules! set_opt {
            ($($field:ident),*) => {$(
                if self.$field.is_some() {
                    c.$field = self.$field;
                }
            )*};
        }
        set!(n, m_max, p_cap);
        set_opt!(sigma, t, p_max, n_max, k_max, out, summary, workers);
        if let Some(d) = self.drift {
            c.drift = match d {
                DriftArg::Zero => DriftKind::Zero,
                DriftArg::PlusExtremal => DriftKind::PlusExtremal,
                DriftArg::MinusExtremal => DriftKind::MinusExtremal,
            };
        }
        c.signed |= self.signed;
        c.deterministic |= self.deterministic;
        c.report_resources |= self.report_resources;
        if !self.x.is_empty() {
            c.x = self.x;
        }
        if !self.targets.is_empty() {
            c.targets = self.targets;
        }
        if !self.lambdas.is_empty() {
            c.lambdas = self.lambdas;
        }
        Ok(c)
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = cli.into_config().and_then(|config| {
        let output = run(&config)?;
        if config.summary.is_none() {
            println!("{}", output.summary.to_json());
        }
        Ok(config.report_resources)
    });
    match result {
        Ok(report) => {
            if report {
                eprintln!("elapsed_seconds={:.3}", start.elapsed().as_secs_f64());
                eprintln!(
                    "peak_rss_kb={}",
                    peak_rss_kb().map_or_else(|| "unknown".to_owned(), |v| v.to_string())
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rmwalk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
