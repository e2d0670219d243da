//! Experiment configuration: a flat JSON object whose keys mirror the CLI
//! flags. Command-line values override file values; [`ExperimentConfig::resolve`]
//! fills per-command defaults and validates every field before any work starts.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::ValueEnum;
use rmwalk_core::analysis::DriftKind;
use rmwalk_core::sieve::MAX_SIEVE_LIMIT;
use rmwalk_core::Model;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{usage, CliError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Stream one walk; optional `n,M` CSV.
    Walk,
    /// Sign-change summary over a seed ensemble.
    Signs,
    /// Visit counts of small targets.
    Recurrence,
    /// Weighted integral `∫ u^{-3/2} |λ + M|` at checkpoints.
    Integral,
    /// Normalized prime sums against the standard normal.
    Clt,
    /// Tail frequencies of prime sums against the Hoeffding bound.
    Hoeffding,
    /// `S/√V` along `σ_k → 1/2`.
    Blowup,
    /// `F(σ_k)` along `σ_k → 1/2`.
    Fscan,
    /// Prime-power expansion of `log F` against the Euler product.
    Expansion,
    /// SVG of a 1D walk with the `±√x` envelope.
    Figure1,
    /// SVG of the lattice points visited by a 2D walk.
    Figure2,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Walk => "walk",
            Command::Signs => "signs",
            Command::Recurrence => "recurrence",
            Command::Integral => "integral",
            Command::Clt => "clt",
            Command::Hoeffding => "hoeffding",
            Command::Blowup => "blowup",
            Command::Fscan => "fscan",
            Command::Expansion => "expansion",
            Command::Figure1 => "figure1",
            Command::Figure2 => "figure2",
        }
    }

    fn single_seed(self) -> bool {
        matches!(self, Command::Walk | Command::Figure1 | Command::Figure2)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inclusive seed range written `a..b`; a bare integer is a range of one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

impl SeedRange {
    pub fn single(seed: u64) -> Self {
        Self { start: seed, end: seed }
    }

    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn seeds(&self) -> Vec<u64> {
        (self.start..=self.end).collect()
    }
}

impl fmt::Display for SeedRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad seed '{t}': {e}"))
        };
        let range = match s.split_once("..") {
            Some((a, b)) => Self {
                start: parse(a)?,
                end: parse(b.strip_prefix('=').unwrap_or(b))?,
            },
            None => Self::single(parse(s)?),
        };
        if range.start > range.end {
            return Err(format!("seed range '{s}' is empty"));
        }
        Ok(range)
    }
}

impl Serialize for SeedRange {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SeedRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every experiment parameter. Unset optional fields take per-command defaults
/// in [`ExperimentConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Defaults to 2D for `figure2` and 1D otherwise.
    pub model: Option<Model>,
    pub seed: Option<u64>,
    pub seeds: Option<SeedRange>,
    pub n: u64,
    pub sigma: Option<f64>,
    pub t: Option<f64>,
    pub p_max: Option<u64>,
    pub n_max: Option<u64>,
    pub m_max: u32,
    pub k_max: Option<u32>,
    pub p_cap: u64,
    pub drift: DriftKind,
    pub signed: bool,
    pub x: Vec<u64>,
    pub targets: Vec<i64>,
    pub lambdas: Vec<f64>,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub workers: Option<usize>,
    pub deterministic: bool,
    pub report_resources: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Walk,
            model: None,
            seed: None,
            seeds: None,
            n: 1_000_000,
            sigma: None,
            t: None,
            p_max: None,
            n_max: None,
            m_max: 60,
            k_max: None,
            p_cap: 100_000_000,
            drift: DriftKind::Zero,
            signed: false,
            x: Vec::new(),
            targets: Vec::new(),
            lambdas: Vec::new(),
            out: None,
            summary: None,
            workers: None,
            deterministic: false,
            report_resources: false,
        }
    }
}

/// A validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: Command,
    pub model: Model,
    pub seeds: SeedRange,
    pub n: u64,
    pub sigma: f64,
    pub t: f64,
    pub p_max: u64,
    pub n_max: Option<u64>,
    pub m_max: u32,
    pub k_max: u32,
    pub p_cap: u64,
    pub drift: DriftKind,
    pub absolute: bool,
    pub x: Vec<u64>,
    pub targets: Vec<i64>,
    pub lambdas: Vec<f64>,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub summary: Option<PathBuf>,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub deterministic: bool,
    #[serde(skip)]
    pub report_resources: bool,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            ..Self::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| usage(format!("config: {e}")))
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Fills per-command defaults and checks every field.
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let c = self.command;
        let seeds = match (self.seed, self.seeds) {
            (Some(_), Some(_)) => return Err(usage("give either seed or seeds, not both")),
            (Some(s), None) => SeedRange::single(s),
            (None, Some(r)) => r,
            (None, None) => SeedRange::single(match c {
                Command::Figure1 => 42,
                Command::Figure2 => 7,
                _ => 0,
            }),
        };
        if c.single_seed() && seeds.len() != 1 {
            return Err(usage(format!("{c} takes a single seed, got {seeds}")));
        }
        if self.n < 1 || self.n > MAX_SIEVE_LIMIT {
            return Err(usage(format!("n must be in 1..={MAX_SIEVE_LIMIT}, got {}", self.n)));
        }

        let model = self.model.unwrap_or(if c == Command::Figure2 {
            Model::Quarternary2D
        } else {
            Model::Rademacher1D
        });
        let needs_1d = matches!(
            c,
            Command::Signs
                | Command::Integral
                | Command::Clt
                | Command::Hoeffding
                | Command::Blowup
                | Command::Fscan
                | Command::Expansion
                | Command::Figure1
        );
        if needs_1d && model != Model::Rademacher1D {
            return Err(usage(format!("{c} needs model 1d")));
        }
        if c == Command::Figure2 && model != Model::Quarternary2D {
            return Err(usage("figure2 needs model 2d"));
        }
        if self.drift == DriftKind::Custom {
            return Err(usage("drift 'custom' is library-only; use zero, plus-extremal or minus-extremal"));
        }

        let sigma = self.sigma.unwrap_or(match c {
            Command::Clt => 0.505,
            Command::Hoeffding => 0.6,
            _ => 0.75,
        });
        if !(sigma > 0.5 && sigma.is_finite()) {
            return Err(usage(format!("sigma must be a finite number > 1/2, got {sigma}")));
        }
        let t = self.t.unwrap_or(match c {
            Command::Clt | Command::Blowup => 1.0,
            _ => 0.0,
        });
        if !t.is_finite() {
            return Err(usage("t must be finite"));
        }
        if c == Command::Blowup && t == 0.0 {
            return Err(usage("blowup needs t != 0"));
        }
        let p_max = self.p_max.unwrap_or(match c {
            Command::Clt => 10_000_000,
            Command::Expansion => 1_000,
            _ => 1_000_000,
        });
        if p_max < 2 || p_max > MAX_SIEVE_LIMIT {
            return Err(usage(format!("p_max must be in 2..={MAX_SIEVE_LIMIT}, got {p_max}")));
        }
        if let Some(n_max) = self.n_max {
            if n_max < 1 || n_max > MAX_SIEVE_LIMIT {
                return Err(usage(format!("n_max must be in 1..={MAX_SIEVE_LIMIT}")));
            }
        }
        if self.m_max < 3 {
            return Err(usage("m_max must be at least 3"));
        }
        let k_max = self.k_max.unwrap_or(if c == Command::Fscan { 8 } else { 10 });
        if !(1..=50).contains(&k_max) {
            return Err(usage("k_max must be in 1..=50"));
        }
        if self.p_cap < 2 || self.p_cap > MAX_SIEVE_LIMIT {
            return Err(usage("p_cap out of range"));
        }

        let mut x = if self.x.is_empty() {
            if self.n >= 10_000 {
                vec![10_000, self.n]
            } else {
                vec![self.n]
            }
        } else {
            self.x.clone()
        };
        x.sort_unstable();
        x.dedup();
        if let Some(&bad) = x.iter().find(|&&v| v < 1 || v > self.n) {
            return Err(usage(format!("integral checkpoint {bad} outside 1..={}", self.n)));
        }
        let targets = if self.targets.is_empty() {
            if model.is_1d() {
                vec![-2, -1, 0, 1, 2]
            } else {
                vec![0]
            }
        } else {
            self.targets.clone()
        };
        let lambdas = if self.lambdas.is_empty() {
            vec![1.0, 2.0, 3.0]
        } else {
            self.lambdas.clone()
        };
        if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(usage("lambdas must be positive"));
        }
        if self.workers == Some(0) {
            return Err(usage("workers must be at least 1"));
        }
        if matches!(c, Command::Figure1 | Command::Figure2) && self.out.is_none() {
            return Err(usage(format!("{c} needs --out <file.svg>")));
        }

        Ok(Resolved {
            command: c,
            model,
            seeds,
            n: self.n,
            sigma,
            t,
            p_max,
            n_max: self.n_max,
            m_max: self.m_max,
            k_max,
            p_cap: self.p_cap,
            drift: self.drift,
            absolute: !self.signed,
            x,
            targets,
            lambdas,
            out: self.out.clone(),
            summary: self.summary.clone(),
            workers: self.workers,
            deterministic: self.deterministic,
            report_resources: self.report_resources,
        })
    }
}
