//! Executes a resolved configuration: seed ensembles run on a fixed worker
//! pool and are merged in seed order, so outputs depend only on the config.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;
use rmwalk_core::analysis::{IntegralAccumulator, SignChangeTracker};
use rmwalk_core::dirichlet::{
    euler_product, f_truncated, log_f_expansion, ComplexS, LocalFactors, PrimeWeights,
    SigmaSequence, TruncationSchedule,
};
use rmwalk_core::sieve::PrimeList;
use rmwalk_core::stats::{ks_distance, std_normal_sf, tail_frequency, Reference, Sample};
use rmwalk_core::{GaussInt, MemoryCap, Model, PrimeSignAssignment, WalkSeries, WalkStream};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{Command, ExperimentConfig, Resolved};
use crate::error::CliError;
use crate::format::{opt, opt_real, real, Csv};
use crate::resources::peak_rss_kb;
use crate::svg;

/// Scan table header shared by the prime-sum commands.
pub const SCAN_HEADER: &str = "seed,sigma,t,p_max,S,V,normalized,F_re,F_im,log_ratio";
/// Per-seed sign-change summary header.
pub const SIGNS_HEADER: &str =
    "seed,n_max,drift,sign_changes,first_change,last_change,final_M,max_abs_M,integral_abs_x";

/// Walks longer than this are written every `ceil(N / WALK_ROWS)` steps.
pub const WALK_ROWS: u64 = 1_000_000;

/// Envelope used for the growth check of 1D walks: `√x (log log x)³`, from `x = 100`.
pub const ENVELOPE_START: u64 = 100;

pub fn envelope(x: f64) -> f64 {
    x.sqrt() * x.ln().ln().powi(3)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: Command,
    pub parameters: Resolved,
    pub parameter_hash: String,
    pub records: Vec<Value>,
    pub aggregate: Value,
    /// Omitted under `--deterministic`.
    pub wall_time_seconds: Option<f64>,
    /// Omitted under `--deterministic`.
    pub peak_rss_kb: Option<u64>,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub csv: Option<Csv>,
    pub svg: Option<String>,
}

/// SHA-256 over a git-style header and the canonical JSON of the resolved
/// parameters (output paths, worker count and reporting flags excluded).
pub fn parameter_hash(r: &Resolved) -> String {
    let body = serde_json::to_string(r).expect("parameters serialize");
    let mut h = Sha256::new();
    h.update(format!("params {}\0", body.len()).as_bytes());
    h.update(body.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Resolves, computes and writes every requested output.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    let r = config.resolve()?;
    let output = execute(&r)?;
    write_outputs(&r, &output)?;
    Ok(output)
}

/// Computes without touching the file system.
pub fn execute(r: &Resolved) -> Result<RunOutput, CliError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(r.workers.unwrap_or(0))
        .build()
        .map_err(|e| crate::error::usage(format!("worker pool: {e}")))?;
    let Computed {
        records,
        aggregate,
        csv,
        svg,
    } = pool.install(|| match r.command {
        Command::Walk => walk(r),
        Command::Signs => signs(r),
        Command::Recurrence => recurrence(r),
        Command::Integral => integral(r),
        Command::Clt => prime_sum_ensemble(r, false),
        Command::Hoeffding => prime_sum_ensemble(r, true),
        Command::Blowup => blowup(r),
        Command::Fscan => fscan(r),
        Command::Expansion => expansion(r),
        Command::Figure1 => figure1(r),
        Command::Figure2 => figure2(r),
    })?;
    let (wall, rss) = if r.deterministic {
        (None, None)
    } else {
        (Some(start.elapsed().as_secs_f64()), peak_rss_kb())
    };
    Ok(RunOutput {
        summary: RunSummary {
            command: r.command,
            parameters: r.clone(),
            parameter_hash: parameter_hash(r),
            records,
            aggregate,
            wall_time_seconds: wall,
            peak_rss_kb: rss,
        },
        csv,
        svg,
    })
}

pub fn write_outputs(r: &Resolved, output: &RunOutput) -> Result<(), CliError> {
    if let Some(path) = &r.out {
        if let Some(svg) = &output.svg {
            write_file(path, svg)?;
        } else if let Some(csv) = &output.csv {
            write_file(path, &csv.render())?;
        }
    }
    if let Some(path) = &r.summary {
        write_file(path, &(output.summary.to_json() + "\n"))?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

struct Computed {
    records: Vec<Value>,
    aggregate: Value,
    csv: Option<Csv>,
    svg: Option<String>,
}

fn to_values<T: Serialize>(rows: &[T]) -> Vec<Value> {
    rows.iter()
        .map(|r| serde_json::to_value(r).expect("record serializes"))
        .collect()
}

/// Runs `f` for every seed on the current pool; results come back in seed order.
fn per_seed<T, F>(r: &Resolved, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64) -> Result<T, CliError> + Sync,
{
    r.seeds.seeds().into_par_iter().map(|s| f(s)).collect()
}

fn stamp(r: &Resolved) -> Option<String> {
    (!r.deterministic).then(|| {
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        format!("unix-seconds={secs}")
    })
}

fn summary_stats(values: &[f64]) -> Value {
    match Sample::new(values.to_vec()) {
        Ok(s) => json!({
            "min": s.min(),
            "median": s.median(),
            "mean": s.mean(),
            "max": s.max(),
        }),
        Err(_) => Value::Null,
    }
}

#[derive(Debug, Clone, Serialize)]
struct WalkRecord {
    seed: u64,
    model: Model,
    n: u64,
    final_re: i64,
    final_im: i64,
    max_abs: f64,
    /// 1D only.
    sign_changes: Option<usize>,
    /// 2D only.
    zero_hits: Option<u64>,
}

fn walk(r: &Resolved) -> Result<Computed, CliError> {
    let seed = r.seeds.start;
    let assignment = PrimeSignAssignment::new(seed, r.model);
    let stride = if r.n <= WALK_ROWS { 1 } else { r.n.div_ceil(WALK_ROWS) };
    let one_d = r.model.is_1d();
    let mut csv = r
        .out
        .as_ref()
        .map(|_| Csv::new(if one_d { "n,M" } else { "n,re,im" }));
    let mut tracker = SignChangeTracker::new(Default::default());
    let mut zero_hits = 0u64;
    let mut max_norm_sq: i128 = 0;
    let mut last = GaussInt::ZERO;
    for p in WalkStream::new(assignment, r.n)? {
        let v = p.value;
        if one_d {
            tracker.push(p.n, v.re);
        } else if v.is_zero() {
            zero_hits += 1;
        }
        max_norm_sq = max_norm_sq.max(v.norm_sq());
        if let Some(c) = csv.as_mut() {
            if (p.n - 1) % stride == 0 || p.n == r.n {
                if one_d {
                    c.push(&[p.n.to_string(), v.re.to_string()]);
                } else {
                    c.push(&[p.n.to_string(), v.re.to_string(), v.im.to_string()]);
                }
            }
        }
        last = v;
    }
    let record = WalkRecord {
        seed,
        model: r.model,
        n: r.n,
        final_re: last.re,
        final_im: last.im,
        max_abs: (max_norm_sq as f64).sqrt(),
        sign_changes: one_d.then(|| tracker.count()),
        zero_hits: (!one_d).then_some(zero_hits),
    };
    let aggregate = json!({ "rows_written": csv.as_ref().map(Csv::len), "stride": stride });
    Ok(Computed {
        records: to_values(&[record]),
        aggregate,
        csv,
        svg: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SignsRecord {
    pub seed: u64,
    pub n_max: u64,
    pub drift: &'static str,
    pub sign_changes: usize,
    pub first_change: Option<u64>,
    pub last_change: Option<u64>,
    pub final_m: i64,
    pub max_abs_m: i64,
    pub integral_abs_x: f64,
}

fn signs(r: &Resolved) -> Result<Computed, CliError> {
    let drift = r.drift.to_spec()?;
    let rows = per_seed(r, |seed| {
        let mut tracker = SignChangeTracker::new(drift.clone());
        let mut acc = IntegralAccumulator::new(drift.clone(), true);
        let (mut max_abs, mut last) = (0i64, 0i64);
        for p in WalkStream::new(PrimeSignAssignment::rademacher(seed), r.n)? {
            let m = p.value.re;
            tracker.push(p.n, m);
            acc.push(p.n, m);
            max_abs = max_abs.max(m.abs());
            last = m;
        }
        let rec = tracker.finish(seed);
        Ok(SignsRecord {
            seed,
            n_max: r.n,
            drift: drift.name(),
            sign_changes: rec.count,
            first_change: rec.first_change,
            last_change: rec.last_change,
            final_m: last,
            max_abs_m: max_abs,
            integral_abs_x: acc.value(),
        })
    })?;
    let mut csv = Csv::new(SIGNS_HEADER);
    for row in &rows {
        csv.push(&[
            row.seed.to_string(),
            row.n_max.to_string(),
            row.drift.to_owned(),
            row.sign_changes.to_string(),
            opt(row.first_change),
            opt(row.last_change),
            row.final_m.to_string(),
            row.max_abs_m.to_string(),
            real(row.integral_abs_x),
        ]);
    }
    let counts: Vec<f64> = rows.iter().map(|r| r.sign_changes as f64).collect();
    let with_change = rows.iter().filter(|r| r.sign_changes >= 1).count();
    let aggregate = json!({
        "seeds": rows.len(),
        "seeds_with_sign_change": with_change,
        "fraction_with_sign_change": with_change as f64 / rows.len() as f64,
        "sign_changes": summary_stats(&counts),
    });
    Ok(Computed {
        records: to_values(&rows),
        aggregate,
        csv: Some(csv),
        svg: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct VisitCount {
    pub z_re: i64,
    pub z_im: i64,
    pub visits: u64,
    pub first_visit: Option<u64>,
    pub second_visit: Option<u64>,
    pub last_visit: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecurrenceRecord {
    pub seed: u64,
    pub targets: Vec<VisitCount>,
}

fn recurrence(r: &Resolved) -> Result<Computed, CliError> {
    let targets: Vec<GaussInt> = r.targets.iter().map(|&z| GaussInt::from(z)).collect();
    let rows = per_seed(r, |seed| {
        let mut counts: Vec<VisitCount> = targets
            .iter()
            .map(|z| VisitCount {
                z_re: z.re,
                z_im: z.im,
                visits: 0,
                first_visit: None,
                second_visit: None,
                last_visit: None,
            })
            .collect();
        for p in WalkStream::new(PrimeSignAssignment::new(seed, r.model), r.n)? {
            for (z, c) in targets.iter().zip(counts.iter_mut()) {
                if p.value == *z {
                    c.visits += 1;
                    match c.visits {
                        1 => c.first_visit = Some(p.n),
                        2 => c.second_visit = Some(p.n),
                        _ => {}
                    }
                    c.last_visit = Some(p.n);
                }
            }
        }
        Ok(RecurrenceRecord { seed, targets: counts })
    })?;
    let mut csv = Csv::new("seed,z_re,z_im,visits,first_visit,second_visit,last_visit");
    for row in &rows {
        for c in &row.targets {
            csv.push(&[
                row.seed.to_string(),
                c.z_re.to_string(),
                c.z_im.to_string(),
                c.visits.to_string(),
                opt(c.first_visit),
                opt(c.second_visit),
                opt(c.last_visit),
            ]);
        }
    }
    let per_target: Vec<Value> = targets
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let visits: Vec<f64> = rows.iter().map(|r| r.targets[i].visits as f64).collect();
            json!({
                "z_re": z.re,
                "z_im": z.im,
                "seeds_visiting_twice": rows.iter().filter(|r| r.targets[i].visits >= 2).count(),
                "seeds_visiting": rows.iter().filter(|r| r.targets[i].visits >= 1).count(),
                "visits": summary_stats(&visits),
            })
        })
        .collect();
    Ok(Computed {
        records: to_values(&rows),
        aggregate: json!({ "seeds": rows.len(), "targets": per_target }),
        csv: Some(csv),
        svg: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralRecord {
    pub seed: u64,
    pub drift: &'static str,
    pub x: Vec<u64>,
    pub integral: Vec<f64>,
    /// Last checkpoint over first.
    pub growth: Option<f64>,
    /// `max_{x >= 100} |M(x)| / (√x (log log x)³)`.
    pub envelope_ratio: f64,
}

fn integral(r: &Resolved) -> Result<Computed, CliError> {
    let drift = r.drift.to_spec()?;
    let last_x = *r.x.last().expect("resolved checkpoints are nonempty");
    let rows = per_seed(r, |seed| {
        let mut acc = IntegralAccumulator::new(drift.clone(), r.absolute);
        let mut values = Vec::with_capacity(r.x.len());
        let mut next = 0;
        let mut record_abs = -1i64;
        let mut ratio = 0.0f64;
        for p in WalkStream::new(PrimeSignAssignment::rademacher(seed), last_x)? {
            let m = p.value.re;
            acc.push(p.n, m);
            while next < r.x.len() && r.x[next] == p.n {
                values.push(acc.value());
                next += 1;
            }
            // The envelope increases, so its ratio peaks at a record of |M|.
            if p.n >= ENVELOPE_START && m.abs() >= record_abs {
                record_abs = m.abs();
                ratio = ratio.max(record_abs as f64 / envelope(p.n as f64));
            }
        }
        let growth = (values.len() >= 2 && values[0] != 0.0)
            .then(|| values[values.len() - 1] / values[0]);
        Ok(IntegralRecord {
            seed,
            drift: drift.name(),
            x: r.x.clone(),
            integral: values,
            growth,
            envelope_ratio: ratio,
        })
    })?;
    let mut csv = Csv::new("seed,drift,x,integral");
    for row in &rows {
        for (x, v) in row.x.iter().zip(&row.integral) {
            csv.push(&[row.seed.to_string(), row.drift.to_owned(), x.to_string(), real(*v)]);
        }
    }
    let growths: Vec<f64> = rows.iter().filter_map(|r| r.growth).collect();
    let ratios: Vec<f64> = rows.iter().map(|r| r.envelope_ratio).collect();
    let aggregate = json!({
        "seeds": rows.len(),
        "absolute": r.absolute,
        "growth": summary_stats(&growths),
        "seeds_growth_at_least_25_percent": growths.iter().filter(|&&g| g >= 1.25).count(),
        "envelope_ratio": summary_stats(&ratios),
        "seeds_within_envelope": ratios.iter().filter(|&&q| q <= 1.0).count(),
    });
    Ok(Computed {
        records: to_values(&rows),
        aggregate,
        csv: Some(csv),
        svg: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub seed: u64,
    pub sigma: f64,
    pub t: f64,
    pub p_max: u64,
    pub s: Option<f64>,
    pub v: Option<f64>,
    pub normalized: Option<f64>,
    pub f_re: Option<f64>,
    pub f_im: Option<f64>,
    pub log_ratio: Option<f64>,
}

impl ScanRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.seed.to_string(),
            real(self.sigma),
            real(self.t),
            self.p_max.to_string(),
            opt_real(self.s),
            opt_real(self.v),
            opt_real(self.normalized),
            opt_real(self.f_re),
            opt_real(self.f_im),
            opt_real(self.log_ratio),
        ]
    }
}

fn scan_csv(rows: &[ScanRecord]) -> Csv {
    let mut csv = Csv::new(SCAN_HEADER);
    for row in rows {
        csv.push(&row.fields());
    }
    csv
}

fn sieve_primes(bound: u64) -> Result<PrimeList, CliError> {
    Ok(PrimeList::up_to_capped(bound, MemoryCap::from_env())?)
}

/// Characteristic-function points compared against `exp(-u²/2)`.
pub const CHARACTERISTIC_POINTS: [f64; 3] = [0.5, 1.0, 2.0];

fn prime_sum_ensemble(r: &Resolved, hoeffding: bool) -> Result<Computed, CliError> {
    let primes = sieve_primes(r.p_max)?;
    let weights = PrimeWeights::new(&primes, r.sigma, r.t, r.p_max)?;
    let v = weights.variance();
    let rows = per_seed(r, |seed| {
        let s = weights.sum(&PrimeSignAssignment::rademacher(seed))?;
        Ok(ScanRecord {
            seed,
            sigma: r.sigma,
            t: r.t,
            p_max: r.p_max,
            s: Some(s),
            v: Some(v),
            normalized: Some(s / v.sqrt()),
            f_re: None,
            f_im: None,
            log_ratio: None,
        })
    })?;
    let normalized: Vec<f64> = rows.iter().filter_map(|r| r.normalized).collect();
    let sample = Sample::new(normalized.clone())?;
    let n = sample.len() as f64;
    let aggregate = if hoeffding {
        let raw = Sample::new(rows.iter().filter_map(|r| r.s).collect())?;
        let tails: Vec<Value> = r
            .lambdas
            .iter()
            .map(|&k| {
                let freq = tail_frequency(&raw, k * v.sqrt());
                let bound = 2.0 * (-k * k / 2.0).exp();
                let mc_error = (freq * (1.0 - freq) / n).sqrt();
                json!({
                    "k": k,
                    "lambda": k * v.sqrt(),
                    "frequency": freq,
                    "hoeffding_bound": bound,
                    "mc_error": mc_error,
                    "holds": freq <= bound + 3.0 * mc_error,
                })
            })
            .collect();
        json!({ "seeds": rows.len(), "variance": v, "primes": weights.len(), "tails": tails })
    } else {
        let ks = ks_distance(&sample, Reference::StdNormal);
        let mean = sample.mean();
        let sd = (normalized.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt();
        let cf: Vec<Value> = CHARACTERISTIC_POINTS
            .iter()
            .map(|&u| {
                json!({
                    "u": u,
                    "product": weights.characteristic_function(u),
                    "empirical": normalized.iter().map(|z| (u * z).cos()).sum::<f64>() / n,
                    "gaussian": (-u * u / 2.0).exp(),
                })
            })
            .collect();
        json!({
            "seeds": rows.len(),
            "variance": v,
            "variance_asymptote": rmwalk_core::dirichlet::variance_asymptote(r.sigma, r.t),
            "primes": weights.len(),
            "ks_distance": ks.distance,
            "mean": mean,
            "std_dev": sd,
            "characteristic_function": cf,
        })
    };
    Ok(Computed {
        csv: Some(scan_csv(&rows)),
        records: to_values(&rows),
        aggregate,
        svg: None,
    })
}

fn schedule_and_primes(r: &Resolved) -> Result<(SigmaSequence, TruncationSchedule, PrimeList), CliError> {
    let sigmas = SigmaSequence::geometric(r.k_max)?;
    let schedule = TruncationSchedule::with_cap(r.p_cap);
    let bound = sigmas
        .values()
        .iter()
        .map(|&s| schedule.p_max(s))
        .max()
        .unwrap_or(2);
    Ok((sigmas, schedule, sieve_primes(bound)?))
}

fn blowup(r: &Resolved) -> Result<Computed, CliError> {
    let (sigmas, schedule, primes) = schedule_and_primes(r)?;
    let seeds = r.seeds.seeds();
    let mut by_seed: Vec<Vec<ScanRecord>> = vec![Vec::new(); seeds.len()];
    for &sigma in sigmas.values() {
        let p_max = schedule.p_max(sigma);
        let w = PrimeWeights::new(&primes, sigma, r.t, p_max)?;
        let sums: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| w.sum(&PrimeSignAssignment::rademacher(seed)))
            .collect::<Result<_, _>>()?;
        for ((rows, &seed), s) in by_seed.iter_mut().zip(&seeds).zip(sums) {
            rows.push(ScanRecord {
                seed,
                sigma,
                t: r.t,
                p_max,
                s: Some(s),
                v: Some(w.variance()),
                normalized: Some(s / w.variance().sqrt()),
                f_re: None,
                f_im: None,
                log_ratio: None,
            });
        }
    }
    let maxima: Vec<f64> = by_seed
        .iter()
        .map(|rows| rows.iter().filter_map(|r| r.normalized).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let hits = maxima.iter().filter(|&&m| m >= 1.0).count();
    let rows: Vec<ScanRecord> = by_seed.into_iter().flatten().collect();
    let aggregate = json!({
        "seeds": seeds.len(),
        "sigmas": sigmas.values(),
        "p_max": sigmas.values().iter().map(|&s| schedule.p_max(s)).collect::<Vec<_>>(),
        "p_cap": schedule.cap,
        "seeds_with_max_normalized_at_least_1": hits,
        "fraction_with_max_normalized_at_least_1": hits as f64 / seeds.len() as f64,
        "gaussian_tail_1": std_normal_sf(1.0),
        "max_normalized": summary_stats(&maxima),
    });
    Ok(Computed {
        csv: Some(scan_csv(&rows)),
        records: to_values(&rows),
        aggregate,
        svg: None,
    })
}

fn fscan(r: &Resolved) -> Result<Computed, CliError> {
    let (sigmas, schedule, primes) = schedule_and_primes(r)?;
    let seeds = r.seeds.seeds();
    let mut by_seed: Vec<Vec<ScanRecord>> = vec![Vec::new(); seeds.len()];
    let mut medians = Vec::new();
    for &sigma in sigmas.values() {
        let p_max = schedule.p_max(sigma);
        let table = LocalFactors::new(&primes, sigma, p_max)?;
        let logs: Vec<f64> = seeds
            .par_iter()
            .map(|&seed| table.log_f(&PrimeSignAssignment::rademacher(seed)))
            .collect::<Result<_, _>>()?;
        let denom = (2.0 * sigma - 1.0).ln();
        let mut ratios = Vec::new();
        for ((rows, &seed), log_f) in by_seed.iter_mut().zip(&seeds).zip(logs) {
            let ratio = (denom != 0.0).then(|| log_f / denom);
            ratios.extend(ratio);
            rows.push(ScanRecord {
                seed,
                sigma,
                t: 0.0,
                p_max,
                s: None,
                v: None,
                normalized: None,
                f_re: Some(log_f.exp()),
                f_im: Some(0.0),
                log_ratio: ratio,
            });
        }
        medians.push(json!({
            "sigma": sigma,
            "p_max": p_max,
            "median_log_ratio": Sample::new(ratios).ok().map(|s| s.median()),
        }));
    }
    let rows: Vec<ScanRecord> = by_seed.into_iter().flatten().collect();
    Ok(Computed {
        csv: Some(scan_csv(&rows)),
        records: to_values(&rows),
        aggregate: json!({ "seeds": seeds.len(), "p_cap": schedule.cap, "per_sigma": medians }),
        svg: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionRecord {
    pub seed: u64,
    pub sigma: f64,
    pub t: f64,
    pub p_max: u64,
    pub m_max: u32,
    pub log_f: Complex64,
    pub exp_expansion: Complex64,
    pub euler_product: Complex64,
    pub rel_diff: f64,
    pub m_tail_bound: f64,
    pub f_truncated: Option<Complex64>,
    pub rel_diff_truncated: Option<f64>,
}

fn expansion(r: &Resolved) -> Result<Computed, CliError> {
    let primes = sieve_primes(r.p_max)?;
    let s = ComplexS::new(r.sigma, r.t);
    let rows = per_seed(r, |seed| {
        let a = PrimeSignAssignment::rademacher(seed);
        let e = log_f_expansion(&a, &primes, s, r.p_max, r.m_max)?;
        let total = e.total();
        let exp = total.exp();
        let prod = euler_product(&a, &primes, s, r.p_max)?;
        let f = r.n_max.map(|n| f_truncated(&a, s, n)).transpose()?;
        Ok(ExpansionRecord {
            seed,
            sigma: r.sigma,
            t: r.t,
            p_max: r.p_max,
            m_max: r.m_max,
            log_f: total,
            exp_expansion: exp,
            euler_product: prod,
            rel_diff: (exp - prod).norm() / prod.norm(),
            m_tail_bound: e.m_tail_bound,
            f_truncated: f.map(|f| f.value),
            rel_diff_truncated: f.map(|f| (exp - f.value).norm() / f.value.norm()),
        })
    })?;
    let mut csv = Csv::new(
        "seed,sigma,t,p_max,m_max,log_re,log_im,exp_re,exp_im,euler_re,euler_im,rel_diff,m_tail_bound,F_trunc_re,F_trunc_im,rel_diff_trunc",
    );
    for row in &rows {
        csv.push(&[
            row.seed.to_string(),
            real(row.sigma),
            real(row.t),
            row.p_max.to_string(),
            row.m_max.to_string(),
            real(row.log_f.re),
            real(row.log_f.im),
            real(row.exp_expansion.re),
            real(row.exp_expansion.im),
            real(row.euler_product.re),
            real(row.euler_product.im),
            real(row.rel_diff),
            real(row.m_tail_bound),
            opt_real(row.f_truncated.map(|z| z.re)),
            opt_real(row.f_truncated.map(|z| z.im)),
            opt_real(row.rel_diff_truncated),
        ]);
    }
    let diffs: Vec<f64> = rows.iter().map(|r| r.rel_diff).collect();
    let trunc: Vec<f64> = rows.iter().filter_map(|r| r.rel_diff_truncated).collect();
    Ok(Computed {
        aggregate: json!({
            "seeds": rows.len(),
            "max_rel_diff": diffs.iter().copied().fold(0.0, f64::max),
            "rel_diff_truncated": summary_stats(&trunc),
        }),
        records: to_values(&rows),
        csv: Some(csv),
        svg: None,
    })
}

fn figure1(r: &Resolved) -> Result<Computed, CliError> {
    let seed = r.seeds.start;
    MemoryCap::from_env().check("figure walk", r.n.saturating_mul(8))?;
    let walk = WalkSeries::generate_capped(&PrimeSignAssignment::rademacher(seed), r.n, r.n)?;
    let values = walk.as_1d().expect("1D walk");
    let (svg, vertices) = svg::figure1(values, seed, stamp(r).as_deref())?;
    let changes = rmwalk_core::analysis::sign_changes(&walk, &Default::default())?;
    let record = json!({
        "seed": seed,
        "n": r.n,
        "vertices": vertices,
        "sign_changes": changes.count,
        "final_M": values[values.len() - 1],
        "max_abs_M": values.iter().map(|m| m.abs()).max(),
    });
    Ok(Computed {
        records: vec![record],
        aggregate: json!({ "svg_bytes": svg.len() }),
        csv: None,
        svg: Some(svg),
    })
}

fn figure2(r: &Resolved) -> Result<Computed, CliError> {
    let seed = r.seeds.start;
    let mut visited = BTreeSet::new();
    for p in WalkStream::new(PrimeSignAssignment::quarternary(seed), r.n)? {
        visited.insert((p.value.re, p.value.im));
    }
    let points: Vec<(i64, i64)> = visited.into_iter().collect();
    let svg = svg::figure2(&points, r.n, seed, stamp(r).as_deref());
    let record = json!({
        "seed": seed,
        "n": r.n,
        "distinct_points": points.len(),
        "origin_visited": points.binary_search(&(0, 0)).is_ok(),
    });
    Ok(Computed {
        records: vec![record],
        aggregate: json!({ "svg_bytes": svg.len() }),
        csv: None,
        svg: Some(svg),
    })
}
