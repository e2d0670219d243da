//! Series-side numerics: zeta by Euler–Maclaurin, truncated Dirichlet series
//! `F(s) = Σ f(n) n^{-s}`, prime sums `S(σ, t) = Σ_p f(p) cos(t log p) p^{-σ}`
//! with their exact truncated variance, the prime-power expansion of
//! `log F`, the partial-summation identity, and the σ → 1/2⁺ scans.
//!
//! All arithmetic is IEEE double; sums longer than [`KAHAN_THRESHOLD`] terms
//! are compensated.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::kahan::{ComplexKahanSum, KahanSum};
use crate::rmf::{PrimeSignAssignment, Unit, WalkStream};
use crate::sieve::PrimeList;

/// Number of explicit terms in the Euler–Maclaurin zeta sum.
pub const ZETA_TERMS: u64 = 10_000;

/// Sums with more terms than this use compensated summation.
pub const KAHAN_THRESHOLD: usize = 1_000_000;

/// A point `s = σ + it` of the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexS {
    pub sigma: f64,
    pub t: f64,
}

impl ComplexS {
    pub const fn new(sigma: f64, t: f64) -> Self {
        Self { sigma, t }
    }

    pub const fn real(sigma: f64) -> Self {
        Self { sigma, t: 0.0 }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.sigma, self.t)
    }

    fn require_half_plane(self, what: &str) -> Result<()> {
        if !(self.sigma > 0.5) || !self.sigma.is_finite() || !self.t.is_finite() {
            return Err(domain(format!(
                "{what} needs Re(s) > 1/2, got s = {} + {}i",
                self.sigma, self.t
            )));
        }
        Ok(())
    }
}

impl From<f64> for ComplexS {
    fn from(sigma: f64) -> Self {
        Self::real(sigma)
    }
}

/// `n^{-s}`.
#[inline]
fn n_pow_neg(n: f64, s: ComplexS) -> Complex64 {
    let ln = n.ln();
    let mag = (-s.sigma * ln).exp();
    if s.t == 0.0 {
        return Complex64::new(mag, 0.0);
    }
    let (sin, cos) = (s.t * ln).sin_cos();
    Complex64::new(mag * cos, -mag * sin)
}

/// `e^z - 1` without cancellation for small `|z|`.
fn complex_expm1(z: Complex64) -> Complex64 {
    let (sin, cos) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    Complex64::new(
        z.re.exp_m1() * cos - 2.0 * half * half,
        z.re.exp() * sin,
    )
}

/// Riemann zeta for `Re(s) > 1` by Euler–Maclaurin with `K = 10^4`.
pub fn zeta(s: ComplexS) -> Result<Complex64> {
    zeta_with_terms(s, ZETA_TERMS)
}

/// Euler–Maclaurin zeta with `k` explicit terms:
///
/// `Σ_{n<K} n^{-s} + K^{1-s}/(s-1) + K^{-s}/2 + (s/12) K^{-s-1} - s(s+1)(s+2)/720 · K^{-s-3}`
pub fn zeta_with_terms(s: ComplexS, k: u64) -> Result<Complex64> {
    if !(s.sigma > 1.0) || !s.t.is_finite() {
        return Err(domain(format!(
            "zeta is evaluated only for Re(s) > 1, got s = {} + {}i",
            s.sigma, s.t
        )));
    }
    if k < 2 {
        return Err(invalid("Euler–Maclaurin needs at least 2 terms"));
    }
    let z = s.to_complex();
    let mut head = ComplexKahanSum::new();
    for n in 1..k {
        head.add(n_pow_neg(n as f64, s));
    }
    let kf = k as f64;
    let k_neg_s = n_pow_neg(kf, s);
    let one = Complex64::new(1.0, 0.0);
    let tail = k_neg_s * kf / (z - one)
        + k_neg_s * 0.5
        + z / 12.0 * k_neg_s / kf
        - z * (z + 1.0) * (z + 2.0) / 720.0 * k_neg_s / (kf * kf * kf);
    Ok(head.value() + tail)
}

/// Principal `log ζ(s)`; only its real part `log |ζ(s)|` is branch free.
pub fn log_zeta(s: ComplexS) -> Result<Complex64> {
    Ok(zeta(s)?.ln())
}

/// Truncation parameters for the series operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Dirichlet-series length.
    pub n_max: u64,
    /// Largest prime in prime sums.
    pub p_max: u64,
    /// Depth of the prime-power expansion of `log F` (at least 3).
    pub m_max: u32,
}

impl TruncationSpec {
    pub fn new(n_max: u64, p_max: u64, m_max: u32) -> Result<Self> {
        if n_max < 1 || p_max < 2 || m_max < 3 {
            return Err(invalid(format!(
                "truncation needs n_max >= 1, p_max >= 2, m_max >= 3; got {n_max}, {p_max}, {m_max}"
            )));
        }
        Ok(Self { n_max, p_max, m_max })
    }
}

/// `σ_k ↓ 1/2`, strictly decreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSequence {
    values: Vec<f64>,
}

impl SigmaSequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sigma sequence must be nonempty"));
        }
        if values.iter().any(|&s| !(s > 0.5) || !s.is_finite()) {
            return Err(domain("every sigma must exceed 1/2"));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(invalid("sigma sequence must be strictly decreasing"));
        }
        Ok(Self { values })
    }

    /// `σ_k = 1/2 + 2^{-k}` for `k = 1..=k_max`.
    pub fn geometric(k_max: u32) -> Result<Self> {
        if k_max == 0 || k_max > 50 {
            return Err(invalid("geometric sigma sequence needs 1 <= k_max <= 50"));
        }
        Self::new((1..=k_max).map(|k| 0.5 + 0.5f64.powi(k as i32)).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// `p_max(σ) = clamp((2σ - 1)^{-4}, floor, cap)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    pub exponent: f64,
    pub floor: u64,
    pub cap: u64,
}

impl Default for TruncationSchedule {
    fn default() -> Self {
        Self {
            exponent: 4.0,
            floor: 1_000,
            cap: 100_000_000,
        }
    }
}

impl TruncationSchedule {
    pub fn with_cap(cap: u64) -> Self {
        Self {
            cap,
            ..Self::default()
        }
    }

    pub fn p_max(&self, sigma: f64) -> u64 {
        let raw = (2.0 * sigma - 1.0).powf(-self.exponent);
        let raw = if raw.is_finite() { raw.ceil() } else { f64::MAX };
        (raw.min(self.cap as f64) as u64).clamp(self.floor.min(self.cap), self.cap)
    }
}

/// Truncated Dirichlet series together with the heuristic fluctuation scale
/// `n_max^{1/2 - σ}` (reported, never asserted).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedF {
    pub value: Complex64,
    pub n_max: u64,
    pub fluctuation_scale: f64,
}

/// `Σ_{n <= n_max} f(n) n^{-s}`.
pub fn f_truncated(
    assignment: &PrimeSignAssignment,
    s: ComplexS,
    n_max: u64,
) -> Result<TruncatedF> {
    s.require_half_plane("F(s)")?;
    let stream = WalkStream::new(assignment.clone(), n_max)?;
    let mut acc = ComplexKahanSum::new();
    for point in stream {
        if let Some(u) = point.increment {
            acc.add(unit_times(u, n_pow_neg(point.n as f64, s)));
        }
    }
    Ok(TruncatedF {
        value: acc.value(),
        n_max,
        fluctuation_scale: (n_max as f64).powf(0.5 - s.sigma),
    })
}

#[inline]
fn unit_times(u: Unit, z: Complex64) -> Complex64 {
    match u.power() {
        0 => z,
        1 => Complex64::new(-z.im, z.re),
        2 => -z,
        _ => Complex64::new(z.im, -z.re),
    }
}

/// Precomputed prime weights `w_p = cos(t log p) p^{-σ}` for `p <= p_max`.
///
/// `S(σ, t) = Σ_p f(p) w_p` for any 1D assignment, and `V = Σ_p w_p²` is its
/// exact truncated variance. Building the weights once and sweeping many seeds
/// is how the ensemble statistics are computed.
#[derive(Debug, Clone)]
pub struct PrimeWeights {
    sigma: f64,
    t: f64,
    p_max: u64,
    primes: Vec<u32>,
    weights: Vec<f64>,
    variance: f64,
}

impl PrimeWeights {
    pub fn new(primes: &PrimeList, sigma: f64, t: f64, p_max: u64) -> Result<Self> {
        ComplexS::new(sigma, t).require_half_plane("prime sum")?;
        let ps = primes.up_to_bound(p_max)?;
        let weights: Vec<f64> = ps
            .iter()
            .map(|&p| {
                let lp = (p as f64).ln();
                (t * lp).cos() * (-sigma * lp).exp()
            })
            .collect();
        let variance = if weights.len() > KAHAN_THRESHOLD {
            weights.iter().map(|w| w * w).collect::<KahanSum>().value()
        } else {
            weights.iter().map(|w| w * w).sum()
        };
        Ok(Self {
            sigma,
            t,
            p_max,
            primes: ps.to_vec(),
            weights,
            variance,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn p_max(&self) -> u64 {
        self.p_max
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Exact truncated variance `Σ_{p <= p_max} cos²(t log p) p^{-2σ}`.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// `S(σ, t)` for a 1D assignment.
    pub fn sum(&self, assignment: &PrimeSignAssignment) -> Result<f64> {
        if !assignment.model().is_1d() {
            return Err(invalid("prime sums S(σ, t) are defined for the 1D model"));
        }
        let terms = self.primes.iter().zip(&self.weights).map(|(&p, &w)| {
            // sign_bit is Some for every 1D assignment.
            let bit = assignment.sign_bit(p as u64).unwrap_or(0);
            f64::from_bits(w.to_bits() ^ bit)
        });
        Ok(if self.weights.len() > KAHAN_THRESHOLD {
            terms.collect::<KahanSum>().value()
        } else {
            terms.sum()
        })
    }

    /// `S / √V`.
    pub fn normalized(&self, assignment: &PrimeSignAssignment) -> Result<f64> {
        if self.variance <= 0.0 {
            return Err(invalid("normalization needs a positive variance"));
        }
        Ok(self.sum(assignment)? / self.variance.sqrt())
    }

    /// Characteristic function of `S/√V`: `Π_p cos(u · w_p / √V)`.
    pub fn characteristic_function(&self, u: f64) -> f64 {
        let scale = u / self.variance.sqrt();
        // Summing log-cosines keeps the long product well conditioned.
        let log: f64 = self.weights.iter().map(|w| (scale * w).cos().ln()).sum();
        log.exp()
    }
}

/// Truncated prime sum `Σ_{p <= p_max} f(p) cos(t log p) p^{-σ}`.
pub fn prime_sum_s(
    assignment: &PrimeSignAssignment,
    primes: &PrimeList,
    sigma: f64,
    t: f64,
    p_max: u64,
) -> Result<f64> {
    PrimeWeights::new(primes, sigma, t, p_max)?.sum(assignment)
}

/// Truncated variance and its leading asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variance {
    pub truncated: f64,
    /// `½ log(1/(2σ-1))` for `t ≠ 0`; `log(1/(2σ-1))` for `t = 0`.
    pub asymptote: f64,
}

pub fn variance_asymptote(sigma: f64, t: f64) -> f64 {
    let full = (1.0 / (2.0 * sigma - 1.0)).ln();
    if t == 0.0 {
        full
    } else {
        0.5 * full
    }
}

pub fn variance_v(primes: &PrimeList, sigma: f64, t: f64, p_max: u64) -> Result<Variance> {
    let w = PrimeWeights::new(primes, sigma, t, p_max)?;
    Ok(Variance {
        truncated: w.variance(),
        asymptote: variance_asymptote(sigma, t),
    })
}

/// The three pieces of the prime-power expansion of `log F(s)` over `p <= p_max`:
///
/// `Σ_p f(p) p^{-s}  -  ½ Σ_p f(p)² p^{-2s}  +  Σ_p Σ_{m=3}^{m_max} (-1)^{m+1} f(p)^m / (m p^{ms})`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogFExpansion {
    pub linear: Complex64,
    pub quadratic: Complex64,
    pub higher: Complex64,
    /// `Σ_p p^{-m_max σ} / (m_max (1 - p^{-σ}))`, bounding the dropped `m > m_max` terms.
    pub m_tail_bound: f64,
}

impl LogFExpansion {
    pub fn total(&self) -> Complex64 {
        self.linear + self.quadratic + self.higher
    }
}

pub fn log_f_expansion(
    assignment: &PrimeSignAssignment,
    primes: &PrimeList,
    s: ComplexS,
    p_max: u64,
    m_max: u32,
) -> Result<LogFExpansion> {
    s.require_half_plane("log F(s)")?;
    if m_max < 3 {
        return Err(invalid("expansion depth m_max must be at least 3"));
    }
    let mut linear = ComplexKahanSum::new();
    let mut quadratic = ComplexKahanSum::new();
    let mut higher = ComplexKahanSum::new();
    let mut tail = KahanSum::new();
    for &p in primes.up_to_bound(p_max)? {
        let pf = p as f64;
        let x = unit_times(assignment.prime_sign(p as u64), n_pow_neg(pf, s));
        linear.add(x);
        let x2 = x * x;
        quadratic.add(-0.5 * x2);
        let mut xm = x2;
        let mut h = Complex64::new(0.0, 0.0);
        for m in 3..=m_max {
            xm *= x;
            let term = xm / m as f64;
            h += if m % 2 == 1 { term } else { -term };
            if xm.norm() < 1e-22 {
                break;
            }
        }
        higher.add(h);
        let p_sigma = pf.powf(-s.sigma);
        tail.add(p_sigma.powi(m_max as i32) / (m_max as f64 * (1.0 - p_sigma)));
    }
    Ok(LogFExpansion {
        linear: linear.value(),
        quadratic: quadratic.value(),
        higher: higher.value(),
        m_tail_bound: tail.value(),
    })
}

/// Finite Euler product `Π_{p <= p_max} (1 + f(p) p^{-s})`, multiplied out directly.
pub fn euler_product(
    assignment: &PrimeSignAssignment,
    primes: &PrimeList,
    s: ComplexS,
    p_max: u64,
) -> Result<Complex64> {
    s.require_half_plane("Euler product")?;
    Ok(primes
        .up_to_bound(p_max)?
        .iter()
        .map(|&p| {
            Complex64::new(1.0, 0.0)
                + unit_times(assignment.prime_sign(p as u64), n_pow_neg(p as f64, s))
        })
        .product())
}

/// Real `log F(σ)` through the Euler product: `Σ_{p <= p_max} log(1 + f(p) p^{-σ})`.
pub fn log_euler_product_real(
    assignment: &PrimeSignAssignment,
    primes: &PrimeList,
    sigma: f64,
    p_max: u64,
) -> Result<f64> {
    ComplexS::real(sigma).require_half_plane("Euler product")?;
    if !assignment.model().is_1d() {
        return Err(invalid("real Euler product needs the 1D model"));
    }
    let ps = primes.up_to_bound(p_max)?;
    let terms = ps
        .iter()
        .map(|&p| (assignment.prime_sign_real(p as u64) * (p as f64).powf(-sigma)).ln_1p());
    Ok(if ps.len() > KAHAN_THRESHOLD {
        terms.collect::<KahanSum>().value()
    } else {
        terms.sum()
    })
}

/// Both sides of the finite partial-summation identity
/// `Σ_{n<=N} f(n) n^{-s} = s ∫_1^N u^{-1-s} M(u) du + M(N) N^{-s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSummation {
    pub series: Complex64,
    pub integral_form: Complex64,
}

impl PartialSummation {
    pub fn relative_difference(&self) -> f64 {
        let scale = self.series.norm().max(self.integral_form.norm());
        if scale == 0.0 {
            0.0
        } else {
            (self.series - self.integral_form).norm() / scale
        }
    }
}

pub fn partial_summation_check(
    assignment: &PrimeSignAssignment,
    s: ComplexS,
    n: u64,
) -> Result<PartialSummation> {
    s.require_half_plane("partial summation")?;
    let z = s.to_complex();
    let mut series = ComplexKahanSum::new();
    let mut integral = ComplexKahanSum::new();
    let mut last_m = Complex64::new(0.0, 0.0);
    let mut last_n = 1u64;
    for point in WalkStream::new(assignment.clone(), n)? {
        let npow = n_pow_neg(point.n as f64, s);
        if let Some(u) = point.increment {
            series.add(unit_times(u, npow));
        }
        let m = Complex64::new(point.value.re as f64, point.value.im as f64);
        if point.n < n {
            // ∫_n^{n+1} u^{-1-s} du = (n^{-s} - (n+1)^{-s}) / s
            //                      = -n^{-s} expm1(-s log(1 + 1/n)) / s
            let ratio = complex_expm1(-z * (1.0 / point.n as f64).ln_1p());
            let piece = -npow * ratio / z;
            integral.add(m * piece);
        }
        last_m = m;
        last_n = point.n;
    }
    let boundary = last_m * n_pow_neg(last_n as f64, s);
    Ok(PartialSummation {
        series: series.value(),
        integral_form: z * integral.value() + boundary,
    })
}

/// One row of the blow-up scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupRow {
    pub sigma: f64,
    pub t: f64,
    pub p_max: u64,
    pub s: f64,
    pub variance: f64,
    pub normalized: f64,
}

fn check_scan_primes(primes: &PrimeList, schedule: &TruncationSchedule, sigmas: &SigmaSequence) -> Result<()> {
    let need = sigmas
        .values()
        .iter()
        .map(|&s| schedule.p_max(s))
        .max()
        .unwrap_or(2);
    if need > primes.bound() {
        return Err(invalid(format!(
            "scan needs primes up to {need} but only {} were sieved",
            primes.bound()
        )));
    }
    Ok(())
}

/// `S(σ_k, t)` and `S/√V` along a σ-sequence, for one or many assignments.
///
/// The outer loop runs over `σ_k` so each weight table is built once and shared
/// by every assignment.
pub fn blowup_scan_many(
    assignments: &[PrimeSignAssignment],
    t: f64,
    sigmas: &SigmaSequence,
    schedule: &TruncationSchedule,
    primes: &PrimeList,
) -> Result<Vec<Vec<BlowupRow>>> {
    if t == 0.0 || !t.is_finite() {
        return Err(invalid("blow-up scan requires a finite t != 0"));
    }
    check_scan_primes(primes, schedule, sigmas)?;
    let mut out = vec![Vec::with_capacity(sigmas.values().len()); assignments.len()];
    for &sigma in sigmas.values() {
        let p_max = schedule.p_max(sigma);
        let weights = PrimeWeights::new(primes, sigma, t, p_max)?;
        for (rows, a) in out.iter_mut().zip(assignments) {
            let s = weights.sum(a)?;
            rows.push(BlowupRow {
                sigma,
                t,
                p_max,
                s,
                variance: weights.variance(),
                normalized: s / weights.variance().sqrt(),
            });
        }
    }
    Ok(out)
}

pub fn blowup_scan(
    assignment: &PrimeSignAssignment,
    t: f64,
    sigmas: &SigmaSequence,
    schedule: &TruncationSchedule,
    primes: &PrimeList,
) -> Result<Vec<BlowupRow>> {
    Ok(blowup_scan_many(std::slice::from_ref(assignment), t, sigmas, schedule, primes)?
        .pop()
        .unwrap_or_default())
}

/// One row of the half-line scan of `F(σ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalflineRow {
    pub sigma: f64,
    pub p_max: u64,
    pub f_value: f64,
    pub log_f: f64,
    /// `log F(σ) / log(2σ - 1)`; undefined at `σ = 1`.
    pub ratio: Option<f64>,
}

/// Local Euler factors `log(1 ± p^{-σ})` for `p <= p_max`, so that
/// `log F(σ) = Σ_p log(1 + f(p) p^{-σ})` costs one table lookup per prime and seed.
#[derive(Debug, Clone)]
pub struct LocalFactors {
    sigma: f64,
    p_max: u64,
    primes: Vec<u32>,
    /// `[log(1 + p^{-σ}), log(1 - p^{-σ})]`.
    logs: Vec<[f64; 2]>,
}

impl LocalFactors {
    pub fn new(primes: &PrimeList, sigma: f64, p_max: u64) -> Result<Self> {
        ComplexS::real(sigma).require_half_plane("Euler product")?;
        let ps = primes.up_to_bound(p_max)?;
        let logs = ps
            .iter()
            .map(|&p| {
                let w = (-sigma * (p as f64).ln()).exp();
                [w.ln_1p(), (-w).ln_1p()]
            })
            .collect();
        Ok(Self {
            sigma,
            p_max,
            primes: ps.to_vec(),
            logs,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn p_max(&self) -> u64 {
        self.p_max
    }

    /// `Σ_{p <= p_max} log(1 + f(p) p^{-σ})` for a 1D assignment.
    pub fn log_f(&self, assignment: &PrimeSignAssignment) -> Result<f64> {
        if !assignment.model().is_1d() {
            return Err(invalid("real Euler product needs the 1D model"));
        }
        let terms = self.primes.iter().zip(&self.logs).map(|(&p, pair)| {
            let bit = assignment.sign_bit(p as u64).unwrap_or(0);
            pair[(bit >> 63) as usize]
        });
        Ok(if self.logs.len() > KAHAN_THRESHOLD {
            terms.collect::<KahanSum>().value()
        } else {
            terms.sum()
        })
    }
}

/// `F(σ_k)` through the finite Euler product with the scheduled `p_max`, and
/// the exponent ratio `log F / log(2σ - 1)`, for many assignments at once.
pub fn halfline_f_scan_many(
    assignments: &[PrimeSignAssignment],
    sigmas: &SigmaSequence,
    schedule: &TruncationSchedule,
    primes: &PrimeList,
) -> Result<Vec<Vec<HalflineRow>>> {
    check_scan_primes(primes, schedule, sigmas)?;
    let mut out = vec![Vec::with_capacity(sigmas.values().len()); assignments.len()];
    for &sigma in sigmas.values() {
        let p_max = schedule.p_max(sigma);
        let table = LocalFactors::new(primes, sigma, p_max)?;
        let denom = (2.0 * sigma - 1.0).ln();
        for (rows, a) in out.iter_mut().zip(assignments) {
            let log_f = table.log_f(a)?;
            rows.push(HalflineRow {
                sigma,
                p_max,
                f_value: log_f.exp(),
                log_f,
                ratio: (denom != 0.0).then(|| log_f / denom),
            });
        }
    }
    Ok(out)
}

pub fn halfline_f_scan(
    assignment: &PrimeSignAssignment,
    sigmas: &SigmaSequence,
    schedule: &TruncationSchedule,
    primes: &PrimeList,
) -> Result<Vec<HalflineRow>> {
    Ok(halfline_f_scan_many(std::slice::from_ref(assignment), sigmas, schedule, primes)?
        .pop()
        .unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn forced(pairs: &[(u64, i64)]) -> PrimeSignAssignment {
        pairs.iter().fold(PrimeSignAssignment::rademacher(0), |a, &(p, s)| {
            a.with_forced(p, if s > 0 { Unit::ONE } else { Unit::MINUS_ONE })
                .unwrap()
        })
    }

    #[test]
    fn zeta_two() {
        let z = zeta(ComplexS::real(2.0)).unwrap();
        assert!((z.re - PI * PI / 6.0).abs() < 1e-9);
        assert!(z.im.abs() < 1e-15);
    }

    #[test]
    fn zeta_known_values() {
        // ζ(4) = π⁴/90; ζ(3) = Apéry's constant.
        let z4 = zeta(ComplexS::real(4.0)).unwrap().re;
        assert!((z4 - PI.powi(4) / 90.0).abs() < 1e-13);
        let z3 = zeta(ComplexS::real(3.0)).unwrap().re;
        assert!((z3 - 1.202_056_903_159_594_3).abs() < 1e-13);
    }

    #[test]
    fn zeta_domain() {
        assert!(zeta(ComplexS::real(1.0)).is_err());
        assert!(zeta(ComplexS::new(0.9, 5.0)).is_err());
    }

    #[test]
    fn zeta_stable_in_terms_across_strip() {
        for &(sigma, t) in &[(1.05, 0.0), (1.05, 100.0), (1.3, 37.5), (2.0, -60.0)] {
            let s = ComplexS::new(sigma, t);
            let a = zeta_with_terms(s, 10_000).unwrap();
            let b = zeta_with_terms(s, 1_000_000).unwrap();
            assert!((a - b).norm() / b.norm() < 1e-10, "s={sigma}+{t}i");
        }
    }

    #[test]
    fn f_truncated_examples() {
        let a = forced(&[(2, 1), (3, -1)]);
        let f = f_truncated(&a, ComplexS::real(2.0), 4).unwrap();
        assert!((f.value.re - (1.0 + 0.25 - 1.0 / 9.0)).abs() < 1e-15);
        for s in [ComplexS::real(0.6), ComplexS::new(1.5, 3.0)] {
            let f1 = f_truncated(&PrimeSignAssignment::rademacher(8), s, 1).unwrap();
            assert_eq!(f1.value, Complex64::new(1.0, 0.0));
        }
        assert!(f_truncated(&a, ComplexS::real(0.5), 10).is_err());
    }

    #[test]
    fn prime_sum_examples() {
        let primes = PrimeList::up_to(100).unwrap();
        let a = forced(&[(2, 1), (3, -1)]);
        let s = prime_sum_s(&a, &primes, 1.0, 0.0, 3).unwrap();
        assert!((s - (0.5 - 1.0 / 3.0)).abs() < 1e-15);
        let b = PrimeSignAssignment::rademacher(17);
        for &(sigma, t) in &[(0.7, 1.0), (1.2, -3.0)] {
            let got = prime_sum_s(&b, &primes, sigma, t, 2).unwrap();
            let want = b.prime_sign_real(2) * (t * 2f64.ln()).cos() / 2f64.powf(sigma);
            assert!((got - want).abs() < 1e-15);
        }
        assert!(prime_sum_s(&b, &primes, 0.5, 1.0, 10).is_err());
        assert!(prime_sum_s(&PrimeSignAssignment::quarternary(1), &primes, 0.7, 1.0, 10).is_err());
    }

    #[test]
    fn variance_examples() {
        let primes = PrimeList::up_to(100_000).unwrap();
        let v = variance_v(&primes, 0.8, 2.0, 2).unwrap();
        assert!((v.truncated - (2.0 * 2f64.ln()).cos().powi(2) / 2f64.powf(1.6)).abs() < 1e-15);
        for sigma in [0.55, 0.7, 1.0] {
            let v0 = variance_v(&primes, sigma, 0.0, 100_000).unwrap().truncated;
            let lz = log_zeta(ComplexS::real(2.0 * sigma)).unwrap().re;
            // Σ_p p^{-2σ} ≤ log ζ(2σ) term by term.
            assert!(v0 <= lz, "sigma={sigma}");
        }
    }

    #[test]
    fn log_f_local_factor() {
        let primes = PrimeList::up_to(10).unwrap();
        let plus = forced(&[(2, 1)]);
        let e = log_f_expansion(&plus, &primes, ComplexS::real(1.0), 2, 200).unwrap();
        assert!((e.total().re - 1.5f64.ln()).abs() < 1e-15);
        let minus = forced(&[(2, -1)]);
        let e = log_f_expansion(&minus, &primes, ComplexS::real(1.0), 2, 200).unwrap();
        assert!((e.total().re - 0.5f64.ln()).abs() < 1e-14);
        assert!(log_f_expansion(&minus, &primes, ComplexS::real(1.0), 2, 2).is_err());
    }

    #[test]
    fn partial_summation_small_cases() {
        let a = forced(&[(2, 1), (3, -1)]);
        let one = partial_summation_check(&a, ComplexS::real(2.0), 1).unwrap();
        assert!((one.series.re - 1.0).abs() < 1e-15);
        assert!((one.integral_form.re - 1.0).abs() < 1e-15);
        // N = 3: M = 1, 2, 1; series = 1 + 1/4 - 1/9.
        let three = partial_summation_check(&a, ComplexS::real(2.0), 3).unwrap();
        let by_hand = 1.0 * (1.0 - 0.25) + 2.0 * (0.25 - 1.0 / 9.0) + 1.0 / 9.0;
        assert!((three.series.re - (1.0 + 0.25 - 1.0 / 9.0)).abs() < 1e-15);
        assert!((three.integral_form.re - by_hand).abs() < 1e-15);
    }

    #[test]
    fn sigma_sequences() {
        let g = SigmaSequence::geometric(3).unwrap();
        assert_eq!(g.values(), &[1.0, 0.75, 0.625]);
        assert!(SigmaSequence::new(vec![0.7, 0.7]).is_err());
        assert!(SigmaSequence::new(vec![0.7, 0.5]).is_err());
        assert!(SigmaSequence::new(vec![]).is_err());
    }

    #[test]
    fn schedule_clamps() {
        let s = TruncationSchedule::default();
        assert_eq!(s.p_max(1.0), 1_000);
        assert_eq!(s.p_max(0.5 + 1.0 / 64.0), 1_048_576);
        assert_eq!(s.p_max(0.5 + 1.0 / 1024.0), 100_000_000);
    }

    #[test]
    fn blowup_rejects_zero_t_and_matches_prime_sum() {
        let primes = PrimeList::up_to(70_000).unwrap();
        let sig = SigmaSequence::new(vec![0.75]).unwrap();
        let sched = TruncationSchedule::default();
        let a = PrimeSignAssignment::rademacher(4);
        assert!(blowup_scan(&a, 0.0, &sig, &sched, &primes).is_err());
        let rows = blowup_scan(&a, 1.0, &sig, &sched, &primes).unwrap();
        let s = prime_sum_s(&a, &primes, 0.75, 1.0, 1_000).unwrap();
        let v = variance_v(&primes, 0.75, 1.0, 1_000).unwrap().truncated;
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].p_max, 1_000);
        assert!((rows[0].s - s).abs() < 1e-15);
        assert!((rows[0].normalized - s / v.sqrt()).abs() < 1e-14);
        // Not enough primes for the schedule.
        let deep = SigmaSequence::geometric(6).unwrap();
        assert!(blowup_scan(&a, 1.0, &deep, &sched, &primes).is_err());
    }

    #[test]
    fn halfline_accepts_sigma_only_input() {
        let primes = PrimeList::up_to(70_000).unwrap();
        let a = PrimeSignAssignment::rademacher(4);
        let rows = halfline_f_scan(
            &a,
            &SigmaSequence::geometric(4).unwrap(),
            &TruncationSchedule::default(),
            &primes,
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows[0].ratio.is_none());
        for r in &rows {
            let direct = euler_product(&a, &primes, ComplexS::real(r.sigma), r.p_max).unwrap();
            assert!((direct.re - r.f_value).abs() / r.f_value < 1e-10);
        }
    }

    #[test]
    fn local_factor_table_matches_direct_log() {
        let primes = PrimeList::up_to(5_000).unwrap();
        let t = LocalFactors::new(&primes, 0.6, 5_000).unwrap();
        for a in [PrimeSignAssignment::rademacher(2), forced(&[(2, -1), (3, 1)])] {
            let direct = log_euler_product_real(&a, &primes, 0.6, 5_000).unwrap();
            assert!((t.log_f(&a).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn characteristic_function_at_zero_is_one() {
        let primes = PrimeList::up_to(1000).unwrap();
        let w = PrimeWeights::new(&primes, 0.6, 1.0, 1000).unwrap();
        assert_eq!(w.characteristic_function(0.0), 1.0);
        assert!(w.characteristic_function(1.0) < 1.0);
    }

    #[test]
    fn sign_bit_route_matches_unit_route() {
        let primes = PrimeList::up_to(10_000).unwrap();
        let w = PrimeWeights::new(&primes, 0.65, 2.5, 10_000).unwrap();
        for a in [
            PrimeSignAssignment::rademacher(5),
            PrimeSignAssignment::rademacher(5).negated(),
            forced(&[(7, -1), (11, 1)]),
        ] {
            let naive: f64 = w
                .primes()
                .iter()
                .zip(w.weights())
                .map(|(&p, &x)| a.prime_sign_real(p as u64) * x)
                .sum();
            assert!((w.sum(&a).unwrap() - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn expm1_helper_is_accurate() {
        let z = Complex64::new(1e-9, -2e-9);
        let e = complex_expm1(z);
        assert!((e - z).norm() < 1e-17);
        let big = Complex64::new(0.3, 1.1);
        assert!((complex_expm1(big) - (big.exp() - 1.0)).norm() < 1e-15);
    }
}
