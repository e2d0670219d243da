//! Trajectory analytics over 1D and 2D walks.
//!
//! Every operation exists in two forms: a streaming tracker that consumes
//! `(n, M(n))` one point at a time (used for long runs), and a convenience
//! function over a materialized [`WalkSeries`].

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kahan::KahanSum;
use crate::quad::adaptive_gk15;
use crate::rmf::{GaussInt, WalkSeries};

/// Extremal drifts vanish below this point so that `log log x > 0`.
pub const EXTREMAL_START: f64 = 16.0;

/// Relative tolerance for drift quadrature.
pub const DRIFT_QUAD_RTOL: f64 = 1e-9;

/// Deterministic perturbation `λ(x)` added to the walk before sign analysis.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum DriftSpec {
    #[default]
    Zero,
    /// `+√x / (log x · (log log x)²)` for `x >= 16`, zero before.
    PlusExtremal,
    /// The negative of [`DriftSpec::PlusExtremal`].
    MinusExtremal,
    Custom(TabulatedDrift),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriftKind {
    Zero,
    PlusExtremal,
    MinusExtremal,
    Custom,
}

impl DriftKind {
    /// The built-in drift of this kind; custom drifts need their knots.
    pub fn to_spec(self) -> Result<DriftSpec> {
        match self {
            DriftKind::Zero => Ok(DriftSpec::Zero),
            DriftKind::PlusExtremal => Ok(DriftSpec::PlusExtremal),
            DriftKind::MinusExtremal => Ok(DriftSpec::MinusExtremal),
            DriftKind::Custom => Err(invalid("a custom drift must be built from its knots")),
        }
    }
}

/// Piecewise-linear drift through `(x, λ)` knots, held constant outside the
/// knot range.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDrift {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl TabulatedDrift {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(invalid("tabulated drift needs equally many (nonzero) x and y knots"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("tabulated drift knots must be strictly increasing"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(invalid("tabulated drift values must be finite"));
        }
        Ok(Self { xs, ys })
    }

    fn eval(&self, x: f64) -> f64 {
        let k = self.xs.partition_point(|&k| k <= x);
        if k == 0 {
            return self.ys[0];
        }
        if k == self.xs.len() {
            return self.ys[k - 1];
        }
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let (y0, y1) = (self.ys[k - 1], self.ys[k]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

fn extremal(x: f64) -> f64 {
    if x < EXTREMAL_START {
        return 0.0;
    }
    let l = x.ln();
    let ll = l.ln();
    x.sqrt() / (l * ll * ll)
}

impl DriftSpec {
    pub fn kind(&self) -> DriftKind {
        match self {
            DriftSpec::Zero => DriftKind::Zero,
            DriftSpec::PlusExtremal => DriftKind::PlusExtremal,
            DriftSpec::MinusExtremal => DriftKind::MinusExtremal,
            DriftSpec::Custom(_) => DriftKind::Custom,
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind() {
            DriftKind::Zero => "zero",
            DriftKind::PlusExtremal => "plus-extremal",
            DriftKind::MinusExtremal => "minus-extremal",
            DriftKind::Custom => "custom",
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, DriftSpec::Zero)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match self {
            DriftSpec::Zero => 0.0,
            DriftSpec::PlusExtremal => extremal(x),
            DriftSpec::MinusExtremal => -extremal(x),
            DriftSpec::Custom(t) => t.eval(x),
        }
    }

    /// Whether `λ` vanishes identically on `[a, b)`.
    fn vanishes_on(&self, _a: f64, b: f64) -> bool {
        match self {
            DriftSpec::Zero => true,
            DriftSpec::PlusExtremal | DriftSpec::MinusExtremal => b <= EXTREMAL_START,
            DriftSpec::Custom(_) => false,
        }
    }

    /// `∫_a^b λ(u) u^{-3/2} du` by adaptive Gauss–Kronrod quadrature.
    pub fn weighted_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a || self.is_zero() {
            return 0.0;
        }
        let mut lo = a;
        if matches!(self, DriftSpec::PlusExtremal | DriftSpec::MinusExtremal) {
            if b <= EXTREMAL_START {
                return 0.0;
            }
            lo = lo.max(EXTREMAL_START);
        }
        adaptive_gk15(
            &|u: f64| self.value(u) * u.powf(-1.5),
            lo,
            b,
            DRIFT_QUAD_RTOL,
        )
    }
}

#[inline]
fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Sign changes of `g(n) = M(n) + λ(n)` along a 1D walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignChangeRecord {
    pub seed: u64,
    pub limit: u64,
    pub change_positions: Vec<u64>,
    pub count: usize,
    pub first_change: Option<u64>,
    pub last_change: Option<u64>,
}

/// Streaming sign-change counter.
///
/// Zeros of `g` are skipped; a change is recorded at the `n` where the new
/// strict sign first appears.
#[derive(Debug, Clone)]
pub struct SignChangeTracker {
    drift: DriftSpec,
    last_sign: i8,
    positions: Vec<u64>,
    last_n: u64,
}

impl SignChangeTracker {
    pub fn new(drift: DriftSpec) -> Self {
        Self {
            drift,
            last_sign: 0,
            positions: Vec::new(),
            last_n: 0,
        }
    }

    #[inline]
    pub fn push(&mut self, n: u64, m: i64) {
        let g = if self.drift.is_zero() {
            m as f64
        } else {
            m as f64 + self.drift.value(n as f64)
        };
        self.push_value(n, g);
    }

    #[inline]
    pub fn push_value(&mut self, n: u64, g: f64) {
        self.last_n = n;
        let s = sign_of(g);
        if s == 0 {
            return;
        }
        if self.last_sign != 0 && s != self.last_sign {
            self.positions.push(n);
        }
        self.last_sign = s;
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn finish(self, seed: u64) -> SignChangeRecord {
        SignChangeRecord {
            seed,
            limit: self.last_n,
            count: self.positions.len(),
            first_change: self.positions.first().copied(),
            last_change: self.positions.last().copied(),
            change_positions: self.positions,
        }
    }
}

/// Positions (1-based) where a sequence `g(1), g(2), ...` completes a sign change.
pub fn sign_changes_of_values(values: &[f64]) -> Vec<u64> {
    let mut t = SignChangeTracker::new(DriftSpec::Zero);
    for (i, &g) in values.iter().enumerate() {
        t.push_value(i as u64 + 1, g);
    }
    t.positions
}

pub fn sign_changes(walk: &WalkSeries, drift: &DriftSpec) -> Result<SignChangeRecord> {
    let values = walk
        .as_1d()
        .ok_or_else(|| invalid("sign changes are undefined for a 2D walk"))?;
    let mut t = SignChangeTracker::new(drift.clone());
    for (i, &m) in values.iter().enumerate() {
        t.push(i as u64 + 1, m);
    }
    Ok(t.finish(walk.seed()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub target: (i64, i64),
    pub visit_positions: Vec<u64>,
    pub count: usize,
}

#[derive(Debug, Clone)]
pub struct VisitTracker {
    target: GaussInt,
    positions: Vec<u64>,
}

impl VisitTracker {
    pub fn new(target: GaussInt) -> Self {
        Self {
            target,
            positions: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, n: u64, value: GaussInt) {
        if value == self.target {
            self.positions.push(n);
        }
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn finish(self) -> VisitRecord {
        VisitRecord {
            target: (self.target.re, self.target.im),
            count: self.positions.len(),
            visit_positions: self.positions,
        }
    }
}

/// All `n <= N` with `M(n) = target`, ascending.
pub fn visits(walk: &WalkSeries, target: impl Into<GaussInt>) -> VisitRecord {
    let mut t = VisitTracker::new(target.into());
    for (n, v) in walk.points() {
        t.push(n, v);
    }
    t.finish()
}

/// Returns to the origin of a 2D walk.
pub fn zero_hits_2d(walk: &WalkSeries) -> Result<VisitRecord> {
    if walk.as_2d().is_none() {
        return Err(invalid("zero hits are defined for 2D walks only"));
    }
    Ok(visits(walk, GaussInt::ZERO))
}

/// `∫_a^b u^{-3/2} du` for `1 <= a < b`, written to avoid cancellation.
#[inline]
pub(crate) fn inv_sqrt_gap(a: f64, b: f64) -> f64 {
    let (sa, sb) = (a.sqrt(), b.sqrt());
    2.0 * (b - a) / (sa * sb * (sa + sb))
}

/// Streaming evaluation of `∫_1^x u^{-3/2} (λ(u) + M(u)) du`, optionally with
/// the absolute value inside.
///
/// `M` is constant on each `[n, n+1)`, so its contribution is summed in closed
/// form; only the drift part is integrated numerically. With the absolute flag
/// a unit interval is split wherever `M + λ` changes sign.
#[derive(Debug, Clone)]
pub struct IntegralAccumulator {
    drift: DriftSpec,
    absolute: bool,
    sum: KahanSum,
    prev: Option<(u64, i64)>,
}

impl IntegralAccumulator {
    pub fn new(drift: DriftSpec, absolute: bool) -> Self {
        Self {
            drift,
            absolute,
            sum: KahanSum::new(),
            prev: None,
        }
    }

    /// Feeds `M(n)`; points must arrive as `n = 1, 2, 3, ...`.
    #[inline]
    pub fn push(&mut self, n: u64, m: i64) {
        if let Some((pn, pm)) = self.prev {
            debug_assert_eq!(pn + 1, n);
            let piece = self.piece(pn, pm);
            self.sum.add(piece);
        }
        self.prev = Some((n, m));
    }

    /// Integral from 1 up to the last `n` pushed.
    pub fn value(&self) -> f64 {
        self.sum.value()
    }

    fn piece(&self, n: u64, m: i64) -> f64 {
        let a = n as f64;
        let b = a + 1.0;
        let mf = m as f64;
        if self.drift.vanishes_on(a, b) {
            let w = inv_sqrt_gap(a, b);
            return if self.absolute { mf.abs() * w } else { mf * w };
        }
        if !self.absolute {
            return mf * inv_sqrt_gap(a, b) + self.drift.weighted_integral(a, b);
        }
        let h = |u: f64| mf + self.drift.value(u);
        let signed = |lo: f64, hi: f64| mf * inv_sqrt_gap(lo, hi) + self.drift.weighted_integral(lo, hi);

        // Probe for crossings on a uniform grid and bisect each bracket.
        const PROBES: usize = 4;
        let mut cuts = vec![a];
        let mut prev_u = a;
        let mut prev_h = h(a);
        for k in 1..=PROBES {
            let u = a + (b - a) * k as f64 / PROBES as f64;
            // Right end is approached from the left.
            let hu = if k == PROBES { h(b - 1e-12) } else { h(u) };
            if hu == 0.0 {
                if k < PROBES {
                    cuts.push(u);
                }
                continue;
            }
            if prev_h != 0.0 && prev_h * hu < 0.0 {
                cuts.push(bisect_root(&h, prev_u, u));
            }
            prev_u = u;
            prev_h = hu;
        }
        cuts.push(b);
        cuts.windows(2).map(|w| signed(w[0], w[1]).abs()).sum()
    }
}

fn bisect_root<F: Fn(f64) -> f64>(h: &F, mut lo: f64, mut hi: f64) -> f64 {
    let h_lo = h(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (h(mid) > 0.0) == (h_lo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫_1^x u^{-3/2} (λ(u) + M(u)) du` over a materialized 1D walk.
pub fn weighted_integral(
    walk: &WalkSeries,
    drift: &DriftSpec,
    x: u64,
    absolute: bool,
) -> Result<f64> {
    let values = walk
        .as_1d()
        .ok_or_else(|| invalid("weighted integral needs a 1D walk"))?;
    if x == 0 || x > walk.limit() {
        return Err(invalid(format!(
            "integral endpoint {x} outside 1..={}",
            walk.limit()
        )));
    }
    let mut acc = IntegralAccumulator::new(drift.clone(), absolute);
    for (i, &m) in values[..x as usize].iter().enumerate() {
        acc.push(i as u64 + 1, m);
    }
    Ok(acc.value())
}

/// Running maximum of `|M(y)|` for `y <= x` sampled at the given checkpoints.
#[derive(Debug, Clone)]
pub struct RunningMaxTracker {
    checkpoints: Vec<u64>,
    next: usize,
    max_abs: i64,
    samples: Vec<(u64, i64)>,
}

impl RunningMaxTracker {
    pub fn new(mut checkpoints: Vec<u64>) -> Self {
        checkpoints.sort_unstable();
        checkpoints.dedup();
        Self {
            checkpoints,
            next: 0,
            max_abs: 0,
            samples: Vec::new(),
        }
    }

    #[inline]
    pub fn push(&mut self, n: u64, m: i64) {
        self.max_abs = self.max_abs.max(m.abs());
        while self.next < self.checkpoints.len() && self.checkpoints[self.next] == n {
            self.samples.push((n, self.max_abs));
            self.next += 1;
        }
    }

    pub fn max_abs(&self) -> i64 {
        self.max_abs
    }

    pub fn samples(&self) -> &[(u64, i64)] {
        &self.samples
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rmf::{PrimeSignAssignment, Unit};

    #[test]
    fn sign_change_value_examples() {
        assert_eq!(sign_changes_of_values(&[1.0, -1.0, 0.0, -1.0, 2.0]), vec![2, 5]);
        assert!(sign_changes_of_values(&[1.0, 0.0, 0.0, 2.0]).is_empty());
        assert!(sign_changes_of_values(&[0.0, 0.0]).is_empty());
        assert_eq!(sign_changes_of_values(&[0.0, -3.0, 0.0, 4.0, 0.0, -1.0]), vec![4, 6]);
    }

    #[test]
    fn sign_changes_reject_2d() {
        let w = WalkSeries::generate(&PrimeSignAssignment::quarternary(1), 10).unwrap();
        assert!(sign_changes(&w, &DriftSpec::Zero).is_err());
    }

    #[test]
    fn record_fields_are_consistent() {
        let w = WalkSeries::from_values_1d(9, vec![1, 0, -1, -2, 0, 3, 2, -1]).unwrap();
        let r = sign_changes(&w, &DriftSpec::Zero).unwrap();
        assert_eq!(r.change_positions, vec![3, 6, 8]);
        assert_eq!(r.count, 3);
        assert_eq!(r.first_change, Some(3));
        assert_eq!(r.last_change, Some(8));
        assert_eq!((r.seed, r.limit), (9, 8));
    }

    #[test]
    fn extremal_drift_head_is_zero() {
        for x in [1.0, 2.0, 10.0, 15.999] {
            assert_eq!(DriftSpec::PlusExtremal.value(x), 0.0);
        }
        let v = DriftSpec::PlusExtremal.value(1e6);
        let l = 1e6f64.ln();
        assert!((v - 1000.0 / (l * l.ln().powi(2))).abs() < 1e-12);
        assert_eq!(DriftSpec::MinusExtremal.value(1e6), -v);
    }

    #[test]
    fn extremal_drift_quadrature_matches_antiderivative() {
        // d/du[-1/log log u] = 1/(u log u (log log u)^2) = λ(u) u^{-3/2}
        let anti = |u: f64| -1.0 / u.ln().ln();
        for (a, b) in [(16.0, 17.0), (16.0, 1e4), (100.0, 1e7), (3.0, 40.0)] {
            let q = DriftSpec::PlusExtremal.weighted_integral(a, b);
            let exact = anti(b) - anti(f64::max(a, EXTREMAL_START));
            assert!(((q - exact) / exact).abs() < 1e-9, "[{a},{b}] {q} vs {exact}");
        }
    }

    #[test]
    fn extremal_drift_tail_bound_decreases() {
        // ∫_X^∞ |λ| u^{-3/2} du = 1 / log log X, which shrinks as X grows.
        let tails: Vec<f64> = [1e2, 1e4, 1e8, 1e16]
            .iter()
            .map(|&x: &f64| 1.0 / x.ln().ln())
            .collect();
        assert!(tails.windows(2).all(|w| w[1] < w[0]));
        let q = DriftSpec::MinusExtremal.weighted_integral(1e2, 1e8);
        assert!((q.abs() - (tails[0] - tails[2])).abs() < 1e-9);
    }

    #[test]
    fn tabulated_drift_interpolates() {
        let t = TabulatedDrift::new(vec![1.0, 3.0], vec![0.0, 2.0]).unwrap();
        let d = DriftSpec::Custom(t);
        assert_eq!(d.value(2.0), 1.0);
        assert_eq!(d.value(0.0), 0.0);
        assert_eq!(d.value(10.0), 2.0);
        assert!(TabulatedDrift::new(vec![2.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(TabulatedDrift::new(vec![], vec![]).is_err());
    }

    #[test]
    fn visit_examples() {
        let a = PrimeSignAssignment::rademacher(0)
            .with_forced(2, Unit::ONE)
            .unwrap()
            .with_forced(3, Unit::ONE)
            .unwrap()
            .with_forced(5, Unit::MINUS_ONE)
            .unwrap();
        let w = WalkSeries::generate(&a, 6).unwrap();
        assert_eq!(visits(&w, 3).visit_positions, vec![3, 4, 6]);
        assert_eq!(visits(&w, 1).visit_positions, vec![1]);
    }

    #[test]
    fn zero_hit_examples() {
        let w = WalkSeries::generate(&PrimeSignAssignment::quarternary(3), 1).unwrap();
        assert_eq!(zero_hits_2d(&w).unwrap().count, 0);
        let a = PrimeSignAssignment::quarternary(3)
            .with_forced(2, Unit::MINUS_ONE)
            .unwrap();
        let w = WalkSeries::generate(&a, 2).unwrap();
        assert_eq!(zero_hits_2d(&w).unwrap().visit_positions, vec![2]);
        let w1 = WalkSeries::generate(&PrimeSignAssignment::rademacher(3), 5).unwrap();
        assert!(zero_hits_2d(&w1).is_err());
    }

    #[test]
    fn integral_examples() {
        let w = WalkSeries::from_values_1d(0, vec![1, 1, 1, 1]).unwrap();
        let v = weighted_integral(&w, &DriftSpec::Zero, 4, true).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(weighted_integral(&w, &DriftSpec::Zero, 1, true).unwrap(), 0.0);
        assert!(weighted_integral(&w, &DriftSpec::Zero, 5, true).is_err());
    }

    #[test]
    fn absolute_integral_splits_at_crossing() {
        // M = -1 on [20, 21) with λ(u) = u - 19.5, so M + λ crosses zero at u = 20.5.
        let d = DriftSpec::Custom(TabulatedDrift::new(vec![0.0, 100.0], vec![-19.5, 80.5]).unwrap());
        let mut acc = IntegralAccumulator::new(d.clone(), true);
        acc.prev = Some((20, -1));
        acc.push(21, 0);
        let h = |u: f64| ((u - 20.5) * u.powf(-1.5)).abs();
        // Midpoint oracle on a fine grid.
        let steps = 200_000;
        let dx = 1.0 / steps as f64;
        let oracle: f64 = (0..steps).map(|k| h(20.0 + (k as f64 + 0.5) * dx) * dx).sum();
        assert!((acc.value() - oracle).abs() < 1e-9, "{} vs {oracle}", acc.value());
    }
}
