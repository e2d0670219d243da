//! Small statistical toolkit: normal CDF, Kolmogorov–Smirnov distance against
//! the standard normal, tail frequencies and log-log growth fits.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// A nonempty multiset of finite reals with a cached sorted view.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("sample must be nonempty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample values must be finite"));
        }
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { values, sorted })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    /// Linear-interpolated quantile, `q` in `[0, 1]`.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let pos = q * (self.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = pos - lo as f64;
        self.sorted[lo] + (self.sorted[hi] - self.sorted[lo]) * frac
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.len() - 1]
    }
}

/// `Φ(x)` for the standard normal, via the complementary error function
/// (FreeBSD/Sun rational approximations as shipped in `libm`, error well
/// below 1e-15 absolute).
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// `1 - Φ(x)` without cancellation for large `x`.
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reference {
    StdNormal,
}

impl Reference {
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Reference::StdNormal => std_normal_cdf(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub distance: f64,
    pub n: usize,
    pub reference: Reference,
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n - F|`.
pub fn ks_distance(sample: &Sample, reference: Reference) -> KsReport {
    let n = sample.len() as f64;
    let distance = sample
        .sorted()
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = reference.cdf(x);
            let above = (i + 1) as f64 / n - c;
            let below = c - i as f64 / n;
            above.abs().max(below.abs())
        })
        .fold(0.0, f64::max);
    KsReport {
        distance: distance.clamp(0.0, 1.0),
        n: sample.len(),
        reference,
    }
}

/// Fraction of values with `|v| >= lambda`.
pub fn tail_frequency(sample: &Sample, lambda: f64) -> f64 {
    let hits = sample.values().iter().filter(|v| v.abs() >= lambda).count();
    hits as f64 / sample.len() as f64
}

/// Least-squares fit `log y = slope · log x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits the growth exponent of running maxima `(x, max_{y<=x} |M(y)|)`.
///
/// Needs at least three points with positive coordinates spanning two decades in `x`.
pub fn growth_fit(points: &[(f64, f64)]) -> Result<GrowthFit> {
    if points.len() < 3 {
        return Err(invalid("growth fit needs at least 3 points"));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(invalid("growth fit needs positive finite coordinates"));
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    if hi / lo < 100.0 {
        return Err(invalid("growth fit points must span at least two decades"));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(GrowthFit {
        slope,
        intercept: my - slope * mx,
        points: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + k as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        // Oracle: Simpson quadrature of the Gaussian density on [1, 40].
        let density = |s: f64| (-s * s / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let tail = simpson(density, 1.0, 40.0, 400_000);
        assert!((tail - 0.158_655_25).abs() < 1e-7);
        assert!(((1.0 - std_normal_cdf(1.0)) - tail).abs() < 1e-10);
        for x in [0.5, 1.0, 2.0, 3.0] {
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_matches_quadrature_across_range() {
        let density = |s: f64| (-s * s / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        for x in [-6.0, -3.3, -1.0, -0.2, 0.7, 2.5, 5.0] {
            let q = 0.5 + simpson(density, 0.0, x, 20_000);
            assert!((std_normal_cdf(x) - q).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn ks_examples() {
        let r = ks_distance(&Sample::new(vec![0.0]).unwrap(), Reference::StdNormal);
        assert!((r.distance - 0.5).abs() < 1e-15);
        assert!(Sample::new(vec![]).is_err());
    }

    #[test]
    fn tail_frequency_examples() {
        assert_eq!(tail_frequency(&Sample::new(vec![0.0; 5]).unwrap(), 1.0), 0.0);
        assert_eq!(tail_frequency(&Sample::new(vec![-2.0, 2.0]).unwrap(), 1.0), 1.0);
    }

    #[test]
    fn growth_fit_examples() {
        let sqrt_pts: Vec<(f64, f64)> = (1..=7).map(|k| {
            let x = 10f64.powi(k);
            (x, x.sqrt())
        }).collect();
        assert!((growth_fit(&sqrt_pts).unwrap().slope - 0.5).abs() < 1e-12);
        let lin: Vec<(f64, f64)> = (1..=7).map(|k| (10f64.powi(k), 10f64.powi(k))).collect();
        assert!((growth_fit(&lin).unwrap().slope - 1.0).abs() < 1e-12);
        assert!(growth_fit(&sqrt_pts[..2]).is_err());
        assert!(growth_fit(&[(10.0, 1.0), (20.0, 2.0), (500.0, 3.0)]).is_err());
    }

    #[test]
    fn quantiles() {
        let s = Sample::new(vec![3.0, 1.0, 2.0, 4.0]).unwrap();
        assert_eq!(s.median(), 2.5);
        assert_eq!(s.min(), 1.0);
        assert_eq!(s.max(), 4.0);
        assert_eq!(s.quantile(1.0), 4.0);
    }
}
