use rmwalk_core::analysis::{
    sign_changes, sign_changes_of_values, visits, weighted_integral, zero_hits_2d, DriftSpec,
    RunningMaxTracker,
};
use rmwalk_core::{GaussInt, PrimeSignAssignment, WalkSeries};

fn walk_1d(seed: u64, n: u64) -> WalkSeries {
    WalkSeries::generate(&PrimeSignAssignment::rademacher(seed), n).unwrap()
}

fn naive_changes(values: &[f64]) -> Vec<u64> {
    let nonzero: Vec<(u64, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (i as u64 + 1, v.signum()))
        .collect();
    nonzero
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| w[1].0)
        .collect()
}

fn extremal(u: f64) -> f64 {
    if u < 16.0 {
        0.0
    } else {
        let l = u.ln();
        u.sqrt() / (l * l.ln().powi(2))
    }
}

/// Midpoint rule with step `h` for `∫_1^x u^{-3/2} g(u) du`, `M` piecewise constant.
fn riemann(values: &[i64], drift: impl Fn(f64) -> f64, x: u64, absolute: bool, h: f64) -> f64 {
    let steps = ((x - 1) as f64 / h).round() as u64;
    let mut sum = 0.0;
    for k in 0..steps {
        let u = 1.0 + (k as f64 + 0.5) * h;
        let g = values[u.floor() as usize - 1] as f64 + drift(u);
        let g = if absolute { g.abs() } else { g };
        sum += g * u.powf(-1.5);
    }
    sum * h
}

#[test]
fn sign_changes_match_two_pass_scan() {
    let w = walk_1d(42, 100_000);
    let values: Vec<f64> = w.as_1d().unwrap().iter().map(|&m| m as f64).collect();
    let rec = sign_changes(&w, &DriftSpec::Zero).unwrap();
    let naive = naive_changes(&values);
    assert_eq!(rec.change_positions, naive);
    assert_eq!(rec.count, naive.len());
    assert_eq!(rec.first_change, naive.first().copied());
    assert_eq!(rec.last_change, naive.last().copied());
}

#[test]
fn sign_changes_with_drift_match_two_pass_scan() {
    let w = walk_1d(8, 100_000);
    for (drift, sign) in [(DriftSpec::PlusExtremal, 1.0), (DriftSpec::MinusExtremal, -1.0)] {
        let values: Vec<f64> = w
            .as_1d()
            .unwrap()
            .iter()
            .enumerate()
            .map(|(i, &m)| m as f64 + sign * extremal(i as f64 + 1.0))
            .collect();
        assert_eq!(sign_changes(&w, &drift).unwrap().change_positions, naive_changes(&values));
    }
}

#[test]
fn sign_change_count_is_monotone_in_n() {
    let w = walk_1d(17, 100_000);
    let values: Vec<f64> = w.as_1d().unwrap().iter().map(|&m| m as f64).collect();
    let counts: Vec<usize> = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| sign_changes(&walk_1d(17, n), &DriftSpec::Zero).unwrap().count)
        .collect();
    assert!(counts.windows(2).all(|c| c[0] <= c[1]), "{counts:?}");
    assert_eq!(counts[1], sign_changes_of_values(&values[..10_000]).len());
}

#[test]
fn sign_changes_are_symmetric_under_negation() {
    let w = walk_1d(23, 100_000);
    let neg: Vec<i64> = w.as_1d().unwrap().iter().map(|m| -m).collect();
    let wn = WalkSeries::from_values_1d(23, neg).unwrap();
    let a = sign_changes(&w, &DriftSpec::Zero).unwrap();
    let b = sign_changes(&wn, &DriftSpec::Zero).unwrap();
    assert_eq!(a.change_positions, b.change_positions);
    let plus = sign_changes(&w, &DriftSpec::PlusExtremal).unwrap();
    let minus = sign_changes(&wn, &DriftSpec::MinusExtremal).unwrap();
    assert_eq!(plus.change_positions, minus.change_positions);
}

#[test]
fn visits_match_naive_scan() {
    let w = WalkSeries::generate(&PrimeSignAssignment::quarternary(7), 1_000_000).unwrap();
    let values = w.as_2d().unwrap();
    for z in [GaussInt::ZERO, GaussInt::new(1, 0), GaussInt::new(-1, 2)] {
        let naive: Vec<u64> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == z)
            .map(|(i, _)| i as u64 + 1)
            .collect();
        let rec = visits(&w, z);
        assert_eq!(rec.visit_positions, naive);
        assert_eq!(rec.count, naive.len());
    }
    assert_eq!(visits(&w, GaussInt::new(1, 0)).visit_positions[0], 1);
    assert_eq!(zero_hits_2d(&w).unwrap(), visits(&w, GaussInt::ZERO));
    assert!(zero_hits_2d(&walk_1d(7, 100)).is_err());
}

#[test]
fn zero_hits_over_an_ensemble() {
    let mut counts = Vec::new();
    for seed in 0..100 {
        let w = WalkSeries::generate(&PrimeSignAssignment::quarternary(seed), 1_000_000).unwrap();
        let rec = zero_hits_2d(&w).unwrap();
        for &n in &rec.visit_positions {
            assert_eq!(w.at(n), Some(GaussInt::ZERO));
        }
        counts.push(rec.count);
    }
    let hit = counts.iter().filter(|&&c| c > 0).count();
    println!("seeds returning to the origin: {hit}/100, max hits {}", counts.iter().max().unwrap());
}

#[test]
fn integral_matches_fine_riemann_sum() {
    let w = walk_1d(3, 100_000);
    let values = w.as_1d().unwrap();
    for absolute in [false, true] {
        let ours = weighted_integral(&w, &DriftSpec::Zero, 100_000, absolute).unwrap();
        let oracle = riemann(values, |_| 0.0, 100_000, absolute, 1e-2);
        let rel = (ours - oracle).abs() / oracle.abs().max(1e-12);
        assert!(rel <= 1e-3, "absolute={absolute}: {ours} vs {oracle}");
    }
}

#[test]
fn integral_with_drift_matches_fine_riemann_sum() {
    let w = walk_1d(4, 10_000);
    let values = w.as_1d().unwrap();
    for (drift, sign) in [(DriftSpec::PlusExtremal, 1.0), (DriftSpec::MinusExtremal, -1.0)] {
        for absolute in [false, true] {
            let ours = weighted_integral(&w, &drift, 10_000, absolute).unwrap();
            let oracle = riemann(values, |u| sign * extremal(u), 10_000, absolute, 1e-3);
            let rel = (ours - oracle).abs() / oracle.abs().max(1e-12);
            assert!(rel <= 1e-3, "{drift:?} absolute={absolute}: {ours} vs {oracle}");
        }
    }
}

#[test]
fn absolute_integral_dominates_and_grows() {
    let w = walk_1d(12, 100_000);
    let mut prev = 0.0;
    for x in [10, 100, 1_000, 10_000, 100_000] {
        let signed = weighted_integral(&w, &DriftSpec::Zero, x, false).unwrap();
        let abs = weighted_integral(&w, &DriftSpec::Zero, x, true).unwrap();
        assert!(abs + 1e-12 >= signed.abs(), "x = {x}");
        assert!(abs >= prev, "x = {x}");
        prev = abs;
    }
    assert_eq!(weighted_integral(&w, &DriftSpec::Zero, 1, true).unwrap(), 0.0);
    assert!(weighted_integral(&w, &DriftSpec::Zero, 100_001, true).is_err());
}

#[test]
fn running_max_matches_prefix_scan() {
    let w = walk_1d(5, 100_000);
    let values = w.as_1d().unwrap();
    let checkpoints = vec![10, 1_000, 100_000, 50];
    let mut t = RunningMaxTracker::new(checkpoints);
    for (i, &m) in values.iter().enumerate() {
        t.push(i as u64 + 1, m);
    }
    for &(x, max) in t.samples() {
        let naive = values[..x as usize].iter().map(|m| m.abs()).max().unwrap();
        assert_eq!(max, naive, "x = {x}");
    }
    assert_eq!(t.samples().len(), 4);
}
