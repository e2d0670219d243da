//! Independent reference implementations used as test oracles. Nothing here
//! calls into the sieve or the walk machinery of the crate under test.

#![allow(dead_code)]

/// Prime factorization by trial division.
pub fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime_trial(n: u64) -> bool {
    n >= 2 && trial_factor(n) == vec![(n, 1)]
}

/// Plain sieve of Eratosthenes over a byte array.
pub fn eratosthenes(limit: usize) -> Vec<bool> {
    let mut is_prime = vec![true; limit + 1];
    is_prime[0] = false;
    if limit >= 1 {
        is_prime[1] = false;
    }
    let mut i = 2;
    while i * i <= limit {
        if is_prime[i] {
            let mut j = i * i;
            while j <= limit {
                is_prime[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    is_prime
}

/// SplitMix64 output function, written out from its published constants.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sign of `f(p)` under the documented hash recipe, 1D model.
pub fn oracle_sign(seed: u64, p: u64) -> i64 {
    let h = mix(seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    if h >> 63 == 0 {
        1
    } else {
        -1
    }
}

/// Power `k` of `f(p) = i^k` under the documented hash recipe, 2D model.
pub fn oracle_power(seed: u64, p: u64) -> u32 {
    (mix(seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15)) >> 62) as u32
}

/// `f(n)` in the 1D model by trial division.
pub fn naive_f(seed: u64, n: u64) -> i64 {
    let mut v = 1;
    for (p, e) in trial_factor(n) {
        if e > 1 {
            return 0;
        }
        v *= oracle_sign(seed, p);
    }
    v
}

/// Squarefree indicator for `1..=limit` by striking multiples of every square.
pub fn squarefree_table(limit: usize) -> Vec<bool> {
    let mut sf = vec![true; limit + 1];
    sf[0] = false;
    let mut d = 2;
    while d * d <= limit {
        let mut j = d * d;
        while j <= limit {
            sf[j] = false;
            j += d * d;
        }
        d += 1;
    }
    sf
}

/// Uniform draws in (0, 1) from a SplitMix64 counter stream.
pub struct Uniform(u64);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        ((mix(self.0) >> 11) as f64 + 0.5) / (1u64 << 53) as f64
    }
}
