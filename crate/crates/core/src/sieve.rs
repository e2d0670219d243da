//! Prime infrastructure: smallest-prime-factor tables, factorization, prime
//! lists and a segmented block factorizer used by the walk generator.
//!
//! Tables up to [`LINEAR_SIEVE_MAX`] are built with the linear (Euler) sieve.
//! Larger tables are filled block by block from the base primes below the
//! square root, which keeps construction cache friendly. Walk generation never
//! needs a full table: [`BlockFactorizer`] streams squarefree information one
//! block at a time using only the base primes.

use crate::error::{invalid, Error, Result};

/// Largest limit accepted by [`build_spf`].
pub const MAX_SIEVE_LIMIT: u64 = 1 << 32;

/// Above this limit [`build_spf`] switches from the linear sieve to the
/// segmented fill.
pub const LINEAR_SIEVE_MAX: u64 = 100_000_000;

/// Default width of one segment in the segmented sieves.
pub const DEFAULT_BLOCK_WIDTH: usize = 1 << 20;

/// Environment variable holding the sieve memory cap in megabytes.
pub const MEMORY_CAP_ENV: &str = "RMWALK_MAX_MEMORY_MB";

const DEFAULT_MEMORY_CAP_MB: u64 = 2048;

/// Upper bound on bytes the sieve layer may allocate for a single structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemoryCap {
    bytes: u64,
}

impl MemoryCap {
    pub fn from_megabytes(mb: u64) -> Self {
        Self {
            bytes: mb.saturating_mul(1 << 20),
        }
    }

    /// Reads [`MEMORY_CAP_ENV`]; unset or unparsable values fall back to 2048 MB.
    pub fn from_env() -> Self {
        let mb = std::env::var(MEMORY_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u64>().ok())
            .unwrap_or(DEFAULT_MEMORY_CAP_MB);
        Self::from_megabytes(mb)
    }

    pub fn unlimited() -> Self {
        Self { bytes: u64::MAX }
    }

    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn check(&self, what: &'static str, requested_bytes: u64) -> Result<()> {
        if requested_bytes > self.bytes {
            Err(Error::ResourceLimit {
                what,
                requested_bytes,
                cap_bytes: self.bytes,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for MemoryCap {
    fn default() -> Self {
        Self::from_env()
    }
}

/// Smallest-prime-factor table for `2..=limit`.
///
/// Immutable after construction; share it freely between threads.
#[derive(Debug, Clone)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
    primes: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpfStrategy {
    /// Linear sieve up to [`LINEAR_SIEVE_MAX`], segmented fill above.
    Auto,
    Linear,
    Segmented,
}

/// Builds the table with the default strategy and the environment memory cap.
pub fn build_spf(limit: u64) -> Result<SpfTable> {
    SpfTable::build(limit, SpfStrategy::Auto, MemoryCap::from_env())
}

impl SpfTable {
    pub fn build(limit: u64, strategy: SpfStrategy, cap: MemoryCap) -> Result<Self> {
        if limit < 2 {
            return Err(invalid(format!("sieve limit must be at least 2, got {limit}")));
        }
        if limit > MAX_SIEVE_LIMIT {
            return Err(invalid(format!(
                "sieve limit {limit} exceeds the 32-bit table cap {MAX_SIEVE_LIMIT}"
            )));
        }
        let estimated_primes = approx_prime_count(limit);
        let bytes = (limit + 1) * 4 + estimated_primes * 4;
        cap.check("smallest-prime-factor table", bytes)?;

        let linear = match strategy {
            SpfStrategy::Auto => limit <= LINEAR_SIEVE_MAX,
            SpfStrategy::Linear => true,
            SpfStrategy::Segmented => false,
        };
        let (spf, primes) = if linear {
            linear_sieve(limit as usize)
        } else {
            segmented_spf(limit as usize)
        };
        Ok(Self { limit, spf, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Smallest prime factor of `n` for `2 <= n <= limit`.
    #[inline]
    pub fn spf(&self, n: u64) -> Option<u64> {
        if (2..=self.limit).contains(&n) {
            Some(self.spf[n as usize] as u64)
        } else {
            None
        }
    }

    #[inline]
    pub fn is_prime(&self, n: u64) -> bool {
        self.spf(n) == Some(n)
    }

    /// All primes `<= bound`, ascending.
    pub fn primes_up_to(&self, bound: u64) -> Result<&[u32]> {
        if bound > self.limit {
            return Err(invalid(format!(
                "prime bound {bound} exceeds sieve limit {}",
                self.limit
            )));
        }
        let end = self.primes.partition_point(|&p| (p as u64) <= bound);
        Ok(&self.primes[..end])
    }

    pub fn factorize(&self, n: u64) -> Result<Factorization> {
        if n == 0 || n > self.limit {
            return Err(invalid(format!(
                "cannot factorize {n}: outside 1..={}",
                self.limit
            )));
        }
        let mut factors: Vec<(u64, u32)> = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p, e));
        }
        Ok(Factorization { n, factors })
    }
}

/// `n` written as a product of prime powers with strictly increasing primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// Validates and wraps an explicit factor list.
    pub fn from_factors(factors: Vec<(u64, u32)>) -> Result<Self> {
        let mut n: u64 = 1;
        let mut prev = 1;
        for &(p, e) in &factors {
            if p <= prev || e == 0 {
                return Err(invalid(
                    "factor list must have strictly increasing primes and positive exponents",
                ));
            }
            prev = p;
            for _ in 0..e {
                n = n
                    .checked_mul(p)
                    .ok_or_else(|| invalid("factorization overflows u64"))?;
            }
        }
        Ok(Self { n, factors })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// `n = 1` is squarefree with an empty factor list.
    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    pub fn product(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e))
            .product()
    }
}

fn approx_prime_count(limit: u64) -> u64 {
    if limit < 17 {
        return 8;
    }
    let x = limit as f64;
    (1.26 * x / x.ln()).ceil() as u64
}

fn linear_sieve(limit: usize) -> (Vec<u32>, Vec<u32>) {
    let mut spf = vec![0u32; limit + 1];
    let mut primes: Vec<u32> = Vec::with_capacity(approx_prime_count(limit as u64) as usize);
    for i in 2..=limit {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > si || ip > limit {
                break;
            }
            spf[ip] = p;
        }
    }
    (spf, primes)
}

fn segmented_spf(limit: usize) -> (Vec<u32>, Vec<u32>) {
    let base = simple_primes(isqrt(limit as u64) as usize);
    let mut spf = vec![0u32; limit + 1];
    let mut lo = 2usize;
    while lo <= limit {
        let hi = (lo + DEFAULT_BLOCK_WIDTH).min(limit + 1);
        for &p in &base {
            let p = p as usize;
            if p * p >= hi {
                break;
            }
            let mut m = (lo.div_ceil(p) * p).max(p * p);
            while m < hi {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
        for (n, slot) in spf[lo..hi].iter_mut().enumerate() {
            if *slot == 0 {
                *slot = (lo + n) as u32;
            }
        }
        lo = hi;
    }
    let primes = (2..=limit)
        .filter(|&n| spf[n] as usize == n)
        .map(|n| n as u32)
        .collect();
    (spf, primes)
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Plain Eratosthenes for small bounds (base primes of the segmented sieves).
fn simple_primes(bound: usize) -> Vec<u32> {
    if bound < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; bound + 1];
    let mut out = Vec::new();
    for i in 2..=bound {
        if !composite[i] {
            out.push(i as u32);
            let mut j = i * i;
            while j <= bound {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// All primes `<= bound` via a segmented sieve of Eratosthenes.
///
/// Memory is the output list plus one block, so this reaches 10^8 and beyond
/// where a full smallest-prime-factor table would not fit.
pub fn segmented_primes(bound: u64, cap: MemoryCap) -> Result<Vec<u32>> {
    if bound > MAX_SIEVE_LIMIT - 1 {
        return Err(invalid(format!("prime bound {bound} exceeds 32-bit range")));
    }
    if bound < 2 {
        return Ok(Vec::new());
    }
    let count = approx_prime_count(bound);
    cap.check("prime list", count * 4 + DEFAULT_BLOCK_WIDTH as u64)?;

    let base = simple_primes(isqrt(bound) as usize);
    let mut primes: Vec<u32> = Vec::with_capacity(count as usize);
    let mut block = vec![false; DEFAULT_BLOCK_WIDTH];
    let mut lo: u64 = 2;
    while lo <= bound {
        let hi = (lo + DEFAULT_BLOCK_WIDTH as u64).min(bound + 1);
        let width = (hi - lo) as usize;
        block[..width].fill(false);
        for &p in &base {
            let p = p as u64;
            if p * p >= hi {
                break;
            }
            let mut m = (lo.div_ceil(p) * p).max(p * p);
            while m < hi {
                block[(m - lo) as usize] = true;
                m += p;
            }
        }
        primes.extend(
            block[..width]
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(i, _)| (lo + i as u64) as u32),
        );
        lo = hi;
    }
    Ok(primes)
}

/// Ascending primes up to a fixed bound, shared read-only by the series code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeList {
    bound: u64,
    primes: Vec<u32>,
}

impl PrimeList {
    pub fn up_to(bound: u64) -> Result<Self> {
        Self::up_to_capped(bound, MemoryCap::from_env())
    }

    pub fn up_to_capped(bound: u64, cap: MemoryCap) -> Result<Self> {
        Ok(Self {
            bound,
            primes: segmented_primes(bound, cap)?,
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn all(&self) -> &[u32] {
        &self.primes
    }

    /// Primes `<= p_max`; fails if `p_max` exceeds the sieved bound.
    pub fn up_to_bound(&self, p_max: u64) -> Result<&[u32]> {
        if p_max > self.bound {
            return Err(invalid(format!(
                "prime bound {p_max} exceeds the sieved range {}",
                self.bound
            )));
        }
        let end = self.primes.partition_point(|&p| (p as u64) <= p_max);
        Ok(&self.primes[..end])
    }
}

/// Streams squarefree structure of `1..=limit` one block at a time.
///
/// For every `n` in the current block the factorizer reports each base prime
/// `p <= sqrt(limit)` dividing `n` (by its index in [`Self::base_primes`]) and,
/// after the block is complete, whether `n` is squarefree together with the
/// prime cofactor left once the base primes are divided out (`1` when `n`
/// is fully factored by base primes).
#[derive(Debug)]
pub struct BlockFactorizer {
    limit: u64,
    width: usize,
    base: Vec<u32>,
    next_lo: u64,
    product: Vec<u32>,
    squarefree: Vec<bool>,
}

/// One processed block: indices are offsets from [`Block::lo`].
#[derive(Debug)]
pub struct Block<'a> {
    pub lo: u64,
    product: &'a [u32],
    squarefree: &'a [bool],
}

impl Block<'_> {
    pub fn len(&self) -> usize {
        self.product.len()
    }

    pub fn is_empty(&self) -> bool {
        self.product.is_empty()
    }

    /// `None` if `lo + i` has a square factor; otherwise the cofactor left
    /// after removing base primes (either `1` or a prime above the base bound).
    #[inline]
    pub fn cofactor(&self, i: usize) -> Option<u64> {
        if self.squarefree[i] {
            Some((self.lo + i as u64) / self.product[i] as u64)
        } else {
            None
        }
    }
}

impl BlockFactorizer {
    pub fn new(limit: u64, width: usize, cap: MemoryCap) -> Result<Self> {
        if limit < 1 {
            return Err(invalid("walk limit must be at least 1"));
        }
        if limit >= MAX_SIEVE_LIMIT {
            return Err(invalid(format!(
                "limit {limit} exceeds the 32-bit sieve range"
            )));
        }
        if width == 0 {
            return Err(invalid("block width must be positive"));
        }
        let width = width.min(limit as usize);
        cap.check("factorizer block", width as u64 * 5)?;
        Ok(Self {
            limit,
            width,
            base: simple_primes(isqrt(limit) as usize),
            next_lo: 1,
            product: vec![1; width],
            squarefree: vec![true; width],
        })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn base_primes(&self) -> &[u32] {
        &self.base
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Processes the next block, calling `on_divisor(offset, base_index)` for
    /// every base prime dividing a squarefree-so-far member. Returns `None` once
    /// `limit` has been covered.
    pub fn next_block<F>(&mut self, mut on_divisor: F) -> Option<Block<'_>>
    where
        F: FnMut(usize, usize),
    {
        if self.next_lo > self.limit {
            return None;
        }
        let lo = self.next_lo;
        let hi = (lo + self.width as u64).min(self.limit + 1);
        let len = (hi - lo) as usize;
        let product = &mut self.product[..len];
        let squarefree = &mut self.squarefree[..len];
        product.fill(1);
        squarefree.fill(true);

        for (j, &p) in self.base.iter().enumerate() {
            let p = p as u64;
            let sq = p * p;
            let mut m = lo.div_ceil(sq) * sq;
            while m < hi {
                squarefree[(m - lo) as usize] = false;
                m += sq;
            }
            let mut m = lo.div_ceil(p) * p;
            while m < hi {
                let i = (m - lo) as usize;
                if squarefree[i] {
                    product[i] *= p as u32;
                    on_divisor(i, j);
                }
                m += p;
            }
        }
        self.next_lo = hi;
        Some(Block {
            lo,
            product: &self.product[..len],
            squarefree: &self.squarefree[..len],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    fn brute_squarefree(n: u64) -> bool {
        (2..).take_while(|d| d * d <= n).all(|d| n % (d * d) != 0)
    }

    #[test]
    fn small_table_examples() {
        let t = build_spf(10).unwrap();
        assert_eq!(t.spf(9), Some(3));
        assert_eq!(t.spf(7), Some(7));
        assert_eq!(t.spf(1), None);
        assert_eq!(t.spf(11), None);
    }

    #[test]
    fn rejects_tiny_limit() {
        assert!(matches!(build_spf(1), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_spf(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn memory_cap_is_enforced() {
        let err = SpfTable::build(10_000_000, SpfStrategy::Auto, MemoryCap::from_megabytes(1))
            .unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }

    #[test]
    fn factorize_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(t.factorize(12).unwrap().factors(), &[(2, 2), (3, 1)]);
        assert!(t.factorize(1).unwrap().factors().is_empty());
        assert!(t.factorize(1).unwrap().is_squarefree());
        assert_eq!(t.factorize(30).unwrap().factors(), &[(2, 1), (3, 1), (5, 1)]);
        assert!(t.factorize(0).is_err());
        assert!(t.factorize(101).is_err());
    }

    #[test]
    fn primes_up_to_examples() {
        let t = build_spf(100).unwrap();
        assert_eq!(t.primes_up_to(10).unwrap(), &[2, 3, 5, 7]);
        assert_eq!(t.primes_up_to(2).unwrap(), &[2]);
        assert!(t.primes_up_to(101).is_err());
    }

    #[test]
    fn spf_invariants_and_round_trip_exhaustive() {
        let t = build_spf(100_000).unwrap();
        for n in 2..=100_000u64 {
            let p = t.spf(n).unwrap();
            assert!(p >= 2 && p <= n && n % p == 0);
            assert_eq!(p == n, trial_division_is_prime(n), "n={n}");
            let f = t.factorize(n).unwrap();
            assert_eq!(f.product(), n);
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn squarefree_matches_brute_force() {
        let t = build_spf(10_000).unwrap();
        for n in 1..=10_000u64 {
            assert_eq!(t.factorize(n).unwrap().is_squarefree(), brute_squarefree(n), "n={n}");
        }
    }

    #[test]
    fn linear_and_segmented_strategies_agree() {
        let cap = MemoryCap::unlimited();
        let a = SpfTable::build(3_000_017, SpfStrategy::Linear, cap).unwrap();
        let b = SpfTable::build(3_000_017, SpfStrategy::Segmented, cap).unwrap();
        assert_eq!(a.spf, b.spf);
        assert_eq!(a.primes, b.primes);
    }

    #[test]
    fn segmented_primes_match_table() {
        let t = build_spf(1_000_000).unwrap();
        let list = segmented_primes(1_000_000, MemoryCap::unlimited()).unwrap();
        assert_eq!(list.as_slice(), t.primes_up_to(1_000_000).unwrap());
        assert_eq!(segmented_primes(1, MemoryCap::unlimited()).unwrap(), Vec::<u32>::new());
        assert_eq!(segmented_primes(2, MemoryCap::unlimited()).unwrap(), vec![2]);
    }

    #[test]
    fn block_factorizer_reconstructs_squarefree_structure() {
        let limit = 50_000u64;
        let t = build_spf(limit).unwrap();
        for width in [1usize, 7, 4096, 1 << 20] {
            let mut fz = BlockFactorizer::new(limit, width, MemoryCap::unlimited()).unwrap();
            let base: Vec<u64> = fz.base_primes().iter().map(|&p| p as u64).collect();
            let mut seen = 0u64;
            let mut divisors: Vec<Vec<u64>> = vec![Vec::new(); width.min(limit as usize)];
            loop {
                for d in divisors.iter_mut() {
                    d.clear();
                }
                let block = match fz.next_block(|i, j| divisors[i].push(base[j])) {
                    Some(b) => b,
                    None => break,
                };
                for i in 0..block.len() {
                    let n = block.lo + i as u64;
                    let f = t.factorize(n).unwrap();
                    match block.cofactor(i) {
                        None => assert!(!f.is_squarefree(), "n={n}"),
                        Some(q) => {
                            assert!(f.is_squarefree(), "n={n}");
                            let mut primes = divisors[i].clone();
                            if q > 1 {
                                assert!(t.is_prime(q));
                                primes.push(q);
                            }
                            let expected: Vec<u64> = f.factors().iter().map(|&(p, _)| p).collect();
                            assert_eq!(primes, expected, "n={n}");
                        }
                    }
                    seen += 1;
                }
            }
            assert_eq!(seen, limit);
        }
    }
}
