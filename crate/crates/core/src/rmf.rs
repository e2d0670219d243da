//! Random multiplicative functions and their partial-sum walks.
//!
//! Prime values are never stored. Each `f(p)` is a pure hash of `(seed, p)`,
//! so random access, streaming and segmented runs all see the same function:
//!
//! ```text
//! h = splitmix64_finalizer(seed ^ p.wrapping_mul(0x9E3779B97F4A7C15))
//! 1D: f(p) = +1 if the top bit of h is 0, else -1
//! 2D: f(p) = i^(h >> 62)
//! ```
//!
//! `f` is extended multiplicatively with support on the squarefree integers,
//! and `M(x) = sum_{n <= x} f(n)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sieve::{BlockFactorizer, Factorization, MemoryCap, DEFAULT_BLOCK_WIDTH};

/// Default cap on materialized walk length.
pub const DEFAULT_MATERIALIZE_CAP: u64 = 10_000_000;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Standard SplitMix64 output finalizer.
#[inline]
pub fn splitmix64_finalizer(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn prime_hash(seed: u64, p: u64) -> u64 {
    splitmix64_finalizer(seed ^ p.wrapping_mul(GOLDEN_GAMMA))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Independent fair `±1` on primes.
    #[serde(rename = "1d")]
    Rademacher1D,
    /// Independent uniform values in `{1, i, -1, -i}` on primes.
    #[serde(rename = "2d")]
    Quarternary2D,
}

impl Model {
    pub fn is_1d(self) -> bool {
        matches!(self, Model::Rademacher1D)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Rademacher1D => "1d",
            Model::Quarternary2D => "2d",
        })
    }
}

/// A fourth root of unity, stored as the exponent `k` in `i^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Unit(u8);

impl Unit {
    pub const ONE: Unit = Unit(0);
    pub const I: Unit = Unit(1);
    pub const MINUS_ONE: Unit = Unit(2);
    pub const MINUS_I: Unit = Unit(3);

    pub fn from_power(k: u32) -> Self {
        Unit((k % 4) as u8)
    }

    pub fn power(self) -> u8 {
        self.0
    }

    pub fn pow(self, m: u32) -> Self {
        Unit(((self.0 as u32 * (m % 4)) % 4) as u8)
    }

    /// `(re, im)` of the unit.
    #[inline]
    pub fn re_im(self) -> (i64, i64) {
        match self.0 {
            0 => (1, 0),
            1 => (0, 1),
            2 => (-1, 0),
            _ => (0, -1),
        }
    }

    pub fn to_gauss(self) -> GaussInt {
        let (re, im) = self.re_im();
        GaussInt { re, im }
    }

    /// Real value for `±1`; `None` for `±i`.
    pub fn as_real(self) -> Option<i64> {
        match self.0 {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }
}

impl Mul for Unit {
    type Output = Unit;
    #[inline]
    fn mul(self, rhs: Unit) -> Unit {
        Unit((self.0 + rhs.0) & 3)
    }
}

impl Neg for Unit {
    type Output = Unit;
    fn neg(self) -> Unit {
        Unit((self.0 + 2) & 3)
    }
}

/// Exact Gaussian integer `re + im·i`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussInt {
    pub re: i64,
    pub im: i64,
}

impl GaussInt {
    pub const ZERO: GaussInt = GaussInt { re: 0, im: 0 };

    pub const fn new(re: i64, im: i64) -> Self {
        Self { re, im }
    }

    pub fn is_zero(self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn norm_sq(self) -> i128 {
        self.re as i128 * self.re as i128 + self.im as i128 * self.im as i128
    }
}

impl From<i64> for GaussInt {
    fn from(re: i64) -> Self {
        Self { re, im: 0 }
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im < 0 {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussInt {
    type Output = GaussInt;
    fn add(self, rhs: GaussInt) -> GaussInt {
        GaussInt::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for GaussInt {
    type Output = GaussInt;
    fn sub(self, rhs: GaussInt) -> GaussInt {
        GaussInt::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl AddAssign<Unit> for GaussInt {
    #[inline]
    fn add_assign(&mut self, u: Unit) {
        let (re, im) = u.re_im();
        self.re += re;
        self.im += im;
    }
}

/// Deterministic assignment of `f(p)` for every prime `p`.
///
/// Forced values override the hash for individual primes, and `negated`
/// multiplies every prime value by `-1` (the sign-complement companion of a
/// seed in the 1D model).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeSignAssignment {
    seed: u64,
    model: Model,
    negated: bool,
    forced: Vec<(u64, Unit)>,
}

impl PrimeSignAssignment {
    pub fn new(seed: u64, model: Model) -> Self {
        Self {
            seed,
            model,
            negated: false,
            forced: Vec::new(),
        }
    }

    pub fn rademacher(seed: u64) -> Self {
        Self::new(seed, Model::Rademacher1D)
    }

    pub fn quarternary(seed: u64) -> Self {
        Self::new(seed, Model::Quarternary2D)
    }

    /// Pins `f(p) = value`. In the 1D model only `±1` are admissible.
    pub fn with_forced(mut self, p: u64, value: Unit) -> Result<Self> {
        if self.model.is_1d() && value.as_real().is_none() {
            return Err(invalid(format!(
                "1D model cannot force f({p}) to a non-real unit"
            )));
        }
        match self.forced.binary_search_by_key(&p, |&(q, _)| q) {
            Ok(i) => self.forced[i].1 = value,
            Err(i) => self.forced.insert(i, (p, value)),
        }
        Ok(self)
    }

    pub fn negated(mut self) -> Self {
        self.negated = !self.negated;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// `f(p)` for a prime `p` (primality is the caller's responsibility).
    #[inline]
    pub fn prime_sign(&self, p: u64) -> Unit {
        let raw = if !self.forced.is_empty() {
            match self.forced.binary_search_by_key(&p, |&(q, _)| q) {
                Ok(i) => return self.apply_negation(self.forced[i].1),
                Err(_) => self.hashed(p),
            }
        } else {
            self.hashed(p)
        };
        self.apply_negation(raw)
    }

    /// Sign bit (`0` or `1 << 63`) of `f(p)` in the 1D model, ready to be
    /// xor-ed into an `f64`. `None` for the 2D model.
    #[inline]
    pub fn sign_bit(&self, p: u64) -> Option<u64> {
        if !self.model.is_1d() {
            return None;
        }
        if self.forced.is_empty() {
            let bit = prime_hash(self.seed, p) & (1 << 63);
            Some(if self.negated { bit ^ (1 << 63) } else { bit })
        } else {
            Some(((self.prime_sign(p).power() as u64) >> 1) << 63)
        }
    }

    /// `f(p)` as `±1.0` in the 1D model.
    #[inline]
    pub fn prime_sign_real(&self, p: u64) -> f64 {
        if self.prime_sign(p).power() == 0 {
            1.0
        } else {
            -1.0
        }
    }

    #[inline]
    fn hashed(&self, p: u64) -> Unit {
        let h = prime_hash(self.seed, p);
        match self.model {
            Model::Rademacher1D => Unit(((h >> 63) as u8) << 1),
            Model::Quarternary2D => Unit((h >> 62) as u8),
        }
    }

    #[inline]
    fn apply_negation(&self, u: Unit) -> Unit {
        if self.negated {
            -u
        } else {
            u
        }
    }

    /// `f(n)` from a factorization: `None` encodes `f(n) = 0`.
    pub fn f_value(&self, factorization: &Factorization) -> Option<Unit> {
        if !factorization.is_squarefree() {
            return None;
        }
        Some(
            factorization
                .factors()
                .iter()
                .fold(Unit::ONE, |acc, &(p, _)| acc * self.prime_sign(p)),
        )
    }
}

/// One step of a walk: `M(n)` and the increment `f(n)` that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkPoint {
    pub n: u64,
    pub value: GaussInt,
    pub increment: Option<Unit>,
}

/// Streams `(n, M(n))` for `n = 1..=limit` in constant memory.
///
/// Values come from a segmented squarefree sieve, so memory is one block
/// regardless of `limit`.
pub struct WalkStream {
    assignment: PrimeSignAssignment,
    factorizer: BlockFactorizer,
    base_units: Vec<Unit>,
    units: Vec<Unit>,
    block: Vec<Option<Unit>>,
    block_lo: u64,
    pos: usize,
    current: GaussInt,
}

impl WalkStream {
    pub fn new(assignment: PrimeSignAssignment, limit: u64) -> Result<Self> {
        Self::with_options(assignment, limit, DEFAULT_BLOCK_WIDTH, MemoryCap::from_env())
    }

    pub fn with_options(
        assignment: PrimeSignAssignment,
        limit: u64,
        block_width: usize,
        cap: MemoryCap,
    ) -> Result<Self> {
        if limit < 1 {
            return Err(invalid("walk length must be at least 1"));
        }
        let factorizer = BlockFactorizer::new(limit, block_width, cap)?;
        let base_units = factorizer
            .base_primes()
            .iter()
            .map(|&p| assignment.prime_sign(p as u64))
            .collect();
        let width = factorizer.width();
        Ok(Self {
            assignment,
            factorizer,
            base_units,
            units: vec![Unit::ONE; width],
            block: Vec::with_capacity(width),
            block_lo: 1,
            pos: 0,
            current: GaussInt::ZERO,
        })
    }

    pub fn limit(&self) -> u64 {
        self.factorizer.limit()
    }

    pub fn assignment(&self) -> &PrimeSignAssignment {
        &self.assignment
    }

    fn refill(&mut self) -> bool {
        let Self {
            assignment,
            factorizer,
            base_units,
            units,
            block,
            ..
        } = self;
        units.fill(Unit::ONE);
        let view = match factorizer.next_block(|i, j| units[i] = units[i] * base_units[j]) {
            Some(b) => b,
            None => return false,
        };
        block.clear();
        block.extend((0..view.len()).map(|i| {
            view.cofactor(i).map(|q| {
                if q > 1 {
                    units[i] * assignment.prime_sign(q)
                } else {
                    units[i]
                }
            })
        }));
        self.block_lo = view.lo;
        self.pos = 0;
        true
    }

    /// Drains the stream into the final value `M(limit)`.
    pub fn final_value(self) -> GaussInt {
        self.fold(GaussInt::ZERO, |_, p| p.value)
    }
}

impl Iterator for WalkStream {
    type Item = WalkPoint;

    #[inline]
    fn next(&mut self) -> Option<WalkPoint> {
        if self.pos >= self.block.len() && !self.refill() {
            return None;
        }
        let increment = self.block[self.pos];
        let n = self.block_lo + self.pos as u64;
        self.pos += 1;
        if let Some(u) = increment {
            self.current += u;
        }
        Some(WalkPoint {
            n,
            value: self.current,
            increment,
        })
    }
}

/// Materialized values of a walk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkValues {
    OneD(Vec<i64>),
    TwoD(Vec<GaussInt>),
}

/// A fully materialized walk `M(1..=limit)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkSeries {
    model: Model,
    seed: u64,
    values: WalkValues,
}

impl WalkSeries {
    /// Generates and stores `M(1..=limit)`; refuses lengths above
    /// [`DEFAULT_MATERIALIZE_CAP`] (stream instead).
    pub fn generate(assignment: &PrimeSignAssignment, limit: u64) -> Result<Self> {
        Self::generate_capped(assignment, limit, DEFAULT_MATERIALIZE_CAP)
    }

    pub fn generate_capped(
        assignment: &PrimeSignAssignment,
        limit: u64,
        materialize_cap: u64,
    ) -> Result<Self> {
        if limit > materialize_cap {
            return Err(invalid(format!(
                "refusing to materialize {limit} points (cap {materialize_cap}); stream the walk instead"
            )));
        }
        let stream = WalkStream::new(assignment.clone(), limit)?;
        let values = match assignment.model() {
            Model::Rademacher1D => {
                WalkValues::OneD(stream.map(|p| p.value.re).collect())
            }
            Model::Quarternary2D => WalkValues::TwoD(stream.map(|p| p.value).collect()),
        };
        Ok(Self {
            model: assignment.model(),
            seed: assignment.seed(),
            values,
        })
    }

    /// Wraps explicit 1D values `M(1), M(2), ...`.
    pub fn from_values_1d(seed: u64, values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("a walk needs at least one point"));
        }
        Ok(Self {
            model: Model::Rademacher1D,
            seed,
            values: WalkValues::OneD(values),
        })
    }

    pub fn from_values_2d(seed: u64, values: Vec<GaussInt>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("a walk needs at least one point"));
        }
        Ok(Self {
            model: Model::Quarternary2D,
            seed,
            values: WalkValues::TwoD(values),
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn limit(&self) -> u64 {
        match &self.values {
            WalkValues::OneD(v) => v.len() as u64,
            WalkValues::TwoD(v) => v.len() as u64,
        }
    }

    pub fn values(&self) -> &WalkValues {
        &self.values
    }

    /// The 1D values, or `None` for a 2D walk.
    pub fn as_1d(&self) -> Option<&[i64]> {
        match &self.values {
            WalkValues::OneD(v) => Some(v),
            WalkValues::TwoD(_) => None,
        }
    }

    pub fn as_2d(&self) -> Option<&[GaussInt]> {
        match &self.values {
            WalkValues::TwoD(v) => Some(v),
            WalkValues::OneD(_) => None,
        }
    }

    /// `M(n)` for `1 <= n <= limit`.
    pub fn at(&self, n: u64) -> Option<GaussInt> {
        let i = n.checked_sub(1)? as usize;
        match &self.values {
            WalkValues::OneD(v) => v.get(i).map(|&re| GaussInt::from(re)),
            WalkValues::TwoD(v) => v.get(i).copied(),
        }
    }

    /// `(n, M(n))` pairs in order.
    pub fn points(&self) -> Box<dyn Iterator<Item = (u64, GaussInt)> + '_> {
        match &self.values {
            WalkValues::OneD(v) => Box::new(
                v.iter()
                    .enumerate()
                    .map(|(i, &re)| (i as u64 + 1, GaussInt::from(re))),
            ),
            WalkValues::TwoD(v) => {
                Box::new(v.iter().enumerate().map(|(i, &g)| (i as u64 + 1, g)))
            }
        }
    }
}
