//! Congruence windows in the finite adeles.
//!
//! A window is a finite set of per-prime local conditions on integer vectors
//! (with an optional exact all-prime tail for the primitive and k-free
//! families). Windows reduce exactly to residue sets modulo the level
//! N = prod p^k, have exact rational Haar measures at finite level, and admit
//! epsilon-truncation of the exact families to clopen finite-level windows.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::bitset::Bitset;
use crate::primes::{is_kfree, is_prime, vector_gcd, PrimeIter};

/// Residue tables are capped at 2^32 entries.
pub const RESIDUE_TABLE_CAP: u128 = 1 << 32;

/// Default prime bound for Euler-product evaluation of exact measures.
/// The truncated factor over p > P differs from 1 by at most
/// sum_{n > P} n^-d <= P^(1-d)/(d-1), i.e. 1e-6 at d = 2.
pub const DEFAULT_EULER_PRIME_BOUND: u64 = 1_000_000;

#[derive(Debug, Error)]
pub enum WindowError {
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("duplicate prime {0} in condition set")]
    DuplicatePrime(u64),
    #[error("local condition at p = {prime}: {reason}")]
    BadCondition { prime: u64, reason: String },
    #[error("window has an exact tail; apply epsilon_truncate before residue reduction")]
    ExactTail,
    #[error("residue table would need {entries} entries (cap 2^32)")]
    LevelTooLarge { entries: u128 },
    #[error(
        "shift denominator {denominator} is not invertible mod {modulus}; \
         the shifted window needs level {required_modulus} over the refined lattice"
    )]
    LevelRaiseRequired {
        denominator: u64,
        modulus: u64,
        required_modulus: u64,
    },
    #[error("epsilon must be positive")]
    BadEpsilon,
    #[error("modulus {target} is not a multiple of {base}")]
    BadLift { base: u64, target: u64 },
}

/// Acceptance rule for one prime power p^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalMode {
    /// Excludes x == 0 (mod p^k) as a d-vector: Z_p^d minus p^k Z_p^d.
    ExcludeZeroVector,
    /// Per-coordinate k-free condition: coordinate i with exponent k_i must
    /// not be divisible by p^(k_i). `None` leaves a coordinate unconstrained.
    KFree { exponents: Vec<Option<u32>> },
    /// Arbitrary accepted subset of (Z/p^k)^d.
    ExplicitResidues { accepted: BTreeSet<Vec<u64>> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalCondition {
    pub prime: u64,
    pub exponent: u32,
    pub mode: LocalMode,
}

impl LocalCondition {
    pub fn exclude_zero_vector(prime: u64, exponent: u32) -> Self {
        LocalCondition {
            prime,
            exponent,
            mode: LocalMode::ExcludeZeroVector,
        }
    }

    pub fn kfree(prime: u64, exponents: Vec<Option<u32>>) -> Self {
        let exponent = exponents.iter().flatten().copied().max().unwrap_or(1);
        LocalCondition {
            prime,
            exponent,
            mode: LocalMode::KFree { exponents },
        }
    }

    pub fn explicit(prime: u64, exponent: u32, accepted: BTreeSet<Vec<u64>>) -> Self {
        LocalCondition {
            prime,
            exponent,
            mode: LocalMode::ExplicitResidues { accepted },
        }
    }

    /// p^k, the modulus this condition reads vectors through.
    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.exponent)
    }

    fn validate(&self, dimension: usize) -> Result<(), WindowError> {
        let fail = |reason: &str| {
            Err(WindowError::BadCondition {
                prime: self.prime,
                reason: reason.to_string(),
            })
        };
        if !is_prime(self.prime) {
            return Err(WindowError::NotPrime(self.prime));
        }
        if self.exponent < 1 {
            return fail("exponent must be at least 1");
        }
        match &self.mode {
            LocalMode::ExcludeZeroVector => Ok(()),
            LocalMode::KFree { exponents } => {
                if exponents.len() != dimension {
                    return fail("one exponent entry per coordinate required");
                }
                let ks: Vec<u32> = exponents.iter().flatten().copied().collect();
                if ks.is_empty() {
                    return fail("at least one constrained coordinate required");
                }
                if ks.iter().any(|&k| k < 1) {
                    return fail("k-free exponents must be at least 1");
                }
                if ks.iter().max() != Some(&self.exponent) {
                    return fail("condition exponent must equal the largest coordinate exponent");
                }
                Ok(())
            }
            LocalMode::ExplicitResidues { accepted } => {
                if accepted.is_empty() {
                    return fail("explicit residue set must be nonempty");
                }
                let q = self.modulus();
                for r in accepted {
                    if r.len() != dimension || r.iter().any(|&x| x >= q) {
                        return fail("residues must be d-vectors with entries below p^k");
                    }
                }
                Ok(())
            }
        }
    }

    /// Local Haar measure: (#accepted residues) / p^(kd), as an exact rational.
    pub fn measure(&self, dimension: usize) -> BigRational {
        let q = BigInt::from(self.modulus());
        let total = pow_bigint(&q, dimension as u32);
        match &self.mode {
            LocalMode::ExcludeZeroVector => BigRational::new(&total - BigInt::one(), total.clone()),
            LocalMode::KFree { exponents } => exponents
                .iter()
                .flatten()
                .map(|&k| {
                    let pk = pow_bigint(&BigInt::from(self.prime), k);
                    BigRational::new(&pk - BigInt::one(), pk.clone())
                })
                .product(),
            LocalMode::ExplicitResidues { accepted } => {
                BigRational::new(BigInt::from(accepted.len()), total)
            }
        }
    }

    /// Whether the integer vector satisfies this local condition.
    pub fn accepts(&self, x: &[i64]) -> bool {
        match &self.mode {
            LocalMode::ExcludeZeroVector => {
                let q = self.modulus() as i64;
                x.iter().any(|&xi| xi.rem_euclid(q) != 0)
            }
            LocalMode::KFree { exponents } => x.iter().zip(exponents).all(|(&xi, k)| match k {
                Some(k) => xi.rem_euclid(self.prime.pow(*k) as i64) != 0,
                None => true,
            }),
            LocalMode::ExplicitResidues { accepted } => {
                let q = self.modulus() as i64;
                let r: Vec<u64> = x.iter().map(|&xi| xi.rem_euclid(q) as u64).collect();
                accepted.contains(&r)
            }
        }
    }
}

/// Exact all-prime window family: the same local condition at every prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TailFamily {
    /// prod_p (Z_p^d minus p Z_p^d): the primitive-vector window.
    Primitive,
    /// Designated coordinates k_i-free at every prime.
    KFree { exponents: Vec<Option<u32>> },
}

impl TailFamily {
    pub fn local_condition(&self, prime: u64) -> LocalCondition {
        match self {
            TailFamily::Primitive => LocalCondition::exclude_zero_vector(prime, 1),
            TailFamily::KFree { exponents } => LocalCondition::kfree(prime, exponents.clone()),
        }
    }

    /// Exact membership by integer arithmetic: gcd or k-free tests.
    pub fn accepts_exact(&self, x: &[i64]) -> bool {
        match self {
            TailFamily::Primitive => vector_gcd(x) == 1,
            TailFamily::KFree { exponents } => x
                .iter()
                .zip(exponents)
                .all(|(&xi, k)| k.is_none_or(|k| is_kfree(xi, k))),
        }
    }

    /// Euler product of the local measures over primes below `prime_bound`.
    pub fn exact_measure(&self, dimension: usize, prime_bound: u64) -> f64 {
        let mut product = 1.0;
        for p in crate::primes::primes_below(prime_bound) {
            let local = match self {
                TailFamily::Primitive => 1.0 - (p as f64).powi(-(dimension as i32)),
                TailFamily::KFree { exponents } => exponents
                    .iter()
                    .flatten()
                    .map(|&k| 1.0 - (p as f64).powi(-(k as i32)))
                    .product(),
            };
            product *= local;
        }
        product
    }

    fn validate(&self, dimension: usize) -> Result<(), WindowError> {
        // Reuse the local-condition checks at p = 2.
        self.local_condition(2).validate(dimension)
    }
}

/// Finite-level window and optional exact tail. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceWindow {
    dimension: usize,
    conditions: Vec<LocalCondition>,
    tail: Option<TailFamily>,
}

/// Exact rational measure at finite level, plus the Euler-product float for
/// exact-tail windows. Rationals are the source of truth at finite level.
#[derive(Clone, Debug)]
pub struct WindowMeasure {
    pub finite_level: BigRational,
    pub exact: Option<f64>,
}

impl WindowMeasure {
    /// Float rendering: the exact value when present, else the rational.
    pub fn as_float(&self) -> f64 {
        self.exact
            .unwrap_or_else(|| self.finite_level.to_f64().unwrap())
    }
}

impl CongruenceWindow {
    /// The full window (no condition): measure 1, level 1.
    pub fn trivial(dimension: usize) -> Result<Self, WindowError> {
        Self::custom(dimension, Vec::new())
    }

    pub fn custom(
        dimension: usize,
        mut conditions: Vec<LocalCondition>,
    ) -> Result<Self, WindowError> {
        if dimension == 0 {
            return Err(WindowError::BadDimension);
        }
        conditions.sort_by_key(|c| c.prime);
        for pair in conditions.windows(2) {
            if pair[0].prime == pair[1].prime {
                return Err(WindowError::DuplicatePrime(pair[0].prime));
            }
        }
        for c in &conditions {
            c.validate(dimension)?;
        }
        Ok(CongruenceWindow {
            dimension,
            conditions,
            tail: None,
        })
    }

    /// Truncation of an exact family to the given prime set.
    pub fn truncated(
        family: TailFamily,
        dimension: usize,
        primes: &[u64],
    ) -> Result<Self, WindowError> {
        family.validate(dimension)?;
        let conditions = primes.iter().map(|&p| family.local_condition(p)).collect();
        Self::custom(dimension, conditions)
    }

    /// Exact all-prime window; membership by gcd / k-free arithmetic.
    pub fn exact(family: TailFamily, dimension: usize) -> Result<Self, WindowError> {
        if dimension == 0 {
            return Err(WindowError::BadDimension);
        }
        family.validate(dimension)?;
        Ok(CongruenceWindow {
            dimension,
            conditions: Vec::new(),
            tail: Some(family),
        })
    }

    pub fn primitive(dimension: usize, primes: &[u64]) -> Result<Self, WindowError> {
        Self::truncated(TailFamily::Primitive, dimension, primes)
    }

    pub fn primitive_exact(dimension: usize) -> Result<Self, WindowError> {
        Self::exact(TailFamily::Primitive, dimension)
    }

    pub fn kfree(
        dimension: usize,
        exponents: Vec<Option<u32>>,
        primes: &[u64],
    ) -> Result<Self, WindowError> {
        Self::truncated(TailFamily::KFree { exponents }, dimension, primes)
    }

    pub fn kfree_exact(dimension: usize, exponents: Vec<Option<u32>>) -> Result<Self, WindowError> {
        Self::exact(TailFamily::KFree { exponents }, dimension)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn conditions(&self) -> &[LocalCondition] {
        &self.conditions
    }

    pub fn tail(&self) -> Option<&TailFamily> {
        self.tail.as_ref()
    }

    pub fn has_exact_tail(&self) -> bool {
        self.tail.is_some()
    }

    pub fn primes(&self) -> Vec<u64> {
        self.conditions.iter().map(|c| c.prime).collect()
    }

    /// Level modulus N = prod p^k; 1 for the trivial window.
    pub fn level(&self) -> u128 {
        self.conditions
            .iter()
            .map(|c| c.modulus() as u128)
            .product()
    }

    /// Exact rational measure of the finite-level form, and the Euler-product
    /// float when the window has an exact tail.
    pub fn measure(&self) -> WindowMeasure {
        self.measure_with_prime_bound(DEFAULT_EULER_PRIME_BOUND)
    }

    pub fn measure_with_prime_bound(&self, prime_bound: u64) -> WindowMeasure {
        let finite_level: BigRational = self
            .conditions
            .iter()
            .map(|c| c.measure(self.dimension))
            .product();
        let exact = self
            .tail
            .as_ref()
            .map(|t| t.exact_measure(self.dimension, prime_bound));
        WindowMeasure {
            finite_level,
            exact,
        }
    }

    /// Membership of an integer vector: exact arithmetic for exact-tail
    /// windows, residue tests otherwise.
    pub fn contains(&self, x: &[i64]) -> bool {
        debug_assert_eq!(x.len(), self.dimension);
        match &self.tail {
            Some(family) => family.accepts_exact(x),
            None => self.conditions.iter().all(|c| c.accepts(x)),
        }
    }

    /// Smallest prime-prefix truncation of `family` whose measure is within
    /// `epsilon` of the exact measure. The result is clopen, contains the
    /// exact window and realizes the epsilon-approximation conditions.
    pub fn epsilon_truncate(
        family: TailFamily,
        epsilon: f64,
        dimension: usize,
    ) -> Result<Self, WindowError> {
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(WindowError::BadEpsilon);
        }
        family.validate(dimension)?;
        let target = family.exact_measure(dimension, DEFAULT_EULER_PRIME_BOUND) + epsilon;
        let mut primes = Vec::new();
        let mut product = 1.0f64;
        let mut iter = PrimeIter::new();
        while product > target {
            let p = iter.next().expect("prime iterator is infinite");
            product *= family
                .local_condition(p)
                .measure(dimension)
                .to_f64()
                .expect("local measure fits in f64");
            primes.push(p);
        }
        Self::truncated(family, dimension, &primes)
    }

    /// Reduces a finite-level window to its residue set mod N.
    pub fn reduce_mod_level(&self) -> Result<ResidueWindow, WindowError> {
        if self.tail.is_some() {
            return Err(WindowError::ExactTail);
        }
        let level = self.level();
        let entries = (0..self.dimension).try_fold(1u128, |acc, _| {
            acc.checked_mul(level).filter(|&e| e <= RESIDUE_TABLE_CAP)
        });
        let Some(entries) = entries else {
            return Err(WindowError::LevelTooLarge {
                entries: level.saturating_pow(self.dimension as u32),
            });
        };
        let modulus = level as u64;
        let mut bits = Bitset::new(entries as u64);
        let mut x = vec![0i64; self.dimension];
        for idx in 0..entries as u64 {
            decode_residue(idx, modulus, &mut x);
            if self.conditions.iter().all(|c| c.accepts(&x)) {
                bits.set(idx);
            }
        }
        let cardinality = bits.count_ones();
        Ok(ResidueWindow {
            modulus,
            dimension: self.dimension,
            bits,
            cardinality,
        })
    }
}

#[inline]
fn decode_residue(mut idx: u64, modulus: u64, out: &mut [i64]) {
    for slot in out.iter_mut() {
        *slot = (idx % modulus) as i64;
        idx /= modulus;
    }
}

#[inline]
fn encode_residue(x: &[i64], modulus: u64) -> u64 {
    x.iter().rev().fold(0u64, |acc, &xi| {
        acc * modulus + xi.rem_euclid(modulus as i64) as u64
    })
}

/// A window reduced to level N: the accepted subset of (Z/N)^d as a bitset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueWindow {
    modulus: u64,
    dimension: usize,
    bits: Bitset,
    cardinality: u64,
}

impl ResidueWindow {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    /// cardinality / N^d as an exact rational.
    pub fn density(&self) -> BigRational {
        let total = pow_bigint(&BigInt::from(self.modulus), self.dimension as u32);
        BigRational::new(BigInt::from(self.cardinality), total)
    }

    #[inline]
    pub fn contains(&self, x: &[i64]) -> bool {
        debug_assert_eq!(x.len(), self.dimension);
        self.bits.get(encode_residue(x, self.modulus))
    }

    #[inline]
    pub fn contains_residue_index(&self, idx: u64) -> bool {
        self.bits.get(idx)
    }

    /// Accepted residues as vectors, ascending in the mixed-radix index.
    pub fn residues(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        self.bits.iter_ones().map(move |idx| {
            let mut x = vec![0i64; self.dimension];
            decode_residue(idx, self.modulus, &mut x);
            x
        })
    }

    fn from_residues<I: IntoIterator<Item = Vec<i64>>>(
        modulus: u64,
        dimension: usize,
        residues: I,
    ) -> Result<Self, WindowError> {
        let entries = (0..dimension).try_fold(1u128, |acc, _| {
            acc.checked_mul(modulus as u128)
                .filter(|&e| e <= RESIDUE_TABLE_CAP)
        });
        let Some(entries) = entries else {
            return Err(WindowError::LevelTooLarge {
                entries: (modulus as u128).saturating_pow(dimension as u32),
            });
        };
        let mut bits = Bitset::new(entries as u64);
        for r in residues {
            bits.set(encode_residue(&r, modulus));
        }
        let cardinality = bits.count_ones();
        Ok(ResidueWindow {
            modulus,
            dimension,
            bits,
            cardinality,
        })
    }

    /// Translates the window by -beta: the shifted window W_beta = W - beta.
    ///
    /// Requires every (reduced) denominator of beta to be invertible mod N,
    /// in which case the translation is an exact residue bijection. A
    /// denominator sharing a factor with N raises [`WindowError::LevelRaiseRequired`];
    /// see [`RationalShiftedWindow`] for the level-raised realization.
    pub fn shift(&self, beta: &[Rational64]) -> Result<ResidueWindow, WindowError> {
        assert_eq!(beta.len(), self.dimension);
        let n = self.modulus as i64;
        let mut offsets = Vec::with_capacity(self.dimension);
        for b in beta {
            let b = b.reduced();
            let den = b.denom().unsigned_abs();
            if num_integer::gcd(den, self.modulus) != 1 {
                let b_all = shift_denominator(beta);
                return Err(WindowError::LevelRaiseRequired {
                    denominator: den,
                    modulus: self.modulus,
                    required_modulus: b_all * self.modulus,
                });
            }
            let inv = mod_inverse(den as i64, n).expect("coprime denominator");
            // beta mod N, sign included; the translation applies -beta.
            let num = if *b.denom() < 0 {
                -*b.numer()
            } else {
                *b.numer()
            };
            offsets.push((num.rem_euclid(n) * inv).rem_euclid(n));
        }
        let shifted = self.residues().map(|r| {
            r.iter()
                .zip(&offsets)
                .map(|(&x, &off)| (x - off).rem_euclid(n))
                .collect::<Vec<i64>>()
        });
        Self::from_residues(self.modulus, self.dimension, shifted)
    }

    /// Lifts the window to a multiple of its modulus (the acceptance rule is
    /// unchanged: membership still factors through the original level).
    pub fn lift_to(&self, modulus: u64) -> Result<ResidueWindow, WindowError> {
        if !modulus.is_multiple_of(self.modulus) {
            return Err(WindowError::BadLift {
                base: self.modulus,
                target: modulus,
            });
        }
        let k = modulus / self.modulus;
        let lifted = self.residues().flat_map(move |r| {
            let base = self.modulus;
            (0..k.pow(self.dimension as u32)).map(move |mut j| {
                r.iter()
                    .map(|&x| {
                        let add = (j % k) as i64;
                        j /= k;
                        x + add * base as i64
                    })
                    .collect::<Vec<i64>>()
            })
        });
        Self::from_residues(modulus, self.dimension, lifted)
    }
}

/// lcm of the reduced denominators of a rational vector.
pub fn shift_denominator(beta: &[Rational64]) -> u64 {
    beta.iter()
        .map(|b| b.reduced().denom().unsigned_abs())
        .fold(1u64, num_integer::lcm)
}

/// The shifted window W - beta for rational beta with denominator b, realized
/// exactly at level b*N over the refined lattice (1/b) Z^d: an integer vector
/// n stands for the rational point n/b, and n/b in W - beta iff the residue
/// of n mod b*N lies in the stored set. Cardinality equals the cardinality of
/// the unshifted window, so the density per refined-lattice cell drops by
/// b^d, compensating the b^d-fold denser lattice.
#[derive(Clone, Debug)]
pub struct RationalShiftedWindow {
    pub denominator: u64,
    pub window: ResidueWindow,
}

impl RationalShiftedWindow {
    pub fn new(base: &ResidueWindow, beta: &[Rational64]) -> Result<Self, WindowError> {
        assert_eq!(beta.len(), base.dimension());
        let b = shift_denominator(beta);
        let modulus = base
            .modulus()
            .checked_mul(b)
            .ok_or(WindowError::LevelTooLarge { entries: u128::MAX })?;
        // -beta = c / b exactly.
        let c: Vec<i64> = beta
            .iter()
            .map(|bi| {
                let r = -bi.reduced();
                *r.numer() * (b / r.denom().unsigned_abs()) as i64 * r.denom().signum()
            })
            .collect();
        let shifted = base.residues().map(|s| {
            s.iter()
                .zip(&c)
                .map(|(&si, &ci)| (ci + b as i64 * si).rem_euclid(modulus as i64))
                .collect::<Vec<i64>>()
        });
        let window = ResidueWindow::from_residues(modulus, base.dimension(), shifted)?;
        Ok(RationalShiftedWindow {
            denominator: b,
            window,
        })
    }
}

fn mod_inverse(a: i64, n: i64) -> Option<i64> {
    let (mut t, mut new_t) = (0i64, 1i64);
    let (mut r, mut new_r) = (n, a.rem_euclid(n));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        None
    } else {
        Some(t.rem_euclid(n))
    }
}

fn pow_bigint(base: &BigInt, exp: u32) -> BigInt {
    let mut out = BigInt::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{FromPrimitive, Zero};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn rational(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn primitive_truncated_measure_is_16_25() {
        let w = CongruenceWindow::primitive(2, &[2, 3, 5]).unwrap();
        let m = w.measure();
        assert_eq!(m.finite_level, rational(16, 25));
        assert!(m.exact.is_none());
        assert_eq!(w.level(), 30);
    }

    #[test]
    fn trivial_window_has_measure_one() {
        let w = CongruenceWindow::trivial(3).unwrap();
        assert_eq!(w.measure().finite_level, rational(1, 1));
        assert_eq!(w.level(), 1);
        assert!(w.contains(&[17, -4, 0]));
    }

    #[test]
    fn primitive_exact_measure_matches_zeta_2() {
        // Euler product over p < 1e6 against pi^2/6; truncation error < 1e-6.
        let w = CongruenceWindow::primitive_exact(2).unwrap();
        let m = w.measure();
        let zeta2_inv = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((m.exact.unwrap() - zeta2_inv).abs() < 1e-5);
        assert!((m.as_float() - 0.607927).abs() < 1e-5);
        assert_eq!(m.finite_level, rational(1, 1));
    }

    #[test]
    fn squarefree_both_coordinates_measure() {
        let w = CongruenceWindow::kfree_exact(2, vec![Some(2), Some(2)]).unwrap();
        let zeta2_inv = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!((w.measure().exact.unwrap() - zeta2_inv * zeta2_inv).abs() < 1e-5);
        assert!((w.measure().as_float() - 0.369576).abs() < 1e-5);
    }

    #[test]
    fn epsilon_truncate_examples() {
        let w = CongruenceWindow::epsilon_truncate(TailFamily::Primitive, 0.05, 2).unwrap();
        assert_eq!(w.primes(), vec![2, 3, 5]);
        assert_eq!(w.measure().finite_level, rational(16, 25));

        let w = CongruenceWindow::epsilon_truncate(TailFamily::Primitive, 0.2, 2).unwrap();
        assert_eq!(w.primes(), vec![2]);

        // epsilon >= 1 - 1/zeta(d): the empty product already meets the target.
        let w = CongruenceWindow::epsilon_truncate(TailFamily::Primitive, 0.4, 2).unwrap();
        assert_eq!(w.primes(), Vec::<u64>::new());
        assert_eq!(w.measure().finite_level, rational(1, 1));
    }

    #[test]
    fn epsilon_truncate_measure_gap_within_epsilon() {
        for &eps in &[0.3, 0.1, 0.05, 0.01, 0.003] {
            let w = CongruenceWindow::epsilon_truncate(TailFamily::Primitive, eps, 2).unwrap();
            let exact = CongruenceWindow::primitive_exact(2)
                .unwrap()
                .measure()
                .exact
                .unwrap();
            let gap = w.measure().finite_level.to_f64().unwrap() - exact;
            assert!(gap >= 0.0 && gap <= eps + 1e-9, "eps = {eps}, gap = {gap}");
        }
    }

    #[test]
    fn window_contains_examples() {
        let exact = CongruenceWindow::primitive_exact(2).unwrap();
        assert!(exact.contains(&[3, 4]));
        assert!(!exact.contains(&[2, 4]));
        assert!(!exact.contains(&[0, 0]));

        // gcd(7, 14) = 7, but 7 escapes the truncation set {2, 3, 5}:
        // the truncated window strictly contains the exact one.
        let truncated = CongruenceWindow::primitive(2, &[2, 3, 5]).unwrap();
        assert!(truncated.contains(&[7, 14]));
        assert!(!exact.contains(&[7, 14]));
    }

    #[test]
    fn exact_subset_of_truncated_on_random_vectors() {
        let exact = CongruenceWindow::primitive_exact(2).unwrap();
        let truncated = CongruenceWindow::primitive(2, &[2, 3, 5]).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let x = [
                rng.random_range(-1000i64..1000),
                rng.random_range(-1000i64..1000),
            ];
            if exact.contains(&x) {
                assert!(truncated.contains(&x), "containment fails at {x:?}");
            }
        }
    }

    #[test]
    fn reduce_mod_2_primitive() {
        let w = CongruenceWindow::primitive(2, &[2])
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        assert_eq!(w.modulus(), 2);
        assert_eq!(w.cardinality(), 3);
        let rs: Vec<Vec<i64>> = w.residues().collect();
        assert_eq!(rs, vec![vec![1, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn reduce_mod_30_cardinality_by_brute_force() {
        let win = CongruenceWindow::primitive(2, &[2, 3, 5]).unwrap();
        let rw = win.reduce_mod_level().unwrap();
        assert_eq!(rw.cardinality(), 576);
        let mut count = 0;
        for a in 0..30i64 {
            for b in 0..30i64 {
                let direct = (a % 2 != 0 || b % 2 != 0)
                    && (a % 3 != 0 || b % 3 != 0)
                    && (a % 5 != 0 || b % 5 != 0);
                assert_eq!(rw.contains(&[a, b]), direct);
                count += u64::from(direct);
            }
        }
        assert_eq!(count, 576);
        assert_eq!(rw.density(), rational(16, 25));
    }

    #[test]
    fn trivial_reduces_to_full_set() {
        let rw = CongruenceWindow::trivial(2)
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        assert_eq!(rw.modulus(), 1);
        assert_eq!(rw.cardinality(), 1);
        assert!(rw.contains(&[123, -456]));
    }

    #[test]
    fn exact_tail_refuses_reduction() {
        let err = CongruenceWindow::primitive_exact(2)
            .unwrap()
            .reduce_mod_level()
            .unwrap_err();
        assert!(matches!(err, WindowError::ExactTail));
    }

    #[test]
    fn level_cap_rejected() {
        // 65536^2 = 2^32 is within the cap; one more factor of 2 is not.
        let w =
            CongruenceWindow::custom(2, vec![LocalCondition::exclude_zero_vector(2, 17)]).unwrap();
        assert!(matches!(
            w.reduce_mod_level().unwrap_err(),
            WindowError::LevelTooLarge { .. }
        ));
    }

    #[test]
    fn residue_density_equals_window_measure() {
        for primes in [vec![2], vec![2, 3], vec![3, 5], vec![2, 3, 5]] {
            let w = CongruenceWindow::primitive(2, &primes).unwrap();
            let rw = w.reduce_mod_level().unwrap();
            assert_eq!(rw.density(), w.measure().finite_level);
        }
        let w = CongruenceWindow::kfree(2, vec![Some(2), None], &[2, 3]).unwrap();
        let rw = w.reduce_mod_level().unwrap();
        assert_eq!(rw.density(), w.measure().finite_level);
    }

    #[test]
    fn crt_consistency_on_random_vectors() {
        let w = CongruenceWindow::kfree(2, vec![Some(2), Some(1)], &[2, 5]).unwrap();
        let rw = w.reduce_mod_level().unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let x = [
                rng.random_range(-5000i64..5000),
                rng.random_range(-5000i64..5000),
            ];
            assert_eq!(rw.contains(&x), w.contains(&x), "x = {x:?}");
        }
    }

    #[test]
    fn shift_by_one_one_mod_2() {
        let w = CongruenceWindow::primitive(2, &[2])
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        let shifted = w
            .shift(&[
                Rational64::from_i64(1).unwrap(),
                Rational64::from_i64(1).unwrap(),
            ])
            .unwrap();
        let rs: Vec<Vec<i64>> = shifted.residues().collect();
        assert_eq!(rs, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(shifted.cardinality(), w.cardinality());
    }

    #[test]
    fn shift_zero_is_identity() {
        let w = CongruenceWindow::primitive(2, &[2, 3])
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        let shifted = w.shift(&[Rational64::zero(), Rational64::zero()]).unwrap();
        assert_eq!(shifted, w);
    }

    #[test]
    fn shift_with_invertible_denominator() {
        // 1/7 mod 6 = 7^{-1} = 1 mod 6, so shifting by (1/7, 0) translates by (-1, 0).
        let w = CongruenceWindow::primitive(2, &[2, 3])
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        let beta = [Rational64::new(1, 7), Rational64::zero()];
        let shifted = w.shift(&beta).unwrap();
        let direct = w
            .shift(&[Rational64::from_i64(1).unwrap(), Rational64::zero()])
            .unwrap();
        assert_eq!(shifted, direct);
    }

    #[test]
    fn shift_level_raise_error() {
        let w = CongruenceWindow::primitive(2, &[2, 3, 5])
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        let beta = [Rational64::new(1, 2), Rational64::new(1, 2)];
        match w.shift(&beta).unwrap_err() {
            WindowError::LevelRaiseRequired {
                denominator,
                modulus,
                required_modulus,
            } => {
                assert_eq!((denominator, modulus, required_modulus), (2, 30, 60));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn rational_shifted_window_half_shift() {
        // W - beta with beta = -(1/2, 1/2): members are n/2 with
        // n = (1, 1) + 2 s mod 60, s in W_30.
        let base = CongruenceWindow::primitive(2, &[2, 3, 5])
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        let alpha = [Rational64::new(1, 2), Rational64::new(1, 2)];
        let beta: Vec<Rational64> = alpha.iter().map(|a| -a).collect();
        let shifted = RationalShiftedWindow::new(&base, &beta).unwrap();
        assert_eq!(shifted.denominator, 2);
        assert_eq!(shifted.window.modulus(), 60);
        assert_eq!(shifted.window.cardinality(), base.cardinality());
        // n = (1,1) + 2s: s = (1,0) in W_30 -> n = (3,1); s = (0,0) not in W_30.
        assert!(shifted.window.contains(&[3, 1]));
        assert!(!shifted.window.contains(&[1, 1]));
        // And the identity-fiber sanity: n/2 = m + (1/2,1/2) with m visible
        // mod 30 iff n = 2m + (1,1).
        for m in [[1i64, 0], [5, 3], [7, 14], [29, 1]] {
            let n = [2 * m[0] + 1, 2 * m[1] + 1];
            assert_eq!(shifted.window.contains(&n), base.contains(&m), "m = {m:?}");
        }
    }

    #[test]
    fn lift_preserves_membership_and_density() {
        let w = CongruenceWindow::primitive(2, &[2])
            .unwrap()
            .reduce_mod_level()
            .unwrap();
        let lifted = w.lift_to(6).unwrap();
        assert_eq!(lifted.modulus(), 6);
        assert_eq!(lifted.cardinality(), 27);
        assert_eq!(lifted.density(), w.density());
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x = [
                rng.random_range(-100i64..100),
                rng.random_range(-100i64..100),
            ];
            assert_eq!(lifted.contains(&x), w.contains(&x));
        }
    }

    #[test]
    fn custom_explicit_residues() {
        let accepted: BTreeSet<Vec<u64>> = [vec![1, 2], vec![0, 1]].into_iter().collect();
        let w =
            CongruenceWindow::custom(2, vec![LocalCondition::explicit(3, 1, accepted)]).unwrap();
        assert_eq!(w.measure().finite_level, rational(2, 9));
        assert!(w.contains(&[4, 5]));
        assert!(!w.contains(&[0, 0]));
    }

    #[test]
    fn invalid_constructions_rejected() {
        assert!(matches!(
            CongruenceWindow::primitive(2, &[4]).unwrap_err(),
            WindowError::NotPrime(4)
        ));
        assert!(matches!(
            CongruenceWindow::primitive(2, &[2, 2]).unwrap_err(),
            WindowError::DuplicatePrime(2)
        ));
        assert!(
            CongruenceWindow::custom(2, vec![LocalCondition::explicit(3, 1, BTreeSet::new())])
                .is_err()
        );
        assert!(CongruenceWindow::kfree(2, vec![None, None], &[2]).is_err());
        assert!(CongruenceWindow::epsilon_truncate(TailFamily::Primitive, 0.0, 2).is_err());
    }

    proptest! {
        #[test]
        fn shift_round_trip_is_identity(
            b1 in -30i64..30, b2 in -30i64..30,
        ) {
            let w = CongruenceWindow::primitive(2, &[2, 3, 5]).unwrap()
                .reduce_mod_level().unwrap();
            let beta = [Rational64::from_i64(b1).unwrap(), Rational64::from_i64(b2).unwrap()];
            let neg: Vec<Rational64> = beta.iter().map(|b| -b).collect();
            let round = w.shift(&beta).unwrap().shift(&neg).unwrap();
            prop_assert_eq!(round, w);
        }

        #[test]
        fn shift_preserves_cardinality(
            num1 in -10i64..10, num2 in -10i64..10, den in prop::sample::select(vec![1i64, 7, 11, 13]),
        ) {
            let w = CongruenceWindow::primitive(2, &[2, 3, 5]).unwrap()
                .reduce_mod_level().unwrap();
            let beta = [Rational64::new(num1, den), Rational64::new(num2, den)];
            let shifted = w.shift(&beta).unwrap();
            prop_assert_eq!(shifted.cardinality(), w.cardinality());
        }

        #[test]
        fn exact_membership_implies_truncated(
            x in -10_000i64..10_000, y in -10_000i64..10_000,
        ) {
            let exact = CongruenceWindow::primitive_exact(2).unwrap();
            let truncated = CongruenceWindow::primitive(2, &[2, 3, 5, 7]).unwrap();
            if exact.contains(&[x, y]) {
                prop_assert!(truncated.contains(&[x, y]));
            }
        }
    }
}
