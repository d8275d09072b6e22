//! Chinese remaindering of determinant residues: the accumulator, symmetric
//! lifting and the early-terminating driver.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{BigReducer, PrimeField};
use crate::intmat::IntMat;
use crate::modular::det_mod_p;
use crate::primes::PrimeStream;

/// Default stability window of the candidate test, in bits.
pub const DEFAULT_WINDOW: u64 = 60;

/// Maximum number of residues computed together in one parallel batch.
const BATCH: usize = 8;

/// Residue `r` modulo `m`, where `m` is a product of distinct primes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrtAccumulator {
    modulus: BigUint,
    residue: BigUint,
    primes: Vec<u64>,
}

impl Default for CrtAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl CrtAccumulator {
    pub fn new() -> Self {
        Self {
            modulus: BigUint::one(),
            residue: BigUint::zero(),
            primes: Vec::new(),
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Combines in the congruence `x = r_p (mod p)`.
    pub fn add(&mut self, p: u64, r_p: u64) -> Result<()> {
        if self.primes.contains(&p) {
            return Err(Error::DuplicatePrime(p));
        }
        let f = PrimeField::new(p);
        let mut red = BigReducer::new(f);
        let r_mod = red.reduce_uint(&self.residue);
        let m_mod = red.reduce_uint(&self.modulus);
        let m_inv = f
            .inv(m_mod)
            .ok_or_else(|| Error::InvalidConfig(format!("modulus not coprime to {p}")))?;
        let t = f.mul(f.sub(f.reduce_word(r_p), r_mod), m_inv);
        self.residue += &self.modulus * t;
        self.modulus *= p;
        self.primes.push(p);
        Ok(())
    }

    /// The signed representative of the residue.
    pub fn symmetric(&self) -> BigInt {
        symmetric_remainder(&self.residue, &self.modulus)
    }

    /// Residue and modulus restricted to the accumulated primes that do not
    /// divide `d`.
    pub fn coprime_view(&self, d: &BigUint) -> (BigUint, BigUint) {
        let mut m = BigUint::one();
        for &p in &self.primes {
            if !(d % p).is_zero() {
                m *= p;
            }
        }
        let r = &self.residue % &m;
        (r, m)
    }

    /// Bit length of the sub-modulus coprime to `d`.
    pub fn coprime_bits(&self, d: &BigUint) -> u64 {
        self.coprime_view(d).1.bits()
    }

    /// Symmetric remainder of `residue / d` modulo the part of the modulus
    /// coprime to `d`, returned with that sub-modulus.
    pub fn quotient_candidate(&self, d: &BigUint) -> (BigInt, BigUint) {
        let (r, m) = self.coprime_view(d);
        if m.is_one() {
            return (BigInt::zero(), m);
        }
        let inv = (d % &m).modinv(&m).expect("d coprime to sub-modulus");
        let q = (r * inv) % &m;
        (symmetric_remainder(&q, &m), m)
    }
}

/// Functional form of [`CrtAccumulator::add`].
pub fn crt_add(mut acc: CrtAccumulator, p: u64, r_p: u64) -> Result<CrtAccumulator> {
    acc.add(p, r_p)?;
    Ok(acc)
}

/// Representative of `r mod m` in `(-m/2, m/2]`.
pub fn symmetric_remainder(r: &BigUint, m: &BigUint) -> BigInt {
    let r = r % m;
    if (&r << 1u32) > *m {
        BigInt::from(r) - BigInt::from(m.clone())
    } else {
        BigInt::from(r)
    }
}

/// True when `|d| * 2^window < m`, i.e. `log2|d| + window < log2 m`.
pub fn is_stable(d: &BigInt, m: &BigUint, window: u64) -> bool {
    (d.magnitude() << window as usize) < *m
}

/// Source of determinant residues of one fixed matrix, drawing primes from a
/// stream. Residues computed ahead of need are kept for later use so that the
/// sequence of primes added is independent of batching.
#[derive(Debug)]
pub struct ResidueSource<'a> {
    matrix: &'a IntMat,
    stream: PrimeStream,
    pending: VecDeque<(u64, u64)>,
}

impl<'a> ResidueSource<'a> {
    pub fn new(matrix: &'a IntMat, stream: PrimeStream) -> Self {
        Self {
            matrix,
            stream,
            pending: VecDeque::new(),
        }
    }

    /// Computes up to `want` more residues in parallel and queues them.
    fn refill(&mut self, want: usize) {
        let primes = self.stream.take_primes(want.clamp(1, BATCH));
        let a = self.matrix;
        let residues: Vec<(u64, u64)> = primes
            .par_iter()
            .map(|&p| (p, det_mod_p(a, p)))
            .collect();
        self.pending.extend(residues);
    }

    /// Next `(prime, det mod prime)` pair; `hint` is the number of further
    /// pairs the caller expects to need.
    pub fn next_residue(&mut self, hint: usize) -> (u64, u64) {
        if self.pending.is_empty() {
            self.refill(hint);
        }
        self.pending.pop_front().expect("refill produced residues")
    }

    /// Adds residues to `acc` until the sub-modulus coprime to `avoid` has
    /// more than `target_bits` bits. Primes dividing `avoid` are still added
    /// to `acc` but do not count towards the target.
    pub fn extend_until(&mut self, acc: &mut CrtAccumulator, avoid: &BigUint, target_bits: u64) {
        let mut sub = acc.coprime_view(avoid).1;
        while sub.bits() <= target_bits {
            let missing = (target_bits + 1 - sub.bits()).div_ceil(61) as usize;
            let (p, r) = self.next_residue(missing);
            acc.add(p, r).expect("stream primes are distinct");
            if !(avoid % p).is_zero() {
                sub *= p;
            }
        }
    }
}

/// Early-terminating CRT: accumulates `det(a) mod m` until `log2 m > e` or
/// the symmetric remainder `d` satisfies `log2|d| + window < log2 m`.
///
/// The returned `d` is congruent to `det(a)` modulo `m` but is only a
/// candidate for the determinant.
pub fn crt_det_candidate_from(
    source: &mut ResidueSource<'_>,
    acc: &mut CrtAccumulator,
    e: u64,
    window: u64,
) -> BigInt {
    loop {
        let d = acc.symmetric();
        if !acc.primes().is_empty() && (acc.modulus().bits() > e || is_stable(&d, acc.modulus(), window)) {
            return d;
        }
        let missing = (e + 1).saturating_sub(acc.modulus().bits()).div_ceil(61).max(1) as usize;
        let (p, r) = source.next_residue(missing);
        acc.add(p, r).expect("stream primes are distinct");
    }
}

/// Stand-alone form of the early-terminating driver using a fresh prime stream.
pub fn crt_det_candidate(a: &IntMat, e: u64, window: u64) -> (BigInt, CrtAccumulator) {
    let mut source = ResidueSource::new(a, PrimeStream::new());
    let mut acc = CrtAccumulator::new();
    let d = crt_det_candidate_from(&mut source, &mut acc, e, window);
    (d, acc)
}

/// Step (1) quantity: `ceil(log2 maxentry(a))`.
pub fn entry_log_bits(a: &IntMat) -> u64 {
    let me = a.max_entry();
    if me.is_zero() || me.is_one() {
        return 0;
    }
    // ceil(log2 x) = bits(x - 1) for x >= 1
    (me - 1u32).bits()
}

/// Determinant recovered by CRT up to the Hadamard bound; always exact.
pub fn det_by_crt(a: &IntMat, stream: PrimeStream) -> BigInt {
    let h = crate::intmat::hadamard_bits(a);
    let mut source = ResidueSource::new(a, stream);
    let mut acc = CrtAccumulator::new();
    source.extend_until(&mut acc, &BigUint::one(), h);
    acc.symmetric()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bu(x: u64) -> BigUint {
        BigUint::from(x)
    }

    #[test]
    fn add_examples() {
        let acc = crt_add(CrtAccumulator::new(), 5, 2).unwrap();
        assert_eq!((acc.residue(), acc.modulus()), (&bu(2), &bu(5)));
        let acc = crt_add(acc, 7, 3).unwrap();
        assert_eq!((acc.residue(), acc.modulus()), (&bu(17), &bu(35)));
        assert_eq!(crt_add(acc, 5, 1), Err(Error::DuplicatePrime(5)));
    }

    #[test]
    fn symmetric_examples() {
        assert_eq!(symmetric_remainder(&bu(34), &bu(35)), BigInt::from(-1));
        assert_eq!(symmetric_remainder(&bu(17), &bu(35)), BigInt::from(17));
        assert_eq!(symmetric_remainder(&bu(18), &bu(35)), BigInt::from(-17));
        assert_eq!(symmetric_remainder(&bu(0), &bu(35)), BigInt::from(0));
        assert_eq!(symmetric_remainder(&bu(2), &bu(4)), BigInt::from(2));
    }

    #[test]
    fn candidate_examples() {
        let (d, acc) = crt_det_candidate(&IntMat::diagonal(&[3, 5]), 3, DEFAULT_WINDOW);
        assert_eq!(d, BigInt::from(15));
        assert_eq!(acc.primes().len(), 1);
        let (d, acc) = crt_det_candidate(&IntMat::identity(4), 0, DEFAULT_WINDOW);
        assert_eq!(d, BigInt::from(1));
        assert_eq!(acc.primes().len(), 1);
    }

    #[test]
    fn quotient_view_skips_dividing_primes() {
        let mut acc = CrtAccumulator::new();
        for (p, r) in [(5u64, 0u64), (7, 6), (11, 7)] {
            acc.add(p, r).unwrap(); // x = -15
        }
        let (q, m) = acc.quotient_candidate(&bu(5));
        assert_eq!(m, bu(77));
        assert_eq!(q, BigInt::from(-3));
    }

    #[test]
    fn entry_log_bits_values() {
        assert_eq!(entry_log_bits(&IntMat::identity(2)), 0);
        assert_eq!(entry_log_bits(&IntMat::diagonal(&[8])), 3);
        assert_eq!(entry_log_bits(&IntMat::diagonal(&[9])), 4);
        assert_eq!(entry_log_bits(&IntMat::diagonal(&[-5])), 3);
    }
}
