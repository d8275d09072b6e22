//! Benchmark matrices with prescribed Smith invariants.
//!
//! `A = L1 U1 diag(s) L2 U2` where the `L`, `U` factors are random unit
//! lower/upper triangular matrices, so `A` is `diag(s)` up to unimodular
//! row and column operations and `det(A) = prod s_i`.

use num_bigint::{BigInt, RandBigInt};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::intmat::IntMat;
use crate::primes::is_prime_u64;

/// Maximum number of coefficient-size adjustments.
const MAX_ATTEMPTS: u64 = 20;

/// Parameters of [`gen_structured`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatGenSpec {
    pub n: usize,
    /// Target bit length of the largest entry.
    pub entry_bits: u64,
    /// Number of invariant factors equal to the prime `p`; the rest are 1.
    pub num_nontrivial: usize,
    /// Bit length of `p`.
    pub factor_bits: u32,
    pub seed: u64,
    /// Pairs of triangular factors applied on each side; `None` means one,
    /// `Some(0)` returns `diag(s)` itself.
    pub mixing_rounds: Option<usize>,
    /// Uses this value instead of a random prime.
    pub forced_factor: Option<u64>,
}

impl MatGenSpec {
    pub fn new(n: usize, entry_bits: u64, num_nontrivial: usize, factor_bits: u32, seed: u64) -> Self {
        Self {
            n,
            entry_bits,
            num_nontrivial,
            factor_bits,
            seed,
            mixing_rounds: None,
            forced_factor: None,
        }
    }

    /// The matrix family of the benchmark: half the invariants are an 11-bit
    /// prime, entries about 1000 bits.
    pub fn benchmark(n: usize, seed: u64) -> Self {
        Self::new(n, 1000, n / 2, 11, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be positive".into()));
        }
        if self.num_nontrivial > self.n {
            return Err(Error::InvalidSpec("more nontrivial factors than rows".into()));
        }
        if self.factor_bits < 2 || self.factor_bits > 62 {
            return Err(Error::InvalidSpec("factor_bits must lie in 2..=62".into()));
        }
        if self.entry_bits < self.factor_bits as u64 {
            return Err(Error::InvalidSpec("entry_bits below factor_bits".into()));
        }
        if matches!(self.forced_factor, Some(f) if f < 2) {
            return Err(Error::InvalidSpec("forced factor must be at least 2".into()));
        }
        Ok(())
    }
}

/// The invariant factor `p` a spec resolves to.
pub fn spec_factor(spec: &MatGenSpec) -> u64 {
    if let Some(f) = spec.forced_factor {
        return f;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let lo = 1u64 << (spec.factor_bits - 1);
    loop {
        let c = rng.gen_range(lo..lo << 1);
        if is_prime_u64(c) {
            return c;
        }
    }
}

/// Random unit triangular matrix with off-diagonal entries of at most
/// `bits` bits; stored densely.
fn unit_triangular(n: usize, bits: u64, lower: bool, rng: &mut ChaCha20Rng) -> IntMat {
    let mut m = IntMat::identity(n);
    let bound = BigInt::one() << bits;
    for i in 0..n {
        for j in 0..n {
            if (lower && j < i) || (!lower && j > i) {
                m[(i, j)] = rng.gen_bigint_range(&(-&bound + 1), &bound);
            }
        }
    }
    m
}

/// Dense product, parallel over rows.
fn product(a: &IntMat, b: &IntMat) -> IntMat {
    let n = a.rows();
    let bt = b.transpose();
    let data: Vec<BigInt> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let row = a.row(i);
            (0..b.cols())
                .map(|j| {
                    let mut acc = BigInt::zero();
                    for (x, y) in row.iter().zip(bt.row(j)) {
                        if !x.is_zero() && !y.is_zero() {
                            acc += x * y;
                        }
                    }
                    acc
                })
                .collect::<Vec<_>>()
        })
        .collect();
    IntMat::from_vec(n, b.cols(), data).expect("shape")
}

fn assemble(spec: &MatGenSpec, p: u64, coeff_bits: u64, rounds: usize, attempt: u64) -> IntMat {
    let n = spec.n;
    let diag: Vec<BigInt> = (0..n)
        .map(|i| {
            if i >= n - spec.num_nontrivial {
                BigInt::from(p)
            } else {
                BigInt::one()
            }
        })
        .collect();
    let mut a = IntMat::diagonal(&diag);
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(attempt + 1));
    for _ in 0..rounds {
        let l1 = unit_triangular(n, coeff_bits, true, &mut rng);
        let u1 = unit_triangular(n, coeff_bits, false, &mut rng);
        let l2 = unit_triangular(n, coeff_bits, true, &mut rng);
        let u2 = unit_triangular(n, coeff_bits, false, &mut rng);
        let left = product(&l1, &u1);
        let right = product(&l2, &u2);
        a = product(&product(&left, &a), &right);
    }
    a
}

/// Generates a matrix whose Smith form is `diag(1, ..., 1, p, ..., p)` with
/// `num_nontrivial` copies of `p`, so `det = p^num_nontrivial`, and whose
/// largest entry has between `0.8` and `1.2` times `entry_bits` bits.
pub fn gen_structured(spec: &MatGenSpec) -> Result<IntMat> {
    spec.validate()?;
    let p = spec_factor(spec);
    let rounds = spec.mixing_rounds.unwrap_or(1);
    if rounds == 0 || spec.n == 1 {
        return Ok(assemble(spec, p, 0, 0, 0));
    }
    let n_bits = 64 - (spec.n as u64).leading_zeros() as u64;
    let per_round = 4 * rounds as u64;
    let target = spec.entry_bits as i64;
    let (lo, hi) = (spec.entry_bits * 4 / 5, spec.entry_bits * 6 / 5);
    let p_bits = 64 - p.leading_zeros() as i64;
    let mut coeff = (target - p_bits - 3 * n_bits as i64 * rounds as i64).max(per_round as i64) / per_round as i64;
    for attempt in 0..MAX_ATTEMPTS {
        let a = assemble(spec, p, coeff.max(1) as u64, rounds, attempt);
        let bits = a.max_entry_bits();
        if (lo..=hi).contains(&bits) {
            return Ok(a);
        }
        let step = (target - bits as i64) / per_round as i64;
        coeff = (coeff + if step == 0 { (target - bits as i64).signum() } else { step }).max(1);
    }
    Err(Error::GenerationFailed(format!(
        "no coefficient size reaches {lo}..={hi} entry bits after {MAX_ATTEMPTS} attempts"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unmixed_is_diagonal() {
        let mut spec = MatGenSpec::new(2, 3, 1, 3, 0);
        spec.mixing_rounds = Some(0);
        spec.forced_factor = Some(5);
        assert_eq!(gen_structured(&spec).unwrap(), IntMat::diagonal(&[1, 5]));
    }

    #[test]
    fn factor_has_requested_size() {
        for seed in 0..20 {
            let p = spec_factor(&MatGenSpec::new(4, 100, 2, 11, seed));
            assert!(is_prime_u64(p) && (1024..2048).contains(&p));
        }
    }

    #[test]
    fn deterministic_and_sized() {
        let spec = MatGenSpec::benchmark(30, 1);
        let a = gen_structured(&spec).unwrap();
        assert_eq!(a, gen_structured(&spec).unwrap());
        assert!((800..=1200).contains(&a.max_entry_bits()), "{}", a.max_entry_bits());
    }

    #[test]
    fn invalid_specs() {
        assert!(gen_structured(&MatGenSpec::new(2, 10, 3, 3, 0)).is_err());
        assert!(gen_structured(&MatGenSpec::new(2, 2, 1, 3, 0)).is_err());
        assert!(gen_structured(&MatGenSpec::new(0, 10, 0, 3, 0)).is_err());
    }
}
