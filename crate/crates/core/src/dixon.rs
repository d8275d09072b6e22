//! Rational solutions of `A x = b` by p-adic lifting with a single inverse
//! modulo a word prime, followed by rational reconstruction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::crt::symmetric_remainder;
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::intmat::{hadamard_bits, IntMat};
use crate::modular::inverse_mod;
use crate::primes::PrimeStream;
use crate::rns::{Extension, RnsBasis};

/// `x = y / d` with `d > 0` minimal, so `gcd(gcd(y), d) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalSolution {
    pub y: Vec<BigInt>,
    pub d: BigInt,
}

/// Smallest `(num, den)` with `num = r den (mod m)`, `|num| <= num_bound`,
/// `0 < den <= den_bound` and `gcd(num, den) = 1`; the answer is unique when
/// `m > 2 num_bound den_bound`.
pub fn rational_reconstruct(
    r: &BigInt,
    m: &BigInt,
    num_bound: &BigInt,
    den_bound: &BigInt,
) -> Result<(BigInt, BigInt)> {
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > num_bound {
        let (q, rem) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, rem);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    if t1.is_zero() || t1.abs() > *den_bound || !r1.gcd(&t1).is_one() {
        return Err(Error::NoSolution);
    }
    if t1.is_negative() {
        Ok((-r1, -t1))
    } else {
        Ok((r1, t1))
    }
}

/// `sum_i digits[i] p^i` for each coordinate, by pairwise combination.
fn combine_digits(digits: &[Vec<u64>], coord: usize, powers: &[BigInt]) -> BigInt {
    let mut level: Vec<BigInt> = digits.iter().map(|d| BigInt::from(d[coord])).collect();
    let mut k = 0;
    while level.len() > 1 {
        let pw = &powers[k];
        level = level
            .chunks(2)
            .map(|c| if c.len() == 2 { &c[0] + pw * &c[1] } else { c[0].clone() })
            .collect();
        k += 1;
    }
    level.pop().unwrap_or_default()
}

/// Solves `A x = b` over the rationals. `p` must not divide `det(A)`.
pub fn solve_rational(a: &IntMat, b: &[BigInt], p: u64) -> Result<RationalSolution> {
    let n = a.square_dim()?;
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!("rhs of length {} for n = {n}", b.len())));
    }
    let fp = PrimeField::new(p);
    let basis_p = RnsBasis::new(vec![p]);
    let a_p = basis_p.reduce_matrix(a).pop().expect("one prime");
    let (c, _) = inverse_mod(&a_p, &fp).ok_or(Error::SingularModP(p))?;
    if b.iter().all(Zero::is_zero) {
        return Ok(RationalSolution { y: vec![BigInt::zero(); n], d: BigInt::one() });
    }

    let h = hadamard_bits(a);
    let n_bits = (n as u64).max(1).ilog2() as u64 + 1;
    let b_bits = b.iter().map(|x| x.bits()).max().unwrap_or(0);
    let den_bits = h;
    let num_bits = h + n_bits + b_bits;
    let steps = (den_bits + num_bits + 1).div_ceil(61) as usize;

    // residual r_{i+1} = (r_i - A x_i) / p stays below |b| + n maxentry(A)
    let a_bits = a.max_entry_bits();
    let r_bits = b_bits.max(n_bits + a_bits) + 6;
    let mut stream = PrimeStream::new();
    let mut rp = Vec::new();
    while (rp.len() as u64) * 61 <= r_bits {
        let q = stream.next_prime();
        if q != p {
            rp.push(q);
        }
    }
    let rbasis = RnsBasis::new(rp);
    let to_p = rbasis.extender(&basis_p);
    let a_r = rbasis.reduce_matrix(a);
    let t = rbasis.len();
    // residual stored per prime
    let mut resid: Vec<Vec<u64>> = (0..t).map(|j| b.iter().map(|x| rbasis.residues(x)[j]).collect()).collect();
    let p_inv: Vec<u64> = rbasis
        .fields()
        .iter()
        .map(|f| f.inv(f.reduce_word(p)).expect("distinct primes"))
        .collect();

    // numerator times denominator is usually near H |b|, about half the a
    // priori precision
    let typical = (h + n_bits + b_bits + 2 * QUOTIENT_GAP_BITS).div_ceil(61) as usize;
    let mut checkpoints = vec![steps];
    if typical < steps {
        checkpoints = vec![typical, (typical + steps) / 2, steps];
        checkpoints.dedup();
    }

    let mut digits: Vec<Vec<u64>> = Vec::with_capacity(steps);
    let mut xs = vec![0u64; t];
    let mut xi = vec![0u64; t];
    let mut rmod_p = vec![0u64; n];
    let mut out = [0u64];
    for &stop in &checkpoints {
        while digits.len() < stop {
            for (k, slot) in rmod_p.iter_mut().enumerate() {
                for j in 0..t {
                    xs[j] = resid[j][k];
                }
                let ok = to_p.extend(&xs, &mut out, Extension::Exact, &mut xi);
                if !ok {
                    return Err(Error::BoundViolation("lifting residual out of range".into()));
                }
                *slot = out[0];
            }
            let x = c.mul_vec(&rmod_p, &fp);
            resid
                .par_iter_mut()
                .zip(a_r.par_iter())
                .zip(rbasis.fields().par_iter().zip(p_inv.par_iter()))
                .for_each(|((r, am), (f, &pi))| {
                    let xr: Vec<u64> = x.iter().map(|&v| f.reduce_word(v)).collect();
                    let ax = am.mul_vec(&xr, f);
                    for (ri, axi) in r.iter_mut().zip(ax) {
                        *ri = f.mul(f.sub(*ri, axi), pi);
                    }
                });
            digits.push(x);
        }
        let bounds = (stop == steps).then(|| (BigInt::one() << num_bits, BigInt::one() << den_bits));
        if let Some(sol) = reconstruct(a, b, &digits, p, bounds.as_ref()) {
            return Ok(sol);
        }
    }
    Err(Error::ReconstructionFailure("no solution within the proven bounds".into()))
}

/// Early reconstruction stops at a quotient of at least this many bits.
const QUOTIENT_GAP_BITS: u64 = 40;

/// `(num, den)` with `num = r den (mod m)` read off the first Euclidean
/// quotient of at least `QUOTIENT_GAP_BITS` bits; such a gap appears right
/// after the true fraction once `m` exceeds `num den` by that margin.
fn reconstruct_by_gap(r: &BigInt, m: &BigInt) -> Option<(BigInt, BigInt)> {
    let (mut r0, mut r1) = (m.clone(), r.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let (q, rem) = r0.div_rem(&r1);
        if q.bits() >= QUOTIENT_GAP_BITS {
            return Some(if t1.is_negative() { (-r1, -t1) } else { (r1, t1) });
        }
        r0 = std::mem::replace(&mut r1, rem);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    None
}

/// Rebuilds the p-adic approximation from its digits and reconstructs a
/// common-denominator solution, accepted only if `A y = d b` holds exactly.
/// With `bounds = (num, den)` the reconstruction falls back to the proven
/// bounded search; without, only the quotient-gap guess is tried.
fn reconstruct(
    a: &IntMat,
    b: &[BigInt],
    digits: &[Vec<u64>],
    p: u64,
    bounds: Option<&(BigInt, BigInt)>,
) -> Option<RationalSolution> {
    let n = b.len();
    let pb = BigInt::from(p);
    let mut powers = vec![pb.clone()];
    while (1usize << powers.len()) < digits.len() {
        let last = powers.last().unwrap();
        powers.push(last * last);
    }
    let modulus = pb.pow(digits.len() as u32);
    let xs_full: Vec<BigInt> = (0..n)
        .into_par_iter()
        .map(|i| combine_digits(digits, i, &powers))
        .collect();

    let m_u = modulus.magnitude();
    let m_bits = modulus.bits();
    let solve = |by_gap: bool| -> Option<RationalSolution> {
        let mut d = BigInt::one();
        let mut y: Vec<BigInt> = Vec::with_capacity(n);
        for xi in &xs_full {
            let z = symmetric_remainder(&(xi * &d).mod_floor(&modulus).into_parts().1, m_u);
            let (num, den) = if by_gap {
                if z.bits() + d.bits() + QUOTIENT_GAP_BITS <= m_bits {
                    (z, BigInt::one())
                } else {
                    reconstruct_by_gap(&z, &modulus)?
                }
            } else {
                let (nb, db) = bounds?;
                if z.abs() <= *nb {
                    (z, BigInt::one())
                } else {
                    rational_reconstruct(&z, &modulus, nb, &(db / &d)).ok()?
                }
            };
            if !den.is_one() {
                for v in y.iter_mut() {
                    *v *= &den;
                }
                d *= &den;
            }
            y.push(num);
        }
        let lhs = a.mul_vec(&y).ok()?;
        if lhs.iter().zip(b).any(|(l, bi)| *l != &d * bi) {
            return None;
        }
        Some(RationalSolution { y, d })
    };
    let RationalSolution { mut y, mut d } = solve(true).or_else(|| solve(false))?;
    let g = y.iter().fold(d.clone(), |g, v| if g.is_one() { g } else { g.gcd(&v.mod_floor(&g)) });
    if !g.is_one() {
        for v in y.iter_mut() {
            *v /= &g;
        }
        d /= &g;
    }
    Some(RationalSolution { y, d })
}
