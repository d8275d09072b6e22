//! Deterministic test for `det(A) = ±1`.
//!
//! With `B = A^{-1} mod X` and the integral residue `R = (I - A B) / X`, the
//! recursion `R' = (R^2 - A C) / X`, `C = B R^2 mod X`, advances an implicit
//! approximate inverse from precision `X^N` to `X^{2N+1}`. Only `R` is kept,
//! in two residue bases: one spanning `X` and one large enough to hold `R`
//! exactly. Once `X^N` exceeds the adjugate bound, a unimodular `A` must have
//! a tiny correction `Z = A^{-1} R`, and `A Z = R` proves integrality of the
//! inverse.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::intmat::{adjugate_bits, IntMat};
use crate::modular::{det_mod_p, inverse_mod, ModMat};
use crate::primes::PrimeStream;
use crate::rns::{Extension, RnsBasis};

/// Verdict of [`verify_unimodular`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnimodResult {
    /// `det(A) = sign`.
    Unimodular(i8),
    NotUnimodular,
}

impl UnimodResult {
    pub fn is_unimodular(&self) -> bool {
        matches!(self, Self::Unimodular(_))
    }
}

/// Largest entry of the correction matrix accepted for a unimodular input.
const Z_BOUND: i64 = 3;

fn bitlen(x: u64) -> u64 {
    (u64::BITS - x.leading_zeros()) as u64
}

/// Decides unimodularity with primes from a fresh stream.
pub fn verify_unimodular(a: &IntMat) -> Result<UnimodResult> {
    verify_unimodular_with(a, &mut PrimeStream::new())
}

/// Decides unimodularity, drawing every prime it needs from `stream`.
pub fn verify_unimodular_with(a: &IntMat, stream: &mut PrimeStream) -> Result<UnimodResult> {
    let n = a.square_dim()?;
    let p = stream.next_prime();
    let dp = det_mod_p(a, p);
    let sign: i8 = if dp == 1 {
        1
    } else if dp == p - 1 {
        -1
    } else {
        return Ok(UnimodResult::NotUnimodular);
    };

    let a_bits = a.max_entry_bits().max(1);
    let n_bits = bitlen(n as u64);
    // X >= 8 n^2 maxentry keeps every residue below 2 n maxentry
    let qb = RnsBasis::from_stream(stream, 3 + 2 * n_bits + a_bits);
    // Y >= 32 n maxentry makes those residues exactly recoverable
    let rb = RnsBasis::from_stream(stream, 6 + n_bits + a_bits);
    let target_bits = adjugate_bits(a);
    let x_bits = qb.product().bits() - 1;

    let a_q = qb.reduce_matrix(a);
    let inverses: Vec<Option<ModMat>> = a_q
        .par_iter()
        .zip(qb.fields().par_iter())
        .map(|(m, f)| {
            let (inv, det) = inverse_mod(m, f)?;
            let want = if sign == 1 { 1 } else { f.modulus() - 1 };
            (det == want).then_some(inv)
        })
        .collect();
    let Some(b_q) = inverses.into_iter().collect::<Option<Vec<ModMat>>>() else {
        return Ok(UnimodResult::NotUnimodular);
    };
    let a_r = rb.reduce_matrix(a);
    let q2r = qb.extender(&rb);
    let r2q = rb.extender(&qb);
    let x_inv: Vec<u64> = rb
        .fields()
        .iter()
        .map(|f| {
            let xm = crate::field::BigReducer::new(*f).reduce_uint(qb.product());
            f.inv(xm).expect("disjoint bases")
        })
        .collect();

    // R = (I - A B) / X with B any lift of A^{-1} mod X of size at most X
    let b_r = q2r
        .extend_matrix(&b_q, Extension::Approximate)
        .expect("approximate extension always succeeds");
    let mut r_r: Vec<ModMat> = (0..rb.len())
        .into_par_iter()
        .map(|j| {
            let f = &rb.fields()[j];
            let mut ab = a_r[j].mul(&b_r[j], f);
            for (k, v) in ab.data.iter_mut().enumerate() {
                let diag = if k % (n + 1) == 0 { 1 } else { 0 };
                *v = f.mul(f.sub(diag, *v), x_inv[j]);
            }
            ab
        })
        .collect();
    let mut r_q = lift_residue(&r2q, &r_r)?;

    let mut prec: u64 = 1;
    while prec * x_bits < target_bits {
        if r_r.iter().all(|m| m.data.iter().all(|&v| v == 0)) {
            // A B_N = I exactly
            return Ok(UnimodResult::Unimodular(sign));
        }
        let c_q: Vec<ModMat> = (0..qb.len())
            .into_par_iter()
            .map(|i| {
                let f = &qb.fields()[i];
                let r2 = r_q[i].mul(&r_q[i], f);
                b_q[i].mul(&r2, f)
            })
            .collect();
        let c_r = q2r
            .extend_matrix(&c_q, Extension::Approximate)
            .expect("approximate extension always succeeds");
        r_r = (0..rb.len())
            .into_par_iter()
            .map(|j| {
                let f = &rb.fields()[j];
                let mut r2 = r_r[j].mul(&r_r[j], f);
                let ac = a_r[j].mul(&c_r[j], f);
                for (v, w) in r2.data.iter_mut().zip(&ac.data) {
                    *v = f.mul(f.sub(*v, *w), x_inv[j]);
                }
                r2
            })
            .collect();
        r_q = lift_residue(&r2q, &r_r)?;
        prec = 2 * prec + 1;
    }

    // Z = B R mod X, which equals A^{-1} R when A is unimodular
    let z_q: Vec<ModMat> = (0..qb.len())
        .into_par_iter()
        .map(|i| b_q[i].mul(&r_q[i], &qb.fields()[i]))
        .collect();
    let z: Option<Vec<i64>> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let res: Vec<u64> = z_q.iter().map(|m| m.data[k]).collect();
            let v: BigInt = qb.reconstruct(&res);
            (v.abs() <= BigInt::from(Z_BOUND)).then(|| v.to_i64().expect("small"))
        })
        .collect();
    let Some(z) = z else {
        return Ok(UnimodResult::NotUnimodular);
    };
    let ok = (0..rb.len()).into_par_iter().all(|j| {
        let f = &rb.fields()[j];
        let zm = ModMat {
            rows: n,
            cols: n,
            data: z.iter().map(|&v| f.from_i64(v)).collect(),
        };
        a_r[j].mul(&zm, f) == r_r[j]
    });
    Ok(if ok {
        UnimodResult::Unimodular(sign)
    } else {
        UnimodResult::NotUnimodular
    })
}

fn lift_residue(r2q: &crate::rns::BaseExtender, r_r: &[ModMat]) -> Result<Vec<ModMat>> {
    r2q.extend_matrix(r_r, Extension::Exact)
        .ok_or_else(|| Error::BoundViolation("inverse residue exceeded its bound".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verdict(a: &IntMat) -> UnimodResult {
        verify_unimodular(a).unwrap()
    }

    #[test]
    fn examples() {
        assert_eq!(verdict(&IntMat::identity(5)), UnimodResult::Unimodular(1));
        assert_eq!(verdict(&IntMat::from_rows(&[[34, 55], [55, 89]])), UnimodResult::Unimodular(1));
        assert_eq!(verdict(&IntMat::from_rows(&[[55, 89], [34, 55]])), UnimodResult::Unimodular(-1));
        assert_eq!(verdict(&IntMat::diagonal(&[1, 2])), UnimodResult::NotUnimodular);
        assert_eq!(verdict(&IntMat::diagonal(&[-1])), UnimodResult::Unimodular(-1));
    }

    #[test]
    fn large_inverse() {
        // unit upper bidiagonal with a large superdiagonal: inverse entries grow like N^(n-1)
        let n = 12;
        let mut a = IntMat::identity(n);
        for i in 0..n - 1 {
            a[(i, i + 1)] = BigInt::from(1_000_000_007i64);
        }
        assert_eq!(verdict(&a), UnimodResult::Unimodular(1));
        a[(n - 1, 0)] = BigInt::from(1);
        assert_eq!(verdict(&a), UnimodResult::NotUnimodular);
    }
}
