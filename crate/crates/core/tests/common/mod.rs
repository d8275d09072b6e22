//! Brute-force oracles and random inputs shared by the integration tests.
#![allow(dead_code)]

use detz::IntMat;
use num_bigint::{BigInt, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Laplace expansion along the first row.
pub fn cofactor_det(a: &IntMat) -> BigInt {
    let rows: Vec<Vec<BigInt>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    cofactor(&rows)
}

fn cofactor(m: &[Vec<BigInt>]) -> BigInt {
    match m.len() {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        n => {
            let mut total = BigInt::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<BigInt>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &m[0][j] * cofactor(&minor);
                if j % 2 == 0 {
                    total += term;
                } else {
                    total -= term;
                }
            }
            total
        }
    }
}

/// Fraction-free elimination with exact divisions, for sizes where
/// cofactor expansion is too slow.
pub fn bareiss_det(a: &IntMat) -> BigInt {
    let n = a.rows();
    let mut m: Vec<Vec<BigInt>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigInt::zero();
        };
        if p != k {
            m.swap(p, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
            m[i][k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        sign
    } else {
        sign * &m[n - 1][n - 1]
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for last in k - 1..n {
        for mut s in subsets(last, k - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out
}

/// Smith invariants from determinantal divisors: `s_k = d_k / d_{k-1}`
/// where `d_k` is the gcd of all `k x k` minors.
pub fn smith_invariants(a: &IntMat) -> Vec<BigInt> {
    let n = a.rows();
    let mut prev = BigInt::one();
    let mut out = Vec::new();
    for k in 1..=n {
        let mut g = BigInt::zero();
        for rs in subsets(n, k) {
            for cs in subsets(n, k) {
                let minor: Vec<Vec<BigInt>> =
                    rs.iter().map(|&i| cs.iter().map(|&j| a[(i, j)].clone()).collect()).collect();
                g = g.gcd(&cofactor(&minor));
            }
        }
        if g.is_zero() {
            out.push(BigInt::zero());
            continue;
        }
        out.push(&g / &prev);
        prev = g;
    }
    out
}

pub fn random_matrix(rng: &mut ChaCha20Rng, n: usize, lo: i64, hi: i64) -> IntMat {
    let data = (0..n * n).map(|_| BigInt::from(rng.gen_range(lo..=hi))).collect();
    IntMat::from_vec(n, n, data).unwrap()
}

/// Entries uniform in `(-2^bits, 2^bits)`.
pub fn random_bits_matrix(rng: &mut ChaCha20Rng, n: usize, bits: u64) -> IntMat {
    let bound = BigInt::one() << bits;
    let data = (0..n * n).map(|_| rng.gen_bigint_range(&(-&bound + 1), &bound)).collect();
    IntMat::from_vec(n, n, data).unwrap()
}

pub fn fibonacci(k: usize) -> BigInt {
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 0..k {
        let c = &a + &b;
        a = b;
        b = c;
    }
    a
}

/// `[[F(k-1), F(k)], [F(k), F(k+1)]]`, determinant `(-1)^k`.
pub fn fibonacci_matrix(k: usize) -> IntMat {
    let data = vec![fibonacci(k - 1), fibonacci(k), fibonacci(k), fibonacci(k + 1)];
    IntMat::from_vec(2, 2, data).unwrap()
}

/// Unimodular matrix whose inverse has entries close to the Hadamard bound:
/// first row `(1, e, ..., e, big)`, then a unit lower triangular block with
/// `big` on the subdiagonal and `e` below it.
pub fn large_inverse_family(n: usize, big: i64, e: i64) -> IntMat {
    let mut a = IntMat::zeros(n, n);
    a[(0, 0)] = BigInt::one();
    for j in 1..n - 1 {
        a[(0, j)] = BigInt::from(e);
    }
    a[(0, n - 1)] = BigInt::from(big);
    for i in 1..n {
        a[(i, i)] = BigInt::one();
        if i >= 2 {
            a[(i, i - 1)] = BigInt::from(big);
        }
        for j in 1..i.saturating_sub(1) {
            a[(i, j)] = BigInt::from(e);
        }
    }
    a
}
