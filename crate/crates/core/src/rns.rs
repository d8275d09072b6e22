//! Residue number systems over stream primes and conversion between two
//! bases without going through big integers.
//!
//! A value `x` is stored as its residues modulo `q_1..q_s`. Writing
//! `xi_i = x * (M/q_i)^{-1} mod q_i`, the sum `sum xi_i / q_i` equals
//! `x/M` plus an integer, which floating point recovers well enough to pick
//! the representative.

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::crt::symmetric_remainder;
use crate::field::{BigReducer, PrimeField};
use crate::modular::ModMat;
use crate::primes::PrimeStream;

/// Distinct primes together with the constants needed for reconstruction.
#[derive(Debug, Clone)]
pub struct RnsBasis {
    primes: Vec<u64>,
    fields: Vec<PrimeField>,
    product: BigUint,
    /// `(M/q_i)^{-1} mod q_i`
    cofactor_inv: Vec<u64>,
    recip: Vec<f64>,
}

impl RnsBasis {
    pub fn new(primes: Vec<u64>) -> Self {
        let product: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
        let fields: Vec<PrimeField> = primes.iter().map(|&p| PrimeField::new(p)).collect();
        let cofactor_inv = primes
            .iter()
            .zip(&fields)
            .map(|(&p, f)| {
                let c = &product / p;
                f.inv(BigReducer::new(*f).reduce_uint(&c))
                    .expect("basis primes are distinct")
            })
            .collect();
        let recip = primes.iter().map(|&p| 1.0 / p as f64).collect();
        Self {
            primes,
            fields,
            product,
            cofactor_inv,
            recip,
        }
    }

    /// Takes primes from `stream` until the product exceeds `2^min_bits`.
    pub fn from_stream(stream: &mut PrimeStream, min_bits: u64) -> Self {
        let mut primes = Vec::new();
        let mut bits = 0u64;
        while bits <= min_bits || primes.is_empty() {
            let p = stream.next_prime();
            primes.push(p);
            bits += 61; // every stream prime exceeds 2^61
        }
        Self::new(primes)
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn fields(&self) -> &[PrimeField] {
        &self.fields
    }

    pub fn product(&self) -> &BigUint {
        &self.product
    }

    pub fn residues(&self, x: &BigInt) -> Vec<u64> {
        self.fields.iter().map(|f| BigReducer::new(*f).reduce(x)).collect()
    }

    /// The representative in `(-M/2, M/2]` of the given residues.
    pub fn reconstruct(&self, residues: &[u64]) -> BigInt {
        let mut acc = BigUint::zero();
        for (i, &r) in residues.iter().enumerate() {
            let xi = self.fields[i].mul(r, self.cofactor_inv[i]);
            acc += (&self.product / self.primes[i]) * xi;
        }
        symmetric_remainder(&acc, &self.product)
    }

    /// Reduces every entry of an integer matrix in every prime.
    pub fn reduce_matrix(&self, a: &crate::intmat::IntMat) -> Vec<ModMat> {
        use rayon::prelude::*;
        self.fields
            .par_iter()
            .map(|f| ModMat::from_intmat(a, &mut BigReducer::new(*f)))
            .collect()
    }

    /// Precomputes the conversion from this basis into `target`.
    pub fn extender(&self, target: &RnsBasis) -> BaseExtender {
        let s = self.len();
        let mut weights = Vec::with_capacity(s * target.len());
        let mut m_mod = Vec::with_capacity(target.len());
        for f in &target.fields {
            let mut red = BigReducer::new(*f);
            for &q in &self.primes {
                weights.push(red.reduce_uint(&(&self.product / q)));
            }
            m_mod.push(red.reduce_uint(&self.product));
        }
        BaseExtender {
            source: self.clone(),
            target_fields: target.fields.clone(),
            weights,
            m_mod,
        }
    }
}

/// Outcome of converting one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extension {
    /// Residues of the symmetric representative, valid when `|x| < M/8`.
    Exact,
    /// Residues of some `x' = x (mod M)` with `|x'| <= M`.
    Approximate,
}

/// Source-to-target base conversion tables.
#[derive(Debug, Clone)]
pub struct BaseExtender {
    source: RnsBasis,
    target_fields: Vec<PrimeField>,
    /// `(M/q_i) mod t_j`, row `j`
    weights: Vec<u64>,
    m_mod: Vec<u64>,
}

impl BaseExtender {
    pub fn source(&self) -> &RnsBasis {
        &self.source
    }

    /// Converts the value with residues `xs` into `out`. In exact mode the
    /// return value is `false` when the value is too large to be recovered,
    /// in which case `out` is unspecified.
    pub fn extend(&self, xs: &[u64], out: &mut [u64], mode: Extension, xi: &mut [u64]) -> bool {
        let src = &self.source;
        let s = src.len();
        let mut frac = 0.0f64;
        for i in 0..s {
            xi[i] = src.fields[i].mul(xs[i], src.cofactor_inv[i]);
            frac += xi[i] as f64 * src.recip[i];
        }
        let alpha = frac.round();
        if mode == Extension::Exact && (frac - alpha).abs() >= 0.125 {
            return false;
        }
        let alpha = alpha as u64;
        for (j, f) in self.target_fields.iter().enumerate() {
            let w = &self.weights[j * s..(j + 1) * s];
            let v = f.reduce_u128(f.dot_lazy(xi, w));
            out[j] = f.sub(v, f.mul(f.reduce_word(alpha), self.m_mod[j]));
        }
        true
    }

    /// Entrywise conversion of a matrix held as one `ModMat` per source prime.
    /// Returns `None` in exact mode when some entry is out of range.
    pub fn extend_matrix(&self, src: &[ModMat], mode: Extension) -> Option<Vec<ModMat>> {
        let (rows, cols) = (src[0].rows, src[0].cols);
        let t = self.target_fields.len();
        let mut out: Vec<ModMat> = (0..t).map(|_| ModMat::zeros(rows, cols)).collect();
        let mut xs = vec![0u64; src.len()];
        let mut xi = vec![0u64; src.len()];
        let mut ys = vec![0u64; t];
        for k in 0..rows * cols {
            for (x, m) in xs.iter_mut().zip(src) {
                *x = m.data[k];
            }
            if !self.extend(&xs, &mut ys, mode, &mut xi) {
                return None;
            }
            for (m, &y) in out.iter_mut().zip(&ys) {
                m.data[k] = y;
            }
        }
        Some(out)
    }
}
