//! Dense matrix kernels over a word-size prime field: reduction of integer
//! matrices, determinants, inverses and products.

use crate::field::{BigReducer, PrimeField};
use crate::intmat::IntMat;

/// Row-major `rows x cols` matrix of plain residues modulo `field`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl ModMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Reduces every entry of `a` modulo the reducer's prime.
    pub fn from_intmat(a: &IntMat, reducer: &mut BigReducer) -> Self {
        Self {
            rows: a.rows(),
            cols: a.cols(),
            data: a.entries().iter().map(|x| reducer.reduce(x)).collect(),
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// `self * other` where `other_t` is the transpose of the right factor.
    pub fn mul_transposed(&self, other_t: &ModMat, f: &PrimeField) -> ModMat {
        assert_eq!(self.cols, other_t.cols, "inner dimensions differ");
        let mut out = ModMat::zeros(self.rows, other_t.rows);
        for i in 0..self.rows {
            let a = self.row(i);
            let dst = &mut out.data[i * other_t.rows..(i + 1) * other_t.rows];
            for (j, d) in dst.iter_mut().enumerate() {
                *d = f.dot(a, other_t.row(j));
            }
        }
        out
    }

    pub fn mul(&self, other: &ModMat, f: &PrimeField) -> ModMat {
        self.mul_transposed(&other.transpose(), f)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[u64], f: &PrimeField) -> Vec<u64> {
        (0..self.rows).map(|i| f.dot(self.row(i), v)).collect()
    }
}

/// Determinant modulo `p` by Gaussian elimination; `0` when singular.
pub fn det_mod(mut m: ModMat, f: &PrimeField) -> u64 {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    for x in m.data.iter_mut() {
        *x = f.to_mont(*x);
    }
    let mut det = f.mont_one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| m.data[r * n + col] != 0) else {
            return 0;
        };
        if piv != col {
            for k in col..n {
                m.data.swap(piv * n + k, col * n + k);
            }
            det = f.neg(det);
        }
        let pv = m.data[col * n + col];
        det = f.mont_mul(det, pv);
        // inverse of the pivot, kept in Montgomery form
        let inv = f.to_mont(f.inv(f.from_mont(pv)).expect("nonzero pivot"));
        let (head, tail) = m.data.split_at_mut((col + 1) * n);
        let pivot_row = &head[col * n + col + 1..col * n + n];
        for r in 0..(n - col - 1) {
            let row = &mut tail[r * n..(r + 1) * n];
            let lead = row[col];
            if lead == 0 {
                continue;
            }
            let factor = f.mont_mul(lead, inv);
            row[col] = 0;
            for (x, &y) in row[col + 1..].iter_mut().zip(pivot_row) {
                *x = f.sub(*x, f.mont_mul(factor, y));
            }
        }
    }
    f.from_mont(det)
}

/// `det(a) mod p` for an integer matrix.
pub fn det_mod_p(a: &IntMat, p: u64) -> u64 {
    assert!(a.is_square(), "det_mod_p requires a square matrix");
    let f = PrimeField::new(p);
    let mut reducer = BigReducer::new(f);
    det_mod(ModMat::from_intmat(a, &mut reducer), &f)
}

/// Inverse modulo `p` by Gauss-Jordan elimination, together with the
/// determinant; `None` when singular.
pub fn inverse_mod(m: &ModMat, f: &PrimeField) -> Option<(ModMat, u64)> {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let w = 2 * n;
    let mut aug = vec![0u64; n * w];
    for i in 0..n {
        for j in 0..n {
            aug[i * w + j] = f.to_mont(m.data[i * n + j]);
        }
        aug[i * w + n + i] = f.mont_one();
    }
    let mut det = f.mont_one();
    for col in 0..n {
        let piv = (col..n).find(|&r| aug[r * w + col] != 0)?;
        if piv != col {
            for k in 0..w {
                aug.swap(piv * w + k, col * w + k);
            }
            det = f.neg(det);
        }
        let pv = aug[col * w + col];
        det = f.mont_mul(det, pv);
        let inv = f.to_mont(f.inv(f.from_mont(pv)).expect("nonzero pivot"));
        for k in col..w {
            aug[col * w + k] = f.mont_mul(aug[col * w + k], inv);
        }
        let pivot_row: Vec<u64> = aug[col * w..(col + 1) * w].to_vec();
        for r in 0..n {
            if r == col {
                continue;
            }
            let lead = aug[r * w + col];
            if lead == 0 {
                continue;
            }
            let row = &mut aug[r * w..(r + 1) * w];
            for k in col..w {
                row[k] = f.sub(row[k], f.mont_mul(lead, pivot_row[k]));
            }
        }
    }
    let mut inv = ModMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv.data[i * n + j] = f.from_mont(aug[i * w + n + j]);
        }
    }
    Some((inv, f.from_mont(det)))
}
