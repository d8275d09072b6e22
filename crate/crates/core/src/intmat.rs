//! Dense arbitrary-precision integer matrices, entry/determinant bounds and
//! the plain-text matrix format.

use std::fmt::Write as _;
use std::ops::{Index, IndexMut};

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Error, Result};

/// Dense row-major matrix of arbitrary-precision integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::from(1);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::WrongEntryCount {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows of anything convertible to `BigInt`.
    ///
    /// Panics if the rows are ragged; intended for literals in tests and examples.
    pub fn from_rows<T, R>(rows: &[R]) -> Self
    where
        T: Clone + Into<BigInt>,
        R: AsRef<[T]>,
    {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned().map(Into::into));
        }
        Self { rows: r, cols: c, data }
    }

    pub fn diagonal<T: Clone + Into<BigInt>>(diag: &[T]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in diag.iter().enumerate() {
            m[(i, i)] = v.clone().into();
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square, non-empty matrix.
    pub fn square_dim(&self) -> Result<usize> {
        if self.rows == self.cols && self.rows >= 1 {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [BigInt] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &BigInt> + '_ {
        (0..self.rows).map(move |i| &self.data[i * self.cols + j])
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Exact product `self * other`.
    pub fn mul(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Exact matrix-vector product.
    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} * vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// Maximum absolute entry, `0` for an empty matrix.
    pub fn max_entry(&self) -> BigUint {
        self.data
            .iter()
            .map(|x| x.magnitude())
            .max()
            .cloned()
            .unwrap_or_default()
    }

    /// Bit length of [`IntMat::max_entry`].
    pub fn max_entry_bits(&self) -> u64 {
        self.data.iter().map(|x| x.bits()).max().unwrap_or(0)
    }

    /// Exact squared Euclidean norms of the rows.
    pub fn row_norms_sq(&self) -> Vec<BigUint> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.magnitude() * x.magnitude()).sum())
            .collect()
    }

    /// Exact squared Euclidean norms of the columns.
    pub fn col_norms_sq(&self) -> Vec<BigUint> {
        (0..self.cols)
            .map(|j| self.column(j).map(|x| x.magnitude() * x.magnitude()).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for IntMat {
    type Output = BigInt;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

/// Largest absolute value among the entries of `a`.
pub fn maxentry(a: &IntMat) -> BigUint {
    a.max_entry()
}

fn half_bits_bound(norms_sq: &[BigUint]) -> u64 {
    let total: u64 = norms_sq.iter().map(|q| q.bits()).sum();
    total.div_ceil(2)
}

/// Bit count `h` with `2^h > 2 |det(a)|`.
///
/// Each line contributes the bit length of its exact squared norm, so the
/// bound is `1 + ceil(sum / 2)` taken over rows or columns, whichever is
/// smaller. Only upward rounding is used.
pub fn hadamard_bits(a: &IntMat) -> u64 {
    let rows = half_bits_bound(&a.row_norms_sq());
    let cols = half_bits_bound(&a.col_norms_sq());
    1 + rows.min(cols)
}

/// Bit count `b` with `2^b` strictly larger than the absolute value of every
/// `(n-1) x (n-1)` minor of `a`, i.e. of every adjugate entry.
pub fn adjugate_bits(a: &IntMat) -> u64 {
    fn line_bound(norms_sq: &[BigUint]) -> u64 {
        let lens: Vec<u64> = norms_sq.iter().map(|q| q.bits()).collect();
        let total: u64 = lens.iter().sum();
        let min = lens.iter().copied().min().unwrap_or(0);
        (total - min).div_ceil(2)
    }
    let rows = line_bound(&a.row_norms_sq());
    let cols = line_bound(&a.col_norms_sq());
    // A minor of an n = 1 matrix is the empty determinant 1, hence the +1.
    rows.min(cols) + 1
}

/// Parses the text matrix format: a header line `R C` followed by `R*C`
/// whitespace-separated decimal integers.
pub fn parse_matrix(text: &str) -> Result<IntMat> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::MalformedHeader("empty input".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::MalformedHeader(header.to_string()));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::MalformedHeader(header.to_string()))
    };
    let rows = parse_dim(dims[0])?;
    let cols = parse_dim(dims[1])?;
    let expected = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::MalformedHeader(header.to_string()))?;

    let mut data = Vec::with_capacity(expected);
    for (lineno, line) in lines {
        for tok in line.split_whitespace() {
            let v: BigInt = tok.parse().map_err(|_| Error::InvalidToken {
                token: tok.to_string(),
                line: lineno + 1,
            })?;
            data.push(v);
        }
    }
    if data.len() != expected {
        return Err(Error::WrongEntryCount {
            expected,
            found: data.len(),
        });
    }
    IntMat::from_vec(rows, cols, data)
}

/// Formats a matrix in the text format accepted by [`parse_matrix`].
pub fn format_matrix(a: &IntMat) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", a.rows(), a.cols()).unwrap();
    for i in 0..a.rows() {
        let line: Vec<String> = a.row(i).iter().map(|x| x.to_string()).collect();
        writeln!(out, "{}", line.join(" ")).unwrap();
    }
    out
}

impl std::str::FromStr for IntMat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_matrix(s)
    }
}

impl std::fmt::Display for IntMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&format_matrix(self))
    }
}
