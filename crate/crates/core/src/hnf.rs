//! Upper-triangular lattice bases used as exact right divisors: the
//! `d`-modular row Hermite form of a matrix, the basis of the lattice of
//! vectors orthogonal to a solution modulo its denominator, and division of
//! a matrix by either.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::dixon::RationalSolution;
use crate::error::{Error, Result};
use crate::intmat::IntMat;

/// Square upper-triangular integer matrix with positive diagonal and every
/// off-diagonal entry reduced into `[0, H_jj)` by the pivot of its column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpperTriangular {
    m: IntMat,
}

impl UpperTriangular {
    /// Checks the shape invariants.
    pub fn new(m: IntMat) -> Result<Self> {
        let n = m.square_dim()?;
        for i in 0..n {
            if !m[(i, i)].is_positive() {
                return Err(Error::InvalidSpec(format!("diagonal entry {i} is not positive")));
            }
            for j in 0..n {
                let x = &m[(i, j)];
                let ok = if i > j {
                    x.is_zero()
                } else if i < j {
                    !x.is_negative() && x < &m[(j, j)]
                } else {
                    true
                };
                if !ok {
                    return Err(Error::InvalidSpec(format!("entry ({i},{j}) violates the form")));
                }
            }
        }
        Ok(Self { m })
    }

    pub fn identity(n: usize) -> Self {
        Self { m: IntMat::identity(n) }
    }

    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    pub fn matrix(&self) -> &IntMat {
        &self.m
    }

    pub fn into_matrix(self) -> IntMat {
        self.m
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.dim()).map(|i| self.m[(i, i)].clone()).collect()
    }
}

/// Product of the diagonal entries, i.e. the determinant.
pub fn det_diag(h: &UpperTriangular) -> BigUint {
    (0..h.dim()).map(|i| h.m[(i, i)].magnitude().clone()).product()
}

/// `(g, u, v)` with `g = gcd(a, b) >= 0` and `u a + v b = g`.
pub(crate) fn xgcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut r0, mut r1) = (a.clone(), b.clone());
    let (mut s0, mut s1) = (BigInt::one(), BigInt::zero());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        r0 = std::mem::replace(&mut r1, r);
        let s = &s0 - &q * &s1;
        s0 = std::mem::replace(&mut s1, s);
        let t = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t);
    }
    if r0.is_negative() {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Replaces `row[from..]` by `(row - c * pivot) mod d`.
fn eliminate(row: &mut [BigInt], pivot: &[BigInt], c: &BigInt, d: &BigInt, from: usize) {
    for k in from..row.len() {
        if pivot[k].is_zero() {
            continue;
        }
        row[k] = (&row[k] - c * &pivot[k]).mod_floor(d);
    }
}

fn is_zero_row(row: &[BigInt], from: usize) -> bool {
    row[from..].iter().all(Zero::is_zero)
}

/// Reduces the entries above the diagonal into `[0, H_jj)`, keeping every
/// intermediate entry reduced modulo `d` (a lattice that contains `d Z^n`
/// is generated by any triangular basis of it with the same diagonal).
fn reduce_off_diagonal(rows: &mut [Vec<BigInt>], d: &BigInt) {
    let n = rows.len();
    for i in (0..n).rev() {
        let (head, tail) = rows.split_at_mut(i + 1);
        let row = &mut head[i];
        for j in i + 1..n {
            let piv = &tail[j - i - 1];
            let q = row[j].div_floor(&piv[j]);
            if q.is_zero() {
                continue;
            }
            for k in j..n {
                if !piv[k].is_zero() {
                    row[k] -= &q * &piv[k];
                }
            }
            for x in row[j + 1..].iter_mut() {
                *x = x.mod_floor(d);
            }
        }
    }
}

/// Row Hermite form of the lattice generated by the rows of `a` together
/// with `d Z^n`. All working values stay reduced modulo `d`.
pub fn modular_hnf(a: &IntMat, d: &BigUint) -> UpperTriangular {
    let n = a.square_dim().expect("modular_hnf needs a square matrix");
    assert!(!d.is_zero(), "modulus must be positive");
    let d = BigInt::from(d.clone());
    let mut work: Vec<Vec<BigInt>> = (0..n)
        .map(|i| a.row(i).iter().map(|x| x.mod_floor(&d)).collect())
        .filter(|r: &Vec<BigInt>| !is_zero_row(r, 0))
        .collect();
    let mut h: Vec<Vec<BigInt>> = Vec::with_capacity(n);

    for j in 0..n {
        work.retain(|r| !is_zero_row(r, j));
        let nz: Vec<usize> = (0..work.len()).filter(|&k| !work[k][j].is_zero()).collect();
        if nz.is_empty() {
            let mut row = vec![BigInt::zero(); n];
            row[j] = d.clone();
            h.push(row);
            continue;
        }
        let g_col = nz.iter().fold(d.clone(), |g, &k| g.gcd(&work[k][j]));
        // prefer a row that already has the column gcd
        let start = nz
            .iter()
            .position(|&k| work[k][j].gcd(&d) == g_col)
            .unwrap_or(0);
        let mut pivot = work.swap_remove(nz[start]);
        let mut others: Vec<Vec<BigInt>> = Vec::new();
        let mut rest: Vec<Vec<BigInt>> = Vec::new();
        for r in work.drain(..) {
            if r[j].is_zero() {
                rest.push(r);
            } else {
                others.push(r);
            }
        }
        // merge rows into the pivot until it carries the column gcd
        let mut g_piv = pivot[j].gcd(&d);
        let mut queue = Vec::new();
        for r in others {
            if g_piv != g_col && !r[j].is_multiple_of(&g_piv) {
                let (g, u, v) = xgcd(&pivot[j], &r[j]);
                let (pa, rb) = (&pivot[j] / &g, &r[j] / &g);
                let new_p: Vec<BigInt> = (0..n)
                    .map(|k| (&u * &pivot[k] + &v * &r[k]).mod_floor(&d))
                    .collect();
                let new_r: Vec<BigInt> = (0..n)
                    .map(|k| (&rb * &pivot[k] - &pa * &r[k]).mod_floor(&d))
                    .collect();
                pivot = new_p;
                g_piv = pivot[j].gcd(&d);
                if !is_zero_row(&new_r, j) {
                    rest.push(new_r);
                }
            } else {
                queue.push(r);
            }
        }
        debug_assert_eq!(g_piv, g_col);
        // single-row eliminations against a pivot whose gcd with d divides every entry
        let dg = &d / &g_piv;
        let inv = if dg.is_one() {
            BigInt::zero()
        } else {
            let (_, u, _) = xgcd(&(&pivot[j] / &g_piv), &dg);
            u.mod_floor(&dg)
        };
        queue.par_iter_mut().for_each(|r| {
            let c = (&r[j] / &g_piv * &inv).mod_floor(&dg);
            eliminate(r, &pivot, &c, &d, j);
            debug_assert!(r[j].is_zero());
        });
        rest.extend(queue.into_iter().filter(|r| !is_zero_row(r, j)));

        let (g, u, _) = xgcd(&pivot[j], &d);
        let mut hrow = vec![BigInt::zero(); n];
        hrow[j] = g.clone();
        let mut comp = vec![BigInt::zero(); n];
        let dg = &d / &g;
        for k in j + 1..n {
            hrow[k] = (&u * &pivot[k]).mod_floor(&d);
            comp[k] = (&dg * &pivot[k]).mod_floor(&d);
        }
        if !is_zero_row(&comp, j + 1) {
            rest.push(comp);
        }
        h.push(hrow);
        work = rest;
    }
    reduce_off_diagonal(&mut h, &d);
    let m = IntMat::from_vec(n, n, h.into_iter().flatten().collect()).expect("n x n");
    UpperTriangular { m }
}

/// The matrix `B` with `B H = A`, solved row by row by forward substitution.
/// Fails with `NotDivisible` when some division leaves a remainder.
pub fn div_right_triangular(a: &IntMat, h: &UpperTriangular) -> Result<IntMat> {
    let n = h.dim();
    if a.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} by {n}x{n}",
            a.rows(),
            a.cols()
        )));
    }
    // nonzero strictly-upper entries of each column
    let col_terms: Vec<Vec<(usize, &BigInt)>> = (0..n)
        .map(|j| (0..j).filter_map(|i| {
            let x = &h.m[(i, j)];
            (!x.is_zero()).then_some((i, x))
        }).collect())
        .collect();
    let rows: Vec<Result<Vec<BigInt>>> = (0..a.rows())
        .into_par_iter()
        .map(|r| {
            let src = a.row(r);
            let mut b: Vec<BigInt> = Vec::with_capacity(n);
            for j in 0..n {
                let mut acc = src[j].clone();
                for &(i, hij) in &col_terms[j] {
                    if !b[i].is_zero() {
                        acc -= &b[i] * hij;
                    }
                }
                let hjj = &h.m[(j, j)];
                if hjj.is_one() {
                    b.push(acc);
                } else {
                    let (q, rem) = acc.div_rem(hjj);
                    if !rem.is_zero() {
                        return Err(Error::NotDivisible { row: r, col: j });
                    }
                    b.push(q);
                }
            }
            Ok(b)
        })
        .collect();
    let mut data = Vec::with_capacity(a.rows() * n);
    for r in rows {
        data.extend(r?);
    }
    IntMat::from_vec(a.rows(), n, data)
}

/// Hermite basis of `{ w in Z^n : w . y = 0 (mod d) }` for a solution
/// `x = y/d`.
pub fn hcol_matrix(sol: &RationalSolution) -> UpperTriangular {
    hcol_from_parts(&sol.y, &sol.d)
}

/// [`hcol_matrix`] on a bare numerator vector and positive modulus.
pub fn hcol_from_parts(y: &[BigInt], d: &BigInt) -> UpperTriangular {
    assert!(d.sign() == Sign::Plus, "modulus must be positive");
    let n = y.len();
    let y: Vec<BigInt> = y.iter().map(|v| v.mod_floor(d)).collect();
    // g[i] = gcd(d, y_i, ..., y_{n-1}); g[n] = d
    let mut g = vec![d.clone(); n + 1];
    // lam[j] (j >= i) expresses g[i] = sum lam_j y_j (mod d)
    let mut lam: Vec<BigInt> = vec![BigInt::zero(); n];
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    for i in (0..n).rev() {
        let hii = {
            let (gi, a, b) = xgcd(&g[i + 1], &y[i]);
            let hii = &g[i + 1] / &gi;
            // row i: hii * e_i + sum_{j>i} c_j e_j with c_j = -t * lam_j
            let t = &y[i] / &gi;
            for j in i + 1..n {
                rows[i][j] = (-&t * &lam[j]).mod_floor(d);
            }
            for l in lam[i + 1..].iter_mut() {
                *l = (&a * &*l).mod_floor(d);
            }
            lam[i] = b.mod_floor(d);
            g[i] = gi;
            hii
        };
        rows[i][i] = hii;
    }
    reduce_off_diagonal(&mut rows, d);
    let m = IntMat::from_vec(n, n, rows.into_iter().flatten().collect()).expect("n x n");
    UpperTriangular { m }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn example_m() -> IntMat {
        IntMat::from_rows(&[[3, -5, 7], [1, 1, -7], [1, 9, 5]])
    }

    /// Row Hermite form by brute force: repeatedly gcd-combine rows of an
    /// arbitrary generating set, without any modular reduction.
    fn naive_hnf(gens: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
        let mut rows: Vec<Vec<BigInt>> = gens.to_vec();
        let mut out = Vec::new();
        for j in 0..n {
            loop {
                let nz: Vec<usize> = (0..rows.len()).filter(|&k| !rows[k][j].is_zero()).collect();
                if nz.len() <= 1 {
                    break;
                }
                let k = *nz.iter().min_by_key(|&&k| rows[k][j].magnitude().clone()).unwrap();
                for &o in &nz {
                    if o != k {
                        let q = rows[o][j].div_floor(&rows[k][j]);
                        let pk = rows[k].clone();
                        for (x, y) in rows[o].iter_mut().zip(&pk) {
                            *x -= &q * y;
                        }
                    }
                }
            }
            let k = (0..rows.len()).find(|&k| !rows[k][j].is_zero()).expect("full rank");
            let mut p = rows.swap_remove(k);
            if p[j].is_negative() {
                p.iter_mut().for_each(|x| *x = -&*x);
            }
            out.push(p);
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let q = out[i][j].div_floor(&out[j][j]);
                let pj = out[j].clone();
                for (x, y) in out[i].iter_mut().zip(&pj) {
                    *x -= &q * y;
                }
            }
        }
        out
    }

    fn stacked(a: &IntMat, d: i64) -> Vec<Vec<BigInt>> {
        let n = a.rows();
        let mut g: Vec<Vec<BigInt>> = (0..n).map(|i| a.row(i).to_vec()).collect();
        for i in 0..n {
            let mut r = vec![BigInt::zero(); n];
            r[i] = BigInt::from(d);
            g.push(r);
        }
        g
    }

    #[test]
    fn worked_example() {
        let h = modular_hnf(&example_m(), &BigUint::from(8u32));
        assert_eq!(h.matrix(), &IntMat::from_rows(&[[1, 1, 1], [0, 8, 0], [0, 0, 4]]));
        assert_eq!(det_diag(&h), BigUint::from(32u32));
        let b = div_right_triangular(&example_m(), &h).unwrap();
        assert_eq!(b, IntMat::from_rows(&[[3, -1, 1], [1, 0, -2], [1, 1, 1]]));
    }

    #[test]
    fn small_examples() {
        for d in [1u32, 2, 7, 100] {
            let h = modular_hnf(&IntMat::identity(4), &BigUint::from(d));
            assert_eq!(h, UpperTriangular::identity(4));
        }
        let h = modular_hnf(&IntMat::diagonal(&[6, 4]), &BigUint::from(4u32));
        assert_eq!(h.matrix(), &IntMat::from_rows(&[[2, 0], [0, 4]]));
        assert_eq!(det_diag(&h), BigUint::from(8u32));
        let a = example_m();
        assert_eq!(div_right_triangular(&a, &UpperTriangular::identity(3)).unwrap(), a);
    }

    #[test]
    fn not_divisible_is_reported() {
        let h = UpperTriangular::new(IntMat::from_rows(&[[2, 0], [0, 1]])).unwrap();
        let a = IntMat::from_rows(&[[1, 0], [0, 1]]);
        assert_eq!(div_right_triangular(&a, &h), Err(Error::NotDivisible { row: 0, col: 0 }));
    }

    #[test]
    fn form_validation() {
        assert!(UpperTriangular::new(IntMat::from_rows(&[[1, 1], [0, 1]])).is_err());
        assert!(UpperTriangular::new(IntMat::from_rows(&[[2, 0], [1, 1]])).is_err());
        assert!(UpperTriangular::new(IntMat::from_rows(&[[0, 0], [0, 1]])).is_err());
        assert!(UpperTriangular::new(IntMat::from_rows(&[[3, 1], [0, 2]])).is_ok());
    }

    #[test]
    fn hcol_examples() {
        let five = BigInt::from(5);
        let h = hcol_from_parts(&[BigInt::from(0), BigInt::from(1)], &five);
        assert_eq!(h.matrix(), &IntMat::from_rows(&[[1, 0], [0, 5]]));
        let h = hcol_from_parts(&[BigInt::from(1), BigInt::from(0)], &five);
        assert_eq!(h.matrix(), &IntMat::from_rows(&[[5, 0], [0, 1]]));

        let y: Vec<BigInt> = [17, -3, 2].iter().map(|&v| BigInt::from(v)).collect();
        let d = BigInt::from(80);
        let h = hcol_from_parts(&y, &d);
        assert_eq!(h.diagonal(), vec![BigInt::from(1), BigInt::from(2), BigInt::from(40)]);
        // oracle: every w with entries in [0, 80) and w.y = 0 (mod 80), plus 80 I
        let mut gens: Vec<Vec<BigInt>> = Vec::new();
        for w0 in 0..80i64 {
            for w1 in 0..80i64 {
                let s = 17 * w0 - 3 * w1;
                // solve 2 w2 = -s (mod 80)
                if s.rem_euclid(2) == 0 {
                    let w2 = (-s / 2).rem_euclid(40);
                    gens.push(vec![w0.into(), w1.into(), w2.into()]);
                }
            }
        }
        gens.extend(stacked(&IntMat::zeros(3, 3), 80).into_iter().skip(3));
        let want = naive_hnf(&gens, 3);
        let got: Vec<Vec<BigInt>> = (0..3).map(|i| h.matrix().row(i).to_vec()).collect();
        assert_eq!(got, want);
    }

    fn small_matrix(n: usize) -> impl Strategy<Value = IntMat> {
        proptest::collection::vec(-30i64..30, n * n)
            .prop_map(move |v| IntMat::from_vec(n, n, v.into_iter().map(BigInt::from).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn modular_hnf_matches_naive(a in (1usize..5).prop_flat_map(small_matrix), d in 1i64..200) {
            let n = a.rows();
            let h = modular_hnf(&a, &BigUint::from(d as u64));
            prop_assert!(UpperTriangular::new(h.matrix().clone()).is_ok());
            let want = naive_hnf(&stacked(&a, d), n);
            let got: Vec<Vec<BigInt>> = (0..n).map(|i| h.matrix().row(i).to_vec()).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn hcol_rows_lie_in_lattice(y in proptest::collection::vec(-1000i64..1000, 1..7), d in 1i64..500) {
            let yb: Vec<BigInt> = y.iter().map(|&v| BigInt::from(v)).collect();
            let d = BigInt::from(d);
            let h = hcol_from_parts(&yb, &d);
            prop_assert!(UpperTriangular::new(h.matrix().clone()).is_ok());
            for i in 0..y.len() {
                let dot: BigInt = h.matrix().row(i).iter().zip(&yb).map(|(a, b)| a * b).sum();
                prop_assert!(dot.mod_floor(&d).is_zero());
            }
            let g = yb.iter().fold(d.clone(), |g, v| g.gcd(v));
            prop_assert_eq!(BigInt::from(det_diag(&h)), &d / g);
        }
    }
}
