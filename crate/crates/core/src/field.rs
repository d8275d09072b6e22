//! Arithmetic modulo a word-size odd prime `p < 2^62` in Montgomery form,
//! plus lazily reduced dot products used by the modular matrix kernels.

use num_bigint::{BigInt, BigUint, Sign};

/// Largest accepted modulus (exclusive).
pub const MAX_MODULUS: u64 = 1 << 62;

/// Number of `u128` product accumulations allowed between folds.
const LAZY_CHUNK: usize = 8;

/// Odd modulus `p < 2^62` with Montgomery constants for `R = 2^64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
    /// `-p^{-1} mod 2^64`
    neg_inv: u64,
    /// `R^2 mod p`
    r2: u64,
    /// `R mod p`
    r1: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p > 2 && p < MAX_MODULUS, "unsupported modulus {p}");
        // Newton iteration for p^{-1} mod 2^64.
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r1 = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r1 as u128 * r1 as u128) % p as u128) as u64;
        Self {
            p,
            neg_inv: inv.wrapping_neg(),
            r2,
            r1,
        }
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Montgomery reduction: `t * R^{-1} mod p` for `t < p * 2^64`.
    #[inline(always)]
    pub fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.neg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    /// Reduces any 64-bit word; valid because `2^64 < 8p` whenever `p > 2^61`,
    /// and falls back to a division for smaller moduli.
    #[inline(always)]
    pub fn reduce_word(&self, mut x: u64) -> u64 {
        let p = self.p;
        if p > (1 << 61) {
            if x >= 4 * p {
                x -= 4 * p;
            }
            if x >= 2 * p {
                x -= 2 * p;
            }
            if x >= p {
                x -= p;
            }
            x
        } else {
            x % p
        }
    }

    /// Brings an accumulator below `p * 2^64` without changing its class mod `p`.
    #[inline(always)]
    pub fn fold(&self, t: u128) -> u128 {
        let hi = self.reduce_word((t >> 64) as u64);
        ((hi as u128) << 64) | (t as u64 as u128)
    }

    /// Reduces an arbitrary `u128` to its plain residue.
    #[inline(always)]
    pub fn reduce_u128(&self, t: u128) -> u64 {
        let r = self.redc(self.fold(t));
        self.redc(r as u128 * self.r2 as u128)
    }

    #[inline(always)]
    pub fn to_mont(&self, a: u64) -> u64 {
        self.redc(a as u128 * self.r2 as u128)
    }

    #[inline(always)]
    pub fn from_mont(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    /// Product of two Montgomery-form values.
    #[inline(always)]
    pub fn mont_mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    /// Product of two plain residues.
    #[inline(always)]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        let t = self.redc(a as u128 * b as u128);
        self.redc(t as u128 * self.r2 as u128)
    }

    #[inline(always)]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline(always)]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline(always)]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Montgomery form of one.
    #[inline]
    pub fn mont_one(&self) -> u64 {
        self.r1
    }

    /// Inverse of a plain residue, `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.p as i128, (a % self.p) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        if r1 == 0 {
            return None;
        }
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        Some(s0.rem_euclid(self.p as i128) as u64)
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = self.to_mont(a % self.p);
        let mut acc = self.r1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mont_mul(acc, base);
            }
            base = self.mont_mul(base, base);
            e >>= 1;
        }
        self.from_mont(acc)
    }

    /// Residue of a signed integer given as an `i64`.
    #[inline]
    pub fn from_i64(&self, v: i64) -> u64 {
        let r = self.reduce_word(v.unsigned_abs());
        if v < 0 {
            self.neg(r)
        } else {
            r
        }
    }

    /// Maps a plain residue to the symmetric range `(-p/2, p/2]`.
    #[inline]
    pub fn to_symmetric(&self, a: u64) -> i64 {
        if a > self.p / 2 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    /// `sum a_i * b_i mod p` over plain residues, reduced once per chunk.
    #[inline]
    pub fn dot(&self, a: &[u64], b: &[u64]) -> u64 {
        self.reduce_u128(self.dot_lazy(a, b))
    }

    /// Unreduced dot product: the result is congruent to `sum a_i b_i` and
    /// bounded by `p * 2^64 + LAZY_CHUNK * p^2`.
    #[inline]
    pub fn dot_lazy(&self, a: &[u64], b: &[u64]) -> u128 {
        debug_assert_eq!(a.len(), b.len());
        let mut acc: u128 = 0;
        for (ca, cb) in a.chunks(LAZY_CHUNK).zip(b.chunks(LAZY_CHUNK)) {
            acc = self.fold(acc);
            for (&x, &y) in ca.iter().zip(cb) {
                acc += x as u128 * y as u128;
            }
        }
        acc
    }
}

/// Residue of `x` modulo the field prime using precomputed powers of `2^64`.
#[derive(Debug, Clone)]
pub struct BigReducer {
    field: PrimeField,
    /// `2^{64k} mod p` (plain)
    limb_weights: Vec<u64>,
}

impl BigReducer {
    pub fn new(field: PrimeField) -> Self {
        Self {
            field,
            limb_weights: vec![1],
        }
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    fn ensure(&mut self, limbs: usize) {
        let w64 = self.field.r1;
        while self.limb_weights.len() < limbs {
            let last = *self.limb_weights.last().unwrap();
            self.limb_weights.push(self.field.mul(last, w64));
        }
    }

    pub fn reduce_uint(&mut self, x: &BigUint) -> u64 {
        let limbs = x.iter_u64_digits().len();
        self.ensure(limbs);
        let f = self.field;
        let mut acc: u128 = 0;
        for (k, d) in x.iter_u64_digits().enumerate() {
            if k % LAZY_CHUNK == 0 {
                acc = f.fold(acc);
            }
            acc += f.reduce_word(d) as u128 * self.limb_weights[k] as u128;
        }
        f.reduce_u128(acc)
    }

    pub fn reduce(&mut self, x: &BigInt) -> u64 {
        let r = self.reduce_uint(x.magnitude());
        if x.sign() == Sign::Minus {
            self.field.neg(r)
        } else {
            r
        }
    }
}

/// Residue of a signed big integer modulo `p` without a cached reducer.
pub fn reduce_bigint(x: &BigInt, field: &PrimeField) -> u64 {
    BigReducer::new(*field).reduce(x)
}
