//! Deterministic primality testing for 64-bit integers and the stream of
//! 62-bit primes shared by every modular computation.

use std::sync::{Mutex, OnceLock};

use crate::field::PrimeField;

/// Bases that make Miller-Rabin deterministic for all `n < 2^64`.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

const SMALL_PRIMES: [u64; 24] = [
    3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Lower end (exclusive) of the stream's prime range.
pub const STREAM_LOW: u64 = 1 << 61;
/// Upper end (exclusive) of the stream's prime range.
pub const STREAM_HIGH: u64 = 1 << 62;

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, a, m);
        }
        a = mulmod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic primality test valid for every `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    for &q in &SMALL_PRIMES {
        if n == q {
            return true;
        }
        if n.is_multiple_of(q) {
            return false;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;

    if n < crate::field::MAX_MODULUS {
        let f = PrimeField::new(n);
        let one = f.mont_one();
        let minus_one = f.neg(one);
        'bases: for &a in &MR_BASES {
            let mut x = f.to_mont(f.pow(a, d));
            if x == one || x == minus_one {
                continue;
            }
            for _ in 1..s {
                x = f.mont_mul(x, x);
                if x == minus_one {
                    continue 'bases;
                }
            }
            return false;
        }
        true
    } else {
        'bases2: for &a in &MR_BASES {
            let mut x = powmod(a, d, n);
            if x == 1 || x == n - 1 {
                continue;
            }
            for _ in 1..s {
                x = mulmod(x, x, n);
                if x == n - 1 {
                    continue 'bases2;
                }
            }
            return false;
        }
        true
    }
}

/// Process-wide cache of the descending prime sequence below `2^62`.
fn cache() -> &'static Mutex<Vec<u64>> {
    static CACHE: OnceLock<Mutex<Vec<u64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(Vec::new()))
}

/// The `index`-th prime of the descending sequence `p_0 > p_1 > ...` of primes
/// in `(2^61, 2^62)`.
pub fn nth_stream_prime(index: usize) -> u64 {
    let mut primes = cache().lock().unwrap_or_else(|e| e.into_inner());
    let mut candidate = primes.last().map_or(STREAM_HIGH - 1, |&p| p - 2);
    while primes.len() <= index {
        while !is_prime_u64(candidate) {
            candidate -= 2;
        }
        assert!(candidate > STREAM_LOW, "prime stream exhausted");
        primes.push(candidate);
        candidate -= 2;
    }
    primes[index]
}

/// Deterministic stream of distinct primes in `(2^61, 2^62)`, descending.
#[derive(Debug, Clone, Default)]
pub struct PrimeStream {
    next: usize,
    emitted: Vec<u64>,
}

impl PrimeStream {
    pub fn new() -> Self {
        Self::default()
    }

    /// A stream that skips the first `offset` primes of the sequence.
    pub fn starting_at(offset: usize) -> Self {
        Self {
            next: offset,
            emitted: Vec::new(),
        }
    }

    pub fn emitted(&self) -> &[u64] {
        &self.emitted
    }

    /// Takes `k` primes at once.
    pub fn take_primes(&mut self, k: usize) -> Vec<u64> {
        (0..k).map(|_| self.next_prime()).collect()
    }

    pub fn next_prime(&mut self) -> u64 {
        let p = nth_stream_prime(self.next);
        self.next += 1;
        self.emitted.push(p);
        p
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        Some(self.next_prime())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let naive = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000 {
            assert_eq!(is_prime_u64(n), naive(n), "n = {n}");
        }
    }

    #[test]
    fn known_large() {
        assert!(is_prime_u64((1 << 62) - 57));
        assert!(is_prime_u64((1 << 61) - 1));
        assert!(is_prime_u64(u64::MAX - 58)); // 2^64 - 59
        assert!(!is_prime_u64(((1 << 31) - 1) * ((1 << 31) - 1)));
        // strong pseudoprime to bases 2..=37 is above 2^64, so Carmichael numbers fail
        assert!(!is_prime_u64(3_215_031_751));
        assert!(!is_prime_u64(3_825_123_056_546_413_051));
    }

    #[test]
    fn stream_is_descending_distinct_and_in_range() {
        let mut s = PrimeStream::new();
        let ps = s.take_primes(50);
        assert_eq!(ps[0], (1 << 62) - 57);
        for w in ps.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(ps.iter().all(|&p| p > STREAM_LOW && p < STREAM_HIGH && is_prime_u64(p)));
        assert_eq!(s.emitted(), &ps[..]);
        let mut t = PrimeStream::starting_at(10);
        assert_eq!(t.next_prime(), ps[10]);
    }
}
