//! Strategy race on generated matrices, reported as CSV.

use std::io::{self, Write};
use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::engine::{determinant, EngineConfig, Strategy};
use crate::error::{Error, Result};
use crate::generate::{gen_structured, MatGenSpec};

pub const CSV_HEADER: &str = "strategy,n,entry_bits,num_nontrivial,seconds,hash";

/// One timed (dimension, strategy) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub strategy: Strategy,
    pub n: usize,
    pub entry_bits: u64,
    pub num_nontrivial: usize,
    /// Median wall time over the repetitions.
    pub seconds: f64,
    /// The determinant modulo `2^64`.
    pub hash: u64,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{}",
            self.strategy, self.n, self.entry_bits, self.num_nontrivial, self.seconds, self.hash
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub dims: Vec<usize>,
    pub strategies: Vec<Strategy>,
    pub seed: u64,
    pub reps: usize,
    /// Run each cell once untimed before measuring.
    pub warmup: bool,
    pub entry_bits: u64,
    pub factor_bits: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            dims: vec![30, 60, 120],
            strategies: vec![Strategy::Auto, Strategy::CrtOnly, Strategy::HcolOnly],
            seed: 1,
            reps: 3,
            warmup: true,
            entry_bits: 1000,
            factor_bits: 11,
        }
    }
}

/// `x mod 2^64` as an unsigned word.
pub fn det_hash(x: &BigInt) -> u64 {
    let m = BigInt::from(1u128 << 64);
    let r = x.mod_floor(&m);
    r.iter_u64_digits().next().unwrap_or(0)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        (v[k / 2 - 1] + v[k / 2]) / 2.0
    }
}

/// Times `strategy` on `a`; returns the median seconds and the determinant.
pub fn time_strategy(
    a: &crate::intmat::IntMat,
    strategy: Strategy,
    seed: u64,
    reps: usize,
    warmup: bool,
) -> Result<(f64, BigInt)> {
    let cfg = EngineConfig::with_strategy(strategy, seed);
    if warmup {
        determinant(a, &cfg)?;
    }
    let mut times = Vec::with_capacity(reps.max(1));
    let mut det = BigInt::default();
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        det = determinant(a, &cfg)?;
        times.push(start.elapsed().as_secs_f64());
    }
    Ok((median(times), det))
}

/// Runs every (dimension, strategy) pair, handing each row to `on_row` as
/// soon as it is measured. Fails with `Disagreement` when two strategies
/// return different determinants for the same matrix.
pub fn run_bench(cfg: &BenchConfig, mut on_row: impl FnMut(&BenchRow)) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &n in &cfg.dims {
        let spec = MatGenSpec::new(n, cfg.entry_bits, n / 2, cfg.factor_bits, cfg.seed);
        let a = gen_structured(&spec)?;
        let mut reference: Option<BigInt> = None;
        for &s in &cfg.strategies {
            let (seconds, det) = time_strategy(&a, s, cfg.seed, cfg.reps, cfg.warmup)?;
            let row = BenchRow {
                strategy: s,
                n,
                entry_bits: cfg.entry_bits,
                num_nontrivial: spec.num_nontrivial,
                seconds,
                hash: det_hash(&det),
            };
            on_row(&row);
            rows.push(row);
            match &reference {
                Some(r) if *r != det => return Err(Error::Disagreement(n)),
                Some(_) => {}
                None => reference = Some(det),
            }
        }
    }
    Ok(rows)
}

/// Writes the comment lines and header of the CSV output.
pub fn write_preamble(out: &mut impl Write, cfg: &BenchConfig, threads: usize) -> io::Result<()> {
    writeln!(out, "# workers={threads}")?;
    writeln!(out, "# seed={} reps={} warmup={}", cfg.seed, cfg.reps, cfg.warmup)?;
    writeln!(out, "{CSV_HEADER}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_mod_two_64() {
        assert_eq!(det_hash(&BigInt::from(5)), 5);
        assert_eq!(det_hash(&BigInt::from(-1)), u64::MAX);
        assert_eq!(det_hash(&(BigInt::from(1u128 << 64) + 7)), 7);
    }

    #[test]
    fn median_of_reps() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0]), 2.5);
    }

    #[test]
    fn small_race_agrees() {
        let cfg = BenchConfig {
            dims: vec![6],
            strategies: Strategy::ALL.to_vec(),
            reps: 1,
            warmup: false,
            entry_bits: 40,
            ..BenchConfig::default()
        };
        let rows = run_bench(&cfg, |_| {}).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.windows(2).all(|w| w[0].hash == w[1].hash));
        assert!(rows[0].csv_line().starts_with("auto,6,40,3,"));
    }
}
