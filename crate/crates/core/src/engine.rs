//! The adaptive determinant loop.
//!
//! A cheap CRT pass yields a candidate for `det(A)`. The loop then strips
//! known factors off the matrix, `A = A_cur H` with `H` triangular, keeping
//! `D det(A_cur) = det(A)` for the accumulated positive factor `D`, until
//! either `A_cur` is proved unimodular or the remaining cofactor is small
//! enough to finish by CRT.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::crt::{crt_det_candidate_from, entry_log_bits, is_stable, CrtAccumulator, ResidueSource};
use crate::dixon::{solve_rational, RationalSolution};
use crate::error::{Error, Result};
use crate::hnf::{det_diag, div_right_triangular, hcol_matrix, modular_hnf};
use crate::intmat::{hadamard_bits, IntMat};
use crate::primes::PrimeStream;
use crate::unimodular::{verify_unimodular, UnimodResult};

/// Number of primes tried for one linear solve before giving up.
const SOLVE_ATTEMPTS: usize = 5;

/// Which parts of the loop are enabled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// The full adaptive loop.
    Auto,
    /// Chinese remaindering up to the Hadamard bound.
    CrtOnly,
    /// One denominator extraction, then CRT for the cofactor.
    Abm,
    /// The loop without modular Hermite forms.
    HcolOnly,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Auto, Strategy::CrtOnly, Strategy::Abm, Strategy::HcolOnly];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Auto => "auto",
            Strategy::CrtOnly => "crt_only",
            Strategy::Abm => "abm",
            Strategy::HcolOnly => "hcol_only",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown strategy '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Largest modulus, in bits, for which a modular Hermite form is computed.
    pub hnf_threshold_bits: u64,
    /// Finish by CRT once fewer than this many bits of the determinant remain unknown.
    pub crt_finish_threshold_bits: u64,
    /// A candidate `d` modulo `m` is trusted once `|d| 2^window < m`.
    pub crt_stable_window_bits: u64,
    pub prime_bits: u32,
    pub seed: u64,
    /// Defaults to `4n`.
    pub max_iterations: Option<usize>,
    pub strategy: Strategy,
    /// Certify a zero determinant by full CRT instead of reporting it as probable.
    pub prove_zero: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            hnf_threshold_bits: 4096,
            crt_finish_threshold_bits: 1280,
            crt_stable_window_bits: crate::crt::DEFAULT_WINDOW,
            prime_bits: 62,
            seed: 0,
            max_iterations: None,
            strategy: Strategy::Auto,
            prove_zero: false,
        }
    }
}

impl EngineConfig {
    pub fn with_strategy(strategy: Strategy, seed: u64) -> Self {
        Self {
            strategy,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hnf_threshold_bits == 0 || self.crt_finish_threshold_bits == 0 || self.crt_stable_window_bits == 0 {
            return Err(Error::InvalidConfig("thresholds must be positive".into()));
        }
        if self.prime_bits != 62 {
            return Err(Error::InvalidConfig("only 62-bit primes are supported".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Where a modular Hermite form's modulus came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HnfModulus {
    Candidate,
    Denominator,
}

/// Why the loop ended with Chinese remaindering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinishReason {
    Strategy,
    Threshold,
    NoProgress,
    ProveZero,
}

/// One decision of the main loop, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    DirectFormula,
    EarlyCrt { primes: usize, candidate_bits: u64, stable: bool },
    Candidate { iter: usize, bits: u64, stable: bool },
    Unimodular { iter: usize, accepted: bool },
    ModularHnf { iter: usize, source: HnfModulus, modulus_bits: u64, factor_bits: u64 },
    Solve { iter: usize, prime: u64, denominator_bits: u64 },
    Hcol { iter: usize, factor_bits: u64 },
    CrtFinish { reason: FinishReason, target_bits: u64, primes: usize },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::DirectFormula => write!(f, "direct formula"),
            Event::EarlyCrt { primes, candidate_bits, stable } => {
                write!(f, "early crt: {primes} primes, candidate {candidate_bits} bits, stable={stable}")
            }
            Event::Candidate { iter, bits, stable } => {
                write!(f, "[{iter}] candidate {bits} bits, stable={stable}")
            }
            Event::Unimodular { iter, accepted } => write!(f, "[{iter}] unimodularity check: {accepted}"),
            Event::ModularHnf { iter, source, modulus_bits, factor_bits } => write!(
                f,
                "[{iter}] modular hnf ({}) mod {modulus_bits}-bit modulus, D grows by {factor_bits} bits",
                match source {
                    HnfModulus::Candidate => "candidate",
                    HnfModulus::Denominator => "denominator",
                }
            ),
            Event::Solve { iter, prime, denominator_bits } => {
                write!(f, "[{iter}] solve mod {prime}: denominator {denominator_bits} bits")
            }
            Event::Hcol { iter, factor_bits } => write!(f, "[{iter}] hcol division, D grows by {factor_bits} bits"),
            Event::CrtFinish { reason, target_bits, primes } => {
                write!(f, "crt finish ({reason:?}): {target_bits} bits, {primes} primes in total")
            }
        }
    }
}

/// Diagnostics of one determinant computation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetStats {
    pub events: Vec<Event>,
    pub iterations: usize,
    pub d_bits: u64,
}

/// State of the main loop; `d * det(a_cur) = det(A)` holds at every loop head.
#[derive(Debug, Clone)]
pub struct DetState {
    pub a_cur: IntMat,
    pub d: BigUint,
    pub acc: CrtAccumulator,
    pub h: u64,
    pub e: u64,
    pub iter: usize,
}

/// Exact determinant of a square matrix.
pub fn determinant(a: &IntMat, config: &EngineConfig) -> Result<BigInt> {
    determinant_with_stats(a, config).map(|(d, _)| d)
}

/// [`determinant`] with the default thresholds.
pub fn determinant_with_strategy(a: &IntMat, strategy: Strategy, seed: u64) -> Result<BigInt> {
    determinant(a, &EngineConfig::with_strategy(strategy, seed))
}

/// [`determinant`] together with the log of decisions taken.
pub fn determinant_with_stats(a: &IntMat, config: &EngineConfig) -> Result<(BigInt, DetStats)> {
    config.validate()?;
    let n = a.square_dim()?;
    let mut stats = DetStats::default();
    if n <= 2 {
        stats.events.push(Event::DirectFormula);
        let det = if n == 1 {
            a[(0, 0)].clone()
        } else {
            &a[(0, 0)] * &a[(1, 1)] - &a[(0, 1)] * &a[(1, 0)]
        };
        return Ok((det, stats));
    }
    let mut run = Run {
        config,
        source: ResidueSource::new(a, PrimeStream::new()),
        solve_primes: PrimeStream::new(),
        rng: ChaCha20Rng::seed_from_u64(config.seed),
        stats,
        state: DetState {
            a_cur: a.clone(),
            d: BigUint::one(),
            acc: CrtAccumulator::new(),
            h: hadamard_bits(a),
            e: entry_log_bits(a),
            iter: 0,
        },
    };
    let det = run.main_loop(n)?;
    let mut stats = run.stats;
    stats.iterations = run.state.iter;
    stats.d_bits = run.state.d.bits();
    Ok((det, stats))
}

struct Run<'a> {
    config: &'a EngineConfig,
    source: ResidueSource<'a>,
    solve_primes: PrimeStream,
    rng: ChaCha20Rng,
    stats: DetStats,
    state: DetState,
}

impl Run<'_> {
    fn main_loop(&mut self, n: usize) -> Result<BigInt> {
        let cfg = self.config;
        let window = cfg.crt_stable_window_bits;
        let st = &mut self.state;
        if cfg.strategy == Strategy::CrtOnly {
            return Ok(self.finish(&BigUint::one(), FinishReason::Strategy));
        }
        let d0 = crt_det_candidate_from(&mut self.source, &mut st.acc, st.e, window);
        self.stats.events.push(Event::EarlyCrt {
            primes: st.acc.primes().len(),
            candidate_bits: d0.bits(),
            stable: is_stable(&d0, st.acc.modulus(), window),
        });

        let max_iter = cfg.max_iterations.unwrap_or(4 * n);
        let hnf_enabled = cfg.strategy == Strategy::Auto;
        while self.state.iter < max_iter {
            let iter = self.state.iter;
            self.state.iter += 1;
            self.check_invariant();

            // (5.1) candidate for det(A_cur)
            let (dc, stable) = self.current_candidate();
            self.stats.events.push(Event::Candidate { iter, bits: dc.bits(), stable });
            if dc.is_zero() && stable && self.state.d.is_one() {
                return self.zero_candidate();
            }
            if cfg.strategy != Strategy::Abm && dc.magnitude().is_one() {
                let verdict = verify_unimodular(&self.state.a_cur)?;
                self.stats.events.push(Event::Unimodular {
                    iter,
                    accepted: verdict.is_unimodular(),
                });
                if let UnimodResult::Unimodular(sign) = verdict {
                    let d = BigInt::from(self.state.d.clone());
                    return Ok(if sign < 0 { -d } else { d });
                }
            }

            // (5.2) divide by the modular Hermite form of the candidate
            if hnf_enabled && stable && !dc.is_zero() && dc.bits() < cfg.hnf_threshold_bits {
                let grown = self.divide_by_modular_hnf(dc.magnitude(), iter, HnfModulus::Candidate)?;
                if grown {
                    continue;
                }
            }

            // (5.3)-(5.4) denominator of a random system
            let sol = match self.solve_random(iter)? {
                Some(sol) => sol,
                None if cfg.prove_zero => return Ok(self.finish(&BigUint::one(), FinishReason::ProveZero)),
                None => return Err(Error::ProbablySingular),
            };
            let dx = sol.d.magnitude().clone();
            let ddx = &self.state.d * &dx;

            // (5.5) few unknown bits left, or no progress possible
            let remaining = self.state.h.saturating_sub(ddx.bits());
            if cfg.strategy == Strategy::Abm {
                return Ok(self.finish(&ddx, FinishReason::Strategy));
            }
            if remaining < cfg.crt_finish_threshold_bits {
                return Ok(self.finish(&ddx, FinishReason::Threshold));
            }
            if dx.is_one() {
                return Ok(self.finish(&ddx, FinishReason::NoProgress));
            }

            // (5.6) modular Hermite form modulo the denominator
            if hnf_enabled && dx.bits() < cfg.hnf_threshold_bits {
                self.divide_by_modular_hnf(&dx, iter, HnfModulus::Denominator)?;
                continue;
            }

            // (5.7)-(5.8) lattice of vectors orthogonal to the solution
            let hx = hcol_matrix(&sol);
            self.state.a_cur = div_right_triangular(&self.state.a_cur, &hx)?;
            self.state.d *= &dx;
            self.stats.events.push(Event::Hcol { iter, factor_bits: dx.bits() });
        }
        Err(Error::IterationLimit(max_iter))
    }

    /// Symmetric candidate for `det(A_cur)` and whether it is stable.
    fn current_candidate(&mut self) -> (BigInt, bool) {
        let st = &mut self.state;
        if st.acc.coprime_bits(&st.d) <= 1 {
            self.source.extend_until(&mut st.acc, &st.d, 1);
        }
        let (dc, m) = st.acc.quotient_candidate(&st.d);
        let stable = is_stable(&dc, &m, self.config.crt_stable_window_bits);
        (dc, stable)
    }

    fn zero_candidate(&mut self) -> Result<BigInt> {
        if self.config.prove_zero {
            Ok(self.finish(&BigUint::one(), FinishReason::ProveZero))
        } else {
            Err(Error::ProbablySingular)
        }
    }

    /// Divides `A_cur` by its `modulus`-modular Hermite form; returns whether
    /// `D` grew.
    fn divide_by_modular_hnf(&mut self, modulus: &BigUint, iter: usize, source: HnfModulus) -> Result<bool> {
        let h = modular_hnf(&self.state.a_cur, modulus);
        let dd = det_diag(&h);
        self.stats.events.push(Event::ModularHnf {
            iter,
            source,
            modulus_bits: modulus.bits(),
            factor_bits: dd.bits().saturating_sub(1),
        });
        if dd.is_one() {
            return Ok(false);
        }
        self.state.a_cur = div_right_triangular(&self.state.a_cur, &h)?;
        self.state.d *= dd;
        Ok(true)
    }

    /// Solves `A_cur x = b` for a random `b`; `None` when every prime tried
    /// divides the determinant.
    fn solve_random(&mut self, iter: usize) -> Result<Option<RationalSolution>> {
        let n = self.state.a_cur.rows();
        let bound = 1i64 << 62;
        let b: Vec<BigInt> = (0..n).map(|_| BigInt::from(self.rng.gen_range(-bound..bound))).collect();
        for _ in 0..SOLVE_ATTEMPTS {
            let p = self.solve_primes.next_prime();
            match solve_rational(&self.state.a_cur, &b, p) {
                Ok(sol) => {
                    self.stats.events.push(Event::Solve {
                        iter,
                        prime: p,
                        denominator_bits: sol.d.bits(),
                    });
                    return Ok(Some(sol));
                }
                Err(Error::SingularModP(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }

    /// `det(A) = known * t` with `|t| < 2^(h - bits(known))`; recovers `t`
    /// from residues modulo primes not dividing `known`.
    fn finish(&mut self, known: &BigUint, reason: FinishReason) -> BigInt {
        let st = &mut self.state;
        let target = (st.h + 1).saturating_sub(known.bits()).max(1);
        self.source.extend_until(&mut st.acc, known, target);
        let (t, _) = st.acc.quotient_candidate(known);
        self.stats.events.push(Event::CrtFinish {
            reason,
            target_bits: target,
            primes: st.acc.primes().len(),
        });
        BigInt::from_biguint(Sign::Plus, known.clone()) * t
    }

    /// Debug-build check of `D det(A_cur) = det(A)` modulo one accumulated prime.
    fn check_invariant(&self) {
        if !cfg!(debug_assertions) {
            return;
        }
        let st = &self.state;
        let Some(&q) = st.acc.primes().iter().find(|&&q| !(&st.d % q).is_zero()) else {
            return;
        };
        let cur = crate::modular::det_mod_p(&st.a_cur, q) as u128;
        let dq = (&st.d % q).iter_u64_digits().next().unwrap_or(0) as u128;
        let orig = (st.acc.residue() % q).iter_u64_digits().next().unwrap_or(0) as u128;
        debug_assert_eq!(cur * dq % q as u128, orig, "loop invariant broken");
    }
}

/// Cost model of [`modular_hnf`]: nanoseconds per (row operation on one
/// entry) per 64-bit word of the modulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HnfCalibration {
    pub ns_per_word_op: f64,
}

impl HnfCalibration {
    /// Times one modular Hermite form of a pseudo-random matrix.
    pub fn measure() -> Self {
        let n = 24usize;
        let bits = 512u64;
        let mut rng = ChaCha20Rng::seed_from_u64(0x5eed);
        let data: Vec<BigInt> = (0..n * n).map(|_| BigInt::from(rng.gen_range(-1000i64..1000))).collect();
        let a = IntMat::from_vec(n, n, data).expect("shape");
        let d = (BigUint::one() << bits) - 1u32;
        let start = Instant::now();
        let _ = modular_hnf(&a, &d);
        let ns = start.elapsed().as_nanos() as f64;
        Self {
            ns_per_word_op: ns / work_units(n, bits),
        }
    }
}

fn work_units(n: usize, d_bits: u64) -> f64 {
    let words = d_bits.div_ceil(64).max(1) as f64;
    // elimination is ~n^3/3 entry updates plus as many for the final reduction
    let n = n as f64;
    2.0 * n * n * n / 3.0 * words
}

/// Estimated running time of a modular Hermite form in milliseconds.
pub fn estimate_hnf_cost(n: usize, d_bits: u64, calib: &HnfCalibration) -> f64 {
    calib.ns_per_word_op * work_units(n, d_bits) / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_m() -> IntMat {
        IntMat::from_rows(&[[3, -5, 7], [1, 1, -7], [1, 9, 5]])
    }

    #[test]
    fn small_examples_all_strategies() {
        for s in Strategy::ALL {
            assert_eq!(determinant_with_strategy(&example_m(), s, 1).unwrap(), BigInt::from(320));
            assert_eq!(determinant_with_strategy(&IntMat::identity(6), s, 1).unwrap(), BigInt::one());
            assert_eq!(determinant_with_strategy(&IntMat::diagonal(&[-2, 3]), s, 1).unwrap(), BigInt::from(-6));
        }
    }

    #[test]
    fn strategy_names_roundtrip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("fast".parse::<Strategy>().is_err());
    }

    #[test]
    fn singular_input() {
        let a = IntMat::from_rows(&[[1, 2, 3], [4, 5, 6], [7, 8, 9]]);
        assert_eq!(determinant(&a, &EngineConfig::default()), Err(Error::ProbablySingular));
        let cfg = EngineConfig {
            prove_zero: true,
            ..EngineConfig::default()
        };
        assert_eq!(determinant(&a, &cfg).unwrap(), BigInt::zero());
    }

    #[test]
    fn invalid_configs() {
        let bad = EngineConfig {
            hnf_threshold_bits: 0,
            ..EngineConfig::default()
        };
        assert!(matches!(determinant(&example_m(), &bad), Err(Error::InvalidConfig(_))));
        let bad = EngineConfig {
            prime_bits: 31,
            ..EngineConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn cost_model_is_monotone() {
        let c = HnfCalibration { ns_per_word_op: 1.5 };
        assert!(estimate_hnf_cost(40, 300, &c) > estimate_hnf_cost(20, 300, &c));
        assert!(estimate_hnf_cost(40, 3000, &c) > estimate_hnf_cost(40, 300, &c));
    }

    #[test]
    fn stats_record_the_path() {
        let cfg = EngineConfig::default();
        let (_, stats) = determinant_with_stats(&example_m(), &cfg).unwrap();
        assert!(matches!(stats.events[0], Event::EarlyCrt { .. }));
        assert!(stats.events.iter().any(|e| matches!(e, Event::ModularHnf { .. } | Event::CrtFinish { .. })));
    }
}
