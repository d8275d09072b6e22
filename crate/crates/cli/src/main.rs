//! `detz`: exact integer determinants from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use detz::bench::{run_bench, write_preamble, BenchConfig};
use detz::engine::{determinant_with_stats, EngineConfig, Strategy};
use detz::generate::{gen_structured, MatGenSpec};
use detz::{format_matrix, parse_matrix, verify_unimodular, Error, IntMat, UnimodResult};

const EXIT_FAILURE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SINGULAR: u8 = 3;
const EXIT_DISAGREEMENT: u8 = 4;

#[derive(Parser)]
#[command(name = "detz", version, about = "Exact determinants of dense integer matrices")]
struct Cli {
    /// Worker threads for modular computations.
    #[arg(long, global = true, env = "DETZ_THREADS", default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the determinant of a matrix file.
    Det {
        file: PathBuf,
        /// Print the decisions of the main loop to stderr.
        #[arg(long)]
        stats: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "hnf-threshold", value_name = "BITS", default_value_t = 4096)]
        hnf_threshold: u64,
        #[arg(long = "crt-threshold", value_name = "BITS", default_value_t = 1280)]
        crt_threshold: u64,
        #[arg(long, default_value = "auto", value_parser = parse_strategy)]
        strategy: Strategy,
        /// Certify a zero determinant instead of reporting probable singularity.
        #[arg(long = "prove-zero")]
        prove_zero: bool,
    },
    /// Write a matrix with prescribed Smith invariants.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long = "entry-bits", default_value_t = 1000)]
        entry_bits: u64,
        /// Defaults to n/2.
        #[arg(long = "num-nontrivial")]
        num_nontrivial: Option<usize>,
        #[arg(long = "factor-bits", default_value_t = 11)]
        factor_bits: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Race strategies on generated matrices and print CSV.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "30,60,120")]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "auto,crt_only,hcol_only", value_parser = parse_strategy)]
        strategies: Vec<Strategy>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        reps: usize,
        /// Skip the untimed warm-up run.
        #[arg(long = "no-warmup")]
        no_warmup: bool,
        #[arg(long = "entry-bits", default_value_t = 1000)]
        entry_bits: u64,
        #[arg(long = "factor-bits", default_value_t = 11)]
        factor_bits: u32,
    },
    /// Decide whether a matrix file has determinant +1 or -1.
    Verify { file: PathBuf },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::MalformedHeader(_) | Error::WrongEntryCount { .. } | Error::InvalidToken { .. } => EXIT_PARSE,
            Error::ProbablySingular => EXIT_SINGULAR,
            Error::Disagreement(_) => EXIT_DISAGREEMENT,
            _ => EXIT_FAILURE,
        };
        Self::new(code, e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::new(EXIT_FAILURE, e.to_string())
    }
}

fn read_matrix(path: &Path) -> Result<IntMat, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?;
    let a = parse_matrix(&text)?;
    a.square_dim()?;
    Ok(a)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Det {
            file,
            stats,
            seed,
            hnf_threshold,
            crt_threshold,
            strategy,
            prove_zero,
        } => {
            let a = read_matrix(&file)?;
            let cfg = EngineConfig {
                hnf_threshold_bits: hnf_threshold,
                crt_finish_threshold_bits: crt_threshold,
                seed,
                strategy,
                prove_zero,
                ..EngineConfig::default()
            };
            let (det, log) = determinant_with_stats(&a, &cfg)?;
            writeln!(stdout, "{det}")?;
            if stats {
                let mut err = io::stderr().lock();
                for e in &log.events {
                    writeln!(err, "{e}")?;
                }
                writeln!(err, "iterations: {}, D: {} bits", log.iterations, log.d_bits)?;
            }
        }
        Command::Gen {
            n,
            entry_bits,
            num_nontrivial,
            factor_bits,
            seed,
            out,
        } => {
            let spec = MatGenSpec::new(n, entry_bits, num_nontrivial.unwrap_or(n / 2), factor_bits, seed);
            let text = format_matrix(&gen_structured(&spec)?);
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", path.display())))?,
                None => stdout.write_all(text.as_bytes())?,
            }
        }
        Command::Bench {
            dims,
            strategies,
            seed,
            reps,
            no_warmup,
            entry_bits,
            factor_bits,
        } => {
            let cfg = BenchConfig {
                dims,
                strategies,
                seed,
                reps,
                warmup: !no_warmup,
                entry_bits,
                factor_bits,
            };
            write_preamble(&mut stdout, &cfg, cli.threads)?;
            stdout.flush()?;
            run_bench(&cfg, |row| {
                let _ = writeln!(stdout, "{}", row.csv_line());
                let _ = stdout.flush();
            })?;
        }
        Command::Verify { file } => {
            let a = read_matrix(&file)?;
            match verify_unimodular(&a)? {
                UnimodResult::Unimodular(s) => writeln!(stdout, "unimodular {}", if s > 0 { "+1" } else { "-1" })?,
                UnimodResult::NotUnimodular => writeln!(stdout, "not unimodular")?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build_global()
    {
        eprintln!("detz: {e}");
        return ExitCode::from(EXIT_FAILURE);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("detz: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
