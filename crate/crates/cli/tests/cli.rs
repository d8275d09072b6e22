use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use detz::generate::{spec_factor, MatGenSpec};
use num_bigint::BigInt;

fn detz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_detz"))
        .args(args)
        .env_remove("DETZ_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// Laplace expansion along the first row.
fn cofactor_det(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 1 {
        return BigInt::from(m[0][0]);
    }
    let mut total = BigInt::from(0);
    for j in 0..n {
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect())
            .collect();
        let term = BigInt::from(m[0][j]) * cofactor_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

#[test]
fn det_prints_exact_values() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.txt", "3 3\n3 -5 7\n1 1 -7\n1 9 5\n");
    let o = detz(&["det", &m]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "320\n");

    let id = write(dir.path(), "id.txt", "4 4\n1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n");
    assert_eq!(stdout(&detz(&["det", &id])), "1\n");

    let mut state: u64 = 12345;
    let mut next = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 33) % 201) as i64 - 100
    };
    let rows: Vec<Vec<i64>> = (0..5).map(|_| (0..5).map(|_| next()).collect()).collect();
    assert_ne!(cofactor_det(&rows), BigInt::from(0));
    let text = format!(
        "5 5\n{}",
        rows.iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ") + "\n")
            .collect::<String>()
    );
    let r = write(dir.path(), "r.txt", &text);
    for s in ["auto", "crt_only", "abm", "hcol_only"] {
        let o = detz(&["det", &r, "--strategy", s, "--seed", "9", "--threads", "2"]);
        assert_eq!(stdout(&o).trim(), cofactor_det(&rows).to_string(), "strategy {s}");
    }
}

#[test]
fn det_stats_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "m.txt", "3 3\n3 -5 7\n1 1 -7\n1 9 5\n");
    let o = detz(&["det", &m, "--stats", "--hnf-threshold", "8", "--crt-threshold", "64"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "320\n");
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("early crt") && err.contains("iterations"), "{err}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.txt", "1 2\n5\n");
    assert_eq!(detz(&["det", &bad]).status.code(), Some(2));
    let sing = write(dir.path(), "s.txt", "3 3\n1 2 3\n4 5 6\n7 8 9\n");
    assert_eq!(detz(&["det", &sing]).status.code(), Some(3));
    let o = detz(&["det", &sing, "--prove-zero"]);
    assert_eq!(stdout(&o), "0\n");
    assert_eq!(detz(&["det", &sing, "--strategy", "fastest"]).status.code(), Some(2));
}

#[test]
fn gen_is_deterministic_and_parses() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    for p in [&a, &b] {
        let o = detz(&["gen", "--n", "4", "--entry-bits", "60", "--factor-bits", "5", "--seed", "1", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let m = detz::parse_matrix(&text).unwrap();
    assert_eq!((m.rows(), m.cols()), (4, 4));

    let o = detz(&["gen", "--n", "6", "--entry-bits", "40", "--num-nontrivial", "3", "--factor-bits", "7", "--seed", "5"]);
    let m = detz::parse_matrix(&stdout(&o)).unwrap();
    let rows: Vec<Vec<i64>> = (0..6)
        .map(|i| m.row(i).iter().map(|v| i64::try_from(v).unwrap()).collect())
        .collect();
    let p = spec_factor(&MatGenSpec::new(6, 40, 3, 7, 5));
    let det = cofactor_det(&rows);
    assert_eq!(det.magnitude(), BigInt::from(p).pow(3).magnitude());
}

#[test]
fn bench_csv() {
    let o = detz(&["bench", "--dims", "30", "--strategies", "auto,crt_only", "--reps", "1", "--no-warmup"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(lines[0], "strategy,n,entry_bits,num_nontrivial,seconds,hash");
    assert_eq!(lines.len(), 3);
    let hash = |l: &str| l.rsplit(',').next().unwrap().to_string();
    assert!(lines[1].starts_with("auto,30,1000,15,"));
    assert_eq!(hash(lines[1]), hash(lines[2]));
    assert!(out.lines().any(|l| l.starts_with("# workers=")));
}

#[test]
fn verify_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let id = write(dir.path(), "id.txt", "2 2\n1 0\n0 1\n");
    assert_eq!(stdout(&detz(&["verify", &id])), "unimodular +1\n");
    let d = write(dir.path(), "d.txt", "2 2\n1 0\n0 2\n");
    assert_eq!(stdout(&detz(&["verify", &d])), "not unimodular\n");
    let f = write(dir.path(), "f.txt", "2 2\n34 55\n55 89\n");
    assert_eq!(stdout(&detz(&["verify", &f])), "unimodular +1\n");
}
