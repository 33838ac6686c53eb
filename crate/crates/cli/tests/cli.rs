use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use minexp::graph::{perturb, random_left_regular};
use minexp_cli::config::Sampling;
use minexp_cli::io::{format_matrix, parse_matrix, read_matrix, write_matrix, IoError};
use minexp_cli::sweep::build_matrix;

fn minexp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minexp")).args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn matrix_round_trip_is_bit_faithful() {
    let dir = tempfile::tempdir().unwrap();
    for (eps, sampling) in [(0.1, Sampling::Distinct), (0.0, Sampling::Distinct), (0.3, Sampling::Repetition)] {
        let a = build_matrix(80, 30, 5, eps, sampling, 11).unwrap();
        let path = dir.path().join("a.txt");
        write_matrix(&path, &a).unwrap();
        let b = read_matrix(&path).unwrap();
        assert_eq!(a, b);
        assert_eq!(format_matrix(&a), format_matrix(&b));
    }
}

#[test]
fn malformed_files_rejected() {
    let g = random_left_regular(4, 5, 2, 1).unwrap();
    let text = format_matrix(&perturb(&g, 0.1, 1).unwrap());

    // An extra entry in column 2 (line 4).
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let free = (0..5).find(|r| !g.column(2).contains(r)).unwrap();
    lines[3] = format!("2: {}", {
        let mut entries: Vec<(usize, String)> = lines[3][3..]
            .split_whitespace()
            .map(|e| (e.split(':').next().unwrap().parse().unwrap(), e.to_string()))
            .collect();
        entries.push((free, format!("{free}:1e-3")));
        entries.sort();
        entries.into_iter().map(|(_, e)| e).collect::<Vec<_>>().join(" ")
    });
    match parse_matrix(&lines.join("\n")) {
        Err(IoError::Format { line, .. }) => assert_eq!(line, 4),
        other => panic!("expected a format error, got {other:?}"),
    }

    // Corrupt one weight.
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let (r, _) = lines[1][3..].split_whitespace().next().unwrap().split_once(':').unwrap();
    let r = r.to_string();
    let rest: Vec<&str> = lines[1][3..].split_whitespace().skip(1).collect();
    lines[1] = format!("0: {r}:5.0e-1 {}", rest.join(" "));
    assert!(matches!(parse_matrix(&lines.join("\n")), Err(IoError::ChecksumMismatch(_))));

    // Header declares more columns than the body holds.
    let short = text.replacen("4 5 2", "5 5 2", 1);
    assert!(matches!(parse_matrix(&short), Err(IoError::ChecksumMismatch(_))));

    assert!(matches!(parse_matrix("4 5\n"), Err(IoError::Format { line: 1, .. })));
    assert!(matches!(parse_matrix(&text.replacen("1: ", "1 ", 1)), Err(IoError::Format { line: 3, .. })));
}

#[test]
fn gen_recover_certify_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = minexp(&["gen", "--n", "40", "--m", "20", "--d", "4", "--eps1", "0.1", "--seed", "5", "--out", "a.txt"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = read_matrix(&p.join("a.txt")).unwrap();

    let mut x = vec![0.0; 40];
    x[3] = 0.7;
    x[17] = 1.05;
    let y = a.mul_vec(&x);
    fs::write(p.join("y.txt"), minexp_cli::io::format_vector(&y)).unwrap();
    for algo in ["l1", "alg1", "alg2-l1", "alg2-l2"] {
        let o =
            minexp(&["recover", "--matrix", "a.txt", "--y", "y.txt", "--algo", algo, "--k", "2", "--out", "x.txt"], p);
        assert_eq!(code(&o), 0, "{algo}: {}", String::from_utf8_lossy(&o.stderr));
        let est = minexp_cli::io::read_vector(&p.join("x.txt")).unwrap();
        let err = est.iter().zip(&x).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-6, "{algo}: {err}");
    }
    // alg1 without --k is a usage error.
    assert_eq!(code(&minexp(&["recover", "--matrix", "a.txt", "--y", "y.txt", "--algo", "alg1"], p)), 2);
    // Negative measurements admit no non-negative solution.
    let neg: Vec<f64> = y.iter().map(|v| -v - 1.0).collect();
    fs::write(p.join("neg.txt"), minexp_cli::io::format_vector(&neg)).unwrap();
    assert_eq!(code(&minexp(&["recover", "--matrix", "a.txt", "--y", "neg.txt"], p)), 4);

    let o = minexp(&["certify", "--matrix", "a.txt", "--mode", "support", "--support", "3,17"], p);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("recoverable"));
    assert_eq!(code(&minexp(&["certify", "--matrix", "a.txt", "--mode", "strong", "--k", "1"], p)), 0);

    fs::write(p.join("bad.txt"), "3 2 1 0\n0: 0:1\n1: 0:1\n2: 1:1\n").unwrap();
    let o = minexp(&["certify", "--matrix", "bad.txt", "--mode", "strong", "--k", "1"], p);
    assert_eq!(code(&o), 4);
    assert_eq!(code(&minexp(&["certify", "--matrix", "bad.txt", "--mode", "two-hop", "--support", "2"], p)), 0);
    assert_eq!(code(&minexp(&["certify", "--matrix", "missing.txt", "--k", "1"], p)), 2);
}

#[test]
fn threshold_queries() {
    let dir = tempfile::tempdir().unwrap();
    let o = minexp(&["threshold", "--kind", "strong", "--beta", "0.5", "--mu", "0.1"], dir.path());
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("strong_min_degree = 3.57444161539"));
    let o = minexp(&["threshold", "--kind", "prob", "--n", "500", "--m", "250", "--r0", "2", "--d", "3"], dir.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("= 1.000000000000"));
    let o = minexp(&["threshold", "--kind", "weak", "--beta", "0.5", "--d", "6"], dir.path());
    assert!(String::from_utf8_lossy(&o.stdout).contains("weak_max_alpha = 0.07295693"));
    assert_eq!(code(&minexp(&["threshold", "--kind", "weak", "--beta", "0.5"], dir.path())), 2);
    assert_eq!(code(&minexp(&["threshold", "--kind", "strong", "--beta", "0.5", "--d", "2"], dir.path())), 2);
    assert_eq!(code(&minexp(&["frobnicate"], dir.path())), 2);
}

#[test]
fn sweeps_are_byte_identical_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(
        p.join("s.cfg"),
        "n = 60\nm = 30\nd = 4\nepsilon1 = 0.1\nsparsity_grid = 0, 2, 4, 8\ntrials_per_point = 10\nseed = 4\nalgorithm = alg1\n",
    )
    .unwrap();
    let run = |workers: &str, out: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_minexp"))
            .args(["sweep", "--config", "s.cfg", "--out", out])
            .env("MINEXP_WORKERS", workers)
            .current_dir(p)
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(p.join(out)).unwrap()
    };
    let a = run("1", "a.csv");
    let b = run("3", "b.csv");
    assert_eq!(a, b);
    assert!(a.contains("\nk,success_fraction,mean_ser_db,mean_runtime_ms\n0,1,160.000000,0.000\n"));
    assert!(a.starts_with("# n = 60\n"));

    fs::write(
        p.join("n.cfg"),
        "n = 60\nm = 30\nd = 6\nsparsity_grid = 2\ntrials_per_point = 10\nalgorithm = alg2-l1\nnoise_snr_grid = 10, 30, inf\n",
    )
    .unwrap();
    let o = minexp(&["noise-sweep", "--config", "n.cfg"], p);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.contains("k,snr_db,success_fraction,mean_ser_db,mean_runtime_ms\n"));
    assert!(csv.contains("\n2,inf,1,160.000000,"));

    fs::write(p.join("bad.cfg"), "n = 60\nlearning_rate = 3\n").unwrap();
    let o = minexp(&["sweep", "--config", "bad.cfg"], p);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown key"));
    assert_eq!(code(&minexp(&["noise-sweep", "--config", "s.cfg"], p)), 2);
}
