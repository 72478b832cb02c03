//! End-to-end tests of the installed binary: every subcommand is exercised
//! through a real process, checking output layout, exit codes, and
//! run-to-run determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_polysolve")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("the binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn code_of(out: &Output) -> i32 {
    out.status.code().expect("the binary exits normally")
}

fn write_file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

const QUADRIC_PAIR: &str = "\
vars: x1 x2
f: 7 + 3*x1 - 6*x2 - 4*x1^2 + 2*x1*x2 + 5*x2^2
f: -1 - 3*x1 + 14*x2 - 2*x1^2 + 2*x1*x2 - 3*x2^2
";

const BILINEAR_PAIR: &str = "\
vars: x y
f: 2 - x + 2*y + 2*x*y
f: 4 - 2*x + y + 4*x*y
";

const TORUS_PAIR: &str = "\
vars: x y
mode: toric
f: x + y - 3
f: x*y - 2
";

const LINE_CONIC: &str = "\
vars: x y
f: 2*x^2 + 5*x*y + 3*y^2 + 3*x - 2
f: -2 + x + y
";

fn solve_json(path: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["solve", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    serde_json::from_str(&stdout_of(&out)).expect("stdout is valid JSON")
}

fn coords_of(root: &Value) -> Vec<(f64, f64)> {
    root["coords"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["re"].as_f64().unwrap(), c["im"].as_f64().unwrap()))
        .collect()
}

/// Greedy matching of reported roots against expected real points.
fn assert_roots_match(doc: &Value, expected: &[&[f64]], tol: f64) {
    let roots = doc["roots"].as_array().unwrap();
    assert_eq!(roots.len(), expected.len());
    let mut remaining: Vec<&[f64]> = expected.to_vec();
    for root in roots {
        let coords = coords_of(root);
        let (k, dist) = remaining
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let d = coords
                    .iter()
                    .zip(e.iter())
                    .map(|((re, im), want)| ((re - want).powi(2) + im.powi(2)).sqrt())
                    .fold(0.0f64, f64::max);
                (k, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(dist <= tol, "root {coords:?} misses every expected point ({dist:.3e})");
        remaining.swap_remove(k);
    }
}

#[test]
fn solve_reports_the_quadric_roots_as_json() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "quadric.txt", QUADRIC_PAIR);
    let doc = solve_json(&path, &[]);

    assert_eq!(doc["mode"], "affine");
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["delta"], 4);
    assert_roots_match(&doc, &[&[-2.0, 3.0], &[3.0, 2.0], &[2.0, 1.0], &[-1.0, 0.0]], 1e-9);
    for root in doc["roots"].as_array().unwrap() {
        assert_eq!(root["multiplicity"], 1);
        assert!(root["residual"].as_f64().unwrap() <= 1e-12);
        assert!(root.get("blocks").is_none());
    }
    for key in ["t_M", "t_N", "t_B", "t_S", "t_alg"] {
        assert!(doc["timings"][key].as_f64().unwrap() >= 0.0);
    }
    let diag = &doc["diagnostics"];
    assert_eq!(diag["matrix_rows"], 10);
    assert_eq!(diag["matrix_cols"], 6);
    assert!(diag["cond_nstar"].as_f64().unwrap() >= 1.0);
    assert_eq!(diag["warnings"].as_array().unwrap().len(), 0);
}

#[test]
fn json_roots_are_seed_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "quadric.txt", QUADRIC_PAIR);
    let strip_timings = |out: &Output| -> Value {
        let mut doc: Value = serde_json::from_str(&stdout_of(out)).unwrap();
        doc.as_object_mut().unwrap().remove("timings");
        doc
    };
    let first = run(&["solve", path.to_str().unwrap()]);
    let second = run(&["solve", path.to_str().unwrap()]);
    // Everything except the wall-clock timings reproduces exactly.
    assert_eq!(strip_timings(&first), strip_timings(&second));

    // A different seed still finds the same four points.
    let doc = solve_json(&path, &["--seed", "123"]);
    assert_eq!(doc["seed"], 123);
    assert_roots_match(&doc, &[&[-2.0, 3.0], &[3.0, 2.0], &[2.0, 1.0], &[-1.0, 0.0]], 1e-9);
}

#[test]
fn numbers_print_17_significant_digits() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "quadric.txt", QUADRIC_PAIR);
    let out = run(&["solve", path.to_str().unwrap()]);
    let text = stdout_of(&out);

    let mut checked = 0;
    for key in ["\"re\": ", "\"im\": ", "\"residual\": "] {
        for chunk in text.split(key).skip(1) {
            let token: String = chunk
                .chars()
                .take_while(|c| !matches!(c, ',' | '}' | '\n'))
                .collect();
            let mantissa = token.trim_start_matches('-');
            assert_eq!(&mantissa[1..2], ".", "token {token} is not scientific");
            let frac: String =
                mantissa[2..].chars().take_while(|c| c.is_ascii_digit()).collect();
            assert_eq!(frac.len(), 16, "token {token} has the wrong precision");
            token.parse::<f64>().unwrap();
            checked += 1;
        }
    }
    assert!(checked >= 12, "only {checked} numeric tokens found");
}

#[test]
fn csv_output_labels_columns_and_emits_timings() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "torus.txt", TORUS_PAIR);
    let out = run(&[
        "solve",
        path.to_str().unwrap(),
        "--output",
        "csv",
        "--emit-residuals",
        "--emit-timings",
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));

    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "re(x),im(x),re(y),im(y),multiplicity,residual");
    assert_eq!(lines.len(), 3);
    let mut xs = Vec::new();
    for row in &lines[1..] {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 6);
        xs.push(fields[0].parse::<f64>().unwrap());
        assert_eq!(fields[4], "1");
        assert!(fields[5].parse::<f64>().unwrap() <= 1e-12);
    }
    xs.sort_by(f64::total_cmp);
    assert!((xs[0] - 1.0).abs() <= 1e-9 && (xs[1] - 2.0).abs() <= 1e-9);

    let stderr = stderr_of(&out);
    assert!(stderr.contains("t_M=") && stderr.contains("t_alg="), "stderr: {stderr}");
}

#[test]
fn outputs_can_be_written_to_files() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "quadric.txt", QUADRIC_PAIR);
    let roots_path = dir.path().join("roots.json");
    let solve_dump = dir.path().join("solve_matrix.csv");
    let direct_dump = dir.path().join("direct_matrix.csv");

    let out = run(&[
        "solve",
        path.to_str().unwrap(),
        "--out",
        roots_path.to_str().unwrap(),
        "--dump-matrix",
        solve_dump.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0);
    assert!(stdout_of(&out).is_empty());
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(&roots_path).unwrap()).unwrap();
    assert_eq!(doc["delta"], 4);

    // The standalone dump command writes the identical file.
    let out = run(&["dump-matrix", path.to_str().unwrap(), direct_dump.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(
        std::fs::read(&solve_dump).unwrap(),
        std::fs::read(&direct_dump).unwrap()
    );
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "broken.txt", "vars: x y\nf: x + * 2\nf: x\n");
    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(code_of(&out), 2);
    assert!(
        stderr_of(&out).starts_with("error: line 2, column 8:"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn zero_polynomials_and_nonsquare_systems_exit_2() {
    let dir = TempDir::new().unwrap();

    let zero = write_file(&dir, "zero.txt", "vars: x y\nf: 0\nf: x\n");
    let out = run(&["solve", zero.to_str().unwrap()]);
    assert_eq!(code_of(&out), 2);
    let stderr = stderr_of(&out);
    assert!(stderr.contains("line 2, column 4") && stderr.contains("zero polynomial"));

    let rect = write_file(&dir, "rect.txt", "vars: x y\nf: x*y - 1\n");
    let out = run(&["solve", rect.to_str().unwrap()]);
    assert_eq!(code_of(&out), 2);
    assert!(stderr_of(&out).contains("square system required"));

    // bkk and dump-matrix share the parser and its exit code.
    let out = run(&["bkk", rect.to_str().unwrap()]);
    assert_eq!(code_of(&out), 2);
    let dump = dir.path().join("dump.csv");
    let out = run(&["dump-matrix", rect.to_str().unwrap(), dump.to_str().unwrap()]);
    assert_eq!(code_of(&out), 2);
}

#[test]
fn unreadable_files_exit_1() {
    let out = run(&["solve", "/nonexistent/system.txt"]);
    assert_eq!(code_of(&out), 1);
    assert!(stderr_of(&out).starts_with("error: cannot read"));
}

#[test]
fn degenerate_rank_profiles_exit_3() {
    // The solution set contains the whole line x = 0, so the expected rank
    // drop never appears.
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "curve.txt", "vars: x y\nf: x^2\nf: x*y\n");
    let out = run(&["solve", path.to_str().unwrap()]);
    assert_eq!(code_of(&out), 3);
    assert!(stderr_of(&out).contains("genericity violation"));
}

#[test]
fn oversized_matrices_exit_5() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "quadric.txt", QUADRIC_PAIR);
    let out = run(&["solve", path.to_str().unwrap(), "--max-entries", "10"]);
    assert_eq!(code_of(&out), 5);
    assert!(stderr_of(&out).contains("resource limit"));
}

#[test]
fn inconsistent_flags_exit_2() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "bilinear.txt", BILINEAR_PAIR);
    let file = path.to_str().unwrap();

    for args in [
        vec!["solve", file, "--blocks", "1,1"],
        vec!["solve", file, "--mode", "multihom"],
        vec!["solve", file, "--mode", "elliptic"],
        vec!["solve", file, "--mode", "multihom", "--blocks", "0,2"],
        vec!["solve", file, "--mode", "multihom", "--blocks", "1,2"],
    ] {
        let out = run(&args);
        assert_eq!(code_of(&out), 2, "args {args:?}: {}", stderr_of(&out));
        assert!(stderr_of(&out).starts_with("error: "));
    }
}

#[test]
fn multihom_blocks_report_affine_views() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "bilinear.txt", BILINEAR_PAIR);
    let doc = solve_json(&path, &["--mode", "multihom", "--blocks", "1,1"]);

    assert_eq!(doc["mode"], "multihom");
    assert_eq!(doc["delta"], 2);
    let roots = doc["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 2);

    let mut finite = Vec::new();
    let mut infinite = 0;
    for root in roots {
        assert!(root["residual"].as_f64().unwrap() <= 1e-10);
        let blocks = root["blocks"].as_array().unwrap();
        assert_eq!(blocks.len(), 2);
        let affine: Vec<&Value> = blocks.iter().map(|b| &b["affine"]).collect();
        if affine.iter().any(|a| a.is_null()) {
            infinite += 1;
            // The second block still dehomogenizes: y = 1/2.
            let y = affine[1].as_array().unwrap()[0]["re"].as_f64().unwrap();
            assert!((y - 0.5).abs() <= 1e-9);
        } else {
            let x = affine[0].as_array().unwrap()[0]["re"].as_f64().unwrap();
            let y = affine[1].as_array().unwrap()[0]["re"].as_f64().unwrap();
            finite.push((x, y));
        }
    }
    assert_eq!(infinite, 1);
    assert_eq!(finite.len(), 1);
    assert!((finite[0].0 - 2.0).abs() <= 1e-9 && finite[0].1.abs() <= 1e-9);
}

#[test]
fn projective_mode_reports_the_root_at_infinity() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "line_conic.txt", LINE_CONIC);
    let doc = solve_json(&path, &["--mode", "projective"]);

    assert_eq!(doc["mode"], "projective");
    assert_eq!(doc["delta"], 2);
    let roots = doc["roots"].as_array().unwrap();
    let mut finite = Vec::new();
    let mut infinite = 0;
    for root in roots {
        let blocks = root["blocks"].as_array().unwrap();
        assert_eq!(blocks.len(), 1);
        let affine = &blocks[0]["affine"];
        if affine.is_null() {
            infinite += 1;
        } else {
            let values = affine.as_array().unwrap();
            finite.push((
                values[0]["re"].as_f64().unwrap(),
                values[1]["re"].as_f64().unwrap(),
            ));
        }
    }
    assert_eq!(infinite, 1);
    assert_eq!(finite.len(), 1);
    assert!((finite[0].0 + 10.0).abs() <= 1e-8 && (finite[0].1 - 12.0).abs() <= 1e-8);
}

#[test]
fn bkk_counts_match_known_mixed_volumes() {
    let dir = TempDir::new().unwrap();

    let bilinear = write_file(&dir, "bilinear.txt", BILINEAR_PAIR);
    let out = run(&["bkk", bilinear.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(stdout_of(&out).trim(), "2");

    // Dense degrees (2, 3): the mixed volume equals the degree product.
    let dense = write_file(
        &dir,
        "dense.txt",
        "vars: x y\nf: 1 + x + y + x^2 + x*y + y^2\nf: 1 + x + y + x^3 + y^3 + x^2*y\n",
    );
    let out = run(&["bkk", dense.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    assert_eq!(stdout_of(&out).trim(), "6");
}

#[test]
fn bench_emits_the_documented_row() {
    let out = run(&["bench", "--n", "2", "--d", "3", "--seed", "1"]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "delta,m1,m2,n2,res,delta_alg,t_M,t_N,t_B,t_S,t_alg");
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 11);
    assert_eq!(fields[0], "9");
    assert_eq!(fields[1], "21");
    assert_eq!(fields[2], "12");
    assert_eq!(fields[3], "9");
    assert!(fields[4].parse::<f64>().unwrap() <= 1e-8);
    assert_eq!(fields[5], "9");
    for timing in &fields[6..] {
        assert!(timing.parse::<f64>().unwrap() >= 0.0);
    }

    let out = run(&["bench", "--n", "0", "--d", "3"]);
    assert_eq!(code_of(&out), 2);
}

#[test]
fn bench_systems_can_be_saved_and_solved_again() {
    let dir = TempDir::new().unwrap();
    let saved = dir.path().join("bench_system.txt");
    let out = run(&[
        "bench", "--n", "2", "--d", "2", "--seed", "3", "--emit-system",
        saved.to_str().unwrap(),
    ]);
    assert_eq!(code_of(&out), 0, "stderr: {}", stderr_of(&out));
    let text = std::fs::read_to_string(&saved).unwrap();
    assert!(text.starts_with("vars: x1 x2\n"));

    let doc = solve_json(&saved, &[]);
    assert_eq!(doc["delta"], 4);
    for root in doc["roots"].as_array().unwrap() {
        assert!(root["residual"].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn dump_matrix_is_byte_stable_and_matches_the_coefficients() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "quadric.txt", QUADRIC_PAIR);
    let first = dir.path().join("m1.csv");
    let second = dir.path().join("m2.csv");

    assert_eq!(code_of(&run(&["dump-matrix", path.to_str().unwrap(), first.to_str().unwrap()])), 0);
    assert_eq!(code_of(&run(&["dump-matrix", path.to_str().unwrap(), second.to_str().unwrap()])), 0);
    let bytes = std::fs::read(&first).unwrap();
    assert_eq!(bytes, std::fs::read(&second).unwrap());

    let text = String::from_utf8(bytes).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(
        lines[0],
        "monomial,\"(1, 1)\",\"(1, x1)\",\"(1, x2)\",\"(2, 1)\",\"(2, x1)\",\"(2, x2)\""
    );
    // Column (1, 1) is the coefficient vector of the first polynomial.
    let first_col: Vec<f64> = lines[1..]
        .iter()
        .map(|row| {
            let entry = row.split(',').nth(1).unwrap();
            let plus = entry.rfind('+').unwrap();
            assert!(entry.ends_with('i'));
            entry[..plus].parse::<f64>().unwrap()
        })
        .collect();
    assert_eq!(first_col, vec![7.0, 3.0, -6.0, -4.0, 2.0, 5.0, 0.0, 0.0, 0.0, 0.0]);
    let monomials: Vec<&str> = lines[1..].iter().map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(
        monomials,
        ["1", "x1", "x2", "x1^2", "x1*x2", "x2^2", "x1^3", "x1^2*x2", "x1*x2^2", "x2^3"]
    );
}

#[test]
fn dump_matrix_handles_a_univariate_linear_system() {
    let dir = TempDir::new().unwrap();
    let path = write_file(&dir, "linear.txt", "vars: x\nf: x - 3\n");
    let out_path = dir.path().join("linear.csv");
    let out = run(&["dump-matrix", path.to_str().unwrap(), out_path.to_str().unwrap()]);
    assert_eq!(code_of(&out), 0);
    let text = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "monomial,\"(1, 1)\"");
    assert_eq!(lines[1], "1,-3.0000000000000000e0+0.0000000000000000e0i");
    assert_eq!(lines[2], "x,1.0000000000000000e0+0.0000000000000000e0i");
}

#[test]
fn file_mode_lines_drive_the_solve() {
    let dir = TempDir::new().unwrap();
    // Laurent exponents only parse in toric mode files.
    let path = write_file(
        &dir,
        "laurent.txt",
        "vars: x y\nmode: toric\nf: x + y - 3\nf: x - 2*y^-1\n",
    );
    let doc = solve_json(&path, &[]);
    assert_eq!(doc["mode"], "toric");
    assert_eq!(doc["delta"], 2);
    assert_roots_match(&doc, &[&[1.0, 2.0], &[2.0, 1.0]], 1e-9);
}
