use std::process::Command;

use sqt::cli::{run, EXIT_BAD_INPUT, EXIT_ILL_CONDITIONED, EXIT_OK};
use sqt::sqt::{LowRankCorrection, Mode, SqtMatrix};
use sqt::symbol::SymmetricSymbol;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["sqt"];
    full.extend_from_slice(args);
    let code = run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn temp_path(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("sqt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn csv_field(csv: &str, row: usize, column: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    lines.nth(row).unwrap().split(',').nth(idx).unwrap().to_string()
}

fn mask_cpu(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f[2] = "-";
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn help_and_version_exit_zero() {
    let (code, out, _) = invoke(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("qme") && out.contains("sqrt") && out.contains("verify"));
    assert_eq!(invoke(&["--version"]).0, EXIT_OK);
}

#[test]
fn malformed_arguments_are_bad_input() {
    assert_eq!(invoke(&[]).0, EXIT_BAD_INPUT);
    assert_eq!(invoke(&["qme", "--repr", "p7"]).0, EXIT_BAD_INPUT);
    assert_eq!(invoke(&["qme", "--tol", "2"]).0, EXIT_BAD_INPUT);
    assert_eq!(invoke(&["sqrt", "--delta", "-1"]).0, EXIT_BAD_INPUT);
    assert_eq!(invoke(&["verify", "--suite", "nope"]).0, EXIT_BAD_INPUT);
    assert_eq!(invoke(&["qme", "--input", "/nonexistent/file.sqt"]).0, EXIT_BAD_INPUT);
}

#[test]
fn verify_basis_and_finite_pass() {
    for suite in ["basis", "finite"] {
        let (code, out, _) = invoke(&["verify", "--suite", suite]);
        assert_eq!(code, EXIT_OK, "{out}");
        assert!(out.lines().any(|l| l.starts_with("PASS")));
        assert!(!out.lines().any(|l| l.starts_with("FAIL")));
    }
}

#[test]
fn symbol_qme_reports_table_columns() {
    let (code, out, err) = invoke(&["qme", "--repr", "symbol", "--variant", "natural", "--format", "csv"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(
        out.lines().next().unwrap(),
        "repr,variant,cpu,iterations,symbol_size,correction_size,correction_rank,error"
    );
    assert_eq!(csv_field(&out, 0, "repr"), "symbol");
    assert_eq!(csv_field(&out, 0, "correction_rank"), "0");
    let err: f64 = csv_field(&out, 0, "error").parse().unwrap();
    assert!(err <= 1e-13, "{err}");
}

#[test]
fn csv_output_is_stable_apart_from_cpu() {
    let args = ["sqrt", "--repr", "p1", "--delta", "0.1", "--format", "csv"];
    let (c1, first, _) = invoke(&args);
    let (c2, second, _) = invoke(&args);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK));
    assert_eq!(mask_cpu(&first), mask_cpu(&second));
    assert_eq!(csv_field(&first, 0, "iterations"), "7");
}

#[test]
fn sqrt_of_constant_input_record() {
    let input = temp_path("four.sqt");
    let output = temp_path("four.csv");
    let saved = temp_path("two.sqt");
    SqtMatrix::new(Mode::Algebra, 0.0, SymmetricSymbol::new(vec![4.0]), LowRankCorrection::zero())
        .write_sqt1(&input)
        .unwrap();
    let (code, _, err) = invoke(&[
        "sqrt",
        "--repr",
        "p0",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "csv",
        "--output",
        output.to_str().unwrap(),
        "--save",
        saved.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let csv = std::fs::read_to_string(&output).unwrap();
    assert!(csv_field(&csv, 0, "iterations").parse::<usize>().unwrap() <= 5);
    let x = SqtMatrix::read_sqt1(&saved).unwrap();
    assert!((x.symbol().coeff(0) - 2.0).abs() < 1e-14);
}

#[test]
fn qme_with_zero_a_and_b_returns_c() {
    let input = temp_path("abc.sqt");
    let zero = SqtMatrix::new(Mode::Toeplitz, 0.0, SymmetricSymbol::new(vec![0.0]), LowRankCorrection::zero());
    let c = SqtMatrix::new(
        Mode::Toeplitz,
        0.0,
        SymmetricSymbol::new(vec![0.2, 0.1]),
        LowRankCorrection::unit(0, 0, 0.05),
    );
    std::fs::write(&input, zero.to_sqt1() + &zero.to_sqt1() + &c.to_sqt1()).unwrap();
    let (code, out, err) =
        invoke(&["qme", "--repr", "qt", "--variant", "natural", "--input", input.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(csv_field(&out, 0, "iterations"), "2");
    assert_eq!(csv_field(&out, 0, "correction_size"), "1x1");
}

#[test]
fn qme_input_with_wrong_record_count_is_bad_input() {
    let input = temp_path("one.sqt");
    SqtMatrix::identity(Mode::Toeplitz, 0.0).write_sqt1(&input).unwrap();
    let (code, _, err) = invoke(&["qme", "--input", input.to_str().unwrap()]);
    assert_eq!(code, EXIT_BAD_INPUT);
    assert!(err.contains("expected 3"));
}

#[test]
fn singular_square_root_input_is_ill_conditioned() {
    let input = temp_path("singular.sqt");
    SqtMatrix::new(Mode::Algebra, 1.0, SymmetricSymbol::new(vec![-1.0]), LowRankCorrection::zero())
        .write_sqt1(&input)
        .unwrap();
    let (code, _, _) = invoke(&["sqrt", "--repr", "p1", "--input", input.to_str().unwrap()]);
    assert_eq!(code, EXIT_ILL_CONDITIONED);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_sqt");
    let status = Command::new(bin).args(["verify", "--suite", "finite", "--seed", "7"]).status().unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let status = Command::new(bin).args(["bogus"]).output().unwrap().status;
    assert_eq!(status.code(), Some(EXIT_BAD_INPUT));
}
