//! Command-line front end: `qme`, `sqrt` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 no convergence,
//! 3 ill-conditioned problem, 4 bad input.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::solvers::{
    example_qme_matrices, example_qme_symbols, example_sqrt_matrix, example_sqrt_symbol, qme_solve, qme_symbol_solve,
    sqrt_solve_with, sqrt_symbol_solve, QmeProblem, QmeVariant, SolveReport, DEFAULT_MAX_ITER,
};
use crate::sqt::io::parse_sqt1_records;
use crate::sqt::{Mode, SqtMatrix, Tolerances};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_ILL_CONDITIONED: i32 = 3;
pub const EXIT_BAD_INPUT: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "sqt", version, about = "Symmetric quasi-Toeplitz solvers and verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve A X^2 + B X + C = X by fixed-point iteration.
    Qme(QmeArgs),
    /// Square root of a positive definite matrix by incremental Newton.
    Sqrt(SqrtArgs),
    /// Run a property suite.
    Verify(VerifyArgs),
}

/// Storage used for the iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Repr {
    /// Algebra form with alpha = 1.
    P1,
    /// Algebra form with alpha = 0.
    P0,
    /// Toeplitz plus correction.
    Qt,
    /// Pointwise symbol computation, valid when the data lies in the alpha = 1 algebra.
    Symbol,
}

impl Repr {
    fn name(self) -> &'static str {
        match self {
            Repr::P1 => "p1",
            Repr::P0 => "p0",
            Repr::Qt => "qt",
            Repr::Symbol => "symbol",
        }
    }

    fn storage(self, alpha: Option<f64>) -> (Mode, f64) {
        match self {
            Repr::P1 => (Mode::Algebra, alpha.unwrap_or(1.0)),
            Repr::P0 => (Mode::Algebra, alpha.unwrap_or(0.0)),
            Repr::Qt => (Mode::Toeplitz, 0.0),
            Repr::Symbol => (Mode::Algebra, 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    All,
    Natural,
    Traditional,
    #[value(alias = "u-based")]
    Ubased,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum QmePreset {
    QmeExample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SqrtPreset {
    SqrtExample,
}

#[derive(clap::Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the computed matrices as SQT1 records.
    #[arg(long)]
    save: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
struct QmeArgs {
    #[arg(long, value_enum, default_value = "p0")]
    repr: Repr,
    #[arg(long, value_enum, default_value = "all")]
    variant: VariantArg,
    #[arg(long, default_value_t = 5e-15, value_parser = parse_tol)]
    tol: f64,
    /// Algebra parameter overriding the one implied by `--repr`.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "qme-example")]
    preset: QmePreset,
    /// Three SQT1 records A, B, C replacing the preset.
    #[arg(long, conflicts_with = "preset")]
    input: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(clap::Args, Debug)]
struct SqrtArgs {
    #[arg(long, value_enum, default_value = "p1")]
    repr: Repr,
    /// Diagonal shifts; comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-1, 1e-2, 1e-3], value_parser = parse_delta)]
    delta: Vec<f64>,
    #[arg(long, default_value_t = 5e-15, value_parser = parse_tol)]
    tol: f64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long, value_enum, default_value = "sqrt-example")]
    preset: SqrtPreset,
    /// One SQT1 record replacing the preset.
    #[arg(long, conflicts_with = "preset")]
    input: Option<PathBuf>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(clap::Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    suite: Suite,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_tol(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("tolerance must lie in (0, 1)".into())
    }
}

fn parse_delta(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err("delta must be positive".into())
    }
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Exit code for a solver error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence(_) | Error::DomainFault(_) => EXIT_NO_CONVERGENCE,
        Error::IllConditioned { .. }
        | Error::ZeroOnCircle
        | Error::SingularSmallBlock
        | Error::AsymmetryDetected { .. } => EXIT_ILL_CONDITIONED,
        _ => EXIT_BAD_INPUT,
    }
}

/// One report line: the label pair plus the experiment-table columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub repr: &'static str,
    pub label: String,
    pub cpu: Duration,
    pub report: SolveReport,
}

fn render(rows: &[Row], label: &str, format: Format) -> String {
    let header = ["repr", label, "cpu", "iterations", "symbol_size", "correction_size", "correction_rank", "error"];
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            let (m, n) = r.report.correction_support;
            [
                r.repr.to_string(),
                r.label.clone(),
                format!("{:.3}", r.cpu.as_secs_f64()),
                r.report.iterations.to_string(),
                r.report.symbol_size.to_string(),
                format!("{m}x{n}"),
                r.report.correction_rank.to_string(),
                format!("{:.2e}", r.report.residual),
            ]
        })
        .collect();
    let mut s = String::new();
    match format {
        Format::Csv => {
            s.push_str(&header.join(","));
            s.push('\n');
            for c in &cells {
                s.push_str(&c.join(","));
                s.push('\n');
            }
        }
        Format::Table => {
            let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for c in &cells {
                for (w, v) in width.iter_mut().zip(c) {
                    *w = (*w).max(v.len());
                }
            }
            let line = |vals: Vec<&str>| -> String {
                let parts: Vec<String> = vals.iter().zip(&width).map(|(v, w)| format!("{v:>w$}")).collect();
                parts.join("  ").trim_end().to_string() + "\n"
            };
            s.push_str(&line(header.to_vec()));
            for c in &cells {
                s.push_str(&line(c.iter().map(|v| v.as_str()).collect()));
            }
        }
    }
    s
}

struct Outcome {
    text: String,
    code: i32,
}

fn emit(outcome: Outcome, path: Option<&PathBuf>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let written = match path {
        Some(p) => std::fs::write(p, &outcome.text).map_err(|e| format!("{}: {e}", p.display())),
        None => stdout.write_all(outcome.text.as_bytes()).map_err(|e| e.to_string()),
    };
    match written {
        Ok(()) => outcome.code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_BAD_INPUT
        }
    }
}

fn save(path: Option<&PathBuf>, records: &[SqtMatrix], stderr: &mut dyn Write) -> i32 {
    let Some(p) = path else { return EXIT_OK };
    let text: String = records.iter().map(|m| m.to_sqt1()).collect();
    match std::fs::write(p, text) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}: {e}", p.display());
            EXIT_BAD_INPUT
        }
    }
}

fn read_records(path: &PathBuf, expected: usize) -> crate::Result<Vec<SqtMatrix>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    let records = parse_sqt1_records(&text)?;
    if records.len() != expected {
        return Err(Error::InvalidArgument(format!(
            "{}: expected {expected} SQT1 records, found {}",
            path.display(),
            records.len()
        )));
    }
    Ok(records)
}

fn cmd_qme(args: &QmeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let variants: Vec<QmeVariant> = match args.variant {
        VariantArg::All => QmeVariant::ALL.to_vec(),
        VariantArg::Natural => vec![QmeVariant::Natural],
        VariantArg::Traditional => vec![QmeVariant::Traditional],
        VariantArg::Ubased => vec![QmeVariant::UBased],
    };
    let (mode, alpha) = args.repr.storage(args.alpha);
    let data = match &args.input {
        Some(path) => read_records(path, 3).map(|r| (r[0].clone(), r[1].clone(), r[2].clone())),
        None => Ok(example_qme_matrices(mode, alpha)),
    };
    let (a, b, c) = match data {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let (a, b, c) = (a.convert(mode, alpha), b.convert(mode, alpha), c.convert(mode, alpha));
    let mut rows = Vec::new();
    let mut solutions = Vec::new();
    let mut code = EXIT_OK;
    for variant in variants {
        let result = if args.repr == Repr::Symbol {
            let symbols = if args.input.is_some() {
                symbols_in_algebra(&[&a, &b, &c])
            } else {
                let (sa, sb, sc) = example_qme_symbols();
                Ok([sa, sb, sc])
            };
            symbols.and_then(|[sa, sb, sc]| {
                qme_symbol_solve(&sa, &sb, &sc, variant, args.tol).map(|(g, r)| (SqtMatrix::from_symbol(1.0, g), r))
            })
        } else {
            let mut p = QmeProblem::new(a.clone(), b.clone(), c.clone(), variant);
            p.tol = args.tol;
            p.max_iter = args.max_iter;
            qme_solve(&p)
        };
        match result {
            Ok((g, report)) => {
                rows.push(Row { repr: args.repr.name(), label: variant.to_string(), cpu: report.elapsed, report });
                solutions.push(g);
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {variant}: {e}");
                code = code.max(exit_code(&e));
            }
        }
    }
    let saved = save(args.out.save.as_ref(), &solutions, stderr);
    let written = emit(Outcome { text: render(&rows, "variant", args.out.format), code }, args.out.output.as_ref(), stdout, stderr);
    written.max(saved)
}

/// Symbols of matrices that are exactly `P_1` of their symbol.
fn symbols_in_algebra(ms: &[&SqtMatrix; 3]) -> crate::Result<[crate::symbol::SymmetricSymbol; 3]> {
    let t = Tolerances::default();
    let pick = |m: &SqtMatrix| {
        let p = m.convert_with(Mode::Algebra, 1.0, &t);
        if p.correction().is_zero() {
            Ok(p.symbol().clone())
        } else {
            Err(Error::InvalidArgument("symbol representation needs inputs in the alpha = 1 algebra".into()))
        }
    };
    Ok([pick(ms[0])?, pick(ms[1])?, pick(ms[2])?])
}

fn cmd_sqrt(args: &SqrtArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (mode, alpha) = args.repr.storage(args.alpha);
    let inputs: Vec<(String, Option<f64>, SqtMatrix)> = match &args.input {
        Some(path) => match read_records(path, 1) {
            Ok(r) => vec![("input".to_string(), None, r[0].convert(mode, alpha))],
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                return exit_code(&e);
            }
        },
        None => args.delta.iter().map(|&d| (format!("{d:e}"), Some(d), example_sqrt_matrix(d, mode, alpha))).collect(),
    };
    let t = Tolerances::default();
    let mut rows = Vec::new();
    let mut solutions = Vec::new();
    let mut code = EXIT_OK;
    for (label, delta, a) in inputs {
        let result = if args.repr == Repr::Symbol {
            let sym = if let Some(d) = delta {
                Ok(example_sqrt_symbol(d))
            } else {
                let p = a.convert_with(Mode::Algebra, 1.0, &t);
                if p.correction().is_zero() {
                    Ok(p.symbol().clone())
                } else {
                    Err(Error::InvalidArgument("symbol representation needs input in the alpha = 1 algebra".into()))
                }
            };
            sym.and_then(|s| sqrt_symbol_solve(&s)).map(|(g, r)| (SqtMatrix::from_symbol(1.0, g), r))
        } else {
            sqrt_solve_with(&a, args.tol, args.max_iter, &t)
        };
        match result {
            Ok((x, report)) => {
                rows.push(Row { repr: args.repr.name(), label, cpu: report.elapsed, report });
                solutions.push(x);
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {label}: {e}");
                code = code.max(exit_code(&e));
            }
        }
    }
    let saved = save(args.out.save.as_ref(), &solutions, stderr);
    let written = emit(Outcome { text: render(&rows, "delta", args.out.format), code }, args.out.output.as_ref(), stdout, stderr);
    written.max(saved)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let checks = run_suite(args.suite, args.seed);
    let failed = checks.iter().filter(|c| !c.passed).count();
    let mut text = String::new();
    match args.format {
        Format::Table => {
            for c in &checks {
                let _ = writeln!(text, "{c}");
            }
            let _ = writeln!(text, "{} checks, {} failed", checks.len(), failed);
        }
        Format::Csv => {
            text.push_str("suite,name,worst,tol,passed\n");
            for c in &checks {
                let _ = writeln!(text, "{},{},{:.3e},{:.1e},{}", c.suite, c.name, c.worst, c.tol, c.passed);
            }
        }
    }
    let code = if failed == 0 { EXIT_OK } else { EXIT_VERIFY_FAILED };
    emit(Outcome { text, code }, args.output.as_ref(), stdout, stderr)
}

/// Parses `args` (program name first) and runs the command, returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = stdout.write_all(rendered.as_bytes());
                return EXIT_OK;
            }
            let _ = stderr.write_all(rendered.as_bytes());
            return EXIT_BAD_INPUT;
        }
    };
    match &cli.command {
        Command::Qme(a) => cmd_qme(a, stdout, stderr),
        Command::Sqrt(a) => cmd_sqrt(a, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
    }
}
