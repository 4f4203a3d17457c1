//! `SQT1` text records.
//!
//! ```text
//! SQT1 ALG|TOE
//! alpha <f>
//! symbol <a_0 ... a_d>
//! correction <m> <n> <k>
//! <m lines of k values: rows of U>
//! <n lines of k values: rows of V>
//! ```

use std::path::Path;

use nalgebra::DMatrix;

use super::{LowRankCorrection, Mode, SqtMatrix};
use crate::error::{Error, Result};
use crate::symbol::{format_f17, parse_floats, SymmetricSymbol};

impl SqtMatrix {
    /// One `SQT1` record, newline-terminated.
    pub fn to_sqt1(&self) -> String {
        let k = self.correction();
        let mut s = format!("SQT1 {}\nalpha {}\nsymbol", self.mode(), format_f17(self.alpha()));
        for c in self.symbol().coeffs() {
            s.push(' ');
            s.push_str(&format_f17(*c));
        }
        s.push_str(&format!("\ncorrection {} {} {}\n", k.rows(), k.cols(), k.rank()));
        for m in [&k.u, &k.v] {
            if k.rank() == 0 {
                break;
            }
            for i in 0..m.nrows() {
                let row: Vec<String> = m.row(i).iter().map(|x| format_f17(*x)).collect();
                s.push_str(&row.join(" "));
                s.push('\n');
            }
        }
        s
    }

    /// Parses exactly one record.
    pub fn from_sqt1(text: &str) -> Result<Self> {
        let mut all = parse_sqt1_records(text)?;
        if all.len() != 1 {
            return Err(Error::Parse { line: 1, msg: format!("expected one SQT1 record, found {}", all.len()) });
        }
        Ok(all.remove(0))
    }

    pub fn write_sqt1(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_sqt1())
    }

    pub fn read_sqt1(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::from_sqt1(&text)
    }
}

/// Reads every record in the stream; blank lines between records are ignored.
pub fn parse_sqt1_records(text: &str) -> Result<Vec<SqtMatrix>> {
    let lines: Vec<(usize, &str)> =
        text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty()).collect();
    let mut pos = 0;
    let mut out = Vec::new();
    let eof = |at: usize| Error::Parse { line: at, msg: "unexpected end of input".into() };
    let last_line = text.lines().count().max(1);
    while pos < lines.len() {
        let mut next = || {
            let l = lines.get(pos).copied().ok_or_else(|| eof(last_line));
            pos += 1;
            l
        };
        let (ln, header) = next()?;
        let mode = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["SQT1", "ALG"] => Mode::Algebra,
            ["SQT1", "TOE"] => Mode::Toeplitz,
            _ => return Err(Error::Parse { line: ln, msg: format!("bad header '{header}'") }),
        };
        let (ln, alpha_line) = next()?;
        let alpha = match keyed(alpha_line, "alpha", ln)?.as_slice() {
            [a] => *a,
            _ => return Err(Error::Parse { line: ln, msg: "alpha needs one value".into() }),
        };
        let (ln, sym_line) = next()?;
        let coeffs = keyed(sym_line, "symbol", ln)?;
        if coeffs.is_empty() {
            return Err(Error::Parse { line: ln, msg: "symbol has no coefficients".into() });
        }
        let (ln, corr_line) = next()?;
        let dims = keyed(corr_line, "correction", ln)?;
        let [m, n, k] = match dims.as_slice() {
            [m, n, k] if [*m, *n, *k].iter().all(|x| *x >= 0.0 && x.fract() == 0.0) => {
                [*m as usize, *n as usize, *k as usize]
            }
            _ => return Err(Error::Parse { line: ln, msg: "correction needs three sizes".into() }),
        };
        let mut read_block = |rows: usize| -> Result<DMatrix<f64>> {
            let mut mat = DMatrix::zeros(rows, k);
            if k == 0 {
                return Ok(mat);
            }
            for i in 0..rows {
                let (ln, l) = lines.get(pos).copied().ok_or_else(|| eof(last_line))?;
                pos += 1;
                let vals = parse_floats(l.split_whitespace(), ln)?;
                if vals.len() != k {
                    return Err(Error::Parse { line: ln, msg: format!("expected {k} values, found {}", vals.len()) });
                }
                for (j, v) in vals.into_iter().enumerate() {
                    mat[(i, j)] = v;
                }
            }
            Ok(mat)
        };
        let u = read_block(m)?;
        let v = read_block(n)?;
        out.push(SqtMatrix::new(mode, alpha, SymmetricSymbol::new(coeffs), LowRankCorrection::new(u, v)));
    }
    Ok(out)
}

fn keyed(line: &str, key: &str, ln: usize) -> Result<Vec<f64>> {
    let mut toks = line.split_whitespace();
    if toks.next() != Some(key) {
        return Err(Error::Parse { line: ln, msg: format!("expected '{key}'") });
    }
    parse_floats(toks, ln)
}
