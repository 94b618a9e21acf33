//! Plain-text serialization: a small problem container and Matrix Market
//! array files.
//!
//! Container layout, one item per line:
//!
//! ```text
//! dkprob 1
//! label <text>
//! seed <u64>
//! matrix <name> <rows> <cols>
//! <re> <im>            (rows*cols lines, column-major)
//! spectrum <n>
//! <value>              (n lines)
//! end
//! ```
//!
//! Matrices named `a`, `u`, `w` and single-column matrices `b`, `x0`,
//! `solution` are recognized; `a`, `b` and `x0` are required.

use std::io::{BufRead, Write};
use std::sync::Arc;

use super::TestProblem;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector, C64};

const MAGIC: &str = "dkprob 1";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn write_matrix(out: &mut impl Write, name: &str, m: &Matrix) -> Result<()> {
    writeln!(out, "matrix {name} {} {}", m.rows(), m.cols())?;
    for z in m.as_slice() {
        writeln!(out, "{:e} {:e}", z.re, z.im)?;
    }
    Ok(())
}

fn column(v: &Vector) -> Matrix {
    Matrix::from_columns(std::slice::from_ref(v))
}

pub fn write_problem(p: &TestProblem, out: &mut impl Write) -> Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "label {}", p.label.replace('\n', " "))?;
    writeln!(out, "seed {}", p.seed)?;
    write_matrix(out, "a", &p.a)?;
    write_matrix(out, "b", &column(&p.b))?;
    write_matrix(out, "x0", &column(&p.x0))?;
    if let Some(u) = &p.u {
        write_matrix(out, "u", u)?;
    }
    if let Some(x) = &p.known_solution {
        write_matrix(out, "solution", &column(x))?;
    }
    if let (Some(w), Some(d)) = (&p.eigenvectors, &p.eigenvalues) {
        write_matrix(out, "w", w)?;
        writeln!(out, "eigenvalues {}", d.len())?;
        for x in d {
            writeln!(out, "{x:e}")?;
        }
    }
    if let Some(s) = &p.known_spectrum {
        writeln!(out, "spectrum {}", s.len())?;
        for x in s {
            writeln!(out, "{x:e}")?;
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<Option<String>> {
        for line in self.inner.by_ref() {
            self.number += 1;
            let line = line?;
            let trimmed = line.trim();
            if !trimmed.is_empty() && !trimmed.starts_with('#') {
                return Ok(Some(trimmed.to_string()));
            }
        }
        Ok(None)
    }

    fn expect_line(&mut self) -> Result<String> {
        self.next_line()?
            .ok_or_else(|| parse_err(self.number, "unexpected end of input"))
    }

    fn number<T: std::str::FromStr>(&self, s: &str) -> Result<T> {
        s.parse()
            .map_err(|_| parse_err(self.number, format!("invalid number `{s}`")))
    }

    fn reals(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n)
            .map(|_| {
                let l = self.expect_line()?;
                self.number(&l)
            })
            .collect()
    }

    fn complexes(&mut self, n: usize) -> Result<Vec<C64>> {
        (0..n)
            .map(|_| {
                let l = self.expect_line()?;
                let mut parts = l.split_whitespace();
                let (re, im) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(re), Some(im), None) => (re, im),
                    (Some(re), None, None) => (re, "0"),
                    _ => return Err(parse_err(self.number, "expected `re im`")),
                };
                Ok(C64::new(self.number(re)?, self.number(im)?))
            })
            .collect()
    }
}

fn single_column(m: Matrix, name: &str, line: usize) -> Result<Vector> {
    if m.cols() != 1 {
        return Err(parse_err(line, format!("`{name}` must have one column")));
    }
    Ok(m.column(0))
}

pub fn read_problem(input: impl BufRead) -> Result<TestProblem> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };
    if lines.expect_line()? != MAGIC {
        return Err(parse_err(lines.number, format!("expected header `{MAGIC}`")));
    }
    let mut label = String::new();
    let mut seed = 0;
    let (mut a, mut b, mut x0, mut u, mut sol, mut w) = (None, None, None, None, None, None);
    let (mut spectrum, mut eigenvalues) = (None, None);
    loop {
        let line = lines.expect_line()?;
        let (key, rest) = line.split_once(' ').unwrap_or((line.as_str(), ""));
        match key {
            "end" => break,
            "label" => label = rest.to_string(),
            "seed" => seed = lines.number(rest)?,
            "spectrum" | "eigenvalues" => {
                let n = lines.number(rest)?;
                let v = lines.reals(n)?;
                if key == "spectrum" {
                    spectrum = Some(v);
                } else {
                    eigenvalues = Some(v);
                }
            }
            "matrix" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() != 3 {
                    return Err(parse_err(lines.number, "expected `matrix <name> <rows> <cols>`"));
                }
                let rows: usize = lines.number(parts[1])?;
                let cols: usize = lines.number(parts[2])?;
                let at = lines.number;
                let data = lines.complexes(rows * cols)?;
                let m = Matrix::from_col_major(rows, cols, data)?;
                match parts[0] {
                    "a" => a = Some(m),
                    "b" => b = Some(single_column(m, "b", at)?),
                    "x0" => x0 = Some(single_column(m, "x0", at)?),
                    "solution" => sol = Some(single_column(m, "solution", at)?),
                    "u" => u = Some(m),
                    "w" => w = Some(m),
                    other => return Err(parse_err(at, format!("unknown matrix `{other}`"))),
                }
            }
            other => return Err(parse_err(lines.number, format!("unknown key `{other}`"))),
        }
    }
    let missing = |name: &str| parse_err(lines.number, format!("missing `{name}`"));
    let a = a.ok_or_else(|| missing("a"))?;
    let b = b.ok_or_else(|| missing("b"))?;
    let x0 = x0.ok_or_else(|| missing("x0"))?;
    if !a.is_square() || b.len() != a.rows() || x0.len() != a.rows() {
        return Err(parse_err(lines.number, "inconsistent dimensions"));
    }
    Ok(TestProblem {
        label,
        seed,
        a: Arc::new(a),
        b,
        x0,
        u,
        known_solution: sol,
        known_spectrum: spectrum,
        eigenvectors: w,
        eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Hermitian,
}

/// Reads a Matrix Market `array` file (real or complex; general, symmetric
/// or hermitian).
pub fn read_matrix_market(input: impl BufRead) -> Result<Matrix> {
    let mut lines = input.lines();
    let mut number = 0;
    let header = loop {
        match lines.next() {
            None => return Err(parse_err(number, "empty input")),
            Some(l) => {
                number += 1;
                let l = l?;
                if !l.trim().is_empty() {
                    break l;
                }
            }
        }
    };
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(number, "expected `%%MatrixMarket matrix array <field> <symmetry>`"));
    }
    if tokens[2] != "array" {
        return Err(parse_err(number, "only the array format is supported"));
    }
    let field = match tokens[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "complex" => Field::Complex,
        other => return Err(parse_err(number, format!("unsupported field `{other}`"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(parse_err(number, format!("unsupported symmetry `{other}`"))),
    };
    if field == Field::Real && symmetry == Symmetry::Hermitian {
        return Err(parse_err(number, "hermitian requires a complex field"));
    }

    let mut values = Vec::new();
    let mut size: Option<(usize, usize)> = None;
    for l in lines {
        number += 1;
        let l = l?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| parse_err(number, format!("invalid number `{s}`")))
        };
        if size.is_none() {
            if parts.len() != 2 {
                return Err(parse_err(number, "expected `<rows> <cols>`"));
            }
            let r = parts[0].parse().map_err(|_| parse_err(number, "invalid row count"))?;
            let c = parts[1].parse().map_err(|_| parse_err(number, "invalid column count"))?;
            size = Some((r, c));
            continue;
        }
        let z = match (field, parts.as_slice()) {
            (Field::Real, [re]) => C64::new(num(re)?, 0.0),
            (Field::Complex, [re, im]) => C64::new(num(re)?, num(im)?),
            _ => return Err(parse_err(number, "wrong number of values on entry line")),
        };
        values.push(z);
    }
    let (rows, cols) = size.ok_or_else(|| parse_err(number, "missing size line"))?;
    match symmetry {
        Symmetry::General => {
            if values.len() != rows * cols {
                return Err(parse_err(
                    number,
                    format!("expected {} entries, found {}", rows * cols, values.len()),
                ));
            }
            Matrix::from_col_major(rows, cols, values)
        }
        Symmetry::Symmetric | Symmetry::Hermitian => {
            if rows != cols {
                return Err(parse_err(number, "symmetric storage requires a square matrix"));
            }
            let expected = rows * (rows + 1) / 2;
            if values.len() != expected {
                return Err(parse_err(
                    number,
                    format!("expected {expected} entries, found {}", values.len()),
                ));
            }
            let mut m = Matrix::zeros(rows, cols);
            let mut it = values.into_iter();
            for j in 0..cols {
                for i in j..rows {
                    let z = it.next().expect("count checked");
                    m[(i, j)] = z;
                    m[(j, i)] = if symmetry == Symmetry::Hermitian { z.conj() } else { z };
                }
            }
            Ok(m)
        }
    }
}

/// Writes a general Matrix Market `array` file; real when every imaginary
/// part is zero.
pub fn write_matrix_market(m: &Matrix, out: &mut impl Write) -> Result<()> {
    let complex = m.as_slice().iter().any(|z| z.im != 0.0);
    let field = if complex { "complex" } else { "real" };
    writeln!(out, "%%MatrixMarket matrix array {field} general")?;
    writeln!(out, "{} {}", m.rows(), m.cols())?;
    for z in m.as_slice() {
        if complex {
            writeln!(out, "{:e} {:e}", z.re, z.im)?;
        } else {
            writeln!(out, "{:e}", z.re)?;
        }
    }
    Ok(())
}
