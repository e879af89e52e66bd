//! JSON plant files.
//!
//! ```json
//! {
//!   "parameters": [{ "name": "xi1", "distribution": "uniform", "lower": -1, "upper": 1 }],
//!   "A":   [["0.6*xi1^3", "-0.4"], ["0.1", "0.5"]],
//!   "B_w": [...], "B": [...], "C": [...], "D_w": [...],
//!   "C_z": [...], "D_zw": [...], "D_z": [...]
//! }
//! ```
//!
//! Entries are numbers or polynomial strings in `xi1 … xiN` built from
//! numbers, `^` with integer exponents, `*`, `+` and `-`. `C_z`, `D_zw` and
//! `D_z` must be constant.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use pce_hinf::linalg::Mat;
use pce_hinf::plant::UncertainPlant;
use pce_hinf::polychaos::{Distribution, Marginal, MultiIndex, PolynomialMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Polynomial in `n_xi` parameters, keyed by exponent vector.
pub type Polynomial = BTreeMap<MultiIndex, f64>;

/// `(row, column, entry)` of a parsed matrix.
type Cell = (usize, usize, Polynomial);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParamSpec {
    Uniform { name: String, lower: f64, upper: f64 },
    Gaussian { name: String, mean: f64, std: f64 },
}

impl ParamSpec {
    fn name(&self) -> &str {
        match self {
            ParamSpec::Uniform { name, .. } | ParamSpec::Gaussian { name, .. } => name,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Expr(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantFile {
    pub parameters: Vec<ParamSpec>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Entry>>,
    #[serde(rename = "B_w")]
    pub b_w: Vec<Vec<Entry>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Entry>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<Entry>>,
    #[serde(rename = "D_w")]
    pub d_w: Vec<Vec<Entry>>,
    #[serde(rename = "C_z")]
    pub c_z: Vec<Vec<Entry>>,
    #[serde(rename = "D_zw")]
    pub d_zw: Vec<Vec<Entry>>,
    #[serde(rename = "D_z")]
    pub d_z: Vec<Vec<Entry>>,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    n_xi: usize,
}

impl<'a> Lexer<'a> {
    fn err(&self, msg: &str) -> String {
        format!("{msg} at offset {} in {:?}", self.pos, self.src)
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map_or(0, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> std::result::Result<f64, String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut end = 0;
        let bytes = rest.as_bytes();
        while end < bytes.len() {
            let c = bytes[end];
            let exp_sign = (c == b'+' || c == b'-') && end > 0 && matches!(bytes[end - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                end += 1;
            } else {
                break;
            }
        }
        let v: f64 = rest[..end].parse().map_err(|_| self.err("malformed number"))?;
        self.pos += end;
        Ok(v)
    }

    fn integer(&mut self) -> std::result::Result<u32, String> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        let v = rest[..end].parse().map_err(|_| self.err("expected an integer exponent"))?;
        self.pos += end;
        Ok(v)
    }

    // factor := number | xiK ['^' int]
    fn factor(&mut self) -> std::result::Result<(f64, MultiIndex), String> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => Ok((self.number()?, MultiIndex::zero(self.n_xi))),
            Some('x') => {
                let rest = &self.src[self.pos..];
                if !rest.starts_with("xi") {
                    return Err(self.err("expected xiK"));
                }
                self.pos += 2;
                let k = self.integer()? as usize;
                if k == 0 || k > self.n_xi {
                    return Err(self.err(&format!("parameter xi{k} not declared (have {})", self.n_xi)));
                }
                let power = if self.eat('^') { self.integer()? } else { 1 };
                Ok((1.0, MultiIndex::axis(self.n_xi, k - 1, power)))
            }
            _ => Err(self.err("expected a number or xiK")),
        }
    }

    // term := factor ('*' factor)*
    fn term(&mut self) -> std::result::Result<(f64, MultiIndex), String> {
        let (mut c, mut s) = self.factor()?;
        while self.eat('*') {
            let (c2, s2) = self.factor()?;
            c *= c2;
            s = s.add(&s2);
        }
        Ok((c, s))
    }
}

/// Parses a polynomial entry in `xi1 … xi{n_xi}`.
pub fn parse_polynomial(src: &str, n_xi: usize) -> std::result::Result<Polynomial, String> {
    let mut lx = Lexer { src, pos: 0, n_xi };
    let mut out = Polynomial::new();
    let mut sign = if lx.eat('-') {
        -1.0
    } else {
        lx.eat('+');
        1.0
    };
    loop {
        let (c, s) = lx.term()?;
        *out.entry(s).or_insert(0.0) += sign * c;
        if lx.eat('+') {
            sign = 1.0;
        } else if lx.eat('-') {
            sign = -1.0;
        } else if lx.peek().is_none() {
            break;
        } else {
            return Err(lx.err("unexpected character"));
        }
    }
    out.retain(|_, v| *v != 0.0);
    Ok(out)
}

fn monomial(s: &MultiIndex) -> String {
    s.exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(k, &e)| if e == 1 { format!("xi{}", k + 1) } else { format!("xi{}^{e}", k + 1) })
        .collect::<Vec<_>>()
        .join("*")
}

/// Canonical text: terms by ascending degree, then exponent order; unit
/// coefficients dropped; shortest round-trip number formatting.
pub fn format_polynomial(p: &Polynomial) -> String {
    let mut terms: Vec<(&MultiIndex, f64)> = p.iter().filter(|(_, v)| **v != 0.0).map(|(s, v)| (s, *v)).collect();
    terms.sort_by(|a, b| a.0.degree().cmp(&b.0.degree()).then_with(|| b.0.cmp(a.0)));
    if terms.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (s, v)) in terms.iter().enumerate() {
        let mag = v.abs();
        if i == 0 {
            if *v < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if *v < 0.0 { " - " } else { " + " });
        }
        let mono = monomial(s);
        match (mono.is_empty(), mag == 1.0) {
            (true, _) => write!(out, "{mag:?}").unwrap(),
            (false, true) => out.push_str(&mono),
            (false, false) => write!(out, "{mag:?}*{mono}").unwrap(),
        }
    }
    out
}

fn matrix_entries(
    path: &str,
    name: &str,
    rows: &[Vec<Entry>],
    n_xi: usize,
) -> Result<(usize, usize, Vec<Cell>)> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 {
        return Err(pce_hinf::Error::Dimension(format!("{name} is empty")).into());
    }
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n_cols {
            return Err(pce_hinf::Error::Dimension(format!(
                "{name} row {i} has {} entries, expected {n_cols}",
                row.len()
            ))
            .into());
        }
        for (j, e) in row.iter().enumerate() {
            let poly = match e {
                Entry::Number(v) => {
                    let mut p = Polynomial::new();
                    if *v != 0.0 {
                        p.insert(MultiIndex::zero(n_xi), *v);
                    }
                    p
                }
                Entry::Expr(s) => {
                    parse_polynomial(s, n_xi).map_err(|m| CliError::schema(path, format!("{name}[{i}][{j}]: {m}")))?
                }
            };
            out.push((i, j, poly));
        }
    }
    Ok((n_rows, n_cols, out))
}

fn poly_matrix(path: &str, name: &str, rows: &[Vec<Entry>], n_xi: usize) -> Result<PolynomialMatrix> {
    let (r, c, entries) = matrix_entries(path, name, rows, n_xi)?;
    let mut m = PolynomialMatrix::zeros(r, c, n_xi);
    for (i, j, p) in entries {
        for (s, v) in p {
            m.add_entry(i, j, s, v)?;
        }
    }
    Ok(m)
}

fn const_matrix(path: &str, name: &str, rows: &[Vec<Entry>], n_xi: usize) -> Result<Mat> {
    let (r, c, entries) = matrix_entries(path, name, rows, n_xi)?;
    let mut m = Mat::zeros(r, c);
    for (i, j, p) in entries {
        for (s, v) in p {
            if s.degree() > 0 {
                return Err(CliError::schema(path, format!("{name}[{i}][{j}] must not depend on the parameters")));
            }
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

fn distribution(path: &str, params: &[ParamSpec]) -> Result<Distribution> {
    if params.is_empty() {
        return Err(CliError::schema(path, "at least one parameter is required"));
    }
    let mut marginals = Vec::with_capacity(params.len());
    for (k, p) in params.iter().enumerate() {
        let want = format!("xi{}", k + 1);
        if p.name() != want {
            return Err(CliError::schema(path, format!("parameter {k} must be named {want}, found {}", p.name())));
        }
        marginals.push(match p {
            ParamSpec::Uniform { lower, upper, .. } => Marginal::uniform(*lower, *upper)?,
            ParamSpec::Gaussian { mean, std, .. } => Marginal::gaussian(*mean, *std)?,
        });
    }
    Ok(Distribution::independent(marginals))
}

impl PlantFile {
    pub fn to_plant(&self, path: &str) -> Result<UncertainPlant> {
        let dist = distribution(path, &self.parameters)?;
        let n = dist.dim();
        Ok(UncertainPlant::new(
            poly_matrix(path, "A", &self.a, n)?,
            poly_matrix(path, "B_w", &self.b_w, n)?,
            poly_matrix(path, "B", &self.b, n)?,
            poly_matrix(path, "C", &self.c, n)?,
            poly_matrix(path, "D_w", &self.d_w, n)?,
            const_matrix(path, "C_z", &self.c_z, n)?,
            const_matrix(path, "D_zw", &self.d_zw, n)?,
            const_matrix(path, "D_z", &self.d_z, n)?,
            dist,
        )?)
    }

    /// Canonical file for a plant: every entry a canonical polynomial string.
    pub fn from_plant(plant: &UncertainPlant) -> Self {
        let n_xi = plant.n_xi();
        let parameters = plant
            .dist
            .marginals()
            .iter()
            .enumerate()
            .map(|(k, m)| {
                let name = format!("xi{}", k + 1);
                match *m {
                    Marginal::Uniform { a, b } => ParamSpec::Uniform { name, lower: a, upper: b },
                    Marginal::Gaussian { mean, std } => ParamSpec::Gaussian { name, mean, std },
                }
            })
            .collect();
        let poly = |m: &PolynomialMatrix| -> Vec<Vec<Entry>> {
            (0..m.rows())
                .map(|i| {
                    (0..m.cols())
                        .map(|j| {
                            let p: Polynomial = m.terms().map(|(s, c)| (s.clone(), c[(i, j)])).collect();
                            Entry::Expr(format_polynomial(&p))
                        })
                        .collect()
                })
                .collect()
        };
        let konst = |m: &Mat| poly(&PolynomialMatrix::constant(m.clone(), n_xi));
        PlantFile {
            parameters,
            a: poly(&plant.a),
            b_w: poly(&plant.b_w),
            b: poly(&plant.b),
            c: poly(&plant.c),
            d_w: poly(&plant.d_w),
            c_z: konst(&plant.c_z),
            d_zw: konst(&plant.d_zw),
            d_z: konst(&plant.d_z),
        }
    }
}

pub fn parse_plant_str(text: &str, path: &str) -> Result<UncertainPlant> {
    let file: PlantFile = serde_json::from_str(text).map_err(|e| CliError::schema(path, e.to_string()))?;
    file.to_plant(path)
}

pub fn parse_plant(path: &Path) -> Result<UncertainPlant> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_plant_str(&text, &path.display().to_string())
}

pub fn serialize_plant(plant: &UncertainPlant) -> String {
    let mut s = serde_json::to_string_pretty(&PlantFile::from_plant(plant)).expect("plant files serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cubic_entry() {
        let p = parse_polynomial("0.6*xi1^3", 1).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p[&MultiIndex::new(vec![3])], 0.6);
    }

    #[test]
    fn parses_sums_products_and_signs() {
        let p = parse_polynomial("-1 + 2*xi1*xi2^2 - xi2 + 0.5e-1", 2).unwrap();
        assert_eq!(p[&MultiIndex::zero(2)], -0.95);
        assert_eq!(p[&MultiIndex::new(vec![1, 2])], 2.0);
        assert_eq!(p[&MultiIndex::new(vec![0, 1])], -1.0);
    }

    #[test]
    fn rejects_undeclared_parameter() {
        assert!(parse_polynomial("xi2", 1).unwrap_err().contains("xi2"));
        assert!(parse_polynomial("2 +", 1).is_err());
        assert!(parse_polynomial("2 $ xi1", 1).is_err());
    }

    #[test]
    fn canonical_format_round_trips() {
        for src in ["0.2 + xi1^3", "-xi1 + 3*xi1^2", "0", "-0.4", "1 + 2*xi1*xi2 - xi2^3"] {
            let p = parse_polynomial(src, 2).unwrap();
            let s = format_polynomial(&p);
            assert_eq!(parse_polynomial(&s, 2).unwrap(), p, "{src} -> {s}");
            assert_eq!(format_polynomial(&parse_polynomial(&s, 2).unwrap()), s);
        }
        assert_eq!(format_polynomial(&parse_polynomial("xi1^3 + 0.2", 1).unwrap()), "0.2 + xi1^3");
    }
}
