//! Symbol ingestion: the `sym-v1` text format, rational expansion and
//! seeded random families.
//!
//! ```text
//! format: sym-v1
//! kind: rational
//! name: first-order lag      # optional
//! num 1 0
//! den 1 0 -0.5 0
//! ```
//!
//! Rational coefficients are powers of `v = z^-1`, constant term first.

use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use crate::error::NehariError;
use crate::factorization::polynomial_roots;
use crate::scalar::{czero, Real, C};
use crate::series::LaurentSeries;
use crate::solver::seeded_rng;

/// Required distance of every denominator root beyond `|v| = 1`.
pub const POLE_MARGIN: f64 = 1e-9;
/// Upper limit on the number of expanded rational coefficients.
pub const MAX_TAIL: usize = 10_000_000;

pub const FORMAT_HEADER: &str = "format: sym-v1";

#[derive(Clone, Debug, PartialEq)]
pub enum SymbolBody<T: Real> {
    /// `(index, value)` pairs with distinct indices.
    Laurent(Vec<(i64, C<T>)>),
    Rational {
        num: Vec<C<T>>,
        den: Vec<C<T>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolSpec<T: Real> {
    pub name: Option<String>,
    pub comments: Vec<String>,
    pub body: SymbolBody<T>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("missing `format: sym-v1` header")]
    MissingHeader,
    #[error("missing or invalid `kind:` line")]
    MissingKind,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("unknown directive `{0}`")]
    UnknownDirective(String),
    #[error("duplicate coefficient index {0}")]
    DuplicateIndex(i64),
    #[error("invalid number `{0}`")]
    BadNumber(String),
    #[error("{0}")]
    Constraint(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn err<V>(line: usize, kind: ParseErrorKind) -> Result<V, ParseError> {
    Err(ParseError { line, kind })
}

fn number<T: Real>(tok: &str, line: usize) -> Result<T, ParseError> {
    match tok.parse::<T>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(line, ParseErrorKind::BadNumber(tok.to_string())),
    }
}

fn complex_list<T: Real>(toks: &[&str], line: usize) -> Result<Vec<C<T>>, ParseError> {
    if toks.is_empty() || !toks.len().is_multiple_of(2) {
        return err(
            line,
            ParseErrorKind::Malformed("expected pairs of `<re> <im>`".into()),
        );
    }
    toks.chunks(2)
        .map(|p| Ok(C::new(number(p[0], line)?, number(p[1], line)?)))
        .collect()
}

#[derive(PartialEq)]
enum Kind {
    Laurent,
    Rational,
}

/// Strict parser for `sym-v1` text.
pub fn parse_sym<T: Real>(text: &str) -> Result<SymbolSpec<T>, ParseError> {
    let mut comments = Vec::new();
    let mut name = None;
    let mut header_seen = false;
    let mut kind: Option<Kind> = None;
    let mut coeffs: Vec<(i64, C<T>)> = Vec::new();
    let mut num: Option<Vec<C<T>>> = None;
    let mut den: Option<(Vec<C<T>>, usize)> = None;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = match raw.split_once('#') {
            Some((body, comment)) => {
                comments.push(comment.trim().to_string());
                body
            }
            None => raw,
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }
        if !header_seen {
            if content != FORMAT_HEADER {
                return err(line, ParseErrorKind::MissingHeader);
            }
            header_seen = true;
            continue;
        }
        if kind.is_none() {
            kind = match content {
                "kind: laurent" => Some(Kind::Laurent),
                "kind: rational" => Some(Kind::Rational),
                _ => return err(line, ParseErrorKind::MissingKind),
            };
            continue;
        }
        if let Some(rest) = content.strip_prefix("name:") {
            if name.is_some() {
                return err(line, ParseErrorKind::Malformed("duplicate `name:`".into()));
            }
            name = Some(rest.trim().to_string());
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match (toks[0], kind.as_ref().unwrap()) {
            ("coeff", Kind::Laurent) => {
                if toks.len() != 4 {
                    return err(
                        line,
                        ParseErrorKind::Malformed("expected `coeff <n> <re> <im>`".into()),
                    );
                }
                let n: i64 = toks[1].parse().map_err(|_| ParseError {
                    line,
                    kind: ParseErrorKind::BadNumber(toks[1].to_string()),
                })?;
                if coeffs.iter().any(|(m, _)| *m == n) {
                    return err(line, ParseErrorKind::DuplicateIndex(n));
                }
                let c = C::new(number(toks[2], line)?, number(toks[3], line)?);
                coeffs.push((n, c));
            }
            ("num", Kind::Rational) => {
                if num.is_some() || den.is_some() {
                    return err(
                        line,
                        ParseErrorKind::Malformed("`num` must appear once, before `den`".into()),
                    );
                }
                num = Some(complex_list(&toks[1..], line)?);
            }
            ("den", Kind::Rational) => {
                if num.is_none() || den.is_some() {
                    return err(
                        line,
                        ParseErrorKind::Malformed("`den` must appear once, after `num`".into()),
                    );
                }
                den = Some((complex_list(&toks[1..], line)?, line));
            }
            (other, _) => return err(line, ParseErrorKind::UnknownDirective(other.to_string())),
        }
    }
    if !header_seen {
        return err(last_line.max(1), ParseErrorKind::MissingHeader);
    }
    let body = match kind {
        None => return err(last_line, ParseErrorKind::MissingKind),
        Some(Kind::Laurent) => SymbolBody::Laurent(coeffs),
        Some(Kind::Rational) => {
            let (Some(num), Some((den, den_line))) = (num, den) else {
                return err(
                    last_line,
                    ParseErrorKind::Malformed("rational symbol needs `num` and `den`".into()),
                );
            };
            if let Err(e) = check_denominator(&den) {
                return err(den_line, ParseErrorKind::Constraint(e.to_string()));
            }
            SymbolBody::Rational { num, den }
        }
    };
    Ok(SymbolSpec {
        name,
        comments,
        body,
    })
}

fn push_complex<T: Real>(out: &mut String, c: &C<T>) {
    let _ = write!(out, " {} {}", c.re, c.im);
}

/// Render in `sym-v1`; `parse_sym(&render_sym(s)) == s` for well-formed specs.
pub fn render_sym<T: Real>(spec: &SymbolSpec<T>) -> String {
    let mut out = String::new();
    out.push_str(FORMAT_HEADER);
    out.push('\n');
    match &spec.body {
        SymbolBody::Laurent(_) => out.push_str("kind: laurent\n"),
        SymbolBody::Rational { .. } => out.push_str("kind: rational\n"),
    }
    if let Some(name) = &spec.name {
        let _ = writeln!(out, "name: {name}");
    }
    for c in &spec.comments {
        let _ = writeln!(out, "# {c}");
    }
    match &spec.body {
        SymbolBody::Laurent(coeffs) => {
            for (n, c) in coeffs {
                let _ = writeln!(out, "coeff {n} {} {}", c.re, c.im);
            }
        }
        SymbolBody::Rational { num, den } => {
            out.push_str("num");
            num.iter().for_each(|c| push_complex(&mut out, c));
            out.push_str("\nden");
            den.iter().for_each(|c| push_complex(&mut out, c));
            out.push('\n');
        }
    }
    out
}

/// Laurent spec for a series, with coefficients in increasing index order.
pub fn laurent_spec<T: Real>(f: &LaurentSeries<T>, name: Option<String>) -> SymbolSpec<T> {
    SymbolSpec {
        name,
        comments: Vec::new(),
        body: SymbolBody::Laurent(f.iter().filter(|(_, c)| !c.norm().is_zero()).collect()),
    }
}

fn trim_trailing<T: Real>(p: &[C<T>]) -> &[C<T>] {
    let len = p
        .iter()
        .rposition(|c| !c.norm().is_zero())
        .map_or(0, |i| i + 1);
    &p[..len]
}

/// Denominator roots in `v`; errors when `den(0) = 0` or a root lies within
/// the pole margin of the unit disk.
fn check_denominator<T: Real>(den: &[C<T>]) -> Result<Vec<C<T>>, NehariError> {
    if den.first().is_none_or(|c| c.norm().is_zero()) {
        return Err(NehariError::ZeroDenominator);
    }
    let roots = polynomial_roots(trim_trailing(den))?;
    let limit = T::one() + T::lit(POLE_MARGIN);
    for r in &roots {
        if r.norm() <= limit {
            return Err(NehariError::PoleOutsideDisk {
                pole_modulus: (T::one() / r.norm()).to_f64_lossy(),
            });
        }
    }
    Ok(roots)
}

fn poly_eval<T: Real>(p: &[C<T>], v: C<T>) -> C<T> {
    p.iter().rev().fold(czero(), |acc, &c| acc * v + c)
}

fn poly_deriv_eval<T: Real>(p: &[C<T>], v: C<T>) -> C<T> {
    p.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(czero(), |acc, (j, &c)| acc * v + c * T::from_usize_lossy(j))
}

/// Geometric envelope `|c_-n| <= constant * rho^n` for the expansion tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailModel<T: Real> {
    pub constant: T,
    /// Largest z-plane pole modulus.
    pub rho: T,
}

impl<T: Real> TailModel<T> {
    /// `C rho^(N+1) / (1 - rho)`.
    pub fn bound(&self, n_tail: usize) -> T {
        if self.constant.is_zero() {
            return T::zero();
        }
        self.constant * self.rho.powf(T::from_usize_lossy(n_tail + 1)) / (T::one() - self.rho)
    }

    /// Smallest `N` with `bound(N) < tol`.
    pub fn order_for(&self, tol: T) -> usize {
        if self.constant.is_zero() {
            return 0;
        }
        let need = (tol * (T::one() - self.rho) / self.constant).ln() / self.rho.ln();
        let mut n = need.ceil().to_f64_lossy().max(1.0) as usize - 1;
        while n < MAX_TAIL && self.bound(n) >= tol {
            n += 1;
        }
        n
    }
}

/// Expansion coefficients `c_0, c_-1, ..., c_-len+1` by long division.
fn long_division<T: Real>(num: &[C<T>], den: &[C<T>], len: usize) -> Vec<C<T>> {
    let d0 = den[0];
    let mut c: Vec<C<T>> = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = num.get(n).copied().unwrap_or_else(czero);
        for j in 1..den.len().min(n + 1) {
            acc -= den[j] * c[n - j];
        }
        c.push(acc / d0);
    }
    c
}

/// Tail envelope from partial-fraction residues, or from the computed
/// coefficients with an inflated ratio when poles are (nearly) repeated.
pub fn tail_model<T: Real>(num: &[C<T>], den: &[C<T>]) -> Result<TailModel<T>, NehariError> {
    let den = trim_trailing(den);
    let num = trim_trailing(num);
    let roots = check_denominator(den)?;
    if roots.is_empty() {
        return Ok(TailModel {
            constant: T::zero(),
            rho: T::zero(),
        });
    }
    let min_root = roots.iter().map(|r| r.norm()).fold(T::infinity(), T::min);
    let rho = T::one() / min_root;
    let separated = roots.iter().enumerate().all(|(i, a)| {
        roots[i + 1..]
            .iter()
            .all(|b| (a - b).norm() > T::lit(1e-6) * a.norm().max(T::one()))
    });
    if separated {
        // c_-n = sum_i r_i p_i^n with p_i = 1/v_i, r_i = -p_i N(v_i) / D'(v_i).
        let constant = roots
            .iter()
            .map(|&v| {
                let p = v.inv();
                (-p * poly_eval(num, v) / poly_deriv_eval(den, v)).norm()
            })
            .sum();
        return Ok(TailModel { constant, rho });
    }
    let inflated = (T::one() + rho) * T::lit(0.5);
    let probe = 64 + 8 * (num.len() + den.len());
    let c = long_division(num, den, probe * 16);
    let constant = c
        .iter()
        .enumerate()
        .skip(num.len())
        .map(|(n, x)| x.norm() / inflated.powf(T::from_usize_lossy(n)))
        .fold(T::zero(), T::max);
    Ok(TailModel {
        constant,
        rho: inflated,
    })
}

/// Causal expansion of `num(v)/den(v)` truncated after `c_-n_tail`, with a
/// bound on the sup norm of the dropped tail.
pub fn rational_to_laurent<T: Real>(
    num: &[C<T>],
    den: &[C<T>],
    n_tail: usize,
) -> Result<(LaurentSeries<T>, T), NehariError> {
    let model = tail_model(num, den)?;
    let num = trim_trailing(num);
    let den = trim_trailing(den);
    let n_tail = n_tail.max(num.len().saturating_sub(1));
    if den.len() == 1 {
        let c: Vec<C<T>> = num.iter().map(|&a| a / den[0]).collect();
        return Ok((reversed_series(c), T::zero()));
    }
    let c = long_division(num, den, n_tail + 1);
    Ok((reversed_series(c), model.bound(n_tail)))
}

/// Choose the truncation so that the tail bound is below `tol`.
pub fn rational_to_laurent_tol<T: Real>(
    num: &[C<T>],
    den: &[C<T>],
    tol: T,
) -> Result<(LaurentSeries<T>, T), NehariError> {
    let model = tail_model(num, den)?;
    rational_to_laurent(num, den, model.order_for(tol))
}

/// `[c_0, c_-1, ...]` to a series.
fn reversed_series<T: Real>(c: Vec<C<T>>) -> LaurentSeries<T> {
    let lo = -(c.len() as i64 - 1);
    LaurentSeries::new(lo.min(0), c.into_iter().rev().collect())
}

impl<T: Real> SymbolSpec<T> {
    /// Coefficient series of the symbol and the truncation bound.
    pub fn to_series(&self, tail_tol: T) -> Result<(LaurentSeries<T>, T), NehariError> {
        match &self.body {
            SymbolBody::Laurent(c) => Ok((LaurentSeries::from_pairs(c.iter().copied()), T::zero())),
            SymbolBody::Rational { num, den } => rational_to_laurent_tol(num, den, tail_tol),
        }
    }
}

/// Deterministic random symbol on `[-causal_degree, anticausal_degree]`
/// with `|c_n| <= magnitude` and nonzero edge coefficients.
pub fn random_symbol<T: Real>(
    seed: u64,
    causal_degree: usize,
    anticausal_degree: usize,
    magnitude: f64,
) -> LaurentSeries<T> {
    let mut rng = seeded_rng(seed);
    let lo = -(causal_degree as i64);
    let coeffs = (0..=causal_degree + anticausal_degree)
        .map(|_| {
            let r = magnitude * rng.random_range(0.05..=1.0);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            C::new(T::lit(r * theta.cos()), T::lit(r * theta.sin()))
        })
        .collect();
    LaurentSeries::new(lo, coeffs)
}

/// Random stable rational symbol with all z-plane poles in `|z| <= max_pole`.
pub fn random_rational<T: Real>(
    seed: u64,
    num_degree: usize,
    poles: usize,
    max_pole: f64,
) -> (Vec<C<T>>, Vec<C<T>>) {
    let mut rng = seeded_rng(seed);
    let mut den = vec![C::new(T::one(), T::zero())];
    for _ in 0..poles {
        let r = max_pole * rng.random_range(0.1..=1.0);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let p = C::new(T::lit(r * theta.cos()), T::lit(r * theta.sin()));
        // multiply by (1 - p v)
        let mut next = vec![czero(); den.len() + 1];
        for (j, &d) in den.iter().enumerate() {
            next[j] += d;
            next[j + 1] -= d * p;
        }
        den = next;
    }
    let num = (0..=num_degree)
        .map(|_| {
            C::new(
                T::lit(rng.random_range(-1.0..=1.0)),
                T::lit(rng.random_range(-1.0..=1.0)),
            )
        })
        .collect();
    (num, den)
}
