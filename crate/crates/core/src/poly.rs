//! Exact sparse multivariate polynomials over the rationals, plus
//! polynomials whose coefficients are affine-linear in named parameters.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Rational};

/// Exponent vector ordered graded-lexicographically, largest first.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dot(&self, w: &[i64]) -> i128 {
        self.0.iter().zip(w).map(|(&a, &b)| a as i128 * b as i128).sum()
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .degree()
            .cmp(&self.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparsePoly {
    num_vars: usize,
    terms: BTreeMap<Mono, Rational>,
}

impl SparsePoly {
    pub fn zero(num_vars: usize) -> Self {
        SparsePoly { num_vars, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, c: Rational) -> Self {
        Self::monomial(num_vars, vec![0; num_vars], c)
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, Rational::one())
    }

    /// The variable `x_{i+1}` (0-based `i`).
    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Self::monomial(num_vars, e, Rational::one())
    }

    pub fn monomial(num_vars: usize, exp: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exp.len(), num_vars, "exponent length must match the variable count");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono(exp), c);
        }
        SparsePoly { num_vars, terms }
    }

    /// Sum of `(exponent, coefficient)` pairs; repeated exponents accumulate.
    pub fn from_terms(num_vars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Result<Self> {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(Error::DimensionMismatch { expected: num_vars, found: e.len() });
            }
            p.add_term(Mono(e), c);
        }
        Ok(p)
    }

    /// `x_1 + ... + x_n`.
    pub fn simplex_form(num_vars: usize) -> Self {
        let mut p = Self::zero(num_vars);
        for i in 0..num_vars {
            p.add_term(Mono(unit(num_vars, i)), Rational::one());
        }
        p
    }

    pub fn add_term(&mut self, exp: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, c);
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Terms in canonical (graded-lex, largest first) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: &[u32]) -> Rational {
        self.terms.get(&Mono(exp.to_vec())).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn support(&self) -> Vec<Vec<u32>> {
        self.terms.keys().map(|m| m.0.clone()).collect()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    /// Common degree of all terms, or `None` if the terms differ in degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degrees = self.terms.keys().map(Mono::degree);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    fn check_vars(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: other.num_vars });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.num_vars);
        }
        SparsePoly {
            num_vars: self.num_vars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_vars(other)?;
        let mut acc: BTreeMap<Mono, Rational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = Mono(ea.0.iter().zip(&eb.0).map(|(a, b)| a + b).collect());
                *acc.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(SparsePoly { num_vars: self.num_vars, terms: acc })
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::one(self.num_vars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base).expect("same variable count");
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base).expect("same variable count");
            }
        }
        result
    }

    /// Partial derivative with respect to the 0-based variable `i`.
    pub fn partial_derivative(&self, i: usize) -> Result<Self> {
        if i >= self.num_vars {
            return Err(Error::IndexOutOfRange { index: i + 1, len: self.num_vars });
        }
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            let a = e.0[i];
            if a == 0 {
                continue;
            }
            let mut d = e.0.clone();
            d[i] -= 1;
            out.add_term(Mono(d), c * Rational::from_integer(BigInt::from(a)));
        }
        Ok(out)
    }

    pub fn evaluate_exact(&self, u: &[Rational]) -> Result<Rational> {
        if u.len() != self.num_vars {
            return Err(Error::DimensionMismatch { expected: self.num_vars, found: u.len() });
        }
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &a) in u.iter().zip(&e.0) {
                if a > 0 {
                    term *= num_traits::pow(x.clone(), a as usize);
                }
            }
            total += term;
        }
        Ok(total)
    }

    pub fn evaluate_f64(&self, u: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = to_f64(c);
                for (x, &a) in u.iter().zip(&e.0) {
                    if a > 0 {
                        t *= x.powi(a as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// Initial form with respect to the weight `w`: the terms minimizing `<w, exponent>`.
    pub fn restrict_to_face(&self, w: &[i64]) -> Self {
        assert_eq!(w.len(), self.num_vars, "weight length must match the variable count");
        let min = match self.terms.keys().map(|e| e.dot(w)).min() {
            Some(m) => m,
            None => return self.clone(),
        };
        SparsePoly {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.dot(w) == min)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Substitutes `x_i = value` for the 0-based variable `i`, keeping the variable count.
    pub fn substitute_var(&self, i: usize, value: &Rational) -> Self {
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            let mut d = e.0.clone();
            let a = std::mem::replace(&mut d[i], 0);
            out.add_term(Mono(d), c * num_traits::pow(value.clone(), a as usize));
        }
        out
    }

    /// Variables that occur with a positive exponent, ascending.
    pub fn used_vars(&self) -> Vec<usize> {
        (0..self.num_vars)
            .filter(|&i| self.terms.keys().any(|e| e.0[i] > 0))
            .collect()
    }

    /// Keeps only the listed variables, in the listed order. Exponents of
    /// dropped variables must be zero.
    pub fn select_vars(&self, vars: &[usize]) -> Result<Self> {
        let mut out = Self::zero(vars.len());
        for (e, c) in &self.terms {
            let dropped: u32 = e.0.iter().enumerate().filter(|(i, _)| !vars.contains(i)).map(|(_, &a)| a).sum();
            if dropped > 0 {
                return Err(Error::InvalidInput("a dropped variable occurs in the polynomial".into()));
            }
            out.add_term(Mono(vars.iter().map(|&i| e.0[i]).collect()), c.clone());
        }
        Ok(out)
    }

    /// Inverse of [`select_vars`]: variable `k` of `self` becomes variable `vars[k]`.
    pub fn embed(&self, num_vars: usize, vars: &[usize]) -> Self {
        assert_eq!(vars.len(), self.num_vars);
        let mut out = Self::zero(num_vars);
        for (e, c) in &self.terms {
            let mut d = vec![0; num_vars];
            for (k, &i) in vars.iter().enumerate() {
                d[i] += e.0[k];
            }
            out.add_term(Mono(d), c.clone());
        }
        out
    }

    /// One term per line, `coeff * x1^a1*x2^a2`, in canonical order.
    pub fn canonical_text(&self) -> String {
        let mut s = format!("vars {}\n", self.num_vars);
        for (e, c) in &self.terms {
            s.push_str(&format_rational(c));
            s.push_str(" * ");
            s.push_str(&monomial_text(&e.0, "1"));
            s.push('\n');
        }
        s
    }

    /// Hex SHA-256 of [`canonical_text`].
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_text().as_bytes()))
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            num_vars: self.num_vars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson { exp: e.0.clone(), num: c.numer().to_string(), den: c.denom().to_string() })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self> {
        let mut terms = Vec::with_capacity(j.terms.len());
        for t in &j.terms {
            let num: BigInt = t.num.parse().map_err(|_| Error::Parse(format!("bad numerator {:?}", t.num)))?;
            let den: BigInt = t.den.parse().map_err(|_| Error::Parse(format!("bad denominator {:?}", t.den)))?;
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            terms.push((t.exp.clone(), Rational::new(num, den)));
        }
        Self::from_terms(j.num_vars, terms)
    }
}

fn unit(n: usize, i: usize) -> Vec<u32> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

fn monomial_text(exp: &[u32], empty: &str) -> String {
    let parts: Vec<String> = exp
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0)
        .map(|(i, &a)| if a == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, a) })
        .collect();
    if parts.is_empty() {
        empty.to_string()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = monomial_text(&e.0, "");
            if mono.is_empty() {
                write!(f, "{}", format_rational(&abs))?;
            } else if abs.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{}*{mono}", format_rational(&abs))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparsePoly[{}]({self})", self.num_vars)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub num_vars: usize,
    pub terms: Vec<TermJson>,
}

/// A kinematic parameter symbol. Indices are 0-based; `Gram(i, j)` has `i <= j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Param {
    Mass(usize),
    Gram(usize, usize),
}

impl Param {
    pub fn gram(i: usize, j: usize) -> Param {
        Param::Gram(i.min(j), i.max(j))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Mass(e) => write!(f, "m{}", e + 1),
            Param::Gram(i, j) => write!(f, "k{}_{}", i + 1, j + 1),
        }
    }
}

/// Affine-linear form `constant + sum c_p * p` over parameters.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct LinearForm {
    pub constant: Rational,
    pub coeffs: BTreeMap<Param, Rational>,
}

impl LinearForm {
    pub fn param(p: Param) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(p, Rational::one());
        LinearForm { constant: Rational::zero(), coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.coeffs.is_empty()
    }

    pub fn add_assign(&mut self, other: &LinearForm) {
        self.constant += &other.constant;
        for (p, c) in &other.coeffs {
            let entry = self.coeffs.entry(*p).or_insert_with(Rational::zero);
            *entry += c;
            if entry.is_zero() {
                self.coeffs.remove(p);
            }
        }
    }

    pub fn evaluate(&self, value: &impl Fn(Param) -> Option<Rational>) -> Result<Rational> {
        let mut total = self.constant.clone();
        for (p, c) in &self.coeffs {
            let v = value(*p).ok_or_else(|| Error::MissingParameter(p.to_string()))?;
            total += c * v;
        }
        Ok(total)
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if !self.constant.is_zero() || self.coeffs.is_empty() {
            write!(f, "{}", format_rational(&self.constant))?;
            first = false;
        }
        for (p, c) in &self.coeffs {
            let sign = match (first, c.is_negative()) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            let abs = c.abs();
            if abs.is_one() {
                write!(f, "{sign}{p}")?;
            } else {
                write!(f, "{sign}{}*{p}", format_rational(&abs))?;
            }
            first = false;
        }
        Ok(())
    }
}

/// Polynomial in `x` whose coefficients are affine-linear forms in parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamPoly {
    num_vars: usize,
    terms: BTreeMap<Mono, LinearForm>,
}

impl ParamPoly {
    pub fn zero(num_vars: usize) -> Self {
        ParamPoly { num_vars, terms: BTreeMap::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, exp: Vec<u32>, form: &LinearForm) {
        let key = Mono(exp);
        let entry = self.terms.entry(key.clone()).or_default();
        entry.add_assign(form);
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &LinearForm)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: &[u32]) -> Option<&LinearForm> {
        self.terms.get(&Mono(exp.to_vec()))
    }

    /// Substitutes parameter values; zero coefficients are dropped.
    pub fn substitute_params(&self, value: impl Fn(Param) -> Option<Rational>) -> Result<SparsePoly> {
        let mut out = SparsePoly::zero(self.num_vars);
        for (e, form) in &self.terms {
            out.add_term(e.clone(), form.evaluate(&value)?);
        }
        Ok(out)
    }
}

impl fmt::Display for ParamPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, form)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({form})*{}", monomial_text(&e.0, "1"))?;
        }
        Ok(())
    }
}
