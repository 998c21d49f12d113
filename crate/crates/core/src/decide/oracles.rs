//! Closed-form copositivity tests for small graphs, outer approximations for
//! two-loop boxes, and the realization of quadratic forms by one-loop graphs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};
use crate::symanzik::KinematicParams;

/// An element `sum_S c_S prod_{i in S} sqrt(r_i)` of a multiquadratic field
/// over the rationals, with nonnegative radicands `r_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtExpr {
    radicands: Vec<Rational>,
    coeffs: BTreeMap<u32, Rational>,
}

impl SqrtExpr {
    pub fn new(radicands: Vec<Rational>) -> Result<Self> {
        if radicands.len() > 16 {
            return Err(Error::Resource("too many square roots".into()));
        }
        if radicands.iter().any(Signed::is_negative) {
            return Err(Error::InvalidInput("square root of a negative number".into()));
        }
        Ok(SqrtExpr { radicands, coeffs: BTreeMap::new() })
    }

    /// Adds `c * prod_{i in roots} sqrt(r_i)`.
    pub fn term(mut self, c: Rational, roots: &[usize]) -> Self {
        let mut mask = 0u32;
        let mut c = c;
        for &i in roots {
            if mask & (1 << i) != 0 {
                c *= self.radicands[i].clone();
            }
            mask ^= 1 << i;
        }
        self.add(mask, c);
        self
    }

    fn add(&mut self, mask: u32, c: Rational) {
        let entry = self.coeffs.entry(mask).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&mask);
        }
    }

    fn top_generator(&self) -> Option<usize> {
        self.coeffs.keys().map(|&m| if m == 0 { None } else { Some(31 - m.leading_zeros() as usize) }).max().flatten()
    }

    /// Splits off the generator `g`: `self = p + q * sqrt(r_g)`.
    fn split(&self, g: usize) -> (SqrtExpr, SqrtExpr) {
        let mut p = SqrtExpr { radicands: self.radicands.clone(), coeffs: BTreeMap::new() };
        let mut q = p.clone();
        for (&m, c) in &self.coeffs {
            if m & (1 << g) != 0 {
                q.add(m ^ (1 << g), c.clone());
            } else {
                p.add(m, c.clone());
            }
        }
        (p, q)
    }

    fn mul(&self, other: &SqrtExpr) -> SqrtExpr {
        let mut out = SqrtExpr { radicands: self.radicands.clone(), coeffs: BTreeMap::new() };
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &other.coeffs {
                let mut c = ca * cb;
                let common = a & b;
                for i in 0..self.radicands.len() {
                    if common & (1 << i) != 0 {
                        c *= self.radicands[i].clone();
                    }
                }
                out.add(a ^ b, c);
            }
        }
        out
    }

    fn sub(&self, other: &SqrtExpr) -> SqrtExpr {
        let mut out = self.clone();
        for (&m, c) in &other.coeffs {
            out.add(m, -c.clone());
        }
        out
    }

    /// Exact sign: -1, 0 or 1.
    pub fn sign(&self) -> i8 {
        let Some(g) = self.top_generator() else {
            return self.coeffs.get(&0).map_or(0, crate::rational::sign);
        };
        if self.radicands[g].is_zero() {
            let (p, _) = self.split(g);
            return p.sign();
        }
        let (p, q) = self.split(g);
        let (sp, sq) = (p.sign(), q.sign());
        if sp == sq || sq == 0 {
            return sp;
        }
        if sp == 0 {
            return sq;
        }
        // Opposite signs: compare p^2 with q^2 r.
        let r = SqrtExpr {
            radicands: self.radicands.clone(),
            coeffs: BTreeMap::from([(0, self.radicands[g].clone())]),
        };
        let diff = p.mul(&p).sub(&q.mul(&q).mul(&r));
        sp * diff.sign()
    }
}

/// `m1, m2 >= 0` and (`m1 + m2 >= s` or `4 m1 m2 >= (m1 + m2 - s)^2`).
pub fn bubble_oracle(m1: &Rational, m2: &Rational, s: &Rational) -> bool {
    if m1.is_negative() || m2.is_negative() {
        return false;
    }
    let d = m1 + m2 - s;
    !d.is_negative() || int(4) * m1 * m2 >= d.clone() * d
}

/// Copositivity of a symmetric 3x3 matrix by Hadeler's conditions.
pub fn triangle_oracle(c: &[Vec<Rational>]) -> Result<bool> {
    check_symmetric(c, Some(3))?;
    if (0..3).any(|i| c[i][i].is_negative()) {
        return Ok(false);
    }
    let diag: Vec<Rational> = (0..3).map(|i| c[i][i].clone()).collect();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let e = SqrtExpr::new(diag.clone())?.term(c[i][j].clone(), &[]).term(int(1), &[i, j]);
        if e.sign() < 0 {
            return Ok(false);
        }
    }
    if !det3(c).is_negative() {
        return Ok(true);
    }
    let e = SqrtExpr::new(diag)?
        .term(c[0][1].clone(), &[2])
        .term(c[0][2].clone(), &[1])
        .term(c[1][2].clone(), &[0])
        .term(int(1), &[0, 1, 2]);
    Ok(e.sign() >= 0)
}

fn det3(c: &[Vec<Rational>]) -> Rational {
    &c[0][0] * (&c[1][1] * &c[2][2] - &c[1][2] * &c[2][1]) - &c[0][1] * (&c[1][0] * &c[2][2] - &c[1][2] * &c[2][0])
        + &c[0][2] * (&c[1][0] * &c[2][1] - &c[1][1] * &c[2][0])
}

fn check_symmetric(c: &[Vec<Rational>], size: Option<usize>) -> Result<()> {
    let n = c.len();
    if let Some(k) = size {
        if n != k {
            return Err(Error::DimensionMismatch { expected: k, found: n });
        }
    }
    for (i, row) in c.iter().enumerate() {
        if row.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: row.len() });
        }
        for j in 0..i {
            if c[i][j] != c[j][i] {
                return Err(Error::InvalidInput(format!("matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

/// `(sum_i sqrt(m_i))^2 >= s` with all `m_i >= 0`.
pub fn banana_oracle(m: &[Rational], s: &Rational) -> Result<bool> {
    if m.iter().any(Signed::is_negative) {
        return Ok(false);
    }
    if s.is_negative() {
        return Ok(true);
    }
    let k = m.len();
    let mut radicands = m.to_vec();
    radicands.push(s.clone());
    let mut e = SqrtExpr::new(radicands)?.term(int(-1), &[k]);
    for i in 0..k {
        e = e.term(int(1), &[i]);
    }
    Ok(e.sign() >= 0)
}

/// Landau discriminant of the three-edge banana graph.
pub fn banana_discriminant_n3(m1: &Rational, m2: &Rational, m3: &Rational, s: &Rational) -> Rational {
    let (a, b, c) = (m1, m2, m3);
    let p2 = |x: &Rational| x * x;
    let p3 = |x: &Rational| x * x * x;
    let p4 = |x: &Rational| p2(x) * p2(x);
    let s2 = p2(s);
    let c3 = int(4) * (a + b + c);
    let c2 = int(6) * (p2(a) + p2(b) + p2(c)) + int(4) * (a * b + a * c + b * c);
    let c1 = int(4)
        * (p3(a) - p2(a) * b - p2(a) * c - a * p2(b) + int(10) * a * b * c - a * p2(c) + p3(b) - p2(b) * c - b * p2(c)
            + p3(c));
    let c0 = p4(a) - int(4) * p3(a) * b - int(4) * p3(a) * c + int(6) * p2(a) * p2(b) + int(4) * p2(a) * b * c
        + int(6) * p2(a) * p2(c)
        - int(4) * a * p3(b)
        + int(4) * a * p2(b) * c
        + int(4) * a * b * p2(c)
        - int(4) * a * p3(c)
        + p4(b)
        - int(4) * p3(b) * c
        + int(6) * p2(b) * p2(c)
        - int(4) * b * p3(c)
        + p4(c);
    p2(&s2) - c3 * s * &s2 + c2 * &s2 - c1 * s + c0
}

/// The outer approximations of the copositive cones of the two-loop boxes,
/// in equal-mass coordinates `(m, M, s, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OuterApprox {
    E1,
    E2,
    D1,
    D2,
}

impl FromStr for OuterApprox {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "E1" => Ok(OuterApprox::E1),
            "E2" => Ok(OuterApprox::E2),
            "D1" => Ok(OuterApprox::D1),
            "D2" => Ok(OuterApprox::D2),
            _ => Err(Error::Parse(format!("unknown outer approximation {s:?}"))),
        }
    }
}

impl fmt::Display for OuterApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

pub fn outer_approx(which: OuterApprox, m: &Rational, big_m: &Rational, s: &Rational, t: &Rational) -> bool {
    let nonneg = |q: Rational| !q.is_negative();
    let e1 = || nonneg(int(4) * m - big_m) && nonneg(int(4) * m - s);
    let d1 = || {
        let cubic = int(-8) * big_m * m * m + int(2) * big_m * big_m * m - int(2) * big_m * big_m * s - m * s * s
            - int(4) * m * m * s
            + int(8) * big_m * m * s
            + int(5) * m * m * m;
        nonneg(int(9) * m - s)
            && nonneg(int(9) * m - big_m)
            && nonneg(int(9) * m - t)
            && (nonneg(cubic) || nonneg(int(7) * m - int(2) * big_m - s))
    };
    match which {
        OuterApprox::E1 => e1(),
        OuterApprox::E2 => e1() && nonneg(int(4) * m - t),
        OuterApprox::D1 => d1(),
        OuterApprox::D2 => d1() && nonneg(int(9) * m - int(4) * big_m + s + t),
    }
}

/// Masses and Gram matrix for the one-loop graph with `n` edges whose second
/// Symanzik polynomial is `x^T C x`.
pub fn realize_quadratic(c: &[Vec<Rational>]) -> Result<KinematicParams> {
    check_symmetric(c, None)?;
    let n = c.len();
    if n < 2 {
        return Err(Error::InvalidInput("a one-loop realization needs n >= 2".into()));
    }
    let masses: Vec<Rational> = (0..n).map(|i| c[i][i].clone()).collect();
    // target[i][j], i < j: the momentum part of the coefficient of x_i x_j,
    // i.e. minus the squared momentum entering vertices i..j-1.
    let target = |i: usize, j: usize| int(2) * &c[i][j] - &c[i][i] - &c[j][j];
    let mut k = vec![vec![Rational::zero(); n]; n];
    for q in 0..n - 1 {
        for a in 0..n - 1 - q {
            let b = a + q;
            let inner: Rational = (a..=b)
                .flat_map(|i| (a..=b).map(move |j| (i, j)))
                .filter(|&(i, j)| !(i == a && j == b || i == b && j == a))
                .map(|(i, j)| k[i][j].clone())
                .sum();
            let full = -target(a, b + 1);
            let v = if q == 0 { full } else { (full - inner) / int(2) };
            k[a][b] = v.clone();
            k[b][a] = v;
        }
    }
    for i in 0..n - 1 {
        let row: Rational = (0..n - 1).map(|j| k[i][j].clone()).sum();
        k[i][n - 1] = -row.clone();
        k[n - 1][i] = -row;
    }
    let last: Rational = (0..n - 1).map(|j| k[n - 1][j].clone()).sum();
    k[n - 1][n - 1] = -last;
    KinematicParams::new(masses, k)
}
