//! Pólya certificates: the smallest `N` for which `(x_1 + ... + x_n)^N f`
//! has no negative coefficient.
//!
//! The coefficient of `x^c` in `(sum x)^N f` equals
//! `N! / prod c_i! * sum_a f_a prod_i c_i (c_i - 1) ... (c_i - a_i + 1)`,
//! so its sign is the sign of the falling-factorial sum, which is cheap to
//! evaluate point by point. [`expand`] multiplies out the product directly
//! and serves as the independent check.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Mono, SparsePoly};
use crate::polytope::{convex_hull, Facet};
use crate::rational::{RatText, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PolyaMode {
    /// No coefficient is negative.
    #[default]
    Nonneg,
    /// Additionally, every lattice point of `Newt(f) + N simplex` carries a positive coefficient.
    Strict,
}

impl fmt::Display for PolyaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolyaMode::Nonneg => "nonneg",
            PolyaMode::Strict => "strict",
        })
    }
}

impl FromStr for PolyaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonneg" => Ok(PolyaMode::Nonneg),
            "strict" => Ok(PolyaMode::Strict),
            other => Err(Error::Parse(format!("unknown Pólya mode {other:?}"))),
        }
    }
}

/// Result of checking a single exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyaCheck {
    pub passed: bool,
    /// First offending monomial in graded-lex order and its exact coefficient.
    pub witness: Option<(Vec<u32>, Rational)>,
    /// Number of nonzero coefficients; only counted when the check passes.
    pub terms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyaCertificate {
    #[serde(rename = "N")]
    pub n: u32,
    pub mode: PolyaMode,
    pub terms: u64,
    pub fingerprint: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryEntry {
    #[serde(rename = "N")]
    pub n: u32,
    pub exp: Vec<u32>,
    pub coefficient: RatText,
}

/// Diagnostics when no exponent up to the cap works: one offending
/// coefficient per exponent tried.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapReport {
    pub cap: u32,
    pub mode: PolyaMode,
    pub trajectory: Vec<TrajectoryEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolyaOutcome {
    Certified(PolyaCertificate),
    CapExceeded(CapReport),
}

/// `f` with integer coefficients after clearing denominators.
struct Scaled {
    exps: Vec<Vec<u32>>,
    big: Vec<BigInt>,
    small: Option<Vec<i128>>,
    num_vars: usize,
    degree: u32,
    max_exp: u32,
    /// Facets of `Newt(f) + simplex`, with `h_P` and `h_simplex` per facet.
    region: Option<Vec<(Facet, i128, i128)>>,
}

impl Scaled {
    fn new(f: &SparsePoly, mode: PolyaMode) -> Result<Self> {
        let degree = f.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
        let l = f.terms().fold(BigInt::one(), |acc, (_, c)| acc.lcm(c.denom()));
        let exps: Vec<Vec<u32>> = f.terms().map(|(e, _)| e.0.clone()).collect();
        let big: Vec<BigInt> = f
            .terms()
            .map(|(_, c)| (c * Rational::from_integer(l.clone())).to_integer())
            .collect();
        let small = big.iter().map(|b| b.to_i64().map(i128::from)).collect();
        let max_exp = exps.iter().flatten().copied().max().unwrap_or(0);
        let region = match mode {
            PolyaMode::Nonneg => None,
            PolyaMode::Strict => Some(strict_region(&exps, f.num_vars())?),
        };
        Ok(Scaled { exps, big, small, num_vars: f.num_vars(), degree, max_exp, region })
    }

    /// Sign-carrying value `sum_a f_a prod_i ff(c_i, a_i)` at `c`.
    fn value(&self, c: &[u32], ff: &FallingTable) -> BigInt {
        if let Some(small) = &self.small {
            if let Some(v) = self.value_small(c, small, ff) {
                return BigInt::from(v);
            }
        }
        let mut total = BigInt::zero();
        for (e, coef) in self.exps.iter().zip(&self.big) {
            let mut t = coef.clone();
            for (&ci, &ai) in c.iter().zip(e) {
                if ai > 0 {
                    t *= ff.get_big(ai, ci);
                    if t.is_zero() {
                        break;
                    }
                }
            }
            total += t;
        }
        total
    }

    fn value_small(&self, c: &[u32], small: &[i128], ff: &FallingTable) -> Option<i128> {
        let mut total: i128 = 0;
        'terms: for (e, &coef) in self.exps.iter().zip(small) {
            let mut t = coef;
            for (&ci, &ai) in c.iter().zip(e) {
                if ai > 0 {
                    let f = ff.get(ai, ci)?;
                    if f == 0 {
                        continue 'terms;
                    }
                    t = t.checked_mul(f)?;
                }
            }
            total = total.checked_add(t)?;
        }
        Some(total)
    }

    fn in_region(&self, c: &[u32], n: u32) -> bool {
        match &self.region {
            None => true,
            Some(facets) => facets.iter().all(|(f, hp, hd)| {
                let lhs: i128 = f.normal.iter().zip(c).map(|(&w, &x)| w as i128 * x as i128).sum();
                lhs >= hp + n as i128 * hd
            }),
        }
    }

    /// Whether the coefficient at `c` violates the mode predicate.
    fn offends(&self, c: &[u32], n: u32, ff: &FallingTable) -> Option<BigInt> {
        let v = self.value(c, ff);
        let bad = v.is_negative() || (self.region.is_some() && v.is_zero() && self.in_region(c, n));
        bad.then_some(v)
    }
}

fn strict_region(exps: &[Vec<u32>], n: usize) -> Result<Vec<(Facet, i128, i128)>> {
    let shifted: Vec<Vec<i64>> = exps
        .iter()
        .flat_map(|e| {
            (0..n).map(move |i| {
                let mut p: Vec<i64> = e.iter().map(|&a| a as i64).collect();
                p[i] += 1;
                p
            })
        })
        .collect();
    let hull = convex_hull(&shifted)?;
    Ok(hull
        .facets()
        .iter()
        .map(|f| {
            let hp = exps
                .iter()
                .map(|e| f.normal.iter().zip(e).map(|(&w, &a)| w as i128 * a as i128).sum::<i128>())
                .min()
                .unwrap_or(0);
            let hd = f.normal.iter().copied().min().unwrap_or(0) as i128;
            (f.clone(), hp, hd)
        })
        .collect())
}

/// Table of falling factorials `c (c-1) ... (c-a+1)`. Entries that overflow
/// `i128` are left out and recomputed with big integers.
struct FallingTable {
    rows: Vec<Vec<Option<i128>>>,
}

impl FallingTable {
    fn new(max_a: u32, max_c: u32) -> Self {
        let rows = (0..=max_a)
            .map(|a| {
                (0..=max_c)
                    .map(|c| {
                        if a > c {
                            Some(0)
                        } else {
                            (0..a).try_fold(1i128, |acc, k| acc.checked_mul((c - k) as i128))
                        }
                    })
                    .collect()
            })
            .collect();
        FallingTable { rows }
    }

    fn get(&self, a: u32, c: u32) -> Option<i128> {
        self.rows[a as usize][c as usize]
    }

    fn get_big(&self, a: u32, c: u32) -> BigInt {
        match self.get(a, c) {
            Some(v) => BigInt::from(v),
            None => (0..a).fold(BigInt::one(), |acc, k| acc * BigInt::from(c - k)),
        }
    }
}

/// Compositions of `total` into `parts` nonnegative parts with a fixed first
/// part, in decreasing lexicographic order.
fn compositions_with_head(head: u32, total: u32, parts: usize, mut visit: impl FnMut(&[u32]) -> bool) -> bool {
    let mut c = vec![0u32; parts];
    c[0] = head;
    if parts == 1 {
        return if head == total { visit(&c) } else { true };
    }
    let rest = total - head;
    // Start at (head, rest, 0, ..., 0) and step to the lexicographically next smaller tuple.
    c[1] = rest;
    loop {
        if !visit(&c) {
            return false;
        }
        // Find the rightmost position k in 1..parts-1 with c[k] > 0.
        let Some(k) = (1..parts - 1).rev().find(|&k| c[k] > 0) else { return true };
        let tail: u32 = c[k + 1..].iter().sum();
        c[k] -= 1;
        for x in c[k + 1..].iter_mut() {
            *x = 0;
        }
        c[k + 1] = tail + 1;
    }
}

fn total_for(scaled: &Scaled, n: u32) -> u32 {
    n + scaled.degree
}

fn exact_coefficient(f: &SparsePoly, c: &[u32], n: u32) -> Rational {
    // multinomial(N; c - a) summed against f
    let mut total = Rational::zero();
    for (e, coef) in f.terms() {
        if e.0.iter().zip(c).any(|(&a, &ci)| a > ci) {
            continue;
        }
        let mut m = factorial(n);
        for (&a, &ci) in e.0.iter().zip(c) {
            m /= factorial(ci - a);
        }
        total += coef * Rational::from_integer(m);
    }
    total
}

fn factorial(k: u32) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn scan(scaled: &Scaled, n: u32, ff: &FallingTable, count_terms: bool) -> (Option<Vec<u32>>, u64) {
    let total = total_for(scaled, n);
    let heads: Vec<u32> = (0..=total).rev().collect();
    let results: Vec<(Option<Vec<u32>>, u64)> = heads
        .par_iter()
        .map(|&h| {
            let mut found = None;
            let mut count = 0u64;
            compositions_with_head(h, total, scaled.num_vars, |c| {
                if let Some(_v) = scaled.offends(c, n, ff) {
                    found = Some(c.to_vec());
                    return false;
                }
                if count_terms && !scaled.value(c, ff).is_zero() {
                    count += 1;
                }
                true
            });
            (found, count)
        })
        .collect();
    let mut count = 0;
    for (found, c) in results {
        if found.is_some() {
            return (found, 0);
        }
        count += c;
    }
    (None, count)
}

/// Checks whether `(x_1 + ... + x_n)^N f` satisfies `mode`.
pub fn check_polya(f: &SparsePoly, n: u32, mode: PolyaMode) -> Result<PolyaCheck> {
    if f.is_zero() {
        return Ok(PolyaCheck { passed: true, witness: None, terms: 0 });
    }
    let scaled = Scaled::new(f, mode)?;
    let ff = FallingTable::new(scaled.max_exp, total_for(&scaled, n));
    Ok(check_scaled(f, &scaled, n, &ff))
}

fn check_scaled(f: &SparsePoly, scaled: &Scaled, n: u32, ff: &FallingTable) -> PolyaCheck {
    let (found, terms) = scan(scaled, n, ff, true);
    match found {
        Some(c) => {
            let coef = exact_coefficient(f, &c, n);
            PolyaCheck { passed: false, witness: Some((c, coef)), terms: 0 }
        }
        None => PolyaCheck { passed: true, witness: None, terms },
    }
}

/// Points near `prev` rescaled to total degree `total`, nearest first.
fn nearby_candidates(prev: &[u32], prev_total: u32, total: u32) -> Vec<Vec<u32>> {
    let n = prev.len();
    let scale = total as f64 / prev_total.max(1) as f64;
    let mut base: Vec<u32> = prev.iter().map(|&x| (x as f64 * scale).floor() as u32).collect();
    let mut deficit = total - base.iter().sum::<u32>().min(total);
    // Hand out the rounding deficit to the largest fractional parts.
    let mut fracs: Vec<(usize, f64)> = prev.iter().enumerate().map(|(i, &x)| (i, x as f64 * scale - base[i] as f64)).collect();
    fracs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (i, _) in fracs.iter().cycle().take(n * 2) {
        if deficit == 0 {
            break;
        }
        base[*i] += 1;
        deficit -= 1;
    }
    if base.iter().sum::<u32>() != total {
        return Vec::new();
    }
    let mut out = vec![base.clone()];
    for i in 0..n {
        for j in 0..n {
            if i != j && base[i] > 0 {
                let mut c = base.clone();
                c[i] -= 1;
                c[j] += 1;
                out.push(c);
            }
        }
    }
    out
}

/// Smallest `N <= cap` passing [`check_polya`] in `mode`.
pub fn find_polya_exponent(f: &SparsePoly, mode: PolyaMode, cap: u32) -> Result<PolyaOutcome> {
    let fingerprint = f.fingerprint();
    if f.is_zero() {
        return Ok(PolyaOutcome::Certified(PolyaCertificate { n: 0, mode, terms: 0, fingerprint }));
    }
    let scaled = Scaled::new(f, mode)?;
    let ff = FallingTable::new(scaled.max_exp, total_for(&scaled, cap));
    let mut trajectory = Vec::new();
    let mut last_bad: Option<(Vec<u32>, u32)> = None;
    for n in 0..=cap {
        let total = total_for(&scaled, n);
        let quick = last_bad.as_ref().and_then(|(c, t)| {
            nearby_candidates(c, *t, total)
                .into_iter()
                .find(|cand| scaled.offends(cand, n, &ff).is_some())
        });
        let bad = match quick {
            Some(c) => Some(c),
            None => {
                let check = check_scaled(f, &scaled, n, &ff);
                if check.passed {
                    return Ok(PolyaOutcome::Certified(PolyaCertificate { n, mode, terms: check.terms, fingerprint }));
                }
                check.witness.map(|(c, _)| c)
            }
        };
        let c = bad.expect("a failing check carries a witness");
        trajectory.push(TrajectoryEntry { n, exp: c.clone(), coefficient: RatText(exact_coefficient(f, &c, n)) });
        last_bad = Some((c, total));
    }
    Ok(PolyaOutcome::CapExceeded(CapReport { cap, mode, trajectory }))
}

/// `(x_1 + ... + x_n)^N f` by repeated multiplication with the linear form.
pub fn expand(f: &SparsePoly, n: u32) -> SparsePoly {
    let nv = f.num_vars();
    let mut cur = f.clone();
    for _ in 0..n {
        let mut next = SparsePoly::zero(nv);
        for (e, c) in cur.terms() {
            for i in 0..nv {
                let mut d = e.0.clone();
                d[i] += 1;
                next.add_term(Mono(d), c.clone());
            }
        }
        cur = next;
    }
    cur
}

/// Checks the mode predicate on an explicit expansion.
pub fn expansion_satisfies(f: &SparsePoly, n: u32, mode: PolyaMode) -> Result<bool> {
    let product = expand(f, n);
    if product.terms().any(|(_, c)| c.is_negative()) {
        return Ok(false);
    }
    if mode == PolyaMode::Strict {
        let scaled = Scaled::new(f, mode)?;
        let total = total_for(&scaled, n);
        let mut ok = true;
        for h in 0..=total {
            compositions_with_head(h, total, f.num_vars(), |c| {
                if scaled.in_region(c, n) && product.coefficient(c).is_zero() {
                    ok = false;
                }
                ok
            });
        }
        return Ok(ok);
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn bubble(eps: Rational) -> SparsePoly {
        SparsePoly::from_terms(2, [
            (vec![2, 0], int(1)),
            (vec![1, 1], eps - int(2)),
            (vec![0, 2], int(1)),
        ])
        .unwrap()
    }

    #[test]
    fn compositions_enumerate_everything_once() {
        let mut seen = Vec::new();
        for h in (0..=4).rev() {
            compositions_with_head(h, 4, 3, |c| {
                seen.push(c.to_vec());
                true
            });
        }
        assert_eq!(seen.len(), 15);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 15);
        assert_eq!(seen[0], vec![4, 0, 0]);
        assert_eq!(seen[1], vec![3, 1, 0]);
    }

    #[test]
    fn bubble_at_one() {
        let f = bubble(int(1));
        let one = check_polya(&f, 1, PolyaMode::Nonneg).unwrap();
        assert!(one.passed);
        assert_eq!(one.terms, 2);
        let zero = check_polya(&f, 0, PolyaMode::Nonneg).unwrap();
        assert!(!zero.passed);
        assert_eq!(zero.witness, Some((vec![1, 1], int(-1))));
    }

    #[test]
    fn bubble_exponents() {
        for (eps, expected) in [(int(1), 1), (rat(1, 2), 5), (rat(1, 4), 13)] {
            match find_polya_exponent(&bubble(eps), PolyaMode::Nonneg, 100).unwrap() {
                PolyaOutcome::Certified(c) => assert_eq!(c.n, expected),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn expansion_agrees_with_the_sign_rule() {
        let f = bubble(rat(1, 3));
        for n in 0..12 {
            for mode in [PolyaMode::Nonneg, PolyaMode::Strict] {
                let fast = check_polya(&f, n, mode).unwrap().passed;
                assert_eq!(fast, expansion_satisfies(&f, n, mode).unwrap(), "N={n} {mode}");
            }
            if let Some((c, coef)) = check_polya(&f, n, PolyaMode::Nonneg).unwrap().witness {
                assert_eq!(expand(&f, n).coefficient(&c), coef);
            }
        }
    }

    #[test]
    fn quintic_never_certifies() {
        let f = SparsePoly::from_terms(3, [
            (vec![3, 1, 1], int(1)),
            (vec![2, 2, 1], int(-1)),
            (vec![1, 3, 1], int(1)),
            (vec![0, 5, 0], int(1)),
        ])
        .unwrap();
        match find_polya_exponent(&f, PolyaMode::Nonneg, 50).unwrap() {
            PolyaOutcome::CapExceeded(r) => {
                assert_eq!(r.trajectory.len(), 51);
                assert!(r.trajectory.iter().all(|t| t.coefficient.0.is_negative()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_homogeneous_rejected() {
        let f = SparsePoly::from_terms(2, [(vec![1, 0], int(1)), (vec![0, 0], int(1))]).unwrap();
        assert_eq!(check_polya(&f, 0, PolyaMode::Nonneg), Err(Error::NotHomogeneous));
    }

    #[test]
    fn mode_text() {
        assert_eq!("strict".parse::<PolyaMode>().unwrap(), PolyaMode::Strict);
        assert!("loose".parse::<PolyaMode>().is_err());
        assert_eq!(PolyaMode::Nonneg.to_string(), "nonneg");
    }
}
