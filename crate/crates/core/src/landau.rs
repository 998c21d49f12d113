//! Critical points of homogeneous polynomials on the positive orthant,
//! simplex minimization, and exact rational witnesses of negativity.
//!
//! Floating point lives only here. Everything this module hands back as a
//! certificate is re-checked in exact arithmetic.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::SparsePoly;
use crate::rational::{convergents, format_rational, to_f64, RatText, Rational};

/// Settings for [`solve_critical`] and [`minimize_on_simplex`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub starts: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub dedup_radius: f64,
    pub grid_resolution: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            starts: 200,
            tolerance: 1e-12,
            max_iterations: 100,
            seed: 0x5eed,
            dedup_radius: 1e-6,
            grid_resolution: 40,
        }
    }
}

/// A positive solution of the critical equations on the chart `x_n = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalPoint {
    /// All `n` coordinates; the last one is 1.
    pub coords: Vec<f64>,
    pub residual: f64,
    pub value: f64,
    /// Critical for `f` restricted to the simplex rather than to the chart.
    pub on_simplex: bool,
}

impl CriticalPoint {
    /// The point rescaled onto the standard simplex.
    pub fn on_simplex_coords(&self) -> Vec<f64> {
        let total: f64 = self.coords.iter().sum();
        self.coords.iter().map(|x| x / total).collect()
    }
}

/// A strictly positive rational point with an exactly negative value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub point: Vec<Rational>,
    pub value: Rational,
    pub face_normal: Option<Vec<i64>>,
}

impl Witness {
    /// Evaluates `f`, or its restriction to the face with inner normal
    /// `face_normal`, at `point` and keeps the result only if it is negative.
    pub fn new(f: &SparsePoly, point: Vec<Rational>, face_normal: Option<Vec<i64>>) -> Result<Self> {
        if point.iter().any(|x| !x.is_positive()) {
            return Err(Error::InvalidInput("witness coordinates must be positive".into()));
        }
        let value = Self::target(f, face_normal.as_deref()).evaluate_exact(&point)?;
        if !value.is_negative() {
            return Err(Error::InvalidInput(format!("value {} is not negative", format_rational(&value))));
        }
        Ok(Witness { point, value, face_normal })
    }

    fn target(f: &SparsePoly, face_normal: Option<&[i64]>) -> SparsePoly {
        match face_normal {
            Some(w) if w.len() == f.num_vars() => f.restrict_to_face(w),
            Some(_) => SparsePoly::zero(f.num_vars()),
            None => f.clone(),
        }
    }

    /// Re-evaluates `f` (or its face restriction) and checks every stored claim.
    pub fn verify(&self, f: &SparsePoly) -> bool {
        self.point.iter().all(Signed::is_positive)
            && self.value.is_negative()
            && Self::target(f, self.face_normal.as_deref()).evaluate_exact(&self.point).is_ok_and(|v| v == self.value)
    }

    pub fn to_json(&self) -> WitnessJson {
        WitnessJson {
            kind: "witness".into(),
            point: self.point.iter().cloned().map(RatText).collect(),
            value: RatText(self.value.clone()),
            face_normal: self.face_normal.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub point: Vec<RatText>,
    pub value: RatText,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub face_normal: Option<Vec<i64>>,
}

impl WitnessJson {
    pub fn into_witness(self) -> Witness {
        Witness {
            point: self.point.into_iter().map(|q| q.0).collect(),
            value: self.value.0,
            face_normal: self.face_normal,
        }
    }
}

/// The partial derivatives `d f / d x_i`, `i < n`, with `x_n = 1`, as
/// polynomials in the first `n - 1` variables.
pub fn affine_landau_system(f: &SparsePoly) -> Result<Vec<SparsePoly>> {
    let n = f.num_vars();
    if n < 2 {
        return Err(Error::InvalidInput("the critical system needs at least two variables".into()));
    }
    let first: Vec<usize> = (0..n - 1).collect();
    (0..n - 1)
        .map(|i| {
            let d = f.partial_derivative(i)?.substitute_var(n - 1, &Rational::one());
            d.select_vars(&first)
        })
        .collect()
}

/// `f` flattened for fast floating-point evaluation with derivatives.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    n: usize,
    terms: Vec<(Vec<i32>, f64)>,
}

impl FloatPoly {
    pub fn new(f: &SparsePoly) -> Self {
        FloatPoly {
            n: f.num_vars(),
            terms: f
                .terms()
                .map(|(e, c)| (e.0.iter().map(|&a| a as i32).collect(), to_f64(c)))
                .collect(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&a, &xi)| xi.powi(a)).product::<f64>())
            .sum()
    }

    /// Gradient and Hessian in the first `k` variables, plus the sum of
    /// absolute gradient contributions (a scale for relative tolerances).
    fn derivatives(&self, x: &[f64], k: usize) -> (DVector<f64>, DMatrix<f64>, f64) {
        let mut g = DVector::zeros(k);
        let mut h = DMatrix::zeros(k, k);
        let mut scale = 0.0;
        for (e, c) in &self.terms {
            let mono: f64 = e.iter().zip(x).map(|(&a, &xi)| xi.powi(a)).product();
            for i in 0..k {
                if e[i] == 0 {
                    continue;
                }
                let gi = c * e[i] as f64 * mono / x[i];
                g[i] += gi;
                scale += gi.abs();
                for j in 0..k {
                    if e[j] == 0 || (i == j && e[i] < 2) {
                        continue;
                    }
                    let factor = if i == j { (e[i] - 1) as f64 } else { e[j] as f64 };
                    h[(i, j)] += gi * factor / x[j];
                }
            }
        }
        (g, h, scale)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.derivatives(x, self.n).0.iter().copied().collect()
    }
}

/// A square polynomial system in `k` variables with its Jacobian.
struct System {
    eqs: Vec<FloatPoly>,
    jac: Vec<Vec<FloatPoly>>,
}

impl System {
    fn new(eqs: &[SparsePoly]) -> Result<Self> {
        let jac = eqs
            .iter()
            .map(|g| (0..g.num_vars()).map(|j| g.partial_derivative(j).map(|d| FloatPoly::new(&d))).collect())
            .collect::<Result<_>>()?;
        Ok(System { eqs: eqs.iter().map(FloatPoly::new).collect(), jac })
    }

    /// Largest residual relative to the size of the terms producing it.
    fn residual(&self, x: &[f64]) -> f64 {
        self.eqs
            .iter()
            .map(|g| g.value(x).abs() / g.magnitude(x).max(1e-300))
            .fold(0.0, f64::max)
    }

    fn newton(&self, start: &[f64], cfg: &SolverConfig) -> Option<Vec<f64>> {
        let k = start.len();
        let mut x = start.to_vec();
        let mut r = self.residual(&x);
        for _ in 0..cfg.max_iterations {
            if r <= cfg.tolerance {
                return Some(x);
            }
            let g = DVector::from_iterator(k, self.eqs.iter().map(|e| -e.value(&x)));
            let j = DMatrix::from_fn(k, k, |a, b| self.jac[a][b].value(&x));
            let step = j.lu().solve(&g)?;
            let mut alpha = 1.0;
            loop {
                let trial: Vec<f64> = (0..k).map(|i| x[i] + alpha * step[i]).collect();
                if trial.iter().all(|&t| t > 0.0 && t.is_finite()) {
                    let rt = self.residual(&trial);
                    if rt < r {
                        x = trial;
                        r = rt;
                        break;
                    }
                }
                alpha *= 0.5;
                if alpha < 1e-10 {
                    return None;
                }
            }
        }
        (r <= cfg.tolerance * 1e3).then_some(x)
    }
}

impl FloatPoly {
    /// Sum of absolute term values.
    fn magnitude(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| (c * e.iter().zip(x).map(|(&a, &xi)| xi.powi(a)).product::<f64>()).abs())
            .sum()
    }
}

/// Critical equations of `f / (x_1 + ... + x_n)^d` on the chart `x_n = 1`;
/// their positive solutions are the relative-interior critical points of
/// `f` on the simplex.
pub fn simplex_landau_system(f: &SparsePoly) -> Result<Vec<SparsePoly>> {
    let n = f.num_vars();
    if n < 2 {
        return Err(Error::InvalidInput("the critical system needs at least two variables".into()));
    }
    let d = f.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    let total = SparsePoly::simplex_form(n);
    let df = f.scale(&Rational::from_integer(d.into()));
    let first: Vec<usize> = (0..n - 1).collect();
    (0..n - 1)
        .map(|i| {
            let g = total.mul(&f.partial_derivative(i)?)?.sub(&df)?;
            g.substitute_var(n - 1, &Rational::one()).select_vars(&first)
        })
        .collect()
}

fn start_points(k: usize, cfg: &SolverConfig) -> Vec<Vec<f64>> {
    let mut starts = vec![vec![1.0; k]];
    for &t in &[0.1, 0.3, 3.0, 10.0] {
        starts.push(vec![t; k]);
    }
    for i in 0..k {
        for &t in &[0.1, 10.0] {
            let mut s = vec![1.0; k];
            s[i] = t;
            starts.push(s);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while starts.len() < cfg.starts.max(1) {
        starts.push((0..k).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect());
    }
    starts.truncate(cfg.starts.max(1));
    starts
}

fn solve_system(fp: &FloatPoly, eqs: &[SparsePoly], on_simplex: bool, cfg: &SolverConfig) -> Result<Vec<CriticalPoint>> {
    let system = System::new(eqs)?;
    let found: Vec<Option<Vec<f64>>> = start_points(eqs.len(), cfg)
        .par_iter()
        .map(|s| system.newton(s, cfg))
        .collect();
    let mut out: Vec<CriticalPoint> = Vec::new();
    for mut x in found.into_iter().flatten() {
        let residual = system.residual(&x);
        x.push(1.0);
        let duplicate = out.iter().any(|q| {
            q.on_simplex == on_simplex
                && x.iter()
                    .zip(&q.coords)
                    .all(|(a, b)| (a - b).abs() <= cfg.dedup_radius * (1.0 + a.abs().max(b.abs())))
        });
        if !duplicate {
            out.push(CriticalPoint { value: fp.value(&x), coords: x, residual, on_simplex });
        }
    }
    Ok(out)
}

/// Positive critical points of `f`, by damped Newton iteration from many
/// starts. Returns the solutions of [`affine_landau_system`] followed by
/// those of [`simplex_landau_system`]. Completeness is not guaranteed.
pub fn solve_critical(f: &SparsePoly, cfg: &SolverConfig) -> Result<Vec<CriticalPoint>> {
    let fp = FloatPoly::new(f);
    let mut out = solve_system(&fp, &affine_landau_system(f)?, false, cfg)?;
    if f.is_homogeneous() {
        out.extend(solve_system(&fp, &simplex_landau_system(f)?, true, cfg)?);
    }
    Ok(out)
}

/// Compositions of `total` into `parts` parts, visited in lexicographic order.
fn for_each_grid_point(total: u32, parts: usize, head: u32, visit: &mut impl FnMut(&[u32])) {
    let mut c = vec![0u32; parts];
    c[0] = head;
    fn rec(c: &mut Vec<u32>, pos: usize, left: u32, visit: &mut impl FnMut(&[u32])) {
        if pos == c.len() - 1 {
            c[pos] = left;
            visit(c);
            return;
        }
        for v in (0..=left).rev() {
            c[pos] = v;
            rec(c, pos + 1, left - v, visit);
        }
    }
    if parts == 1 {
        if head == total {
            visit(&c);
        }
        return;
    }
    rec(&mut c, 1, total - head, visit);
}

/// Minimum of a homogeneous `f` over the standard simplex: the best point of
/// the grid with spacing `1/resolution`, refined by local search.
pub fn minimize_on_simplex(f: &SparsePoly, resolution: u32) -> Result<(f64, Vec<f64>)> {
    let n = f.num_vars();
    if resolution < 2 {
        return Err(Error::InvalidInput("grid resolution must be at least 2".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("no variables".into()));
    }
    let fp = FloatPoly::new(f);
    let r = resolution as f64;
    let best_per_head: Vec<(f64, Vec<u32>)> = (0..=resolution)
        .into_par_iter()
        .map(|h| {
            let mut best = (f64::INFINITY, Vec::new());
            for_each_grid_point(resolution, n, h, &mut |c| {
                let x: Vec<f64> = c.iter().map(|&a| a as f64 / r).collect();
                let v = fp.value(&x);
                if v < best.0 {
                    best = (v, c.to_vec());
                }
            });
            best
        })
        .collect();
    let (_, grid_best) = best_per_head
        .into_iter()
        .fold((f64::INFINITY, Vec::new()), |acc, b| if b.0 < acc.0 { b } else { acc });
    let start: Vec<f64> = grid_best.iter().map(|&a| a as f64 / r).collect();
    let x = refine_on_simplex(&fp, start, 1.0 / r);
    Ok((fp.value(&x), x))
}

/// Pattern search over moves `e_i - e_j`, then Newton steps on the face
/// spanned by the positive coordinates.
fn refine_on_simplex(fp: &FloatPoly, mut x: Vec<f64>, mut h: f64) -> Vec<f64> {
    let n = x.len();
    let mut v = fp.value(&x);
    while h > 1e-13 {
        let mut improved = false;
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let step = h.min(x[j]);
                if step <= 0.0 {
                    continue;
                }
                let mut y = x.clone();
                y[i] += step;
                y[j] -= step;
                let vy = fp.value(&y);
                if vy < v {
                    x = y;
                    v = vy;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    for _ in 0..20 {
        let active: Vec<usize> = (0..n).filter(|&i| x[i] > 1e-12).collect();
        let k = active.len();
        if k < 2 {
            break;
        }
        let (g, hess, _) = fp.derivatives(&x, n);
        let mut kkt = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        for (a, &i) in active.iter().enumerate() {
            for (b, &j) in active.iter().enumerate() {
                kkt[(a, b)] = hess[(i, j)];
            }
            kkt[(a, k)] = 1.0;
            kkt[(k, a)] = 1.0;
            rhs[a] = -g[i];
        }
        let Some(step) = kkt.lu().solve(&rhs) else { break };
        let mut y = x.clone();
        for (a, &i) in active.iter().enumerate() {
            y[i] += step[a];
        }
        if y.iter().any(|&t| t < 0.0) {
            break;
        }
        let vy = fp.value(&y);
        if vy > v + 1e-15 * v.abs().max(1.0) {
            break;
        }
        let moved = step.iter().take(k).map(|s| s.abs()).fold(0.0, f64::max);
        x = y;
        v = vy;
        if moved < 1e-15 {
            break;
        }
    }
    x
}

/// Rounds `approx` to nearby rationals, simplest first, and returns the
/// first rounding at which `f` is exactly negative.
pub fn exact_negative_witness(f: &SparsePoly, approx: &[f64]) -> Option<Witness> {
    if approx.len() != f.num_vars() || approx.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return None;
    }
    let top = approx.iter().copied().fold(0.0, f64::max);
    let scaled: Vec<f64> = approx.iter().map(|x| x / top).collect();
    let anchor = approx.iter().position(|&x| x == top).unwrap_or(0);
    let ladders: Vec<Vec<Rational>> = approx.iter().map(|&x| convergents(x, 1_000_000_000)).collect();
    let ladders_scaled: Vec<Vec<Rational>> = scaled.iter().map(|&x| convergents(x, 1_000_000_000)).collect();
    for tol in [1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2] {
        for (values, ladder) in [(approx, &ladders), (&scaled[..], &ladders_scaled)] {
            let point: Option<Vec<Rational>> = values
                .iter()
                .zip(ladder.iter())
                .enumerate()
                .map(|(i, (&x, lad))| {
                    if std::ptr::eq(values, &scaled[..]) && i == anchor {
                        return Some(Rational::one());
                    }
                    lad.iter()
                        .find(|q| (to_f64(q) - x).abs() <= tol * x.abs().max(1e-300) && q.is_positive())
                        .cloned()
                })
                .collect();
            if let Some(p) = point {
                if let Ok(w) = Witness::new(f, p, None) {
                    return Some(w);
                }
            }
        }
    }
    dyadic_witness(f, approx)
}

fn dyadic_witness(f: &SparsePoly, approx: &[f64]) -> Option<Witness> {
    for bits in [10u32, 20, 30, 40, 50] {
        let denom = Rational::from_integer(num_bigint::BigInt::one() << bits);
        let point: Vec<Rational> = approx
            .iter()
            .map(|&x| {
                let k = (x * 2f64.powi(bits as i32)).round().max(1.0);
                Rational::from_float(k).unwrap_or_else(Rational::one) / &denom
            })
            .collect();
        if let Ok(w) = Witness::new(f, point, None) {
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn bubble(s: Rational) -> SparsePoly {
        SparsePoly::from_terms(2, [(vec![2, 0], int(1)), (vec![1, 1], int(2) - s), (vec![0, 2], int(1))]).unwrap()
    }

    #[test]
    fn bubble_landau_system() {
        let sys = affine_landau_system(&bubble(int(3))).unwrap();
        assert_eq!(sys.len(), 1);
        assert_eq!(sys[0].to_string(), "2*x1 - 1");
        assert!(affine_landau_system(&SparsePoly::var(1, 0)).is_err());
        let linear = SparsePoly::from_terms(3, [(vec![1, 0, 0], int(2)), (vec![0, 1, 0], int(3))]).unwrap();
        let sys = affine_landau_system(&linear).unwrap();
        assert_eq!(sys[0], SparsePoly::constant(2, int(2)));
        assert_eq!(sys[1], SparsePoly::constant(2, int(3)));
    }

    #[test]
    fn bubble_critical_point() {
        let pts = solve_critical(&bubble(int(3)), &SolverConfig::default()).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(!pts[0].on_simplex);
        assert!((pts[0].coords[0] - 0.5).abs() < 1e-12);
        assert!((pts[0].value - 0.75).abs() < 1e-12);
        assert!(pts[1].on_simplex);
        assert!((pts[1].coords[0] - 1.0).abs() < 1e-12);
        assert_eq!(pts[1].on_simplex_coords(), vec![0.5, 0.5]);
    }

    #[test]
    fn positive_polynomial_has_no_negative_critical_value() {
        let f = SparsePoly::from_terms(3, [(vec![2, 0, 0], int(1)), (vec![0, 1, 1], int(3)), (vec![0, 0, 2], int(2))]).unwrap();
        let pts = solve_critical(&f, &SolverConfig::default()).unwrap();
        assert!(pts.iter().all(|p| p.value >= 0.0));
    }

    #[test]
    fn simplex_minimum_of_small_bubble() {
        let eps = 0.1;
        let f = bubble(rat(39, 10));
        let (v, x) = minimize_on_simplex(&f, 40).unwrap();
        assert!(v > 0.0 && v < eps);
        assert!((v - 0.025).abs() < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-9);
        assert!(minimize_on_simplex(&f, 1).is_err());
    }

    #[test]
    fn rounding_finds_simple_witnesses() {
        let face = SparsePoly::from_terms(2, [(vec![2, 0], int(5)), (vec![1, 1], int(-12)), (vec![0, 2], int(5))]).unwrap();
        let w = exact_negative_witness(&face, &[1.2, 1.0]).unwrap();
        assert_eq!(w.point, vec![rat(6, 5), int(1)]);
        assert_eq!(w.value, rat(-11, 5));
        let edge = bubble(rat(41, 10));
        let w = exact_negative_witness(&edge, &[1.05, 1.0]).unwrap();
        assert_eq!(w.point, vec![rat(21, 20), int(1)]);
        assert_eq!(w.value, rat(-41, 400));
        assert!(exact_negative_witness(&bubble(int(1)), &[1.0, 1.0]).is_none());
    }

    #[test]
    fn witness_invariants() {
        let f = bubble(int(5));
        assert!(Witness::new(&f, vec![int(1), int(1)], None).is_ok());
        assert!(Witness::new(&f, vec![int(0), int(1)], None).is_err());
        assert!(Witness::new(&f, vec![int(10), int(1)], None).is_err());
        let mut w = Witness::new(&f, vec![int(1), int(1)], None).unwrap();
        assert!(w.verify(&f));
        w.value = int(-2);
        assert!(!w.verify(&f));
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let f = SparsePoly::from_terms(3, [
            (vec![2, 1, 0], rat(3, 2)),
            (vec![0, 1, 2], int(-4)),
            (vec![1, 1, 1], int(7)),
            (vec![3, 0, 0], int(1)),
        ])
        .unwrap();
        let fp = FloatPoly::new(&f);
        let x = [0.7, 1.3, 0.4];
        let (g, h, _) = fp.derivatives(&x, 3);
        let eps = 1e-6;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += eps;
            xm[i] -= eps;
            let num = (fp.value(&xp) - fp.value(&xm)) / (2.0 * eps);
            assert!((num - g[i]).abs() < 1e-6 * (1.0 + g[i].abs()));
            let (gp, _, _) = fp.derivatives(&xp, 3);
            let (gm, _, _) = fp.derivatives(&xm, 3);
            for j in 0..3 {
                let num = (gp[j] - gm[j]) / (2.0 * eps);
                assert!((num - h[(j, i)]).abs() < 1e-5 * (1.0 + h[(j, i)].abs()));
            }
        }
    }
}
