//! Exact lattice polytopes: convex hulls by double description, face
//! lattices, Minkowski sums, minimal sets and the containment test for
//! convergence domains.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Point = Vec<i64>;

/// Inequality `<normal, x> >= offset`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePolytope {
    ambient_dim: usize,
    dim: usize,
    vertices: Vec<Point>,
    facets: Vec<Facet>,
    /// Equations `<a, x> = c` cutting out the affine hull.
    equations: Vec<(Vec<i64>, i64)>,
}

/// A face of a polytope, recorded by the support points it contains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub normal: Vec<i64>,
    pub points: Vec<Point>,
    pub dim: usize,
}

pub fn to_points(support: impl IntoIterator<Item = impl AsRef<[u32]>>) -> Vec<Point> {
    support
        .into_iter()
        .map(|e| e.as_ref().iter().map(|&a| a as i64).collect())
        .collect()
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or_else(|| Error::Resource("integer coefficient exceeds 64 bits".into()))
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Reduced row echelon form over the rationals; returns the pivot columns.
fn rref(rows: &mut Vec<Vec<Rational>>) -> Vec<usize> {
    let cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for k in c..cols {
                    let sub = &f * &rows[r][k];
                    rows[i][k] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

fn primitive(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        v
    } else {
        v.into_iter().map(|x| x / &g).collect()
    }
}

fn clear_denominators(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    primitive(v.iter().map(|q| (q * Rational::from_integer(l.clone())).to_integer()).collect())
}

struct AffineFrame {
    origin: Point,
    pivots: Vec<usize>,
    equations: Vec<(Vec<i64>, i64)>,
}

fn affine_frame(points: &[Point]) -> Result<AffineFrame> {
    let origin = points[0].clone();
    let n = origin.len();
    let mut rows: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(&origin).map(|(a, b)| Rational::from_integer(BigInt::from(a - b))).collect())
        .filter(|r: &Vec<Rational>| r.iter().any(|x| !x.is_zero()))
        .collect();
    let pivots = if rows.is_empty() { Vec::new() } else { rref(&mut rows) };
    let mut equations = Vec::new();
    for free in (0..n).filter(|c| !pivots.contains(c)) {
        let mut a = vec![Rational::zero(); n];
        a[free] = Rational::one();
        for (r, &pc) in pivots.iter().enumerate() {
            a[pc] = -rows[r][free].clone();
        }
        let ints: Vec<i64> = clear_denominators(&a).iter().map(to_i64).collect::<Result<_>>()?;
        let c = dot(&ints, &origin) as i64;
        equations.push((ints, c));
    }
    Ok(AffineFrame { origin, pivots, equations })
}

struct Ray {
    v: Vec<BigInt>,
    zero: FixedBitSet,
}

fn eval(h: &[BigInt], r: &[BigInt]) -> BigInt {
    h.iter().zip(r).map(|(a, b)| a * b).sum()
}

/// Extreme rays of `{a : <row, a> >= 0 for all rows}` for full-rank `rows`.
fn double_description(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let m = rows.len();
    let d = rows[0].len();
    let mut basis: Vec<usize> = Vec::new();
    let mut echelon: Vec<Vec<Rational>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut trial = echelon.clone();
        trial.push(row.iter().map(|x| Rational::from_integer(x.clone())).collect());
        if rref(&mut trial).len() > echelon.len() {
            echelon = trial;
            basis.push(i);
            if basis.len() == d {
                break;
            }
        }
    }
    assert_eq!(basis.len(), d, "rows must span the space");

    // Columns of the inverse of the basis matrix are the initial rays.
    let mut aug: Vec<Vec<Rational>> = basis
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let mut r: Vec<Rational> = rows[i].iter().map(|x| Rational::from_integer(x.clone())).collect();
            r.extend((0..d).map(|j| if j == k { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    rref(&mut aug);
    let mut rays: Vec<Ray> = (0..d)
        .map(|j| {
            let col: Vec<Rational> = (0..d).map(|i| aug[i][d + j].clone()).collect();
            let mut zero = FixedBitSet::with_capacity(m);
            for (k, &i) in basis.iter().enumerate() {
                if k != j {
                    zero.insert(i);
                }
            }
            Ray { v: clear_denominators(&col), zero }
        })
        .collect();

    let in_basis: HashSet<usize> = basis.iter().copied().collect();
    for (h_idx, h) in rows.iter().enumerate() {
        if in_basis.contains(&h_idx) {
            continue;
        }
        let values: Vec<BigInt> = rays.iter().map(|r| eval(h, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_negative()).collect();
        let mut fresh = Vec::new();
        for &p in &pos {
            for &q in &neg {
                let mut common = rays[p].zero.clone();
                common.intersect_with(&rays[q].zero);
                if common.count_ones(..) + 2 < d {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .all(|r| r == p || r == q || !common.is_subset(&rays[r].zero));
                if !adjacent {
                    continue;
                }
                let v: Vec<BigInt> = rays[q]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(a, b)| &values[p] * a - &values[q] * b)
                    .collect();
                common.insert(h_idx);
                fresh.push(Ray { v: primitive(v), zero: common });
            }
        }
        let mut kept: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (i, mut r) in rays.into_iter().enumerate() {
            if values[i].is_zero() {
                r.zero.insert(h_idx);
                kept.push(r);
            } else if values[i].is_positive() {
                kept.push(r);
            }
        }
        kept.extend(fresh);
        rays = kept;
    }
    rays.into_iter().map(|r| r.v).collect()
}

/// Chooses a canonical representative of an inner normal: shifted by the
/// all-ones vector when the points lie on a hyperplane `sum x = const`, so
/// that its smallest entry is 0, then divided by the gcd of its entries.
fn canonical_normal(normal: &[i64], homogeneous: bool) -> Vec<i64> {
    let shift = if homogeneous { *normal.iter().min().unwrap_or(&0) } else { 0 };
    let v: Vec<i64> = normal.iter().map(|x| x - shift).collect();
    let g = v.iter().fold(0i64, |acc, &x| acc.gcd(&x));
    if g > 1 {
        v.into_iter().map(|x| x / g).collect()
    } else {
        v
    }
}

fn is_homogeneous(points: &[Point]) -> bool {
    let mut sums = points.iter().map(|p| p.iter().sum::<i64>());
    let first = sums.next();
    sums.all(|s| Some(s) == first)
}

fn affine_rank(points: &[&Point]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let mut rows: Vec<Vec<Rational>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(points[0]).map(|(a, b)| Rational::from_integer(BigInt::from(a - b))).collect())
        .collect();
    rref(&mut rows).len()
}

/// Exact convex hull of lattice points, computed in their affine hull.
pub fn convex_hull(points: &[Point]) -> Result<LatticePolytope> {
    if points.is_empty() {
        return Err(Error::InvalidInput("convex hull of an empty point set".into()));
    }
    let n = points[0].len();
    if let Some(bad) = points.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.len() });
    }
    let distinct: Vec<Point> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let frame = affine_frame(&distinct)?;
    let d = frame.pivots.len();
    if d == 0 {
        return Ok(LatticePolytope {
            ambient_dim: n,
            dim: 0,
            vertices: distinct,
            facets: Vec::new(),
            equations: frame.equations,
        });
    }
    let rows: Vec<Vec<BigInt>> = distinct
        .iter()
        .map(|p| {
            let mut r = vec![BigInt::one()];
            r.extend(frame.pivots.iter().map(|&c| BigInt::from(p[c] - frame.origin[c])));
            r
        })
        .collect();
    let homogeneous = is_homogeneous(&distinct);
    let mut facets = BTreeSet::new();
    for ray in double_description(&rows) {
        let mut normal = vec![0i64; n];
        for (k, &c) in frame.pivots.iter().enumerate() {
            normal[c] = to_i64(&ray[k + 1])?;
        }
        let normal = canonical_normal(&normal, homogeneous);
        let offset = distinct.iter().map(|p| dot(&normal, p)).min().expect("nonempty") as i64;
        facets.insert(Facet { normal, offset });
    }
    let facets: Vec<Facet> = facets.into_iter().collect();
    let tight: Vec<FixedBitSet> = distinct.iter().map(|p| tight_set(&facets, p)).collect();
    let vertices = (0..distinct.len())
        .filter(|&i| (0..distinct.len()).all(|j| j == i || !tight[i].is_subset(&tight[j])))
        .map(|i| distinct[i].clone())
        .collect();
    Ok(LatticePolytope { ambient_dim: n, dim: d, vertices, facets, equations: frame.equations })
}

fn tight_set(facets: &[Facet], p: &[i64]) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(facets.len());
    for (k, f) in facets.iter().enumerate() {
        if dot(&f.normal, p) == f.offset as i128 {
            s.insert(k);
        }
    }
    s
}

impl LatticePolytope {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn equations(&self) -> &[(Vec<i64>, i64)] {
        &self.equations
    }

    pub fn contains(&self, p: &[i64]) -> bool {
        self.equations.iter().all(|(a, c)| dot(a, p) == *c as i128)
            && self.facets.iter().all(|f| dot(&f.normal, p) >= f.offset as i128)
    }

    pub fn to_json(&self) -> PolytopeJson {
        PolytopeJson { vertices: self.vertices.clone(), facets: self.facets.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeJson {
    pub vertices: Vec<Point>,
    pub facets: Vec<Facet>,
}

/// Nonempty proper faces as subsets of `points`, from intersections of facet slices.
fn face_lattice(p: &LatticePolytope, points: &[Point]) -> Vec<FixedBitSet> {
    let facet_sets: Vec<FixedBitSet> = p
        .facets
        .iter()
        .map(|f| {
            let mut s = FixedBitSet::with_capacity(points.len());
            for (i, q) in points.iter().enumerate() {
                if dot(&f.normal, q) == f.offset as i128 {
                    s.insert(i);
                }
            }
            s
        })
        .collect();
    let mut seen: HashSet<FixedBitSet> = facet_sets.iter().cloned().collect();
    let mut frontier: Vec<FixedBitSet> = seen.iter().cloned().collect();
    while let Some(face) = frontier.pop() {
        for f in &facet_sets {
            let mut meet = face.clone();
            meet.intersect_with(f);
            if meet.count_ones(..) > 0 && !seen.contains(&meet) {
                seen.insert(meet.clone());
                frontier.push(meet);
            }
        }
    }
    seen.into_iter().collect()
}

/// Number of faces of each dimension `0..dim`.
pub fn f_vector(p: &LatticePolytope) -> Vec<usize> {
    let mut counts = vec![0; p.dim];
    for face in face_lattice(p, &p.vertices) {
        let pts: Vec<&Point> = face.ones().map(|i| &p.vertices[i]).collect();
        counts[affine_rank(&pts)] += 1;
    }
    counts
}

/// Every nonempty proper face with its slice of `support` and a representative
/// inner normal (the sum of the normals of the facets containing it). Faces are
/// ordered by decreasing dimension, then by their point lists.
pub fn all_faces(p: &LatticePolytope, support: &[Point]) -> Vec<Face> {
    let homogeneous = is_homogeneous(support);
    let mut faces: Vec<Face> = face_lattice(p, support)
        .into_iter()
        .map(|set| {
            let pts: Vec<Point> = set.ones().map(|i| support[i].clone()).collect();
            let mut normal = vec![0i64; p.ambient_dim];
            for f in &p.facets {
                if pts.iter().all(|q| dot(&f.normal, q) == f.offset as i128) {
                    for (a, b) in normal.iter_mut().zip(&f.normal) {
                        *a += b;
                    }
                }
            }
            let dim = affine_rank(&pts.iter().collect::<Vec<_>>());
            Face { normal: canonical_normal(&normal, homogeneous), points: pts, dim }
        })
        .collect();
    faces.sort_by(|a, b| b.dim.cmp(&a.dim).then_with(|| a.points.cmp(&b.points)));
    faces
}

/// Hull of all pairwise vertex sums.
pub fn minkowski_sum(p: &LatticePolytope, q: &LatticePolytope) -> Result<LatticePolytope> {
    if p.ambient_dim != q.ambient_dim {
        return Err(Error::DimensionMismatch { expected: p.ambient_dim, found: q.ambient_dim });
    }
    let sums: Vec<Point> = p
        .vertices
        .iter()
        .flat_map(|a| q.vertices.iter().map(move |b| a.iter().zip(b).map(|(x, y)| x + y).collect()))
        .collect();
    convex_hull(&sums)
}

/// Vertices of the standard simplex in `n` variables.
pub fn simplex(n: usize) -> Result<LatticePolytope> {
    let pts: Vec<Point> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    convex_hull(&pts)
}

fn check_index_set(i_set: &[usize], n: usize) -> Result<()> {
    if let Some(&bad) = i_set.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: bad + 1, len: n });
    }
    let distinct: BTreeSet<usize> = i_set.iter().copied().collect();
    if distinct.len() == n {
        return Err(Error::InvalidInput("the index set must be a proper subset".into()));
    }
    Ok(())
}

fn dominated(a: &[i64], b: &[i64], i_set: &[usize]) -> bool {
    i_set.iter().all(|&i| a[i] <= b[i])
}

/// Points of `aplus` minimal under the partial order that compares only the
/// coordinates in `i_set`, each paired with the slice of `a` agreeing with it
/// on those coordinates. Repeated slices are reported once.
pub fn minimal_sets(aplus: &[Point], a: &[Point], i_set: &[usize]) -> Result<Vec<(Point, Vec<Point>)>> {
    let n = aplus.first().or(a.first()).map_or(0, Vec::len);
    check_index_set(i_set, n)?;
    let mut out: Vec<(Point, Vec<Point>)> = Vec::new();
    let mut seen: BTreeSet<Vec<Point>> = BTreeSet::new();
    for cand in aplus {
        let strictly_below = aplus.iter().any(|other| {
            dominated(other, cand, i_set) && i_set.iter().any(|&i| other[i] != cand[i])
        });
        if strictly_below {
            continue;
        }
        let mut gamma: Vec<Point> = a
            .iter()
            .filter(|b| i_set.iter().all(|&i| b[i] == cand[i]))
            .cloned()
            .collect();
        gamma.sort();
        if seen.insert(gamma.clone()) {
            out.push((cand.clone(), gamma));
        }
    }
    Ok(out)
}

/// First point of `aminus` not dominated by any point of `aplus` on the
/// coordinates in `i_set`, or `None` when every point is dominated.
pub fn cpr_condition1(aplus: &[Point], aminus: &[Point], i_set: &[usize]) -> Result<Option<Point>> {
    let n = aplus.first().or(aminus.first()).map_or(0, Vec::len);
    check_index_set(i_set, n)?;
    Ok(aminus
        .iter()
        .find(|b| !aplus.iter().any(|a| dominated(a, b, i_set)))
        .cloned())
}

/// Decides whether `nu + alpha * newt_u` lies in the relative interior of
/// `beta * newt_f`, where `alpha = |nu| - (loops+1) D/2` and `beta = |nu| - loops D/2`.
pub fn convergence_containment(
    nu: &[Rational],
    spacetime_dim: u32,
    newt_u: &LatticePolytope,
    newt_f: &LatticePolytope,
    loops: usize,
) -> Result<bool> {
    let n = nu.len();
    for p in [newt_u, newt_f] {
        if p.ambient_dim != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.ambient_dim });
        }
    }
    let total: Rational = nu.iter().sum();
    let half_d = Rational::new(BigInt::from(spacetime_dim), BigInt::from(2));
    let alpha = &total - Rational::from_integer(BigInt::from(loops + 1)) * &half_d;
    let beta = &total - Rational::from_integer(BigInt::from(loops)) * &half_d;
    if alpha.is_negative() {
        return Err(Error::DegenerateScaling(format!("|nu| - (l+1)D/2 = {alpha} is negative")));
    }
    if !beta.is_positive() {
        return Err(Error::DegenerateScaling(format!("|nu| - lD/2 = {beta} is not positive")));
    }
    let rat = |x: i64| Rational::from_integer(BigInt::from(x));
    let rdot = |a: &[i64], x: &[Rational]| -> Rational { a.iter().zip(x).map(|(&ai, xi)| rat(ai) * xi).sum() };
    for v in &newt_u.vertices {
        let x: Vec<Rational> = nu.iter().zip(v).map(|(a, &b)| a + &alpha * rat(b)).collect();
        for (a, c) in &newt_f.equations {
            if rdot(a, &x) != &beta * rat(*c) {
                return Ok(false);
            }
        }
        for f in &newt_f.facets {
            if rdot(&f.normal, &x) <= &beta * rat(f.offset) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Groups points by the value of a linear functional (handy for diagnostics).
pub fn level_sets(points: &[Point], w: &[i64]) -> BTreeMap<i128, Vec<Point>> {
    let mut out: BTreeMap<i128, Vec<Point>> = BTreeMap::new();
    for p in points {
        out.entry(dot(w, p)).or_default().push(p.clone());
    }
    out
}
