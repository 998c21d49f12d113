//! The decision pipeline: search for a negative point by recursing over the
//! faces of the Feynman polytope, then certify interior membership with a
//! Pólya exponent.

mod oracles;

pub use oracles::{
    banana_discriminant_n3, banana_oracle, bubble_oracle, outer_approx, realize_quadratic, triangle_oracle,
    OuterApprox, SqrtExpr,
};

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{contract, one_vertex_irreducible_subgraphs_capped, EdgeSet, FeynmanGraph, DEFAULT_ENUMERATION_CAP};
use crate::landau::{exact_negative_witness, minimize_on_simplex, solve_critical, SolverConfig, Witness, WitnessJson};
use crate::poly::SparsePoly;
use crate::polya::{check_polya, find_polya_exponent, CapReport, PolyaCertificate, PolyaMode, PolyaOutcome};
use crate::polytope::{all_faces, convex_hull, to_points, Point};
use crate::rational::Rational;
use crate::symanzik::{second_symanzik, KinematicParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecideConfig {
    pub solver: SolverConfig,
    /// Largest Pólya exponent tried.
    pub cap: u32,
    pub mode: PolyaMode,
    /// Grid used for the last-resort search after the Pólya cap is hit.
    pub grid_resolution: u32,
    pub enumeration_cap: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            solver: SolverConfig::default(),
            cap: 1000,
            mode: PolyaMode::Nonneg,
            grid_resolution: 40,
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// A face of the Feynman polytope on which the restriction of `F` is negative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Preclusion {
    /// Subgraphs contracted in turn, each a block of the graph left by the
    /// previous contractions.
    pub chain: Vec<EdgeSet>,
    /// Exponents of the face, sorted.
    pub face: Vec<Point>,
    /// Point where the face restriction is negative; carries the face normal.
    pub witness: Witness,
    /// Point where `F` itself is negative.
    pub lifted: Witness,
    /// Number of contracted graphs examined.
    pub visited: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    CopositiveInterior {
        polya: PolyaCertificate,
        face_checks: usize,
    },
    NotCopositive {
        chain: Vec<EdgeSet>,
        face: Vec<Point>,
        witness: Witness,
        lifted: Witness,
        fingerprint: String,
    },
    Undecided {
        report: CapReport,
        min_critical_value: Option<f64>,
        grid_minimum: Option<f64>,
        fingerprint: String,
    },
}

impl Certificate {
    /// Process exit code: 0 interior, 1 not copositive, 2 undecided.
    pub fn exit_code(&self) -> i32 {
        match self {
            Certificate::CopositiveInterior { .. } => 0,
            Certificate::NotCopositive { .. } => 1,
            Certificate::Undecided { .. } => 2,
        }
    }

    /// Re-checks the certificate against `f` using exact arithmetic only.
    pub fn verify(&self, f: &SparsePoly) -> Result<bool> {
        match self {
            Certificate::CopositiveInterior { polya, .. } => {
                if polya.fingerprint != f.fingerprint() {
                    return Err(Error::InvalidInput("certificate fingerprint does not match the polynomial".into()));
                }
                Ok(check_polya(f, polya.n, polya.mode)?.passed)
            }
            Certificate::NotCopositive { witness, lifted, fingerprint, face, .. } => {
                if *fingerprint != f.fingerprint() {
                    return Err(Error::InvalidInput("certificate fingerprint does not match the polynomial".into()));
                }
                let face_ok = match &witness.face_normal {
                    Some(w) => {
                        let mut pts = to_points(f.restrict_to_face(w).support());
                        pts.sort();
                        pts == *face
                    }
                    None => true,
                };
                Ok(face_ok && witness.verify(f) && lifted.verify(f) && lifted.face_normal.is_none())
            }
            Certificate::Undecided { .. } => Ok(false),
        }
    }

    pub fn to_json(&self) -> CertificateJson {
        match self {
            Certificate::CopositiveInterior { polya, face_checks } => {
                CertificateJson::CopositiveInterior { polya: polya.clone(), face_checks: *face_checks }
            }
            Certificate::NotCopositive { chain, face, witness, lifted, fingerprint } => CertificateJson::NotCopositive {
                chain: chain.iter().map(|s| s.labels()).collect(),
                face: face.clone(),
                witness: witness.to_json(),
                lifted: lifted.to_json(),
                fingerprint: fingerprint.clone(),
            },
            Certificate::Undecided { report, min_critical_value, grid_minimum, fingerprint } => {
                CertificateJson::Undecided {
                    report: report.clone(),
                    min_critical_value: *min_critical_value,
                    grid_minimum: *grid_minimum,
                    fingerprint: fingerprint.clone(),
                }
            }
        }
    }
}

/// Serialized form of [`Certificate`]. Chains use one-based edge labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CertificateJson {
    CopositiveInterior {
        polya: PolyaCertificate,
        face_checks: usize,
    },
    NotCopositive {
        chain: Vec<Vec<usize>>,
        face: Vec<Point>,
        witness: WitnessJson,
        lifted: WitnessJson,
        fingerprint: String,
    },
    Undecided {
        report: CapReport,
        #[serde(default)]
        min_critical_value: Option<f64>,
        #[serde(default)]
        grid_minimum: Option<f64>,
        fingerprint: String,
    },
}

impl CertificateJson {
    pub fn into_certificate(self) -> Result<Certificate> {
        Ok(match self {
            CertificateJson::CopositiveInterior { polya, face_checks } => {
                Certificate::CopositiveInterior { polya, face_checks }
            }
            CertificateJson::NotCopositive { chain, face, witness, lifted, fingerprint } => {
                let chain = chain
                    .into_iter()
                    .map(|labels| {
                        if labels.iter().any(|&l| l == 0 || l > 64) {
                            return Err(Error::Parse("edge labels in a chain must lie in 1..=64".into()));
                        }
                        Ok(EdgeSet::from_ids(labels.into_iter().map(|l| l - 1)))
                    })
                    .collect::<Result<_>>()?;
                Certificate::NotCopositive {
                    chain,
                    face,
                    witness: witness.into_witness(),
                    lifted: lifted.into_witness(),
                    fingerprint,
                }
            }
            CertificateJson::Undecided { report, min_critical_value, grid_minimum, fingerprint } => {
                Certificate::Undecided { report, min_critical_value, grid_minimum, fingerprint }
            }
        })
    }
}

/// A negative point of a contracted graph's polynomial, on its used variables.
struct Found {
    chain: Vec<EdgeSet>,
    contracted: EdgeSet,
    vars: Vec<usize>,
    point: Vec<Rational>,
}

/// Every edge set reachable by contracting blocks in turn, each with a
/// shortest chain reaching it. The empty set comes first.
fn contraction_tree(g: &FeynmanGraph, cap: usize) -> Result<Vec<(EdgeSet, Vec<EdgeSet>)>> {
    let mut seen = HashSet::from([EdgeSet::default()]);
    let mut out = vec![(EdgeSet::default(), Vec::new())];
    let mut next = 0;
    while next < out.len() {
        let (set, chain) = out[next].clone();
        next += 1;
        let h = contract(g, set);
        for gamma in one_vertex_irreducible_subgraphs_capped(&h, cap)? {
            let grown = set.union(gamma);
            if seen.insert(grown) {
                let mut c = chain.clone();
                c.push(gamma);
                out.push((grown, c));
            }
        }
    }
    Ok(out)
}

struct Search<'a> {
    cfg: &'a DecideConfig,
    min_critical: Option<f64>,
}

impl Search<'_> {
    /// Solves the critical equations of `f` on its used variables and returns
    /// an exactly negative rational point if one of the solutions is negative.
    fn negative_point(&mut self, f: &SparsePoly, vars: &[usize]) -> Result<Option<Vec<Rational>>> {
        match vars.len() {
            0 => Ok(None),
            1 => {
                let (_, c) = f.terms().next().expect("one used variable means a nonzero polynomial");
                Ok(c.is_negative().then(|| vec![Rational::one()]))
            }
            _ => {
                let fc = f.select_vars(vars)?;
                let points = solve_critical(&fc, &self.cfg.solver)?;
                for p in &points {
                    let v = fc.evaluate_f64(&p.on_simplex_coords());
                    self.min_critical = Some(self.min_critical.map_or(v, |m| m.min(v)));
                }
                for p in points.iter().filter(|p| p.value < 0.0) {
                    if let Some(w) = exact_negative_witness(&fc, &p.coords) {
                        return Ok(Some(w.point));
                    }
                }
                Ok(None)
            }
        }
    }

    /// Examines `F` and the second Symanzik polynomial of every contraction,
    /// fewest variables first, and stops at the first negative point.
    fn run(&mut self, g: &FeynmanGraph, z: &KinematicParams) -> Result<(Option<Found>, usize)> {
        let mut nodes = Vec::new();
        for (set, chain) in contraction_tree(g, self.cfg.enumeration_cap)? {
            let f = second_symanzik(&contract(g, set), z)?;
            let vars = f.used_vars();
            nodes.push((vars.len(), chain.len(), set, chain, f, vars));
        }
        nodes.sort_by_key(|n| (n.0, n.1, n.2));
        let total = nodes.len();
        for (examined, (_, _, set, chain, f, vars)) in nodes.into_iter().enumerate() {
            if let Some(point) = self.negative_point(&f, &vars)? {
                return Ok((Some(Found { chain, contracted: set, vars, point }), examined + 1));
            }
        }
        Ok((None, total))
    }
}

/// Lexicographic face selection: minimize the degree in each cumulative
/// contracted set in turn, then break ties inside the contracted variables by
/// minimizing the degree of higher-numbered edges first.
fn lex_face(f: &SparsePoly, chain: &[EdgeSet]) -> Vec<Point> {
    let mut pts = to_points(f.support());
    let mut cumulative = EdgeSet::default();
    let keep_min = |pts: &mut Vec<Point>, weight: &dyn Fn(&Point) -> i64| {
        let best = pts.iter().map(weight).min().unwrap_or(0);
        pts.retain(|p| weight(p) == best);
    };
    for gamma in chain {
        cumulative = cumulative.union(*gamma);
        let set = cumulative;
        keep_min(&mut pts, &|p: &Point| set.ids().map(|e| p[e]).sum());
    }
    let mut contracted: Vec<usize> = cumulative.ids().collect();
    contracted.reverse();
    for e in contracted {
        keep_min(&mut pts, &|p: &Point| p[e]);
    }
    pts.sort();
    pts
}

/// `x_i = point_i * t^{w_i}` with `t = 2^{-k}`, for the first `k` at which
/// `f` is exactly negative.
fn lift(f: &SparsePoly, point: &[Rational], normal: &[i64]) -> Option<Witness> {
    let shift = normal.iter().copied().min().unwrap_or(0).min(0);
    for k in 1..=64u32 {
        let candidate: Vec<Rational> = point
            .iter()
            .zip(normal)
            .map(|(p, &w)| {
                let e = (w - shift) as u32 * k;
                p / Rational::from_integer(BigInt::one() << e)
            })
            .collect();
        if let Ok(w) = Witness::new(f, candidate, None) {
            return Some(w);
        }
    }
    None
}

fn preclusion_from(g: &FeynmanGraph, f: &SparsePoly, found: Found, visited: usize) -> Result<Preclusion> {
    let n = g.num_vars();
    let mut point = vec![Rational::one(); n];
    for (v, q) in found.vars.iter().zip(found.point) {
        point[*v] = q;
    }
    if found.contracted.is_empty() {
        let witness = Witness::new(f, point, None)?;
        let mut face = to_points(f.support());
        face.sort();
        return Ok(Preclusion { chain: vec![], face, lifted: witness.clone(), witness, visited });
    }
    let face = lex_face(f, &found.chain);
    let hull = convex_hull(&to_points(f.support()))?;
    let normal = all_faces(&hull, &to_points(f.support()))
        .into_iter()
        .find(|q| {
            let mut pts = q.points.clone();
            pts.sort();
            pts == face
        })
        .map(|q| q.normal)
        .ok_or_else(|| Error::Structural("selected face not found in the face lattice".into()))?;
    let witness = Witness::new(f, point.clone(), Some(normal.clone()))?;
    let lifted = lift(f, &point, &normal)
        .ok_or_else(|| Error::Structural("face witness did not lift to a negative point".into()))?;
    Ok(Preclusion { chain: found.chain, face, witness, lifted, visited })
}

/// Searches for a negative point of `F` by solving the critical equations on
/// `G` and on every graph reached by repeatedly contracting one-vertex
/// irreducible subgraphs. Each contraction stands for a face of the Feynman
/// polytope; the reported face is the smallest one found to be negative.
/// `None` means no negative point was found.
pub fn preclude_copositivity(g: &FeynmanGraph, z: &KinematicParams, cfg: &DecideConfig) -> Result<Option<Preclusion>> {
    Ok(preclude_inner(g, z, cfg)?.0)
}

fn preclude_inner(
    g: &FeynmanGraph,
    z: &KinematicParams,
    cfg: &DecideConfig,
) -> Result<(Option<Preclusion>, usize, Option<f64>)> {
    let f = second_symanzik(g, z)?;
    let mut search = Search { cfg, min_critical: None };
    let (found, visited) = search.run(g, z)?;
    let pre = found.map(|fd| preclusion_from(g, &f, fd, visited)).transpose()?;
    Ok((pre, visited, search.min_critical))
}

/// Full pipeline: face recursion, then Pólya certification, then a grid
/// search as a last resort.
pub fn decide(g: &FeynmanGraph, z: &KinematicParams, cfg: &DecideConfig) -> Result<Certificate> {
    let f = second_symanzik(g, z)?;
    let fingerprint = f.fingerprint();
    let (pre, visited, min_critical) = preclude_inner(g, z, cfg)?;
    if let Some(p) = pre {
        return Ok(Certificate::NotCopositive {
            chain: p.chain,
            face: p.face,
            witness: p.witness,
            lifted: p.lifted,
            fingerprint,
        });
    }
    if !z.all_masses_positive(g) {
        return Err(Error::InvalidInput(
            "no negative point was found, and Pólya certification requires every internal mass to be positive".into(),
        ));
    }
    match find_polya_exponent(&f, cfg.mode, cfg.cap)? {
        PolyaOutcome::Certified(polya) => Ok(Certificate::CopositiveInterior { polya, face_checks: visited }),
        PolyaOutcome::CapExceeded(report) => {
            let (grid_min, at) = minimize_on_simplex(&f, cfg.grid_resolution)?;
            if grid_min < 0.0 {
                let top = at.iter().copied().fold(0.0, f64::max);
                let interior: Vec<f64> = at.iter().map(|&x| if x > 0.0 { x } else { 1e-9 * top }).collect();
                if let Some(w) = exact_negative_witness(&f, &interior) {
                    let mut face = to_points(f.support());
                    face.sort();
                    return Ok(Certificate::NotCopositive {
                        chain: vec![],
                        face,
                        lifted: w.clone(),
                        witness: w,
                        fingerprint,
                    });
                }
            }
            Ok(Certificate::Undecided {
                report,
                min_critical_value: min_critical,
                grid_minimum: Some(grid_min),
                fingerprint,
            })
        }
    }
}
