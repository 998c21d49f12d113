//! First and second Symanzik polynomials, their support sets, and the
//! kinematic data they depend on.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{spanning_2_forests, spanning_trees, EdgeSet, FeynmanGraph};
use crate::poly::{LinearForm, Mono, Param, ParamPoly, SparsePoly};
use crate::rational::{from_text, to_text, RatText, Rational};

/// Squared internal masses indexed by edge id, and the Gram matrix of the
/// external momenta.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KinematicParams {
    pub masses: Vec<Rational>,
    pub gram: Vec<Vec<Rational>>,
}

impl KinematicParams {
    /// Checks symmetry and zero row sums of the Gram matrix.
    pub fn new(masses: Vec<Rational>, gram: Vec<Vec<Rational>>) -> Result<Self> {
        let n = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            if !row.iter().sum::<Rational>().is_zero() {
                return Err(Error::InvalidInput(format!("row {} of K does not sum to zero", i + 1)));
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::InvalidInput(format!("K is not symmetric at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(KinematicParams { masses, gram })
    }

    pub fn value(&self, p: Param) -> Option<Rational> {
        match p {
            Param::Mass(e) => self.masses.get(e).cloned(),
            Param::Gram(i, j) => self.gram.get(i).and_then(|r| r.get(j)).cloned(),
        }
    }

    fn check_against(&self, g: &FeynmanGraph) -> Result<()> {
        if self.masses.len() != g.num_vars() {
            return Err(Error::DimensionMismatch { expected: g.num_vars(), found: self.masses.len() });
        }
        if self.gram.len() != g.leg_count() {
            return Err(Error::DimensionMismatch { expected: g.leg_count(), found: self.gram.len() });
        }
        Ok(())
    }

    pub fn all_masses_positive(&self, g: &FeynmanGraph) -> bool {
        g.edges().iter().all(|e| self.masses[e.id] > Rational::zero())
    }
}

/// Reduced basis for graphs with four legs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FourLegBasis {
    pub masses: Vec<Rational>,
    pub leg_masses: [Rational; 4],
    pub s: Rational,
    pub t: Rational,
}

impl FourLegBasis {
    /// All internal masses `m`, all external masses `big_m`.
    pub fn equal_mass(num_edges: usize, m: Rational, big_m: Rational, s: Rational, t: Rational) -> Self {
        FourLegBasis {
            masses: vec![m; num_edges],
            leg_masses: [big_m.clone(), big_m.clone(), big_m.clone(), big_m],
            s,
            t,
        }
    }
}

/// Expands `(m, M1..M4, s, t)` into a Gram matrix with `k_ii = M_i`,
/// `s = (p1+p2)^2` and `t = (p2+p3)^2`; the other entries follow from zero row sums.
pub fn expand_four_leg(b: &FourLegBasis, g: &FeynmanGraph) -> Result<KinematicParams> {
    if g.leg_count() != 4 {
        return Err(Error::InvalidInput(format!("four legs required, graph has {}", g.leg_count())));
    }
    if b.masses.len() != g.num_vars() {
        return Err(Error::DimensionMismatch { expected: g.num_vars(), found: b.masses.len() });
    }
    let two = Rational::from_integer(2.into());
    let m = &b.leg_masses;
    let k12 = (&b.s - &m[0] - &m[1]) / &two;
    let k23 = (&b.t - &m[1] - &m[2]) / &two;
    let k24 = -&k12 - &m[1] - &k23;
    let r1 = -&m[0] - &k12;
    let r3 = -&m[2] - &k23;
    let r4 = -&m[3] - &k24;
    let k13 = (&r1 + &r3 - &r4) / &two;
    let k14 = (&r1 - &r3 + &r4) / &two;
    let k34 = (-&r1 + &r3 + &r4) / &two;
    let gram = vec![
        vec![m[0].clone(), k12.clone(), k13.clone(), k14.clone()],
        vec![k12, m[1].clone(), k23.clone(), k24.clone()],
        vec![k13, k23, m[2].clone(), k34.clone()],
        vec![k14, k24, k34, m[3].clone()],
    ];
    KinematicParams::new(b.masses.clone(), gram)
}

/// Gram matrix `k_ij = p_i0 p_j0 - sum_{d>0} p_id p_jd` of momenta that sum to zero.
pub fn minkowski_gram(momenta: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let dim = momenta.first().map_or(0, Vec::len);
    if let Some(bad) = momenta.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }
    for d in 0..dim {
        if !momenta.iter().map(|p| &p[d]).sum::<Rational>().is_zero() {
            return Err(Error::InvalidInput("momenta do not sum to zero".into()));
        }
    }
    let dot = |a: &[Rational], b: &[Rational]| -> Rational {
        let mut acc = Rational::zero();
        for d in 0..dim {
            let term = &a[d] * &b[d];
            if d == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    };
    Ok(momenta.iter().map(|p| momenta.iter().map(|q| dot(p, q)).collect()).collect())
}

fn complement_exponent(g: &FeynmanGraph, kept: EdgeSet) -> Vec<u32> {
    let mut e = vec![0u32; g.num_vars()];
    for edge in g.edges() {
        if !kept.contains(edge.id) {
            e[edge.id] += 1;
        }
    }
    e
}

/// `U = sum over spanning trees T of prod_{e not in T} x_e`.
pub fn first_symanzik(g: &FeynmanGraph) -> SparsePoly {
    let mut u = SparsePoly::zero(g.num_vars());
    for t in spanning_trees(g) {
        u.add_term(Mono(complement_exponent(g, t)), Rational::one());
    }
    u
}

/// Second Symanzik polynomial with symbolic masses and Gram entries.
pub fn second_symanzik_symbolic(g: &FeynmanGraph) -> ParamPoly {
    let mut f = ParamPoly::zero(g.num_vars());
    for forest in spanning_2_forests(g) {
        let mut form = LinearForm::default();
        for &i in &forest.legs_first {
            for &j in &forest.legs_second {
                form.add_assign(&LinearForm::param(Param::gram(i, j)));
            }
        }
        if !form.is_zero() {
            f.add_term(complement_exponent(g, forest.edges), &form);
        }
    }
    for t in spanning_trees(g) {
        let base = complement_exponent(g, t);
        for edge in g.edges() {
            let mut e = base.clone();
            e[edge.id] += 1;
            f.add_term(e, &LinearForm::param(Param::Mass(edge.id)));
        }
    }
    f
}

pub fn second_symanzik(g: &FeynmanGraph, z: &KinematicParams) -> Result<SparsePoly> {
    z.check_against(g)?;
    second_symanzik_symbolic(g).substitute_params(|p| z.value(p))
}

/// The two pieces of the generic support of the second Symanzik polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSets {
    pub a1: BTreeSet<Vec<u32>>,
    pub a2: BTreeSet<Vec<u32>>,
}

impl SupportSets {
    pub fn all(&self) -> BTreeSet<Vec<u32>> {
        self.a1.union(&self.a2).cloned().collect()
    }
}

pub fn support_sets(g: &FeynmanGraph) -> SupportSets {
    let mut a1 = BTreeSet::new();
    let mut a2 = BTreeSet::new();
    for t in spanning_trees(g) {
        let base = complement_exponent(g, t);
        for edge in g.edges() {
            let mut e = base.clone();
            e[edge.id] += 1;
            if t.contains(edge.id) {
                a1.insert(e);
            } else {
                a2.insert(e);
            }
        }
    }
    SupportSets { a1, a2 }
}

/// Kinematics JSON: either explicit masses and Gram matrix or a four-leg basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KinematicsJson {
    Explicit {
        masses: Vec<RatText>,
        #[serde(rename = "K")]
        gram: Vec<Vec<RatText>>,
    },
    FourLeg {
        fourleg: FourLegJson,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FourLegJson {
    pub m: Vec<RatText>,
    #[serde(rename = "M")]
    pub big_m: Vec<RatText>,
    pub s: RatText,
    pub t: RatText,
}

impl KinematicsJson {
    pub fn from_params(z: &KinematicParams) -> Self {
        KinematicsJson::Explicit {
            masses: to_text(&z.masses),
            gram: z.gram.iter().map(|r| to_text(r)).collect(),
        }
    }

    /// Resolves to explicit parameters for `g`. A four-leg basis with a single
    /// internal mass or a single external mass broadcasts it.
    pub fn resolve(&self, g: &FeynmanGraph) -> Result<KinematicParams> {
        match self {
            KinematicsJson::Explicit { masses, gram } => {
                KinematicParams::new(from_text(masses), gram.iter().map(|r| from_text(r)).collect())
            }
            KinematicsJson::FourLeg { fourleg } => {
                let masses = match fourleg.m.len() {
                    1 => vec![fourleg.m[0].0.clone(); g.num_vars()],
                    _ => from_text(&fourleg.m),
                };
                let big: Vec<Rational> = match fourleg.big_m.len() {
                    1 => vec![fourleg.big_m[0].0.clone(); 4],
                    4 => from_text(&fourleg.big_m),
                    k => return Err(Error::DimensionMismatch { expected: 4, found: k }),
                };
                let basis = FourLegBasis {
                    masses,
                    leg_masses: [big[0].clone(), big[1].clone(), big[2].clone(), big[3].clone()],
                    s: fourleg.s.0.clone(),
                    t: fourleg.t.0.clone(),
                };
                expand_four_leg(&basis, g)
            }
        }
    }
}
