#![allow(dead_code)]

use coposcope::rational::{int, rat};
use coposcope::{library, FeynmanGraph, KinematicParams, Rational};
use rand::Rng;

fn one_based(edges: &[[usize; 2]], nodes: &[usize]) -> FeynmanGraph {
    FeynmanGraph::from_one_based(edges, nodes).unwrap()
}

/// Twenty graphs with up to ten edges, named for failure messages.
pub fn corpus() -> Vec<(&'static str, FeynmanGraph)> {
    vec![
        ("bubble", library::bubble()),
        ("parachute", library::parachute()),
        ("double_box", library::double_box()),
        ("nonplanar_double_box", library::nonplanar_double_box()),
        ("beetle", library::beetle()),
        ("banana2", library::banana(2)),
        ("banana3", library::banana(3)),
        ("banana4", library::banana(4)),
        ("triangle", library::one_loop(3)),
        ("box", library::one_loop(4)),
        ("pentagon", library::one_loop(5)),
        ("hexagon", library::one_loop(6)),
        ("kite", one_based(&[[1, 2], [1, 3], [2, 3], [2, 4], [3, 4]], &[1, 4])),
        ("sunrise_triangle", one_based(&[[1, 2], [2, 3], [2, 3], [3, 1]], &[1, 2, 3])),
        ("double_triangle", one_based(&[[1, 2], [2, 3], [3, 1], [2, 4], [4, 3]], &[1, 4, 2])),
        ("tetrahedron", one_based(&[[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4]], &[1, 2, 3, 4])),
        (
            "triple_box",
            one_based(
                &[[1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [6, 7], [7, 8], [8, 1], [2, 7], [3, 6]],
                &[1, 4, 5, 8],
            ),
        ),
        ("tadpole_bubble", one_based(&[[1, 1], [1, 2], [1, 2]], &[1, 2])),
        ("bridge_triangle", one_based(&[[1, 2], [2, 3], [3, 1], [3, 4]], &[1, 2, 4])),
        ("penta_box", one_based(&[[1, 2], [2, 3], [3, 4], [4, 5], [5, 6], [6, 1], [2, 6], [6, 7], [7, 3]], &[1, 3, 4, 5, 7])),
    ]
}

pub fn small_rational(rng: &mut impl Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    rat(rng.random_range(lo..=hi), rng.random_range(1..=max_den))
}

/// Positive masses and a random Gram matrix with zero row sums.
pub fn random_kinematics(g: &FeynmanGraph, rng: &mut impl Rng) -> KinematicParams {
    let masses = (0..g.num_vars()).map(|_| small_rational(rng, 1, 20, 4)).collect();
    let n = g.leg_count();
    let mut k = vec![vec![int(0); n]; n];
    for i in 0..n {
        for j in 0..i {
            let v = small_rational(rng, -20, 20, 4);
            k[i][j] = v.clone();
            k[j][i] = v;
        }
    }
    for i in 0..n {
        let off: Rational = (0..n).filter(|&j| j != i).map(|j| k[i][j].clone()).sum();
        k[i][i] = -off;
    }
    KinematicParams::new(masses, k).unwrap()
}

pub fn random_symmetric(n: usize, rng: &mut impl Rng, positive_diagonal: bool) -> Vec<Vec<Rational>> {
    let mut c = vec![vec![int(0); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v = if i == j && positive_diagonal {
                small_rational(rng, 1, 50, 5)
            } else {
                small_rational(rng, -50, 50, 5)
            };
            c[i][j] = v.clone();
            c[j][i] = v;
        }
    }
    c
}

/// `x^T C x` as a polynomial.
pub fn quadratic_form(c: &[Vec<Rational>]) -> coposcope::SparsePoly {
    let n = c.len();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut e = vec![0u32; n];
            e[i] += 1;
            e[j] += 1;
            terms.push((e, c[i][j].clone()));
        }
    }
    coposcope::SparsePoly::from_terms(n, terms).unwrap()
}
