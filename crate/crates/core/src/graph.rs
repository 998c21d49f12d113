//! Feynman-graph combinatorics: spanning trees and 2-forests, block
//! structure, and edge contraction.
//!
//! Vertices are 0-based internally. Every edge carries an `id`, the index of
//! its Schwinger parameter in the ambient variable vector, so contracted
//! graphs keep addressing the same variables as their parent.

use std::fmt;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest edge count accepted by [`one_vertex_irreducible_subgraphs`].
pub const DEFAULT_ENUMERATION_CAP: usize = 16;

/// Bitset of edge ids.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct EdgeSet(pub u64);

impl EdgeSet {
    pub const EMPTY: EdgeSet = EdgeSet(0);

    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> Self {
        EdgeSet(ids.into_iter().fold(0, |acc, i| acc | (1u64 << i)))
    }

    pub fn contains(self, id: usize) -> bool {
        self.0 >> id & 1 == 1
    }

    pub fn insert(&mut self, id: usize) {
        self.0 |= 1 << id;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 | other.0)
    }

    pub fn minus(self, other: EdgeSet) -> EdgeSet {
        EdgeSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: EdgeSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn ids(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&i| self.contains(i))
    }

    /// One-based ids, as used in printed output.
    pub fn labels(self) -> Vec<usize> {
        self.ids().map(|i| i + 1).collect()
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, id) in self.ids().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", id + 1)?;
        }
        write!(f, "}}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: usize,
    pub u: usize,
    pub v: usize,
}

impl Edge {
    pub fn is_self_loop(&self) -> bool {
        self.u == self.v
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeynmanGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    legs: Vec<usize>,
    num_vars: usize,
}

/// A spanning 2-forest with its vertex bipartition and leg partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoForest {
    pub edges: EdgeSet,
    /// `side[v]` is true for vertices in the component that does not contain vertex 0.
    pub side: Vec<bool>,
    pub legs_first: Vec<usize>,
    pub legs_second: Vec<usize>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

impl FeynmanGraph {
    /// Builds a graph from 0-based endpoints; edge `i` gets id `i`.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)], legs: &[usize]) -> Result<Self> {
        let edges = edges
            .iter()
            .enumerate()
            .map(|(id, &(u, v))| Edge { id, u, v })
            .collect::<Vec<_>>();
        Self::with_edges(vertex_count, edges, legs.to_vec(), None)
    }

    /// Builds a graph from the one-based `edges`/`nodes` lists used in
    /// physics code listings: `nodes[i]` is the vertex of leg `i`.
    pub fn from_one_based(edges: &[[usize; 2]], nodes: &[usize]) -> Result<Self> {
        let max_vertex = edges
            .iter()
            .flatten()
            .chain(nodes.iter())
            .copied()
            .max()
            .unwrap_or(1);
        if edges.iter().flatten().chain(nodes.iter()).any(|&v| v == 0) {
            return Err(Error::InvalidInput("vertex labels are one-based".into()));
        }
        let zero_based: Vec<(usize, usize)> = edges.iter().map(|e| (e[0] - 1, e[1] - 1)).collect();
        let legs: Vec<usize> = nodes.iter().map(|v| v - 1).collect();
        Self::new(max_vertex, &zero_based, &legs)
    }

    /// Builds a graph whose edges carry explicit ids in an ambient space of
    /// `num_vars` variables (defaults to one past the largest id).
    pub fn with_edges(
        vertex_count: usize,
        edges: Vec<Edge>,
        legs: Vec<usize>,
        num_vars: Option<usize>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::Structural("a graph needs at least one vertex".into()));
        }
        let num_vars = num_vars.unwrap_or_else(|| edges.iter().map(|e| e.id + 1).max().unwrap_or(0));
        if num_vars > 64 {
            return Err(Error::Resource(format!("{num_vars} edge variables exceed the limit of 64")));
        }
        let mut seen = EdgeSet::EMPTY;
        for e in &edges {
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(Error::IndexOutOfRange { index: e.u.max(e.v) + 1, len: vertex_count });
            }
            if e.id >= num_vars {
                return Err(Error::IndexOutOfRange { index: e.id + 1, len: num_vars });
            }
            if seen.contains(e.id) {
                return Err(Error::Structural(format!("duplicate edge id {}", e.id + 1)));
            }
            seen.insert(e.id);
        }
        if let Some(&bad) = legs.iter().find(|&&v| v >= vertex_count) {
            return Err(Error::IndexOutOfRange { index: bad + 1, len: vertex_count });
        }
        let g = FeynmanGraph { vertex_count, edges, legs, num_vars };
        if !g.is_connected() {
            return Err(Error::Structural("graph is disconnected".into()));
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn legs(&self) -> &[usize] {
        &self.legs
    }

    pub fn leg_count(&self) -> usize {
        self.legs.len()
    }

    /// Length of the ambient variable vector (edge ids index into it).
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn loop_number(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    pub fn edge_set(&self) -> EdgeSet {
        EdgeSet::from_ids(self.edges.iter().map(|e| e.id))
    }

    pub fn edge_by_id(&self, id: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    fn is_connected(&self) -> bool {
        let mut uf = UnionFind::new(self.vertex_count);
        let mut parts = self.vertex_count;
        for e in &self.edges {
            if uf.union(e.u, e.v) {
                parts -= 1;
            }
        }
        parts == 1
    }

    /// Number of components of `(V, subset)`, together with a label per vertex
    /// (the smallest vertex in its component).
    fn components(&self, subset: EdgeSet) -> (usize, Vec<usize>) {
        let mut uf = UnionFind::new(self.vertex_count);
        let mut parts = self.vertex_count;
        for e in self.edges.iter().filter(|e| subset.contains(e.id)) {
            if uf.union(e.u, e.v) {
                parts -= 1;
            }
        }
        let labels = (0..self.vertex_count).map(|v| uf.find(v)).collect();
        (parts, labels)
    }

    fn is_forest(&self, subset: EdgeSet) -> bool {
        let mut uf = UnionFind::new(self.vertex_count);
        self.edges
            .iter()
            .filter(|e| subset.contains(e.id))
            .all(|e| uf.union(e.u, e.v))
    }

    /// Graph JSON with one-based labels.
    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            edges: self.edges.iter().map(|e| [e.u + 1, e.v + 1]).collect(),
            nodes: self.legs.iter().map(|v| v + 1).collect(),
            edge_ids: Some(self.edges.iter().map(|e| e.id + 1).collect()),
            vertices: Some(self.vertex_count),
            num_vars: Some(self.num_vars),
        }
    }
}

/// Serialized form: `{"edges": [[1,2],...], "nodes": [1,1,3,2]}`, one-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub edges: Vec<[usize; 2]>,
    pub nodes: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_ids: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_vars: Option<usize>,
}

impl TryFrom<GraphJson> for FeynmanGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        let labels = j.edges.iter().flatten().chain(j.nodes.iter());
        if labels.clone().any(|&v| v == 0) {
            return Err(Error::InvalidInput("vertex labels are one-based".into()));
        }
        let vertex_count = j
            .vertices
            .unwrap_or_else(|| labels.copied().max().unwrap_or(1));
        let ids = match j.edge_ids {
            Some(ids) => {
                if ids.len() != j.edges.len() {
                    return Err(Error::DimensionMismatch { expected: j.edges.len(), found: ids.len() });
                }
                if ids.contains(&0) {
                    return Err(Error::InvalidInput("edge ids are one-based".into()));
                }
                ids.into_iter().map(|i| i - 1).collect()
            }
            None => (0..j.edges.len()).collect::<Vec<_>>(),
        };
        let edges = j
            .edges
            .iter()
            .zip(ids)
            .map(|(e, id)| Edge { id, u: e[0] - 1, v: e[1] - 1 })
            .collect();
        let legs = j.nodes.iter().map(|v| v - 1).collect();
        FeynmanGraph::with_edges(vertex_count, edges, legs, j.num_vars)
    }
}

/// Every spanning tree, as edge-id sets, in lexicographic order of edge positions.
pub fn spanning_trees(g: &FeynmanGraph) -> Vec<EdgeSet> {
    let size = g.vertex_count - 1;
    g.edges
        .iter()
        .filter(|e| !e.is_self_loop())
        .map(|e| e.id)
        .combinations(size)
        .map(EdgeSet::from_ids)
        .filter(|&t| g.is_forest(t))
        .collect()
}

/// Every spanning 2-forest with its leg partition. The first side holds vertex 0.
pub fn spanning_2_forests(g: &FeynmanGraph) -> Vec<TwoForest> {
    if g.vertex_count < 2 {
        return Vec::new();
    }
    let size = g.vertex_count - 2;
    g.edges
        .iter()
        .filter(|e| !e.is_self_loop())
        .map(|e| e.id)
        .combinations(size)
        .map(EdgeSet::from_ids)
        .filter(|&f| g.is_forest(f))
        .map(|f| {
            let (_, labels) = g.components(f);
            let side: Vec<bool> = labels.iter().map(|&l| l != labels[0]).collect();
            let (second, first): (Vec<usize>, Vec<usize>) =
                (0..g.legs.len()).partition(|&i| side[g.legs[i]]);
            TwoForest { edges: f, side, legs_first: first, legs_second: second }
        })
        .collect()
}

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn integer_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Graph Laplacian with self-loops ignored.
pub fn laplacian(g: &FeynmanGraph) -> Vec<Vec<BigInt>> {
    let n = g.vertex_count;
    let mut l = vec![vec![BigInt::zero(); n]; n];
    for e in g.edges.iter().filter(|e| !e.is_self_loop()) {
        l[e.u][e.u] += 1;
        l[e.v][e.v] += 1;
        l[e.u][e.v] -= 1;
        l[e.v][e.u] -= 1;
    }
    l
}

fn minor(m: &[Vec<BigInt>], drop: &[usize]) -> Vec<Vec<BigInt>> {
    m.iter()
        .enumerate()
        .filter(|(i, _)| !drop.contains(i))
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|(j, _)| !drop.contains(j))
                .map(|(_, x)| x.clone())
                .collect()
        })
        .collect()
}

/// Spanning-tree count from the matrix-tree theorem.
pub fn spanning_tree_count_oracle(g: &FeynmanGraph) -> BigInt {
    integer_determinant(minor(&laplacian(g), &[0]))
}

/// Number of spanning 2-forests separating vertices `a` and `b`, from the
/// all-minors matrix-tree theorem.
pub fn separating_2_forest_count(g: &FeynmanGraph, a: usize, b: usize) -> BigInt {
    integer_determinant(minor(&laplacian(g), &[a, b]))
}

/// True when every edge lies on a cycle.
pub fn is_bridgeless(g: &FeynmanGraph) -> bool {
    let all = g.edge_set();
    g.edges
        .iter()
        .all(|e| e.is_self_loop() || g.components(all.minus(EdgeSet::from_ids([e.id]))).0 == 1)
}

/// True when the edges of `gamma` form a single block: a lone edge or
/// self-loop, or a loopless connected subgraph with no cut vertex.
pub fn is_one_vertex_irreducible(g: &FeynmanGraph, gamma: EdgeSet) -> bool {
    let edges: Vec<&Edge> = g.edges.iter().filter(|e| gamma.contains(e.id)).collect();
    match edges.len() {
        0 => false,
        1 => true,
        _ => {
            if edges.iter().any(|e| e.is_self_loop()) {
                return false;
            }
            let mut verts: Vec<usize> = edges.iter().flat_map(|e| [e.u, e.v]).collect();
            verts.sort_unstable();
            verts.dedup();
            let connected_without = |skip: Option<usize>| {
                let mut uf = UnionFind::new(g.vertex_count);
                let mut parts = verts.len() - usize::from(skip.is_some());
                for e in &edges {
                    if Some(e.u) == skip || Some(e.v) == skip {
                        continue;
                    }
                    if uf.union(e.u, e.v) {
                        parts -= 1;
                    }
                }
                parts == 1
            };
            connected_without(None) && verts.iter().all(|&v| connected_without(Some(v)))
        }
    }
}

/// All nonempty proper edge subsets forming a single block, ordered by the
/// integer value of their bitsets.
pub fn one_vertex_irreducible_subgraphs(g: &FeynmanGraph) -> Result<Vec<EdgeSet>> {
    one_vertex_irreducible_subgraphs_capped(g, DEFAULT_ENUMERATION_CAP)
}

pub fn one_vertex_irreducible_subgraphs_capped(g: &FeynmanGraph, cap: usize) -> Result<Vec<EdgeSet>> {
    let n = g.edge_count();
    if n > cap {
        return Err(Error::Resource(format!("{n} edges exceed the subgraph enumeration cap {cap}")));
    }
    let ids: Vec<usize> = g.edges.iter().map(|e| e.id).collect();
    let full = g.edge_set();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << n) {
        let gamma = EdgeSet::from_ids((0..n).filter(|&k| mask >> k & 1 == 1).map(|k| ids[k]));
        if gamma != full && is_one_vertex_irreducible(g, gamma) {
            out.push(gamma);
        }
    }
    out.sort();
    Ok(out)
}

/// Contracts every edge of `gamma`. Edges of `gamma` disappear; other edges
/// keep their ids, including ones that become self-loops. Merged vertices
/// are renumbered in order of their smallest original vertex.
pub fn contract(g: &FeynmanGraph, gamma: EdgeSet) -> FeynmanGraph {
    let mut uf = UnionFind::new(g.vertex_count);
    for e in g.edges.iter().filter(|e| gamma.contains(e.id)) {
        uf.union(e.u, e.v);
    }
    let mut reps: Vec<usize> = (0..g.vertex_count).map(|v| uf.find(v)).collect();
    let mut order: Vec<usize> = reps.clone();
    order.sort_unstable();
    order.dedup();
    for r in reps.iter_mut() {
        *r = order.binary_search(r).expect("representative present");
    }
    let edges = g
        .edges
        .iter()
        .filter(|e| !gamma.contains(e.id))
        .map(|e| {
            let (a, b) = (reps[e.u], reps[e.v]);
            Edge { id: e.id, u: a.min(b), v: a.max(b) }
        })
        .collect();
    let legs = g.legs.iter().map(|&v| reps[v]).collect();
    FeynmanGraph { vertex_count: order.len(), edges, legs, num_vars: g.num_vars }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::library;

    #[test]
    fn bubble_has_two_trees_and_one_forest() {
        let g = library::bubble();
        assert_eq!(spanning_trees(&g), vec![EdgeSet::from_ids([0]), EdgeSet::from_ids([1])]);
        let forests = spanning_2_forests(&g);
        assert_eq!(forests.len(), 1);
        assert_eq!(forests[0].edges, EdgeSet::EMPTY);
        assert_eq!(forests[0].legs_first, vec![0, 1]);
        assert_eq!(forests[0].legs_second, vec![2, 3]);
    }

    #[test]
    fn parachute_trees() {
        let g = library::parachute();
        let mut trees = spanning_trees(&g);
        trees.sort();
        let mut expected: Vec<EdgeSet> = [[2, 4], [2, 3], [1, 4], [1, 3], [1, 2]]
            .iter()
            .map(|t| EdgeSet::from_ids(t.iter().map(|i| i - 1)))
            .collect();
        expected.sort();
        assert_eq!(trees, expected);
        assert_eq!(spanning_tree_count_oracle(&g), BigInt::from(5));
    }

    #[test]
    fn triangle_forests_keep_one_edge() {
        let g = library::one_loop(3);
        assert_eq!(spanning_trees(&g).len(), 3);
        let forests = spanning_2_forests(&g);
        assert_eq!(forests.len(), 3);
        assert!(forests.iter().all(|f| f.edges.len() == 1));
    }

    #[test]
    fn single_edge_counts() {
        let g = FeynmanGraph::new(2, &[(0, 1)], &[0, 1]).unwrap();
        assert_eq!(spanning_tree_count_oracle(&g), BigInt::one());
        assert!(!is_bridgeless(&g));
    }

    #[test]
    fn bridges() {
        assert!(is_bridgeless(&library::bubble()));
        assert!(is_bridgeless(&library::parachute()));
        let path = FeynmanGraph::new(3, &[(0, 1), (1, 2)], &[0, 2]).unwrap();
        assert!(!is_bridgeless(&path));
    }

    #[test]
    fn parachute_has_seven_blocks() {
        let g = library::parachute();
        let blocks = one_vertex_irreducible_subgraphs(&g).unwrap();
        let labels: Vec<Vec<usize>> = blocks.iter().map(|b| b.labels()).collect();
        assert_eq!(labels, vec![
            vec![1], vec![2], vec![3], vec![1, 2, 3], vec![4], vec![1, 2, 4], vec![3, 4],
        ]);
    }

    #[test]
    fn disconnected_graph_rejected() {
        let err = FeynmanGraph::new(3, &[(0, 1)], &[]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn cap_is_enforced() {
        let g = library::banana(5);
        assert!(matches!(one_vertex_irreducible_subgraphs_capped(&g, 4), Err(Error::Resource(_))));
    }

    #[test]
    fn contraction_of_parachute_gives_bubble() {
        let g = library::parachute();
        let c = contract(&g, EdgeSet::from_ids([2, 3]));
        assert_eq!(c.vertex_count(), 2);
        let ends: Vec<(usize, usize, usize)> = c.edges().iter().map(|e| (e.id, e.u, e.v)).collect();
        assert_eq!(ends, vec![(0, 0, 1), (1, 0, 1)]);
        assert_eq!(c.legs(), &[0, 0, 1, 1]);
        assert_eq!(c.num_vars(), 4);
    }

    #[test]
    fn contraction_edge_cases() {
        let g = library::parachute();
        assert_eq!(contract(&g, EdgeSet::EMPTY), g);
        let point = contract(&g, g.edge_set());
        assert_eq!(point.vertex_count(), 1);
        assert_eq!(point.edge_count(), 0);
        assert_eq!(point.legs(), &[0, 0, 0, 0]);
    }

    #[test]
    fn contraction_keeps_new_self_loops() {
        let g = library::bubble();
        let c = contract(&g, EdgeSet::from_ids([0]));
        assert_eq!(c.edges(), &[Edge { id: 1, u: 0, v: 0 }]);
        assert_eq!(c.loop_number(), 1);
    }

    #[test]
    fn json_round_trip() {
        let g = contract(&library::double_box(), EdgeSet::from_ids([1, 4]));
        let back = FeynmanGraph::try_from(g.to_json()).unwrap();
        assert_eq!(back, g);
        let text = serde_json::to_string(&library::parachute().to_json()).unwrap();
        let parsed: GraphJson = serde_json::from_str(&text).unwrap();
        assert_eq!(FeynmanGraph::try_from(parsed).unwrap(), library::parachute());
    }

    #[test]
    fn bareiss_matches_small_determinants() {
        let m = |rows: &[&[i64]]| -> Vec<Vec<BigInt>> {
            rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
        };
        assert_eq!(integer_determinant(m(&[&[2, 1], &[1, 3]])), BigInt::from(5));
        assert_eq!(integer_determinant(m(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(integer_determinant(m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]])), BigInt::zero());
        assert_eq!(integer_determinant(m(&[&[0, 2, 1], &[3, 0, 0], &[1, 1, 1]])), BigInt::from(-3));
    }
}
