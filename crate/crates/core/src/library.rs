//! Named graphs used throughout the tests and the command line.

use crate::graph::FeynmanGraph;

fn one_based(edges: &[[usize; 2]], nodes: &[usize]) -> FeynmanGraph {
    FeynmanGraph::from_one_based(edges, nodes).expect("library graphs are valid")
}

/// Two vertices joined by two edges, two legs on each vertex.
pub fn bubble() -> FeynmanGraph {
    one_based(&[[1, 2], [1, 2]], &[1, 1, 2, 2])
}

/// Triangle with a doubled side: legs 1 and 2 on the apex, legs 4 and 3 on
/// the ends of the doubled side.
pub fn parachute() -> FeynmanGraph {
    one_based(&[[1, 2], [1, 3], [2, 3], [2, 3]], &[1, 1, 3, 2])
}

/// Planar two-loop box ladder with four legs.
pub fn double_box() -> FeynmanGraph {
    one_based(
        &[[2, 4], [1, 2], [1, 3], [3, 4], [3, 5], [4, 6], [5, 6]],
        &[2, 1, 5, 6],
    )
}

/// Crossed two-loop box with four legs.
pub fn nonplanar_double_box() -> FeynmanGraph {
    one_based(
        &[[2, 4], [1, 2], [1, 3], [3, 6], [3, 5], [4, 6], [4, 5]],
        &[2, 1, 5, 6],
    )
}

/// Two-loop box with a triangle insertion.
pub fn beetle() -> FeynmanGraph {
    one_based(
        &[[2, 4], [1, 2], [1, 5], [4, 3], [3, 6], [4, 6], [5, 3]],
        &[2, 1, 5, 6],
    )
}

/// `n` parallel edges between two vertices with one leg on each vertex.
pub fn banana(n: usize) -> FeynmanGraph {
    let edges = vec![[1, 2]; n];
    one_based(&edges, &[1, 2])
}

/// Cycle on `n` vertices: edge 1 joins the last vertex to the first,
/// edge `i` joins vertex `i-1` to vertex `i`, and leg `i` sits on vertex `i`.
pub fn one_loop(n: usize) -> FeynmanGraph {
    assert!(n >= 2, "a one-loop graph needs at least two edges");
    let mut edges = vec![[n, 1]];
    edges.extend((2..=n).map(|i| [i - 1, i]));
    let nodes: Vec<usize> = (1..=n).collect();
    one_based(&edges, &nodes)
}

/// Looks up a graph by name: `bubble`, `parachute`, `double_box` (`g1`),
/// `nonplanar_double_box` (`g2`), `beetle` (`g3`), `bananaN`, `one_loopN`.
pub fn by_name(name: &str) -> Option<FeynmanGraph> {
    let lower = name.to_ascii_lowercase();
    let sized = |prefix: &str| -> Option<usize> {
        lower.strip_prefix(prefix).and_then(|rest| rest.trim_start_matches(['_', '-']).parse().ok())
    };
    match lower.as_str() {
        "bubble" => Some(bubble()),
        "parachute" => Some(parachute()),
        "double_box" | "doublebox" | "g1" => Some(double_box()),
        "nonplanar_double_box" | "nonplanar" | "g2" => Some(nonplanar_double_box()),
        "beetle" | "g3" => Some(beetle()),
        _ => {
            if let Some(n) = sized("banana").filter(|&n| n >= 1) {
                Some(banana(n))
            } else {
                sized("one_loop").or_else(|| sized("ngon")).filter(|&n| n >= 2).map(one_loop)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        for (g, v, e, l) in [
            (bubble(), 2, 2, 1),
            (parachute(), 3, 4, 2),
            (double_box(), 6, 7, 2),
            (nonplanar_double_box(), 6, 7, 2),
            (beetle(), 6, 7, 2),
            (banana(3), 2, 3, 2),
            (one_loop(5), 5, 5, 1),
        ] {
            assert_eq!((g.vertex_count(), g.edge_count(), g.loop_number()), (v, e, l));
        }
    }

    #[test]
    fn lookup() {
        assert_eq!(by_name("G2"), Some(nonplanar_double_box()));
        assert_eq!(by_name("banana4"), Some(banana(4)));
        assert_eq!(by_name("one_loop_3"), Some(one_loop(3)));
        assert_eq!(by_name("nothing"), None);
    }
}
