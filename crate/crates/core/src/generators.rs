//! Seeded graph generators and small named graphs.
//!
//! Every random generator is a pure function of its arguments: the seed feeds a
//! ChaCha8 stream, and rejected samples are redrawn from the same stream, so a
//! given `(parameters, seed)` always yields the same edge list.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;
use crate::{Error, Result};

/// Upper bound on rejected samples before giving up.
pub const RESAMPLE_BUDGET: usize = 1_000_000;

/// Pairs shuffled stubs into a simple graph, or `None` on a loop or repeated edge.
fn pair_stubs(n: usize, left: &[u32], right: &[u32], degree_hint: usize) -> Option<Vec<(usize, usize)>> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::with_capacity(degree_hint); n];
    let mut edges = Vec::with_capacity(left.len());
    for (&a, &b) in left.iter().zip(right) {
        if a == b || adj[a as usize].contains(&b) {
            return None;
        }
        adj[a as usize].push(b);
        adj[b as usize].push(a);
        edges.push((a as usize, b as usize));
    }
    Some(edges)
}

/// Uniform random simple connected `d`-regular graph on `n` vertices
/// (configuration model with rejection).
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!("degree {d} must be at least 3")));
    }
    if n <= d {
        return Err(Error::InvalidParameter(format!("need more than {d} vertices, got {n}")));
    }
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("n·d = {} is odd", n * d)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<u32> = (0..n).flat_map(|x| core::iter::repeat_n(x as u32, d)).collect();
    for _ in 0..RESAMPLE_BUDGET {
        stubs.shuffle(&mut rng);
        let (left, right): (Vec<u32>, Vec<u32>) = stubs.chunks_exact(2).map(|p| (p[0], p[1])).unzip();
        let Some(edges) = pair_stubs(n, &left, &right, d) else { continue };
        let g = Graph::from_edges(n, &edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ResampleBudget(RESAMPLE_BUDGET))
}

/// Random `n`-lift of a connected base graph: vertex `(v, i)` gets index
/// `v·n + i`, and each base edge becomes a uniform random perfect matching
/// between the two fibres. Disconnected lifts are redrawn.
pub fn random_lift(base: &Graph, n: usize, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::InvalidParameter("lift order must be positive".into()));
    }
    if !base.is_connected() {
        return Err(Error::Disconnected);
    }
    let base_edges: Vec<(usize, usize)> = base.edges().collect();
    let nv = base.vertex_count() * n;
    for attempt in 0..RESAMPLE_BUDGET as u64 {
        let mut edges = Vec::with_capacity(base_edges.len() * n);
        for (k, &(u, v)) in base_edges.iter().enumerate() {
            // One sub-stream per matching.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(attempt * (base_edges.len() as u64 + 1) + k as u64);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for (i, &j) in perm.iter().enumerate() {
                edges.push((u * n + i, v * n + j));
            }
        }
        let g = Graph::from_edges(nv, &edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::ResampleBudget(RESAMPLE_BUDGET))
}

/// Base vertex of lift vertex `x` for a lift of order `n`.
pub fn lift_projection(n: usize, x: usize) -> usize {
    x / n
}

/// Random connected bipartite graph with `n_black` black vertices of degree `p1`
/// and `p1·n_black/q1` white vertices of degree `q1`. Black vertices come first;
/// colours are attached (0 = black, 1 = white).
pub fn biregular(p1: usize, q1: usize, n_black: usize, seed: u64) -> Result<Graph> {
    if p1 == 0 || q1 == 0 || n_black == 0 {
        return Err(Error::InvalidParameter("degrees and sizes must be positive".into()));
    }
    if !(p1 * n_black).is_multiple_of(q1) {
        return Err(Error::InvalidParameter(format!(
            "p1·n_black = {} is not divisible by q1 = {q1}",
            p1 * n_black
        )));
    }
    let n_white = p1 * n_black / q1;
    if p1 > n_white || q1 > n_black {
        return Err(Error::InvalidParameter("degrees exceed the opposite side".into()));
    }
    let n = n_black + n_white;
    let black: Vec<u32> = (0..n_black).flat_map(|x| core::iter::repeat_n(x as u32, p1)).collect();
    let mut white: Vec<u32> =
        (n_black..n).flat_map(|x| core::iter::repeat_n(x as u32, q1)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RESAMPLE_BUDGET {
        white.shuffle(&mut rng);
        let Some(edges) = pair_stubs(n, &black, &white, p1.max(q1)) else { continue };
        let g = Graph::from_edges(n, &edges)?;
        if g.is_connected() {
            let colours = (0..n).map(|x| u32::from(x >= n_black)).collect();
            return g.with_colours(colours);
        }
    }
    Err(Error::ResampleBudget(RESAMPLE_BUDGET))
}

/// Cycle `C_n`.
pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("a cycle needs 3 vertices, got {n}")));
    }
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    Graph::from_edges(n, &edges)
}

/// Complete graph `K_n`.
pub fn complete(n: usize) -> Result<Graph> {
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Graph::from_edges(n, &edges)
}

/// Complete bipartite graph `K_{a,b}` (the `a` side first).
pub fn complete_bipartite(a: usize, b: usize) -> Result<Graph> {
    let edges: Vec<(usize, usize)> = (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j))).collect();
    Graph::from_edges(a + b, &edges)
}

/// The Petersen graph: outer 5-cycle 0..5, inner pentagram 5..10, spokes i–i+5.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
        edges.push((i, i + 5));
    }
    Graph::from_edges(10, &edges).expect("static edge list")
}

/// Ball of radius `depth` in the `(q+1)`-regular tree, in BFS order from the root 0.
pub fn regular_tree_ball(q: usize, depth: usize) -> Result<Graph> {
    if q == 0 {
        return Err(Error::InvalidParameter("branching must be positive".into()));
    }
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1;
    for level in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let kids = if level == 0 { q + 1 } else { q };
            for _ in 0..kids {
                edges.push((v, next_id));
                next.push(next_id);
                next_id += 1;
            }
        }
        frontier = next;
    }
    Graph::from_edges(next_id, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bst_statistic;

    #[test]
    fn random_regular_contract() {
        let g = random_regular(10, 3, 1).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        assert!(g.is_connected());
        assert_eq!(g, random_regular(10, 3, 1).unwrap());
        assert!(matches!(random_regular(11, 3, 1), Err(Error::InvalidParameter(_))));
        assert!(random_regular(4, 4, 1).is_err());
    }

    #[test]
    fn random_regular_has_few_short_cycles() {
        let g = random_regular(1000, 3, 7).unwrap();
        let b = bst_statistic(&g, 2);
        assert!((0.0..=0.05).contains(&b), "{b}");
    }

    #[test]
    fn lifts_cover_their_base() {
        let k4 = complete(4).unwrap();
        let one = random_lift(&k4, 1, 3).unwrap();
        assert_eq!(one, k4);
        let n = 50;
        let g = random_lift(&k4, n, 3).unwrap();
        assert_eq!(g.regular_degree(), Some(3));
        // Collapsing fibres recovers each base edge exactly n times.
        let mut counts = [[0usize; 4]; 4];
        for (x, y) in g.edges() {
            let (a, b) = (lift_projection(n, x), lift_projection(n, y));
            assert!(k4.has_edge(a, b));
            counts[a.min(b)][a.max(b)] += 1;
        }
        for (a, b) in k4.edges() {
            assert_eq!(counts[a][b], n);
        }
        // Each vertex sees every neighbouring fibre once.
        for x in 0..g.vertex_count() {
            let mut seen: Vec<usize> = g.neighbours(x).iter().map(|&y| lift_projection(n, y as usize)).collect();
            seen.sort_unstable();
            let want: Vec<usize> = k4.neighbours(lift_projection(n, x)).iter().map(|&v| v as usize).collect();
            assert_eq!(seen, want);
        }
    }

    #[test]
    fn biregular_contract() {
        let g = biregular(3, 4, 8, 2).unwrap();
        assert_eq!(g.vertex_count(), 14);
        for x in 0..8 {
            assert_eq!(g.degree(x), 3);
        }
        for x in 8..14 {
            assert_eq!(g.degree(x), 4);
        }
        assert!(g.bipartition().is_some());
        assert!(biregular(3, 4, 7, 2).is_err());
        let r = biregular(3, 3, 10, 5).unwrap();
        assert_eq!(r.regular_degree(), Some(3));
        assert!(r.bipartition().is_some());
    }

    #[test]
    fn named_graphs() {
        let p = petersen();
        assert_eq!(p.regular_degree(), Some(3));
        assert_eq!(p.edge_count(), 15);
        // Girth 5: every ball of radius 2 is a tree, radius 3 is not.
        assert_eq!(crate::graph::injectivity_radius(&p, 0, 9).unwrap(), 2);
        assert_eq!(complete_bipartite(3, 3).unwrap().regular_degree(), Some(3));
        let t = regular_tree_ball(2, 3).unwrap();
        assert_eq!(t.vertex_count(), 1 + 3 + 6 + 12);
        assert!(cycle(2).is_err());
    }
}
