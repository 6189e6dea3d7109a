//! Finite simple graphs in compressed adjacency form, plus injectivity radius and
//! Benjamini–Schramm statistics.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Finite simple undirected graph.
///
/// Neighbour lists are sorted and stored back to back (CSR). The slot of `y`
/// inside the list of `x` doubles as the index of the directed edge `(x, y)`,
/// see [`crate::paths::DirectedEdgeSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    potential: Option<Vec<f64>>,
    colours: Option<Vec<u32>>,
}

impl Graph {
    /// Builds a graph on `n` vertices from undirected edges given in any order.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        if n == 0 {
            return Err(Error::InvalidParameter("a graph needs at least one vertex".into()));
        }
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!("{n} vertices exceed the u32 index range")));
        }
        let mut deg = vec![0usize; n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            deg[u] += 1;
            deg[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for x in 0..n {
            offsets[x + 1] = offsets[x] + deg[x];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            targets[fill[u]] = v as u32;
            fill[u] += 1;
            targets[fill[v]] = u as u32;
            fill[v] += 1;
        }
        for x in 0..n {
            let list = &mut targets[offsets[x]..offsets[x + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::MultiEdge(x.min(w[0] as usize), x.max(w[0] as usize)));
            }
        }
        Ok(Graph { offsets, targets, potential: None, colours: None })
    }

    /// Attaches a vertex potential `W`.
    pub fn with_potential(mut self, w: Vec<f64>) -> Result<Graph> {
        if w.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch { expected: self.vertex_count(), got: w.len() });
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("potential values must be finite".into()));
        }
        self.potential = Some(w);
        Ok(self)
    }

    /// Attaches vertex colours.
    pub fn with_colours(mut self, c: Vec<u32>) -> Result<Graph> {
        if c.len() != self.vertex_count() {
            return Err(Error::DimensionMismatch { expected: self.vertex_count(), got: c.len() });
        }
        self.colours = Some(c);
        Ok(self)
    }

    /// Drops any potential.
    pub fn without_potential(mut self) -> Graph {
        self.potential = None;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, x: usize) -> usize {
        self.offsets[x + 1] - self.offsets[x]
    }

    pub fn neighbours(&self, x: usize) -> &[u32] {
        &self.targets[self.offsets[x]..self.offsets[x + 1]]
    }

    /// CSR offsets (`N + 1` entries).
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Concatenated neighbour lists.
    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    /// Position of `y` in the concatenated neighbour lists of `x`, i.e. the index
    /// of the directed edge `(x, y)`.
    pub fn slot(&self, x: usize, y: usize) -> Option<usize> {
        if x >= self.vertex_count() {
            return None;
        }
        self.neighbours(x).binary_search(&(y as u32)).ok().map(|p| self.offsets[x] + p)
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.slot(x, y).is_some()
    }

    /// Undirected edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbours(u).iter().filter(move |&&v| (v as usize) > u).map(move |&v| (u, v as usize))
        })
    }

    pub fn potential(&self) -> Option<&[f64]> {
        self.potential.as_deref()
    }

    /// `W(x)`, zero when no potential is attached.
    pub fn potential_at(&self, x: usize) -> f64 {
        self.potential.as_ref().map_or(0.0, |w| w[x])
    }

    pub fn colours(&self) -> Option<&[u32]> {
        self.colours.as_deref()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.vertex_count()).map(|x| self.degree(x)).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        (0..self.vertex_count()).map(|x| self.degree(x)).max().unwrap_or(0)
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (1..self.vertex_count()).all(|x| self.degree(x) == d).then_some(d)
    }

    /// BFS distances from `x`; unreachable vertices get `usize::MAX`.
    pub fn distances_from(&self, x: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[x] = 0;
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbours(u) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// One shortest path from `x` to `y` (vertex list including both ends). Ties are
    /// broken towards smaller vertex indices.
    pub fn shortest_path(&self, x: usize, y: usize) -> Option<Vec<usize>> {
        let dist = self.distances_from(y);
        if dist[x] == usize::MAX {
            return None;
        }
        let mut path = vec![x];
        let mut cur = x;
        while cur != y {
            let next = self
                .neighbours(cur)
                .iter()
                .map(|&w| w as usize)
                .find(|&w| dist[w] + 1 == dist[cur])?;
            path.push(next);
            cur = next;
        }
        Some(path)
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Two-colouring if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let n = self.vertex_count();
        let mut side = vec![u8::MAX; n];
        for s in 0..n {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &w in self.neighbours(u) {
                    let w = w as usize;
                    if side[w] == u8::MAX {
                        side[w] = 1 - side[u];
                        queue.push_back(w);
                    } else if side[w] == side[u] {
                        return None;
                    }
                }
            }
        }
        Some(side)
    }

    /// Connected and 2-regular.
    pub fn is_cycle(&self) -> bool {
        self.regular_degree() == Some(2) && self.is_connected()
    }

    /// Dense `N×N` matrix of `A + W` (row-major).
    pub fn hamiltonian_dense(&self) -> Vec<f64> {
        let n = self.vertex_count();
        let mut h = vec![0.0; n * n];
        for x in 0..n {
            for &y in self.neighbours(x) {
                h[x * n + y as usize] = 1.0;
            }
            h[x * n + x] = self.potential_at(x);
        }
        h
    }

    /// `(A + W) v`.
    pub fn apply_hamiltonian(&self, v: &[f64]) -> Vec<f64> {
        (0..self.vertex_count())
            .map(|x| {
                self.neighbours(x).iter().map(|&y| v[y as usize]).sum::<f64>() + self.potential_at(x) * v[x]
            })
            .collect()
    }
}

const UNSEEN: u32 = u32::MAX;

/// Reusable BFS buffers for repeated injectivity-radius queries.
struct RadiusScratch {
    dist: Vec<u32>,
    parent: Vec<u32>,
    queue: Vec<u32>,
}

impl RadiusScratch {
    fn new(n: usize) -> Self {
        RadiusScratch { dist: vec![UNSEEN; n], parent: vec![UNSEEN; n], queue: Vec::new() }
    }

    fn radius(&mut self, g: &Graph, x: usize, cap: usize) -> usize {
        self.queue.clear();
        self.queue.push(x as u32);
        self.dist[x] = 0;
        self.parent[x] = UNSEEN;
        let mut head = 0;
        let mut found = cap;
        'bfs: while head < self.queue.len() {
            let u = self.queue[head] as usize;
            head += 1;
            let d = self.dist[u] as usize;
            if d >= cap {
                break;
            }
            for &w in g.neighbours(u) {
                if w == self.parent[u] {
                    continue;
                }
                let wi = w as usize;
                if self.dist[wi] != UNSEEN {
                    // A second route into `w`: the edge {u, w} closes a cycle inside
                    // the ball of radius d + 1.
                    found = d;
                    break 'bfs;
                }
                self.dist[wi] = (d + 1) as u32;
                self.parent[wi] = u as u32;
                self.queue.push(w);
            }
        }
        for &v in &self.queue {
            self.dist[v as usize] = UNSEEN;
        }
        found
    }
}

/// Largest `ρ ≤ cap` such that the ball of radius `ρ` around `x` is a tree.
///
/// The ball of radius `r` consists of the edges with an endpoint at distance `< r`
/// from `x`, i.e. the edges traversed by walks of length `≤ r` from `x`.
pub fn injectivity_radius(g: &Graph, x: usize, cap: usize) -> Result<usize> {
    if x >= g.vertex_count() {
        return Err(Error::VertexOutOfRange { vertex: x, n: g.vertex_count() });
    }
    Ok(RadiusScratch::new(g.vertex_count()).radius(g, x, cap))
}

/// Injectivity radii of all vertices, capped.
pub fn injectivity_radii(g: &Graph, cap: usize) -> Vec<usize> {
    let mut scratch = RadiusScratch::new(g.vertex_count());
    (0..g.vertex_count()).map(|x| scratch.radius(g, x, cap)).collect()
}

/// Fraction of vertices whose injectivity radius is below `r`.
pub fn bst_statistic(g: &Graph, r: usize) -> f64 {
    let bad = injectivity_radii(g, r).iter().filter(|&&rho| rho < r).count();
    bad as f64 / g.vertex_count() as f64
}

/// Per-vertex radii together with the bad fraction at one radius.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BstReport {
    pub radius: usize,
    pub bad_fraction: f64,
    /// Capped at `max(radius, cap)`.
    pub per_vertex_rho: Vec<usize>,
}

pub fn bst_report(g: &Graph, r: usize, cap: usize) -> BstReport {
    let rho = injectivity_radii(g, cap.max(r));
    let bad = rho.iter().filter(|&&v| v < r).count();
    BstReport { radius: r, bad_fraction: bad as f64 / g.vertex_count() as f64, per_vertex_rho: rho }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, cycle, petersen};

    /// Independent check: edges with an endpoint at distance < r versus vertices
    /// within distance r.
    fn ball_is_tree(g: &Graph, x: usize, r: usize) -> bool {
        let dist = g.distances_from(x);
        let verts = dist.iter().filter(|&&d| d <= r).count();
        let edges = g.edges().filter(|&(u, v)| dist[u].min(dist[v]) < r).count();
        edges + 1 == verts
    }

    fn brute_radius(g: &Graph, x: usize, cap: usize) -> usize {
        (0..=cap).take_while(|&r| ball_is_tree(g, x, r)).last().unwrap()
    }

    #[test]
    fn rejects_bad_edge_lists() {
        assert_eq!(Graph::from_edges(3, &[(0, 0)]), Err(Error::SelfLoop(0)));
        assert_eq!(Graph::from_edges(3, &[(0, 1), (1, 0)]), Err(Error::MultiEdge(0, 1)));
        assert_eq!(
            Graph::from_edges(3, &[(0, 3)]),
            Err(Error::VertexOutOfRange { vertex: 3, n: 3 })
        );
    }

    #[test]
    fn named_radii() {
        let k4 = complete(4).unwrap();
        for x in 0..4 {
            assert_eq!(injectivity_radius(&k4, x, 10).unwrap(), 1);
        }
        let c10 = cycle(10).unwrap();
        for x in 0..10 {
            assert_eq!(injectivity_radius(&c10, x, 10).unwrap(), 4);
        }
        assert_eq!(bst_statistic(&c10, 4), 0.0);
        assert_eq!(bst_statistic(&c10, 5), 1.0);
        // Odd cycle: the antipodal edge joins two vertices at distance 4.
        assert_eq!(injectivity_radius(&cycle(9).unwrap(), 0, 10).unwrap(), 4);
        let path = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(injectivity_radius(&path, 2, 7).unwrap(), 7);
        assert!(injectivity_radius(&path, 9, 7).is_err());
    }

    #[test]
    fn radius_matches_ball_count() {
        for g in [petersen(), complete(5).unwrap(), cycle(7).unwrap()] {
            for x in 0..g.vertex_count() {
                assert_eq!(injectivity_radius(&g, x, 6).unwrap(), brute_radius(&g, x, 6));
            }
        }
    }

    #[test]
    fn shortest_path_and_bipartition() {
        let c6 = cycle(6).unwrap();
        assert_eq!(c6.shortest_path(0, 3).unwrap().len(), 4);
        assert!(c6.bipartition().is_some());
        assert!(cycle(5).unwrap().bipartition().is_none());
        assert!(c6.is_cycle());
        assert!(!petersen().is_cycle());
    }
}
