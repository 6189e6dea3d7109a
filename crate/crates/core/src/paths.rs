//! Directed edges and non-backtracking path spaces `B_k`.
//!
//! Grade 0 is the vertex set and grade 1 the directed edges, indexed by their CSR
//! slot in [`Graph`]. A path of grade `k ≥ 2` is stored through its parent (the
//! path with the last vertex dropped), its suffix (first vertex dropped) and its
//! first and last edges. Children of a path are contiguous and ordered by the
//! successor choice, which gives O(k) lookup from a vertex tuple.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::{Error, Result};

/// Default cap on the number of paths in a single grade.
pub const DEFAULT_PATH_CAP: usize = 50_000_000;

#[derive(Debug, Clone)]
struct Grade {
    parent: Vec<u32>,
    suffix: Vec<u32>,
    first_edge: Vec<u32>,
    last_edge: Vec<u32>,
}

/// Directed edges of a graph together with the path spaces built so far.
#[derive(Debug, Clone)]
pub struct DirectedEdgeSpace {
    graph: Graph,
    tail: Vec<u32>,
    reverse: Vec<u32>,
    /// `grades[k]` for `k ≥ 2`; the first two entries are unused.
    grades: Vec<Grade>,
    /// `child_start[k][p]`: index in grade `k+1` of the first child of path `p`.
    child_start: Vec<Vec<u32>>,
    cap: usize,
}

impl DirectedEdgeSpace {
    /// Builds the edge space and all grades up to `max_grade`.
    pub fn new(graph: &Graph, max_grade: usize) -> Result<Self> {
        Self::with_cap(graph, max_grade, DEFAULT_PATH_CAP)
    }

    pub fn with_cap(graph: &Graph, max_grade: usize, cap: usize) -> Result<Self> {
        let g = graph.clone();
        let m = g.targets().len();
        let cap = cap.min(u32::MAX as usize - 1);
        if m > cap {
            return Err(Error::CapExceeded { grade: 1, predicted: m, cap });
        }
        let mut tail = vec![0u32; m];
        for x in 0..g.vertex_count() {
            for s in g.offsets()[x]..g.offsets()[x + 1] {
                tail[s] = x as u32;
            }
        }
        let reverse: Vec<u32> = (0..m)
            .map(|e| g.slot(g.targets()[e] as usize, tail[e] as usize).expect("symmetric adjacency") as u32)
            .collect();
        let empty = Grade { parent: Vec::new(), suffix: Vec::new(), first_edge: Vec::new(), last_edge: Vec::new() };
        let child_start = vec![g.offsets().iter().map(|&o| o as u32).collect()];
        let mut space = DirectedEdgeSpace {
            graph: g,
            tail,
            reverse,
            grades: vec![empty.clone(), empty],
            child_start,
            cap,
        };
        space.extend_to(max_grade)?;
        Ok(space)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    /// Highest grade available.
    pub fn max_grade(&self) -> usize {
        self.grades.len() - 1
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.tail.len()
    }

    /// `(x0, x1)` of directed edge `e`.
    pub fn edge(&self, e: usize) -> (usize, usize) {
        (self.tail[e] as usize, self.graph.targets()[e] as usize)
    }

    pub fn tail(&self, e: usize) -> usize {
        self.tail[e] as usize
    }

    pub fn head(&self, e: usize) -> usize {
        self.graph.targets()[e] as usize
    }

    pub fn reverse(&self, e: usize) -> usize {
        self.reverse[e] as usize
    }

    /// Index of the directed edge `(x, y)`.
    pub fn edge_index(&self, x: usize, y: usize) -> Option<usize> {
        self.graph.slot(x, y)
    }

    /// Non-backtracking continuations `(x1, x2)` of `e = (x0, x1)`, in slot order.
    pub fn successors(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        let v = self.head(e);
        let r = self.reverse(e);
        (self.graph.offsets()[v]..self.graph.offsets()[v + 1]).filter(move |&s| s != r)
    }

    pub fn successor_count(&self, e: usize) -> usize {
        self.graph.degree(self.head(e)) - 1
    }

    /// Builds grades up to `k` if needed.
    pub fn extend_to(&mut self, k: usize) -> Result<()> {
        while self.max_grade() < k {
            self.build_next()?;
        }
        Ok(())
    }

    fn build_next(&mut self) -> Result<()> {
        let k = self.max_grade();
        let len_k = self.len(k);
        let mut predicted = 0usize;
        for p in 0..len_k {
            predicted += self.successor_count(self.last_edge(k, p));
        }
        if predicted > self.cap {
            return Err(Error::CapExceeded { grade: k + 1, predicted, cap: self.cap });
        }
        let mut next = Grade {
            parent: Vec::with_capacity(predicted),
            suffix: Vec::with_capacity(predicted),
            first_edge: Vec::with_capacity(predicted),
            last_edge: Vec::with_capacity(predicted),
        };
        let mut starts = Vec::with_capacity(len_k + 1);
        for p in 0..len_k {
            starts.push(next.parent.len() as u32);
            let last = self.last_edge(k, p);
            let first = self.first_edge(k, p);
            let suffix_base = if k >= 2 {
                Some(self.child_start[k - 1][self.suffix(k, p)] as usize)
            } else {
                None
            };
            for (c, s) in self.successors(last).enumerate() {
                next.parent.push(p as u32);
                next.first_edge.push(first as u32);
                next.last_edge.push(s as u32);
                next.suffix.push(match suffix_base {
                    Some(b) => (b + c) as u32,
                    None => s as u32,
                });
            }
        }
        starts.push(next.parent.len() as u32);
        self.child_start.push(starts);
        self.grades.push(next);
        Ok(())
    }

    /// `|B_k|`.
    pub fn len(&self, k: usize) -> usize {
        match k {
            0 => self.vertex_count(),
            1 => self.edge_count(),
            _ => self.grades[k].parent.len(),
        }
    }

    /// Index in grade `k-1` of the path with the last vertex removed (`k ≥ 1`).
    pub fn parent(&self, k: usize, p: usize) -> usize {
        match k {
            1 => self.tail(p),
            _ => self.grades[k].parent[p] as usize,
        }
    }

    /// Index in grade `k-1` of the path with the first vertex removed (`k ≥ 1`).
    pub fn suffix(&self, k: usize, p: usize) -> usize {
        match k {
            1 => self.head(p),
            _ => self.grades[k].suffix[p] as usize,
        }
    }

    pub fn first_edge(&self, k: usize, p: usize) -> usize {
        match k {
            1 => p,
            _ => self.grades[k].first_edge[p] as usize,
        }
    }

    pub fn last_edge(&self, k: usize, p: usize) -> usize {
        match k {
            1 => p,
            _ => self.grades[k].last_edge[p] as usize,
        }
    }

    pub fn first_vertex(&self, k: usize, p: usize) -> usize {
        if k == 0 {
            p
        } else {
            self.tail(self.first_edge(k, p))
        }
    }

    pub fn last_vertex(&self, k: usize, p: usize) -> usize {
        if k == 0 {
            p
        } else {
            self.head(self.last_edge(k, p))
        }
    }

    /// Children of path `p` of grade `k` in grade `k+1` (needs grade `k+1` built).
    pub fn children(&self, k: usize, p: usize) -> core::ops::Range<usize> {
        self.child_start[k][p] as usize..self.child_start[k][p + 1] as usize
    }

    /// Vertex tuple `(x0, …, xk)` of a path.
    pub fn path_vertices(&self, k: usize, p: usize) -> Vec<usize> {
        let mut out = vec![0usize; k + 1];
        let mut cur = p;
        for j in (1..=k).rev() {
            out[j] = self.last_vertex(j, cur);
            cur = self.parent(j, cur);
        }
        out[0] = cur;
        out
    }

    /// Index of a vertex tuple in its grade, if it is a non-backtracking path.
    pub fn index_of(&self, path: &[usize]) -> Option<usize> {
        let k = path.len().checked_sub(1)?;
        if k > self.max_grade() || path[0] >= self.vertex_count() {
            return None;
        }
        if k == 0 {
            return Some(path[0]);
        }
        let mut e = self.edge_index(path[0], path[1])?;
        let mut idx = e;
        for j in 1..k {
            let target = self.edge_index(path[j], path[j + 1])?;
            let c = self.successors(e).position(|s| s == target)?;
            idx = self.child_start[j][idx] as usize + c;
            e = target;
        }
        Some(idx)
    }

    /// Iterator over all vertex tuples of grade `k`.
    pub fn enumerate_paths(&self, k: usize) -> Result<impl Iterator<Item = Vec<usize>> + '_> {
        if k > self.max_grade() {
            return Err(Error::GradeUnavailable(k));
        }
        Ok((0..self.len(k)).map(move |p| self.path_vertices(k, p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{complete, cycle, petersen, random_regular};
    use proptest::prelude::*;

    /// Independent enumeration by depth-first extension of vertex tuples.
    fn brute_paths(g: &Graph, k: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = (0..g.vertex_count()).map(|x| vec![x]).collect();
        for _ in 0..k {
            let mut next = Vec::new();
            for p in &out {
                let last = *p.last().unwrap();
                for &y in g.neighbours(last) {
                    let y = y as usize;
                    if p.len() >= 2 && p[p.len() - 2] == y {
                        continue;
                    }
                    let mut q = p.clone();
                    q.push(y);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    #[test]
    fn grade_sizes() {
        let k4 = complete(4).unwrap();
        let d = DirectedEdgeSpace::new(&k4, 3).unwrap();
        assert_eq!(d.len(1), 12);
        assert_eq!(d.len(2), 24);
        let c = cycle(9).unwrap();
        let d = DirectedEdgeSpace::new(&c, 6).unwrap();
        for k in 1..=6 {
            assert_eq!(d.len(k), 18);
        }
        let g = random_regular(30, 4, 2).unwrap();
        let d = DirectedEdgeSpace::new(&g, 4).unwrap();
        for k in 1..=4 {
            assert_eq!(d.len(k), 30 * 4 * 3usize.pow(k as u32 - 1));
        }
    }

    #[test]
    fn reverse_is_fixed_point_free_involution() {
        let d = DirectedEdgeSpace::new(&petersen(), 1).unwrap();
        for e in 0..d.edge_count() {
            assert_ne!(d.reverse(e), e);
            assert_eq!(d.reverse(d.reverse(e)), e);
            let (a, b) = d.edge(e);
            assert_eq!(d.edge(d.reverse(e)), (b, a));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = random_regular(20, 3, 1).unwrap();
        assert!(matches!(DirectedEdgeSpace::with_cap(&g, 5, 200), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn links_are_consistent() {
        let g = random_regular(12, 3, 4).unwrap();
        let d = DirectedEdgeSpace::new(&g, 5).unwrap();
        for k in 1..=5 {
            for p in 0..d.len(k) {
                let v = d.path_vertices(k, p);
                assert_eq!(d.path_vertices(k - 1, d.parent(k, p)), v[..k].to_vec());
                assert_eq!(d.path_vertices(k - 1, d.suffix(k, p)), v[1..].to_vec());
                assert_eq!(d.index_of(&v), Some(p));
            }
        }
        assert_eq!(d.index_of(&[0, 1, 0]), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn enumeration_matches_brute_force(seed in 0u64..1000, k in 1usize..5) {
            let g = random_regular(10, 3, seed).unwrap();
            let d = DirectedEdgeSpace::new(&g, k).unwrap();
            let mut ours: Vec<Vec<usize>> = d.enumerate_paths(k).unwrap().collect();
            let mut want = brute_paths(&g, k);
            ours.sort();
            want.sort();
            prop_assert_eq!(ours, want);
        }
    }
}
