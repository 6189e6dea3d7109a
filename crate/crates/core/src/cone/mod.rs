//! Trees of finite cone type.
//!
//! A [`ConeSystem`] is a cone matrix `M` (a vertex of label `k` has `M[k][l]`
//! children of label `l`), a potential per label and a law on root types. The
//! Green fixed point `ζ_j(γ)` solves `ζ_j (Σ_k M_jk ζ_k − (γ − W_j)) + 1 = 0`
//! on the physical branch `Im ζ_j < 0`; see [`solve_green`].

use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::{Error, Result};

mod closed;
mod cover;
mod solve;

pub use closed::*;
pub use cover::*;
pub use solve::*;

/// A possible root of the tree: its weight under the root law, its potential and
/// its children as `(label, count)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RootType {
    pub weight: f64,
    pub potential: f64,
    pub children: Vec<(usize, u32)>,
}

impl RootType {
    pub fn degree(&self) -> u32 {
        self.children.iter().map(|c| c.1).sum()
    }
}

/// Cone matrix with labels, per-label potential and root law.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConeSystem {
    labels: Vec<String>,
    /// Sparse rows: `(column, count)` with positive counts, sorted by column.
    rows: Vec<Vec<(usize, u32)>>,
    potential: Vec<f64>,
    root_label: usize,
    roots: Vec<RootType>,
}

impl ConeSystem {
    /// System from a dense square matrix. The root law is a point mass on
    /// `root_label`; all potentials are zero.
    pub fn from_dense(matrix: &[Vec<u32>], root_label: usize) -> Result<Self> {
        let m = matrix.len();
        if m == 0 {
            return Err(Error::InvalidParameter("empty cone matrix".into()));
        }
        if let Some(r) = matrix.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, got: r.len() });
        }
        let rows: Vec<Vec<(usize, u32)>> = matrix
            .iter()
            .map(|r| r.iter().enumerate().filter(|e| *e.1 > 0).map(|(k, &c)| (k, c)).collect())
            .collect();
        Self::from_rows(rows, root_label)
    }

    /// Same as [`from_dense`](Self::from_dense) with sparse rows.
    pub fn from_rows(rows: Vec<Vec<(usize, u32)>>, root_label: usize) -> Result<Self> {
        let m = rows.len();
        if root_label >= m {
            return Err(Error::InvalidParameter(format!("root label {root_label} outside 0..{m}")));
        }
        let rows: Vec<Vec<(usize, u32)>> = rows.into_iter().map(|r| merge_counts(r, m)).collect::<Result<_>>()?;
        let root = RootType { weight: 1.0, potential: 0.0, children: rows[root_label].clone() };
        let labels = (0..m).map(|j| if j == root_label { "root".into() } else { format!("c{j}") }).collect();
        Ok(Self { labels, rows, potential: vec![0.0; m], root_label, roots: vec![root] })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.label_count() {
            return Err(Error::DimensionMismatch { expected: self.label_count(), got: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Sets the potential per label. Root types that mirror the root label pick up
    /// its value.
    pub fn with_potential(mut self, w: Vec<f64>) -> Result<Self> {
        if w.len() != self.label_count() {
            return Err(Error::DimensionMismatch { expected: self.label_count(), got: w.len() });
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("potential values must be finite".into()));
        }
        for r in &mut self.roots {
            if r.children == self.rows[self.root_label] && r.potential == self.potential[self.root_label] {
                r.potential = w[self.root_label];
            }
        }
        self.potential = w;
        Ok(self)
    }

    /// Replaces the root law. Weights must be non-negative and sum to 1.
    pub fn with_roots(mut self, roots: Vec<RootType>) -> Result<Self> {
        let m = self.label_count();
        if roots.is_empty() {
            return Err(Error::InvalidParameter("root law needs at least one root type".into()));
        }
        let mut total = 0.0;
        let mut checked = Vec::with_capacity(roots.len());
        for r in roots {
            if !(r.weight >= 0.0) || !r.potential.is_finite() {
                return Err(Error::InvalidParameter("root weights must be non-negative".into()));
            }
            total += r.weight;
            checked.push(RootType { children: merge_counts(r.children, m)?, ..r });
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("root weights sum to {total}, not 1")));
        }
        self.roots = checked;
        Ok(self)
    }

    pub fn label_count(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, j: usize) -> &[(usize, u32)] {
        &self.rows[j]
    }

    pub fn entry(&self, j: usize, k: usize) -> u32 {
        self.rows[j].iter().find(|e| e.0 == k).map_or(0, |e| e.1)
    }

    pub fn dense_matrix(&self) -> Vec<Vec<u32>> {
        self.rows
            .iter()
            .map(|r| {
                let mut d = vec![0; self.label_count()];
                r.iter().for_each(|&(k, c)| d[k] = c);
                d
            })
            .collect()
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn root_label(&self) -> usize {
        self.root_label
    }

    pub fn roots(&self) -> &[RootType] {
        &self.roots
    }

    /// Largest number of neighbours of any vertex (children plus parent).
    pub fn max_degree(&self) -> u32 {
        let inner = self.rows.iter().map(|r| r.iter().map(|e| e.1).sum::<u32>() + 1).max().unwrap_or(0);
        inner.max(self.roots.iter().map(RootType::degree).max().unwrap_or(0))
    }

    /// `max |W|` over labels and root types.
    pub fn potential_bound(&self) -> f64 {
        self.potential.iter().chain(self.roots.iter().map(|r| &r.potential)).fold(0.0, |a, w| a.max(w.abs()))
    }

    /// Expected number of neighbours of the root.
    pub fn expected_root_degree(&self) -> f64 {
        self.roots.iter().map(|r| r.weight * r.degree() as f64).sum()
    }

    pub fn c1(&self) -> C1Report {
        check_c1(&self.dense_matrix())
    }

    pub fn c2(&self) -> C2Report {
        check_c2(&self.dense_matrix())
    }
}

fn merge_counts(mut r: Vec<(usize, u32)>, m: usize) -> Result<Vec<(usize, u32)>> {
    if let Some(&(k, _)) = r.iter().find(|e| e.0 >= m) {
        return Err(Error::InvalidParameter(format!("label {k} outside 0..{m}")));
    }
    r.sort_unstable();
    let mut out: Vec<(usize, u32)> = Vec::with_capacity(r.len());
    for (k, c) in r {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += c,
            _ if c > 0 => out.push((k, c)),
            _ => {}
        }
    }
    Ok(out)
}

/// Outcome of [`check_c1`]. Label 0 plays the role of the distinguished root cone.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct C1Report {
    pub holds: bool,
    pub root_self_loop: bool,
    pub root_has_children: bool,
    /// Pairs `(k, l)` of non-root labels with `(Mⁿ)_{kl} = 0` for every `n ≥ 1`.
    pub failing_pairs: Vec<(usize, usize)>,
    /// Largest over pairs of the least `n` with `(Mⁿ)_{kl} ≥ 1`.
    pub max_pair_power: Option<usize>,
    /// Least `n ≤ m²` with `(Mⁿ)_{kl} ≥ 1` for all non-root `k, l` at once
    /// (only computed for `m ≤ 64`).
    pub uniform_power: Option<usize>,
}

/// `M_{00} = 0`, some `M_{0k} > 0`, and every non-root label reaches every
/// non-root label.
pub fn check_c1(m: &[Vec<u32>]) -> C1Report {
    let n = m.len();
    let root_self_loop = n > 0 && m[0][0] != 0;
    let root_has_children = n > 0 && m[0].iter().any(|&c| c > 0);
    let adj: Vec<Vec<usize>> = m.iter().map(|r| (0..n).filter(|&k| r[k] > 0).collect()).collect();
    let mut failing_pairs = Vec::new();
    let mut max_pair = 0;
    for k in 1..n {
        // Shortest walk of length ≥ 1 from k to each label.
        let mut dist = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &l in &adj[k] {
            if dist[l] == usize::MAX {
                dist[l] = 1;
                queue.push_back(l);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &l in &adj[u] {
                if dist[l] == usize::MAX {
                    dist[l] = dist[u] + 1;
                    queue.push_back(l);
                }
            }
        }
        for (l, &d) in dist.iter().enumerate().skip(1) {
            if d == usize::MAX {
                failing_pairs.push((k, l));
            } else {
                max_pair = max_pair.max(d);
            }
        }
    }
    let uniform_power = if failing_pairs.is_empty() && n > 1 && n <= 64 { uniform_power(&adj) } else { None };
    C1Report {
        holds: !root_self_loop && root_has_children && failing_pairs.is_empty(),
        root_self_loop,
        root_has_children,
        max_pair_power: (failing_pairs.is_empty() && n > 1).then_some(max_pair),
        failing_pairs,
        uniform_power,
    }
}

fn uniform_power(adj: &[Vec<usize>]) -> Option<usize> {
    let n = adj.len();
    let mut reach: Vec<u64> = (0..n).map(|k| adj[k].iter().fold(0u64, |b, &l| b | 1 << l)).collect();
    let step = reach.clone();
    let mask: u64 = (1..n).fold(0, |b, l| b | 1 << l);
    for p in 1..=n * n {
        if (1..n).all(|k| reach[k] & mask == mask) {
            return Some(p);
        }
        reach = reach
            .iter()
            .map(|&r| (0..n).filter(|&u| r >> u & 1 == 1).fold(0u64, |b, u| b | step[u]))
            .collect();
    }
    None
}

/// Outcome of [`check_c2`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct C2Report {
    pub holds: bool,
    /// For each label `k`, a child label `k'` whose support contains that of `k`.
    pub witnesses: Vec<Option<usize>>,
    pub failing_labels: Vec<usize>,
}

/// Every label `k` has a child label `k'` with `M_{kl} ≥ 1 ⇒ M_{k'l} ≥ 1`.
pub fn check_c2(m: &[Vec<u32>]) -> C2Report {
    let n = m.len();
    let witnesses: Vec<Option<usize>> = (0..n)
        .map(|k| (0..n).find(|&kp| m[k][kp] >= 1 && (0..n).all(|l| m[k][l] == 0 || m[kp][l] >= 1)))
        .collect();
    let failing_labels: Vec<usize> = (0..n).filter(|&k| witnesses[k].is_none()).collect();
    C2Report { holds: failing_labels.is_empty(), witnesses, failing_labels }
}

/// Unimodular colour weights `π` with `π_i A_ij = π_j A_ji`.
pub fn unimodular_weights(a: &[Vec<u32>]) -> Result<Vec<f64>> {
    let n = a.len();
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("neighbour matrix must be square and non-empty".into()));
    }
    for i in 0..n {
        if a[i].iter().all(|&c| c == 0) {
            return Err(Error::InvalidParameter(format!("colour {i} has no neighbours")));
        }
        for j in 0..n {
            if (a[i][j] > 0) != (a[j][i] > 0) {
                return Err(Error::Unimodularity(format!("A[{i}][{j}] and A[{j}][{i}] disagree on adjacency")));
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    let mut queue = VecDeque::from([0usize]);
    let mut seen = vec![false; n];
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if a[i][j] > 0 && !seen[j] {
                seen[j] = true;
                pi[j] = pi[i] * a[i][j] as f64 / a[j][i] as f64;
                queue.push_back(j);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::InvalidParameter("colour graph is disconnected".into()));
    }
    for i in 0..n {
        for j in 0..n {
            let (l, r) = (pi[i] * a[i][j] as f64, pi[j] * a[j][i] as f64);
            if (l - r).abs() > 1e-12 * l.max(r) {
                return Err(Error::Unimodularity(format!("balance fails between colours {i} and {j}")));
            }
        }
    }
    let s: f64 = pi.iter().sum();
    Ok(pi.iter().map(|p| p / s).collect())
}

/// Cone system of the coloured tree in which a vertex of colour `i` has
/// `A[i][j]` neighbours of colour `j`, rooted at colour `root_colour`.
///
/// Label 0 is the root; label `1 + j·n + i` is a colour-`j` vertex whose parent
/// has colour `i`. Labels that cannot occur are dropped. Root types carry the
/// unimodular weights from [`unimodular_weights`].
pub fn neighbour_to_cone(a: &[Vec<u32>], root_colour: usize) -> Result<ConeSystem> {
    let n = a.len();
    let pi = unimodular_weights(a)?;
    if root_colour >= n {
        return Err(Error::InvalidParameter(format!("root colour {root_colour} outside 0..{n}")));
    }
    let full = 1 + n * n;
    let label = |parent: usize, child: usize| 1 + child * n + parent;
    let children_of = |colour: usize, parent: Option<usize>| -> Vec<(usize, u32)> {
        (0..n)
            .filter_map(|k| {
                let c = a[colour][k] - u32::from(parent == Some(k));
                (c > 0).then(|| (label(colour, k), c))
            })
            .collect()
    };
    let mut rows: Vec<Vec<(usize, u32)>> = vec![Vec::new(); full];
    rows[0] = children_of(root_colour, None);
    for child in 0..n {
        for parent in 0..n {
            if a[parent][child] > 0 {
                rows[label(parent, child)] = children_of(child, Some(parent));
            }
        }
    }
    let roots: Vec<(usize, Vec<(usize, u32)>)> = (0..n).map(|i| (i, children_of(i, None))).collect();
    // Keep labels reachable from any root type.
    let mut keep = vec![false; full];
    keep[0] = true;
    let mut queue: VecDeque<usize> = roots.iter().flat_map(|r| r.1.iter().map(|e| e.0)).collect();
    while let Some(l) = queue.pop_front() {
        if !keep[l] {
            keep[l] = true;
            queue.extend(rows[l].iter().map(|e| e.0));
        }
    }
    let mut index = vec![usize::MAX; full];
    let mut names = Vec::new();
    for (l, _) in keep.iter().enumerate().filter(|k| *k.1) {
        index[l] = names.len();
        names.push(if l == 0 { String::from("root") } else { format!("{}>{}", (l - 1) % n, (l - 1) / n) });
    }
    let remap = |r: &[(usize, u32)]| r.iter().map(|&(k, c)| (index[k], c)).collect::<Vec<_>>();
    let new_rows: Vec<Vec<(usize, u32)>> = (0..full).filter(|&l| keep[l]).map(|l| remap(&rows[l])).collect();
    let root_types = roots
        .iter()
        .filter(|(i, _)| pi[*i] > 0.0)
        .map(|(i, ch)| RootType { weight: pi[*i], potential: 0.0, children: remap(ch) })
        .collect();
    ConeSystem::from_rows(new_rows, 0)?.with_labels(names)?.with_roots(root_types)
}

/// Cone system of the universal cover of `g0`, labels merged by cone isomorphism.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoverCone {
    pub system: ConeSystem,
    /// Label of the cone at `v` entered from `u`, per directed edge `(u, v)`.
    pub edge_label: Vec<usize>,
    /// Label count before merging isomorphic cones (`1 + |B|`).
    pub raw_label_count: usize,
}

/// Cone system of the universal cover of `g0` with root law uniform over base
/// vertices. Directed edges become labels; label 0 is the cone at vertex 0.
/// Labels with isomorphic cones (same potential and same children up to
/// isomorphism) are merged.
pub fn cover_cone_matrix(g0: &Graph) -> Result<CoverCone> {
    if !g0.is_connected() {
        return Err(Error::Disconnected);
    }
    if g0.min_degree() < 2 {
        return Err(Error::InvalidParameter("base graph has a vertex of degree < 2".into()));
    }
    if g0.is_cycle() {
        return Err(Error::InvalidParameter("cycles have a non-irreducible non-backtracking operator".into()));
    }
    let n = g0.vertex_count();
    let off = g0.offsets();
    let tg = g0.targets();
    let b = tg.len();
    let tail: Vec<usize> = (0..n).flat_map(|x| core::iter::repeat_n(x, g0.degree(x))).collect();
    // Raw labels: 0 = root at vertex 0, 1 + e = edge e.
    let succ = |e: usize| {
        let (u, v) = (tail[e], tg[e] as usize);
        (off[v]..off[v + 1]).filter(move |&f| tg[f] as usize != u)
    };
    let mut raw_rows: Vec<Vec<usize>> = Vec::with_capacity(b + 1);
    raw_rows.push((off[0]..off[1]).map(|f| 1 + f).collect());
    raw_rows.extend((0..b).map(|e| succ(e).map(|f| 1 + f).collect()));
    let mut raw_pot = vec![g0.potential_at(0)];
    raw_pot.extend((0..b).map(|e| g0.potential_at(tg[e] as usize)));
    let class = refine(&raw_rows, &raw_pot);
    let m = class.iter().max().map_or(0, |c| c + 1);
    let mut rows: Vec<Option<Vec<(usize, u32)>>> = vec![None; m];
    let mut pot = vec![0.0; m];
    let mut rep = vec![usize::MAX; m];
    for (l, &c) in class.iter().enumerate() {
        if rows[c].is_none() {
            rows[c] = Some(raw_rows[l].iter().map(|&k| (class[k], 1)).collect());
            pot[c] = raw_pot[l];
            rep[c] = l;
        }
    }
    let rows: Vec<Vec<(usize, u32)>> = rows.into_iter().map(|r| r.unwrap_or_default()).collect();
    let roots = (0..n)
        .map(|x| RootType {
            weight: 1.0 / n as f64,
            potential: g0.potential_at(x),
            children: (off[x]..off[x + 1]).map(|f| (class[1 + f], 1)).collect(),
        })
        .collect();
    let names = rep
        .iter()
        .map(|&l| if l == 0 { String::from("root") } else { format!("{}>{}", tail[l - 1], tg[l - 1]) })
        .collect();
    let system = ConeSystem::from_rows(rows, 0)?.with_labels(names)?.with_potential(pot)?.with_roots(roots)?;
    Ok(CoverCone { system, edge_label: (0..b).map(|e| class[1 + e]).collect(), raw_label_count: b + 1 })
}

/// Coarsest partition of labels stable under "same potential, same multiset of
/// child classes", with label 0 kept alone. Classes are numbered by first
/// occurrence, so label 0 gets class 0.
fn refine(rows: &[Vec<usize>], pot: &[f64]) -> Vec<usize> {
    let m = rows.len();
    let mut class: Vec<usize> = {
        let mut ids: BTreeMap<(bool, u64), usize> = BTreeMap::new();
        (0..m)
            .map(|l| {
                let next = ids.len();
                *ids.entry((l != 0, pot[l].to_bits())).or_insert(next)
            })
            .collect()
    };
    let mut count = class.iter().max().map_or(0, |c| c + 1);
    loop {
        let mut ids: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let next: Vec<usize> = (0..m)
            .map(|l| {
                let mut sig: Vec<usize> = rows[l].iter().map(|&k| class[k]).collect();
                sig.sort_unstable();
                let fresh = ids.len();
                *ids.entry((class[l], sig)).or_insert(fresh)
            })
            .collect();
        let new_count = ids.len();
        class = next;
        if new_count == count {
            return class;
        }
        count = new_count;
    }
}
