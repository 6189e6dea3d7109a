//! Green functions of universal covers, the truncated-tree oracle and the
//! spectral weights `Φ_γ`.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{cover_cone_matrix, solve_green, CoverCone, GreenState};
use crate::graph::Graph;
use crate::kernels::BoundedKernel;
use crate::{Error, Result, C64};

/// Solved Green data on the universal cover of a finite graph.
#[derive(Debug, Clone)]
pub struct CoverGreen {
    graph: Graph,
    cone: CoverCone,
    state: GreenState,
    zeta: Vec<C64>,
    diagonal: Vec<C64>,
}

impl CoverGreen {
    pub fn solve(g0: &Graph, gamma: C64) -> Result<Self> {
        let cone = cover_cone_matrix(g0)?;
        let state = solve_green(&cone.system, gamma)?;
        Ok(Self::from_state(g0, cone, state))
    }

    /// Wraps an already solved state of `cone`.
    pub fn from_state(g0: &Graph, cone: CoverCone, state: GreenState) -> Self {
        let zeta: Vec<C64> = cone.edge_label.iter().map(|&l| state.zeta[l]).collect();
        let diagonal = (0..g0.vertex_count()).map(|x| state.root_green(&cone.system, x)).collect();
        Self { graph: g0.clone(), cone, state, zeta, diagonal }
    }

    pub fn gamma(&self) -> C64 {
        self.state.gamma
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn cone(&self) -> &CoverCone {
        &self.cone
    }

    pub fn state(&self) -> &GreenState {
        &self.state
    }

    /// `ζ_u(v)` per directed edge `(u, v)`, in CSR slot order.
    pub fn edge_zeta(&self) -> &[C64] {
        &self.zeta
    }

    /// `G(x̃, x̃)` per base vertex.
    pub fn diagonal(&self) -> &[C64] {
        &self.diagonal
    }

    /// `G(x̃₀, x̃_k)` for the lift of a non-backtracking walk `x₀ … x_k`:
    /// `G(x̃₀,x̃₀) Π ζ_{x_{i−1}}(x_i)`.
    pub fn along(&self, path: &[usize]) -> Result<C64> {
        let first = *path.first().ok_or_else(|| Error::InvalidParameter("empty path".into()))?;
        check_walk(&self.graph, path)?;
        Ok(path.windows(2).fold(self.diagonal[first], |g, w| g * self.zeta[self.graph.slot(w[0], w[1]).expect("checked")]))
    }

    /// `G(x̃, ỹ)` for lifts at distance `d(x, y)`, along the geodesic of
    /// [`Graph::shortest_path`].
    pub fn between(&self, x: usize, y: usize) -> Result<C64> {
        let n = self.graph.vertex_count();
        for v in [x, y] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
        }
        self.along(&self.graph.shortest_path(x, y).ok_or(Error::Disconnected)?)
    }
}

fn check_walk(g: &Graph, path: &[usize]) -> Result<()> {
    let n = g.vertex_count();
    if let Some(&v) = path.iter().find(|&&v| v >= n) {
        return Err(Error::VertexOutOfRange { vertex: v, n });
    }
    if let Some(w) = path.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
        return Err(Error::InvalidParameter(format!("{} and {} are not adjacent", w[0], w[1])));
    }
    if path.windows(3).any(|w| w[0] == w[2]) {
        return Err(Error::InvalidParameter("walk backtracks".into()));
    }
    Ok(())
}

/// `G(x̃, ỹ; γ)` on the universal cover of `g0` for lifts at distance `d(x, y)`.
pub fn green_on_cover(g0: &Graph, gamma: C64, x: usize, y: usize) -> Result<C64> {
    CoverGreen::solve(g0, gamma)?.between(x, y)
}

/// Green function of the ball of radius `depth` around `x̃₀` in the universal
/// cover, with Dirichlet cut-off outside the ball, evaluated at `(x̃₀, x̃_k)` for
/// the lift of the walk `path = x₀ … x_k`.
///
/// The ball is a finite tree, so its resolvent is obtained exactly by leaf-to-root
/// elimination. Subtrees only depend on the entering edge and the remaining depth,
/// so the work is `depth·|B|` rather than the size of the ball.
pub fn truncated_cover_green(g0: &Graph, gamma: C64, path: &[usize], depth: usize) -> Result<C64> {
    if !(gamma.im > 0.0) {
        return Err(Error::NonPositiveImaginary(gamma.im));
    }
    check_walk(g0, path)?;
    if path.is_empty() {
        return Err(Error::InvalidParameter("empty path".into()));
    }
    let k = path.len() - 1;
    if depth < k {
        return Err(Error::InvalidParameter(format!("path of length {k} leaves the ball of radius {depth}")));
    }
    let off = g0.offsets();
    let tg = g0.targets();
    let b = tg.len();
    let tail: Vec<usize> = (0..g0.vertex_count()).flat_map(|x| core::iter::repeat_n(x, g0.degree(x))).collect();
    // levels[r][e]: ζ of the cone at head(e) entered along e, truncated r levels below head(e).
    let mut levels: Vec<Vec<C64>> = Vec::with_capacity(depth);
    levels.push((0..b).map(|e| 1.0 / (gamma - g0.potential_at(tg[e] as usize))).collect());
    for r in 1..depth {
        let prev = &levels[r - 1];
        let next = (0..b)
            .map(|e| {
                let (u, v) = (tail[e], tg[e] as usize);
                let s: C64 = (off[v]..off[v + 1]).filter(|&f| tg[f] as usize != u).map(|f| prev[f]).sum();
                1.0 / (gamma - g0.potential_at(v) - s)
            })
            .collect();
        levels.push(next);
    }
    let x0 = path[0];
    let root = if depth == 0 {
        -1.0 / (gamma - g0.potential_at(x0))
    } else {
        let s: C64 = (off[x0]..off[x0 + 1]).map(|f| levels[depth - 1][f]).sum();
        -1.0 / (gamma - g0.potential_at(x0) - s)
    };
    Ok(path
        .windows(2)
        .enumerate()
        .fold(root, |g, (i, w)| g * levels[depth - 1 - i][g0.slot(w[0], w[1]).expect("checked")]))
}

/// `Φ_γ(x, y) = Im G(x̃,ỹ) / Σ_z Im G(z̃,z̃)` for all pairs with `d(x, y) ≤ r`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhiWeights {
    pub n: usize,
    pub range: usize,
    /// `(x, y, Φ(x,y))` sorted by `(x, y)`.
    pub entries: Vec<(usize, usize, f64)>,
    pub denominator: f64,
}

impl PhiWeights {
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        self.entries.iter().filter(|e| e.0 == e.1).for_each(|e| d[e.0] = e.2);
        d
    }

    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.entries.binary_search_by(|e| (e.0, e.1).cmp(&(x, y))).ok().map(|i| self.entries[i].2)
    }
}

/// `Σ_x Im G(x̃, x̃)`; positive for `Im γ > 0`.
pub fn phi_denominator(cg: &CoverGreen) -> Result<f64> {
    let d: f64 = cg.diagonal().iter().map(|z| z.im).sum();
    if !(d > 0.0) {
        return Err(Error::ZeroImaginaryPart(format!("Σ Im G(x,x) = {d}")));
    }
    Ok(d)
}

/// Weights for every pair at distance at most `range`, each lifted along a BFS geodesic.
pub fn phi_weights_from(cg: &CoverGreen, range: usize) -> Result<PhiWeights> {
    let g = cg.graph();
    let n = g.vertex_count();
    let den = phi_denominator(cg)?;
    let mut entries = Vec::new();
    let mut dist = vec![usize::MAX; n];
    let mut val = vec![C64::new(0.0, 0.0); n];
    for x in 0..n {
        let mut seen = vec![x];
        dist[x] = 0;
        val[x] = cg.diagonal()[x];
        let mut queue = VecDeque::from([x]);
        while let Some(u) = queue.pop_front() {
            if dist[u] == range {
                continue;
            }
            for (slot, &w) in (g.offsets()[u]..).zip(g.neighbours(u)) {
                let w = w as usize;
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    val[w] = val[u] * cg.edge_zeta()[slot];
                    seen.push(w);
                    queue.push_back(w);
                }
            }
        }
        seen.sort_unstable();
        for &y in &seen {
            entries.push((x, y, val[y].im / den));
            dist[y] = usize::MAX;
        }
    }
    Ok(PhiWeights { n, range, entries, denominator: den })
}

/// [`phi_weights_from`] after solving the cover at `γ`.
pub fn phi_weights(g: &Graph, gamma: C64, range: usize) -> Result<PhiWeights> {
    phi_weights_from(&CoverGreen::solve(g, gamma)?, range)
}

/// `⟨K⟩_γ = Σ_{x,y} K(x,y) Φ_γ(x,y)`.
pub fn kbar_from(cg: &CoverGreen, kernel: &BoundedKernel) -> Result<C64> {
    let g = cg.graph();
    if kernel.n != g.vertex_count() {
        return Err(Error::DimensionMismatch { expected: g.vertex_count(), got: kernel.n });
    }
    let den = phi_denominator(cg)?;
    let mut s = C64::new(0.0, 0.0);
    for &(x, y, k) in &kernel.entries {
        let gxy = if x == y { cg.diagonal()[x] } else { cg.between(x, y)? };
        s += k * (gxy.im / den);
    }
    Ok(s)
}

pub fn kbar(g: &Graph, kernel: &BoundedKernel, gamma: C64) -> Result<C64> {
    kbar_from(&CoverGreen::solve(g, gamma)?, kernel)
}
