//! Dense spectral computations on finite graphs and the non-backtracking matrix.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;

use crate::graph::Graph;
use crate::linalg::symmetric_eigen;
use crate::paths::DirectedEdgeSpace;
use crate::{Error, Result, C64};

/// Default largest order accepted by [`eigensystem`].
pub const DENSE_BUDGET: usize = 6000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OperatorKind {
    Adjacency,
    AdjacencyPlusPotential,
}

/// All eigenpairs of `H = A + W`, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub n: usize,
    pub values: Vec<f64>,
    vectors: Vec<f64>,
    pub kind: OperatorKind,
}

impl EigenSystem {
    /// Unit eigenvector `ψ_j`.
    pub fn vector(&self, j: usize) -> &[f64] {
        &self.vectors[j * self.n..(j + 1) * self.n]
    }

    /// Row-major storage, one eigenvector per row.
    pub fn vectors_row_major(&self) -> &[f64] {
        &self.vectors
    }

    /// Largest `‖Hψ_j − λ_jψ_j‖` over `j`.
    pub fn max_residual(&self, g: &Graph) -> f64 {
        (0..self.n)
            .map(|j| {
                let v = self.vector(j);
                let hv = g.apply_hamiltonian(v);
                hv.iter().zip(v).map(|(a, b)| (a - self.values[j] * b).powi(2)).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|ΨΨᵀ − I|` (O(N³)).
    pub fn max_gram_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.n {
            for k in 0..=j {
                let d: f64 = self.vector(j).iter().zip(self.vector(k)).map(|(a, b)| a * b).sum();
                let want = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((d - want).abs());
            }
        }
        worst
    }
}

pub fn eigensystem(g: &Graph) -> Result<EigenSystem> {
    eigensystem_with_budget(g, DENSE_BUDGET)
}

pub fn eigensystem_with_budget(g: &Graph, budget: usize) -> Result<EigenSystem> {
    let n = g.vertex_count();
    if n > budget {
        return Err(Error::BudgetExceeded { n, budget });
    }
    let es = symmetric_eigen(g.hamiltonian_dense(), n, true)?;
    let kind = if g.potential().is_some() { OperatorKind::AdjacencyPlusPotential } else { OperatorKind::Adjacency };
    Ok(EigenSystem { n, values: es.values, vectors: es.vectors, kind })
}

/// Eigenvalues of `A + W` only.
pub fn spectrum(g: &Graph) -> Result<Vec<f64>> {
    let n = g.vertex_count();
    if n > DENSE_BUDGET {
        return Err(Error::BudgetExceeded { n, budget: DENSE_BUDGET });
    }
    Ok(symmetric_eigen(g.hamiltonian_dense(), n, false)?.values)
}

/// Spectrum of the simple random walk and its gap.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpReport {
    /// `1 − max |μ|` over eigenvalues `μ ≠ 1` of `P`.
    pub beta: f64,
    /// `1 − max μ` over the same eigenvalues; diagnostic only.
    pub beta_one_sided: f64,
    /// Ascending eigenvalues of `P`.
    pub p_spectrum: Vec<f64>,
}

impl ExpReport {
    pub fn is_expander(&self, beta_min: f64) -> bool {
        self.beta >= beta_min
    }
}

/// Walk operator `P f(x) = d(x)⁻¹ Σ_{y∼x} f(y)`, diagonalised through the symmetric
/// `D^{-1/2} A D^{-1/2}`.
pub fn walk_spectral_gap(g: &Graph) -> Result<ExpReport> {
    let n = g.vertex_count();
    if n > DENSE_BUDGET {
        return Err(Error::BudgetExceeded { n, budget: DENSE_BUDGET });
    }
    if g.min_degree() == 0 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|x| 1.0 / (g.degree(x) as f64).sqrt()).collect();
    let mut s = vec![0.0; n * n];
    for x in 0..n {
        for &y in g.neighbours(x) {
            s[x * n + y as usize] = inv_sqrt[x] * inv_sqrt[y as usize];
        }
    }
    let mu = symmetric_eigen(s, n, false)?.values;
    let top = mu[n - 1];
    let ones = mu.iter().filter(|&&m| (m - 1.0).abs() < 1e-9).count();
    if ones != 1 || (top - 1.0).abs() > 1e-9 {
        return Err(Error::Disconnected);
    }
    let rest = &mu[..n - 1];
    let max_abs = rest.iter().fold(0.0f64, |a, m| a.max(m.abs()));
    let max_up = rest.iter().fold(f64::NEG_INFINITY, |a, &m| a.max(m));
    Ok(ExpReport { beta: 1.0 - max_abs, beta_one_sided: 1.0 - max_up, p_spectrum: mu })
}

/// `2√(D−1)/d` with `D`, `d` the largest and smallest degrees.
pub fn rho_p_bound(g: &Graph) -> f64 {
    let (dmax, dmin) = (g.max_degree() as f64, g.min_degree() as f64);
    2.0 * (dmax - 1.0).sqrt() / dmin
}

/// Dense non-backtracking matrix (row-major, `|B|×|B|`).
pub fn nb_matrix_dense(d: &DirectedEdgeSpace) -> Vec<f64> {
    let m = d.edge_count();
    let mut b = vec![0.0; m * m];
    for e in 0..m {
        for s in d.successors(e) {
            b[e * m + s] = 1.0;
        }
    }
    b
}

/// `(ℬf)(x0,x1) = Σ_{x2 ∈ N(x1)∖{x0}} f(x1,x2)`.
pub fn nb_apply(d: &DirectedEdgeSpace, f: &[C64]) -> Vec<C64> {
    (0..d.edge_count()).map(|e| d.successors(e).map(|s| f[s]).sum()).collect()
}

/// `(ℬ*f)(x0,x1) = Σ_{x_{-1} ∈ N(x0)∖{x1}} f(x_{-1},x0)`.
pub fn nb_adjoint_apply(d: &DirectedEdgeSpace, f: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); d.edge_count()];
    for e in 0..d.edge_count() {
        for s in d.successors(e) {
            out[s] += f[e];
        }
    }
    out
}

/// `(τ₊ψ)(x0,x1) = ψ(x1)`.
pub fn tau_plus(d: &DirectedEdgeSpace, psi: &[f64]) -> Vec<f64> {
    (0..d.edge_count()).map(|e| psi[d.head(e)]).collect()
}

/// `(τ₋ψ)(x0,x1) = ψ(x0)`.
pub fn tau_minus(d: &DirectedEdgeSpace, psi: &[f64]) -> Vec<f64> {
    (0..d.edge_count()).map(|e| psi[d.tail(e)]).collect()
}

fn to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Residual norms of
/// `ℬτ₋ψ = qτ₊ψ`, `ℬτ₊ψ = λτ₊ψ − τ₋ψ`, `ℬ*τ₋ψ = λτ₋ψ − τ₊ψ`, `ℬ*τ₊ψ = qτ₋ψ`.
pub fn check_ultra(d: &DirectedEdgeSpace, psi: &[f64], lambda: f64) -> Result<[f64; 4]> {
    let q = d.graph().regular_degree().ok_or(Error::NotRegular)? as f64 - 1.0;
    if psi.len() != d.vertex_count() {
        return Err(Error::DimensionMismatch { expected: d.vertex_count(), got: psi.len() });
    }
    let tp = to_complex(&tau_plus(d, psi));
    let tm = to_complex(&tau_minus(d, psi));
    let lin = |a: f64, x: &[C64], b: f64, y: &[C64]| -> Vec<C64> {
        x.iter().zip(y).map(|(u, v)| u * a + v * b).collect()
    };
    Ok([
        diff_norm(&nb_apply(d, &tm), &lin(q, &tp, 0.0, &tm)),
        diff_norm(&nb_apply(d, &tp), &lin(lambda, &tp, -1.0, &tm)),
        diff_norm(&nb_adjoint_apply(d, &tm), &lin(lambda, &tm, -1.0, &tp)),
        diff_norm(&nb_adjoint_apply(d, &tp), &lin(q, &tm, 0.0, &tp)),
    ])
}

/// Roots of `qε² − λε + 1 = 0`.
pub fn nb_roots(q: f64, lambda: f64) -> [C64; 2] {
    let disc = C64::new(lambda * lambda - 4.0 * q, 0.0).sqrt();
    let l = C64::new(lambda, 0.0);
    [(l + disc) / (2.0 * q), (l - disc) / (2.0 * q)]
}

/// One non-backtracking eigenvector built from an adjacency eigenpair.
#[derive(Debug, Clone)]
pub struct LiftedEigenvector {
    /// Root `ε` of `qε² − λε + 1 = 0`; the ℬ-eigenvalue is `1/ε`.
    pub epsilon: C64,
    /// `τ₊ψ − ε τ₋ψ`.
    pub vector: Vec<C64>,
    /// `‖ℬv − ε⁻¹v‖`.
    pub residual: f64,
}

/// Both lifts `τ₊ψ − ετ₋ψ` of an adjacency eigenpair of a regular graph.
pub fn nb_eigvec_from_adjacency(d: &DirectedEdgeSpace, psi: &[f64], lambda: f64) -> Result<[LiftedEigenvector; 2]> {
    let q = d.graph().regular_degree().ok_or(Error::NotRegular)? as f64 - 1.0;
    let tp = tau_plus(d, psi);
    let tm = tau_minus(d, psi);
    let build = |eps: C64| {
        let v: Vec<C64> = tp.iter().zip(&tm).map(|(&a, &b)| C64::new(a, 0.0) - eps * b).collect();
        let bv = nb_apply(d, &v);
        let inv = eps.inv();
        let scaled: Vec<C64> = v.iter().map(|x| x * inv).collect();
        LiftedEigenvector { epsilon: eps, residual: diff_norm(&bv, &scaled), vector: v }
    };
    let [a, b] = nb_roots(q, lambda);
    Ok([build(a), build(b)])
}
