//! The vertex operator `K_G`, the edge operator `K_B` and the norms relating them.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;

use super::{inner, NbKernel, ZERO};
use crate::graph::bst_statistic;
use crate::paths::DirectedEdgeSpace;
use crate::{Error, Result, C64};

/// Sparse `K_G`: merged `(x, y, K_G(x,y))` triplets sorted by `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KgMatrix {
    n: usize,
    entries: Vec<(u32, u32, C64)>,
}

impl KgMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(u32, u32, C64)] {
        &self.entries
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut m = vec![ZERO; self.n * self.n];
        for &(x, y, v) in &self.entries {
            m[x as usize * self.n + y as usize] = v;
        }
        m
    }

    pub fn apply(&self, psi: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.n];
        for &(x, y, v) in &self.entries {
            out[x as usize] += v * psi[y as usize];
        }
        out
    }

    /// `⟨ψ, K_G ψ⟩` for real `ψ`.
    pub fn real_form(&self, psi: &[f64]) -> C64 {
        self.entries.iter().map(|&(x, y, v)| v * (psi[x as usize] * psi[y as usize])).sum()
    }

    /// `‖K_G‖_HSN = ((1/N) Σ |K_G(x,y)|²)^{1/2}`.
    pub fn hsn_norm(&self) -> f64 {
        (self.entries.iter().map(|e| e.2.norm_sqr()).sum::<f64>() / self.n as f64).sqrt()
    }
}

/// Assembles `K_G(x,y) = Σ K(x0;xk)` over paths with `x0 = x`, `xk = y`, all grades.
pub fn kg_matrix(d: &DirectedEdgeSpace, k: &NbKernel) -> Result<KgMatrix> {
    k.check(d)?;
    let mut raw: Vec<(u32, u32, C64)> = Vec::new();
    for (j, v) in k.grades() {
        raw.extend(v.iter().enumerate().map(|(p, &z)| (d.first_vertex(j, p) as u32, d.last_vertex(j, p) as u32, z)));
    }
    raw.sort_unstable_by_key(|e| (e.0, e.1));
    let mut entries: Vec<(u32, u32, C64)> = Vec::with_capacity(raw.len());
    for (x, y, z) in raw {
        match entries.last_mut() {
            Some(last) if last.0 == x && last.1 == y => last.2 += z,
            _ => entries.push((x, y, z)),
        }
    }
    Ok(KgMatrix { n: d.vertex_count(), entries })
}

/// `⟨φ, K_G ψ⟩ = Σ_j Σ_{B_j} conj(φ(x0)) K(x0;xj) ψ(xj)`, summed path by path.
pub fn kg_form(d: &DirectedEdgeSpace, k: &NbKernel, phi: &[C64], psi: &[C64]) -> Result<C64> {
    k.check(d)?;
    check_vertex_vec(d, phi)?;
    check_vertex_vec(d, psi)?;
    let mut s = ZERO;
    for (j, v) in k.grades() {
        for (p, &z) in v.iter().enumerate() {
            s += phi[d.first_vertex(j, p)].conj() * z * psi[d.last_vertex(j, p)];
        }
    }
    Ok(s)
}

/// `K_G ψ`.
pub fn kg_apply(d: &DirectedEdgeSpace, k: &NbKernel, psi: &[C64]) -> Result<Vec<C64>> {
    k.check(d)?;
    check_vertex_vec(d, psi)?;
    let mut out = vec![ZERO; d.vertex_count()];
    for (j, v) in k.grades() {
        for (p, &z) in v.iter().enumerate() {
            out[d.first_vertex(j, p)] += z * psi[d.last_vertex(j, p)];
        }
    }
    Ok(out)
}

fn check_vertex_vec(d: &DirectedEdgeSpace, v: &[C64]) -> Result<()> {
    if v.len() != d.vertex_count() {
        return Err(Error::DimensionMismatch { expected: d.vertex_count(), got: v.len() });
    }
    Ok(())
}

fn check_edge_vec(d: &DirectedEdgeSpace, v: &[C64]) -> Result<()> {
    if v.len() != d.edge_count() {
        return Err(Error::DimensionMismatch { expected: d.edge_count(), got: v.len() });
    }
    Ok(())
}

/// `(K_B g)(e) = Σ_{paths with first edge e} K(x0;xk) g(x_{k−1},x_k)`.
pub fn kb_apply(d: &DirectedEdgeSpace, k: &NbKernel, g: &[C64]) -> Result<Vec<C64>> {
    k.check(d)?;
    check_edge_vec(d, g)?;
    if k.grade(0).is_some() {
        return Err(Error::KernelContract("K_B is undefined on grade 0".into()));
    }
    let mut out = vec![ZERO; d.edge_count()];
    for (j, v) in k.grades() {
        for (p, &z) in v.iter().enumerate() {
            out[d.first_edge(j, p)] += z * g[d.last_edge(j, p)];
        }
    }
    Ok(out)
}

/// `⟨f, K_B g⟩`.
pub fn kb_form(d: &DirectedEdgeSpace, k: &NbKernel, f: &[C64], g: &[C64]) -> Result<C64> {
    check_edge_vec(d, f)?;
    Ok(inner(f, &kb_apply(d, k, g)?))
}

/// The three norms of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Norms {
    /// `‖K‖_ℋ`.
    pub h: f64,
    /// `‖K_G‖_HSN`.
    pub hsn: f64,
    /// `‖K‖_∞`.
    pub sup: f64,
}

/// `‖K‖²_ℋ = Σ_j (1/N) Σ_{B_j} |K|²`.
pub fn h_norm(d: &DirectedEdgeSpace, k: &NbKernel) -> Result<f64> {
    k.check(d)?;
    let s: f64 = k.grades().map(|(_, v)| super::norm_sq(v)).sum();
    Ok((s / d.vertex_count() as f64).sqrt())
}

/// Inner product in `ℋ` (normalised by `N`), summed over common grades.
pub fn h_inner(d: &DirectedEdgeSpace, a: &NbKernel, b: &NbKernel) -> Result<C64> {
    a.check(d)?;
    b.check(d)?;
    let s: C64 = a.grades().filter_map(|(j, v)| b.grade(j).map(|w| inner(v, w))).sum();
    Ok(s / d.vertex_count() as f64)
}

pub fn norms(d: &DirectedEdgeSpace, k: &NbKernel) -> Result<Norms> {
    Ok(Norms { h: h_norm(d, k)?, hsn: kg_matrix(d, k)?.hsn_norm(), sup: k.sup_norm() })
}

/// `c_{k,q} = [1 + (q+1) Σ_{j=1..k} q^{j−1}]²`, the squared size of a tree ball.
pub fn c_kq(k: usize, q: f64) -> f64 {
    let ball = 1.0 + (q + 1.0) * (1..=k).map(|j| q.powi(j as i32 - 1)).sum::<f64>();
    ball * ball
}

/// Terms of `‖K_G‖²_HSN ≤ ‖K‖²_ℋ + c_{k,q}·(bad fraction)·‖K‖²_∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TwoNormCheck {
    pub hsn_sq: f64,
    pub h_sq: f64,
    /// Fraction of vertices with injectivity radius `< k`.
    pub bad_fraction: f64,
    pub c_kq: f64,
    pub sup_sq: f64,
    /// Right side minus left side; non-negative when the inequality holds.
    pub residual: f64,
}

/// Evaluates both sides of the norm comparison with `k` the top grade of `K`
/// and `q` the largest degree minus one.
pub fn check_2norms(d: &DirectedEdgeSpace, k: &NbKernel) -> Result<TwoNormCheck> {
    let nm = norms(d, k)?;
    let top = k.max_grade().unwrap_or(0);
    let q = d.graph().max_degree().saturating_sub(1) as f64;
    let bad = bst_statistic(d.graph(), top);
    let c = c_kq(top, q);
    let (hsn_sq, h_sq, sup_sq) = (nm.hsn * nm.hsn, nm.h * nm.h, nm.sup * nm.sup);
    Ok(TwoNormCheck { hsn_sq, h_sq, bad_fraction: bad, c_kq: c, sup_sq, residual: h_sq + c * bad * sup_sq - hsn_sq })
}
