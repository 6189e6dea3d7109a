//! Closed forms on biregular and regular trees.

use alloc::format;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::kernels::{regular_tree_zeta, BoundedKernel};
use crate::{Error, Result, C64};

/// Green data of the `(p+1, q+1)`-biregular tree. Black vertices have `p + 1`
/// white neighbours, white vertices have `q + 1` black neighbours.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BiregularGreen {
    pub gamma: C64,
    /// `ζ_•(○)`: the cone at a white vertex entered from a black one.
    pub zeta_bw: C64,
    /// `ζ_○(•)`.
    pub zeta_wb: C64,
    pub g_black: C64,
    pub g_white: C64,
    /// `G(•, ○)` for adjacent vertices.
    pub g_black_white: C64,
}

/// Solves `a = 1/(γ − q b)`, `b = 1/(γ − p a)` through the quadratic
/// `pγa² − (γ² + p − q)a + γ = 0`, keeping the root with `Im a, Im b < 0`.
pub fn biregular_green(p: usize, q: usize, gamma: C64) -> Result<BiregularGreen> {
    if p == 0 || q == 0 {
        return Err(Error::InvalidParameter("biregular tree needs p, q ≥ 1".into()));
    }
    if !(gamma.im > 0.0) {
        return Err(Error::NonPositiveImaginary(gamma.im));
    }
    let (pf, qf) = (p as f64, q as f64);
    let qa = pf * gamma;
    let qb = -(gamma * gamma + pf - qf);
    let disc = (qb * qb - 4.0 * qa * gamma).sqrt();
    let (a, b) = [(-qb + disc) / (2.0 * qa), (-qb - disc) / (2.0 * qa)]
        .into_iter()
        .map(|a| (a, 1.0 / (gamma - pf * a)))
        .find(|(a, b)| a.im < 0.0 && b.im < 0.0)
        .ok_or_else(|| Error::ContinuationFailure { re: gamma.re, im: gamma.im, reason: "no Herglotz root".into() })?;
    let g_black = -1.0 / (gamma - (pf + 1.0) * a);
    let g_white = -1.0 / (gamma - (qf + 1.0) * b);
    Ok(BiregularGreen { gamma, zeta_bw: a, zeta_wb: b, g_black, g_white, g_black_white: g_black * a })
}

/// `⟨K⟩_{λ+i0}` on a `(p+1, q+1)`-biregular graph from the closed form
/// `(p+q+2)/(2N) [Σ_• K/(q+1) + Σ_○ K/(p+1) + λ/((p+1)(q+1)) Σ_{y∼x} K(x,y)]`.
/// Black vertices are those of degree `p + 1`; `K` must have range at most 1.
pub fn biregular_bracket(g: &Graph, kernel: &BoundedKernel, lambda: f64, p: usize, q: usize) -> Result<C64> {
    let n = g.vertex_count();
    if kernel.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: kernel.n });
    }
    if let Some(x) = (0..n).find(|&x| g.degree(x) != p + 1 && g.degree(x) != q + 1) {
        return Err(Error::InvalidParameter(format!("vertex {x} has degree {}", g.degree(x))));
    }
    let (pf, qf) = (p as f64, q as f64);
    let mut s = C64::new(0.0, 0.0);
    for &(x, y, k) in &kernel.entries {
        if x == y {
            s += k / if g.degree(x) == p + 1 { qf + 1.0 } else { pf + 1.0 };
        } else if g.has_edge(x, y) {
            s += k * lambda / ((pf + 1.0) * (qf + 1.0));
        } else {
            return Err(Error::KernelContract(format!("entry ({x}, {y}) has range above 1")));
        }
    }
    Ok(s * (pf + qf + 2.0) / (2.0 * n as f64))
}

/// Vertex of the `(q+1)`-regular tree as a list of child indices from the root `o`
/// (the first index ranges over `0..=q`, later ones over `0..q`). The ray `ξ`
/// follows child 0 forever.
fn check_vertex(q: usize, depth: usize, v: &[usize]) -> Result<()> {
    if q == 0 {
        return Err(Error::InvalidParameter("branching must be positive".into()));
    }
    if v.len() > depth {
        return Err(Error::InvalidParameter(format!("vertex at depth {} beyond the truncation depth {depth}", v.len())));
    }
    if let Some((i, &c)) = v.iter().enumerate().find(|&(i, &c)| c >= if i == 0 { q + 1 } else { q }) {
        return Err(Error::InvalidParameter(format!("child index {c} invalid at level {i}")));
    }
    Ok(())
}

/// `P_{γ,ξ}(v) = G(v∧ξ, v) / G(o, v∧ξ) = ζ^{|v| − 2|v∧ξ|}` on the `(q+1)`-regular tree.
pub fn poisson_kernel(q: usize, gamma: C64, xi_depth: usize, v: &[usize]) -> Result<C64> {
    check_vertex(q, xi_depth, v)?;
    let meet = v.iter().take_while(|&&c| c == 0).count();
    let zeta = regular_tree_zeta(q as f64, gamma);
    Ok(zeta.powi(v.len() as i32 - 2 * meet as i32))
}

/// `(𝒜P)(v) − γP(v)`; needs the children of `v` inside the truncation.
pub fn poisson_residual(q: usize, gamma: C64, xi_depth: usize, v: &[usize]) -> Result<C64> {
    if v.len() + 1 > xi_depth {
        return Err(Error::InvalidParameter(format!("truncation depth {xi_depth} too shallow for a vertex at depth {}", v.len())));
    }
    let mut s = -gamma * poisson_kernel(q, gamma, xi_depth, v)?;
    if !v.is_empty() {
        s += poisson_kernel(q, gamma, xi_depth, &v[..v.len() - 1])?;
    }
    let kids = if v.is_empty() { q + 1 } else { q };
    let mut w: Vec<usize> = v.to_vec();
    w.push(0);
    for c in 0..kids {
        *w.last_mut().expect("pushed") = c;
        s += poisson_kernel(q, gamma, xi_depth, &w)?;
    }
    Ok(s)
}
