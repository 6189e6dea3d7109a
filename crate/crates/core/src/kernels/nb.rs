//! Edge functions built from eigenvectors and tree Green data, the edge variance
//! and the weighted transfer operator attached to `ζ`.
//!
//! Green data is passed as one value per directed edge: `zeta[e]` for
//! `e = (x0, x1)` is `ζ_{x0}(x1)`, the root value of the cone at `x1` with `x0`
//! removed. Then `ιζ[e] = zeta[reverse(e)]`.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;

use super::ops::{weighted_transfer, weighted_transfer_t};
use super::{check_grade, inner, kb_apply, need_grade, NbKernel, VarianceReport};
use crate::paths::DirectedEdgeSpace;
use crate::spectral::{nb_adjoint_apply, nb_apply, EigenSystem};
use crate::{Error, Result, C64};

/// `ζ` on the `(q+1)`-regular tree: the root of `qζ² − γζ + 1 = 0` with
/// `Im ζ < 0` when `Im γ > 0`. For real `γ` this is the boundary value from
/// above (the root of modulus `< 1` outside the band).
pub fn regular_tree_zeta(q: f64, gamma: C64) -> C64 {
    let disc = (gamma * gamma - 4.0 * q).sqrt();
    let a = (gamma + disc) / (2.0 * q);
    let b = (gamma - disc) / (2.0 * q);
    if gamma.im > 0.0 || gamma.re.abs() < 2.0 * q.sqrt() {
        if a.im < b.im { a } else { b }
    } else if a.norm() < b.norm() {
        a
    } else {
        b
    }
}

/// The pair `f_j = τ₊ψ − ζ·τ₋ψ` and `f*_j = τ₋ψ − ιζ·τ₊ψ`.
pub fn nb_pair(d: &DirectedEdgeSpace, psi: &[f64], zeta: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    check_edges(d, zeta)?;
    if psi.len() != d.vertex_count() {
        return Err(Error::DimensionMismatch { expected: d.vertex_count(), got: psi.len() });
    }
    let m = d.edge_count();
    let f = (0..m).map(|e| psi[d.head(e)] - zeta[e] * psi[d.tail(e)]).collect();
    let fs = (0..m).map(|e| psi[d.tail(e)] - zeta[d.reverse(e)] * psi[d.head(e)]).collect();
    Ok((f, fs))
}

fn check_edges(d: &DirectedEdgeSpace, v: &[C64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::KernelContract("missing ζ data".into()));
    }
    if v.len() != d.edge_count() {
        return Err(Error::DimensionMismatch { expected: d.edge_count(), got: v.len() });
    }
    Ok(())
}

/// Residuals of the transport identities for one eigenpair.
///
/// With `γ = λ + iη₀` and `ζ` solving the tree recursion at `γ`, the exact
/// identities are `ζℬf = f − iη₀ζτ₊ψ` and `ιζℬ*f* = f* − iη₀ιζτ₋ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NbResidual {
    /// `‖ζℬf − f + iη₀ζτ₊ψ‖`.
    pub forward: f64,
    /// `‖ιζℬ*f* − f* + iη₀ιζτ₋ψ‖`.
    pub adjoint: f64,
    /// `‖ζℬf − f‖`.
    pub forward_defect: f64,
    /// `‖ιζℬ*f* − f*‖`.
    pub adjoint_defect: f64,
    /// `η₀‖τ₊ψ‖`.
    pub forward_bound: f64,
    /// `η₀‖τ₋ψ‖`.
    pub adjoint_bound: f64,
}

/// Evaluates [`NbResidual`] for given `ψ`, `η₀` and edge data `ζ`.
pub fn nb_residual(d: &DirectedEdgeSpace, psi: &[f64], eta0: f64, zeta: &[C64]) -> Result<NbResidual> {
    let (f, fs) = nb_pair(d, psi, zeta)?;
    let m = d.edge_count();
    let bf = nb_apply(d, &f);
    let bs = nb_adjoint_apply(d, &fs);
    let ie = C64::new(0.0, eta0);
    let mut r = [0.0f64; 4];
    let (mut tp, mut tm) = (0.0, 0.0);
    for e in 0..m {
        let (z, iz) = (zeta[e], zeta[d.reverse(e)]);
        let (ph, pt) = (psi[d.head(e)], psi[d.tail(e)]);
        let a = z * bf[e] - f[e];
        let b = iz * bs[e] - fs[e];
        r[0] += (a + ie * z * ph).norm_sqr();
        r[1] += (b + ie * iz * pt).norm_sqr();
        r[2] += a.norm_sqr();
        r[3] += b.norm_sqr();
        tp += ph * ph;
        tm += pt * pt;
    }
    Ok(NbResidual {
        forward: r[0].sqrt(),
        adjoint: r[1].sqrt(),
        forward_defect: r[2].sqrt(),
        adjoint_defect: r[3].sqrt(),
        forward_bound: eta0 * tp.sqrt(),
        adjoint_bound: eta0 * tm.sqrt(),
    })
}

/// Edge functions for selected eigenpairs.
#[derive(Debug, Clone)]
pub struct NbEigenvectors {
    pub indices: Vec<usize>,
    pub gamma: Vec<C64>,
    pub f: Vec<Vec<C64>>,
    pub f_star: Vec<Vec<C64>>,
    pub residuals: Vec<NbResidual>,
}

/// Builds `f_j`, `f*_j` at `γ_j = λ_j + iη₀` for each index, with `zeta_at(γ)`
/// supplying the edge data.
pub fn nb_eigenvectors<F>(
    es: &EigenSystem,
    d: &DirectedEdgeSpace,
    eta0: f64,
    indices: &[usize],
    mut zeta_at: F,
) -> Result<NbEigenvectors>
where
    F: FnMut(C64) -> Result<Vec<C64>>,
{
    let mut out = NbEigenvectors { indices: indices.to_vec(), gamma: vec![], f: vec![], f_star: vec![], residuals: vec![] };
    for &j in indices {
        if j >= es.n {
            return Err(Error::InvalidParameter("eigen index out of range".into()));
        }
        let gamma = C64::new(es.values[j], eta0);
        let z = zeta_at(gamma)?;
        let (f, fs) = nb_pair(d, es.vector(j), &z)?;
        out.residuals.push(nb_residual(d, es.vector(j), eta0, &z)?);
        out.gamma.push(gamma);
        out.f.push(f);
        out.f_star.push(fs);
    }
    Ok(out)
}

/// `var_nb^I(K) = (1/N) Σ_{λ_j ∈ I} |⟨f*_j, K_B f_j⟩|` (no square).
pub fn nb_variance<F>(
    es: &EigenSystem,
    d: &DirectedEdgeSpace,
    k: &NbKernel,
    interval: (f64, f64),
    eta0: f64,
    mut zeta_at: F,
) -> Result<VarianceReport>
where
    F: FnMut(C64) -> Result<Vec<C64>>,
{
    k.check(d)?;
    let mut terms = Vec::new();
    for j in 0..es.n {
        let lam = es.values[j];
        if lam < interval.0 || lam > interval.1 {
            continue;
        }
        let z = zeta_at(C64::new(lam, eta0))?;
        let (f, fs) = nb_pair(d, es.vector(j), &z)?;
        terms.push(inner(&fs, &kb_apply(d, k, &f)?).norm());
    }
    Ok(VarianceReport::from_terms(terms, es.n, Some(interval), Some(eta0)))
}

/// `⟨(ιζℬ*)^a f*, K_B (ζℬ)^b f⟩`; equal to `⟨f*, K_B f⟩` for every `a, b` when `η₀ = 0`.
pub fn nb_transported_form(
    d: &DirectedEdgeSpace,
    k: &NbKernel,
    f: &[C64],
    f_star: &[C64],
    zeta: &[C64],
    a: usize,
    b: usize,
) -> Result<C64> {
    check_edges(d, zeta)?;
    let mut left = f_star.to_vec();
    for _ in 0..a {
        left = nb_adjoint_apply(d, &left).iter().enumerate().map(|(e, v)| zeta[d.reverse(e)] * v).collect();
    }
    let mut right = f.to_vec();
    for _ in 0..b {
        right = nb_apply(d, &right).iter().zip(zeta).map(|(v, z)| z * v).collect();
    }
    Ok(inner(&left, &kb_apply(d, k, &right)?))
}

/// Diagnostics of the weighted transfer operator built from `ζ`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SGammaReport {
    pub grade: usize,
    /// `max_{(w,v)} |Σ_{u≠w} |Im ζ_v(u)| − |Im ζ_w(v)|/|ζ_w(v)|² + η₀|`.
    pub max_sumzeta_residual: f64,
    /// Row sums of `𝒮_γ` on grade `k` (all ≤ 1, equal to 1 at `η₀ = 0`).
    pub row_sums: Vec<f64>,
    /// `e^{iθ_γ}` per path of grade `k`.
    pub phase: Vec<C64>,
    /// `max |e^{iθ_γ}| − 1` in absolute value.
    pub max_phase_modulus_error: f64,
    /// `C_γ = −1/(2 g̃(x0, xk))` per path of grade `k`.
    pub c_gamma: Vec<C64>,
}

fn check_im(zeta: &[C64]) -> Result<()> {
    if let Some(z) = zeta.iter().find(|z| z.im == 0.0) {
        return Err(Error::ZeroImaginaryPart(alloc::format!("ζ = {z} on some edge")));
    }
    Ok(())
}

/// `(𝒮_γK)(x0;xk) = |ζ_{x1}(x0)|²/|Im ζ_{x1}(x0)| · Σ_{x_{-1}≠x1} |Im ζ_{x0}(x_{-1})| K(x_{-1};x_{k-1})`,
/// optionally followed by multiplication by `e^{iθ_γ}`.
pub fn s_gamma_apply(d: &DirectedEdgeSpace, k: usize, zeta: &[C64], kv: &[C64], with_phase: bool) -> Result<Vec<C64>> {
    check_edges(d, zeta)?;
    check_im(zeta)?;
    if k == 0 {
        return Err(Error::KernelContract("𝒮_γ acts on grades ≥ 1".into()));
    }
    check_grade(d, k, kv)?;
    let (w, pref) = s_gamma_weights(d, zeta);
    let mut out = weighted_transfer(d, k, kv, |q| w[d.first_edge(k, q)], |p| pref[d.first_edge(k, p)]);
    if with_phase {
        for (p, v) in out.iter_mut().enumerate() {
            *v *= phase_of(zeta[d.first_edge(k, p)]);
        }
    }
    Ok(out)
}

/// Per first edge `e = (x0,x1)`: the weight `|Im ζ[rev e]|` used when `e` is the
/// incoming edge, and the prefactor `|ζ[rev e]|²/|Im ζ[rev e]|`.
fn s_gamma_weights(d: &DirectedEdgeSpace, zeta: &[C64]) -> (Vec<f64>, Vec<f64>) {
    let m = d.edge_count();
    let w = (0..m).map(|e| zeta[d.reverse(e)].im.abs()).collect();
    let pref = (0..m)
        .map(|e| {
            let z = zeta[d.reverse(e)];
            z.norm_sqr() / z.im.abs()
        })
        .collect();
    (w, pref)
}

fn phase_of(z: C64) -> C64 {
    z / z.conj()
}

/// Builds the diagnostics at spectral parameter `γ` (with `η₀ = Im γ`) on grade `k ≥ 1`.
pub fn s_gamma_diagnostics(d: &DirectedEdgeSpace, k: usize, zeta: &[C64], gamma: C64) -> Result<SGammaReport> {
    check_edges(d, zeta)?;
    check_im(zeta)?;
    need_grade(d, k)?;
    if k == 0 {
        return Err(Error::KernelContract("𝒮_γ acts on grades ≥ 1".into()));
    }
    let eta0 = gamma.im;
    let mut worst = 0.0f64;
    for e in 0..d.edge_count() {
        // e = (w, v); successors are (v, u) with u ≠ w.
        let s: f64 = d.successors(e).map(|s| zeta[s].im.abs()).sum();
        let z = zeta[e];
        worst = worst.max((s - (z.im.abs() / z.norm_sqr() - eta0)).abs());
    }
    let ones = vec![C64::new(1.0, 0.0); d.len(k)];
    let row_sums = s_gamma_apply(d, k, zeta, &ones, false)?.iter().map(|z| z.re).collect();
    let phase: Vec<C64> = (0..d.len(k)).map(|p| phase_of(zeta[d.first_edge(k, p)])).collect();
    let max_phase_modulus_error = phase.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
    let diag = cover_diagonal(d, zeta, gamma);
    let c_gamma = (0..d.len(k))
        .map(|p| {
            let verts = d.path_vertices(k, p);
            let mut g = diag[verts[0]];
            for w in verts.windows(2) {
                g *= zeta[d.edge_index(w[0], w[1]).expect("path edge")];
            }
            -1.0 / (2.0 * g)
        })
        .collect();
    Ok(SGammaReport { grade: k, max_sumzeta_residual: worst, row_sums, phase, max_phase_modulus_error, c_gamma })
}

/// `G̃(x,x) = −1/(γ − W(x) − Σ_{u∼x} ζ_x(u))` on the universal cover.
pub fn cover_diagonal(d: &DirectedEdgeSpace, zeta: &[C64], gamma: C64) -> Vec<C64> {
    let g = d.graph();
    (0..d.vertex_count())
        .map(|x| {
            let s: C64 = (g.offsets()[x]..g.offsets()[x + 1]).map(|e| zeta[e]).sum();
            -1.0 / (gamma - g.potential_at(x) - s)
        })
        .collect()
}

/// Invariant probability of the chain with transition matrix `𝒮_γ` on grade `k`,
/// by lazy power iteration on the transpose. Rows are renormalised first, so the
/// result is defined for `η₀ > 0` as well.
pub fn s_gamma_invariant_measure(d: &DirectedEdgeSpace, k: usize, zeta: &[C64], iterations: usize) -> Result<Vec<f64>> {
    check_edges(d, zeta)?;
    check_im(zeta)?;
    if k == 0 {
        return Err(Error::KernelContract("𝒮_γ acts on grades ≥ 1".into()));
    }
    need_grade(d, k)?;
    let (w, pref) = s_gamma_weights(d, zeta);
    let n = d.len(k);
    let ones = vec![C64::new(1.0, 0.0); n];
    let rows = weighted_transfer(d, k, &ones, |q| w[d.first_edge(k, q)], |p| pref[d.first_edge(k, p)]);
    let mut nu = vec![C64::new(1.0 / n as f64, 0.0); n];
    for _ in 0..iterations {
        let scaled: Vec<C64> = nu.iter().zip(&rows).map(|(v, r)| v / r.re).collect();
        let step = weighted_transfer_t(d, k, &scaled, |q| w[d.first_edge(k, q)], |p| pref[d.first_edge(k, p)]);
        // Lazy step, so periodic chains converge too.
        nu.iter_mut().zip(&step).for_each(|(a, b)| *a = (*a + b) * 0.5);
        let s: f64 = nu.iter().map(|z| z.re).sum();
        nu.iter_mut().for_each(|z| *z /= s);
    }
    Ok(nu.iter().map(|z| z.re).collect())
}
