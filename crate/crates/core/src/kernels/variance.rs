//! Spherical functions, the quantum variance and the discrepancy it controls.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;

use super::{branching, kg_form, kg_matrix, m_star, nabla, nabla_star, real_to_complex, s_t, s_tilde_t, extend, NbKernel, ZERO};
use crate::graph::{bst_statistic, Graph};
use crate::paths::DirectedEdgeSpace;
use crate::spectral::EigenSystem;
use crate::{Error, Result, C64};

/// `Φ(λ, r)` from `Φ(λ,0) = 1`, `Φ(λ,1) = λ/(q+1)`, `Φ(λ,r+1) = (λΦ(λ,r) − Φ(λ,r−1))/q`.
pub fn spherical_phi(q: usize, lambda: f64, r: usize) -> f64 {
    spherical_table(q, lambda, r)[r]
}

/// `[Φ(λ,0), …, Φ(λ,rmax)]`.
pub fn spherical_table(q: usize, lambda: f64, rmax: usize) -> Vec<f64> {
    let q = q as f64;
    let mut t = Vec::with_capacity(rmax + 1);
    t.push(1.0);
    if rmax >= 1 {
        t.push(lambda / (q + 1.0));
    }
    for r in 1..rmax {
        t.push((lambda * t[r] - t[r - 1]) / q);
    }
    t
}

/// Chebyshev form of `Φ(λ,r)`, valid for `|λ| < 2√q`; `None` outside.
pub fn spherical_phi_closed(q: usize, lambda: f64, r: usize) -> Option<f64> {
    let qf = q as f64;
    let x = lambda / (2.0 * qf.sqrt());
    if !(x.abs() < 1.0) {
        return None;
    }
    let th = x.acos();
    let rf = r as f64;
    let p = (rf * th).cos();
    let u = ((rf + 1.0) * th).sin() / th.sin();
    Some(qf.powf(-rf / 2.0) * (2.0 / (qf + 1.0) * p + (qf - 1.0) / (qf + 1.0) * u))
}

/// The sphere-averaging kernel `S_k`: `1` on grade 0, `((q+1)q^{k−1})⁻¹` on grade `k ≥ 1`.
pub fn sphere_kernel(d: &DirectedEdgeSpace, k: usize) -> Result<NbKernel> {
    let q = branching(d)?;
    let c = if k == 0 { 1.0 } else { 1.0 / ((q + 1.0) * q.powi(k as i32 - 1)) };
    NbKernel::constant(d, k, C64::new(c, 0.0))
}

/// `Φ(𝒜_G, k)` as a dense row-major matrix, by the same three-term recursion.
pub fn spherical_polynomial_matrix(g: &Graph, k: usize) -> Result<Vec<f64>> {
    let q = g.regular_degree().filter(|&r| r >= 2).ok_or(Error::NotRegular)? as f64 - 1.0;
    let n = g.vertex_count();
    let mut prev = vec![0.0; n * n];
    for x in 0..n {
        prev[x * n + x] = 1.0;
    }
    if k == 0 {
        return Ok(prev);
    }
    // A·M with A sparse.
    let adj_mul = |m: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for x in 0..n {
            for &y in g.neighbours(x) {
                let src = &m[y as usize * n..(y as usize + 1) * n];
                out[x * n..(x + 1) * n].iter_mut().zip(src).for_each(|(o, s)| *o += s);
            }
        }
        out
    };
    let mut cur: Vec<f64> = adj_mul(&prev).into_iter().map(|v| v / (q + 1.0)).collect();
    for _ in 1..k {
        let am = adj_mul(&cur);
        let next: Vec<f64> = am.iter().zip(&prev).map(|(a, p)| (a - p) / q).collect();
        prev = core::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// A variance and the per-eigenfunction terms it averages.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarianceReport {
    /// `(1/normaliser) Σ terms`.
    pub value: f64,
    pub per_eigenfunction_terms: Vec<f64>,
    /// Number of vertices `N`; terms filtered by an interval are still divided by `N`.
    pub normaliser: usize,
    /// Spectral window, when the sum is restricted.
    pub interval: Option<(f64, f64)>,
    /// Imaginary offset of the spectral parameter, for the edge variant.
    pub eta0: Option<f64>,
}

impl VarianceReport {
    pub(crate) fn from_terms(terms: Vec<f64>, n: usize, interval: Option<(f64, f64)>, eta0: Option<f64>) -> Self {
        let value = terms.iter().sum::<f64>() / n as f64;
        Self { value, per_eigenfunction_terms: terms, normaliser: n, interval, eta0 }
    }
}

/// `⟨ψ_j, K_G ψ_j⟩` for every eigenvector.
pub fn eigen_forms(es: &EigenSystem, d: &DirectedEdgeSpace, k: &NbKernel) -> Result<Vec<C64>> {
    check_es(es, d)?;
    let kg = kg_matrix(d, k)?;
    Ok((0..es.n).map(|j| kg.real_form(es.vector(j))).collect())
}

fn check_es(es: &EigenSystem, d: &DirectedEdgeSpace) -> Result<()> {
    if es.n != d.vertex_count() {
        return Err(Error::DimensionMismatch { expected: d.vertex_count(), got: es.n });
    }
    Ok(())
}

/// `var(K) = (1/N) Σ_j |⟨ψ_j, K_G ψ_j⟩|²`.
pub fn quantum_variance(es: &EigenSystem, d: &DirectedEdgeSpace, k: &NbKernel) -> Result<VarianceReport> {
    let terms = eigen_forms(es, d, k)?.iter().map(C64::norm_sqr).collect();
    Ok(VarianceReport::from_terms(terms, es.n, None, None))
}

/// A matrix kernel given by its nonzero entries `(x, y, K(x,y))`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundedKernel {
    pub n: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl BoundedKernel {
    pub fn identity(n: usize) -> Self {
        Self { n, entries: (0..n).map(|x| (x, x, C64::new(1.0, 0.0))).collect() }
    }

    /// Multiplication by `a`.
    pub fn diagonal(a: &[f64]) -> Self {
        Self { n: a.len(), entries: a.iter().enumerate().map(|(x, &v)| (x, x, C64::new(v, 0.0))).collect() }
    }

    /// `χ_Λ − |Λ|/N` for the first `⌊N/2⌋` vertices of `order`.
    pub fn centred_half_indicator(order: &[usize]) -> Self {
        let n = order.len();
        let half = n / 2;
        let mut a = vec![-(half as f64) / n as f64; n];
        for &x in &order[..half] {
            a[x] += 1.0;
        }
        Self::diagonal(&a)
    }
}

/// Output of [`qe_discrepancy`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QeReport {
    /// `(1/N) Σ_j |⟨ψ_j,Kψ_j⟩ − ⟨K⟩_{λ_j}|²`.
    pub value: f64,
    pub terms: Vec<f64>,
    /// Same average with the path-space form `⟨ψ_j,K_Gψ_j⟩ − Σ_k ⟨K_k⟩Φ(λ_j,k)`.
    pub grade_value: f64,
    /// Largest per-eigenfunction gap between the matrix and path-space forms.
    pub max_grade_gap: f64,
    /// Fraction of vertices with injectivity radius `< R`, where the two forms may differ.
    pub bad_fraction: f64,
}

/// Discrepancy between `⟨ψ_j, Kψ_j⟩` and the spherical average `⟨K⟩_{λ_j}`
/// for a kernel of range `R` and sup-norm at most 1 on a regular graph.
pub fn qe_discrepancy(es: &EigenSystem, g: &Graph, kernel: &BoundedKernel, range: usize) -> Result<QeReport> {
    let q = g.regular_degree().filter(|&r| r >= 2).ok_or(Error::NotRegular)? - 1;
    let n = g.vertex_count();
    if kernel.n != n || es.n != n {
        return Err(Error::DimensionMismatch { expected: n, got: if kernel.n != n { kernel.n } else { es.n } });
    }
    let mut rows: BTreeMap<usize, Vec<(usize, C64)>> = BTreeMap::new();
    for &(x, y, v) in &kernel.entries {
        if x >= n || y >= n {
            return Err(Error::VertexOutOfRange { vertex: x.max(y), n });
        }
        if v.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter("kernel entries must have modulus ≤ 1".into()));
        }
        rows.entry(x).or_default().push((y, v));
    }
    // Entries with their graph distance.
    let mut dist_entries: Vec<(usize, usize, usize, C64)> = Vec::with_capacity(kernel.entries.len());
    let mut lookup: BTreeMap<(usize, usize), C64> = BTreeMap::new();
    for (&x, row) in &rows {
        let off_diagonal = row.iter().any(|&(y, _)| y != x);
        let dist = if off_diagonal { g.distances_from(x) } else { Vec::new() };
        for &(y, v) in row {
            let dxy = if y == x { 0 } else { dist[y] };
            if dxy > range {
                return Err(Error::InvalidParameter("kernel entry beyond its declared range".into()));
            }
            dist_entries.push((x, y, dxy, v));
            *lookup.entry((x, y)).or_insert(ZERO) += v;
        }
    }

    // Path-space version: K_k(x0;xk) = K(x0,xk) on every non-backtracking path.
    let d = DirectedEdgeSpace::new(g, range)?;
    let mut graded = NbKernel::new();
    for k in 0..=range {
        let v: Vec<C64> = (0..d.len(k))
            .map(|p| lookup.get(&(d.first_vertex(k, p), d.last_vertex(k, p))).copied().unwrap_or(ZERO))
            .collect();
        graded.insert(k, v);
    }
    let means: Vec<C64> = (0..=range).map(|k| graded.grade_mean(k, n)).collect();
    let kg = kg_matrix(&d, &graded)?;

    let mut terms = Vec::with_capacity(n);
    let mut grade_sum = 0.0;
    let mut gap = 0.0f64;
    for j in 0..n {
        let psi = es.vector(j);
        let phi = spherical_table(q, es.values[j], range);
        let mut form = ZERO;
        let mut avg = ZERO;
        for &(x, y, dxy, v) in &dist_entries {
            form += v * (psi[x] * psi[y]);
            avg += v * phi[dxy];
        }
        let t1 = form - avg / n as f64;
        let t2 = kg.real_form(psi) - means.iter().zip(&phi).map(|(m, p)| m * p).sum::<C64>();
        terms.push(t1.norm_sqr());
        grade_sum += t2.norm_sqr();
        gap = gap.max((t1 - t2).norm());
    }
    let value = terms.iter().sum::<f64>() / n as f64;
    Ok(QeReport { value, terms, grade_value: grade_sum / n as f64, max_grade_gap: gap, bad_fraction: bst_statistic(g, range) })
}

/// The three quantities in `⟨𝒜ψ,K_Gψ⟩ − ⟨ψ,K_G𝒜ψ⟩ = ⟨ψ,(∇K)_Gψ⟩ + ⟨ψ,(∇*K)_Gψ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommutatorTerms {
    pub commutator: C64,
    pub nabla_term: C64,
    pub nabla_star_term: C64,
}

impl CommutatorTerms {
    /// `|commutator − nabla_term − nabla_star_term|`.
    pub fn identity_residual(&self) -> f64 {
        (self.commutator - self.nabla_term - self.nabla_star_term).norm()
    }
}

fn adjacency_apply(g: &Graph, v: &[C64]) -> Vec<C64> {
    (0..g.vertex_count()).map(|x| g.neighbours(x).iter().map(|&y| v[y as usize]).sum()).collect()
}

/// Evaluates the commutator identity for `K ∈ ℋ_k`, `k ≥ 1`, and an arbitrary `ψ`.
pub fn commutator_terms(d: &DirectedEdgeSpace, k: usize, kv: &[C64], psi: &[f64]) -> Result<CommutatorTerms> {
    if k == 0 {
        return Err(Error::KernelContract("commutator identity needs grade ≥ 1".into()));
    }
    let kk = NbKernel::single(k, kv.to_vec());
    let p = real_to_complex(psi);
    let ap = adjacency_apply(d.graph(), &p);
    let commutator = kg_form(d, &kk, &ap, &p)? - kg_form(d, &kk, &p, &ap)?;
    let grad = NbKernel::single(k + 1, nabla(d, k, kv)?);
    let div = NbKernel::single(k - 1, nabla_star(d, k - 1, kv)?);
    Ok(CommutatorTerms { commutator, nabla_term: kg_form(d, &grad, &p, &p)?, nabla_star_term: kg_form(d, &div, &p, &p)? })
}

/// `max_j |⟨ψ_j,(∇*ℳ*K)_Gψ_j⟩ − ⟨ψ_j,(∇*K)_Gψ_j⟩|` for `K ∈ ℋ_k`, `k ≥ 1`.
pub fn smuggle_gap(es: &EigenSystem, d: &DirectedEdgeSpace, k: usize, kv: &[C64]) -> Result<f64> {
    if k == 0 {
        return Err(Error::KernelContract("needs grade ≥ 1".into()));
    }
    let lhs = NbKernel::single(k + 1, nabla_star(d, k + 1, &m_star(d, k, kv)?)?);
    let rhs = NbKernel::single(k - 1, nabla_star(d, k - 1, kv)?);
    let a = eigen_forms(es, d, &lhs)?;
    let b = eigen_forms(es, d, &rhs)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Both sides of `var(K) ≤ 2c⁻²var(∇*i_k𝒮_T K) + 2var(S̃_T K)`, with `c = q` for
/// `k ≥ 1` and `c = q+1` for `k = 0`.
pub fn reduction_check(es: &EigenSystem, d: &DirectedEdgeSpace, k: usize, kv: &[C64], t: usize) -> Result<(f64, f64)> {
    let q = branching(d)?;
    let c = if k == 0 { q + 1.0 } else { q };
    let lhs = quantum_variance(es, d, &NbKernel::single(k, kv.to_vec()))?.value;
    let main = nabla_star(d, k, &extend(d, k, &s_t(d, k, kv, t)?)?)?;
    let rem = s_tilde_t(d, k, kv, t)?;
    let v1 = quantum_variance(es, d, &NbKernel::single(k, main))?.value;
    let v2 = quantum_variance(es, d, &NbKernel::single(k, rem))?.value;
    Ok((lhs, 2.0 * v1 / (c * c) + 2.0 * v2))
}
