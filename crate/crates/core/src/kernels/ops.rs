//! Difference, transfer and shift operators between grades.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{branching, check_grade, need_grade, NbKernel, ZERO};
use crate::paths::DirectedEdgeSpace;
use crate::{Error, Result, C64};

/// `∇ : ℋ_{k-1} → ℋ_k`, `(∇K)(x0;xk) = K(x1;xk) − K(x0;x_{k−1})`.
/// `j` is the grade of the input.
pub fn nabla(d: &DirectedEdgeSpace, j: usize, k: &[C64]) -> Result<Vec<C64>> {
    check_grade(d, j, k)?;
    need_grade(d, j + 1)?;
    Ok((0..d.len(j + 1)).map(|p| k[d.suffix(j + 1, p)] - k[d.parent(j + 1, p)]).collect())
}

/// `∇* : ℋ_{j+1} → ℋ_j`, the adjoint of [`nabla`]. `j` is the grade of the output.
pub fn nabla_star(d: &DirectedEdgeSpace, j: usize, k: &[C64]) -> Result<Vec<C64>> {
    check_grade(d, j + 1, k)?;
    let mut out = vec![ZERO; d.len(j)];
    for (p, &v) in k.iter().enumerate() {
        out[d.suffix(j + 1, p)] += v;
        out[d.parent(j + 1, p)] -= v;
    }
    Ok(out)
}

/// `∇*` applied grade by grade; every grade must be at least 1.
pub fn nabla_star_kernel(d: &DirectedEdgeSpace, k: &NbKernel) -> Result<NbKernel> {
    k.map_grades(|j, v| {
        let below = j.checked_sub(1).ok_or_else(|| Error::KernelContract("∇* needs grade ≥ 1".into()))?;
        Ok((below, nabla_star(d, below, v)?))
    })
}

/// `i_j : ℋ_j → ℋ_{j+1}`, `(iK)(x0;x_{j+1}) = K(x0;xj)`.
pub fn extend(d: &DirectedEdgeSpace, j: usize, k: &[C64]) -> Result<Vec<C64>> {
    check_grade(d, j, k)?;
    need_grade(d, j + 1)?;
    Ok((0..d.len(j + 1)).map(|p| k[d.parent(j + 1, p)]).collect())
}

/// Weighted backward transfer on grade `k ≥ 1`:
/// `(𝒮K)(x0;xk) = pref(p) Σ_{x_{-1} ≠ x1} w(x_{-1};x_{k-1}) K(x_{-1};x_{k-1})`,
/// with `w` and `pref` given per path index.
pub(crate) fn weighted_transfer<W, P>(d: &DirectedEdgeSpace, k: usize, v: &[C64], w: W, pref: P) -> Vec<C64>
where
    W: Fn(usize) -> f64,
    P: Fn(usize) -> f64,
{
    let mut tmp = vec![ZERO; d.len(k - 1)];
    for (q, &x) in v.iter().enumerate() {
        tmp[d.suffix(k, q)] += x * w(q);
    }
    (0..d.len(k))
        .map(|p| {
            let mut s = tmp[d.parent(k, p)];
            if k == 1 {
                // The only path ending in x0 that starts at x1 is the reversed edge.
                let r = d.reverse(p);
                s -= v[r] * w(r);
            }
            s * pref(p)
        })
        .collect()
}

/// Transpose of [`weighted_transfer`].
pub(crate) fn weighted_transfer_t<W, P>(d: &DirectedEdgeSpace, k: usize, v: &[C64], w: W, pref: P) -> Vec<C64>
where
    W: Fn(usize) -> f64,
    P: Fn(usize) -> f64,
{
    let mut tmp = vec![ZERO; d.len(k - 1)];
    for (p, &x) in v.iter().enumerate() {
        tmp[d.parent(k, p)] += x * pref(p);
    }
    (0..d.len(k))
        .map(|q| {
            let mut s = tmp[d.suffix(k, q)];
            if k == 1 {
                let r = d.reverse(q);
                s -= v[r] * pref(r);
            }
            s * w(q)
        })
        .collect()
}

fn adjacency_average(d: &DirectedEdgeSpace, v: &[C64], q: f64) -> Vec<C64> {
    let g = d.graph();
    (0..d.vertex_count())
        .map(|x| g.neighbours(x).iter().map(|&y| v[y as usize]).sum::<C64>() / (q + 1.0))
        .collect()
}

/// Transfer operator `𝒮` on grade `j` of a regular graph (`𝒜/(q+1)` on grade 0).
pub fn transfer(d: &DirectedEdgeSpace, j: usize, k: &[C64]) -> Result<Vec<C64>> {
    let q = branching(d)?;
    check_grade(d, j, k)?;
    Ok(if j == 0 { adjacency_average(d, k, q) } else { weighted_transfer(d, j, k, |_| 1.0, |_| 1.0 / q) })
}

/// Adjoint of [`transfer`] in `ℋ_j`.
pub fn transfer_adjoint(d: &DirectedEdgeSpace, j: usize, k: &[C64]) -> Result<Vec<C64>> {
    let q = branching(d)?;
    check_grade(d, j, k)?;
    Ok(if j == 0 { adjacency_average(d, k, q) } else { weighted_transfer_t(d, j, k, |_| 1.0, |_| 1.0 / q) })
}

/// `𝒮_T K = T⁻¹ Σ_{r<T} (T−r) 𝒮^r K`.
pub fn s_t(d: &DirectedEdgeSpace, j: usize, k: &[C64], t: usize) -> Result<Vec<C64>> {
    check_t(t)?;
    let mut acc = vec![ZERO; k.len()];
    let mut cur = k.to_vec();
    for r in 0..t {
        if r > 0 {
            cur = transfer(d, j, &cur)?;
        }
        let c = (t - r) as f64 / t as f64;
        acc.iter_mut().zip(&cur).for_each(|(a, b)| *a += b * c);
    }
    Ok(acc)
}

/// `S̃_T K = T⁻¹ Σ_{r=1..T} 𝒮^r K`.
pub fn s_tilde_t(d: &DirectedEdgeSpace, j: usize, k: &[C64], t: usize) -> Result<Vec<C64>> {
    check_t(t)?;
    let mut acc = vec![ZERO; k.len()];
    let mut cur = k.to_vec();
    for _ in 0..t {
        cur = transfer(d, j, &cur)?;
        acc.iter_mut().zip(&cur).for_each(|(a, b)| *a += b / t as f64);
    }
    Ok(acc)
}

fn check_t(t: usize) -> Result<()> {
    if t == 0 {
        return Err(Error::InvalidParameter("T must be positive".into()));
    }
    Ok(())
}

/// `‖𝒮^r‖` on the mean-zero subspace of `ℋ_j`, by power iteration on `(𝒮^r)*𝒮^r`.
///
/// For `j ≥ 1` and `r = 1` this is always 1 (kernels depending only on `x0` are
/// moved isometrically); contraction shows up from `r = j + 1` on.
pub fn s_norm_meanzero(d: &DirectedEdgeSpace, j: usize, r: usize, seed: u64) -> Result<f64> {
    branching(d)?;
    need_grade(d, j)?;
    let n = d.len(j);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    let project = |v: &mut Vec<C64>| -> f64 {
        let m = v.iter().sum::<C64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= m);
        let s = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if s > 0.0 {
            v.iter_mut().for_each(|x| *x /= s);
        }
        s
    };
    project(&mut v);
    let mut est = 0.0;
    for it in 0..2000 {
        let mut w = v.clone();
        for _ in 0..r {
            w = transfer(d, j, &w)?;
        }
        for _ in 0..r {
            w = transfer_adjoint(d, j, &w)?;
        }
        let lam = project(&mut w);
        v = w;
        if it > 20 && (lam - est).abs() <= 1e-12 * lam.max(1e-300) {
            est = lam;
            break;
        }
        est = lam;
    }
    Ok(est.sqrt())
}

/// `ℳ* : ℋ_j → ℋ_{j+2}`, `(ℳ*K)(x0;x_{j+2}) = q⁻¹ K(x1;x_{j+1})`.
pub fn m_star(d: &DirectedEdgeSpace, j: usize, k: &[C64]) -> Result<Vec<C64>> {
    let q = branching(d)?;
    check_grade(d, j, k)?;
    need_grade(d, j + 2)?;
    Ok((0..d.len(j + 2)).map(|p| k[d.suffix(j + 1, d.parent(j + 2, p))] / q).collect())
}

/// `ΣⁿK = n⁻¹ Σ_{r=1..n} ℳ*^r K`, with components in grades `j + 2r`.
pub fn sigma_n(d: &DirectedEdgeSpace, j: usize, k: &[C64], n: usize) -> Result<NbKernel> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    need_grade(d, j + 2 * n)?;
    let mut out = NbKernel::new();
    let mut cur = k.to_vec();
    for r in 1..=n {
        cur = m_star(d, j + 2 * (r - 1), &cur)?;
        out.insert(j + 2 * r, cur.iter().map(|z| z / n as f64).collect());
    }
    Ok(out)
}

/// `∇*ΣⁿK`, components in grades `j + 2r − 1`.
pub fn nabla_star_sigma_n(d: &DirectedEdgeSpace, j: usize, k: &[C64], n: usize) -> Result<NbKernel> {
    nabla_star_kernel(d, &sigma_n(d, j, k, n)?)
}

/// Closed form of `∇*ΣⁿK`: the grade `j+2r−1` component at `(x0;x_{j+2r−1})` is
/// `−(n q^{r−1})⁻¹ (∇K)(x_{r−1};x_{j+r})`.
pub fn nabla_star_sigma_n_closed(d: &DirectedEdgeSpace, j: usize, k: &[C64], n: usize) -> Result<NbKernel> {
    let q = branching(d)?;
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    need_grade(d, j + 2 * n - 1)?;
    let grad = nabla(d, j, k)?;
    let mut out = NbKernel::new();
    for r in 1..=n {
        let top = j + 2 * r - 1;
        let c = -1.0 / (n as f64 * q.powi(r as i32 - 1));
        let v = (0..d.len(top))
            .map(|p| {
                let mut idx = p;
                let mut g = top;
                for _ in 1..r {
                    idx = d.parent(g, idx);
                    g -= 1;
                }
                for _ in 1..r {
                    idx = d.suffix(g, idx);
                    g -= 1;
                }
                grad[idx] * c
            })
            .collect();
        out.insert(top, v);
    }
    Ok(out)
}
