//! Continuation solver for the Green fixed point, spectrum detection and inverse moments.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent once std is in the build graph
use num_traits::Float;

use super::ConeSystem;
use crate::linalg::{gmres, lu_solve};
use crate::{Error, Result, C64};

/// Systems up to this many labels use dense LU for the Newton step.
const DENSE_MAX: usize = 256;
/// Accepted states have a polynomial residual below this.
pub const RESIDUAL_TOL: f64 = 1e-12;
const SHRINK: f64 = 0.8;

/// One accepted continuation step.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ContinuationStep {
    pub eta: f64,
    pub newton_iterations: usize,
    pub residual: f64,
}

/// Solved fixed point at one spectral parameter.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GreenState {
    pub gamma: C64,
    /// `ζ_j` per label.
    pub zeta: Vec<C64>,
    /// `max_j |P_j(ζ)|`.
    pub residual: f64,
    /// Continuation history from large imaginary part down to `γ`.
    pub branch_certificate: Vec<ContinuationStep>,
}

impl GreenState {
    /// `G(o,o) = −1/(γ − W(o) − Σ ζ_child)` for root type `r`.
    pub fn root_green(&self, c: &ConeSystem, r: usize) -> C64 {
        let root = &c.roots()[r];
        let s: C64 = root.children.iter().map(|&(k, n)| self.zeta[k] * n as f64).sum();
        -1.0 / (self.gamma - root.potential - s)
    }

    /// `min_j |Im ζ_j|`.
    pub fn min_abs_im(&self) -> f64 {
        self.zeta.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min)
    }
}

/// `P_j(h) = h_j (Σ_k M_jk h_k − (γ − W_j)) + 1`.
pub fn polynomial_residual(c: &ConeSystem, gamma: C64, h: &[C64]) -> Vec<C64> {
    (0..c.label_count()).map(|j| h[j] * (row_sum(c, j, h) - (gamma - c.potential()[j])) + 1.0).collect()
}

fn row_sum(c: &ConeSystem, j: usize, h: &[C64]) -> C64 {
    c.row(j).iter().map(|&(k, n)| h[k] * n as f64).sum()
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn newton_step(c: &ConeSystem, gamma: C64, h: &[C64], p: &[C64]) -> Result<Vec<C64>> {
    let m = c.label_count();
    let s: Vec<C64> = (0..m).map(|j| row_sum(c, j, h) - (gamma - c.potential()[j])).collect();
    let mut rhs: Vec<C64> = p.iter().map(|z| -z).collect();
    if m <= DENSE_MAX {
        let mut jac = vec![C64::new(0.0, 0.0); m * m];
        for j in 0..m {
            jac[j * m + j] = s[j];
            for &(k, n) in c.row(j) {
                jac[j * m + k] += h[j] * n as f64;
            }
        }
        lu_solve(&mut jac, m, &mut rhs)?;
        Ok(rhs)
    } else {
        let diag: Vec<C64> = (0..m).map(|j| s[j] + h[j] * c.entry(j, j) as f64).collect();
        let apply = |v: &[C64], out: &mut [C64]| {
            for j in 0..m {
                out[j] = s[j] * v[j] + h[j] * row_sum(c, j, v);
            }
        };
        Ok(gmres(apply, &diag, &rhs, None, 1e-14, 80, 20_000)?.x)
    }
}

/// Newton iteration at fixed `γ`; fails on divergence or loss of the Herglotz sign.
fn newton(c: &ConeSystem, gamma: C64, h0: &[C64]) -> Option<(Vec<C64>, usize, f64)> {
    let mut h = h0.to_vec();
    let mut prev = f64::INFINITY;
    for it in 0..60 {
        let p = polynomial_residual(c, gamma, &h);
        let r = max_abs(&p);
        if !r.is_finite() || r > 1e8 {
            return None;
        }
        let herglotz = h.iter().all(|z| z.im < 0.0);
        if herglotz && (r < 1e-15 || (r < RESIDUAL_TOL && r >= 0.5 * prev)) {
            return Some((h, it, r));
        }
        prev = r;
        let dx = newton_step(c, gamma, &h, &p).ok()?;
        h.iter_mut().zip(&dx).for_each(|(a, d)| *a += d);
    }
    let r = max_abs(&polynomial_residual(c, gamma, &h));
    (r < RESIDUAL_TOL && h.iter().all(|z| z.im < 0.0)).then_some((h, 60, r))
}

/// Starting height `4(D + A)` of the continuation.
pub fn start_height(c: &ConeSystem) -> f64 {
    4.0 * (c.max_degree() as f64 + c.potential_bound())
}

/// Solves for `ζ(γ)` by continuation from `Re γ + 4(D+A)i` down to `γ`.
pub fn solve_green(c: &ConeSystem, gamma: C64) -> Result<GreenState> {
    Ok(solve_green_path(c, gamma.re, &[gamma.im])?.pop().expect("one target"))
}

/// Runs one continuation at real part `re` and returns the states at each of the
/// requested heights (any order).
pub fn solve_green_path(c: &ConeSystem, re: f64, etas: &[f64]) -> Result<Vec<GreenState>> {
    if let Some(&bad) = etas.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::NonPositiveImaginary(bad));
    }
    let mut order: Vec<usize> = (0..etas.len()).collect();
    order.sort_by(|&a, &b| etas[b].total_cmp(&etas[a]));
    let mut out: Vec<Option<GreenState>> = vec![None; etas.len()];
    let top = start_height(c).max(etas.iter().copied().fold(0.0, f64::max));
    let g0 = C64::new(re, top);
    let init = vec![1.0 / g0; c.label_count()];
    let fail = |eta: f64, reason: &str| Error::ContinuationFailure { re, im: eta, reason: reason.into() };
    let (mut h, its, res) = newton(c, g0, &init).ok_or_else(|| fail(top, "no convergence at the start height"))?;
    let mut history = vec![ContinuationStep { eta: top, newton_iterations: its, residual: res }];
    let mut eta = top;
    let mut factor = SHRINK;
    for &i in &order {
        let target = etas[i];
        while eta > target {
            let next = (eta * factor).max(target);
            match newton(c, C64::new(re, next), &h) {
                Some((hn, its, res)) if close(&h, &hn) => {
                    h = hn;
                    eta = next;
                    history.push(ContinuationStep { eta, newton_iterations: its, residual: res });
                    factor = (factor * factor).max(SHRINK);
                }
                _ => {
                    factor = factor.sqrt();
                    if 1.0 - factor < 1e-9 {
                        return Err(fail(next, "step size collapsed"));
                    }
                }
            }
        }
        let gamma = C64::new(re, target);
        let residual = max_abs(&polynomial_residual(c, gamma, &h));
        out[i] = Some(GreenState { gamma, zeta: h.clone(), residual, branch_certificate: history.clone() });
    }
    let states: Vec<GreenState> = out.into_iter().map(|s| s.expect("every target visited")).collect();
    for s in &states {
        check_state(c, s)?;
    }
    Ok(states)
}

/// Guards against branch jumps: each continuation step may move `ζ` by at most
/// half its size.
fn close(a: &[C64], b: &[C64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= 0.5 * x.norm().max(y.norm()))
}

/// Residual below [`RESIDUAL_TOL`], `Im ζ_j < 0` and `Im G(o,o) > 0` for every root type.
pub fn check_state(c: &ConeSystem, s: &GreenState) -> Result<()> {
    let fail = |reason: alloc::string::String| Error::ContinuationFailure { re: s.gamma.re, im: s.gamma.im, reason };
    if !(s.residual < RESIDUAL_TOL) {
        return Err(fail(format!("residual {:e}", s.residual)));
    }
    if let Some(j) = s.zeta.iter().position(|z| !(z.im < 0.0)) {
        return Err(fail(format!("Im ζ_{j} is not negative")));
    }
    if let Some(r) = (0..c.roots().len()).find(|&r| !(s.root_green(c, r).im > 0.0)) {
        return Err(fail(format!("Im G at root type {r} is not positive")));
    }
    Ok(())
}

/// Detection outcome at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumPoint {
    pub lambda: f64,
    /// `min_j` of the extrapolation `2|Im ζ_j(λ+iη)| − |Im ζ_j(λ+2iη)|`, which
    /// removes the `O(η)` part that is present even off the spectrum.
    pub min_im_zeta: f64,
    /// `min_j |Im ζ_j(λ+iη)|` without extrapolation.
    pub raw_min_im_zeta: f64,
    pub in_spectrum: bool,
    /// `false` when the solver failed; such points are never marked.
    pub solved: bool,
}

/// Spectrum detected on a grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectrumReport {
    pub points: Vec<SpectrumPoint>,
    /// Maximal runs of marked grid points, as `[first, last]`.
    pub intervals: Vec<(f64, f64)>,
    /// Open gaps between consecutive intervals.
    pub exclusions: Vec<(f64, f64)>,
    /// Grid points where the solver failed.
    pub failures: Vec<f64>,
    pub eta: f64,
    pub threshold: f64,
}

impl SpectrumReport {
    /// Whether `lambda` lies within `steps` grid steps of an interval endpoint.
    pub fn near_edge(&self, lambda: f64, steps: usize) -> bool {
        let Some(i) = self.points.iter().position(|p| p.lambda >= lambda) else { return true };
        let lo = i.saturating_sub(steps);
        let hi = (i + steps).min(self.points.len() - 1);
        self.points[lo..=hi].iter().any(|p| !p.in_spectrum) || lo == 0 || hi == self.points.len() - 1
    }
}

/// Solves at `λ + 2iη` and `λ + iη` and compares the extrapolated `|Im ζ|` to `threshold`.
pub fn spectrum_point(c: &ConeSystem, lambda: f64, eta: f64, threshold: f64) -> SpectrumPoint {
    match solve_green_path(c, lambda, &[2.0 * eta, eta]) {
        Ok(s) => {
            let est = s[1].zeta.iter().zip(&s[0].zeta).map(|(a, b)| 2.0 * a.im.abs() - b.im.abs()).fold(f64::INFINITY, f64::min);
            SpectrumPoint { lambda, min_im_zeta: est, raw_min_im_zeta: s[1].min_abs_im(), in_spectrum: est > threshold, solved: true }
        }
        Err(_) => SpectrumPoint { lambda, min_im_zeta: f64::NAN, raw_min_im_zeta: f64::NAN, in_spectrum: false, solved: false },
    }
}

/// Marks grid points with extrapolated `min_j |Im ζ_j| > threshold` and merges runs.
pub fn detect_spectrum(c: &ConeSystem, grid: &[f64], eta_final: f64, threshold: f64) -> Result<SpectrumReport> {
    check_grid(grid, eta_final)?;
    let points = grid.iter().map(|&l| spectrum_point(c, l, eta_final, threshold)).collect();
    Ok(assemble_spectrum(points, eta_final, threshold))
}

pub(crate) fn check_grid(grid: &[f64], eta: f64) -> Result<()> {
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("λ grid must be strictly increasing".into()));
    }
    if !(eta > 0.0 && eta <= 1e-3) {
        return Err(Error::InvalidParameter(format!("η_final = {eta} outside (0, 1e-3]")));
    }
    Ok(())
}

/// Builds a report from points computed elsewhere (e.g. in parallel).
pub fn assemble_spectrum(points: Vec<SpectrumPoint>, eta: f64, threshold: f64) -> SpectrumReport {
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for p in &points {
        match (p.in_spectrum, open.as_mut()) {
            (true, Some(iv)) => iv.1 = p.lambda,
            (true, None) => open = Some((p.lambda, p.lambda)),
            (false, Some(_)) => intervals.extend(open.take()),
            (false, None) => {}
        }
    }
    intervals.extend(open);
    let exclusions = intervals.windows(2).map(|w| (w[0].1, w[1].0)).collect();
    let failures = points.iter().filter(|p| !p.solved).map(|p| p.lambda).collect();
    SpectrumReport { points, intervals, exclusions, failures, eta, threshold }
}

/// `E(Σ_{o′∼o} |Im ζ̂_o(o′)|^{−s})` under the root law.
pub fn neighbour_moment(c: &ConeSystem, s: &GreenState, power: f64) -> f64 {
    c.roots()
        .iter()
        .map(|r| r.weight * r.children.iter().map(|&(k, n)| n as f64 * s.zeta[k].im.abs().powf(-power)).sum::<f64>())
        .sum()
}

/// Supremum of [`neighbour_moment`] over a grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentReport {
    pub value: f64,
    pub argmax: (f64, f64),
    /// `(λ, η, moment)` per grid cell.
    pub cells: Vec<(f64, f64, f64)>,
}

/// Sup over `λ ∈ lambdas`, `η ∈ etas` of the neighbour inverse moment. Fails when
/// some `|Im ζ|` at a root child label drops below `floor`.
pub fn green_moment(c: &ConeSystem, lambdas: &[f64], etas: &[f64], power: f64, floor: f64) -> Result<MomentReport> {
    if !(power >= 0.0) {
        return Err(Error::InvalidParameter(format!("moment order {power} must be non-negative")));
    }
    if lambdas.is_empty() || etas.is_empty() {
        return Err(Error::InvalidParameter("empty grid".into()));
    }
    let child_labels: Vec<usize> = c.roots().iter().flat_map(|r| r.children.iter().map(|e| e.0)).collect();
    let mut cells = Vec::with_capacity(lambdas.len() * etas.len());
    for &l in lambdas {
        for (st, &eta) in solve_green_path(c, l, etas)?.iter().zip(etas) {
            if let Some(&k) = child_labels.iter().find(|&&k| st.zeta[k].im.abs() < floor) {
                return Err(Error::ZeroImaginaryPart(format!("|Im ζ_{k}| below {floor:e} at λ = {l}, η = {eta}")));
            }
            cells.push((l, eta, neighbour_moment(c, st, power)));
        }
    }
    let best = cells.iter().copied().fold((f64::NAN, f64::NAN, f64::NEG_INFINITY), |a, b| if b.2 > a.2 { b } else { a });
    Ok(MomentReport { value: best.2, argmax: (best.0, best.1), cells })
}
