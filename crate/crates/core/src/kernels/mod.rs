//! Graded kernels on non-backtracking paths and the operators acting on them.
//!
//! A kernel `K = (K_j)` stores one complex value per path of `B_j` for each grade
//! it uses. Operators take a [`DirectedEdgeSpace`] that has the grades they touch
//! already built; lengths are checked on entry.

mod forms;
mod nb;
mod ops;
mod variance;

pub use forms::*;
pub use nb::*;
pub use ops::*;
pub use variance::*;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::paths::DirectedEdgeSpace;
use crate::{Error, Result, C64};

/// Tolerance for membership in the mean-zero subspace.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Element of `⊕_j ℋ_j`: a value array over `B_j` for each populated grade.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NbKernel {
    grades: BTreeMap<usize, Vec<C64>>,
}

impl NbKernel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Kernel with a single grade.
    pub fn single(k: usize, values: Vec<C64>) -> Self {
        let mut out = Self::new();
        out.grades.insert(k, values);
        out
    }

    /// Constant kernel `c` on `B_k`.
    pub fn constant(d: &DirectedEdgeSpace, k: usize, c: C64) -> Result<Self> {
        need_grade(d, k)?;
        Ok(Self::single(k, alloc::vec![c; d.len(k)]))
    }

    /// Kernel on `B_k` with real and imaginary parts uniform in `[-1, 1]`.
    pub fn random(d: &DirectedEdgeSpace, k: usize, seed: u64) -> Result<Self> {
        need_grade(d, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..d.len(k)).map(|_| C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))).collect();
        Ok(Self::single(k, v))
    }

    /// Real kernel on `B_k` with entries uniform in `[-1, 1]`.
    pub fn random_real(d: &DirectedEdgeSpace, k: usize, seed: u64) -> Result<Self> {
        need_grade(d, k)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..d.len(k)).map(|_| C64::new(rng.gen_range(-1.0..=1.0), 0.0)).collect();
        Ok(Self::single(k, v))
    }

    /// Replaces (or adds) grade `k`.
    pub fn insert(&mut self, k: usize, values: Vec<C64>) {
        self.grades.insert(k, values);
    }

    pub fn with_grade(mut self, k: usize, values: Vec<C64>) -> Self {
        self.insert(k, values);
        self
    }

    pub fn grade(&self, k: usize) -> Option<&[C64]> {
        self.grades.get(&k).map(Vec::as_slice)
    }

    /// Populated grades in increasing order.
    pub fn grades(&self) -> impl Iterator<Item = (usize, &[C64])> {
        self.grades.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.grades.is_empty()
    }

    pub fn max_grade(&self) -> Option<usize> {
        self.grades.keys().next_back().copied()
    }

    /// The only populated grade, or an error if there are several (or none).
    pub fn sole_grade(&self) -> Result<(usize, &[C64])> {
        let mut it = self.grades();
        match (it.next(), it.next()) {
            (Some(g), None) => Ok(g),
            _ => Err(Error::KernelContract("expected a kernel with exactly one grade".into())),
        }
    }

    /// `‖K‖_∞` over all grades.
    pub fn sup_norm(&self) -> f64 {
        self.grades.values().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `⟨K_k⟩ = (1/N) Σ_{B_k} K`.
    pub fn grade_mean(&self, k: usize, n_vertices: usize) -> C64 {
        self.grade(k).map_or(ZERO, |v| v.iter().sum::<C64>() / n_vertices as f64)
    }

    /// Every grade has `|⟨K_k⟩| ≤ MEAN_ZERO_TOL`.
    pub fn is_mean_zero(&self, n_vertices: usize) -> bool {
        self.grades.keys().all(|&k| self.grade_mean(k, n_vertices).norm() <= MEAN_ZERO_TOL)
    }

    /// Projection onto the mean-zero subspace, grade by grade.
    pub fn centred(&self) -> Self {
        let grades = self
            .grades
            .iter()
            .map(|(&k, v)| {
                let m = v.iter().sum::<C64>() / v.len().max(1) as f64;
                (k, v.iter().map(|z| z - m).collect())
            })
            .collect();
        Self { grades }
    }

    pub fn scaled(&self, s: C64) -> Self {
        let grades = self.grades.iter().map(|(&k, v)| (k, v.iter().map(|z| z * s).collect())).collect();
        Self { grades }
    }

    /// `self + s·other`; grades must have matching lengths where both exist.
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (&k, v) in &other.grades {
            let slot = out.grades.entry(k).or_insert_with(|| alloc::vec![ZERO; v.len()]);
            if slot.len() != v.len() {
                return Err(Error::DimensionMismatch { expected: slot.len(), got: v.len() });
            }
            for (a, b) in slot.iter_mut().zip(v) {
                *a += s * b;
            }
        }
        Ok(out)
    }

    /// Applies a per-grade map `(k, K_k) -> (k', K'_{k'})`, summing collisions.
    pub fn map_grades<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[C64]) -> Result<(usize, Vec<C64>)>,
    {
        let mut out = Self::new();
        for (k, v) in self.grades() {
            let (k2, w) = f(k, v)?;
            out = out.axpy(C64::new(1.0, 0.0), &Self::single(k2, w))?;
        }
        Ok(out)
    }

    /// Checks that every grade is built in `d` and has the right length.
    pub fn check(&self, d: &DirectedEdgeSpace) -> Result<()> {
        for (k, v) in self.grades() {
            check_grade(d, k, v)?;
        }
        Ok(())
    }
}

pub(crate) fn need_grade(d: &DirectedEdgeSpace, k: usize) -> Result<()> {
    if k > d.max_grade() {
        return Err(Error::GradeUnavailable(k));
    }
    Ok(())
}

pub(crate) fn check_grade(d: &DirectedEdgeSpace, k: usize, v: &[C64]) -> Result<()> {
    need_grade(d, k)?;
    if v.len() != d.len(k) {
        return Err(Error::DimensionMismatch { expected: d.len(k), got: v.len() });
    }
    Ok(())
}

/// `q` for a `(q+1)`-regular graph.
pub(crate) fn branching(d: &DirectedEdgeSpace) -> Result<f64> {
    match d.graph().regular_degree() {
        Some(r) if r >= 2 => Ok((r - 1) as f64),
        _ => Err(Error::NotRegular),
    }
}

/// `⟨a, b⟩ = Σ conj(a) b`.
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(C64::norm_sqr).sum()
}

pub(crate) fn real_to_complex(v: &[f64]) -> Vec<C64> {
    v.iter().map(|&x| C64::new(x, 0.0)).collect()
}

#[cfg(test)]
mod tests;
