//! Experiment bodies. Each returns its tables; writing and manifests live in [`crate::run()`].

mod anderson;
mod cone;
mod diagnostics;
mod qe;

use qergo_core::graph::Graph;
use qergo_core::kernels::BoundedKernel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind, KernelKind, KernelSpec};
use crate::error::Result;
use crate::table::Table;

/// Everything an experiment produces besides the manifest.
#[derive(Debug, Default)]
pub struct Output {
    pub tables: Vec<Table>,
    /// Extra files (name, bytes), e.g. population snapshots.
    pub files: Vec<(String, Vec<u8>)>,
    /// Free-form remarks copied into the manifest.
    pub notes: Vec<String>,
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Output> {
    let hash = cfg.short_hash();
    match cfg.experiment {
        ExperimentKind::QeRegular => qe::qe_regular(cfg, &hash),
        ExperimentKind::QeAnderson => qe::qe_anderson(cfg, &hash),
        ExperimentKind::ConeSolve => cone::cone_solve(cfg, &hash),
        ExperimentKind::ConeSpectrum => cone::cone_spectrum(cfg, &hash),
        ExperimentKind::GreenMoments => cone::green_moments(cfg, &hash),
        ExperimentKind::SigmaAc => anderson::sigma_ac(cfg, &hash),
        ExperimentKind::BiregularWeights => cone::biregular_weights(cfg, &hash),
        ExperimentKind::Diagnostics => diagnostics::diagnostics(cfg, &hash),
    }
}

/// Runs `f` over the cells on the rayon pool. Results come back in cell order
/// and the first failing cell (in that order) decides the error.
pub(crate) fn par_cells<C, R, F>(cells: &[C], f: F) -> Result<Vec<R>>
where
    C: Sync,
    R: Send,
    F: Fn(&C) -> Result<R> + Sync + Send,
{
    cells.par_iter().map(f).collect::<Vec<_>>().into_iter().collect()
}

/// Independent seed for a purpose `tag` derived from a sweep seed.
pub(crate) fn stream_seed(seed: u64, tag: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng.gen()
}

pub(crate) const KERNEL_STREAM: u64 = 1;
pub(crate) const DISORDER_STREAM: u64 = 2;
pub(crate) const PATH_KERNEL_STREAM: u64 = 3;

/// The bounded kernel of the config on `g`, drawn from `seed`.
pub fn bounded_kernel(spec: &KernelSpec, g: &Graph, seed: u64) -> BoundedKernel {
    let n = g.vertex_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.kind {
        KernelKind::DiagonalIndicator => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            BoundedKernel::centred_half_indicator(&order)
        }
        KernelKind::NearestNeighbour => BoundedKernel {
            n,
            entries: g.edges().flat_map(|(x, y)| [(x, y), (y, x)]).map(|(x, y)| (x, y, 1.0.into())).collect(),
        },
        KernelKind::RandomBounded => {
            let r = spec.range();
            let mut entries = Vec::new();
            for x in 0..n {
                let dist = g.distances_from(x);
                for (y, &d) in dist.iter().enumerate().skip(x) {
                    if d > r {
                        continue;
                    }
                    let v: f64 = rng.gen_range(-1.0..=1.0);
                    entries.push((x, y, v.into()));
                    if y != x {
                        entries.push((y, x, v.into()));
                    }
                }
            }
            entries.sort_by_key(|e| (e.0, e.1));
            BoundedKernel { n, entries }
        }
    }
}

/// Mean and sample standard deviation (`NaN` below two samples).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use qergo_core::generators::{cycle, random_regular};

    #[test]
    fn kernels_are_bounded_and_in_range() {
        let g = random_regular(60, 3, 4).unwrap();
        for kind in [KernelKind::DiagonalIndicator, KernelKind::RandomBounded, KernelKind::NearestNeighbour] {
            let spec = KernelSpec { kind, range: None };
            let k = bounded_kernel(&spec, &g, 9);
            assert_eq!(k, bounded_kernel(&spec, &g, 9));
            for &(x, y, v) in &k.entries {
                assert!(v.norm() <= 1.0);
                assert!(g.distances_from(x)[y] <= spec.range());
            }
        }
        let half = bounded_kernel(&KernelSpec { kind: KernelKind::DiagonalIndicator, range: None }, &g, 1);
        assert!(half.entries.iter().map(|e| e.2.re).sum::<f64>().abs() < 1e-12);
        let c = cycle(8).unwrap();
        let rb = bounded_kernel(&KernelSpec { kind: KernelKind::RandomBounded, range: Some(2) }, &c, 0);
        assert_eq!(rb.entries.len(), 8 * 5);
    }

    #[test]
    fn helpers() {
        assert_ne!(stream_seed(1, KERNEL_STREAM), stream_seed(1, DISORDER_STREAM));
        assert_eq!(stream_seed(1, KERNEL_STREAM), stream_seed(1, KERNEL_STREAM));
        let (m, s) = mean_sd(&[1.0, 2.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
        assert!(mean_sd(&[4.0]).1.is_nan());
        let r: Result<Vec<usize>> = par_cells(&[1usize, 2, 3], |&c| Ok(c * 2));
        assert_eq!(r.unwrap(), vec![2, 4, 6]);
    }
}
