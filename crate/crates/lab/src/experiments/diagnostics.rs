use qergo_core::cone::CoverGreen;
use qergo_core::graph::{bst_statistic, Graph};
use qergo_core::kernels::{nabla_star, nabla_star_sigma_n, quantum_variance, reduction_check, s_gamma_diagnostics, NbKernel};
use qergo_core::paths::DirectedEdgeSpace;
use qergo_core::spectral::{eigensystem, rho_p_bound, walk_spectral_gap};
use qergo_core::C64;

use super::{par_cells, stream_seed, Output, PATH_KERNEL_STREAM};
use crate::config::ExperimentConfig;
use crate::error::{Result, StageExt};
use crate::row;
use crate::table::Table;

/// Radii reported in `bst.csv`.
const BST_RADII: [usize; 5] = [1, 2, 3, 4, 5];

struct CellOut {
    summary: Vec<String>,
    bst: Vec<Vec<String>>,
    sum_rule: Vec<Vec<String>>,
    identities: Vec<Vec<String>>,
}

pub(super) fn diagnostics(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let gen = cfg.generator.as_ref().expect("validated");
    let sw = &cfg.sweep;
    let lambdas = sw.lambda.values();
    let cells: Vec<(usize, u64)> = sw.n.iter().flat_map(|&n| cfg.graph_seeds().into_iter().map(move |s| (n, s))).collect();
    let outs = par_cells(&cells, |&(n, seed)| {
        let stage = |what: &str| format!("{what} (n = {n}, seed = {seed})");
        let g = gen.build(n, seed)?;
        let exp = walk_spectral_gap(&g).stage(|| stage("walk spectral gap"))?;
        let summary =
            row![hash, n, g.vertex_count(), seed, exp.beta, exp.beta_one_sided, rho_p_bound(&g), g.min_degree(), g.max_degree()];
        let bst = BST_RADII.iter().map(|&r| row![hash, n, seed, r, bst_statistic(&g, r)]).collect();
        let mut sum_rule = Vec::new();
        let d = DirectedEdgeSpace::new(&g, 1).stage(|| stage("path space"))?;
        for &l in &lambdas {
            for &eta in &sw.eta0 {
                let gamma = C64::new(l, eta);
                let cg = CoverGreen::solve(&g, gamma).stage(|| stage("cover Green"))?;
                let z = cg.edge_zeta();
                let rep = s_gamma_diagnostics(&d, 1, z, gamma).stage(|| stage("sum rule"))?;
                let dev = rep
                    .row_sums
                    .iter()
                    .enumerate()
                    .map(|(e, s)| {
                        let zr = z[d.reverse(e)];
                        (s - (1.0 - eta * zr.norm_sqr() / zr.im.abs())).abs()
                    })
                    .fold(0.0, f64::max);
                sum_rule.push(row![hash, n, seed, l, eta, rep.max_sumzeta_residual, dev, rep.max_phase_modulus_error]);
            }
        }
        let identities = if sw.t.is_empty() && sw.sigma_n.is_empty() { Vec::new() } else { identity_rows(&g, cfg, hash, n, seed)? };
        Ok(CellOut { summary, bst, sum_rule, identities })
    })?;

    let mut summary = Table::new(
        "results.csv",
        &["config_hash", "n", "vertices", "seed", "beta", "beta_one_sided", "rho_p_bound", "min_degree", "max_degree"],
    )
    .aggregate(&["n"], &["beta", "beta_one_sided"]);
    let mut bst = Table::new("bst.csv", &["config_hash", "n", "seed", "radius", "bad_fraction"])
        .aggregate(&["n", "radius"], &["bad_fraction"]);
    let mut sum_rule = Table::new(
        "sum_rule.csv",
        &["config_hash", "n", "seed", "lambda", "eta0", "sumzeta_residual", "row_sum_deviation", "phase_modulus_error"],
    )
    .aggregate(&["lambda", "n", "eta0"], &["sumzeta_residual", "row_sum_deviation"]);
    let mut identities =
        Table::new("identities.csv", &["config_hash", "n", "seed", "identity", "parameter", "lhs", "rhs", "residual"]);
    for o in outs {
        summary.push(o.summary);
        bst.extend(o.bst);
        sum_rule.extend(o.sum_rule);
        identities.extend(o.identities);
    }
    let mut tables = vec![summary, bst, sum_rule];
    if !identities.rows.is_empty() {
        tables.push(identities);
    }
    Ok(Output { tables, ..Output::default() })
}

/// Variance invariance under `Σⁿ` and the reduction inequality for a random `K ∈ ℋ₁`.
fn identity_rows(g: &Graph, cfg: &ExperimentConfig, hash: &str, n: usize, seed: u64) -> Result<Vec<Vec<String>>> {
    let stage = |what: &str| format!("{what} (n = {n}, seed = {seed})");
    let sw = &cfg.sweep;
    let top = 1 + 2 * sw.sigma_n.iter().copied().max().unwrap_or(0);
    let d = DirectedEdgeSpace::new(g, top.max(2)).stage(|| stage("path space"))?;
    let es = eigensystem(g).stage(|| stage("eigensystem"))?;
    let k = NbKernel::random(&d, 1, stream_seed(seed, PATH_KERNEL_STREAM)).stage(|| stage("random kernel"))?;
    let kv = k.grade(1).expect("grade 1");
    let mut rows = Vec::new();
    if !sw.sigma_n.is_empty() {
        let base = NbKernel::single(0, nabla_star(&d, 0, kv).stage(|| stage("divergence"))?);
        let v0 = quantum_variance(&es, &d, &base).stage(|| stage("variance"))?.value;
        for &m in &sw.sigma_n {
            let ks = nabla_star_sigma_n(&d, 1, kv, m).stage(|| stage("sigma_n"))?;
            let v = quantum_variance(&es, &d, &ks).stage(|| stage("variance"))?.value;
            rows.push(row![hash, n, seed, "variance_invariance", m, v, v0, (v - v0).abs()]);
        }
    }
    for &t in &sw.t {
        let (lhs, rhs) = reduction_check(&es, &d, 1, kv, t).stage(|| stage("reduction"))?;
        rows.push(row![hash, n, seed, "reduction_bound", t, lhs, rhs, rhs - lhs]);
    }
    Ok(rows)
}
