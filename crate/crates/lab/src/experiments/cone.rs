use qergo_core::cone::{biregular_green, detect_spectrum, green_moment, phi_weights_from, solve_green_path, CoverGreen};
use qergo_core::C64;

use super::{mean_sd, par_cells, Output};
use crate::config::{ExperimentConfig, GeneratorSpec};
use crate::error::{Result, StageExt};
use crate::row;
use crate::table::Table;

pub(super) fn cone_solve(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let c = cfg.cone.as_ref().expect("validated").build()?;
    let lambdas = cfg.sweep.lambda.values();
    let etas = &cfg.sweep.eta0;
    let per_lambda = par_cells(&lambdas, |&l| solve_green_path(&c, l, etas).stage(|| format!("cone solve at lambda = {l}")))?;
    let mut zeta = Table::new(
        "results.csv",
        &["config_hash", "lambda", "eta", "label", "label_name", "zeta_re", "zeta_im", "residual"],
    )
    .aggregate(&["lambda", "eta", "label"], &["zeta_re", "zeta_im"]);
    let mut roots = Table::new(
        "root_green.csv",
        &["config_hash", "lambda", "eta", "root_type", "weight", "green_re", "green_im", "continuation_steps"],
    );
    for (l, states) in lambdas.iter().zip(&per_lambda) {
        for (eta, st) in etas.iter().zip(states) {
            for (j, z) in st.zeta.iter().enumerate() {
                zeta.push(row![hash, l, eta, j, c.labels()[j], z.re, z.im, st.residual]);
            }
            for (r, rt) in c.roots().iter().enumerate() {
                let g = st.root_green(&c, r);
                roots.push(row![hash, l, eta, r, rt.weight, g.re, g.im, st.branch_certificate.len()]);
            }
        }
    }
    Ok(Output { tables: vec![zeta, roots], ..Output::default() })
}

pub(super) fn cone_spectrum(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let c = cfg.cone.as_ref().expect("validated").build()?;
    let grid = cfg.sweep.lambda.values();
    let th = cfg.sweep.threshold;
    let reports = par_cells(&cfg.sweep.eta0, |&eta| {
        detect_spectrum(&c, &grid, eta, th).stage(|| format!("spectrum detection at eta = {eta}"))
    })?;
    let mut points = Table::new(
        "results.csv",
        &["config_hash", "eta", "lambda", "min_im_zeta", "raw_min_im_zeta", "in_spectrum", "solved"],
    )
    .aggregate(&["lambda", "eta"], &["min_im_zeta"]);
    let mut intervals = Table::new("intervals.csv", &["config_hash", "eta", "kind", "lo", "hi"]);
    for r in &reports {
        for p in &r.points {
            points.push(row![hash, r.eta, p.lambda, p.min_im_zeta, p.raw_min_im_zeta, p.in_spectrum, p.solved]);
        }
        for &(lo, hi) in &r.intervals {
            intervals.push(row![hash, r.eta, "spectrum", lo, hi]);
        }
        for &(lo, hi) in &r.exclusions {
            intervals.push(row![hash, r.eta, "excluded", lo, hi]);
        }
    }
    let notes = reports
        .iter()
        .filter(|r| !r.failures.is_empty())
        .map(|r| format!("eta = {}: continuation failed at {} grid points", r.eta, r.failures.len()))
        .collect();
    Ok(Output { tables: vec![points, intervals], notes, ..Output::default() })
}

pub(super) fn green_moments(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let c = cfg.cone.as_ref().expect("validated").build()?;
    let lambdas = cfg.sweep.lambda.values();
    let etas = &cfg.sweep.eta0;
    let floor = cfg.sweep.floor;
    let reports = par_cells(&cfg.sweep.s, |&s| {
        green_moment(&c, &lambdas, etas, s, floor).stage(|| format!("inverse moment of order {s}"))
    })?;
    let mut cells = Table::new("results.csv", &["config_hash", "s", "lambda", "eta", "moment"])
        .aggregate(&["lambda", "s", "eta"], &["moment"]);
    let mut sup = Table::new("sup.csv", &["config_hash", "s", "sup_moment", "argmax_lambda", "argmax_eta"]);
    for (s, r) in cfg.sweep.s.iter().zip(&reports) {
        for &(l, eta, v) in &r.cells {
            cells.push(row![hash, s, l, eta, v]);
        }
        sup.push(row![hash, s, r.value, r.argmax.0, r.argmax.1]);
    }
    Ok(Output { tables: vec![cells, sup], ..Output::default() })
}

pub(super) fn biregular_weights(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let gen = cfg.generator.as_ref().expect("validated");
    let GeneratorSpec::Biregular { p, q } = *gen else { unreachable!("validated") };
    let lambdas = cfg.sweep.lambda.values();
    let mut cells = Vec::new();
    for &n in &cfg.sweep.n {
        for &seed in &cfg.sweep.seeds {
            for &l in &lambdas {
                for &eta in &cfg.sweep.eta0 {
                    cells.push((n, seed, l, eta));
                }
            }
        }
    }
    let (pf, qf) = (p as f64, q as f64);
    let rows = par_cells(&cells, |&(n, seed, l, eta)| {
        let stage = || format!("n = {n}, seed = {seed}, gamma = {l} + {eta}i");
        let g = gen.build(n, seed)?;
        let gamma = C64::new(l, eta);
        let cg = CoverGreen::solve(&g, gamma).stage(|| format!("cover Green ({})", stage()))?;
        let w = phi_weights_from(&cg, 0).stage(|| format!("Phi weights ({})", stage()))?;
        let closed = biregular_green(p, q, gamma).stage(|| format!("closed form ({})", stage()))?;
        let colours = g.colours().expect("biregular graphs are coloured");
        let diag = w.diagonal();
        let nv = g.vertex_count() as f64;
        let mean_of = |c: u32| {
            let v: Vec<f64> = diag.iter().zip(colours).filter(|(_, &k)| k == c).map(|(d, _)| d * nv).collect();
            mean_sd(&v).0
        };
        let black_expected = (pf + qf + 2.0) / (2.0 * (qf + 1.0));
        let white_expected = (pf + qf + 2.0) / (2.0 * (pf + 1.0));
        Ok(row![
            hash,
            n,
            g.vertex_count(),
            seed,
            l,
            eta,
            mean_of(0),
            black_expected,
            mean_of(1),
            white_expected,
            diag.iter().sum::<f64>(),
            closed.g_black.im / closed.g_white.im,
            (pf + 1.0) / (qf + 1.0)
        ])
    })?;
    let mut t = Table::new(
        "results.csv",
        &[
            "config_hash",
            "n",
            "vertices",
            "seed",
            "lambda",
            "eta",
            "black_n_phi",
            "black_n_phi_expected",
            "white_n_phi",
            "white_n_phi_expected",
            "diagonal_sum",
            "im_green_ratio",
            "im_green_ratio_expected",
        ],
    )
    .aggregate(&["lambda", "n", "eta"], &["black_n_phi", "white_n_phi", "diagonal_sum"])
    .with_preamble(&format!("p = {p}, q = {q}; n_phi columns are N times the mean diagonal weight per colour"));
    t.extend(rows);
    Ok(Output { tables: vec![t], ..Output::default() })
}
