use qergo_core::anderson::finite_anderson_attach;
use qergo_core::cone::{kbar_from, CoverGreen};
use qergo_core::kernels::{qe_discrepancy, BoundedKernel};
use qergo_core::spectral::{eigensystem, EigenSystem};
use qergo_core::C64;

use super::{bounded_kernel, mean_sd, par_cells, stream_seed, Output, DISORDER_STREAM, KERNEL_STREAM};
use crate::config::ExperimentConfig;
use crate::error::{Result, StageExt};
use crate::row;
use crate::table::Table;

pub(super) fn qe_regular(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let gen = cfg.generator.as_ref().expect("validated");
    let kspec = cfg.kernel.as_ref().expect("validated");
    let range = kspec.range();
    let cells: Vec<(usize, u64)> =
        cfg.sweep.n.iter().flat_map(|&n| cfg.graph_seeds().into_iter().map(move |s| (n, s))).collect();
    let rows = par_cells(&cells, |&(n, seed)| {
        let g = gen.build(n, seed)?;
        let es = eigensystem(&g).stage(|| format!("eigensystem (n = {n}, seed = {seed})"))?;
        let k = bounded_kernel(kspec, &g, stream_seed(seed, KERNEL_STREAM));
        let r = qe_discrepancy(&es, &g, &k, range).stage(|| format!("qe discrepancy (n = {n}, seed = {seed})"))?;
        Ok(row![hash, n, g.vertex_count(), seed, range, r.value, r.grade_value, r.max_grade_gap, r.bad_fraction])
    })?;
    let mut results = Table::new(
        "results.csv",
        &["config_hash", "n", "vertices", "seed", "range", "discrepancy", "grade_discrepancy", "max_grade_gap", "bad_fraction"],
    )
    .aggregate(&["n", "range"], &["discrepancy", "grade_discrepancy", "bad_fraction"]);
    results.extend(rows);

    // Mean discrepancy per N and its ratio to the smallest N.
    let mut trend = Table::new("trend.csv", &["config_hash", "n", "seeds", "mean_discrepancy", "sd_discrepancy", "ratio_to_first"]);
    let mut first = None;
    for &n in &cfg.sweep.n {
        let v: Vec<f64> = cells
            .iter()
            .zip(&results.rows)
            .filter(|((cn, _), _)| *cn == n)
            .map(|(_, r)| r[5].parse().expect("own output"))
            .collect();
        let (m, sd) = mean_sd(&v);
        let base = *first.get_or_insert(m);
        trend.push(row![hash, n, v.len(), m, sd, m / base]);
    }
    Ok(Output { tables: vec![results, trend], ..Output::default() })
}

/// `⟨ψ, Kψ⟩` for a real unit vector.
fn diagonal_form(k: &BoundedKernel, psi: &[f64]) -> C64 {
    k.entries.iter().map(|&(x, y, v)| v * (psi[x] * psi[y])).sum()
}

/// `(1/N) Σ_{λ_j ∈ I} |⟨ψ_j,Kψ_j⟩ − ⟨K⟩_{λ_j+iη₀}|` and the number of terms.
fn anderson_discrepancy(
    g: &qergo_core::graph::Graph,
    es: &EigenSystem,
    k: &BoundedKernel,
    interval: [f64; 2],
    eta0: f64,
) -> qergo_core::Result<(f64, usize)> {
    let mut sum = 0.0;
    let mut count = 0;
    for j in 0..es.n {
        let lam = es.values[j];
        if lam < interval[0] || lam > interval[1] {
            continue;
        }
        let cg = CoverGreen::solve(g, C64::new(lam, eta0))?;
        sum += (diagonal_form(k, es.vector(j)) - kbar_from(&cg, k)?).norm();
        count += 1;
    }
    Ok((sum / es.n as f64, count))
}

pub(super) fn qe_anderson(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let gen = cfg.generator.as_ref().expect("validated");
    let kspec = cfg.kernel.as_ref().expect("validated");
    let law = cfg.disorder.expect("validated").law();
    let sw = &cfg.sweep;
    let interval = sw.interval.expect("validated");
    let mut cells = Vec::new();
    for &n in &sw.n {
        for &seed in &sw.seeds {
            for &eps in &sw.epsilon {
                for &eta0 in &sw.eta0 {
                    cells.push((n, seed, eps, eta0));
                }
            }
        }
    }
    let rows = par_cells(&cells, |&(n, seed, eps, eta0)| {
        let stage = || format!("n = {n}, seed = {seed}, epsilon = {eps}, eta0 = {eta0}");
        let g0 = gen.build(n, seed)?;
        let g = finite_anderson_attach(&g0, law, eps, stream_seed(seed, DISORDER_STREAM)).stage(stage)?;
        let es = eigensystem(&g).stage(|| format!("eigensystem ({})", stage()))?;
        let k = bounded_kernel(kspec, &g, stream_seed(seed, KERNEL_STREAM));
        let (d, count) = anderson_discrepancy(&g, &es, &k, interval, eta0).stage(|| format!("cover Green ({})", stage()))?;
        Ok(row![hash, n, g.vertex_count(), seed, eps, eta0, interval[0], interval[1], count, d])
    })?;
    let mut results = Table::new(
        "results.csv",
        &["config_hash", "n", "vertices", "seed", "epsilon", "eta0", "interval_lo", "interval_hi", "eigenvalues_in_interval", "discrepancy"],
    )
    .aggregate(&["n", "epsilon", "eta0"], &["discrepancy"]);
    results.extend(rows);

    let mut cols = vec!["config_hash".to_string(), "epsilon".into(), "n".into()];
    cols.extend(sw.eta0.iter().map(|e| format!("eta0={e}")));
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut matrix = Table::new("limit_matrix.csv", &col_refs)
        .with_preamble("mean discrepancy over seeds, rows N, columns eta0")
        .with_preamble("limit order: N -> infinity first, then eta0 -> 0; no extrapolation is applied");
    for &eps in &sw.epsilon {
        for &n in &sw.n {
            let mut r = row![hash, eps, n];
            for &eta0 in &sw.eta0 {
                let v: Vec<f64> = cells
                    .iter()
                    .zip(&results.rows)
                    .filter(|((cn, _, ce, ch), _)| *cn == n && *ce == eps && *ch == eta0)
                    .map(|(_, r)| r[9].parse().expect("own output"))
                    .collect();
                r.push(crate::table::Field::field(&mean_sd(&v).0));
            }
            matrix.push(r);
        }
    }
    let mut notes = vec!["weights: Phi from the universal-cover Green function at lambda_j + i eta0".to_string()];
    if !law.is_holder() {
        notes.push(format!("{} disorder does not satisfy the Holder condition; evidence only", law.name()));
    }
    Ok(Output { tables: vec![results, matrix], notes, ..Output::default() })
}
