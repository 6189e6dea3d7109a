use qergo_core::anderson::{inverse_moment_neighbours, zeta_population, ZetaPopulation};
use qergo_core::C64;
use serde::Serialize;

use super::{par_cells, Output};
use crate::config::ExperimentConfig;
use crate::error::{Result, StageExt};
use crate::row;
use crate::table::Table;

#[derive(Serialize)]
struct Snapshot<'a> {
    epsilon: f64,
    seed: u64,
    lambda: f64,
    eta: f64,
    population: &'a ZetaPopulation,
}

struct Cell {
    epsilon: f64,
    seed: u64,
    lambda: f64,
    pops: Vec<ZetaPopulation>,
    moments: Vec<(f64, f64, f64, f64)>,
}

/// Pools are seeded with the sweep seed itself at every `(λ, η)`, matching
/// `qergo_core::anderson::sigma_ac_scan`.
pub(super) fn sigma_ac(cfg: &ExperimentConfig, hash: &str) -> Result<Output> {
    let c = cfg.cone.as_ref().expect("validated").build()?;
    let law = cfg.disorder.expect("validated").law();
    let sw = &cfg.sweep;
    let lambdas = sw.lambda.values();
    if let Some(&bad) = sw.delta.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(crate::error::LabError::Validation(format!("delta = {bad} outside (0, 1)")));
    }
    if let Some(&bad) = sw.eta0.iter().find(|e| **e >= 1.0) {
        return Err(crate::error::LabError::Validation(format!("eta0 = {bad} outside (0, 1)")));
    }
    let mut keys = Vec::new();
    for &epsilon in &sw.epsilon {
        for &seed in &sw.seeds {
            for &lambda in &lambdas {
                keys.push((epsilon, seed, lambda));
            }
        }
    }
    let cells = par_cells(&keys, |&(epsilon, seed, lambda)| {
        let mut pops = Vec::with_capacity(sw.eta0.len());
        let mut moments = Vec::new();
        for &eta in &sw.eta0 {
            let stage = || format!("population at epsilon = {epsilon}, seed = {seed}, gamma = {lambda} + {eta}i");
            let pop = zeta_population(&c, law, epsilon, C64::new(lambda, eta), sw.pool_size, sw.generations, seed).stage(stage)?;
            for &s in &sw.s {
                let e = inverse_moment_neighbours(&c, &pop, s, seed).stage(stage)?;
                moments.push((eta, s, e.value, e.half_width));
            }
            pops.push(pop);
        }
        Ok(Cell { epsilon, seed, lambda, pops, moments })
    })?;

    let mut scan = Table::new(
        "results.csv",
        &["config_hash", "epsilon", "seed", "delta", "lambda", "eta", "label", "frac_above_delta", "marked"],
    )
    .aggregate(&["lambda", "epsilon", "delta", "eta", "label"], &["frac_above_delta"]);
    // `marked_fraction` repeats the verdict as 0/1 so it can be averaged over seeds.
    let mut marked =
        Table::new("marked.csv", &["config_hash", "epsilon", "seed", "delta", "lambda", "marked", "marked_fraction"])
            .aggregate(&["lambda", "epsilon", "delta"], &["marked_fraction"]);
    let mut moments = Table::new("moments.csv", &["config_hash", "epsilon", "seed", "lambda", "eta", "s", "moment", "half_width"])
        .aggregate(&["lambda", "epsilon", "eta", "s"], &["moment"]);
    let mut snapshots = Vec::new();
    for cell in &cells {
        for &delta in &sw.delta {
            let mut all = true;
            for (eta, pop) in sw.eta0.iter().zip(&cell.pops) {
                for label in 0..c.label_count() {
                    let f = pop.fraction_above(label, delta);
                    all &= f > delta;
                    scan.push(row![hash, cell.epsilon, cell.seed, delta, cell.lambda, eta, label, f, f > delta]);
                }
            }
            marked.push(row![hash, cell.epsilon, cell.seed, delta, cell.lambda, all, if all { 1.0 } else { 0.0 }]);
        }
        for &(eta, s, v, hw) in &cell.moments {
            moments.push(row![hash, cell.epsilon, cell.seed, cell.lambda, eta, s, v, hw]);
        }
        if sw.snapshot {
            for (eta, pop) in sw.eta0.iter().zip(&cell.pops) {
                snapshots.push(Snapshot { epsilon: cell.epsilon, seed: cell.seed, lambda: cell.lambda, eta: *eta, population: pop });
            }
        }
    }
    let mut out = Output { tables: vec![scan, marked], ..Output::default() };
    if !sw.s.is_empty() {
        out.tables.push(moments);
    }
    if sw.snapshot {
        out.files.push(("pools.json".into(), serde_json::to_vec(&snapshots)?));
    }
    if !law.is_holder() {
        out.notes.push(format!("{} disorder does not satisfy the Holder condition; evidence only", law.name()));
    }
    Ok(out)
}
