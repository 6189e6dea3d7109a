use std::path::Path;
use std::process::Command;

use qergo::manifest::{Manifest, MANIFEST_FILE};
use qergo::report::report;
use qergo::table::Table;
use qergo::{run, ExperimentConfig, LabError};
use qergo_core::anderson::{sigma_ac_scan, PoolParams, PotentialLaw};
use qergo_core::cone::ConeSystem;
use qergo_core::C64;

const QE: &str = r#"
experiment = "qe-regular"
[generator]
kind = "random-regular"
degree = 3
[kernel]
kind = "diagonal-indicator"
[sweep]
n = [40]
seeds = [0, 1, 2]
"#;

const CONE: &str = r#"
experiment = "cone-solve"
[cone]
kind = "regular-tree"
q = 2
[sweep]
lambda = { from = -3.5, to = 3.5, points = 50 }
eta0 = [0.01]
"#;

const SIGMA: &str = r#"
experiment = "sigma-ac"
[cone]
kind = "regular-tree"
q = 2
[disorder]
law = "uniform"
a = 1.0
[sweep]
epsilon = [0.2]
delta = [0.1]
seeds = [4]
lambda = [-3.2, -1.0, 0.0, 2.5, 3.4]
eta0 = [0.1, 0.01]
pool_size = 300
generations = 30
"#;

fn cfg(text: &str, overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    ExperimentConfig::parse(text, &o).unwrap()
}

fn read_table(dir: &Path, file: &str) -> Table {
    Table::read(&dir.join(file)).unwrap()
}

fn num(t: &Table, row: usize, col: &str) -> f64 {
    t.rows[row][t.column(col).unwrap()].parse().unwrap()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qergo"))
}

#[test]
fn run_writes_manifest_and_tags_every_row() {
    let root = tempfile::tempdir().unwrap();
    let c = cfg(CONE, &[]);
    let out = run(&c, root.path()).unwrap();
    assert_eq!(out.dir, root.path().join("cone-solve"));
    let m = Manifest::read(&out.dir.join(MANIFEST_FILE)).unwrap();
    assert_eq!(m.config_hash, c.hash());
    assert_eq!(m.experiment, "cone-solve");
    assert!(m.versions.contains_key("qergo-core"));
    assert_eq!(ExperimentConfig::parse(&toml_of(&m), &[]).unwrap().hash(), c.hash());
    for entry in &m.tables {
        let t = read_table(&out.dir, &entry.file);
        assert_eq!(t.rows.len(), entry.rows);
        assert_eq!(t.columns[0], "config_hash");
        assert!(t.rows.iter().all(|r| r[0] == c.short_hash()), "{}", entry.file);
    }
}

/// The manifest's config, turned back into TOML.
fn toml_of(m: &Manifest) -> String {
    let mut v = m.config.clone();
    strip_nulls(&mut v);
    toml::to_string(&v).unwrap()
}

fn strip_nulls(v: &mut serde_json::Value) {
    if let serde_json::Value::Object(o) = v {
        o.retain(|_, x| !x.is_null());
        o.values_mut().for_each(strip_nulls);
    }
}

#[test]
fn reruns_are_byte_identical() {
    for (text, extra) in [(QE, vec![]), (SIGMA, vec!["sweep.s=[2.0]", "sweep.snapshot=true"])] {
        let c = cfg(text, &extra);
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ra = run(&c, a.path()).unwrap();
        let rb = run(&c, b.path()).unwrap();
        assert_eq!(ra.manifest.tables, rb.manifest.tables);
        for f in ra.manifest.tables.iter().map(|t| &t.file).chain(ra.manifest.files.iter().map(|f| &f.file)) {
            assert_eq!(std::fs::read(ra.dir.join(f)).unwrap(), std::fs::read(rb.dir.join(f)).unwrap(), "{f}");
        }
    }
}

#[test]
fn empty_sweep_is_rejected_without_outputs() {
    let root = tempfile::tempdir().unwrap();
    let c = cfg(QE, &["sweep.seeds=[]"]);
    assert!(matches!(run(&c, root.path()), Err(LabError::Validation(_))));
    assert_eq!(std::fs::read_dir(root.path()).unwrap().count(), 0);

    let config = root.path().join("qe.toml");
    std::fs::write(&config, QE).unwrap();
    let out = bin().args(["run", config.to_str().unwrap(), "--set", "sweep.n=[]", "--root"]).arg(root.path()).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.n is empty"));
    assert!(!root.path().join("qe-regular").exists());
    let v = bin().args(["validate", config.to_str().unwrap(), "--set", "sweep.seeds=[]"]).output().unwrap();
    assert!(!v.status.success());
}

#[test]
fn module_errors_name_the_stage() {
    let root = tempfile::tempdir().unwrap();
    // 3-regular graphs need an even vertex count.
    let err = run(&cfg(QE, &["sweep.n=[41]"]), root.path()).unwrap_err().to_string();
    assert!(err.contains("generator (n = 41"), "{err}");
    assert!(!root.path().join("qe-regular").exists());
}

#[test]
fn cli_uses_the_output_root_variable() {
    let root = tempfile::tempdir().unwrap();
    let config = root.path().join("cone.toml");
    std::fs::write(&config, CONE).unwrap();
    let out = bin()
        .args(["run", config.to_str().unwrap(), "--set", "output=from-env", "--threads", "1"])
        .env("QERGO_OUTPUT_ROOT", root.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(root.path().join("from-env").join(MANIFEST_FILE).is_file());
    let rep = bin().arg("report").arg(root.path().join("from-env")).output().unwrap();
    assert!(rep.status.success());
}

#[test]
fn report_of_a_single_run_has_one_row() {
    let root = tempfile::tempdir().unwrap();
    let out = run(&cfg(QE, &["sweep.seeds=[7]"]), root.path()).unwrap();
    let rep = report(&out.dir).unwrap();
    let agg = read_table(&rep.dir, "qe-regular__results.csv");
    assert_eq!(agg.rows.len(), 1);
    assert_eq!(agg.rows[0][agg.column("count").unwrap()], "1");
    assert_eq!(agg.rows[0][agg.column("discrepancy_sd").unwrap()], "");
    let raw = read_table(&out.dir, "results.csv");
    assert_eq!(num(&agg, 0, "discrepancy_mean"), num(&raw, 0, "discrepancy"));
}

#[test]
fn report_over_seeds_gives_mean_and_sample_sd() {
    let root = tempfile::tempdir().unwrap();
    run(&cfg(QE, &[]), root.path()).unwrap();
    run(&cfg(QE, &["sweep.n=[40, 60]", "output=second"]), root.path()).unwrap();
    let rep = report(root.path()).unwrap();
    assert_eq!(rep.runs.len(), 2);
    let raw = read_table(&root.path().join("qe-regular"), "results.csv");
    let v: Vec<f64> = (0..3).map(|r| num(&raw, r, "discrepancy")).collect();
    let mean = v.iter().sum::<f64>() / 3.0;
    let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
    let agg = read_table(&rep.dir, "qe-regular__results.csv");
    assert_eq!(agg.rows.len(), 1);
    assert!((num(&agg, 0, "discrepancy_mean") - mean).abs() < 1e-15);
    assert!((num(&agg, 0, "discrepancy_sd") - sd).abs() < 1e-15);
    let second = read_table(&rep.dir, "second__results.csv");
    assert_eq!(second.rows.len(), 2);
    let plot = std::fs::read_to_string(rep.dir.join("plot").join("second__results__discrepancy__range=0.dat")).unwrap();
    assert_eq!(plot.lines().count(), 2);
    assert!(plot.lines().all(|l| l.split(' ').count() == 2));
    // Aggregation is deterministic.
    let again = report(root.path()).unwrap();
    for f in &again.files {
        assert!(rep.files.contains(f));
    }
    assert_eq!(read_table(&again.dir, "second__results.csv").rows, second.rows);
}

#[test]
fn corrupted_or_missing_manifests_are_reported() {
    let root = tempfile::tempdir().unwrap();
    assert!(matches!(report(root.path()), Err(LabError::MissingManifest(_))));

    let out = run(&cfg(CONE, &["sweep.lambda=[0.0]"]), root.path()).unwrap();
    let manifest = out.dir.join(MANIFEST_FILE);
    let good = std::fs::read_to_string(&manifest).unwrap();
    std::fs::write(&manifest, &good[..good.len() / 2]).unwrap();
    let err = report(root.path()).unwrap_err();
    assert!(matches!(err, LabError::CorruptManifest { .. }));
    assert!(err.to_string().contains(&manifest.display().to_string()), "{err}");

    std::fs::write(&manifest, &good).unwrap();
    let results = out.dir.join("results.csv");
    let mut body = std::fs::read_to_string(&results).unwrap();
    let last = body.lines().last().unwrap().to_string();
    body.push_str(&last);
    body.push('\n');
    std::fs::write(&results, body).unwrap();
    let err = report(&out.dir).unwrap_err().to_string();
    assert!(err.contains("manifest.json") && err.contains("results.csv"), "{err}");

    let cli = bin().arg("report").arg(&out.dir).output().unwrap();
    assert!(!cli.status.success());
    assert!(String::from_utf8_lossy(&cli.stderr).contains("manifest.json"));
}

/// Root of `2ζ² − γζ + 1 = 0` with `Im ζ < 0`.
fn quadratic_root(gamma: C64) -> C64 {
    let disc = (gamma * gamma - 8.0).sqrt();
    let a = (gamma + disc) / 4.0;
    let b = (gamma - disc) / 4.0;
    if a.im < 0.0 {
        a
    } else {
        b
    }
}

#[test]
fn cone_solve_on_the_binary_tree_matches_the_quadratic() {
    let root = tempfile::tempdir().unwrap();
    let out = run(&cfg(CONE, &[]), root.path()).unwrap();
    let t = read_table(&out.dir, "results.csv");
    let mut checked = 0;
    for r in 0..t.rows.len() {
        if t.rows[r][t.column("label").unwrap()] != "1" {
            continue;
        }
        let gamma = C64::new(num(&t, r, "lambda"), num(&t, r, "eta"));
        let z = C64::new(num(&t, r, "zeta_re"), num(&t, r, "zeta_im"));
        assert!((z - quadratic_root(gamma)).norm() < 1e-10, "{gamma}");
        assert!(num(&t, r, "residual") < 1e-12);
        checked += 1;
    }
    assert_eq!(checked, 50);
}

#[test]
fn sigma_ac_matches_the_core_scan() {
    let root = tempfile::tempdir().unwrap();
    let c = cfg(SIGMA, &[]);
    let out = run(&c, root.path()).unwrap();
    let t = read_table(&out.dir, "marked.csv");
    let lambdas = c.sweep.lambda.values();
    let cone = ConeSystem::from_dense(&[vec![0, 3], vec![0, 2]], 0).unwrap();
    let pool = PoolParams { pool_size: 300, generations: 30, seed: 4 };
    let scan = sigma_ac_scan(&cone, PotentialLaw::Uniform { a: 1.0 }, 0.2, 0.1, &lambdas, &[0.1, 0.01], pool).unwrap();
    assert_eq!(t.rows.len(), scan.marked.len());
    for (r, (l, m)) in scan.marked.iter().enumerate() {
        assert_eq!(num(&t, r, "lambda"), *l);
        assert_eq!(t.rows[r][t.column("marked").unwrap()], m.to_string());
    }
    assert!(scan.marked.iter().any(|m| m.1) && scan.marked.iter().any(|m| !m.1));
    let cells = read_table(&out.dir, "results.csv");
    for (r, cell) in scan.cells.iter().enumerate() {
        assert_eq!(num(&cells, r, "frac_above_delta"), cell.frac_above_delta);
    }
}
