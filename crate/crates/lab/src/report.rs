//! Aggregation of finished runs into summary CSVs and two-column plot files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{LabError, Result};
use crate::experiments::mean_sd;
use crate::manifest::{Manifest, MANIFEST_FILE};
use crate::row;
use crate::table::{sha256_hex, Field, Table};

pub const REPORT_DIR: &str = "report";

#[derive(Debug)]
pub struct ReportOutcome {
    pub dir: PathBuf,
    pub runs: Vec<PathBuf>,
    pub files: Vec<PathBuf>,
}

/// Run directories under `dir`: `dir` itself when it holds a manifest, otherwise
/// its immediate subdirectories that do, in name order.
pub fn find_runs(dir: &Path) -> Result<Vec<PathBuf>> {
    if dir.join(MANIFEST_FILE).is_file() {
        return Ok(vec![dir.to_path_buf()]);
    }
    let mut runs = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(LabError::io(dir))? {
        let p = entry.map_err(LabError::io(dir))?.path();
        if p.is_dir() && p.join(MANIFEST_FILE).is_file() {
            runs.push(p);
        }
    }
    runs.sort();
    if runs.is_empty() {
        return Err(LabError::MissingManifest(dir.to_path_buf()));
    }
    Ok(runs)
}

pub fn report(dir: &Path) -> Result<ReportOutcome> {
    let runs = find_runs(dir)?;
    let out_dir = dir.join(REPORT_DIR);
    let plot_dir = out_dir.join("plot");
    // Read and check everything before writing anything.
    let mut loaded = Vec::new();
    for run in &runs {
        let manifest_path = run.join(MANIFEST_FILE);
        let m = Manifest::read(&manifest_path)?;
        let mut tables = Vec::new();
        for entry in &m.tables {
            let path = run.join(&entry.file);
            let bytes = std::fs::read(&path).map_err(LabError::io(&path))?;
            if sha256_hex(&bytes) != entry.sha256 {
                return Err(LabError::CorruptManifest {
                    path: manifest_path.clone(),
                    reason: format!("{} does not match its recorded hash", entry.file),
                });
            }
            if let Some(agg) = &entry.aggregation {
                tables.push((entry.file.clone(), agg.clone(), Table::read(&path)?));
            }
        }
        loaded.push((run_name(run), m, tables));
    }

    std::fs::create_dir_all(&plot_dir).map_err(LabError::io(&plot_dir))?;
    let mut files = Vec::new();
    let mut index = Table::new("index.csv", &["run", "experiment", "config_hash", "table", "aggregate"]);
    for (name, m, tables) in &loaded {
        for (file, agg, t) in tables {
            let stem = file.trim_end_matches(".csv");
            let agg_name = format!("{name}__{stem}.csv");
            let (summary, series) = aggregate(t, &agg.group_by, &agg.values, name, &m.config_hash)
                .map_err(|reason| LabError::CorruptManifest { path: PathBuf::from(name).join(file), reason })?;
            let mut summary = summary;
            summary.file = agg_name.clone();
            summary.write(&out_dir)?;
            files.push(out_dir.join(&agg_name));
            index.push(row![name, m.experiment, m.config_hash, file, agg_name]);
            for (key, points) in series {
                let fname = sanitize(&format!("{name}__{stem}__{key}.dat"));
                let mut text = String::new();
                for (x, y) in points {
                    text.push_str(&format!("{} {}\n", x.field(), y.field()));
                }
                let path = plot_dir.join(&fname);
                std::fs::write(&path, text).map_err(LabError::io(&path))?;
                files.push(path);
            }
        }
    }
    index.write(&out_dir)?;
    files.push(out_dir.join("index.csv"));
    Ok(ReportOutcome { dir: out_dir, runs, files })
}

type Series = BTreeMap<String, Vec<(f64, f64)>>;

/// Mean and sample standard deviation of each value column per group, plus
/// `(first group column, mean)` series keyed by value name and the other group cells.
fn aggregate(t: &Table, group_by: &[String], values: &[String], run: &str, hash: &str) -> std::result::Result<(Table, Series), String> {
    let col = |c: &String| t.column(c).ok_or_else(|| format!("missing column {c}"));
    let gi: Vec<usize> = group_by.iter().map(col).collect::<std::result::Result<_, _>>()?;
    let vi: Vec<usize> = values.iter().map(col).collect::<std::result::Result<_, _>>()?;
    // Groups in order of first appearance.
    let mut order: Vec<Vec<String>> = Vec::new();
    let mut groups: BTreeMap<Vec<String>, Vec<Vec<f64>>> = BTreeMap::new();
    for r in &t.rows {
        let key: Vec<String> = gi.iter().map(|&i| r[i].clone()).collect();
        let vals = vi
            .iter()
            .map(|&i| r[i].parse::<f64>().map_err(|_| format!("non-numeric value `{}` in {}", r[i], t.columns[i])))
            .collect::<std::result::Result<Vec<f64>, _>>()?;
        let slot = groups.entry(key.clone()).or_insert_with(|| {
            order.push(key);
            vec![Vec::new(); vi.len()]
        });
        for (s, v) in slot.iter_mut().zip(vals) {
            s.push(v);
        }
    }
    let mut cols: Vec<String> = vec!["run".into(), "config_hash".into()];
    cols.extend(group_by.iter().cloned());
    cols.push("count".into());
    for v in values {
        cols.push(format!("{v}_mean"));
        cols.push(format!("{v}_sd"));
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut out = Table::new("aggregate.csv", &col_refs);
    let mut series: Series = BTreeMap::new();
    for key in &order {
        let cells = &groups[key];
        let mut r = row![run, hash];
        r.extend(key.iter().cloned());
        r.push(cells[0].len().to_string());
        for (v, samples) in values.iter().zip(cells) {
            let (m, sd) = mean_sd(samples);
            r.push(m.field());
            r.push(if sd.is_nan() { String::new() } else { sd.field() });
            if let Ok(x) = key[0].parse::<f64>() {
                let mut skey = v.clone();
                for (g, k) in group_by.iter().zip(key).skip(1) {
                    skey.push_str(&format!("__{g}={k}"));
                }
                series.entry(skey).or_default().push((x, m));
            }
        }
        out.push(r);
    }
    for pts in series.values_mut() {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok((out, series))
}

fn run_name(run: &Path) -> String {
    run.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into())
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || "._=-".contains(c) { c } else { '_' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groups_and_statistics() {
        let mut t = Table::new("r.csv", &["n", "seed", "eta", "v"]);
        t.push(row![10usize, 0u64, 0.1, 1.0]);
        t.push(row![10usize, 1u64, 0.1, 3.0]);
        t.push(row![20usize, 0u64, 0.1, 5.0]);
        t.push(row![20usize, 0u64, 0.2, 7.0]);
        let (a, s) = aggregate(&t, &["n".into(), "eta".into()], &["v".into()], "run", "h").unwrap();
        assert_eq!(a.rows.len(), 3);
        assert_eq!(a.rows[0], vec!["run", "h", "10", "0.1", "2", "2", "1.4142135623730951"]);
        assert_eq!(a.rows[1][6], "");
        assert_eq!(s["v__eta=0.1"], vec![(10.0, 2.0), (20.0, 5.0)]);
        assert_eq!(s["v__eta=0.2"], vec![(20.0, 7.0)]);
        assert!(aggregate(&t, &["nope".into()], &["v".into()], "run", "h").is_err());
    }
}
