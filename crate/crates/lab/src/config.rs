//! Experiment configuration: a TOML document of `key = value` lines grouped in sections.
//!
//! ```toml
//! experiment = "qe-regular"
//!
//! [generator]
//! kind = "random-regular"
//! degree = 3
//!
//! [kernel]
//! kind = "diagonal-indicator"
//!
//! [sweep]
//! n = [500, 4000]
//! seeds = [0, 1, 2, 3, 4]
//! ```

use std::fmt;
use std::path::Path;

use qergo_core::anderson::PotentialLaw;
use qergo_core::cone::{cover_cone_matrix, neighbour_to_cone, ConeSystem};
use qergo_core::generators;
use qergo_core::graph::Graph;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result, StageExt};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    QeRegular,
    QeAnderson,
    ConeSolve,
    ConeSpectrum,
    GreenMoments,
    SigmaAc,
    BiregularWeights,
    Diagnostics,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::QeRegular,
        Self::QeAnderson,
        Self::ConeSolve,
        Self::ConeSpectrum,
        Self::GreenMoments,
        Self::SigmaAc,
        Self::BiregularWeights,
        Self::Diagnostics,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::QeRegular => "qe-regular",
            Self::QeAnderson => "qe-anderson",
            Self::ConeSolve => "cone-solve",
            Self::ConeSpectrum => "cone-spectrum",
            Self::GreenMoments => "green-moments",
            Self::SigmaAc => "sigma-ac",
            Self::BiregularWeights => "biregular-weights",
            Self::Diagnostics => "diagnostics",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Small named base graphs for random lifts and cover cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseGraph {
    Petersen,
    K4,
    K33,
}

impl BaseGraph {
    pub fn build(self) -> Graph {
        match self {
            Self::Petersen => generators::petersen(),
            Self::K4 => generators::complete(4).expect("K4"),
            Self::K33 => generators::complete_bipartite(3, 3).expect("K33"),
        }
    }
}

/// Graph family. The sweep value `n` is the vertex count, except for lifts
/// (lift order) and biregular graphs (number of black vertices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorSpec {
    RandomRegular { degree: usize },
    RandomLift { base: BaseGraph },
    /// Black vertices of degree `p + 1`, white of degree `q + 1`.
    Biregular { p: usize, q: usize },
    Cycle,
    Complete,
    Petersen,
    CompleteBipartite { a: usize, b: usize },
}

impl GeneratorSpec {
    pub fn build(&self, n: usize, seed: u64) -> Result<Graph> {
        let stage = || format!("generator (n = {n}, seed = {seed})");
        match *self {
            Self::RandomRegular { degree } => generators::random_regular(n, degree, seed).stage(stage),
            Self::RandomLift { base } => generators::random_lift(&base.build(), n, seed).stage(stage),
            Self::Biregular { p, q } => generators::biregular(p + 1, q + 1, n, seed).stage(stage),
            Self::Cycle => generators::cycle(n).stage(stage),
            Self::Complete => generators::complete(n).stage(stage),
            Self::Petersen => Ok(generators::petersen()),
            Self::CompleteBipartite { a, b } => generators::complete_bipartite(a, b).stage(stage),
        }
    }

    fn is_random(&self) -> bool {
        matches!(self, Self::RandomRegular { .. } | Self::RandomLift { .. } | Self::Biregular { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelKind {
    /// `χ_Λ − |Λ|/N` for a seeded random half `Λ` of the vertices (range 0).
    DiagonalIndicator,
    /// Symmetric real entries uniform in `[−1, 1]` on pairs at distance `≤ range`.
    RandomBounded,
    /// Adjacency indicator (range 1).
    NearestNeighbour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Defaults: 0 for the indicator, 1 otherwise.
    #[serde(default)]
    pub range: Option<usize>,
}

impl KernelSpec {
    pub fn range(&self) -> usize {
        self.range.unwrap_or(match self.kind {
            KernelKind::DiagonalIndicator => 0,
            _ => 1,
        })
    }
}

/// Cone system for the tree experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConeSpec {
    /// `(q+1)`-regular tree.
    RegularTree { q: u32 },
    /// Explicit cone matrix.
    Matrix {
        matrix: Vec<Vec<u32>>,
        #[serde(default)]
        root: usize,
        #[serde(default)]
        potential: Option<Vec<f64>>,
    },
    /// Unimodular neighbour matrix of a coloured tree.
    Neighbour {
        matrix: Vec<Vec<u32>>,
        #[serde(default)]
        root_colour: usize,
    },
    /// Universal cover of a base graph.
    Cover { base: BaseGraph },
}

impl ConeSpec {
    pub fn build(&self) -> Result<ConeSystem> {
        let stage = || "cone system".to_string();
        match self {
            Self::RegularTree { q } => ConeSystem::from_dense(&[vec![0, q + 1], vec![0, *q]], 0).stage(stage),
            Self::Matrix { matrix, root, potential } => {
                let c = ConeSystem::from_dense(matrix, *root).stage(stage)?;
                match potential {
                    Some(w) => c.with_potential(w.clone()).stage(stage),
                    None => Ok(c),
                }
            }
            Self::Neighbour { matrix, root_colour } => neighbour_to_cone(matrix, *root_colour).stage(stage),
            Self::Cover { base } => Ok(cover_cone_matrix(&base.build()).stage(stage)?.system),
        }
    }
}

/// Single-site potential law, scaled by the sweep's `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DisorderSpec {
    Uniform { a: f64 },
    Triangular { a: f64 },
    Bernoulli { p: f64 },
    PointMass { c: f64 },
}

impl DisorderSpec {
    pub fn law(self) -> PotentialLaw {
        match self {
            Self::Uniform { a } => PotentialLaw::Uniform { a },
            Self::Triangular { a } => PotentialLaw::Triangular { a },
            Self::Bernoulli { p } => PotentialLaw::Bernoulli { p },
            Self::PointMass { c } => PotentialLaw::PointMass { c },
        }
    }
}

/// Grid of spectral parameters: an explicit list or `from`, `to`, `points`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { from: f64, to: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Self::List(ref v) => v.clone(),
            Self::Range { from, to, points } => match points {
                0 => vec![],
                1 => vec![from],
                _ => (0..points).map(|i| from + (to - from) * i as f64 / (points - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub n: Vec<usize>,
    pub seeds: Vec<u64>,
    pub eta0: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub s: Vec<f64>,
    pub delta: Vec<f64>,
    /// Powers `n` of `Σⁿ` for the variance-invariance diagnostic.
    pub sigma_n: Vec<usize>,
    /// Averaging lengths `T` for the reduction diagnostic.
    pub t: Vec<usize>,
    pub lambda: Grid,
    /// Spectral window `[lo, hi]` for the Anderson discrepancy.
    pub interval: Option<[f64; 2]>,
    pub pool_size: usize,
    pub generations: u64,
    /// Threshold on `|Im ζ|` for spectrum detection.
    pub threshold: f64,
    /// Floor on `|Im ζ|` for inverse moments.
    pub floor: f64,
    /// Write final populations of sigma-ac runs to `pools.json`.
    pub snapshot: bool,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            n: vec![],
            seeds: vec![],
            eta0: vec![],
            epsilon: vec![],
            s: vec![],
            delta: vec![],
            sigma_n: vec![],
            t: vec![],
            lambda: Grid::List(vec![]),
            interval: None,
            pool_size: 10_000,
            generations: 200,
            threshold: 1e-3,
            floor: 1e-12,
            snapshot: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Run directory below the output root; defaults to the experiment name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    #[serde(default)]
    pub sweep: Sweep,
}

impl ExperimentConfig {
    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(LabError::io(path))?;
        Self::parse(&text, overrides).map_err(|e| match e {
            LabError::Config { reason, .. } => LabError::Config { path: path.display().to_string(), reason },
            other => other,
        })
    }

    /// Parses a config and applies `section.key=value` overrides. Override values
    /// are read as TOML values, falling back to bare strings.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let err = |reason: String| LabError::Config { path: "<input>".into(), reason };
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| err(e.to_string()))?;
        for o in overrides {
            let (key, raw) = o.split_once('=').ok_or_else(|| err(format!("override `{o}` is not key=value")))?;
            let value = parse_value(raw.trim());
            set_path(&mut doc, key.trim(), value).map_err(err)?;
        }
        let cfg: ExperimentConfig = toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| err(e.to_string()))?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON form, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output = None;
        let json = serde_json::to_string(&canon).expect("config serialises");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// First 16 hex digits of [`hash`](Self::hash), carried on every output row.
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }

    pub fn output_dir_name(&self) -> String {
        self.output.clone().unwrap_or_else(|| self.experiment.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        use ExperimentKind::*;
        let s = &self.sweep;
        let lambdas = s.lambda.values();
        match self.experiment {
            QeRegular => {
                let g = need(&self.generator, "generator")?;
                need(&self.kernel, "kernel")?;
                nonempty("n", &s.n)?;
                seeds_if_random(g, &s.seeds)?;
                if let GeneratorSpec::Biregular { .. } = g {
                    return Err(LabError::Validation("qe-regular needs a regular generator".into()));
                }
            }
            QeAnderson => {
                need(&self.generator, "generator")?;
                need(&self.kernel, "kernel")?;
                need(&self.disorder, "disorder")?;
                nonempty("n", &s.n)?;
                nonempty("seeds", &s.seeds)?;
                positive("eta0", &s.eta0)?;
                nonempty("epsilon", &s.epsilon)?;
                let [lo, hi] = s.interval.ok_or_else(|| LabError::Validation("sweep.interval is required".into()))?;
                if !(lo < hi) {
                    return Err(LabError::Validation("sweep.interval must satisfy lo < hi".into()));
                }
            }
            ConeSolve | GreenMoments => {
                need(&self.cone, "cone")?;
                nonempty("lambda", &lambdas)?;
                positive("eta0", &s.eta0)?;
                if self.experiment == GreenMoments {
                    nonempty("s", &s.s)?;
                }
            }
            ConeSpectrum => {
                need(&self.cone, "cone")?;
                nonempty("lambda", &lambdas)?;
                positive("eta0", &s.eta0)?;
                if lambdas.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(LabError::Validation("sweep.lambda must be increasing".into()));
                }
                if s.eta0.iter().any(|&e| e > 1e-3) {
                    return Err(LabError::Validation("cone-spectrum needs sweep.eta0 <= 1e-3".into()));
                }
            }
            SigmaAc => {
                need(&self.cone, "cone")?;
                need(&self.disorder, "disorder")?;
                nonempty("lambda", &lambdas)?;
                positive("eta0", &s.eta0)?;
                nonempty("epsilon", &s.epsilon)?;
                nonempty("delta", &s.delta)?;
                nonempty("seeds", &s.seeds)?;
                if s.pool_size == 0 {
                    return Err(LabError::Validation("sweep.pool_size must be positive".into()));
                }
            }
            BiregularWeights => {
                match need(&self.generator, "generator")? {
                    GeneratorSpec::Biregular { .. } => {}
                    _ => return Err(LabError::Validation("biregular-weights needs a biregular generator".into())),
                }
                nonempty("n", &s.n)?;
                nonempty("seeds", &s.seeds)?;
                nonempty("lambda", &lambdas)?;
                positive("eta0", &s.eta0)?;
            }
            Diagnostics => {
                let g = need(&self.generator, "generator")?;
                nonempty("n", &s.n)?;
                seeds_if_random(g, &s.seeds)?;
                nonempty("lambda", &lambdas)?;
                positive("eta0", &s.eta0)?;
            }
        }
        Ok(())
    }

    /// Seeds to iterate: deterministic generators ignore seeds and run once.
    pub fn graph_seeds(&self) -> Vec<u64> {
        match &self.generator {
            Some(g) if !g.is_random() && self.sweep.seeds.is_empty() => vec![0],
            _ => self.sweep.seeds.clone(),
        }
    }
}

fn need<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| LabError::Validation(format!("missing [{name}] section")))
}

fn nonempty<T>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(LabError::Validation(format!("sweep.{name} is empty")));
    }
    Ok(())
}

fn positive(name: &str, v: &[f64]) -> Result<()> {
    nonempty(name, v)?;
    if v.iter().any(|&x| !(x > 0.0)) {
        return Err(LabError::Validation(format!("sweep.{name} must be positive")));
    }
    Ok(())
}

fn seeds_if_random(g: &GeneratorSpec, seeds: &[u64]) -> Result<()> {
    if g.is_random() {
        nonempty("seeds", seeds)?;
    }
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(doc: &mut toml::Table, key: &str, value: toml::Value) -> std::result::Result<(), String> {
    let parts: Vec<&str> = key.split('.').collect();
    let (last, head) = parts.split_last().ok_or("empty override key")?;
    let mut t = doc;
    for p in head {
        let entry = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry.as_table_mut().ok_or_else(|| format!("override `{key}`: `{p}` is not a section"))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const QE: &str = r#"
        experiment = "qe-regular"
        [generator]
        kind = "random-regular"
        degree = 3
        [kernel]
        kind = "diagonal-indicator"
        [sweep]
        n = [100, 200] # comments are fine
        seeds = [0, 1]
    "#;

    #[test]
    fn parses_and_validates() {
        let c = ExperimentConfig::parse(QE, &[]).unwrap();
        assert_eq!(c.experiment, ExperimentKind::QeRegular);
        assert_eq!(c.generator, Some(GeneratorSpec::RandomRegular { degree: 3 }));
        assert_eq!(c.kernel.as_ref().unwrap().range(), 0);
        assert_eq!(c.sweep.n, vec![100, 200]);
        assert_eq!(c.sweep.pool_size, 10_000);
        c.validate().unwrap();
    }

    #[test]
    fn overrides_and_hash() {
        let a = ExperimentConfig::parse(QE, &[]).unwrap();
        let b = ExperimentConfig::parse(QE, &["sweep.seeds = [5]".into(), "output=elsewhere".into()]).unwrap();
        assert_eq!(b.sweep.seeds, vec![5]);
        assert_eq!(b.output.as_deref(), Some("elsewhere"));
        assert_ne!(a.hash(), b.hash());
        let c = ExperimentConfig::parse(QE, &["output=elsewhere".into()]).unwrap();
        assert_eq!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
        // Formatting does not matter.
        let squashed = QE.replace("# comments are fine", "").replace("    ", "");
        assert_eq!(ExperimentConfig::parse(&squashed, &[]).unwrap().hash(), a.hash());
    }

    #[test]
    fn empty_sweeps_and_bad_input_are_rejected() {
        let c = ExperimentConfig::parse(QE, &["sweep.seeds=[]".into()]).unwrap();
        assert!(matches!(c.validate(), Err(LabError::Validation(m)) if m.contains("seeds")));
        assert!(ExperimentConfig::parse("experiment = \"nope\"", &[]).is_err());
        assert!(ExperimentConfig::parse(&format!("{QE}\nbogus = 1"), &[]).is_err());
        assert!(ExperimentConfig::parse(QE, &["no-equals-sign".into()]).is_err());
        let cone = ExperimentConfig::parse("experiment = \"cone-solve\"\n[cone]\nkind = \"regular-tree\"\nq = 2", &[]).unwrap();
        assert!(cone.validate().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(Grid::Range { from: -1.0, to: 1.0, points: 3 }.values(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(Grid::List(vec![0.5]).values(), vec![0.5]);
        let c = ExperimentConfig::parse(
            "experiment = \"cone-solve\"\n[cone]\nkind = \"regular-tree\"\nq = 2\n[sweep]\nlambda = { from = 0.0, to = 1.0, points = 5 }\neta0 = [0.01]",
            &[],
        )
        .unwrap();
        assert_eq!(c.sweep.lambda.values().len(), 5);
        c.validate().unwrap();
    }
}
