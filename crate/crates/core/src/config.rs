//! JSON input files.
//!
//! Graph file:
//!
//! ```json
//! { "indexing": "one", "n": 2, "edges": [[1, 2, 1.0], [2, 1, 1.0]] }
//! ```
//!
//! Each edge is `[src, dst, weight]`, the influence of `src` on `dst`.
//! Labels are 0-based unless `"indexing": "one"`. Self weights missing from
//! the list are `1 - Σ incoming`.
//!
//! Run file: see [`RunConfigFile`]. The graph is inline, a path relative to
//! the run file, or a generator description.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::ConvergenceCriteria;
use crate::dynamics::{DynamicsError, ModelConfig, OpinionState, SilenceState, SimState, Variant};
use crate::engine::RunPlan;
use crate::graph::{
    generate_clique, generate_preferential_attachment, generate_random_strongly_connected, GraphError,
    InfluenceGraph, WeightScheme,
};
use crate::scenarios::{ExpectedOutcome, Scenario};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    #[default]
    Zero,
    One,
}

impl Indexing {
    fn to_internal(self, label: usize) -> Result<usize, ConfigError> {
        match self {
            Indexing::Zero => Ok(label),
            Indexing::One => label
                .checked_sub(1)
                .ok_or_else(|| ConfigError::Invalid("agent label 0 with one-based indexing".into())),
        }
    }

    fn to_external(self, index: usize) -> usize {
        match self {
            Indexing::Zero => index,
            Indexing::One => index + 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    #[serde(default)]
    pub indexing: Indexing,
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<InfluenceGraph, ConfigError> {
        let edges = self
            .edges
            .iter()
            .map(|&(s, d, w)| Ok((self.indexing.to_internal(s)?, self.indexing.to_internal(d)?, w)))
            .collect::<Result<Vec<_>, ConfigError>>()?;
        Ok(InfluenceGraph::validate(self.n, &edges)?)
    }

    /// Exact description of `g`, self weights included.
    pub fn from_graph(g: &InfluenceGraph, indexing: Indexing) -> Self {
        let edges = g
            .to_edge_list()
            .into_iter()
            .map(|(s, d, w)| (indexing.to_external(s), indexing.to_external(d), w))
            .collect();
        GraphFile { indexing, n: g.n(), edges }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Clique {
        n: usize,
        #[serde(default)]
        weights: WeightScheme,
        #[serde(default)]
        seed: u64,
    },
    PreferentialAttachment {
        n: usize,
        m: usize,
        #[serde(default)]
        weights: WeightScheme,
        #[serde(default)]
        seed: u64,
    },
    RandomStronglyConnected {
        n: usize,
        extra_edge_prob: f64,
        #[serde(default)]
        weights: WeightScheme,
        #[serde(default)]
        seed: u64,
    },
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<InfluenceGraph, GraphError> {
        match *self {
            GeneratorSpec::Clique { n, weights, seed } => generate_clique(n, weights, seed),
            GeneratorSpec::PreferentialAttachment { n, m, weights, seed } => {
                generate_preferential_attachment(n, m, seed, weights)
            }
            GeneratorSpec::RandomStronglyConnected { n, extra_edge_prob, weights, seed } => {
                generate_random_strongly_connected(n, extra_edge_prob, weights, seed)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Path(PathBuf),
    Inline(GraphFile),
    Generated(GeneratorSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tolerances {
    Scalar(f64),
    PerAgent(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialOpinions {
    /// `"random"`: uniform on `[0, 1]` from the run seed.
    Keyword(String),
    Values(Vec<f64>),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriteriaOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_series_only: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub run_id: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    /// Labelling of `silent_agents`.
    #[serde(default)]
    pub indexing: Indexing,
    pub graph: GraphSource,
    pub variant: Variant,
    /// A scalar radius applies to every agent. Ignored by DeGroot.
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    pub initial_opinions: InitialOpinions,
    /// Agents silent at `t = 0` (memoryless model only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub silent_agents: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub criteria: CriteriaOverrides,
    #[serde(default, skip_serializing_if = "is_default")]
    pub plan: PlanOverrides,
    #[serde(default, skip_serializing_if = "is_default")]
    pub output: OutputPaths,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub expected: Option<ExpectedOutcome>,
}

fn is_default<T: Default + PartialEq>(value: &T) -> bool {
    *value == T::default()
}

/// A run file resolved into model objects.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub name: Option<String>,
    pub graph: InfluenceGraph,
    pub config: ModelConfig,
    pub initial: SimState,
    pub criteria: ConvergenceCriteria,
    pub plan: RunPlan,
    pub output: OutputPaths,
    pub expected: Option<ExpectedOutcome>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.to_path_buf(), source })
}

pub fn load_graph_file(path: &Path) -> Result<InfluenceGraph, ConfigError> {
    read_json::<GraphFile>(path)?.to_graph()
}

pub fn load_run_config(path: &Path) -> Result<RunConfigFile, ConfigError> {
    read_json(path)
}

impl RunConfigFile {
    /// `base` resolves relative graph paths.
    pub fn resolve(&self, base: &Path) -> Result<ResolvedRun, ConfigError> {
        let graph = match &self.graph {
            GraphSource::Path(p) => load_graph_file(&base.join(p))?,
            GraphSource::Inline(file) => file.to_graph()?,
            GraphSource::Generated(spec) => spec.generate()?,
        };
        let n = graph.n();

        let config = match (self.variant, &self.tolerances) {
            (Variant::DeGroot, _) => ModelConfig::degroot(n),
            (variant, Some(Tolerances::Scalar(tau))) => ModelConfig::uniform(variant, n, *tau)?,
            (variant, Some(Tolerances::PerAgent(taus))) => {
                if taus.len() != n {
                    return Err(ConfigError::Invalid(format!(
                        "{} tolerances for {n} agents",
                        taus.len()
                    )));
                }
                ModelConfig::new(variant, taus.clone())?
            }
            (variant, None) => {
                return Err(ConfigError::Invalid(format!("variant {} needs tolerances", variant.name())))
            }
        };

        let opinions = match &self.initial_opinions {
            InitialOpinions::Values(v) => {
                if v.len() != n {
                    return Err(ConfigError::Invalid(format!("{} initial opinions for {n} agents", v.len())));
                }
                OpinionState::new(v.clone())?
            }
            InitialOpinions::Keyword(k) if k == "random" => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                OpinionState::new((0..n).map(|_| rng.random::<f64>()).collect())?
            }
            InitialOpinions::Keyword(k) => {
                return Err(ConfigError::Invalid(format!("initial_opinions: unknown keyword '{k}'")))
            }
        };

        let mut speaking = vec![true; n];
        for &label in &self.silent_agents {
            let i = self.indexing.to_internal(label)?;
            if i >= n {
                return Err(ConfigError::Invalid(format!("silent agent {label} out of range")));
            }
            speaking[i] = false;
        }
        let initial = SimState::with_silence(&config, opinions, SilenceState::new(speaking))?;

        let d = ConvergenceCriteria::default();
        let c = &self.criteria;
        let criteria = ConvergenceCriteria::new(
            c.epsilon.unwrap_or(d.epsilon),
            c.window.unwrap_or(d.window),
            c.max_steps.unwrap_or(d.max_steps),
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let d = RunPlan::default();
        let p = &self.plan;
        let plan = RunPlan {
            snapshot_stride: p.snapshot_stride.unwrap_or(d.snapshot_stride),
            parallelism: p.parallelism.unwrap_or(d.parallelism),
            record_series_only: p.record_series_only.unwrap_or(d.record_series_only),
        };
        plan.check().map_err(|e| ConfigError::Invalid(e.to_string()))?;

        Ok(ResolvedRun {
            name: self.name.clone(),
            graph,
            config,
            initial,
            criteria,
            plan,
            output: self.output.clone(),
            expected: self.expected.clone(),
        })
    }

    /// Run file describing a builtin scenario, one-based labels.
    pub fn from_scenario(s: &Scenario) -> Self {
        RunConfigFile {
            name: Some(s.name.clone()),
            description: Some(s.provenance_note.clone()),
            indexing: Indexing::One,
            graph: GraphSource::Inline(GraphFile::from_graph(&s.graph, Indexing::One)),
            variant: s.config.variant,
            tolerances: Some(Tolerances::PerAgent(s.config.tolerances().to_vec())),
            initial_opinions: InitialOpinions::Values(s.initial.opinions.as_slice().to_vec()),
            silent_agents: Vec::new(),
            criteria: CriteriaOverrides::default(),
            plan: PlanOverrides::default(),
            output: OutputPaths::default(),
            seed: 0,
            expected: Some(s.expected.clone()),
        }
    }
}
