//! Density sweeps over preferential-attachment graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_large, EngineError, RunPlan};
use crate::analysis::{ConvergenceCriteria, OutcomeKind};
use crate::dynamics::{ModelConfig, OpinionState, SimState, Variant};
use crate::graph::{generate_preferential_attachment, GraphError, WeightScheme};

/// How tolerance radii are drawn for each agent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToleranceDistribution {
    Constant { value: f64 },
    Uniform { low: f64, high: f64 },
}

impl Default for ToleranceDistribution {
    fn default() -> Self {
        ToleranceDistribution::Uniform { low: 0.0, high: 1.0 }
    }
}

impl ToleranceDistribution {
    fn draw(&self, rng: &mut impl Rng) -> f64 {
        match *self {
            ToleranceDistribution::Constant { value } => value,
            ToleranceDistribution::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub n: usize,
    pub m_values: Vec<usize>,
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub criteria: ConvergenceCriteria,
    #[serde(default)]
    pub tolerances: ToleranceDistribution,
    #[serde(default = "default_scheme")]
    pub weight_scheme: WeightScheme,
}

fn default_scheme() -> WeightScheme {
    WeightScheme::RandomDirichlet { self_weight: 0.0 }
}

impl SweepSpec {
    /// Uniform initial opinions and radii on `[0, 1]`, Dirichlet weights
    /// without self influence, and a budget of 5000 steps per run.
    pub fn new(n: usize, m_values: Vec<usize>, variant: Variant, seeds: Vec<u64>) -> Self {
        SweepSpec {
            n,
            m_values,
            variant,
            seeds,
            criteria: ConvergenceCriteria { epsilon: 1e-6, window: 50, max_steps: 5_000 },
            tolerances: ToleranceDistribution::default(),
            weight_scheme: default_scheme(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub runs: usize,
    pub consensus_rate: f64,
    pub mean_final_range: f64,
    /// Time average over `t >= 1` of the silent fraction, averaged over runs.
    pub mean_silent_fraction: f64,
    pub undecided: usize,
}

struct RunSummary {
    consensus: bool,
    undecided: bool,
    final_range: f64,
    silent_fraction: f64,
}

fn one_run(spec: &SweepSpec, m: usize, seed: u64) -> Result<RunSummary, EngineError> {
    let g = generate_preferential_attachment(spec.n, m, seed, spec.weight_scheme)
        .map_err(|e: GraphError| EngineError::InvalidPlan(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ m as u64);
    let opinions: Vec<f64> = (0..spec.n).map(|_| rng.random::<f64>()).collect();
    let taus: Vec<f64> = (0..spec.n).map(|_| spec.tolerances.draw(&mut rng)).collect();
    let config = ModelConfig::new(spec.variant, taus)?;
    let initial = SimState::initial(&config, OpinionState::new(opinions)?);
    let plan = RunPlan { record_series_only: true, ..RunPlan::default() };
    let (record, metrics) = run_large(&g, &config, initial, &spec.criteria, &plan)?;
    let tail = &metrics.silent_fraction_series[1..];
    let silent_fraction =
        if tail.is_empty() { 0.0 } else { tail.iter().sum::<f64>() / tail.len() as f64 };
    Ok(RunSummary {
        consensus: matches!(record.outcome.kind, OutcomeKind::Consensus { .. }),
        undecided: matches!(record.outcome.kind, OutcomeKind::Undecided),
        final_range: record.final_range(),
        silent_fraction,
    })
}

/// One row per density `m`, each aggregating a run per seed. Runs execute
/// concurrently on the global worker pool; each run itself is sequential.
pub fn density_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, EngineError> {
    if spec.m_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EngineError::InvalidPlan("m values must be strictly ascending".into()));
    }
    if spec.seeds.is_empty() {
        return Err(EngineError::InvalidPlan("at least one seed is needed".into()));
    }
    let jobs: Vec<(usize, u64)> =
        spec.m_values.iter().flat_map(|&m| spec.seeds.iter().map(move |&s| (m, s))).collect();
    let results: Vec<RunSummary> =
        jobs.par_iter().map(|&(m, seed)| one_run(spec, m, seed)).collect::<Result<_, _>>()?;

    let runs = spec.seeds.len();
    Ok(spec
        .m_values
        .iter()
        .zip(results.chunks(runs))
        .map(|(&m, chunk)| {
            let k = chunk.len() as f64;
            SweepRow {
                m,
                runs,
                consensus_rate: chunk.iter().filter(|r| r.consensus).count() as f64 / k,
                mean_final_range: chunk.iter().map(|r| r.final_range).sum::<f64>() / k,
                mean_silent_fraction: chunk.iter().map(|r| r.silent_fraction).sum::<f64>() / k,
                undecided: chunk.iter().filter(|r| r.undecided).count(),
            }
        })
        .collect())
}
