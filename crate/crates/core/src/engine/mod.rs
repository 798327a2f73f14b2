//! Scaled execution: agents are split into contiguous blocks evaluated by a
//! worker pool, the step reads the time-`t` buffer and writes a separate
//! `t+1` buffer, and runs keep only thinned snapshots or just the extremes
//! series.
//!
//! Every agent is evaluated by the same kernel as the sequential step, so
//! results never depend on the number of workers.

mod io;
mod sweep;

use std::collections::TryReserveError;
use std::time::Instant;

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{same_state, ConvergenceCriteria, OutcomeClassification, OutcomeKind, Termination};
use crate::dynamics::{
    advance_block, prepare_buffer, DynamicsError, ModelConfig, NextSlices, OpinionState,
    PublicOpinionState, SilenceState, SimState,
};
use crate::graph::{AgentId, InfluenceGraph};

pub use io::{read_trajectory, CsvSnapshotWriter, SnapshotSink, TrajectoryRow};
pub use sweep::{density_sweep, SweepRow, SweepSpec, ToleranceDistribution};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid run plan: {0}")]
    InvalidPlan(String),
    #[error("out of memory at step {step} while reserving {bytes} bytes")]
    OutOfMemory { step: u64, bytes: usize },
    #[error("cannot build worker pool: {0}")]
    ThreadPool(String),
    #[error("snapshot output failed: {0}")]
    Io(#[from] std::io::Error),
}

/// Evaluates one synchronous step, sequentially or over a worker pool.
pub struct Stepper {
    pool: Option<ThreadPool>,
    workers: usize,
}

impl Stepper {
    pub fn sequential() -> Self {
        Stepper { pool: None, workers: 1 }
    }

    /// `parallelism` workers; 1 means the calling thread only.
    pub fn new(parallelism: usize) -> Result<Self, EngineError> {
        if parallelism == 0 {
            return Err(EngineError::InvalidPlan("parallelism must be at least 1".into()));
        }
        if parallelism == 1 {
            return Ok(Self::sequential());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallelism)
            .build()
            .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
        Ok(Stepper { pool: Some(pool), workers: parallelism })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    /// Overwrites `next` with the successor of `cur`.
    pub fn advance(
        &self,
        g: &InfluenceGraph,
        config: &ModelConfig,
        cur: &SimState,
        next: &mut SimState,
    ) -> Result<(), DynamicsError> {
        cur.check(g, config)?;
        prepare_buffer(cur, next);
        let SimState { opinions, silence, public, .. } = next;
        let opinions = opinions.as_mut_slice();
        let silence = silence.as_mut_slice();
        let public = public.as_mut().map(|p| (p.values.as_mut_slice(), p.last_spoke.as_mut_slice()));

        let Some(pool) = &self.pool else {
            advance_block(g, config, cur, NextSlices { start: 0, opinions, silence, public });
            return Ok(());
        };
        let n = opinions.len();
        let chunk = n.div_ceil(self.workers * 4).max(1);
        let blocks = split_blocks(opinions, silence, public, chunk);
        pool.install(|| {
            blocks.into_par_iter().for_each(|block| advance_block(g, config, cur, block));
        });
        Ok(())
    }
}

fn split_blocks<'a>(
    mut opinions: &'a mut [f64],
    mut silence: &'a mut [bool],
    mut public: Option<(&'a mut [f64], &'a mut [u64])>,
    chunk: usize,
) -> Vec<NextSlices<'a>> {
    let mut blocks = Vec::with_capacity(opinions.len().div_ceil(chunk));
    let mut start = 0;
    while !opinions.is_empty() {
        let len = chunk.min(opinions.len());
        let (o, o_rest) = std::mem::take(&mut opinions).split_at_mut(len);
        let (s, s_rest) = std::mem::take(&mut silence).split_at_mut(len);
        let (p, p_rest) = match public.take() {
            Some((v, l)) => {
                let (v, v_rest) = v.split_at_mut(len);
                let (l, l_rest) = l.split_at_mut(len);
                (Some((v, l)), Some((v_rest, l_rest)))
            }
            None => (None, None),
        };
        blocks.push(NextSlices { start, opinions: o, silence: s, public: p });
        opinions = o_rest;
        silence = s_rest;
        public = p_rest;
        start += len;
    }
    blocks
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RunPlan {
    /// Keep (and emit) every `snapshot_stride`-th state; the final state is
    /// always kept.
    pub snapshot_stride: u64,
    pub parallelism: usize,
    /// Keep only the per-step series, no opinion vectors.
    pub record_series_only: bool,
}

impl Default for RunPlan {
    fn default() -> Self {
        RunPlan { snapshot_stride: 1, parallelism: 1, record_series_only: false }
    }
}

impl RunPlan {
    pub fn check(&self) -> Result<(), EngineError> {
        if self.snapshot_stride == 0 {
            return Err(EngineError::InvalidPlan("snapshot stride must be at least 1".into()));
        }
        if self.parallelism == 0 {
            return Err(EngineError::InvalidPlan("parallelism must be at least 1".into()));
        }
        Ok(())
    }
}

/// Series for every step plus thinned snapshots.
#[derive(Clone, Debug, PartialEq)]
pub struct ThinRecord {
    pub snapshots: Vec<SimState>,
    pub max_series: Vec<f64>,
    pub min_series: Vec<f64>,
    pub range_series: Vec<f64>,
    pub silent_count_series: Vec<usize>,
    /// Entry `k` is `max_i |B_i^{k+1} - B_i^k|`.
    pub max_delta_series: Vec<f64>,
    pub final_state: SimState,
    pub termination: Termination,
    pub outcome: OutcomeClassification,
    /// Agents silent throughout the final half of the horizon.
    pub perpetual_silent: Vec<AgentId>,
}

impl ThinRecord {
    pub fn steps(&self) -> u64 {
        self.final_state.t
    }

    pub fn final_range(&self) -> f64 {
        *self.range_series.last().expect("non-empty series")
    }

    /// `silent_count / n` per step.
    pub fn silent_fraction_series(&self) -> Vec<f64> {
        let n = self.final_state.n() as f64;
        self.silent_count_series.iter().map(|&c| c as f64 / n).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub steps: u64,
    pub wall_seconds: f64,
    pub steps_per_second: f64,
    /// Peak resident set of the whole process (`VmHWM`), 0 where unavailable.
    pub peak_memory_bytes: u64,
    /// Heap bytes held by the graph, the state buffers and the record.
    pub working_set_bytes: u64,
    pub silent_fraction_series: Vec<f64>,
}

/// Peak resident set size of this process, from `/proc/self/status`.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn state_bytes(s: &SimState) -> usize {
    let n = s.n();
    let public = if s.public.is_some() { n * 16 } else { 0 };
    n * (8 + 1) + public
}

fn empty_state() -> SimState {
    SimState {
        t: 0,
        opinions: OpinionState::from_vec_unchecked(Vec::new()),
        silence: SilenceState::new(Vec::new()),
        public: None,
    }
}

/// A buffer shaped like `like`, allocated fallibly.
fn reserve_like(like: &SimState) -> Result<SimState, TryReserveError> {
    let n = like.n();
    let mut opinions = Vec::new();
    opinions.try_reserve_exact(n)?;
    opinions.resize(n, 0.0);
    let mut silence = Vec::new();
    silence.try_reserve_exact(n)?;
    silence.resize(n, true);
    let public = match like.public {
        Some(_) => {
            let mut values = Vec::new();
            values.try_reserve_exact(n)?;
            values.resize(n, 0.0);
            let mut last_spoke = Vec::new();
            last_spoke.try_reserve_exact(n)?;
            last_spoke.resize(n, 0);
            Some(PublicOpinionState { values, last_spoke })
        }
        None => None,
    };
    Ok(SimState {
        t: like.t,
        opinions: OpinionState::from_vec_unchecked(opinions),
        silence: SilenceState::new(silence),
        public,
    })
}

fn copy_state(src: &SimState, step: u64) -> Result<SimState, EngineError> {
    let mut out = reserve_like(src).map_err(|_| EngineError::OutOfMemory { step, bytes: state_bytes(src) })?;
    out.clone_from(src);
    Ok(out)
}

/// Follows a run one state at a time: extremes series, stabilization
/// window, exact recurrence and the last time each agent spoke.
///
/// Recurrences are found with Brent's scheme: the state is compared against
/// a checkpoint refreshed at power-of-two distances, so only one extra state
/// is held. The reported period is the smallest one; detection may come
/// later than the first recurrence.
pub(crate) struct Tracker {
    criteria: ConvergenceCriteria,
    series_only: bool,
    stride: u64,
    pub snapshots: Vec<SimState>,
    pub max_series: Vec<f64>,
    pub min_series: Vec<f64>,
    pub range_series: Vec<f64>,
    pub silent_count_series: Vec<usize>,
    pub max_delta_series: Vec<f64>,
    quiet: u64,
    last_move: u64,
    checkpoint: SimState,
    power: u64,
    lam: u64,
    last_vocal: Vec<Option<u64>>,
}

impl Tracker {
    pub fn new(initial: &SimState, criteria: ConvergenceCriteria, plan: &RunPlan) -> Result<Self, EngineError> {
        let mut tracker = Tracker {
            criteria,
            series_only: plan.record_series_only,
            stride: plan.snapshot_stride,
            snapshots: Vec::new(),
            max_series: Vec::new(),
            min_series: Vec::new(),
            range_series: Vec::new(),
            silent_count_series: Vec::new(),
            max_delta_series: Vec::new(),
            quiet: 0,
            last_move: 0,
            checkpoint: copy_state(initial, initial.t)?,
            power: 1,
            lam: 0,
            last_vocal: initial.silence.iter().map(|&s| s.then_some(initial.t)).collect(),
        };
        tracker.record(initial)?;
        Ok(tracker)
    }

    fn record(&mut self, state: &SimState) -> Result<(), EngineError> {
        let oom = |bytes| EngineError::OutOfMemory { step: state.t, bytes };
        let (max, min) = (state.opinions.max(), state.opinions.min());
        for series in [&mut self.max_series, &mut self.min_series, &mut self.range_series] {
            series.try_reserve(1).map_err(|_| oom(8))?;
        }
        self.silent_count_series.try_reserve(1).map_err(|_| oom(8))?;
        self.max_series.push(max);
        self.min_series.push(min);
        self.range_series.push(max - min);
        self.silent_count_series.push(state.silence.silent_count());
        if !self.series_only && state.t.is_multiple_of(self.stride) {
            self.snapshots.try_reserve(1).map_err(|_| oom(state_bytes(state)))?;
            let copy = copy_state(state, state.t)?;
            self.snapshots.push(copy);
        }
        Ok(())
    }

    /// Registers the transition `prev -> next` and reports whether the run
    /// is over.
    pub fn observe(&mut self, prev: &SimState, next: &SimState) -> Result<Option<Termination>, EngineError> {
        let mut delta = 0.0f64;
        let mut moved = false;
        for (x, y) in prev.opinions.iter().zip(next.opinions.iter()) {
            delta = delta.max((x - y).abs());
            moved |= x.to_bits() != y.to_bits();
        }
        self.max_delta_series.try_reserve(1).map_err(|_| EngineError::OutOfMemory { step: next.t, bytes: 8 })?;
        self.max_delta_series.push(delta);
        if moved {
            self.last_move = next.t;
        }
        for (slot, &speaks) in self.last_vocal.iter_mut().zip(next.silence.iter()) {
            if speaks {
                *slot = Some(next.t);
            }
        }
        self.record(next)?;

        if same_state(next, &self.checkpoint) && self.last_move > self.checkpoint.t {
            return Ok(Some(Termination::Cycle { period: next.t - self.checkpoint.t }));
        }
        self.lam += 1;
        if self.lam == self.power {
            self.checkpoint.clone_from(next);
            self.power = self.power.saturating_mul(2);
            self.lam = 0;
        }
        self.quiet = if delta < self.criteria.epsilon { self.quiet + 1 } else { 0 };
        if self.quiet >= self.criteria.window {
            return Ok(Some(Termination::Stabilized));
        }
        Ok(None)
    }

    /// Agents silent at every step of the final half of the horizon.
    fn perpetual_silent(&self, horizon: u64) -> Vec<AgentId> {
        if horizon == 0 {
            return Vec::new();
        }
        let from = horizon - horizon / 2;
        (0..self.last_vocal.len())
            .filter(|&i| self.last_vocal[i].is_none_or(|t| t < from))
            .map(AgentId)
            .collect()
    }

    /// Classification with the same rules as [`crate::analysis::classify`].
    pub fn finish(
        mut self,
        g: &InfluenceGraph,
        config: &ModelConfig,
        final_state: SimState,
        termination: Termination,
    ) -> Result<ThinRecord, EngineError> {
        let steps_used = final_state.t;
        let perpetual_silent = self.perpetual_silent(steps_used);
        let kind = match termination {
            Termination::Cycle { period } => {
                let mut states = Vec::with_capacity(period as usize);
                let mut cur = final_state.clone();
                let mut next = empty_state();
                for _ in 0..period {
                    states.push(cur.opinions.clone());
                    crate::dynamics::step_into(g, config, &cur, &mut next)?;
                    std::mem::swap(&mut cur, &mut next);
                }
                OutcomeKind::Cycle { period, states }
            }
            _ if self.quiet >= self.criteria.window => {
                if self.range_series.last().copied().unwrap_or(0.0) < self.criteria.epsilon {
                    let b = &final_state.opinions;
                    OutcomeKind::Consensus { value: 0.5 * (b.max() + b.min()) }
                } else {
                    OutcomeKind::Dissensus {
                        limits: final_state.opinions.as_slice().to_vec(),
                        perpetual_silent: perpetual_silent.clone(),
                    }
                }
            }
            _ => OutcomeKind::Undecided,
        };
        if !self.series_only && self.snapshots.last().is_none_or(|s| s.t != final_state.t) {
            self.snapshots.push(final_state.clone());
        }
        Ok(ThinRecord {
            snapshots: self.snapshots,
            max_series: self.max_series,
            min_series: self.min_series,
            range_series: self.range_series,
            silent_count_series: self.silent_count_series,
            max_delta_series: self.max_delta_series,
            final_state,
            termination,
            outcome: OutcomeClassification { kind, steps_used },
            perpetual_silent,
        })
    }

    fn bytes(&self) -> usize {
        let per_step = 8 * 4 + std::mem::size_of::<usize>();
        self.max_series.len() * per_step
            + self.snapshots.iter().map(state_bytes).sum::<usize>()
            + state_bytes(&self.checkpoint)
            + self.last_vocal.len() * std::mem::size_of::<Option<u64>>()
    }
}

pub fn run_large(
    g: &InfluenceGraph,
    config: &ModelConfig,
    initial: SimState,
    criteria: &ConvergenceCriteria,
    plan: &RunPlan,
) -> Result<(ThinRecord, RunMetrics), EngineError> {
    run_large_with_sink(g, config, initial, criteria, plan, None)
}

/// [`run_large`], also streaming every kept snapshot to `sink`.
pub fn run_large_with_sink(
    g: &InfluenceGraph,
    config: &ModelConfig,
    initial: SimState,
    criteria: &ConvergenceCriteria,
    plan: &RunPlan,
    mut sink: Option<&mut dyn SnapshotSink>,
) -> Result<(ThinRecord, RunMetrics), EngineError> {
    plan.check()?;
    initial.check(g, config)?;
    let stepper = Stepper::new(plan.parallelism)?;
    let started = Instant::now();

    let mut tracker = Tracker::new(&initial, *criteria, plan)?;
    let mut next = reserve_like(&initial)
        .map_err(|_| EngineError::OutOfMemory { step: initial.t, bytes: state_bytes(&initial) })?;
    let mut cur = initial;
    if let Some(sink) = sink.as_deref_mut() {
        sink.write_state(&cur)?;
    }
    let mut termination = Termination::MaxSteps;
    while cur.t < criteria.max_steps {
        stepper.advance(g, config, &cur, &mut next)?;
        let verdict = tracker.observe(&cur, &next)?;
        std::mem::swap(&mut cur, &mut next);
        if let Some(sink) = sink.as_deref_mut() {
            if cur.t.is_multiple_of(plan.snapshot_stride) {
                sink.write_state(&cur)?;
            }
        }
        if let Some(reason) = verdict {
            termination = reason;
            break;
        }
    }
    if let Some(sink) = sink {
        if !cur.t.is_multiple_of(plan.snapshot_stride) {
            sink.write_state(&cur)?;
        }
        sink.flush()?;
    }

    let wall = started.elapsed().as_secs_f64();
    let working = g.heap_bytes() + tracker.bytes() + 2 * state_bytes(&cur);
    let record = tracker.finish(g, config, cur, termination)?;
    let steps = record.steps();
    let metrics = RunMetrics {
        steps,
        wall_seconds: wall,
        steps_per_second: if wall > 0.0 { steps as f64 / wall } else { 0.0 },
        peak_memory_bytes: peak_memory_bytes().unwrap_or(0),
        working_set_bytes: working as u64,
        silent_fraction_series: record.silent_fraction_series(),
    };
    Ok((record, metrics))
}

/// Re-classifies a recorded trajectory given as consecutive states starting
/// at `t = 0`, with the rules of [`run_large`]. Stops early where the
/// original run would have stopped.
pub fn replay(
    g: &InfluenceGraph,
    config: &ModelConfig,
    states: impl IntoIterator<Item = SimState>,
    criteria: &ConvergenceCriteria,
) -> Result<ThinRecord, EngineError> {
    let plan = RunPlan { record_series_only: true, ..RunPlan::default() };
    let mut states = states.into_iter();
    let first = states.next().ok_or_else(|| EngineError::InvalidPlan("empty trajectory".into()))?;
    first.check(g, config)?;
    let mut tracker = Tracker::new(&first, *criteria, &plan)?;
    let mut cur = first;
    let mut termination = Termination::MaxSteps;
    for next in states {
        if next.t != cur.t + 1 {
            return Err(EngineError::InvalidPlan(format!(
                "replay needs consecutive steps, got t={} after t={}",
                next.t, cur.t
            )));
        }
        let verdict = tracker.observe(&cur, &next)?;
        cur = next;
        if let Some(reason) = verdict {
            termination = reason;
            break;
        }
    }
    tracker.finish(g, config, cur, termination)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{classify, run};
    use crate::dynamics::Variant;
    use crate::graph::{generate_preferential_attachment, WeightScheme};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(config: &ModelConfig, n: usize, seed: u64) -> SimState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = (0..n).map(|_| rng.random::<f64>()).collect();
        SimState::initial(config, OpinionState::new(b).unwrap())
    }

    fn random_config(variant: Variant, n: usize, seed: u64) -> ModelConfig {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        ModelConfig::new(variant, (0..n).map(|_| rng.random::<f64>() * 0.5).collect()).unwrap()
    }

    #[test]
    fn parallel_steps_match_sequential() {
        let g = generate_preferential_attachment(1000, 3, 5, WeightScheme::RandomDirichlet { self_weight: 0.1 })
            .unwrap();
        for variant in [Variant::DeGroot, Variant::SomMinus, Variant::SomPlus] {
            let cfg = random_config(variant, 1000, 1);
            let init = random_state(&cfg, 1000, 2);
            let criteria = ConvergenceCriteria::fixed_horizon(60);
            let seq = run(&g, &cfg, init.clone(), &criteria).unwrap();
            for workers in [1, 3, 4, 16] {
                let plan = RunPlan { parallelism: workers, ..RunPlan::default() };
                let (thin, _) = run_large(&g, &cfg, init.clone(), &criteria, &plan).unwrap();
                assert_eq!(thin.snapshots, seq.snapshots, "{variant:?} with {workers} workers");
                assert_eq!(thin.max_series, seq.max_series);
            }
        }
    }

    #[test]
    fn stride_and_series_only() {
        let g = generate_preferential_attachment(200, 2, 1, WeightScheme::default()).unwrap();
        let cfg = random_config(Variant::SomMinus, 200, 3);
        let init = random_state(&cfg, 200, 4);
        let criteria = ConvergenceCriteria::fixed_horizon(25);
        let plan = RunPlan { snapshot_stride: 10, ..RunPlan::default() };
        let (thin, metrics) = run_large(&g, &cfg, init.clone(), &criteria, &plan).unwrap();
        let ts: Vec<u64> = thin.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0, 10, 20, 25]);
        assert_eq!(thin.max_series.len(), 26);
        assert_eq!(thin.max_delta_series.len(), 25);
        assert_eq!(metrics.silent_fraction_series.len(), 26);

        let plan = RunPlan { record_series_only: true, ..RunPlan::default() };
        let (lean, _) = run_large(&g, &cfg, init, &criteria, &plan).unwrap();
        assert!(lean.snapshots.is_empty());
        assert_eq!(lean.range_series, thin.range_series);
        assert_eq!(lean.final_state, thin.final_state);
    }

    #[test]
    fn two_agent_cycle_found_by_checkpoint() {
        let g = InfluenceGraph::validate(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        let cfg = ModelConfig::uniform(Variant::SomMinus, 2, 1.0).unwrap();
        let init = SimState::initial(&cfg, OpinionState::new(vec![1.0, 0.0]).unwrap());
        let (thin, _) =
            run_large(&g, &cfg, init, &ConvergenceCriteria::default(), &RunPlan::default()).unwrap();
        assert_eq!(thin.termination, Termination::Cycle { period: 2 });
        match &thin.outcome.kind {
            OutcomeKind::Cycle { period: 2, states } => {
                assert_eq!(states.len(), 2);
                assert!(states.iter().any(|s| s.as_slice() == [1.0, 0.0]));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn thin_classification_matches_full() {
        let g = crate::graph::generate_clique(5, WeightScheme::RandomDirichlet { self_weight: 0.0 }, 3).unwrap();
        for (variant, seed) in [(Variant::SomMinus, 1), (Variant::SomPlus, 2), (Variant::DeGroot, 3)] {
            let cfg = random_config(variant, 5, seed);
            let init = random_state(&cfg, 5, seed);
            let criteria = ConvergenceCriteria::default();
            let full = run(&g, &cfg, init.clone(), &criteria).unwrap();
            let (thin, _) = run_large(&g, &cfg, init, &criteria, &RunPlan::default()).unwrap();
            assert_eq!(thin.outcome, classify(&full, &criteria));
        }
    }

    #[test]
    fn replay_reproduces_outcome() {
        let g = generate_preferential_attachment(60, 2, 9, WeightScheme::default()).unwrap();
        for variant in [Variant::SomMinus, Variant::SomPlus] {
            let cfg = random_config(variant, 60, 5);
            let init = random_state(&cfg, 60, 6);
            let criteria = ConvergenceCriteria::new(1e-8, 20, 3000).unwrap();
            let (thin, _) = run_large(&g, &cfg, init, &criteria, &RunPlan::default()).unwrap();
            let again = replay(&g, &cfg, thin.snapshots.clone(), &criteria).unwrap();
            assert_eq!(again.outcome, thin.outcome);
            assert_eq!(again.range_series, thin.range_series);
        }
    }

    #[test]
    fn invalid_plans_are_rejected() {
        let g = crate::graph::generate_clique(2, WeightScheme::default(), 0).unwrap();
        let cfg = ModelConfig::degroot(2);
        let init = SimState::initial(&cfg, OpinionState::new(vec![0.0, 1.0]).unwrap());
        let criteria = ConvergenceCriteria::default();
        for plan in [
            RunPlan { snapshot_stride: 0, ..RunPlan::default() },
            RunPlan { parallelism: 0, ..RunPlan::default() },
        ] {
            assert!(matches!(
                run_large(&g, &cfg, init.clone(), &criteria, &plan),
                Err(EngineError::InvalidPlan(_))
            ));
        }
    }
}
