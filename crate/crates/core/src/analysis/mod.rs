//! Trajectories, convergence detection and outcome classification.
//!
//! Limits are asymptotic; everything here works on a finite horizon. A run
//! stops once every agent's opinion moved by less than `epsilon` for
//! `window` consecutive steps, when the full state `(B, s, P̂)` repeats
//! exactly, or after `max_steps`.

mod monitor;
mod oracle;

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DynamicsError, ModelConfig, OpinionState, SimState};
use crate::engine::Stepper;
use crate::graph::{AgentId, InfluenceGraph};

pub use monitor::{monitor_invariants, Invariant, Violation};
pub use oracle::{all_silent_fixed_point, all_silent_fixed_point_or_current};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("agent {0} has no neighbors, so its opinion never moves")]
    IsolatedAgent(AgentId),
    #[error("invalid convergence criteria: {0}")]
    InvalidCriteria(String),
    #[error("public opinion vector has length {got}, graph has {expected} agents")]
    LengthMismatch { got: usize, expected: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCriteria {
    pub epsilon: f64,
    pub window: u64,
    pub max_steps: u64,
}

impl Default for ConvergenceCriteria {
    fn default() -> Self {
        ConvergenceCriteria { epsilon: 1e-8, window: 50, max_steps: 100_000 }
    }
}

impl ConvergenceCriteria {
    pub fn new(epsilon: f64, window: u64, max_steps: u64) -> Result<Self, AnalysisError> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(AnalysisError::InvalidCriteria(format!("epsilon must be > 0, got {epsilon}")));
        }
        if window == 0 || max_steps == 0 {
            return Err(AnalysisError::InvalidCriteria(
                "window and max_steps must be at least 1".into(),
            ));
        }
        Ok(ConvergenceCriteria { epsilon, window, max_steps })
    }

    /// Runs exactly `steps` steps unless an exact cycle shows up first.
    pub fn fixed_horizon(steps: u64) -> Self {
        ConvergenceCriteria { epsilon: f64::MIN_POSITIVE, window: u64::MAX, max_steps: steps }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Termination {
    Stabilized,
    Cycle { period: u64 },
    MaxSteps,
}

/// Every state of a run plus the extremes series `max(B^t)`, `min(B^t)` and
/// `R_t = max - min`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub snapshots: Vec<SimState>,
    pub max_series: Vec<f64>,
    pub min_series: Vec<f64>,
    pub range_series: Vec<f64>,
    pub termination: Termination,
}

impl TrajectoryRecord {
    /// Rebuilds the series from a list of consecutive states.
    pub fn from_snapshots(snapshots: Vec<SimState>, termination: Termination) -> Self {
        let mut record = TrajectoryRecord {
            snapshots: Vec::with_capacity(snapshots.len()),
            max_series: Vec::with_capacity(snapshots.len()),
            min_series: Vec::with_capacity(snapshots.len()),
            range_series: Vec::with_capacity(snapshots.len()),
            termination,
        };
        for s in snapshots {
            record.push(s);
        }
        record
    }

    fn push(&mut self, state: SimState) {
        let (max, min) = (state.opinions.max(), state.opinions.min());
        self.max_series.push(max);
        self.min_series.push(min);
        self.range_series.push(max - min);
        self.snapshots.push(state);
    }

    pub fn last(&self) -> &SimState {
        self.snapshots.last().expect("a record holds at least the initial state")
    }

    pub fn steps(&self) -> u64 {
        self.last().t
    }

    /// `max_i |B_i^{t} - B_i^{t-1}|` for the transition into snapshot `k`.
    pub fn max_delta(&self, k: usize) -> f64 {
        max_abs_diff(&self.snapshots[k - 1].opinions, &self.snapshots[k].opinions)
    }

    pub fn final_range(&self) -> f64 {
        *self.range_series.last().expect("non-empty record")
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn fingerprint(state: &SimState) -> u64 {
    let mut h = DefaultHasher::new();
    for x in state.opinions.iter() {
        x.to_bits().hash(&mut h);
    }
    state.silence.as_slice().hash(&mut h);
    if let Some(p) = &state.public {
        for x in &p.values {
            x.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

pub(crate) fn same_state(a: &SimState, b: &SimState) -> bool {
    let bits_eq = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(p, q)| p.to_bits() == q.to_bits());
    bits_eq(&a.opinions, &b.opinions)
        && a.silence == b.silence
        && match (&a.public, &b.public) {
            (Some(p), Some(q)) => bits_eq(&p.values, &q.values),
            (None, None) => true,
            _ => false,
        }
}

/// Exact recurrence of `(B, s, P̂)` bit patterns. Recurrences whose opinion
/// vectors never change across the cycle are opinion-stationary and left to
/// the stabilization rule.
#[derive(Default)]
struct CycleDetector {
    seen: HashMap<u64, Vec<usize>>,
}

impl CycleDetector {
    /// Registers `snapshots[k]` and reports the period if it repeats an
    /// earlier snapshot.
    fn observe(&mut self, snapshots: &[SimState], k: usize) -> Option<u64> {
        let key = fingerprint(&snapshots[k]);
        let slot = self.seen.entry(key).or_default();
        let earlier = slot.iter().rev().copied().find(|&j| same_state(&snapshots[j], &snapshots[k]));
        slot.push(k);
        let j = earlier?;
        let moving = snapshots[j..k].iter().any(|s| {
            s.opinions.iter().zip(snapshots[k].opinions.iter()).any(|(x, y)| x.to_bits() != y.to_bits())
        });
        moving.then(|| (k - j) as u64)
    }
}

/// Iterates the model sequentially from `initial`.
pub fn run(
    g: &InfluenceGraph,
    config: &ModelConfig,
    initial: SimState,
    criteria: &ConvergenceCriteria,
) -> Result<TrajectoryRecord, DynamicsError> {
    run_with(g, config, initial, criteria, &Stepper::sequential())
}

/// Same as [`run`], stepping through a (possibly parallel) [`Stepper`].
/// The result does not depend on the stepper's parallelism.
pub fn run_with(
    g: &InfluenceGraph,
    config: &ModelConfig,
    initial: SimState,
    criteria: &ConvergenceCriteria,
    stepper: &Stepper,
) -> Result<TrajectoryRecord, DynamicsError> {
    initial.check(g, config)?;
    let mut record = TrajectoryRecord::from_snapshots(vec![initial], Termination::MaxSteps);
    let mut cycles = CycleDetector::default();
    cycles.observe(&record.snapshots, 0);
    let mut quiet = 0u64;

    while record.last().t < criteria.max_steps {
        let mut next = record.last().clone();
        stepper.advance(g, config, record.last(), &mut next)?;
        let k = record.snapshots.len();
        record.push(next);

        if let Some(period) = cycles.observe(&record.snapshots, k) {
            record.termination = Termination::Cycle { period };
            break;
        }
        quiet = if record.max_delta(k) < criteria.epsilon { quiet + 1 } else { 0 };
        if quiet >= criteria.window {
            record.termination = Termination::Stabilized;
            break;
        }
    }
    Ok(record)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeKind {
    Consensus { value: f64 },
    Dissensus { limits: Vec<f64>, perpetual_silent: Vec<AgentId> },
    Cycle { period: u64, states: Vec<OpinionState> },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeClassification {
    #[serde(flatten)]
    pub kind: OutcomeKind,
    pub steps_used: u64,
}

impl OutcomeClassification {
    pub fn is_consensus(&self) -> bool {
        matches!(self.kind, OutcomeKind::Consensus { .. })
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            OutcomeKind::Consensus { .. } => "consensus",
            OutcomeKind::Dissensus { .. } => "dissensus",
            OutcomeKind::Cycle { .. } => "cycle",
            OutcomeKind::Undecided => "undecided",
        }
    }
}

/// Whether the last `window` transitions all moved every agent by less
/// than `epsilon`.
fn stabilized(record: &TrajectoryRecord, criteria: &ConvergenceCriteria) -> bool {
    let k = record.snapshots.len();
    let window = criteria.window.min(usize::MAX as u64) as usize;
    if k <= window {
        return false;
    }
    (k - window..k).all(|i| record.max_delta(i) < criteria.epsilon)
}

/// Classifies a finished record:
/// exact recurrence → `Cycle`; stabilized with range below `epsilon` →
/// `Consensus` (value = midpoint of the final extremes); stabilized
/// otherwise → `Dissensus`; anything else → `Undecided`.
pub fn classify(record: &TrajectoryRecord, criteria: &ConvergenceCriteria) -> OutcomeClassification {
    let steps_used = record.steps();
    let k = record.snapshots.len() - 1;
    if k > 0 {
        let mut cycles = CycleDetector::default();
        for i in 0..k {
            cycles.seen.entry(fingerprint(&record.snapshots[i])).or_default().push(i);
        }
        if let Some(period) = cycles.observe(&record.snapshots, k) {
            let start = k - period as usize;
            let states = record.snapshots[start..k].iter().map(|s| s.opinions.clone()).collect();
            return OutcomeClassification { kind: OutcomeKind::Cycle { period, states }, steps_used };
        }
    }
    let kind = if stabilized(record, criteria) {
        let last = &record.last().opinions;
        if record.final_range() < criteria.epsilon {
            OutcomeKind::Consensus { value: 0.5 * (last.max() + last.min()) }
        } else {
            OutcomeKind::Dissensus {
                limits: last.as_slice().to_vec(),
                perpetual_silent: perpetual_silence_candidates(record),
            }
        }
    } else {
        OutcomeKind::Undecided
    };
    OutcomeClassification { kind, steps_used }
}

/// Agents silent at every recorded step of the final half of the horizon.
///
/// This is a finite-horizon witness; it cannot prove an agent stays silent
/// forever.
pub fn perpetual_silence_candidates(record: &TrajectoryRecord) -> Vec<AgentId> {
    let horizon = record.steps();
    if horizon == 0 {
        return Vec::new();
    }
    let from = horizon - horizon / 2;
    let n = record.last().n();
    let mut silent = vec![true; n];
    for s in record.snapshots.iter().filter(|s| s.t >= from) {
        for (flag, &speaks) in silent.iter_mut().zip(s.silence.iter()) {
            *flag &= !speaks;
        }
    }
    (0..n).filter(|&i| silent[i]).map(AgentId).collect()
}

/// Groups values that lie within `tol` of their sorted predecessor and
/// returns one representative per group.
pub fn distinct_values(values: &[f64], tol: f64) -> Vec<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::new();
    for v in sorted {
        match out.last() {
            Some(&last) if v - last <= tol => {}
            _ => out.push(v),
        }
    }
    out
}
