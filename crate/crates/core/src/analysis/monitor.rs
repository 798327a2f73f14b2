//! Runtime checks of the structural results on recorded trajectories.
//!
//! Extremes checks allow one ulp of slack: an opinion update is a convex
//! combination evaluated in binary64, which may round one ulp past the
//! exact bound.

use serde::Serialize;

use crate::dynamics::{SimState, Variant};
use crate::graph::AgentId;

use super::TrajectoryRecord;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Invariant {
    /// Every opinion lies in `[0, 1]`.
    OpinionDomain,
    /// `range = max - min` in the recorded series.
    SeriesConsistency,
    /// `B_i^{t+1}` lies between the extremes of time `t` (for the
    /// memory-based model, the extremes of private and public opinions).
    RangeContainment,
    /// `max(B^{t+1}) <= max(B^t)`.
    MaxMonotonicity,
    /// `min(B^{t+1}) >= min(B^t)`.
    MinMonotonicity,
    /// Memoryless model: an all-silent step is followed by everyone speaking.
    SilenceRecovery,
    /// Memoryless model: no two consecutive all-silent steps.
    PersistentSilence,
    /// Public opinions follow the last expressed private opinion.
    PublicConsistency,
    /// DeGroot agents always speak.
    DeGrootSilence,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub invariant: Invariant,
    pub step: u64,
    pub agent: Option<AgentId>,
    pub detail: String,
}

fn up(x: f64) -> f64 {
    x.next_up()
}

fn down(x: f64) -> f64 {
    x.next_down()
}

/// Checks every snapshot and every consecutive transition of `record`.
/// Pairs of snapshots that are not one step apart (thinned records) only get
/// the per-snapshot checks.
pub fn monitor_invariants(record: &TrajectoryRecord, variant: Variant) -> Vec<Violation> {
    let mut out = Vec::new();
    for (k, state) in record.snapshots.iter().enumerate() {
        check_snapshot(record, k, state, variant, &mut out);
    }
    for pair in record.snapshots.windows(2) {
        if pair[1].t == pair[0].t + 1 {
            check_transition(&pair[0], &pair[1], variant, &mut out);
        }
    }
    out
}

fn check_snapshot(
    record: &TrajectoryRecord,
    k: usize,
    state: &SimState,
    variant: Variant,
    out: &mut Vec<Violation>,
) {
    let t = state.t;
    for (i, &x) in state.opinions.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            out.push(Violation {
                invariant: Invariant::OpinionDomain,
                step: t,
                agent: Some(AgentId(i)),
                detail: format!("opinion {x}"),
            });
        }
    }
    let (max, min, range) = (record.max_series[k], record.min_series[k], record.range_series[k]);
    if max != state.opinions.max() || min != state.opinions.min() || range != max - min {
        out.push(Violation {
            invariant: Invariant::SeriesConsistency,
            step: t,
            agent: None,
            detail: format!("series ({max}, {min}, {range}) disagree with the snapshot"),
        });
    }
    if variant == Variant::DeGroot {
        if let Some(i) = state.silence.iter().position(|&speaks| !speaks) {
            out.push(Violation {
                invariant: Invariant::DeGrootSilence,
                step: t,
                agent: Some(AgentId(i)),
                detail: "silent agent under DeGroot".into(),
            });
        }
    }
}

fn check_transition(prev: &SimState, next: &SimState, variant: Variant, out: &mut Vec<Violation>) {
    let t = next.t;
    let (mut lo, mut hi) = (prev.opinions.min(), prev.opinions.max());
    if let (Variant::SomPlus, Some(p)) = (variant, &prev.public) {
        for &x in &p.values {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    for (i, &x) in next.opinions.iter().enumerate() {
        if x > up(hi) || x < down(lo) {
            out.push(Violation {
                invariant: Invariant::RangeContainment,
                step: t,
                agent: Some(AgentId(i)),
                detail: format!("{x} outside [{lo}, {hi}]"),
            });
        }
    }

    if variant != Variant::SomPlus {
        let (max0, min0) = (prev.opinions.max(), prev.opinions.min());
        let (max1, min1) = (next.opinions.max(), next.opinions.min());
        if max1 > up(max0) {
            out.push(Violation {
                invariant: Invariant::MaxMonotonicity,
                step: t,
                agent: None,
                detail: format!("max rose from {max0} to {max1}"),
            });
        }
        if min1 < down(min0) {
            out.push(Violation {
                invariant: Invariant::MinMonotonicity,
                step: t,
                agent: None,
                detail: format!("min fell from {min0} to {min1}"),
            });
        }
    }

    if variant == Variant::SomMinus && prev.silence.all_silent_now() {
        if next.silence.all_silent_now() {
            out.push(Violation {
                invariant: Invariant::PersistentSilence,
                step: t,
                agent: None,
                detail: "everyone silent at two consecutive steps".into(),
            });
        }
        if let Some(i) = next.silence.iter().position(|&speaks| !speaks) {
            out.push(Violation {
                invariant: Invariant::SilenceRecovery,
                step: t,
                agent: Some(AgentId(i)),
                detail: "still silent after an all-silent step".into(),
            });
        }
    }

    if variant == Variant::SomPlus {
        check_public(prev, next, out);
    }
}

fn check_public(prev: &SimState, next: &SimState, out: &mut Vec<Violation>) {
    let (Some(p0), Some(p1)) = (&prev.public, &next.public) else {
        out.push(Violation {
            invariant: Invariant::PublicConsistency,
            step: next.t,
            agent: None,
            detail: "public state missing".into(),
        });
        return;
    };
    for (i, &speaks) in next.silence.iter().enumerate() {
        let (value, when) = if speaks {
            (next.opinions[i], next.t)
        } else {
            (p0.values[i], p0.last_spoke[i])
        };
        if p1.values[i].to_bits() != value.to_bits() || p1.last_spoke[i] != when {
            out.push(Violation {
                invariant: Invariant::PublicConsistency,
                step: next.t,
                agent: Some(AgentId(i)),
                detail: format!(
                    "public ({}, t={}) expected ({value}, t={when})",
                    p1.values[i], p1.last_spoke[i]
                ),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{run, ConvergenceCriteria, Termination};
    use crate::dynamics::{ModelConfig, OpinionState, SilenceState};
    use crate::graph::{generate_random_strongly_connected, WeightScheme};

    fn state(t: u64, b: &[f64], speaking: &[bool]) -> SimState {
        SimState {
            t,
            opinions: OpinionState::new(b.to_vec()).unwrap(),
            silence: SilenceState::new(speaking.to_vec()),
            public: None,
        }
    }

    #[test]
    fn conforming_runs_are_clean() {
        for seed in 0..20 {
            let g = generate_random_strongly_connected(
                8,
                0.3,
                WeightScheme::RandomDirichlet { self_weight: 0.1 },
                seed,
            )
            .unwrap();
            for variant in [Variant::DeGroot, Variant::SomMinus, Variant::SomPlus] {
                let cfg = ModelConfig::uniform(variant, 8, 0.2).unwrap();
                let b: Vec<f64> = (0..8).map(|i| ((i * 37 + seed as usize * 11) % 100) as f64 / 99.0).collect();
                let init = SimState::initial(&cfg, OpinionState::new(b).unwrap());
                let record = run(&g, &cfg, init, &ConvergenceCriteria::fixed_horizon(300)).unwrap();
                assert!(monitor_invariants(&record, variant).is_empty());
            }
        }
    }

    #[test]
    fn rising_max_is_flagged() {
        let record = TrajectoryRecord::from_snapshots(
            vec![state(0, &[0.2, 0.6], &[true, true]), state(1, &[0.3, 0.7], &[true, true])],
            Termination::MaxSteps,
        );
        let violations = monitor_invariants(&record, Variant::SomMinus);
        let monotonicity: Vec<_> = violations
            .iter()
            .filter(|v| v.invariant == Invariant::MaxMonotonicity)
            .collect();
        assert_eq!(monotonicity.len(), 1);
        assert_eq!(monotonicity[0].step, 1);
        assert!(violations
            .iter()
            .any(|v| v.invariant == Invariant::RangeContainment && v.agent == Some(AgentId(1))));
    }

    #[test]
    fn repeated_all_silence_is_flagged() {
        let record = TrajectoryRecord::from_snapshots(
            vec![state(0, &[0.2, 0.6], &[false, false]), state(1, &[0.2, 0.6], &[false, true])],
            Termination::MaxSteps,
        );
        let kinds: Vec<_> =
            monitor_invariants(&record, Variant::SomMinus).into_iter().map(|v| v.invariant).collect();
        assert_eq!(kinds, vec![Invariant::SilenceRecovery]);
    }

    #[test]
    fn one_ulp_is_tolerated() {
        let record = TrajectoryRecord::from_snapshots(
            vec![state(0, &[0.2, 0.6], &[true, true]), state(1, &[0.2, 0.6f64.next_up()], &[true, true])],
            Termination::MaxSteps,
        );
        assert!(monitor_invariants(&record, Variant::SomMinus).is_empty());
    }

    #[test]
    fn tampered_public_state_is_flagged() {
        let g = crate::graph::generate_clique(3, WeightScheme::default(), 0).unwrap();
        let cfg = ModelConfig::uniform(Variant::SomPlus, 3, 0.05).unwrap();
        let init = SimState::initial(&cfg, OpinionState::new(vec![0.0, 0.5, 1.0]).unwrap());
        let mut record = run(&g, &cfg, init, &ConvergenceCriteria::fixed_horizon(5)).unwrap();
        assert!(monitor_invariants(&record, Variant::SomPlus).is_empty());
        record.snapshots[3].public.as_mut().unwrap().values[1] = 0.25;
        let found = monitor_invariants(&record, Variant::SomPlus);
        assert!(found.iter().any(|v| v.invariant == Invariant::PublicConsistency && v.step == 3));
    }
}
