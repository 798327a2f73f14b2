//! Synchronous opinion and silence updates: classic DeGroot averaging, the
//! memoryless silence model (silent neighbors are ignored) and the
//! memory-based one (silent neighbors count with their last public opinion).
//!
//! Every update reads only time-`t` state and writes a fresh time-`t+1`
//! buffer. Neighbor sums run in ascending source order so a given input
//! always rounds the same way, whichever thread evaluates the agent.
//!
//! An agent speaks at `t+1` iff `⌈k/2⌉ <= close`, where `k` counts the
//! neighbors it listens to and `close` those within its tolerance radius.
//! For even `k` exactly half is enough; with `k = 0` the agent speaks.

use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{AgentId, InfluenceGraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("{name} = {value} lies outside [0, 1]")]
    Domain { name: &'static str, value: f64 },
    #[error("opinion {value} of agent {agent} lies outside [0, 1]")]
    OpinionOutOfRange { agent: AgentId, value: f64 },
    #[error("tolerance radius {value} of agent {agent} lies outside [0, 1] (τ ∈ [0,1] required)")]
    ToleranceOutOfRange { agent: AgentId, value: f64 },
    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch { what: &'static str, got: usize, expected: usize },
    #[error("state does not match the {variant:?} variant: {reason}")]
    VariantStateMismatch { variant: Variant, reason: &'static str },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    #[serde(alias = "de_groot")]
    DeGroot,
    SomMinus,
    SomPlus,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::DeGroot => "degroot",
            Variant::SomMinus => "som_minus",
            Variant::SomPlus => "som_plus",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "degroot" | "de_groot" => Ok(Variant::DeGroot),
            "som_minus" | "memoryless" => Ok(Variant::SomMinus),
            "som_plus" | "memory_based" => Ok(Variant::SomPlus),
            other => Err(format!("unknown variant '{other}' (degroot, som_minus, som_plus)")),
        }
    }
}

/// Opinions of all agents, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OpinionState(Vec<f64>);

impl OpinionState {
    pub fn new(values: Vec<f64>) -> Result<Self, DynamicsError> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(DynamicsError::OpinionOutOfRange { agent: AgentId(i), value: v });
            }
        }
        Ok(OpinionState(values))
    }

    pub fn constant(n: usize, value: f64) -> Result<Self, DynamicsError> {
        Self::new(vec![value; n])
    }

    /// Skips the range check; monitors catch anything that escapes `[0, 1]`.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        OpinionState(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn range(&self) -> f64 {
        self.max() - self.min()
    }
}

impl Deref for OpinionState {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Who expresses an opinion: `true` speaks (1), `false` is silent (0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SilenceState(Vec<bool>);

impl SilenceState {
    pub fn new(speaking: Vec<bool>) -> Self {
        SilenceState(speaking)
    }

    pub fn all_speaking(n: usize) -> Self {
        SilenceState(vec![true; n])
    }

    pub fn all_silent(n: usize) -> Self {
        SilenceState(vec![false; n])
    }

    /// From `{0, 1}` flags, 1 meaning "speaks".
    pub fn from_flags(flags: &[u8]) -> Result<Self, DynamicsError> {
        flags
            .iter()
            .map(|&f| match f {
                0 => Ok(false),
                1 => Ok(true),
                _ => Err(DynamicsError::Domain { name: "silence flag", value: f as f64 }),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(SilenceState)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn is_speaking(&self, agent: usize) -> bool {
        self.0[agent]
    }

    pub fn silent_count(&self) -> usize {
        self.0.iter().filter(|&&s| !s).count()
    }

    pub fn all_silent_now(&self) -> bool {
        self.0.iter().all(|&s| !s)
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [bool] {
        &mut self.0
    }
}

impl Deref for SilenceState {
    type Target = [bool];

    fn deref(&self) -> &[bool] {
        &self.0
    }
}

/// Last publicly expressed opinion of every agent and when it was expressed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PublicOpinionState {
    pub values: Vec<f64>,
    pub last_spoke: Vec<u64>,
}

impl PublicOpinionState {
    /// Everyone spoke at `t = 0`.
    pub fn initial(opinions: &OpinionState) -> Self {
        PublicOpinionState {
            values: opinions.as_slice().to_vec(),
            last_spoke: vec![0; opinions.len()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub variant: Variant,
    tolerances: Vec<f64>,
}

impl ModelConfig {
    pub fn new(variant: Variant, tolerances: Vec<f64>) -> Result<Self, DynamicsError> {
        for (i, &tau) in tolerances.iter().enumerate() {
            if !(0.0..=1.0).contains(&tau) {
                return Err(DynamicsError::ToleranceOutOfRange { agent: AgentId(i), value: tau });
            }
        }
        Ok(ModelConfig { variant, tolerances })
    }

    pub fn uniform(variant: Variant, n: usize, tolerance: f64) -> Result<Self, DynamicsError> {
        Self::new(variant, vec![tolerance; n])
    }

    /// DeGroot needs no radii; they are fixed at 1, which makes the silence
    /// models collapse onto it.
    pub fn degroot(n: usize) -> Self {
        ModelConfig { variant: Variant::DeGroot, tolerances: vec![1.0; n] }
    }

    pub fn tolerances(&self) -> &[f64] {
        &self.tolerances
    }

    pub fn n(&self) -> usize {
        self.tolerances.len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: u64,
    pub opinions: OpinionState,
    pub silence: SilenceState,
    /// Present iff the variant is memory-based.
    pub public: Option<PublicOpinionState>,
}

impl SimState {
    /// `t = 0` with every agent speaking.
    pub fn initial(config: &ModelConfig, opinions: OpinionState) -> Self {
        let n = opinions.len();
        let public = (config.variant == Variant::SomPlus)
            .then(|| PublicOpinionState::initial(&opinions));
        SimState { t: 0, opinions, silence: SilenceState::all_speaking(n), public }
    }

    /// `t = 0` with a chosen silence vector. The memory-based model requires
    /// everyone to speak initially, DeGroot has no silence at all.
    pub fn with_silence(
        config: &ModelConfig,
        opinions: OpinionState,
        silence: SilenceState,
    ) -> Result<Self, DynamicsError> {
        if silence.len() != opinions.len() {
            return Err(DynamicsError::LengthMismatch {
                what: "silence",
                got: silence.len(),
                expected: opinions.len(),
            });
        }
        if config.variant != Variant::SomMinus && silence.silent_count() > 0 {
            return Err(DynamicsError::VariantStateMismatch {
                variant: config.variant,
                reason: "initial silence must be all-speaking",
            });
        }
        let mut state = SimState::initial(config, opinions);
        state.silence = silence;
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.opinions.len()
    }

    /// Checks lengths and variant consistency against a graph and config.
    pub fn check(&self, g: &InfluenceGraph, config: &ModelConfig) -> Result<(), DynamicsError> {
        let n = g.n();
        let lengths = [
            ("opinions", self.opinions.len()),
            ("silence", self.silence.len()),
            ("tolerances", config.n()),
        ];
        for (what, got) in lengths {
            if got != n {
                return Err(DynamicsError::LengthMismatch { what, got, expected: n });
            }
        }
        match (&self.public, config.variant) {
            (Some(p), Variant::SomPlus) => {
                if p.values.len() != n || p.last_spoke.len() != n {
                    return Err(DynamicsError::LengthMismatch {
                        what: "public opinions",
                        got: p.values.len().min(p.last_spoke.len()),
                        expected: n,
                    });
                }
                if self.t == 0 && self.silence.silent_count() > 0 {
                    return Err(DynamicsError::VariantStateMismatch {
                        variant: Variant::SomPlus,
                        reason: "every agent must speak at t = 0",
                    });
                }
            }
            (None, Variant::SomPlus) => {
                return Err(DynamicsError::VariantStateMismatch {
                    variant: Variant::SomPlus,
                    reason: "public opinion state missing",
                })
            }
            (Some(_), variant) => {
                return Err(DynamicsError::VariantStateMismatch {
                    variant,
                    reason: "public opinion state only exists in the memory-based model",
                })
            }
            (None, _) => {}
        }
        Ok(())
    }
}

/// `|x - y| <= tau`, exact binary64 comparison.
pub fn proximity(x: f64, y: f64, tau: f64) -> Result<bool, DynamicsError> {
    for (name, value) in [("x", x), ("y", y), ("tau", tau)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(DynamicsError::Domain { name, value });
        }
    }
    Ok(close(x, y, tau))
}

#[inline(always)]
fn close(x: f64, y: f64, tau: f64) -> bool {
    (x - y).abs() <= tau
}

// Per-agent kernels. Shared by the sequential step and the parallel engine so
// both evaluate identical floating-point expressions.

#[inline]
pub(crate) fn degroot_agent(g: &InfluenceGraph, b: &[f64], i: usize) -> f64 {
    let (sources, weights) = g.incoming(i);
    let bi = b[i];
    let mut acc = 0.0;
    for (&j, &w) in sources.iter().zip(weights) {
        acc += w * (b[j as usize] - bi);
    }
    bi + acc
}

#[inline]
pub(crate) fn som_minus_agent(g: &InfluenceGraph, b: &[f64], s: &[bool], i: usize) -> f64 {
    let (sources, weights) = g.incoming(i);
    let bi = b[i];
    let mut acc = 0.0;
    for (&j, &w) in sources.iter().zip(weights) {
        let j = j as usize;
        if s[j] {
            acc += w * (b[j] - bi);
        }
    }
    bi + acc
}

#[inline]
pub(crate) fn som_plus_agent(g: &InfluenceGraph, b: &[f64], public: &[f64], i: usize) -> f64 {
    let (sources, weights) = g.incoming(i);
    let bi = b[i];
    let mut acc = 0.0;
    for (&j, &w) in sources.iter().zip(weights) {
        acc += w * (public[j as usize] - bi);
    }
    bi + acc
}

#[inline]
pub(crate) fn som_minus_voice(g: &InfluenceGraph, b: &[f64], s: &[bool], tau: f64, i: usize) -> bool {
    let bi = b[i];
    let mut listened = 0usize;
    let mut agreeing = 0usize;
    for &j in g.incoming(i).0 {
        let j = j as usize;
        if s[j] {
            listened += 1;
            agreeing += close(bi, b[j], tau) as usize;
        }
    }
    listened.div_ceil(2) <= agreeing
}

#[inline]
pub(crate) fn som_plus_voice(
    g: &InfluenceGraph,
    b: &[f64],
    public: &[f64],
    tau: f64,
    i: usize,
) -> bool {
    let bi = b[i];
    let sources = g.incoming(i).0;
    let agreeing = sources.iter().filter(|&&j| close(bi, public[j as usize], tau)).count();
    sources.len().div_ceil(2) <= agreeing
}

fn assert_len(what: &str, got: usize, n: usize) {
    assert_eq!(got, n, "{what} has length {got}, graph has {n} agents");
}

/// `B_i + Σ_j I(j,i) (B_j - B_i)` for every agent.
pub fn degroot_step(g: &InfluenceGraph, opinions: &OpinionState) -> OpinionState {
    assert_len("opinions", opinions.len(), g.n());
    OpinionState((0..g.n()).map(|i| degroot_agent(g, opinions, i)).collect())
}

/// Memoryless opinion update: silent neighbors drop out of the sum without
/// renormalizing, so their share stays with the agent's own opinion.
pub fn som_minus_opinion_step(
    g: &InfluenceGraph,
    opinions: &OpinionState,
    silence: &SilenceState,
) -> OpinionState {
    assert_len("opinions", opinions.len(), g.n());
    assert_len("silence", silence.len(), g.n());
    OpinionState((0..g.n()).map(|i| som_minus_agent(g, opinions, silence, i)).collect())
}

/// Majority rule over the neighbors speaking at `t`.
pub fn som_minus_silence_step(
    g: &InfluenceGraph,
    opinions: &OpinionState,
    silence: &SilenceState,
    tolerances: &[f64],
) -> SilenceState {
    assert_len("opinions", opinions.len(), g.n());
    assert_len("silence", silence.len(), g.n());
    assert_len("tolerances", tolerances.len(), g.n());
    SilenceState(
        (0..g.n())
            .map(|i| som_minus_voice(g, opinions, silence, tolerances[i], i))
            .collect(),
    )
}

/// Memory-based opinion update: every neighbor contributes its public opinion.
pub fn som_plus_opinion_step(
    g: &InfluenceGraph,
    opinions: &OpinionState,
    public: &PublicOpinionState,
) -> OpinionState {
    assert_len("opinions", opinions.len(), g.n());
    assert_len("public opinions", public.values.len(), g.n());
    OpinionState((0..g.n()).map(|i| som_plus_agent(g, opinions, &public.values, i)).collect())
}

/// Majority rule over the public opinions of all neighbors, silent or not.
pub fn som_plus_silence_step(
    g: &InfluenceGraph,
    opinions: &OpinionState,
    public: &PublicOpinionState,
    tolerances: &[f64],
) -> SilenceState {
    assert_len("opinions", opinions.len(), g.n());
    assert_len("public opinions", public.values.len(), g.n());
    assert_len("tolerances", tolerances.len(), g.n());
    SilenceState(
        (0..g.n())
            .map(|i| som_plus_voice(g, opinions, &public.values, tolerances[i], i))
            .collect(),
    )
}

/// Agents speaking at `t_next` publish their new opinion; silent ones keep
/// their previous public opinion.
pub fn public_update(
    opinions_next: &OpinionState,
    silence_next: &SilenceState,
    public_prev: &PublicOpinionState,
    t_next: u64,
) -> PublicOpinionState {
    let mut next = public_prev.clone();
    for (j, &speaks) in silence_next.iter().enumerate() {
        if speaks {
            next.values[j] = opinions_next[j];
            next.last_spoke[j] = t_next;
        }
    }
    next
}

/// Destination buffers for agents `start..start + opinions.len()`.
pub(crate) struct NextSlices<'a> {
    pub start: usize,
    pub opinions: &'a mut [f64],
    pub silence: &'a mut [bool],
    pub public: Option<(&'a mut [f64], &'a mut [u64])>,
}

/// Writes the `t+1` values of a contiguous block of agents. Reads only `cur`.
pub(crate) fn advance_block(
    g: &InfluenceGraph,
    config: &ModelConfig,
    cur: &SimState,
    out: NextSlices<'_>,
) {
    let b = cur.opinions.as_slice();
    let s = cur.silence.as_slice();
    let taus = config.tolerances();
    let NextSlices { start, opinions, silence, public } = out;
    match config.variant {
        Variant::DeGroot => {
            for (k, (o, v)) in opinions.iter_mut().zip(silence.iter_mut()).enumerate() {
                *o = degroot_agent(g, b, start + k);
                *v = true;
            }
        }
        Variant::SomMinus => {
            for (k, (o, v)) in opinions.iter_mut().zip(silence.iter_mut()).enumerate() {
                let i = start + k;
                *o = som_minus_agent(g, b, s, i);
                *v = som_minus_voice(g, b, s, taus[i], i);
            }
        }
        Variant::SomPlus => {
            let prev = cur.public.as_ref().expect("checked by SimState::check");
            let (values, last) = public.expect("public buffers for memory-based model");
            let t_next = cur.t + 1;
            for k in 0..opinions.len() {
                let i = start + k;
                let o = som_plus_agent(g, b, &prev.values, i);
                let speaks = som_plus_voice(g, b, &prev.values, taus[i], i);
                opinions[k] = o;
                silence[k] = speaks;
                if speaks {
                    values[k] = o;
                    last[k] = t_next;
                } else {
                    values[k] = prev.values[i];
                    last[k] = prev.last_spoke[i];
                }
            }
        }
    }
}

/// Overwrites `next` with the successor of `cur`, reusing its buffers.
pub fn step_into(
    g: &InfluenceGraph,
    config: &ModelConfig,
    cur: &SimState,
    next: &mut SimState,
) -> Result<(), DynamicsError> {
    cur.check(g, config)?;
    prepare_buffer(cur, next);
    let public = next
        .public
        .as_mut()
        .map(|p| (p.values.as_mut_slice(), p.last_spoke.as_mut_slice()));
    advance_block(
        g,
        config,
        cur,
        NextSlices {
            start: 0,
            opinions: next.opinions.as_mut_slice(),
            silence: next.silence.as_mut_slice(),
            public,
        },
    );
    Ok(())
}

/// Shapes `next` like `cur` and stamps it with `t + 1`.
pub(crate) fn prepare_buffer(cur: &SimState, next: &mut SimState) {
    let n = cur.n();
    next.t = cur.t + 1;
    next.opinions.0.resize(n, 0.0);
    next.silence.0.resize(n, true);
    match (&cur.public, &mut next.public) {
        (Some(_), Some(p)) => {
            p.values.resize(n, 0.0);
            p.last_spoke.resize(n, 0);
        }
        (Some(_), slot @ None) => {
            *slot = Some(PublicOpinionState { values: vec![0.0; n], last_spoke: vec![0; n] })
        }
        (None, slot) => *slot = None,
    }
}

/// One synchronous transition `(B^t, s^t, P̂^t) -> (B^{t+1}, s^{t+1}, P̂^{t+1})`.
///
/// Opinion and silence updates both read time-`t` state; the public state
/// is then refreshed from the new opinions and silence flags.
pub fn step(
    g: &InfluenceGraph,
    config: &ModelConfig,
    state: &SimState,
) -> Result<SimState, DynamicsError> {
    let mut next = SimState {
        t: 0,
        opinions: OpinionState(Vec::new()),
        silence: SilenceState(Vec::new()),
        public: None,
    };
    step_into(g, config, state, &mut next)?;
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap() -> InfluenceGraph {
        InfluenceGraph::validate(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap()
    }

    fn ops(v: &[f64]) -> OpinionState {
        OpinionState::new(v.to_vec()).unwrap()
    }

    fn uniform_clique(n: usize) -> InfluenceGraph {
        crate::graph::generate_clique(n, crate::graph::WeightScheme::default(), 0).unwrap()
    }

    #[test]
    fn proximity_cases() {
        assert_eq!(proximity(0.5, 0.5, 0.0), Ok(true));
        assert_eq!(proximity(1.0, 0.0, 1.0), Ok(true));
        assert_eq!(proximity(0.30, 0.45, 0.10), Ok(false));
        assert!(matches!(proximity(1.2, 0.0, 0.5), Err(DynamicsError::Domain { name: "x", .. })));
        assert!(matches!(proximity(0.2, 0.0, -0.5), Err(DynamicsError::Domain { name: "tau", .. })));
    }

    #[test]
    fn degroot_swap_alternates() {
        assert_eq!(degroot_step(&swap(), &ops(&[1.0, 0.0])).as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn degroot_keeps_constant_vector() {
        let g = crate::graph::generate_clique(
            6,
            crate::graph::WeightScheme::RandomDirichlet { self_weight: 0.1 },
            3,
        )
        .unwrap();
        let next = degroot_step(&g, &ops(&[0.37; 6]));
        assert!(next.iter().all(|&x| x == 0.37));
    }

    #[test]
    fn degroot_three_clique_by_hand() {
        // agent 0: 0 + 0.5 (0.3 - 0) + 0.5 (0.9 - 0) = 0.6
        // agent 1: 0.3 + 0.5 (0 - 0.3) + 0.5 (0.9 - 0.3) = 0.45
        // agent 2: 0.9 + 0.5 (0 - 0.9) + 0.5 (0.3 - 0.9) = 0.15
        let next = degroot_step(&uniform_clique(3), &ops(&[0.0, 0.3, 0.9]));
        let expected = [0.6, 0.45, 0.15];
        for (got, want) in next.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn som_minus_ignores_silent_neighbors() {
        let g = uniform_clique(4);
        let b = ops(&[0.1, 0.5, 0.9, 0.3]);
        let s = SilenceState::new(vec![true, false, false, false]);
        let next = som_minus_opinion_step(&g, &b, &s);
        assert_eq!(next[0], 0.1);
    }

    #[test]
    fn som_minus_with_everyone_speaking_is_degroot() {
        let g = uniform_clique(5);
        let b = ops(&[0.1, 0.5, 0.9, 0.3, 0.77]);
        let s = SilenceState::all_speaking(5);
        assert_eq!(som_minus_opinion_step(&g, &b, &s), degroot_step(&g, &b));
        assert_eq!(
            som_minus_opinion_step(&swap(), &ops(&[1.0, 0.0]), &SilenceState::all_speaking(2))
                .as_slice(),
            &[0.0, 1.0]
        );
    }

    #[test]
    fn all_silent_everyone_speaks_next() {
        let g = uniform_clique(4);
        let b = ops(&[0.1, 0.5, 0.9, 0.3]);
        let next = som_minus_silence_step(&g, &b, &SilenceState::all_silent(4), &[0.0; 4]);
        assert_eq!(next, SilenceState::all_speaking(4));
    }

    #[test]
    fn majority_threshold_is_ceiling_of_half() {
        // agent 0 listens to agents 1, 2 (and 3 in the second case)
        let two = InfluenceGraph::validate(3, &[(1, 0, 0.3), (2, 0, 0.3)]).unwrap();
        let b = ops(&[0.5, 0.55, 0.9]);
        let s = som_minus_silence_step(&two, &b, &SilenceState::all_speaking(3), &[0.1; 3]);
        assert!(s[0], "1 of 2 close: ceil(2/2) = 1 <= 1");

        let three =
            InfluenceGraph::validate(4, &[(1, 0, 0.2), (2, 0, 0.2), (3, 0, 0.2)]).unwrap();
        let b = ops(&[0.5, 0.55, 0.9, 0.0]);
        let s = som_minus_silence_step(&three, &b, &SilenceState::all_speaking(4), &[0.1; 4]);
        assert!(!s[0], "1 of 3 close: ceil(3/2) = 2 > 1");
    }

    #[test]
    fn som_plus_isolated_agent_speaks() {
        let g = InfluenceGraph::validate(2, &[(0, 1, 0.5)]).unwrap();
        let b = ops(&[0.0, 1.0]);
        let p = PublicOpinionState::initial(&b);
        let s = som_plus_silence_step(&g, &b, &p, &[0.0, 0.0]);
        assert!(s[0]);
        assert!(!s[1]);
    }

    #[test]
    fn som_plus_initial_step_is_degroot() {
        let g = uniform_clique(4);
        let b = ops(&[0.1, 0.5, 0.9, 0.3]);
        assert_eq!(
            som_plus_opinion_step(&g, &b, &PublicOpinionState::initial(&b)),
            degroot_step(&g, &b)
        );
    }

    #[test]
    fn som_plus_pulls_toward_constant_public() {
        let g = crate::graph::generate_clique(
            4,
            crate::graph::WeightScheme::RandomDirichlet { self_weight: 0.3 },
            5,
        )
        .unwrap();
        let b = ops(&[0.1, 0.5, 0.9, 0.3]);
        let p = PublicOpinionState { values: vec![0.6; 4], last_spoke: vec![0; 4] };
        let next = som_plus_opinion_step(&g, &b, &p);
        for i in 0..4 {
            let expected = 0.6 + g.self_weight(i) * (b[i] - 0.6);
            assert!((next[i] - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn som_plus_close_public_keeps_agent_speaking() {
        let g = uniform_clique(3);
        let b = ops(&[0.5, 0.1, 0.9]);
        let p = PublicOpinionState { values: vec![0.5, 0.52, 0.48], last_spoke: vec![0; 3] };
        let s = som_plus_silence_step(&g, &b, &p, &[0.05, 0.0, 0.0]);
        assert!(s[0]);
    }

    #[test]
    fn public_update_rules() {
        let prev = PublicOpinionState { values: vec![0.2, 0.4], last_spoke: vec![3, 3] };
        let next = public_update(
            &ops(&[0.5, 0.6]),
            &SilenceState::new(vec![false, true]),
            &prev,
            4,
        );
        assert_eq!(next.values, vec![0.2, 0.6]);
        assert_eq!(next.last_spoke, vec![3, 4]);
        let all = public_update(&ops(&[0.5, 0.6]), &SilenceState::all_speaking(2), &prev, 4);
        assert_eq!(all.values, vec![0.5, 0.6]);
    }

    #[test]
    fn step_matches_component_functions() {
        let g = crate::graph::generate_clique(
            5,
            crate::graph::WeightScheme::RandomDirichlet { self_weight: 0.2 },
            1,
        )
        .unwrap();
        let b = ops(&[0.1, 0.5, 0.9, 0.3, 0.8]);
        let taus = vec![0.2, 0.1, 0.3, 0.05, 0.4];

        let minus = ModelConfig::new(Variant::SomMinus, taus.clone()).unwrap();
        let s0 = SilenceState::new(vec![true, false, true, true, false]);
        let state = SimState::with_silence(&minus, b.clone(), s0.clone()).unwrap();
        let next = step(&g, &minus, &state).unwrap();
        assert_eq!(next.t, 1);
        assert_eq!(next.opinions, som_minus_opinion_step(&g, &b, &s0));
        assert_eq!(next.silence, som_minus_silence_step(&g, &b, &s0, &taus));
        assert!(next.public.is_none());

        let plus = ModelConfig::new(Variant::SomPlus, taus.clone()).unwrap();
        let state = SimState::initial(&plus, b.clone());
        let next = step(&g, &plus, &state).unwrap();
        let p0 = state.public.as_ref().unwrap();
        assert_eq!(next.opinions, som_plus_opinion_step(&g, &b, p0));
        assert_eq!(next.silence, som_plus_silence_step(&g, &b, p0, &taus));
        assert_eq!(
            next.public.as_ref().unwrap(),
            &public_update(&next.opinions, &next.silence, p0, 1)
        );
    }

    #[test]
    fn two_agent_model_has_period_two() {
        let cfg = ModelConfig::new(Variant::SomMinus, vec![1.0, 1.0]).unwrap();
        let s0 = SimState::initial(&cfg, ops(&[1.0, 0.0]));
        let s1 = step(&swap(), &cfg, &s0).unwrap();
        let s2 = step(&swap(), &cfg, &s1).unwrap();
        assert_eq!(s1.opinions.as_slice(), &[0.0, 1.0]);
        assert_eq!(s2.opinions, s0.opinions);
        assert_eq!(s2.silence, s0.silence);
    }

    #[test]
    fn step_rejects_inconsistent_state() {
        let g = swap();
        let minus = ModelConfig::new(Variant::SomMinus, vec![0.5, 0.5]).unwrap();
        let plus = ModelConfig::new(Variant::SomPlus, vec![0.5, 0.5]).unwrap();
        let state = SimState::initial(&minus, ops(&[0.2, 0.4]));
        assert!(matches!(
            step(&g, &plus, &state),
            Err(DynamicsError::VariantStateMismatch { .. })
        ));
        let state = SimState::initial(&plus, ops(&[0.2, 0.4]));
        assert!(matches!(
            step(&g, &minus, &state),
            Err(DynamicsError::VariantStateMismatch { .. })
        ));
        let short = ModelConfig::new(Variant::SomMinus, vec![0.5]).unwrap();
        assert!(matches!(
            step(&g, &short, &SimState::initial(&short, ops(&[0.2, 0.4]))),
            Err(DynamicsError::LengthMismatch { what: "tolerances", .. })
        ));
        assert!(SimState::with_silence(&plus, ops(&[0.2, 0.4]), SilenceState::all_silent(2))
            .is_err());
    }

    #[test]
    fn config_rejects_out_of_range_tolerance() {
        let err = ModelConfig::new(Variant::SomMinus, vec![0.5, 1.3]).unwrap_err();
        assert_eq!(err, DynamicsError::ToleranceOutOfRange { agent: AgentId(1), value: 1.3 });
        assert!(err.to_string().contains("[0, 1]"));
        assert!(OpinionState::new(vec![0.5, -0.1]).is_err());
    }
}
