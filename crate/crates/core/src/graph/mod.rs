//! Influence graphs: weighted directed graphs whose incoming influence on
//! every agent, self-influence included, sums to one.
//!
//! Self-influence is kept out of the edge set. Raw edge lists normally carry
//! only cross edges and the validator infers `self_weight = 1 - Σ incoming`;
//! an explicit `(i, i, w)` entry is folded into the self weight instead.

mod generate;
mod topology;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use generate::{
    generate_clique, generate_preferential_attachment, generate_random_strongly_connected,
    WeightScheme,
};
pub use topology::{is_clique, period, strongly_connected_components, topology, TopologyReport};

/// Tolerance on `self_weight + Σ incoming = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Dense zero-based agent index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("an influence graph needs at least one agent")]
    Empty,
    #[error("edge ({src}, {dst}) references an agent outside 0..{n}")]
    AgentOutOfRange { src: usize, dst: usize, n: usize },
    #[error("edge ({src}, {dst}) has non-finite weight {weight}")]
    NonFiniteWeight { src: usize, dst: usize, weight: f64 },
    /// Also raised for an inferred self weight, reported as the edge `(i, i)`.
    #[error("edge ({src}, {dst}) has negative weight {weight}")]
    NegativeWeight { src: usize, dst: usize, weight: f64 },
    #[error("edge ({src}, {dst}) has weight 0; absent influence must be omitted")]
    ZeroWeightEdge { src: usize, dst: usize },
    #[error("influence on agent {agent} sums to {sum}, expected 1")]
    NormalizationViolation { agent: usize, sum: f64 },
    #[error("edge ({src}, {dst}) is listed more than once")]
    DuplicateEdge { src: usize, dst: usize },
    #[error("self weight {0} must lie in [0, 1)")]
    InvalidSelfWeight(f64),
    #[error("invalid generator parameters: {0}")]
    InvalidParameters(String),
    #[error("graph has {0} agents; at most u32::MAX are supported")]
    TooLarge(usize),
}

/// Validated influence graph in compressed incoming-adjacency form.
///
/// Row `i` lists the agents that influence `i`, sorted by source index, with
/// their weights `I(j, i)`. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct InfluenceGraph {
    offsets: Vec<usize>,
    sources: Vec<u32>,
    weights: Vec<f64>,
    self_weight: Vec<f64>,
}

impl InfluenceGraph {
    /// Builds a graph from `(src, dst, weight)` triples, where `src`
    /// influences `dst` with strength `weight`.
    pub fn validate(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if n > u32::MAX as usize {
            return Err(GraphError::TooLarge(n));
        }

        let mut explicit_self: Vec<Option<f64>> = vec![None; n];
        let mut counts = vec![0usize; n + 1];
        for &(src, dst, weight) in edges {
            if src >= n || dst >= n {
                return Err(GraphError::AgentOutOfRange { src, dst, n });
            }
            if !weight.is_finite() {
                return Err(GraphError::NonFiniteWeight { src, dst, weight });
            }
            if weight < 0.0 {
                return Err(GraphError::NegativeWeight { src, dst, weight });
            }
            if weight == 0.0 {
                return Err(GraphError::ZeroWeightEdge { src, dst });
            }
            if src == dst {
                if explicit_self[src].replace(weight).is_some() {
                    return Err(GraphError::DuplicateEdge { src, dst });
                }
            } else {
                counts[dst + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let m = offsets[n];

        let mut cursor = offsets.clone();
        let mut rows: Vec<(u32, f64)> = vec![(0, 0.0); m];
        for &(src, dst, weight) in edges {
            if src != dst {
                rows[cursor[dst]] = (src as u32, weight);
                cursor[dst] += 1;
            }
        }

        let mut self_weight = Vec::with_capacity(n);
        for i in 0..n {
            let row = &mut rows[offsets[i]..offsets[i + 1]];
            row.sort_unstable_by_key(|&(src, _)| src);
            if let Some(pair) = row.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(GraphError::DuplicateEdge { src: pair[0].0 as usize, dst: i });
            }
            let incoming: f64 = row.iter().map(|&(_, w)| w).sum();
            let own = match explicit_self[i] {
                Some(w) => {
                    let total = w + incoming;
                    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                        return Err(GraphError::NormalizationViolation { agent: i, sum: total });
                    }
                    w
                }
                None => {
                    let inferred = 1.0 - incoming;
                    if inferred < -NORMALIZATION_TOLERANCE {
                        return Err(GraphError::NegativeWeight { src: i, dst: i, weight: inferred });
                    }
                    // rounding residue is not a self-loop
                    if inferred.abs() <= NORMALIZATION_TOLERANCE {
                        0.0
                    } else {
                        inferred
                    }
                }
            };
            self_weight.push(own);
        }

        let (sources, weights) = rows.into_iter().unzip();
        Ok(InfluenceGraph { offsets, sources, weights, self_weight })
    }

    pub fn n(&self) -> usize {
        self.self_weight.len()
    }

    /// Number of stored cross edges (self-influence excluded).
    pub fn edge_count(&self) -> usize {
        self.sources.len()
    }

    pub fn self_weight(&self, agent: usize) -> f64 {
        self.self_weight[agent]
    }

    pub fn self_weights(&self) -> &[f64] {
        &self.self_weight
    }

    /// |N(i)|
    pub fn in_degree(&self, agent: usize) -> usize {
        self.offsets[agent + 1] - self.offsets[agent]
    }

    /// Sources and weights of the edges into `agent`, ascending by source.
    #[inline]
    pub fn incoming(&self, agent: usize) -> (&[u32], &[f64]) {
        let range = self.offsets[agent]..self.offsets[agent + 1];
        (&self.sources[range.clone()], &self.weights[range])
    }

    pub fn neighbors(&self, agent: usize) -> impl Iterator<Item = AgentId> + '_ {
        self.incoming(agent).0.iter().map(|&j| AgentId(j as usize))
    }

    /// `I(src, dst)`, zero when the edge is absent.
    pub fn weight(&self, src: usize, dst: usize) -> f64 {
        if src == dst {
            return self.self_weight[dst];
        }
        let (sources, weights) = self.incoming(dst);
        match sources.binary_search(&(src as u32)) {
            Ok(k) => weights[k],
            Err(_) => 0.0,
        }
    }

    /// Cross edges as `(src, dst, weight)`, grouped by destination.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n()).flat_map(move |dst| {
            let (sources, weights) = self.incoming(dst);
            sources.iter().zip(weights).map(move |(&src, &w)| (src as usize, dst, w))
        })
    }

    /// Edge list that validates back to an identical graph: cross edges plus
    /// an explicit `(i, i, w)` for every positive self weight.
    pub fn to_edge_list(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.edge_count() + self.n());
        for dst in 0..self.n() {
            let (sources, weights) = self.incoming(dst);
            out.extend(sources.iter().zip(weights).map(|(&src, &w)| (src as usize, dst, w)));
            if self.self_weight[dst] > 0.0 {
                out.push((dst, dst, self.self_weight[dst]));
            }
        }
        out
    }

    /// Bytes held on the heap by the adjacency arrays.
    pub fn heap_bytes(&self) -> usize {
        self.offsets.capacity() * std::mem::size_of::<usize>()
            + self.sources.capacity() * std::mem::size_of::<u32>()
            + self.weights.capacity() * std::mem::size_of::<f64>()
            + self.self_weight.capacity() * std::mem::size_of::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_agent_swap_has_no_self_influence() {
        let g = InfluenceGraph::validate(2, &[(0, 1, 1.0), (1, 0, 1.0)]).unwrap();
        assert_eq!(g.self_weights(), &[0.0, 0.0]);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.weight(0, 1), 1.0);
    }

    #[test]
    fn lone_agent_influences_itself_fully() {
        let g = InfluenceGraph::validate(1, &[]).unwrap();
        assert_eq!(g.self_weights(), &[1.0]);
    }

    #[test]
    fn overweight_edge_forces_negative_self_weight() {
        let err = InfluenceGraph::validate(2, &[(0, 1, 1.2)]).unwrap_err();
        match err {
            GraphError::NegativeWeight { src: 1, dst: 1, weight } => {
                assert!((weight + 0.2).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn explicit_self_edge_is_folded() {
        let g = InfluenceGraph::validate(2, &[(0, 1, 0.5), (1, 1, 0.5), (1, 0, 1.0)]).unwrap();
        assert_eq!(g.self_weight(1), 0.5);
        assert_eq!(g.in_degree(1), 1);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn explicit_self_edge_must_normalize() {
        let err = InfluenceGraph::validate(2, &[(0, 1, 0.5), (1, 1, 0.4)]).unwrap_err();
        assert!(matches!(err, GraphError::NormalizationViolation { agent: 1, .. }));
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(InfluenceGraph::validate(0, &[]), Err(GraphError::Empty));
        assert!(matches!(
            InfluenceGraph::validate(2, &[(0, 1, 0.0)]),
            Err(GraphError::ZeroWeightEdge { src: 0, dst: 1 })
        ));
        assert!(matches!(
            InfluenceGraph::validate(2, &[(0, 1, -0.1)]),
            Err(GraphError::NegativeWeight { src: 0, dst: 1, .. })
        ));
        assert!(matches!(
            InfluenceGraph::validate(2, &[(0, 1, 0.1), (0, 1, 0.2)]),
            Err(GraphError::DuplicateEdge { src: 0, dst: 1 })
        ));
        assert!(matches!(
            InfluenceGraph::validate(2, &[(0, 2, 0.1)]),
            Err(GraphError::AgentOutOfRange { .. })
        ));
        assert!(matches!(
            InfluenceGraph::validate(2, &[(0, 1, f64::NAN)]),
            Err(GraphError::NonFiniteWeight { .. })
        ));
    }

    #[test]
    fn rows_are_sorted_by_source() {
        let g =
            InfluenceGraph::validate(4, &[(3, 0, 0.2), (1, 0, 0.3), (2, 0, 0.1), (0, 1, 1.0)])
                .unwrap();
        assert_eq!(g.incoming(0).0, &[1, 2, 3]);
        assert_eq!(g.incoming(0).1, &[0.3, 0.1, 0.2]);
        assert!((g.self_weight(0) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn rounding_residue_is_snapped_to_zero() {
        let third = 1.0 / 3.0;
        let edges: Vec<_> = (1..4).map(|j| (j, 0, third)).collect();
        let g = InfluenceGraph::validate(4, &edges).unwrap();
        assert_eq!(g.self_weight(0), 0.0);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = InfluenceGraph::validate(
            3,
            &[(0, 1, 0.25), (2, 1, 0.5), (1, 0, 0.7), (0, 2, 1.0), (1, 1, 0.25)],
        )
        .unwrap();
        let again = InfluenceGraph::validate(3, &g.to_edge_list()).unwrap();
        assert_eq!(g, again);
    }
}
