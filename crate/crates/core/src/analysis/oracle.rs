use crate::dynamics::OpinionState;
use crate::graph::{AgentId, InfluenceGraph};

use super::AnalysisError;

/// Fixed point of the memory-based opinion update when every agent stays
/// silent and the public opinions `public` are frozen:
///
/// `B*_i = Σ_j I(j,i) P̂_j / Σ_j I(j,i)`
///
/// The denominator is `1 - self_weight[i]` up to rounding; summing the
/// stored weights makes this the exact fixed point of the stored-weight
/// iteration. Fails on an agent with no neighbors, whose opinion never
/// moves.
pub fn all_silent_fixed_point(
    g: &InfluenceGraph,
    public: &[f64],
) -> Result<OpinionState, AnalysisError> {
    check_len(g, public)?;
    let mut out = Vec::with_capacity(g.n());
    for i in 0..g.n() {
        match weighted_mean(g, public, i) {
            Some(v) => out.push(v),
            None => return Err(AnalysisError::IsolatedAgent(AgentId(i))),
        }
    }
    Ok(OpinionState::from_vec_unchecked(out))
}

/// Like [`all_silent_fixed_point`], but isolated agents keep their entry of
/// `current` and are reported alongside.
pub fn all_silent_fixed_point_or_current(
    g: &InfluenceGraph,
    public: &[f64],
    current: &OpinionState,
) -> Result<(OpinionState, Vec<AgentId>), AnalysisError> {
    check_len(g, public)?;
    check_len(g, current)?;
    let mut isolated = Vec::new();
    let values = (0..g.n())
        .map(|i| {
            weighted_mean(g, public, i).unwrap_or_else(|| {
                isolated.push(AgentId(i));
                current[i]
            })
        })
        .collect();
    Ok((OpinionState::from_vec_unchecked(values), isolated))
}

fn check_len(g: &InfluenceGraph, v: &[f64]) -> Result<(), AnalysisError> {
    if v.len() == g.n() {
        Ok(())
    } else {
        Err(AnalysisError::LengthMismatch { got: v.len(), expected: g.n() })
    }
}

fn weighted_mean(g: &InfluenceGraph, public: &[f64], i: usize) -> Option<f64> {
    let (sources, weights) = g.incoming(i);
    if sources.is_empty() {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&j, &w) in sources.iter().zip(weights) {
        num += w * public[j as usize];
        den += w;
    }
    Some(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_clique, WeightScheme};

    #[test]
    fn constant_public_is_its_own_fixed_point() {
        let g = generate_clique(5, WeightScheme::RandomDirichlet { self_weight: 0.3 }, 4).unwrap();
        let fp = all_silent_fixed_point(&g, &[0.25; 5]).unwrap();
        for &x in fp.iter() {
            assert!((x - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn four_clique_closed_form() {
        let g = generate_clique(4, WeightScheme::Uniform { self_weight: 0.0 }, 0).unwrap();
        let fp = all_silent_fixed_point(&g, &[1.0, 0.9, 0.1, 0.0]).unwrap();
        let expected = [1.0 / 3.0, 11.0 / 30.0, 19.0 / 30.0, 2.0 / 3.0];
        for (got, want) in fp.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn isolated_agents_are_flagged() {
        let g = InfluenceGraph::validate(2, &[(0, 1, 0.5)]).unwrap();
        assert_eq!(
            all_silent_fixed_point(&g, &[0.2, 0.8]),
            Err(AnalysisError::IsolatedAgent(AgentId(0)))
        );
        let current = OpinionState::new(vec![0.7, 0.8]).unwrap();
        let (fp, isolated) = all_silent_fixed_point_or_current(&g, &[0.2, 0.8], &current).unwrap();
        assert_eq!(fp.as_slice(), &[0.7, 0.2]);
        assert_eq!(isolated, vec![AgentId(0)]);
    }
}
