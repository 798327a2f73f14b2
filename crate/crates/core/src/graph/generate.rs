//! Graph generators. Weight schemes are an extension point of this crate:
//! they decide how each agent splits `1 - self_weight` over its neighbors.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{GraphError, InfluenceGraph};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum WeightScheme {
    /// Every neighbor gets `(1 - self_weight) / |N(i)|`.
    Uniform { self_weight: f64 },
    /// Neighbor shares drawn from a flat Dirichlet, scaled to `1 - self_weight`.
    RandomDirichlet { self_weight: f64 },
}

impl Default for WeightScheme {
    fn default() -> Self {
        WeightScheme::Uniform { self_weight: 0.0 }
    }
}

impl WeightScheme {
    pub fn self_weight(&self) -> f64 {
        match *self {
            WeightScheme::Uniform { self_weight } | WeightScheme::RandomDirichlet { self_weight } => {
                self_weight
            }
        }
    }

    fn check(&self) -> Result<(), GraphError> {
        let s = self.self_weight();
        if (0.0..1.0).contains(&s) {
            Ok(())
        } else {
            Err(GraphError::InvalidSelfWeight(s))
        }
    }

    /// Weights for `degree` neighbors of one agent.
    fn draw(&self, degree: usize, rng: &mut impl Rng) -> Vec<f64> {
        let budget = 1.0 - self.self_weight();
        match self {
            WeightScheme::Uniform { .. } => vec![budget / degree as f64; degree],
            WeightScheme::RandomDirichlet { .. } => {
                let mut draws: Vec<f64> = (0..degree)
                    .map(|_| loop {
                        let x: f64 = Exp1.sample(rng);
                        if x > 0.0 {
                            break x;
                        }
                    })
                    .collect();
                let total: f64 = draws.iter().sum();
                for x in &mut draws {
                    *x = budget * *x / total;
                }
                draws
            }
        }
    }
}

/// Turns per-agent neighbor lists (the agents influencing each agent) into a
/// validated graph, drawing weights agent by agent in ascending order.
fn weigh(
    neighbors: &[Vec<u32>],
    scheme: &WeightScheme,
    rng: &mut impl Rng,
) -> Result<InfluenceGraph, GraphError> {
    let total: usize = neighbors.iter().map(Vec::len).sum();
    let mut edges = Vec::with_capacity(total);
    for (dst, sources) in neighbors.iter().enumerate() {
        if sources.is_empty() {
            continue;
        }
        let weights = scheme.draw(sources.len(), rng);
        edges.extend(sources.iter().zip(weights).map(|(&src, w)| (src as usize, dst, w)));
    }
    InfluenceGraph::validate(neighbors.len(), &edges)
}

pub fn generate_clique(
    n: usize,
    scheme: WeightScheme,
    seed: u64,
) -> Result<InfluenceGraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidParameters("clique needs n >= 1".into()));
    }
    scheme.check()?;
    let neighbors: Vec<Vec<u32>> = (0..n as u32)
        .map(|i| (0..n as u32).filter(|&j| j != i).collect())
        .collect();
    weigh(&neighbors, &scheme, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Barabási–Albert growth: `m` seed agents, then every new agent attaches to
/// `m` distinct existing agents chosen proportionally to degree. Each
/// undirected link becomes a pair of directed edges.
pub fn generate_preferential_attachment(
    n: usize,
    m: usize,
    seed: u64,
    scheme: WeightScheme,
) -> Result<InfluenceGraph, GraphError> {
    if m == 0 || n <= m {
        return Err(GraphError::InvalidParameters(format!(
            "preferential attachment needs n > m >= 1, got n={n}, m={m}"
        )));
    }
    if n > u32::MAX as usize {
        return Err(GraphError::TooLarge(n));
    }
    scheme.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    // one entry per edge endpoint: sampling from it is degree-proportional
    let mut endpoints: Vec<u32> = Vec::with_capacity(2 * m * (n - m));
    let mut targets: Vec<u32> = (0..m as u32).collect();
    let mut chosen: Vec<u32> = Vec::with_capacity(m);

    for source in m as u32..n as u32 {
        for &t in &targets {
            neighbors[source as usize].push(t);
            neighbors[t as usize].push(source);
            endpoints.push(t);
            endpoints.push(source);
        }
        chosen.clear();
        while chosen.len() < m {
            let pick = endpoints[rng.random_range(0..endpoints.len())];
            if !chosen.contains(&pick) {
                chosen.push(pick);
            }
        }
        std::mem::swap(&mut targets, &mut chosen);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    weigh(&neighbors, &scheme, &mut rng)
}

/// Random strongly connected digraph: a directed Hamiltonian cycle over a
/// random permutation plus every other ordered pair with probability
/// `extra_edge_prob`. Used as a fuzzing fixture.
pub fn generate_random_strongly_connected(
    n: usize,
    extra_edge_prob: f64,
    scheme: WeightScheme,
    seed: u64,
) -> Result<InfluenceGraph, GraphError> {
    if n == 0 || !(0.0..=1.0).contains(&extra_edge_prob) {
        return Err(GraphError::InvalidParameters(format!(
            "need n >= 1 and edge probability in [0, 1], got n={n}, p={extra_edge_prob}"
        )));
    }
    scheme.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng);

    let mut adjacency = vec![vec![false; n]; n];
    if n > 1 {
        for k in 0..n {
            let src = order[k] as usize;
            let dst = order[(k + 1) % n] as usize;
            adjacency[dst][src] = true;
        }
    }
    for (dst, row) in adjacency.iter_mut().enumerate() {
        for (src, present) in row.iter_mut().enumerate() {
            if src != dst && rng.random_bool(extra_edge_prob) {
                *present = true;
            }
        }
    }
    let neighbors: Vec<Vec<u32>> = adjacency
        .iter()
        .map(|row| (0..n as u32).filter(|&j| row[j as usize]).collect())
        .collect();
    weigh(&neighbors, &scheme, &mut rng)
}
