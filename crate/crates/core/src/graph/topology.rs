use serde::Serialize;

use super::InfluenceGraph;

/// Structural summary of an influence graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologyReport {
    pub strongly_connected: bool,
    pub aperiodic: bool,
    pub clique: bool,
    /// Smallest positive influence, self weights included.
    pub min_influence: f64,
    pub edge_count: usize,
    /// gcd of all cycle lengths; `None` when the graph has no cycle.
    pub period: Option<usize>,
}

pub fn topology(g: &InfluenceGraph) -> TopologyReport {
    let components = strongly_connected_components(g);
    let period = period_with(g, &components);
    let min_influence = g
        .edges()
        .map(|(_, _, w)| w)
        .chain(g.self_weights().iter().copied().filter(|&w| w > 0.0))
        .fold(f64::INFINITY, f64::min);
    TopologyReport {
        strongly_connected: components.len() == 1,
        aperiodic: period == Some(1),
        clique: is_clique(g),
        min_influence,
        edge_count: g.edge_count(),
        period,
    }
}

/// Every ordered pair of distinct agents is an edge.
pub fn is_clique(g: &InfluenceGraph) -> bool {
    let n = g.n();
    (0..n).all(|i| g.in_degree(i) == n - 1)
}

/// gcd of the lengths of all cycles, a positive self weight counting as a
/// cycle of length one.
pub fn period(g: &InfluenceGraph) -> Option<usize> {
    period_with(g, &strongly_connected_components(g))
}

/// Outgoing adjacency in CSR form: for every `src`, the agents it influences.
fn out_adjacency(g: &InfluenceGraph) -> (Vec<usize>, Vec<u32>) {
    let n = g.n();
    let mut offsets = vec![0usize; n + 1];
    for (src, _, _) in g.edges() {
        offsets[src + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut cursor = offsets.clone();
    let mut targets = vec![0u32; offsets[n]];
    for (src, dst, _) in g.edges() {
        targets[cursor[src]] = dst as u32;
        cursor[src] += 1;
    }
    (offsets, targets)
}

/// Strongly connected components over the influence direction `src -> dst`
/// (iterative Tarjan). Components come out in reverse topological order.
pub fn strongly_connected_components(g: &InfluenceGraph) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = g.n();
    let (offsets, targets) = out_adjacency(g);

    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next_index = 0;
    // (node, position in its adjacency)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, offsets[root]));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < offsets[v + 1] {
                let w = targets[*pos] as usize;
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }
    components
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Per component: BFS levels from a root, then the gcd of
/// `level[u] + 1 - level[v]` over internal edges `u -> v`. Every cycle lies
/// inside one component, so the graph period is the gcd over components.
fn period_with(g: &InfluenceGraph, components: &[Vec<usize>]) -> Option<usize> {
    let n = g.n();
    let (offsets, targets) = out_adjacency(g);
    let mut component_of = vec![0usize; n];
    for (c, members) in components.iter().enumerate() {
        for &v in members {
            component_of[v] = c;
        }
    }

    let mut level = vec![usize::MAX; n];
    let mut overall = 0usize;
    let mut queue = std::collections::VecDeque::new();
    for (c, members) in components.iter().enumerate() {
        let mut d = 0usize;
        if members.iter().any(|&v| g.self_weight(v) > 0.0) {
            d = 1;
        }
        if members.len() > 1 {
            let root = members[0];
            level[root] = 0;
            queue.push_back(root);
            while let Some(u) = queue.pop_front() {
                for &w in &targets[offsets[u]..offsets[u + 1]] {
                    let w = w as usize;
                    if component_of[w] != c {
                        continue;
                    }
                    if level[w] == usize::MAX {
                        level[w] = level[u] + 1;
                        queue.push_back(w);
                    } else {
                        d = gcd(d, (level[u] + 1).abs_diff(level[w]));
                    }
                }
            }
        }
        overall = gcd(overall, d);
    }
    (overall > 0).then_some(overall)
}
