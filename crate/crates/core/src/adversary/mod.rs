//! The strong adversary of the online lower bound.
//!
//! After the broadcasts of a round are committed, the adversary connects
//! every free pair (each endpoint already holds what the other sends), then
//! strings the resulting components together with a line. Only the line
//! edges can carry anything new, so progress per round is bounded by the
//! number of free-edge components.

mod experiment;
mod half_empty;
mod matching;

pub use experiment::{
    lower_bound_batch, lower_bound_experiment, lower_bound_record, lower_bound_run, BatchRow,
    ExperimentConfig, ExperimentRecord, LOWER_BOUND_DENSITY,
};
pub use half_empty::{
    max_half_empty, verify_lemma1, HalfEmptyConfig, HalfEmptyViolation, HalfEmptyWitness,
};
pub use matching::{hopcroft_karp, matching_reduction};

use crate::error::Result;
use crate::model::{is_free_edge, Adversary, BroadcastVector, CommGraph, NodeId, TokenMatrix};

/// Connected components of the free-edge graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    /// Blocks ordered by their minimum node; each block sorted.
    pub blocks: Vec<Vec<NodeId>>,
    /// Minimum node of each block.
    pub representatives: Vec<NodeId>,
    block_of: Vec<usize>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, v: NodeId) -> usize {
        self.block_of[v.0]
    }
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller id as root so roots are block minima.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

fn partition_of(n: usize, members: &[NodeId], edges: &[(NodeId, NodeId)]) -> ComponentPartition {
    let mut ds = DisjointSets::new(n);
    for &(u, v) in edges {
        ds.union(u.0, v.0);
    }
    let mut blocks: Vec<Vec<NodeId>> = Vec::new();
    let mut index_of_root = vec![usize::MAX; n];
    let mut block_of = vec![usize::MAX; n];
    // `members` is sorted, so blocks appear in order of their minimum.
    for &v in members {
        let root = ds.find(v.0);
        if index_of_root[root] == usize::MAX {
            index_of_root[root] = blocks.len();
            blocks.push(Vec::new());
        }
        block_of[v.0] = index_of_root[root];
        blocks[index_of_root[root]].push(v);
    }
    let representatives = blocks.iter().map(|b| b[0]).collect();
    ComponentPartition {
        blocks,
        representatives,
        block_of,
    }
}

fn free_pairs(
    state: &TokenMatrix,
    bcast: &BroadcastVector,
    members: &[NodeId],
) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for (i, &u) in members.iter().enumerate() {
        for &v in &members[i + 1..] {
            if is_free_edge(state, bcast, u, v) {
                edges.push((u, v));
            }
        }
    }
    edges
}

/// Components of the graph whose edges are exactly the free pairs.
pub fn free_components(state: &TokenMatrix, bcast: &BroadcastVector) -> ComponentPartition {
    let members: Vec<NodeId> = state.nodes().collect();
    let edges = free_pairs(state, bcast, &members);
    partition_of(state.n(), &members, &edges)
}

/// All free edges plus a line through the block representatives, in block order.
pub fn adversary_graph(state: &TokenMatrix, bcast: &BroadcastVector) -> CommGraph {
    let members: Vec<NodeId> = state.nodes().collect();
    let mut edges = free_pairs(state, bcast, &members);
    let parts = partition_of(state.n(), &members, &edges);
    edges.extend(parts.representatives.windows(2).map(|w| (w[0], w[1])));
    CommGraph::new_unchecked(state.n(), edges).expect("adversary edges are in range and loop-free")
}

/// Variant that contracts `group` into one super node: the group is wired
/// internally by its own free edges and a line, and meets the rest of the
/// network through a single edge at the end of the outer line.
pub fn adversary_graph_contracted(
    state: &TokenMatrix,
    bcast: &BroadcastVector,
    group: &[NodeId],
) -> CommGraph {
    let n = state.n();
    let mut in_group = vec![false; n];
    for &v in group {
        in_group[v.0] = true;
    }
    let inside: Vec<NodeId> = state.nodes().filter(|v| in_group[v.0]).collect();
    let outside: Vec<NodeId> = state.nodes().filter(|v| !in_group[v.0]).collect();

    let inner_free = free_pairs(state, bcast, &inside);
    let outer_free = free_pairs(state, bcast, &outside);
    let inner = partition_of(n, &inside, &inner_free);
    let outer = partition_of(n, &outside, &outer_free);

    let mut edges = inner_free;
    edges.extend(outer_free);
    edges.extend(inner.representatives.windows(2).map(|w| (w[0], w[1])));
    edges.extend(outer.representatives.windows(2).map(|w| (w[0], w[1])));
    if let (Some(&last), Some(&hub)) = (outer.representatives.last(), inner.representatives.first())
    {
        edges.push((last, hub));
    }
    CommGraph::new_unchecked(n, edges).expect("adversary edges are in range and loop-free")
}

/// Strong adversary for [`crate::model::run_online`].
#[derive(Clone, Debug, Default)]
pub struct StrongAdversary {
    contract: Option<Vec<NodeId>>,
}

impl StrongAdversary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Treat `group` as a single super node.
    pub fn with_super_node(group: Vec<NodeId>) -> Self {
        StrongAdversary {
            contract: Some(group),
        }
    }
}

impl Adversary for StrongAdversary {
    fn topology(
        &mut self,
        state: &TokenMatrix,
        bcast: &BroadcastVector,
        _round: usize,
    ) -> Result<CommGraph> {
        Ok(match &self.contract {
            Some(group) => adversary_graph_contracted(state, bcast, group),
            None => adversary_graph(state, bcast),
        })
    }
}

/// Number of edges of `g` that are not free under `(state, bcast)`.
pub fn non_free_edge_count(g: &CommGraph, state: &TokenMatrix, bcast: &BroadcastVector) -> usize {
    g.edges()
        .iter()
        .filter(|&&(u, v)| !is_free_edge(state, bcast, u, v))
        .count()
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{execute_round, Broadcast, TokenId};

    fn nodes(ids: &[usize]) -> Vec<NodeId> {
        ids.iter().map(|&v| NodeId(v)).collect()
    }

    #[test]
    fn full_state_is_one_block_and_complete() {
        let state = TokenMatrix::full(5, 3);
        let bcast = BroadcastVector::from_vec(vec![Broadcast::Token(TokenId(2)); 5]);
        assert_eq!(free_components(&state, &bcast).len(), 1);
        let g = adversary_graph(&state, &bcast);
        assert_eq!(g, CommGraph::complete(5));
        assert_eq!(non_free_edge_count(&g, &state, &bcast), 0);
    }

    #[test]
    fn silent_round_is_one_block() {
        let state = TokenMatrix::empty(4, 2);
        assert_eq!(
            free_components(&state, &BroadcastVector::silent(4)).len(),
            1
        );
    }

    #[test]
    fn two_block_instance() {
        let (state, bcast) = fixtures::two_blocks();
        let parts = free_components(&state, &bcast);
        assert_eq!(parts.blocks, vec![nodes(&[0, 1]), nodes(&[2, 3])]);
        assert_eq!(parts.representatives, nodes(&[0, 2]));
        let g = adversary_graph(&state, &bcast);
        assert_eq!(
            g.edges(),
            &[
                (NodeId(0), NodeId(1)),
                (NodeId(0), NodeId(2)),
                (NodeId(2), NodeId(3))
            ]
        );
        assert_eq!(non_free_edge_count(&g, &state, &bcast), 1);
        let (_, m) = execute_round(&state, &bcast, &g).unwrap();
        assert_eq!(m.token_gains, 2);
        assert_eq!(m.useful_exchanges, 2);
    }

    #[test]
    fn single_node_graph_is_empty() {
        let state = TokenMatrix::empty(1, 1);
        let g = adversary_graph(&state, &BroadcastVector::silent(1));
        assert_eq!(g.edge_count(), 0);
        assert!(g.is_connected());
    }

    #[test]
    fn super_node_touches_the_rest_once() {
        // Everyone misses everything except the group, which holds all tokens.
        let mut state = TokenMatrix::empty(6, 2);
        for v in [4, 5] {
            for t in 0..2 {
                state.insert(NodeId(v), TokenId(t));
            }
        }
        let bcast = BroadcastVector::from_vec(vec![
            Broadcast::Empty,
            Broadcast::Empty,
            Broadcast::Empty,
            Broadcast::Empty,
            Broadcast::Token(TokenId(0)),
            Broadcast::Token(TokenId(1)),
        ]);
        let group = nodes(&[4, 5]);
        let g = adversary_graph_contracted(&state, &bcast, &group);
        assert!(g.is_connected());
        let crossing = g
            .edges()
            .iter()
            .filter(|(u, v)| group.contains(u) != group.contains(v))
            .count();
        assert_eq!(crossing, 1);
    }
}
