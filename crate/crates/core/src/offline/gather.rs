use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evolution::{
    attach_supersource, decompose_paths, max_flow, trees_to_schedule, EvoVertex, EvolutionGraph,
    SteinerTree,
};
use crate::model::GraphSequence;
use crate::model::{NodeId, Schedule, TokenId, TokenMatrix};

/// Where each token is routed from: the target itself if it already holds
/// the token, otherwise the lowest-id holder.
pub fn gather_sources(init: &TokenMatrix, target: NodeId) -> Result<Vec<(NodeId, TokenId)>> {
    init.tokens()
        .map(|t| {
            if init.holds(target, t) {
                return Ok((target, t));
            }
            init.holders_of(t)
                .next()
                .map(|v| (v, t))
                .ok_or_else(|| Error::Precondition(format!("token {t} is held by nobody")))
        })
        .collect()
}

/// Flow value into `(target, 2l)` over the `l`-round window starting at `start_round`.
fn gather_flow(
    seq: &GraphSequence,
    sources: &[(NodeId, TokenId)],
    target: NodeId,
    start_round: usize,
    l: usize,
    k: usize,
) -> Result<(EvolutionGraph, crate::evolution::FlowResult)> {
    let evo = EvolutionGraph::build(seq, start_round, l, k)?;
    let evo = attach_supersource(&evo, sources)?;
    let s = evo.super_source().expect("just attached");
    let t = evo.id(target.0, 2 * l);
    let flow = max_flow(&evo, s, t);
    Ok((evo, flow))
}

/// Schedule that brings every token to `target`, run from `start_round`.
///
/// Routes unit flow from a super-source through the evolution graph of the
/// window into the target's last copy and turns the flow paths into
/// broadcasts. Uses the shortest window (at most `n + k` rounds) whose flow
/// reaches `k`; the schedule is empty when the target already has everything.
pub fn gather_all(
    seq: &GraphSequence,
    init: &TokenMatrix,
    target: NodeId,
    start_round: usize,
) -> Result<Schedule> {
    let (n, k) = (init.n(), init.k());
    if target.0 >= n {
        return Err(Error::NodeOutOfRange { node: target.0, n });
    }
    let sources = gather_sources(init, target)?;
    if sources.iter().all(|&(v, _)| v == target) {
        return Ok(Schedule::new());
    }

    let max_len = n + k;
    let (mut evo, mut flow) = gather_flow(seq, &sources, target, start_round, max_len, k)?;
    if flow.value < k as u64 {
        return Err(Error::FlowDeficit {
            value: flow.value,
            required: k as u64,
        });
    }
    // Feasibility is monotone in the window length (buffers carry tokens
    // forward), so binary search for the shortest one.
    let (mut lo, mut hi) = (1, max_len);
    while lo < hi {
        let mid = (lo + hi) / 2;
        let (e, f) = gather_flow(seq, &sources, target, start_round, mid, k)?;
        if f.value == k as u64 {
            hi = mid;
            evo = e;
            flow = f;
        } else {
            lo = mid + 1;
        }
    }
    let l = lo;
    if evo.rounds() != l {
        (evo, flow) = gather_flow(seq, &sources, target, start_round, l, k)?;
    }

    let s = evo.super_source().expect("attached");
    let t = evo.id(target.0, 2 * l);
    let paths = decompose_paths(&evo, &flow, s, t);

    // Paths leaving a fused source edge take that node's tokens in id order.
    let mut tokens_at: BTreeMap<NodeId, Vec<TokenId>> = BTreeMap::new();
    for &(v, tok) in &sources {
        tokens_at.entry(v).or_default().push(tok);
    }
    for list in tokens_at.values_mut() {
        list.reverse();
    }
    let mut trees = Vec::with_capacity(paths.len());
    for path in paths {
        let root = evo
            .vertex(evo.edges()[path[0]].to)
            .expect("source edges end at level 0");
        let token = tokens_at
            .get_mut(&root.node)
            .and_then(Vec::pop)
            .expect("one path per sourced token");
        let edges: Vec<(EvoVertex, EvoVertex)> = path[1..]
            .iter()
            .map(|&e| {
                let edge = evo.edges()[e];
                (
                    evo.vertex(edge.from).expect("copy"),
                    evo.vertex(edge.to).expect("copy"),
                )
            })
            .collect();
        trees.push(SteinerTree {
            token,
            root,
            edges,
            terminals: vec![EvoVertex::new(target.0, 2 * l)],
        });
    }
    trees_to_schedule(&trees, n)
}
