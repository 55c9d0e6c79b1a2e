//! Conversions between broadcast schedules and packings of directed Steiner
//! trees in the evolution graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EdgeKind, EvoVertex, EvolutionGraph};
use crate::model::{
    apply_round, Broadcast, BroadcastVector, GraphSequence, NodeId, Schedule, TokenId, TokenMatrix,
};

/// Out-arborescence for one token, rooted at its source at level 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SteinerTree {
    pub token: TokenId,
    pub root: EvoVertex,
    /// Sorted, as (from, to) vertex pairs.
    pub edges: Vec<(EvoVertex, EvoVertex)>,
    pub terminals: Vec<EvoVertex>,
}

/// Backward induction from the destinations: a node that already held the
/// token keeps it through its buffer edge; otherwise the lowest-id
/// neighbour that held it and broadcast it that round supplies it through
/// a selection and a broadcast edge.
///
/// `dests[t]` lists the destination nodes of token `t`. Every token must
/// start at exactly one node.
pub fn schedule_to_trees(
    init: &TokenMatrix,
    seq: &GraphSequence,
    sched: &Schedule,
    dests: &[Vec<NodeId>],
) -> Result<Vec<SteinerTree>> {
    let l = sched.len();
    if dests.len() != init.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} destination sets for k = {}",
            dests.len(),
            init.k()
        )));
    }
    let mut states = Vec::with_capacity(l + 1);
    let mut graphs = Vec::with_capacity(l);
    let mut state = init.clone();
    states.push(state.clone());
    for (i, bcast) in sched.rounds.iter().enumerate() {
        let g = seq.graph(i + 1)?;
        apply_round(&mut state, bcast, &g, i + 1)?;
        states.push(state.clone());
        graphs.push(g);
    }

    let mut trees = Vec::with_capacity(init.k());
    for token in init.tokens() {
        let sources: Vec<NodeId> = init.holders_of(token).collect();
        if sources.len() != 1 {
            return Err(Error::AmbiguousSource {
                token,
                holders: sources.len(),
            });
        }
        for &v in &dests[token.0] {
            if v.0 >= init.n() {
                return Err(Error::NodeOutOfRange {
                    node: v.0,
                    n: init.n(),
                });
            }
            if !states[l].holds(v, token) {
                return Err(Error::Undelivered { token, node: v });
            }
        }

        let mut edges = Vec::new();
        let mut frontier: BTreeSet<NodeId> = dests[token.0].iter().copied().collect();
        for j in (0..l).rev() {
            // `frontier` holds level 2(j+1); build level 2j.
            let before = &states[j];
            let bcast = &sched.rounds[j];
            let g = &graphs[j];
            let mut below = BTreeSet::new();
            let mut senders = BTreeSet::new();
            for &v in &frontier {
                if before.holds(v, token) {
                    below.insert(v);
                    edges.push((EvoVertex::new(v.0, 2 * j), EvoVertex::new(v.0, 2 * j + 2)));
                } else {
                    let u = g
                        .neighbors(v)
                        .iter()
                        .copied()
                        .find(|&u| {
                            before.holds(u, token) && bcast.get(u) == Broadcast::Token(token)
                        })
                        .expect("a node that gained the token has a neighbour that sent it");
                    senders.insert(u);
                    below.insert(u);
                    edges.push((
                        EvoVertex::new(u.0, 2 * j + 1),
                        EvoVertex::new(v.0, 2 * j + 2),
                    ));
                }
            }
            for u in senders {
                edges.push((EvoVertex::new(u.0, 2 * j), EvoVertex::new(u.0, 2 * j + 1)));
            }
            frontier = below;
        }
        debug_assert!(frontier.iter().all(|&v| v == sources[0]));
        edges.sort();
        trees.push(SteinerTree {
            token,
            root: EvoVertex::new(sources[0].0, 0),
            edges,
            terminals: dests[token.0]
                .iter()
                .map(|v| EvoVertex::new(v.0, 2 * l))
                .collect(),
        });
    }
    Ok(trees)
}

fn classify(from: EvoVertex, to: EvoVertex) -> Option<EdgeKind> {
    if from.node == to.node && to.level == from.level + 2 && from.level.is_multiple_of(2) {
        Some(EdgeKind::Buffer)
    } else if from.node == to.node && to.level == from.level + 1 && from.level.is_multiple_of(2) {
        Some(EdgeKind::Selection)
    } else if from.node != to.node && to.level == from.level + 1 && from.level % 2 == 1 {
        Some(EdgeKind::Broadcast)
    } else {
        None
    }
}

/// Node `u` broadcasts token `i` in round `j` iff tree `i` uses the
/// selection edge into `(u, 2j-1)` or a broadcast edge out of it. Trees that
/// share a sender-round violate the unit selection capacity.
pub fn trees_to_schedule(trees: &[SteinerTree], n: usize) -> Result<Schedule> {
    let top = trees
        .iter()
        .flat_map(|t| {
            t.edges
                .iter()
                .map(|e| e.1.level)
                .chain(t.terminals.iter().map(|v| v.level))
        })
        .max()
        .unwrap_or(0);
    let rounds = top.div_ceil(2);
    let mut sched = Schedule {
        rounds: vec![BroadcastVector::silent(n); rounds],
    };
    for tree in trees {
        for &(from, to) in &tree.edges {
            // Selection edges leave level 2j-2, broadcast edges level 2j-1.
            let (sender, round) = match classify(from, to) {
                Some(EdgeKind::Selection) => (from, from.level / 2 + 1),
                Some(EdgeKind::Broadcast) => (from, from.level.div_ceil(2)),
                Some(_) => continue,
                None => {
                    return Err(Error::PackingViolation(format!(
                        "tree for {} has malformed edge {from:?} -> {to:?}",
                        tree.token
                    )))
                }
            };
            if sender.node.0 >= n {
                return Err(Error::NodeOutOfRange {
                    node: sender.node.0,
                    n,
                });
            }
            let slot = &mut sched.rounds[round - 1];
            match slot.get(sender.node) {
                Broadcast::Empty => slot.set(sender.node, Broadcast::Token(tree.token)),
                Broadcast::Token(t) if t == tree.token => {}
                Broadcast::Token(t) => {
                    return Err(Error::PackingViolation(format!(
                        "node {} would send both {t} and {} in round {round}",
                        sender.node, tree.token
                    )))
                }
            }
        }
    }
    Ok(sched)
}

/// True iff every tree is a valid arborescence of `evo` reaching its
/// terminals and the trees together respect every edge capacity.
pub fn verify_packing(trees: &[SteinerTree], evo: &EvolutionGraph) -> bool {
    let mut usage: HashMap<usize, u64> = HashMap::new();
    for tree in trees {
        let Some(root) = evo.id_of(tree.root) else {
            return false;
        };
        if tree.root.level != 0 {
            return false;
        }
        let mut children: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut indegree: HashMap<usize, usize> = HashMap::new();
        for &(from, to) in &tree.edges {
            let (Some(a), Some(b)) = (evo.id_of(from), evo.id_of(to)) else {
                return false;
            };
            let Some(e) = evo.edge_between(a, b) else {
                return false;
            };
            *usage.entry(e).or_default() += 1;
            children.entry(a).or_default().push(b);
            *indegree.entry(b).or_default() += 1;
        }
        if indegree.contains_key(&root) || indegree.values().any(|&d| d != 1) {
            return false;
        }
        let mut reached = BTreeSet::from([root]);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &w in children.get(&u).map(Vec::as_slice).unwrap_or_default() {
                if reached.insert(w) {
                    queue.push_back(w);
                }
            }
        }
        // Every edge endpoint hangs off the root, so there are no stray pieces.
        if reached.len() != indegree.len() + 1 {
            return false;
        }
        for &t in &tree.terminals {
            if t.level + 1 != evo.levels() || !evo.id_of(t).is_some_and(|id| reached.contains(&id))
            {
                return false;
            }
        }
    }
    usage
        .into_iter()
        .all(|(e, used)| used <= evo.edges()[e].capacity)
}

type EdgeList = Vec<((usize, usize), (usize, usize))>;

/// Trees keyed by token id: `{"0": [[[node, level], [node, level]], ...]}`.
pub fn trees_to_json(trees: &[SteinerTree]) -> Result<String> {
    let map: BTreeMap<usize, EdgeList> = trees
        .iter()
        .map(|t| {
            let edges = t
                .edges
                .iter()
                .map(|(a, b)| ((a.node.0, a.level), (b.node.0, b.level)))
                .collect();
            (t.token.0, edges)
        })
        .collect();
    Ok(serde_json::to_string(&map)?)
}
