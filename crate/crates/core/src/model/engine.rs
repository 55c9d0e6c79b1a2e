//! The synchronous round engine.
//!
//! A round is: every node commits one broadcast (a token it holds, or
//! `Empty`), the round's graph is fixed, and every node receives the
//! broadcasts of all its neighbours. Tokens are only stored and forwarded.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    missing_count, Broadcast, CommGraph, GraphSequence, NodeId, TokenId, TokenMatrix,
};

/// One broadcast choice per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BroadcastVector(Vec<Broadcast>);

impl BroadcastVector {
    /// Everyone broadcasts `Empty`.
    pub fn silent(n: usize) -> Self {
        BroadcastVector(vec![Broadcast::Empty; n])
    }

    pub fn from_vec(choices: Vec<Broadcast>) -> Self {
        BroadcastVector(choices)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: NodeId) -> Broadcast {
        self.0[v.0]
    }

    pub fn set(&mut self, v: NodeId, b: Broadcast) {
        self.0[v.0] = b;
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, Broadcast)> + '_ {
        self.0.iter().enumerate().map(|(v, &b)| (NodeId(v), b))
    }

    pub fn is_silent(&self) -> bool {
        self.0.iter().all(|b| b.is_empty())
    }

    /// Extends a parsed vector with `Empty` up to `n` nodes.
    pub fn padded(mut self, n: usize) -> Result<Self> {
        if self.0.len() > n {
            return Err(Error::NodeOutOfRange {
                node: self.0.len() - 1,
                n,
            });
        }
        self.0.resize(n, Broadcast::Empty);
        Ok(self)
    }

    /// First node whose choice it does not hold, if any.
    pub fn first_infeasible(&self, state: &TokenMatrix) -> Option<(NodeId, TokenId)> {
        self.iter().find_map(|(v, b)| match b {
            Broadcast::Token(t) if t.0 >= state.k() || !state.holds(v, t) => Some((v, t)),
            _ => None,
        })
    }
}

// Encoded as a JSON object from node id to token id, with `null` for Empty.
impl Serialize for BroadcastVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (v, b) in self.iter() {
            map.serialize_entry(&v.0.to_string(), &b.token().map(|t| t.0))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for BroadcastVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = BTreeMap::<String, Option<usize>>::deserialize(d)?;
        let mut parsed = Vec::with_capacity(raw.len());
        for (key, token) in raw {
            let v: usize = key
                .parse()
                .map_err(|_| D::Error::custom(format!("node key `{key}` is not an integer")))?;
            parsed.push((v, token));
        }
        let len = parsed.iter().map(|&(v, _)| v + 1).max().unwrap_or(0);
        let mut choices = vec![Broadcast::Empty; len];
        for (v, token) in parsed {
            choices[v] = token.map(TokenId).into();
        }
        Ok(BroadcastVector(choices))
    }
}

/// Broadcast vectors for consecutive rounds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub rounds: Vec<BroadcastVector>,
}

impl Schedule {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn push(&mut self, b: BroadcastVector) {
        self.rounds.push(b);
    }

    pub fn extend(&mut self, other: Schedule) {
        self.rounds.extend(other.rounds);
    }

    /// Pads every round to `n` nodes (file-format rounds may omit silent nodes).
    pub fn padded(self, n: usize) -> Result<Self> {
        let rounds = self
            .rounds
            .into_iter()
            .map(|b| b.padded(n))
            .collect::<Result<_>>()?;
        Ok(Schedule { rounds })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundMetrics {
    /// (edge, direction) deliveries where the receiver lacked the token at round start.
    pub useful_exchanges: usize,
    /// Distinct (node, token) acquisitions.
    pub token_gains: usize,
    /// Missing (node, token) pairs after the round.
    pub missing_total: usize,
    pub per_node_missing: Vec<usize>,
}

/// True iff each endpoint already holds what the other broadcasts.
pub fn is_free_edge(state: &TokenMatrix, bcast: &BroadcastVector, u: NodeId, v: NodeId) -> bool {
    state.holds_broadcast(u, bcast.get(v)) && state.holds_broadcast(v, bcast.get(u))
}

/// Executes one round in place. `round` is only used for error reporting.
pub fn apply_round(
    state: &mut TokenMatrix,
    bcast: &BroadcastVector,
    g: &CommGraph,
    round: usize,
) -> Result<RoundMetrics> {
    let n = state.n();
    if bcast.len() != n || g.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "state has {n} nodes, broadcast {} and graph {}",
            bcast.len(),
            g.n()
        )));
    }
    if let Some((node, token)) = bcast.first_infeasible(state) {
        return Err(Error::InfeasibleBroadcast { round, node, token });
    }

    let mut useful = 0;
    let mut deliveries = Vec::new();
    for &(u, v) in g.edges() {
        for (from, to) in [(u, v), (v, u)] {
            if let Broadcast::Token(t) = bcast.get(from) {
                if !state.holds(to, t) {
                    useful += 1;
                    deliveries.push((to, t));
                }
            }
        }
    }
    let gains = deliveries
        .into_iter()
        .filter(|&(v, t)| state.insert(v, t))
        .count();

    Ok(RoundMetrics {
        useful_exchanges: useful,
        token_gains: gains,
        missing_total: missing_count(state),
        per_node_missing: state.nodes().map(|v| state.missing_of(v)).collect(),
    })
}

/// Executes one round, returning the new state and its metrics.
pub fn execute_round(
    state: &TokenMatrix,
    bcast: &BroadcastVector,
    g: &CommGraph,
) -> Result<(TokenMatrix, RoundMetrics)> {
    let mut next = state.clone();
    let metrics = apply_round(&mut next, bcast, g, 1)?;
    Ok((next, metrics))
}

/// An online algorithm: commits broadcasts from the current state and its
/// own history, never from the upcoming graph.
pub trait OnlineStrategy {
    fn name(&self) -> &str;
    fn choose(&mut self, state: &TokenMatrix, round: usize) -> BroadcastVector;
}

/// Picks each round's graph after seeing the committed broadcasts.
pub trait Adversary {
    fn topology(
        &mut self,
        state: &TokenMatrix,
        bcast: &BroadcastVector,
        round: usize,
    ) -> Result<CommGraph>;
}

/// An oblivious adversary replaying a fixed sequence.
impl Adversary for GraphSequence {
    fn topology(
        &mut self,
        _: &TokenMatrix,
        _: &BroadcastVector,
        round: usize,
    ) -> Result<CommGraph> {
        Ok((*self.graph(round)?).clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub broadcasts: BroadcastVector,
    pub graph: CommGraph,
    pub metrics: RoundMetrics,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub initial: TokenMatrix,
    pub rounds: Vec<RoundRecord>,
    #[serde(rename = "final")]
    pub final_state: TokenMatrix,
}

impl Transcript {
    pub fn rounds_used(&self) -> usize {
        self.rounds.len()
    }

    pub fn metrics(&self) -> impl Iterator<Item = &RoundMetrics> {
        self.rounds.iter().map(|r| &r.metrics)
    }

    /// State at the start of round `round` (1-based); `len + 1` gives the final state.
    pub fn state_before(&self, round: usize) -> Result<TokenMatrix> {
        let mut state = self.initial.clone();
        for (i, rec) in self.rounds.iter().take(round.saturating_sub(1)).enumerate() {
            apply_round(&mut state, &rec.broadcasts, &rec.graph, i + 1)?;
        }
        Ok(state)
    }

    /// All round-start states followed by the final state.
    pub fn states(&self) -> Result<Vec<TokenMatrix>> {
        let mut out = vec![self.initial.clone()];
        let mut state = self.initial.clone();
        for (i, rec) in self.rounds.iter().enumerate() {
            apply_round(&mut state, &rec.broadcasts, &rec.graph, i + 1)?;
            out.push(state.clone());
        }
        Ok(out)
    }

    /// Replays every round and checks both the metrics and the final state.
    pub fn verify_replay(&self) -> Result<bool> {
        let mut state = self.initial.clone();
        for (i, rec) in self.rounds.iter().enumerate() {
            if apply_round(&mut state, &rec.broadcasts, &rec.graph, i + 1)? != rec.metrics {
                return Ok(false);
            }
        }
        Ok(state == self.final_state)
    }
}

/// Runs an online strategy against an adaptive adversary until every node
/// holds every token or `max_rounds` rounds have run.
pub fn run_online(
    strategy: &mut dyn OnlineStrategy,
    adversary: &mut dyn Adversary,
    init: &TokenMatrix,
    max_rounds: usize,
) -> Result<Transcript> {
    let mut rounds = Vec::new();
    let final_state = run_online_with(strategy, adversary, init, max_rounds, |_, record| {
        rounds.push(record)
    })?;
    Ok(Transcript {
        initial: init.clone(),
        rounds,
        final_state,
    })
}

/// Same loop as [`run_online`], handing each round to `observe` (with the
/// state it started from) instead of keeping it. Returns the final state.
pub fn run_online_with(
    strategy: &mut dyn OnlineStrategy,
    adversary: &mut dyn Adversary,
    init: &TokenMatrix,
    max_rounds: usize,
    mut observe: impl FnMut(&TokenMatrix, RoundRecord),
) -> Result<TokenMatrix> {
    let mut state = init.clone();
    for round in 1..=max_rounds {
        if state.is_complete() {
            break;
        }
        let broadcasts = strategy.choose(&state, round);
        if let Some((node, token)) = broadcasts.first_infeasible(&state) {
            return Err(Error::InfeasibleBroadcast { round, node, token });
        }
        let graph = adversary.topology(&state, &broadcasts, round)?;
        if graph.n() != state.n() || !graph.is_connected() {
            return Err(Error::Disconnected { n: state.n() });
        }
        let before = state.clone();
        let metrics = apply_round(&mut state, &broadcasts, &graph, round)?;
        observe(
            &before,
            RoundRecord {
                broadcasts,
                graph,
                metrics,
            },
        );
    }
    Ok(state)
}

/// Runs `sched` over rounds `first_round..` of `seq`.
pub fn run_schedule_from(
    init: &TokenMatrix,
    seq: &GraphSequence,
    sched: &Schedule,
    first_round: usize,
) -> Result<(TokenMatrix, Vec<RoundMetrics>)> {
    let mut state = init.clone();
    let mut metrics = Vec::with_capacity(sched.len());
    for (i, bcast) in sched.rounds.iter().enumerate() {
        let round = first_round + i;
        let g = seq.graph(round)?;
        metrics.push(apply_round(&mut state, bcast, &g, round)?);
    }
    Ok((state, metrics))
}

/// Folds the engine over a whole schedule, starting at round 1.
pub fn run_schedule(
    init: &TokenMatrix,
    seq: &GraphSequence,
    sched: &Schedule,
) -> Result<(TokenMatrix, Vec<RoundMetrics>)> {
    run_schedule_from(init, seq, sched, 1)
}
