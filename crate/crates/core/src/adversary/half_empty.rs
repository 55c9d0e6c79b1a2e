//! Half-empty configurations: node/token sequences in which, for every
//! pair i != j, node i misses token j or node j misses token i. Their size
//! caps how many useful exchanges the strong adversary lets through.

use std::fmt;

use crate::adversary::{adversary_graph, free_components};
use crate::model::{execute_round, Broadcast, BroadcastVector, NodeId, TokenId, TokenMatrix};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HalfEmptyConfig {
    pub nodes: Vec<NodeId>,
    pub tokens: Vec<Broadcast>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HalfEmptyViolation {
    LengthMismatch,
    RepeatedNode(NodeId),
    RepeatedToken(TokenId),
    SeveralEmpty,
    /// Both nodes hold each other's token.
    PairHolds(usize, usize),
}

impl fmt::Display for HalfEmptyViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HalfEmptyViolation::LengthMismatch => {
                f.write_str("node and token sequences differ in length")
            }
            HalfEmptyViolation::RepeatedNode(v) => write!(f, "node {v} appears twice"),
            HalfEmptyViolation::RepeatedToken(t) => write!(f, "token {t} appears twice"),
            HalfEmptyViolation::SeveralEmpty => f.write_str("more than one Empty entry"),
            HalfEmptyViolation::PairHolds(i, j) => {
                write!(f, "entries {i} and {j} hold each other's token")
            }
        }
    }
}

impl HalfEmptyConfig {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn non_empty_len(&self) -> usize {
        self.tokens.iter().filter(|b| !b.is_empty()).count()
    }

    pub fn push(&mut self, v: NodeId, t: Broadcast) {
        self.nodes.push(v);
        self.tokens.push(t);
    }

    /// Checks the shape constraints and the pairwise condition against `state`.
    pub fn validate(&self, state: &TokenMatrix) -> Result<(), HalfEmptyViolation> {
        if self.nodes.len() != self.tokens.len() {
            return Err(HalfEmptyViolation::LengthMismatch);
        }
        let mut seen_nodes = vec![false; state.n()];
        for &v in &self.nodes {
            if std::mem::replace(&mut seen_nodes[v.0], true) {
                return Err(HalfEmptyViolation::RepeatedNode(v));
            }
        }
        let mut seen_tokens = vec![false; state.k()];
        let mut empties = 0;
        for &b in &self.tokens {
            match b {
                Broadcast::Empty => empties += 1,
                Broadcast::Token(t) => {
                    if std::mem::replace(&mut seen_tokens[t.0], true) {
                        return Err(HalfEmptyViolation::RepeatedToken(t));
                    }
                }
            }
        }
        if empties > 1 {
            return Err(HalfEmptyViolation::SeveralEmpty);
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if state.holds_broadcast(self.nodes[i], self.tokens[j])
                    && state.holds_broadcast(self.nodes[j], self.tokens[i])
                {
                    return Err(HalfEmptyViolation::PairHolds(i, j));
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, state: &TokenMatrix) -> bool {
        self.validate(state).is_ok()
    }
}

/// The configuration read off one adversarial round, with the round's
/// measured progress.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfEmptyWitness {
    pub config: HalfEmptyConfig,
    /// Useful exchanges when the round runs on the adversary's graph.
    pub useful_exchanges: usize,
}

impl HalfEmptyWitness {
    /// size >= m/2 + 1, in integers.
    pub fn bound_holds(&self) -> bool {
        2 * self.config.len() >= self.useful_exchanges + 2
    }
}

/// Builds the configuration of (block representative, its broadcast), one
/// entry per free-edge component, and measures the round it certifies.
///
/// Representatives of different blocks never share a free edge, so their
/// tokens are distinct and at most one of them is `Empty`; the `Empty`
/// entry is kept.
pub fn verify_lemma1(
    state: &TokenMatrix,
    bcast: &BroadcastVector,
) -> crate::error::Result<HalfEmptyWitness> {
    let parts = free_components(state, bcast);
    let mut config = HalfEmptyConfig::default();
    for &rep in &parts.representatives {
        config.push(rep, bcast.get(rep));
    }
    let g = adversary_graph(state, bcast);
    let (_, metrics) = execute_round(state, bcast, &g)?;
    Ok(HalfEmptyWitness {
        config,
        useful_exchanges: metrics.useful_exchanges,
    })
}

struct Search<'a> {
    state: &'a TokenMatrix,
    order: Vec<NodeId>,
    limit: usize,
    current: Vec<(NodeId, TokenId)>,
    used: Vec<bool>,
    best: Vec<(NodeId, TokenId)>,
}

impl Search<'_> {
    fn compatible(&self, v: NodeId, t: TokenId) -> bool {
        self.current
            .iter()
            .all(|&(w, s)| !self.state.holds(v, s) || !self.state.holds(w, t))
    }

    fn run(&mut self, idx: usize) {
        if self.current.len() > self.best.len() {
            self.best = self.current.clone();
        }
        if self.best.len() >= self.limit || idx == self.order.len() {
            return;
        }
        let remaining_nodes = self.order.len() - idx;
        let remaining_tokens = self.state.k() - self.current.len();
        if self.current.len() + remaining_nodes.min(remaining_tokens) <= self.best.len() {
            return;
        }
        let v = self.order[idx];
        for t in self.state.tokens() {
            if self.used[t.0] || !self.compatible(v, t) {
                continue;
            }
            self.used[t.0] = true;
            self.current.push((v, t));
            self.run(idx + 1);
            self.current.pop();
            self.used[t.0] = false;
            if self.best.len() >= self.limit {
                return;
            }
        }
        self.run(idx + 1);
    }
}

/// Largest half-empty configuration over non-`Empty` tokens, capped at
/// `size_limit`. Exhaustive backtracking: desk-scale instances only.
pub fn max_half_empty(state: &TokenMatrix, size_limit: usize) -> HalfEmptyConfig {
    let mut order: Vec<NodeId> = state.nodes().collect();
    // Nodes missing the most tokens are the most flexible; try them first.
    order.sort_by_key(|&v| (std::cmp::Reverse(state.missing_of(v)), v));
    let mut search = Search {
        state,
        order,
        limit: size_limit,
        current: Vec::new(),
        used: vec![false; state.k()],
        best: Vec::new(),
    };
    search.run(0);
    let mut config = HalfEmptyConfig::default();
    for (v, t) in search.best {
        config.push(v, Broadcast::Token(t));
    }
    config
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::fixtures;

    // Independent oracle: try every injective node sequence and token
    // sequence of each size.
    fn brute_max(state: &TokenMatrix) -> usize {
        let n = state.n();
        let k = state.k();
        let mut best = 0;
        let mut stack: Vec<(Vec<usize>, Vec<usize>)> = vec![(vec![], vec![])];
        while let Some((vs, ts)) = stack.pop() {
            best = best.max(vs.len());
            for v in 0..n {
                if vs.contains(&v) || vs.last().is_some_and(|&l| v < l) {
                    continue;
                }
                for t in 0..k {
                    if ts.contains(&t) {
                        continue;
                    }
                    let ok = vs.iter().zip(&ts).all(|(&w, &s)| {
                        !state.holds(NodeId(v), TokenId(s)) || !state.holds(NodeId(w), TokenId(t))
                    });
                    if ok {
                        let mut vs2 = vs.clone();
                        let mut ts2 = ts.clone();
                        vs2.push(v);
                        ts2.push(t);
                        stack.push((vs2, ts2));
                    }
                }
            }
        }
        best
    }

    #[test]
    fn full_state_gives_size_one() {
        let state = TokenMatrix::full(4, 3);
        let c = max_half_empty(&state, usize::MAX);
        assert_eq!(c.len(), 1);
        assert!(c.is_valid(&state));
        let w = verify_lemma1(
            &state,
            &BroadcastVector::from_vec(vec![Broadcast::Token(TokenId(0)); 4]),
        )
        .unwrap();
        assert_eq!(w.config.len(), 1);
        assert_eq!(w.useful_exchanges, 0);
    }

    #[test]
    fn empty_state_gives_min_n_k() {
        assert_eq!(
            max_half_empty(&TokenMatrix::empty(5, 3), usize::MAX).len(),
            3
        );
        assert_eq!(
            max_half_empty(&TokenMatrix::empty(2, 6), usize::MAX).len(),
            2
        );
    }

    #[test]
    fn two_block_instance() {
        let (state, bcast) = fixtures::two_blocks();
        let w = verify_lemma1(&state, &bcast).unwrap();
        assert_eq!(w.config.nodes, vec![NodeId(0), NodeId(2)]);
        assert_eq!(
            w.config.tokens,
            vec![Broadcast::Token(TokenId(0)), Broadcast::Token(TokenId(1))]
        );
        assert_eq!(w.useful_exchanges, 2);
        assert!(w.bound_holds());
        assert!(w.config.is_valid(&state));
        assert_eq!(brute_max(&state), 2);
        assert_eq!(max_half_empty(&state, usize::MAX).len(), 2);
    }

    #[test]
    fn empty_entry_is_kept() {
        let state = TokenMatrix::from_holders(2, 1, &[vec![TokenId(0)], vec![]]).unwrap();
        let bcast = BroadcastVector::from_vec(vec![Broadcast::Token(TokenId(0)), Broadcast::Empty]);
        let w = verify_lemma1(&state, &bcast).unwrap();
        assert_eq!(w.config.len(), 2);
        assert_eq!(w.config.non_empty_len(), 1);
        assert!(w.config.is_valid(&state));
        assert!(w.bound_holds());
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let state = TokenMatrix::empty(3, 2);
        let mut c = HalfEmptyConfig::default();
        c.push(NodeId(0), Broadcast::Empty);
        c.push(NodeId(1), Broadcast::Empty);
        assert_eq!(c.validate(&state), Err(HalfEmptyViolation::SeveralEmpty));

        let full = TokenMatrix::full(3, 2);
        let mut d = HalfEmptyConfig::default();
        d.push(NodeId(0), Broadcast::Token(TokenId(0)));
        d.push(NodeId(1), Broadcast::Token(TokenId(1)));
        assert_eq!(d.validate(&full), Err(HalfEmptyViolation::PairHolds(0, 1)));
    }

    #[test]
    fn search_matches_brute_force_on_small_random_states() {
        use crate::model::{new_distribution, DistributionSpec};
        for seed in 0..40 {
            let p = [0.3, 0.5, 0.75][seed as usize % 3];
            let state = new_distribution(5, 4, &DistributionSpec::Bernoulli(p), seed).unwrap();
            let found = max_half_empty(&state, usize::MAX);
            assert!(found.is_valid(&state));
            assert_eq!(found.len(), brute_max(&state), "seed {seed}");
        }
    }

    #[test]
    fn limit_caps_the_search() {
        assert_eq!(max_half_empty(&TokenMatrix::empty(8, 8), 3).len(), 3);
    }
}
