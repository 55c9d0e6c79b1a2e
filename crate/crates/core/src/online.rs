//! Online token-forwarding strategies used as subjects of the lower-bound
//! experiments.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{Broadcast, BroadcastVector, OnlineStrategy, TokenId, TokenMatrix};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// Uniform over held tokens, fresh randomness per (seed, round, node).
    UniformRandom,
    /// Cycles held tokens by id.
    RoundRobin,
    /// Centralized: the held token with the fewest holders, ties to lowest id.
    RarestFirstGlobal,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::UniformRandom,
        StrategyKind::RoundRobin,
        StrategyKind::RarestFirstGlobal,
    ];

    pub fn flag(self) -> &'static str {
        match self {
            StrategyKind::UniformRandom => "uniform",
            StrategyKind::RoundRobin => "rr",
            StrategyKind::RarestFirstGlobal => "rarest",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.flag())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "uniform" | "uniform_random" => Ok(StrategyKind::UniformRandom),
            "rr" | "round_robin" => Ok(StrategyKind::RoundRobin),
            "rarest" | "rarest_first_global" => Ok(StrategyKind::RarestFirstGlobal),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }
}

/// Per-node memory. Only touched by the strategy's own choices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StrategyState {
    pub round: usize,
    /// Last token each node broadcast (round-robin cursor).
    pub last_sent: Vec<Option<TokenId>>,
}

impl StrategyState {
    pub fn new(n: usize) -> Self {
        StrategyState {
            round: 0,
            last_sent: vec![None; n],
        }
    }
}

/// One round of choices. Advances `mem.round` and the cursors.
pub fn choose_broadcasts(
    strategy: StrategyKind,
    state: &TokenMatrix,
    mem: &mut StrategyState,
    seed: u64,
) -> BroadcastVector {
    mem.round += 1;
    if mem.last_sent.len() != state.n() {
        mem.last_sent = vec![None; state.n()];
    }
    let holder_counts: Vec<usize> = match strategy {
        StrategyKind::RarestFirstGlobal => state.tokens().map(|t| state.holder_count(t)).collect(),
        _ => Vec::new(),
    };

    let choices = state
        .nodes()
        .map(|v| {
            let held: Vec<TokenId> = state.tokens_of(v).collect();
            if held.is_empty() {
                return Broadcast::Empty;
            }
            let pick = match strategy {
                StrategyKind::UniformRandom => {
                    let mut r = rng::cell_rng(seed, mem.round, v.0);
                    held[r.gen_range(0..held.len())]
                }
                StrategyKind::RoundRobin => next_after(&held, mem.last_sent[v.0]),
                StrategyKind::RarestFirstGlobal => *held
                    .iter()
                    .min_by_key(|t| (holder_counts[t.0], t.0))
                    .expect("held is non-empty"),
            };
            mem.last_sent[v.0] = Some(pick);
            Broadcast::Token(pick)
        })
        .collect();
    BroadcastVector::from_vec(choices)
}

// Smallest held id strictly after `last`, wrapping around.
fn next_after(held: &[TokenId], last: Option<TokenId>) -> TokenId {
    match last {
        Some(last) => held.iter().copied().find(|&t| t > last).unwrap_or(held[0]),
        None => held[0],
    }
}

/// A strategy bound to its memory and seed, usable by the online engine.
#[derive(Clone, Debug)]
pub struct Strategy {
    kind: StrategyKind,
    mem: StrategyState,
    seed: u64,
}

impl Strategy {
    pub fn new(kind: StrategyKind, n: usize, seed: u64) -> Self {
        Strategy {
            kind,
            mem: StrategyState::new(n),
            seed,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }
}

impl OnlineStrategy for Strategy {
    fn name(&self) -> &str {
        self.kind.flag()
    }

    fn choose(&mut self, state: &TokenMatrix, _round: usize) -> BroadcastVector {
        choose_broadcasts(self.kind, state, &mut self.mem, self.seed)
    }
}

/// Every holder of `t` broadcasts it; everyone else is silent.
pub fn flood_token(state: &TokenMatrix, t: TokenId) -> BroadcastVector {
    BroadcastVector::from_vec(
        state
            .nodes()
            .map(|v| {
                if state.holds(v, t) {
                    Broadcast::Token(t)
                } else {
                    Broadcast::Empty
                }
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NodeId;

    #[test]
    fn empty_and_forced_choices() {
        let state = TokenMatrix::from_holders(2, 2, &[vec![], vec![TokenId(1)]]).unwrap();
        for kind in StrategyKind::ALL {
            let b = choose_broadcasts(kind, &state, &mut StrategyState::new(2), 3);
            assert_eq!(b.get(NodeId(0)), Broadcast::Empty);
            assert_eq!(b.get(NodeId(1)), Broadcast::Token(TokenId(1)));
        }
    }

    #[test]
    fn rarest_prefers_fewest_holders() {
        // a = t0 held by 3 nodes, b = t1 held by 1.
        let state = TokenMatrix::from_holders(
            3,
            2,
            &[
                vec![TokenId(0), TokenId(1)],
                vec![TokenId(0)],
                vec![TokenId(0)],
            ],
        )
        .unwrap();
        let b = choose_broadcasts(
            StrategyKind::RarestFirstGlobal,
            &state,
            &mut StrategyState::new(3),
            0,
        );
        assert_eq!(b.get(NodeId(0)), Broadcast::Token(TokenId(1)));
    }

    #[test]
    fn round_robin_cycles() {
        let state =
            TokenMatrix::from_holders(1, 4, &[vec![TokenId(0), TokenId(2), TokenId(3)]]).unwrap();
        let mut mem = StrategyState::new(1);
        let picks: Vec<_> = (0..4)
            .map(|_| {
                choose_broadcasts(StrategyKind::RoundRobin, &state, &mut mem, 0).get(NodeId(0))
            })
            .collect();
        let t = |i| Broadcast::Token(TokenId(i));
        assert_eq!(picks, vec![t(0), t(2), t(3), t(0)]);
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert!(matches!(
            "fastest".parse::<StrategyKind>(),
            Err(Error::UnknownStrategy(_))
        ));
        assert_eq!(
            "rr".parse::<StrategyKind>().unwrap(),
            StrategyKind::RoundRobin
        );
    }
}
