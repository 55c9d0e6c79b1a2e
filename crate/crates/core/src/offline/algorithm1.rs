use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::derandomize::{derandomize_S, TokenWindow};
use super::gather::gather_all;
use crate::error::{Error, Result};
use crate::model::{
    apply_round, BroadcastVector, GraphSequence, NodeId, Schedule, TokenId, TokenMatrix,
};
use crate::online::flood_token;
use crate::rng::{rng_from, stream, substream};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alg1Mode {
    #[default]
    Random,
    Derandomized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alg1Params {
    pub n: usize,
    pub k: usize,
    /// Seed-set size, capped at `n`.
    pub s: usize,
    /// Flood window per token.
    pub delta: usize,
    pub gather_window: usize,
    pub mode: Alg1Mode,
}

fn log2(n: usize) -> f64 {
    (n.max(1) as f64).log2()
}

impl Alg1Params {
    pub fn new(n: usize, k: usize, mode: Alg1Mode) -> Self {
        let lg = log2(n);
        let s = 2 * ((k as f64) * lg).sqrt().ceil() as usize;
        let delta = if k == 0 {
            n
        } else {
            (2.0 * n as f64 * (lg / k as f64).sqrt()).ceil() as usize
        };
        Alg1Params {
            n,
            k,
            s: s.clamp(1, n.max(1)),
            delta: delta.max(1),
            gather_window: n + k,
            mode,
        }
    }

    /// Few enough tokens that flooding them one by one is already fast.
    pub fn trivial(&self) -> bool {
        ((self.k * self.k) as f64) <= log2(self.n)
    }

    /// First round of the flood phase when every gather takes its full window.
    pub fn flood_start(&self) -> usize {
        self.s * self.gather_window + 1
    }

    /// Consecutive Δ-round windows, one per token, starting after the gathers.
    pub fn nominal_windows(&self) -> Vec<TokenWindow> {
        let start = self.flood_start();
        (0..self.k)
            .map(|t| TokenWindow {
                token: TokenId(t),
                first_round: start + t * self.delta,
                last_round: start + (t + 1) * self.delta - 1,
            })
            .collect()
    }

    /// `s (n + k) + k Δ`: rounds used by the gather and flood phases at most.
    pub fn budget(&self) -> usize {
        self.s * self.gather_window + self.k * self.delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatherWindow {
    pub node: NodeId,
    pub first_round: usize,
    pub last_round: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerandSummary {
    /// Exact Φ(∅, ∅) as `num/den`.
    pub initial_phi: String,
    pub final_phi: String,
    pub guaranteed: bool,
    pub padded: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseLog {
    pub params: Alg1Params,
    pub trivial: bool,
    pub seed_set: Vec<NodeId>,
    pub gathers: Vec<GatherWindow>,
    pub floods: Vec<TokenWindow>,
    pub fallback: Vec<TokenWindow>,
    pub fallback_used: bool,
    pub total_rounds: usize,
    pub derandomization: Option<DerandSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alg1Output {
    pub schedule: Schedule,
    pub log: PhaseLog,
}

/// Builds the schedule while replaying it, so every phase sees the real state.
struct Runner<'a> {
    seq: &'a GraphSequence,
    state: TokenMatrix,
    schedule: Schedule,
}

impl Runner<'_> {
    fn next_round(&self) -> usize {
        self.schedule.len() + 1
    }

    fn done(&self) -> bool {
        self.state.is_complete()
    }

    fn step(&mut self, bcast: BroadcastVector) -> Result<()> {
        let round = self.next_round();
        let g = self.seq.graph(round)?;
        apply_round(&mut self.state, &bcast, &g, round)?;
        self.schedule.push(bcast);
        Ok(())
    }

    /// Floods `t` for at most `cap` rounds, stopping once it is everywhere
    /// unless `exact`. Returns the rounds used, if any.
    fn flood(&mut self, t: TokenId, cap: usize, exact: bool) -> Result<Option<TokenWindow>> {
        let first = self.next_round();
        for _ in 0..cap {
            if self.done() || (!exact && self.state.token_complete(t)) {
                break;
            }
            self.step(flood_token(&self.state, t))?;
        }
        let last = self.next_round() - 1;
        Ok((last >= first).then_some(TokenWindow {
            token: t,
            first_round: first,
            last_round: last,
        }))
    }
}

/// Offline k-gossip schedule over a known sequence.
///
/// With few tokens, floods them one after another. Otherwise gathers every
/// token at each node of a seed set S, floods each token in turn for Δ
/// rounds, and finally floods whatever is still missing. Random mode draws
/// S from the seed and trims every phase to the rounds it actually needs;
/// derandomized mode picks S by conditional expectations and keeps the
/// nominal layout (gathers padded to `n + k`, floods exactly Δ) that the
/// choice of S was computed against.
pub fn algorithm1(
    seq: &GraphSequence,
    init: &TokenMatrix,
    params: &Alg1Params,
    seed: u64,
) -> Result<Alg1Output> {
    let (n, k) = (init.n(), init.k());
    if params.n != n || params.k != k || seq.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "parameters for n = {}, k = {}; input has n = {n}, k = {k}, sequence n = {}",
            params.n,
            params.k,
            seq.n()
        )));
    }
    if let Some(t) = init.tokens().find(|&t| init.holder_count(t) == 0) {
        return Err(Error::Precondition(format!("token {t} is held by nobody")));
    }

    let mut run = Runner {
        seq,
        state: init.clone(),
        schedule: Schedule::new(),
    };
    let mut log = PhaseLog {
        params: *params,
        trivial: params.trivial(),
        seed_set: Vec::new(),
        gathers: Vec::new(),
        floods: Vec::new(),
        fallback: Vec::new(),
        fallback_used: false,
        total_rounds: 0,
        derandomization: None,
    };
    let derand = params.mode == Alg1Mode::Derandomized;

    if log.trivial {
        for t in init.tokens() {
            if let Some(w) = run.flood(t, n, false)? {
                log.floods.push(w);
            }
        }
    } else if !run.done() {
        log.seed_set = match params.mode {
            Alg1Mode::Random => {
                let mut rng = rng_from(substream(seed, stream::ALG1_SEEDS));
                let mut picked: Vec<NodeId> = sample(&mut rng, n, params.s)
                    .into_iter()
                    .map(NodeId)
                    .collect();
                picked.sort();
                picked
            }
            Alg1Mode::Derandomized => {
                let outcome = derandomize_S(seq, &params.nominal_windows(), params.s)?;
                log.derandomization = Some(DerandSummary {
                    initial_phi: outcome.initial_phi.to_string(),
                    final_phi: outcome.final_phi.to_string(),
                    guaranteed: outcome.guaranteed,
                    padded: outcome.padded,
                });
                outcome.seed_set
            }
        };

        for &v in &log.seed_set {
            if run.done() {
                break;
            }
            let first = run.next_round();
            let part = gather_all(seq, &run.state, v, first)?;
            for b in part.rounds {
                run.step(b)?;
            }
            if derand {
                while run.next_round() < first + params.gather_window {
                    run.step(BroadcastVector::silent(n))?;
                }
            }
            if run.next_round() > first {
                log.gathers.push(GatherWindow {
                    node: v,
                    first_round: first,
                    last_round: run.next_round() - 1,
                });
            }
        }

        for t in init.tokens() {
            if let Some(w) = run.flood(t, params.delta, derand)? {
                log.floods.push(w);
            }
        }
    }

    for t in init.tokens() {
        // One window of n - 1 rounds completes a flood on connected rounds;
        // keep going in case the input breaks that contract.
        while !run.state.token_complete(t) {
            match run.flood(t, n.max(1), false)? {
                Some(w) => log.fallback.push(w),
                None => break,
            }
        }
    }
    log.fallback_used = !log.fallback.is_empty();
    log.total_rounds = run.schedule.len();
    Ok(Alg1Output {
        schedule: run.schedule,
        log,
    })
}
