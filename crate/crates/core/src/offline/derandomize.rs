//! Deterministic choice of the seed set by conditional expectations.
//!
//! For every (node u, token t) let B(u, t) be the nodes from which a flood
//! of t during t's window reaches u. A seed set X of size s serves u for t
//! iff it meets B(u, t). The potential Φ(S, T) sums, over all pairs, the
//! probability that X = S plus s - |S| uniform picks from V \ T misses
//! B(u, t). Scanning nodes in id order and keeping whichever branch does
//! not raise Φ ends with Φ = 0 whenever it started below 1.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GraphSequence, NodeId, TokenId};

/// Rounds `first_round..=last_round` during which token `token` is flooded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenWindow {
    pub token: TokenId,
    pub first_round: usize,
    pub last_round: usize,
}

impl TokenWindow {
    pub fn len(&self) -> usize {
        (self.last_round + 1).saturating_sub(self.first_round)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Nodes `w` such that flooding from `{w}` at `window.first_round` reaches
/// `u` by `window.last_round`. Computed by flooding backwards from `u`.
pub fn backward_reach_set(
    seq: &GraphSequence,
    window: &TokenWindow,
    u: NodeId,
) -> Result<Vec<bool>> {
    let mut reach = vec![false; seq.n()];
    reach[u.0] = true;
    for r in (window.first_round..=window.last_round).rev() {
        let g = seq.graph(r)?;
        let mut next = reach.clone();
        for &(a, b) in g.edges() {
            if reach[a.0] {
                next[b.0] = true;
            }
            if reach[b.0] {
                next[a.0] = true;
            }
        }
        reach = next;
    }
    Ok(reach)
}

pub fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::zero();
    }
    let r = r.min(n - r);
    let mut c = BigUint::one();
    for i in 0..r {
        c = c * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    c
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Probability that `S` plus `s - |S|` uniform picks from `V \ T` misses
/// `reach`. Sets are membership vectors over the node ids.
pub fn failure_prob(
    reach: &[bool],
    chosen: &[bool],
    considered: &[bool],
    s: usize,
) -> Result<BigRational> {
    let picked = chosen.iter().filter(|&&x| x).count();
    if picked > s {
        return Err(Error::Precondition(format!(
            "|S| = {picked} exceeds s = {s}"
        )));
    }
    if chosen.iter().zip(considered).any(|(&c, &t)| c && !t) {
        return Err(Error::Precondition("S is not a subset of T".into()));
    }
    if reach.iter().zip(chosen).any(|(&b, &c)| b && c) {
        return Ok(BigRational::zero());
    }
    let unconsidered = considered.iter().filter(|&&t| !t).count();
    let hits = reach
        .iter()
        .zip(considered)
        .filter(|(&b, &t)| b && !t)
        .count();
    Ok(miss_probability(unconsidered, hits, s - picked))
}

/// C(u - b, r) / C(u, r), with the picks-unavailable case (r > u) counted
/// as certain failure.
fn miss_probability(u: usize, b: usize, r: usize) -> BigRational {
    if r > u {
        BigRational::one()
    } else if u - b < r {
        BigRational::zero()
    } else {
        ratio(binomial(u - b, r), binomial(u, r))
    }
}

/// Reach sets for every (node, token) pair over the given windows.
pub fn reach_sets(seq: &GraphSequence, windows: &[TokenWindow]) -> Result<Vec<Vec<bool>>> {
    let mut out = Vec::with_capacity(seq.n() * windows.len());
    for w in windows {
        for u in 0..seq.n() {
            out.push(backward_reach_set(seq, w, NodeId(u))?);
        }
    }
    Ok(out)
}

/// Φ(S, T) summed over the given reach sets.
pub fn potential(
    reaches: &[Vec<bool>],
    chosen: &[bool],
    considered: &[bool],
    s: usize,
) -> Result<BigRational> {
    let picked = chosen.iter().filter(|&&x| x).count();
    if picked > s {
        return Err(Error::Precondition(format!(
            "|S| = {picked} exceeds s = {s}"
        )));
    }
    let r = s - picked;
    let unconsidered = considered.iter().filter(|&&t| !t).count();
    // Pairs not yet covered, bucketed by how many unconsidered nodes could cover them.
    let mut buckets = vec![0u64; unconsidered + 1];
    for reach in reaches {
        if reach.iter().zip(chosen).any(|(&b, &c)| b && c) {
            continue;
        }
        let hits = reach
            .iter()
            .zip(considered)
            .filter(|(&b, &t)| b && !t)
            .count();
        buckets[hits] += 1;
    }
    let mut total = BigRational::zero();
    for (hits, &count) in buckets.iter().enumerate() {
        if count > 0 {
            total +=
                miss_probability(unconsidered, hits, r) * BigRational::from_integer(count.into());
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScanStep {
    pub node: NodeId,
    pub added: bool,
    /// Φ(S, T) before the step.
    pub before: BigRational,
    /// Φ(S ∪ {v}, T ∪ {v}); `None` once S is full.
    pub with: Option<BigRational>,
    /// Φ(S, T ∪ {v}).
    pub without: BigRational,
}

impl ScanStep {
    pub fn after(&self) -> &BigRational {
        match (&self.with, self.added) {
            (Some(w), true) => w,
            _ => &self.without,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerandOutcome {
    /// Sorted seed set, padded to size s if the scan chose fewer.
    pub seed_set: Vec<NodeId>,
    /// Nodes added by padding.
    pub padded: usize,
    pub initial_phi: BigRational,
    pub final_phi: BigRational,
    pub steps: Vec<ScanStep>,
    /// Φ(∅, ∅) < 1, so the result meets every reach set.
    pub guaranteed: bool,
}

/// Seed set of size `s` chosen by the conditional-expectation scan over
/// the per-token `windows`.
#[allow(non_snake_case)]
pub fn derandomize_S(
    seq: &GraphSequence,
    windows: &[TokenWindow],
    s: usize,
) -> Result<DerandOutcome> {
    let reaches = reach_sets(seq, windows)?;
    derandomize_with_reaches(seq.n(), &reaches, s)
}

pub fn derandomize_with_reaches(
    n: usize,
    reaches: &[Vec<bool>],
    s: usize,
) -> Result<DerandOutcome> {
    if s > n {
        return Err(Error::InvalidArgument(format!(
            "seed set size {s} exceeds n = {n}"
        )));
    }
    let mut chosen = vec![false; n];
    let mut considered = vec![false; n];
    let initial_phi = potential(reaches, &chosen, &considered, s)?;
    let mut phi = initial_phi.clone();
    let mut picked = 0;
    let mut steps = Vec::with_capacity(n);

    for v in 0..n {
        considered[v] = true;
        let without = potential(reaches, &chosen, &considered, s)?;
        let with = if picked < s {
            chosen[v] = true;
            let w = potential(reaches, &chosen, &considered, s)?;
            chosen[v] = false;
            Some(w)
        } else {
            None
        };
        let added = with.as_ref().is_some_and(|w| *w <= without);
        if added {
            chosen[v] = true;
            picked += 1;
        }
        let step = ScanStep {
            node: NodeId(v),
            added,
            before: phi,
            with,
            without,
        };
        phi = step.after().clone();
        steps.push(step);
    }

    let mut padded = 0;
    for slot in chosen.iter_mut().filter(|c| !**c) {
        if picked >= s {
            break;
        }
        *slot = true;
        picked += 1;
        padded += 1;
    }
    let seed_set = (0..n).filter(|&v| chosen[v]).map(NodeId).collect();
    Ok(DerandOutcome {
        seed_set,
        padded,
        guaranteed: initial_phi < BigRational::one(),
        initial_phi,
        final_phi: phi,
        steps,
    })
}
