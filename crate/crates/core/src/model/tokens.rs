use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// What a node sends in one round. `Empty` is held by every node, which
/// lets free-edge logic treat a silent node like any other.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Broadcast {
    #[default]
    Empty,
    Token(TokenId),
}

impl Broadcast {
    pub fn token(self) -> Option<TokenId> {
        match self {
            Broadcast::Empty => None,
            Broadcast::Token(t) => Some(t),
        }
    }

    pub fn is_empty(self) -> bool {
        matches!(self, Broadcast::Empty)
    }
}

impl From<Option<TokenId>> for Broadcast {
    fn from(t: Option<TokenId>) -> Self {
        t.map_or(Broadcast::Empty, Broadcast::Token)
    }
}

impl fmt::Display for Broadcast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Broadcast::Empty => f.write_str("empty"),
            Broadcast::Token(t) => t.fmt(f),
        }
    }
}

/// Which node holds which token: one bit row per node.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TokenMatrix {
    n: usize,
    k: usize,
    words: usize,
    bits: Vec<u64>,
}

impl fmt::Debug for TokenMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<usize>> = self
            .nodes()
            .map(|v| self.tokens_of(v).map(|t| t.0).collect())
            .collect();
        f.debug_struct("TokenMatrix")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("holders", &rows)
            .finish()
    }
}

impl TokenMatrix {
    pub fn empty(n: usize, k: usize) -> Self {
        let words = k.div_ceil(64);
        TokenMatrix {
            n,
            k,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn full(n: usize, k: usize) -> Self {
        let mut m = Self::empty(n, k);
        for v in 0..n {
            for t in 0..k {
                m.insert(NodeId(v), TokenId(t));
            }
        }
        m
    }

    /// Builds a matrix from per-node token lists.
    pub fn from_holders(n: usize, k: usize, holders: &[Vec<TokenId>]) -> Result<Self> {
        if holders.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} holder rows for n = {n}",
                holders.len()
            )));
        }
        let mut m = Self::empty(n, k);
        for (v, row) in holders.iter().enumerate() {
            for &t in row {
                if t.0 >= k {
                    return Err(Error::TokenOutOfRange { token: t.0, k });
                }
                m.insert(NodeId(v), t);
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId)
    }

    pub fn tokens(&self) -> impl Iterator<Item = TokenId> {
        (0..self.k).map(TokenId)
    }

    fn row(&self, v: NodeId) -> &[u64] {
        &self.bits[v.0 * self.words..(v.0 + 1) * self.words]
    }

    pub fn holds(&self, v: NodeId, t: TokenId) -> bool {
        debug_assert!(v.0 < self.n && t.0 < self.k);
        self.bits[v.0 * self.words + t.0 / 64] >> (t.0 % 64) & 1 == 1
    }

    /// `Empty` is held by everyone.
    pub fn holds_broadcast(&self, v: NodeId, b: Broadcast) -> bool {
        match b {
            Broadcast::Empty => true,
            Broadcast::Token(t) => self.holds(v, t),
        }
    }

    /// Sets the bit; returns true if it was newly set.
    pub fn insert(&mut self, v: NodeId, t: TokenId) -> bool {
        let w = &mut self.bits[v.0 * self.words + t.0 / 64];
        let mask = 1u64 << (t.0 % 64);
        let fresh = *w & mask == 0;
        *w |= mask;
        fresh
    }

    pub fn tokens_of(&self, v: NodeId) -> impl Iterator<Item = TokenId> + '_ {
        self.tokens().filter(move |&t| self.holds(v, t))
    }

    pub fn holders_of(&self, t: TokenId) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes().filter(move |&v| self.holds(v, t))
    }

    pub fn held_count(&self, v: NodeId) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn holder_count(&self, t: TokenId) -> usize {
        self.holders_of(t).count()
    }

    pub fn missing_of(&self, v: NodeId) -> usize {
        self.k - self.held_count(v)
    }

    /// Whether `v`'s token set contains every token of `other`'s row in `rhs`.
    pub fn row_contains(&self, v: NodeId, rhs: &TokenMatrix, other: NodeId) -> bool {
        self.row(v)
            .iter()
            .zip(rhs.row(other))
            .all(|(mine, theirs)| theirs & !mine == 0)
    }

    /// Whether every bit of `self` is also set in `later`.
    pub fn is_subset_of(&self, later: &TokenMatrix) -> bool {
        self.n == later.n
            && self.k == later.k
            && self.bits.iter().zip(&later.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_complete(&self) -> bool {
        missing_count(self) == 0
    }

    pub fn token_complete(&self, t: TokenId) -> bool {
        self.holder_count(t) == self.n
    }

    pub fn holder_rows(&self) -> Vec<Vec<TokenId>> {
        self.nodes().map(|v| self.tokens_of(v).collect()).collect()
    }
}

/// Number of (node, token) pairs not yet held.
pub fn missing_count(state: &TokenMatrix) -> usize {
    let held: usize = state.bits.iter().map(|w| w.count_ones() as usize).sum();
    state.n * state.k - held
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistributionSpec {
    /// Each (node, token) independently with probability `p`.
    Bernoulli(f64),
    /// Token i at a distinct node chosen by a seeded permutation.
    OneTokenPerNode,
    /// Explicit per-node holder lists.
    Explicit(Vec<Vec<TokenId>>),
}

pub fn new_distribution(
    n: usize,
    k: usize,
    spec: &DistributionSpec,
    seed: u64,
) -> Result<TokenMatrix> {
    match spec {
        DistributionSpec::Bernoulli(p) => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
            }
            let mut rng = rng::rng_from(seed);
            let mut m = TokenMatrix::empty(n, k);
            for v in 0..n {
                for t in 0..k {
                    if rng.gen_bool(*p) {
                        m.insert(NodeId(v), TokenId(t));
                    }
                }
            }
            Ok(m)
        }
        DistributionSpec::OneTokenPerNode => {
            if k > n {
                return Err(Error::InvalidArgument(format!(
                    "one token per node needs k <= n (k = {k}, n = {n})"
                )));
            }
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng::rng_from(seed));
            let mut m = TokenMatrix::empty(n, k);
            for (t, &v) in perm.iter().take(k).enumerate() {
                m.insert(NodeId(v), TokenId(t));
            }
            Ok(m)
        }
        DistributionSpec::Explicit(rows) => {
            if rows.len() > n {
                return Err(Error::NodeOutOfRange {
                    node: rows.len() - 1,
                    n,
                });
            }
            let mut padded = rows.clone();
            padded.resize(n, Vec::new());
            TokenMatrix::from_holders(n, k, &padded)
        }
    }
}
