use thiserror::Error;

use crate::model::{NodeId, TokenId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("token {token} out of range for k = {k}")]
    TokenOutOfRange { token: usize, k: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("graph on {n} nodes is disconnected")]
    Disconnected { n: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),

    #[error("round {round}: node {node} broadcasts {token} which it does not hold")]
    InfeasibleBroadcast {
        round: usize,
        node: NodeId,
        token: TokenId,
    },

    #[error("graph sequence has no graph for round {round} (length {len})")]
    SequenceExhausted { round: usize, len: usize },

    #[error("token {0} appears more than once in the source list")]
    DuplicateSource(TokenId),

    #[error("token {token} has {holders} initial holders; trees need exactly one")]
    AmbiguousSource { token: TokenId, holders: usize },

    #[error("token {token} never reaches destination {node}")]
    Undelivered { token: TokenId, node: NodeId },

    #[error("packing violation: {0}")]
    PackingViolation(String),

    #[error("flow value {value} is below the required {required}")]
    FlowDeficit { value: u64, required: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown strategy `{0}` (expected uniform, rr or rarest)")]
    UnknownStrategy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that mean an input broke the token-forwarding or
    /// connectivity contract, as opposed to a malformed request.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::Disconnected { .. }
                | Error::InfeasibleBroadcast { .. }
                | Error::SequenceExhausted { .. }
                | Error::Undelivered { .. }
                | Error::PackingViolation(_)
                | Error::FlowDeficit { .. }
        )
    }
}
