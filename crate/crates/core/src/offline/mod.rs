//! Schedules computed with the whole graph sequence known in advance.

mod algorithm1;
mod derandomize;
mod gather;

pub use algorithm1::{
    algorithm1, Alg1Mode, Alg1Output, Alg1Params, DerandSummary, GatherWindow, PhaseLog,
};
pub use derandomize::{
    backward_reach_set, binomial, derandomize_S, derandomize_with_reaches, failure_prob, potential,
    reach_sets, DerandOutcome, ScanStep, TokenWindow,
};
pub use gather::{gather_all, gather_sources};
