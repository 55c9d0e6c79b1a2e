use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::StrongAdversary;
use crate::error::{Error, Result};
use crate::model::{
    missing_count, new_distribution, run_online, run_online_with, DistributionSpec, RoundMetrics,
    TokenMatrix, Transcript,
};
use crate::online::{Strategy, StrategyKind};
use crate::rng::{self, stream};

/// Each (node, token) is present initially with this probability.
pub const LOWER_BOUND_DENSITY: f64 = 0.75;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub strategy: StrategyKind,
    pub max_rounds: usize,
}

impl ExperimentConfig {
    /// Caps the run at `n k` rounds, the cost of flooding tokens one by
    /// one. The adversary can stall a strategy indefinitely once free edges
    /// alone connect the network, so runs need not finish within the cap.
    pub fn new(n: usize, k: usize, strategy: StrategyKind, seed: u64) -> Self {
        ExperimentConfig {
            n,
            k,
            seed,
            strategy,
            max_rounds: n * k.max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub rounds_used: usize,
    pub completed: bool,
    pub initial_missing: usize,
    pub max_useful_exchanges: usize,
    /// ceil(initial_missing / max_useful_exchanges): no run can finish sooner.
    pub bound_rounds: usize,
    pub metrics: Vec<RoundMetrics>,
}

impl ExperimentRecord {
    fn new(
        config: ExperimentConfig,
        init: &TokenMatrix,
        end: &TokenMatrix,
        metrics: Vec<RoundMetrics>,
    ) -> Self {
        let initial_missing = missing_count(init);
        let max_useful = metrics
            .iter()
            .map(|m| m.useful_exchanges)
            .max()
            .unwrap_or(0);
        ExperimentRecord {
            rounds_used: metrics.len(),
            completed: end.is_complete(),
            initial_missing,
            max_useful_exchanges: max_useful,
            bound_rounds: if max_useful == 0 {
                0
            } else {
                initial_missing.div_ceil(max_useful)
            },
            metrics,
            config,
        }
    }
}

fn setup(config: &ExperimentConfig) -> Result<(TokenMatrix, Strategy)> {
    let init = new_distribution(
        config.n,
        config.k,
        &DistributionSpec::Bernoulli(LOWER_BOUND_DENSITY),
        rng::substream(config.seed, stream::DISTRIBUTION),
    )?;
    let strategy = Strategy::new(
        config.strategy,
        config.n,
        rng::substream(config.seed, stream::STRATEGY),
    );
    Ok((init, strategy))
}

/// Runs `config.strategy` from a Bernoulli(3/4) start against the strong
/// adversary, keeping the full transcript.
pub fn lower_bound_run(config: &ExperimentConfig) -> Result<(ExperimentRecord, Transcript)> {
    let (init, mut strategy) = setup(config)?;
    let transcript = run_online(
        &mut strategy,
        &mut StrongAdversary::new(),
        &init,
        config.max_rounds,
    )?;
    let metrics = transcript.metrics().cloned().collect();
    let record = ExperimentRecord::new(config.clone(), &init, &transcript.final_state, metrics);
    Ok((record, transcript))
}

/// Like [`lower_bound_run`] but keeps only the per-round metrics.
pub fn lower_bound_record(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    let (init, mut strategy) = setup(config)?;
    let mut metrics = Vec::new();
    let end = run_online_with(
        &mut strategy,
        &mut StrongAdversary::new(),
        &init,
        config.max_rounds,
        |_, r| metrics.push(r.metrics),
    )?;
    Ok(ExperimentRecord::new(config.clone(), &init, &end, metrics))
}

pub fn lower_bound_experiment(
    n: usize,
    k: usize,
    strategy: StrategyKind,
    seed: u64,
) -> Result<ExperimentRecord> {
    lower_bound_record(&ExperimentConfig::new(n, k, strategy, seed))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchRow {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub rounds_used: usize,
    pub init_missing: usize,
    pub max_useful: usize,
    pub bound: usize,
}

/// One experiment per seed, run on up to `threads` workers. Rows come back
/// in seed order regardless of scheduling.
pub fn lower_bound_batch(
    n: usize,
    k: usize,
    strategy: StrategyKind,
    seeds: &[u64],
    threads: usize,
) -> Result<Vec<BatchRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let rows = pool.install(|| {
        seeds
            .par_iter()
            .map(|&seed| {
                lower_bound_experiment(n, k, strategy, seed).map(|r| BatchRow {
                    n,
                    k,
                    seed,
                    rounds_used: r.rounds_used,
                    init_missing: r.initial_missing,
                    max_useful: r.max_useful_exchanges,
                    bound: r.bound_rounds,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(rows)
}
