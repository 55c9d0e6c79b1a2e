//! Seeded generators of connected graph sequences.

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{io, CommGraph, Extend, GraphSequence, NodeId};
use crate::rng::{self, SimRng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    /// G(n, p) each round, unioned with a uniform random spanning tree.
    GnpRepair {
        p: f64,
    },
    Static {
        graph: CommGraph,
    },
    Path,
    /// Star whose hub is `round mod n`.
    StarRotating,
    Recorded {
        path: PathBuf,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub model: Model,
    pub n: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn gnp(n: usize, p: f64, seed: u64) -> Self {
        GeneratorSpec {
            model: Model::GnpRepair { p },
            n,
            seed,
        }
    }
}

/// Uniform labelled tree on `n` nodes via a random Prüfer sequence.
pub fn random_spanning_tree(n: usize, rng: &mut SimRng) -> Vec<(NodeId, NodeId)> {
    if n < 2 {
        return Vec::new();
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &c in &code {
        degree[c] += 1;
    }
    let mut leaves: BTreeSet<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &c in &code {
        let leaf = leaves
            .pop_first()
            .expect("a Prüfer decode always has a leaf");
        edges.push((NodeId(leaf), NodeId(c)));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let u = leaves.pop_first().expect("two leaves remain");
    let v = leaves.pop_first().expect("two leaves remain");
    edges.push((NodeId(u), NodeId(v)));
    edges
}

/// Graph for `round` (1-based). Each round draws from its own substream,
/// so access order never changes the result.
pub fn graph_for_round(spec: &GeneratorSpec, round: usize) -> Result<CommGraph> {
    let n = spec.n;
    match &spec.model {
        Model::GnpRepair { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1]")));
            }
            let mut rng = rng::rng_from(rng::mix(&[
                rng::substream(spec.seed, rng::stream::GENERATOR),
                round as u64,
            ]));
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(*p) {
                        edges.push((NodeId(u), NodeId(v)));
                    }
                }
            }
            edges.extend(random_spanning_tree(n, &mut rng));
            CommGraph::new(n, edges)
        }
        Model::Static { graph } => {
            if graph.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "static graph has {} nodes, spec {n}",
                    graph.n()
                )));
            }
            if !graph.is_connected() {
                return Err(Error::Disconnected { n });
            }
            Ok(graph.clone())
        }
        Model::Path => Ok(CommGraph::path(n)),
        Model::StarRotating => Ok(CommGraph::star(n, NodeId(round % n.max(1)))),
        Model::Recorded { path } => {
            let seq = io::sequence_from_json(&io::read_to_string(path)?)?;
            Ok((*seq.graph(round)?).clone())
        }
    }
}

/// Finite sequence of exactly `rounds` graphs.
pub fn generate_sequence(spec: &GeneratorSpec, rounds: usize) -> Result<GraphSequence> {
    if let Model::Recorded { path } = &spec.model {
        let seq = io::sequence_from_json(&io::read_to_string(path)?)?;
        return seq.take(rounds, Extend::Error);
    }
    let graphs = (1..=rounds)
        .map(|r| graph_for_round(spec, r))
        .collect::<Result<Vec<_>>>()?;
    GraphSequence::recorded(spec.n, graphs, Extend::Error)
}
