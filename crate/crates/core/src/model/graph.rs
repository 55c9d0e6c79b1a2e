use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::generate::{self, GeneratorSpec};
use crate::model::NodeId;

/// One round's communication graph: simple, undirected, connected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct CommGraph {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    adj: Vec<Vec<NodeId>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for CommGraph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        CommGraph::new(
            raw.n,
            raw.edges.into_iter().map(|(u, v)| (NodeId(u), NodeId(v))),
        )
    }
}

impl From<CommGraph> for RawGraph {
    fn from(g: CommGraph) -> Self {
        RawGraph {
            n: g.n,
            edges: g.edges.iter().map(|&(u, v)| (u.0, v.0)).collect(),
        }
    }
}

impl CommGraph {
    /// Checked constructor. Duplicate edges are merged; self-loops,
    /// out-of-range endpoints and disconnected graphs are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let g = Self::new_unchecked(n, edges)?;
        if !g.is_connected() {
            return Err(Error::Disconnected { n });
        }
        Ok(g)
    }

    /// Like [`CommGraph::new`] but skips the connectivity check. The online
    /// engine re-checks every adversary graph, so this is the constructor
    /// adversaries use.
    pub fn new_unchecked(
        n: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let mut list = Vec::new();
        for (u, v) in edges {
            if u.0 >= n {
                return Err(Error::NodeOutOfRange { node: u.0, n });
            }
            if v.0 >= n {
                return Err(Error::NodeOutOfRange { node: v.0, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            list.push(if u < v { (u, v) } else { (v, u) });
        }
        list.sort_unstable();
        list.dedup();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &list {
            adj[u.0].push(v);
            adj[v.0].push(u);
        }
        for nbrs in &mut adj {
            nbrs.sort_unstable();
        }
        Ok(CommGraph {
            n,
            edges: list,
            adj,
        })
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|v| (NodeId(v - 1), NodeId(v)))).expect("paths are connected")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (NodeId(u), NodeId(v))));
        Self::new(n, edges).expect("complete graphs are connected")
    }

    pub fn star(n: usize, hub: NodeId) -> Self {
        Self::new(n, (0..n).filter(|&v| v != hub.0).map(|v| (hub, NodeId(v))))
            .expect("stars are connected")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v.0]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adj[u.0].binary_search(&v).is_ok()
    }

    pub fn is_connected(&self) -> bool {
        if self.n <= 1 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if !seen[w.0] {
                    seen[w.0] = true;
                    count += 1;
                    queue.push_back(w.0);
                }
            }
        }
        count == self.n
    }
}

/// What a finite recorded sequence does past its last graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Extend {
    Cycle,
    #[default]
    Error,
}

#[derive(Clone)]
enum Source {
    Recorded {
        graphs: Vec<Arc<CommGraph>>,
        extend: Extend,
    },
    Generated {
        spec: GeneratorSpec,
        cache: Arc<Mutex<HashMap<usize, Arc<CommGraph>>>>,
    },
}

/// Lazy map from round index (starting at 1) to a connected graph.
#[derive(Clone)]
pub struct GraphSequence {
    n: usize,
    source: Source,
}

impl std::fmt::Debug for GraphSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut d = f.debug_struct("GraphSequence");
        d.field("n", &self.n);
        match &self.source {
            Source::Recorded { graphs, extend } => {
                d.field("recorded", &graphs.len()).field("extend", extend)
            }
            Source::Generated { spec, .. } => d.field("generated", spec),
        };
        d.finish()
    }
}

impl PartialEq for GraphSequence {
    fn eq(&self, other: &Self) -> bool {
        match (&self.source, &other.source) {
            (
                Source::Recorded {
                    graphs: a,
                    extend: ea,
                },
                Source::Recorded {
                    graphs: b,
                    extend: eb,
                },
            ) => self.n == other.n && ea == eb && a == b,
            (Source::Generated { spec: a, .. }, Source::Generated { spec: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl GraphSequence {
    pub fn recorded(n: usize, graphs: Vec<CommGraph>, extend: Extend) -> Result<Self> {
        for (i, g) in graphs.iter().enumerate() {
            if g.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "round {} graph has {} nodes, sequence has {n}",
                    i + 1,
                    g.n()
                )));
            }
            if !g.is_connected() {
                return Err(Error::Disconnected { n });
            }
        }
        Ok(GraphSequence {
            n,
            source: Source::Recorded {
                graphs: graphs.into_iter().map(Arc::new).collect(),
                extend,
            },
        })
    }

    /// The same graph every round.
    pub fn repeat(g: CommGraph) -> Self {
        let n = g.n();
        GraphSequence {
            n,
            source: Source::Recorded {
                graphs: vec![Arc::new(g)],
                extend: Extend::Cycle,
            },
        }
    }

    /// Unbounded sequence drawn round by round from a seeded generator.
    pub fn generated(spec: GeneratorSpec) -> Self {
        GraphSequence {
            n: spec.n,
            source: Source::Generated {
                spec,
                cache: Arc::default(),
            },
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of distinct recorded rounds, or `None` if unbounded.
    pub fn recorded_len(&self) -> Option<usize> {
        match &self.source {
            Source::Recorded { graphs, .. } => Some(graphs.len()),
            Source::Generated { .. } => None,
        }
    }

    pub fn extend(&self) -> Option<Extend> {
        match &self.source {
            Source::Recorded { extend, .. } => Some(*extend),
            Source::Generated { .. } => None,
        }
    }

    /// Whether rounds `1..=rounds` are all available.
    pub fn covers(&self, rounds: usize) -> bool {
        match &self.source {
            Source::Recorded { graphs, extend } => {
                rounds <= graphs.len() || (*extend == Extend::Cycle && !graphs.is_empty())
            }
            Source::Generated { .. } => true,
        }
    }

    /// Graph of round `round` (1-based).
    pub fn graph(&self, round: usize) -> Result<Arc<CommGraph>> {
        assert!(round >= 1, "rounds are numbered from 1");
        match &self.source {
            Source::Recorded { graphs, extend } => {
                let len = graphs.len();
                if round <= len {
                    Ok(graphs[round - 1].clone())
                } else if *extend == Extend::Cycle && len > 0 {
                    Ok(graphs[(round - 1) % len].clone())
                } else {
                    Err(Error::SequenceExhausted { round, len })
                }
            }
            Source::Generated { spec, cache } => {
                if let Some(g) = cache.lock().expect("cache lock").get(&round) {
                    return Ok(g.clone());
                }
                let g = Arc::new(generate::graph_for_round(spec, round)?);
                cache.lock().expect("cache lock").insert(round, g.clone());
                Ok(g)
            }
        }
    }

    /// Materializes rounds `1..=rounds` as a finite recorded sequence.
    pub fn take(&self, rounds: usize, extend: Extend) -> Result<GraphSequence> {
        let graphs = (1..=rounds)
            .map(|r| self.graph(r).map(|g| (*g).clone()))
            .collect::<Result<Vec<_>>>()?;
        GraphSequence::recorded(self.n, graphs, extend)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_graphs() {
        assert!(matches!(
            CommGraph::new(3, [(NodeId(0), NodeId(1))]),
            Err(Error::Disconnected { n: 3 })
        ));
        assert!(matches!(
            CommGraph::new(2, [(NodeId(1), NodeId(1))]),
            Err(Error::SelfLoop(_))
        ));
        assert!(CommGraph::new(2, [(NodeId(0), NodeId(2))]).is_err());
    }

    #[test]
    fn merges_duplicates_and_orients_edges() {
        let g = CommGraph::new(2, [(NodeId(1), NodeId(0)), (NodeId(0), NodeId(1))]).unwrap();
        assert_eq!(g.edges(), &[(NodeId(0), NodeId(1))]);
        assert!(g.has_edge(NodeId(1), NodeId(0)));
    }

    #[test]
    fn single_node_is_connected() {
        let g = CommGraph::new(1, []).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn cyclic_extension_and_exhaustion() {
        let a = CommGraph::path(3);
        let b = CommGraph::star(3, NodeId(2));
        let cyc = GraphSequence::recorded(3, vec![a.clone(), b.clone()], Extend::Cycle).unwrap();
        assert_eq!(*cyc.graph(3).unwrap(), a);
        assert_eq!(*cyc.graph(4).unwrap(), b);
        let fin = GraphSequence::recorded(3, vec![a, b], Extend::Error).unwrap();
        assert!(matches!(
            fin.graph(3),
            Err(Error::SequenceExhausted { round: 3, len: 2 })
        ));
        assert!(fin.covers(2) && !fin.covers(3));
        let empty = GraphSequence::recorded(3, vec![], Extend::Cycle).unwrap();
        assert!(empty.graph(1).is_err());
    }

    #[test]
    fn graph_json_round_trip() {
        let g = CommGraph::star(4, NodeId(1));
        let s = serde_json::to_string(&g).unwrap();
        let back: CommGraph = serde_json::from_str(&s).unwrap();
        assert_eq!(g, back);
        assert!(serde_json::from_str::<CommGraph>(r#"{"n":3,"edges":[[0,1]]}"#).is_err());
    }
}
