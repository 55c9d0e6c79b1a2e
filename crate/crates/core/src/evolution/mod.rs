//! The evolution graph: a leveled, capacitated DAG that unrolls a dynamic
//! network over time.
//!
//! For `l` rounds there are `2l + 1` copies of the node set. Level `2i - 1`
//! is the start of round `i`, level `2i` its end, level 0 the initial state.
//! Per round and node there is a buffer edge `(v, 2i-2) -> (v, 2i)` (token
//! storage, capacity k in place of infinity) and a unit selection edge
//! `(v, 2i-2) -> (v, 2i-1)` (one broadcast per round). Every edge `{u, v}`
//! of round `i`'s graph gives two unit broadcast edges
//! `(u, 2i-1) -> (v, 2i)` and `(v, 2i-1) -> (u, 2i)`.

pub mod flow;
mod steiner;

pub use steiner::{
    schedule_to_trees, trees_to_json, trees_to_schedule, verify_packing, SteinerTree,
};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::flow::FlowNetwork;
use crate::model::{GraphSequence, NodeId, TokenId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EvoVertex {
    pub node: NodeId,
    pub level: usize,
}

impl EvoVertex {
    pub fn new(node: usize, level: usize) -> Self {
        EvoVertex {
            node: NodeId(node),
            level,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Broadcast,
    Buffer,
    Selection,
    Source,
}

/// Edge between vertex indices; see [`EvolutionGraph::vertex`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvoEdge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
    pub capacity: u64,
}

#[derive(Clone, Debug)]
pub struct EvolutionGraph {
    n: usize,
    rounds: usize,
    first_round: usize,
    edges: Vec<EvoEdge>,
    index: HashMap<(usize, usize), usize>,
    super_source: Option<usize>,
}

/// Evolution graph of rounds `1..=l` with buffer capacity `k`.
pub fn build_evolution_graph(seq: &GraphSequence, l: usize, k: usize) -> Result<EvolutionGraph> {
    EvolutionGraph::build(seq, 1, l, k)
}

impl EvolutionGraph {
    /// Evolution graph of rounds `first_round..first_round + l`; level `2i`
    /// is the end of sequence round `first_round + i - 1`.
    pub fn build(seq: &GraphSequence, first_round: usize, l: usize, k: usize) -> Result<Self> {
        let n = seq.n();
        let mut evo = EvolutionGraph {
            n,
            rounds: l,
            first_round,
            edges: Vec::new(),
            index: HashMap::new(),
            super_source: None,
        };
        for i in 1..=l {
            let g = seq.graph(first_round + i - 1)?;
            for v in 0..n {
                evo.push(
                    evo.id(v, 2 * i - 2),
                    evo.id(v, 2 * i),
                    EdgeKind::Buffer,
                    k as u64,
                );
                evo.push(
                    evo.id(v, 2 * i - 2),
                    evo.id(v, 2 * i - 1),
                    EdgeKind::Selection,
                    1,
                );
            }
            for &(u, v) in g.edges() {
                evo.push(
                    evo.id(u.0, 2 * i - 1),
                    evo.id(v.0, 2 * i),
                    EdgeKind::Broadcast,
                    1,
                );
                evo.push(
                    evo.id(v.0, 2 * i - 1),
                    evo.id(u.0, 2 * i),
                    EdgeKind::Broadcast,
                    1,
                );
            }
        }
        Ok(evo)
    }

    fn push(&mut self, from: usize, to: usize, kind: EdgeKind, capacity: u64) {
        self.index.insert((from, to), self.edges.len());
        self.edges.push(EvoEdge {
            from,
            to,
            kind,
            capacity,
        });
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of rounds `l`; there are `2l + 1` levels.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn first_round(&self) -> usize {
        self.first_round
    }

    pub fn levels(&self) -> usize {
        2 * self.rounds + 1
    }

    /// Vertex count, including the super-source if attached.
    pub fn vertex_count(&self) -> usize {
        self.n * self.levels() + usize::from(self.super_source.is_some())
    }

    pub fn id(&self, node: usize, level: usize) -> usize {
        debug_assert!(node < self.n && level < self.levels());
        level * self.n + node
    }

    pub fn id_of(&self, v: EvoVertex) -> Option<usize> {
        (v.node.0 < self.n && v.level < self.levels()).then(|| self.id(v.node.0, v.level))
    }

    /// `None` for the super-source.
    pub fn vertex(&self, id: usize) -> Option<EvoVertex> {
        (id < self.n * self.levels()).then(|| EvoVertex::new(id % self.n, id / self.n))
    }

    pub fn super_source(&self) -> Option<usize> {
        self.super_source
    }

    pub fn edges(&self) -> &[EvoEdge] {
        &self.edges
    }

    pub fn edge_between(&self, from: usize, to: usize) -> Option<usize> {
        self.index.get(&(from, to)).copied()
    }

    pub fn count_kind(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.kind == kind).count()
    }

    /// Level of a vertex id, with the super-source at -1.
    pub fn level_of(&self, id: usize) -> i64 {
        self.vertex(id).map_or(-1, |v| v.level as i64)
    }
}

/// Adds a super-source with one edge per distinct source node, its capacity
/// the number of tokens sourced there.
pub fn attach_supersource(
    evo: &EvolutionGraph,
    sources: &[(NodeId, TokenId)],
) -> Result<EvolutionGraph> {
    let mut seen = std::collections::HashSet::new();
    let mut per_node: BTreeMap<NodeId, u64> = BTreeMap::new();
    for &(v, t) in sources {
        if !seen.insert(t) {
            return Err(Error::DuplicateSource(t));
        }
        if v.0 >= evo.n {
            return Err(Error::NodeOutOfRange {
                node: v.0,
                n: evo.n,
            });
        }
        *per_node.entry(v).or_default() += 1;
    }
    let mut out = evo.clone();
    if let Some(old) = out.super_source.take() {
        out.edges.retain(|e| e.from != old);
        out.index.retain(|&(from, _), _| from != old);
    }
    let s = out.n * out.levels();
    out.super_source = Some(s);
    for (v, cap) in per_node {
        let to = out.id(v.0, 0);
        out.push(s, to, EdgeKind::Source, cap);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowResult {
    pub value: u64,
    /// Flow per edge, indexed like [`EvolutionGraph::edges`].
    pub flow: Vec<u64>,
}

fn network_of(evo: &EvolutionGraph) -> FlowNetwork {
    let mut net = FlowNetwork::new(evo.vertex_count());
    for e in &evo.edges {
        net.add_edge(e.from, e.to, e.capacity);
    }
    net
}

/// Exact integral maximum flow from `s` to `t` (vertex ids).
pub fn max_flow(evo: &EvolutionGraph, s: usize, t: usize) -> FlowResult {
    let mut net = network_of(evo);
    let value = net.max_flow(s, t);
    FlowResult {
        value,
        flow: (0..evo.edges.len()).map(|e| net.flow(e)).collect(),
    }
}

/// Max flow together with the source side of a minimum cut.
pub fn max_flow_with_cut(evo: &EvolutionGraph, s: usize, t: usize) -> (FlowResult, Vec<bool>) {
    let mut net = network_of(evo);
    let value = net.max_flow(s, t);
    let cut = net.residual_reachable(s);
    let flow = (0..evo.edges.len()).map(|e| net.flow(e)).collect();
    (FlowResult { value, flow }, cut)
}

/// Peels `flow` into unit `s`-`t` paths (edge ids). The graph is a DAG, so
/// following any positive-flow edge always ends at `t`.
pub fn decompose_paths(
    evo: &EvolutionGraph,
    flow: &FlowResult,
    s: usize,
    t: usize,
) -> Vec<Vec<usize>> {
    let mut out_edges: Vec<Vec<usize>> = vec![Vec::new(); evo.vertex_count()];
    for (id, e) in evo.edges.iter().enumerate() {
        if flow.flow[id] > 0 {
            out_edges[e.from].push(id);
        }
    }
    let mut remaining = flow.flow.clone();
    let mut paths = Vec::with_capacity(flow.value as usize);
    for _ in 0..flow.value {
        let mut path = Vec::new();
        let mut u = s;
        while u != t {
            let e = *out_edges[u]
                .iter()
                .find(|&&e| remaining[e] > 0)
                .expect("flow conservation leaves an outgoing unit");
            remaining[e] -= 1;
            path.push(e);
            u = evo.edges[e].to;
        }
        paths.push(path);
    }
    paths
}

#[derive(Serialize)]
struct ExportVertex {
    node: Option<usize>,
    level: i64,
}

#[derive(Serialize)]
struct ExportEdge {
    from: usize,
    to: usize,
    kind: EdgeKind,
    capacity: u64,
}

#[derive(Serialize)]
struct Export {
    n: usize,
    rounds: usize,
    vertices: Vec<ExportVertex>,
    edges: Vec<ExportEdge>,
}

/// Debug export: vertices as (node, level) with the super-source as
/// `{node: null, level: -1}`; edges refer to vertex positions.
pub fn evolution_to_json(evo: &EvolutionGraph) -> Result<String> {
    let vertices = (0..evo.vertex_count())
        .map(|id| ExportVertex {
            node: evo.vertex(id).map(|v| v.node.0),
            level: evo.level_of(id),
        })
        .collect();
    let edges = evo
        .edges
        .iter()
        .map(|e| ExportEdge {
            from: e.from,
            to: e.to,
            kind: e.kind,
            capacity: e.capacity,
        })
        .collect();
    Ok(serde_json::to_string(&Export {
        n: evo.n,
        rounds: evo.rounds,
        vertices,
        edges,
    })?)
}
