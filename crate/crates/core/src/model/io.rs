//! On-disk formats: token distributions, graph sequences and schedules as
//! JSON; per-round metrics as CSV.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{
    CommGraph, Extend, GraphSequence, NodeId, RoundMetrics, Schedule, TokenId, TokenMatrix,
};

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    n: usize,
    k: usize,
    holders: Vec<Vec<usize>>,
}

impl Serialize for TokenMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile {
            n: self.n(),
            k: self.k(),
            holders: self
                .holder_rows()
                .into_iter()
                .map(|row| row.into_iter().map(|t| t.0).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TokenMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = MatrixFile::deserialize(d)?;
        let rows: Vec<Vec<TokenId>> = file
            .holders
            .into_iter()
            .map(|row| row.into_iter().map(TokenId).collect())
            .collect();
        TokenMatrix::from_holders(file.n, file.k, &rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceFile {
    n: usize,
    rounds: Vec<Vec<(usize, usize)>>,
    #[serde(default)]
    extend: Extend,
}

/// Serializes a finite recorded sequence. Generated sequences must be
/// materialized with [`GraphSequence::take`] first.
pub fn sequence_to_json(seq: &GraphSequence) -> Result<String> {
    let len = seq
        .recorded_len()
        .ok_or_else(|| Error::InvalidArgument("cannot serialize an unbounded sequence".into()))?;
    let rounds = (1..=len)
        .map(|r| {
            seq.graph(r)
                .map(|g| g.edges().iter().map(|&(u, v)| (u.0, v.0)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let file = SequenceFile {
        n: seq.n(),
        rounds,
        extend: seq.extend().unwrap_or_default(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn sequence_from_json(s: &str) -> Result<GraphSequence> {
    let file: SequenceFile = serde_json::from_str(s)?;
    let graphs = file
        .rounds
        .into_iter()
        .map(|edges| {
            CommGraph::new(
                file.n,
                edges.into_iter().map(|(u, v)| (NodeId(u), NodeId(v))),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    GraphSequence::recorded(file.n, graphs, file.extend)
}

pub fn matrix_to_json(m: &TokenMatrix) -> Result<String> {
    Ok(serde_json::to_string(m)?)
}

pub fn matrix_from_json(s: &str) -> Result<TokenMatrix> {
    Ok(serde_json::from_str(s)?)
}

pub fn schedule_to_json(s: &Schedule) -> Result<String> {
    Ok(serde_json::to_string(s)?)
}

/// Parses a schedule and pads every round to `n` nodes.
pub fn schedule_from_json(s: &str, n: usize) -> Result<Schedule> {
    let sched: Schedule = serde_json::from_str(s)?;
    sched.padded(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub round: usize,
    pub useful_exchanges: usize,
    pub token_gains: usize,
    pub missing_total: usize,
}

pub fn write_metrics_csv<'a, W: Write>(
    out: W,
    metrics: impl IntoIterator<Item = &'a RoundMetrics>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (i, m) in metrics.into_iter().enumerate() {
        w.serialize(MetricsRow {
            round: i + 1,
            useful_exchanges: m.useful_exchanges,
            token_gains: m.token_gains,
            missing_total: m.missing_total,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize()
        .collect::<std::result::Result<Vec<_>, _>>()?)
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}
