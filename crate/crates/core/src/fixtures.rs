//! Small hand-built instances shared by tests and benches.

use crate::evolution::{EvoVertex, SteinerTree};
use crate::model::{
    Broadcast, BroadcastVector, CommGraph, Extend, GraphSequence, NodeId, Schedule, TokenId,
    TokenMatrix,
};

/// Five nodes A..E (ids 0..4), one token t starting at B.
///
/// Round 1 runs on the path A-B-C-D-E and only B sends t, reaching A and C.
/// Round 2 runs on the star centred at C; A, B and C send t and D, E hear it
/// from C. Only the adjacencies that matter to the example are fixed; the
/// remaining edges are the fewest that keep each round connected.
pub struct TwoRoundExample {
    pub sequence: GraphSequence,
    pub init: TokenMatrix,
    pub schedule: Schedule,
}

pub fn two_round_example() -> TwoRoundExample {
    let n = 5;
    let t = Broadcast::Token(TokenId(0));
    let e = Broadcast::Empty;
    let round1 = CommGraph::path(n);
    let round2 = CommGraph::star(n, NodeId(2));
    TwoRoundExample {
        sequence: GraphSequence::recorded(n, vec![round1, round2], Extend::Error)
            .expect("fixture graphs are connected"),
        init: TokenMatrix::from_holders(n, 1, &[vec![], vec![TokenId(0)], vec![], vec![], vec![]])
            .expect("fixture matrix is in range"),
        schedule: Schedule {
            rounds: vec![
                BroadcastVector::from_vec(vec![e, t, e, e, e]),
                BroadcastVector::from_vec(vec![t, t, t, e, e]),
            ],
        },
    }
}

/// The tree with every selection edge of the example spelled out,
/// including the ones of A and B in round 2 whose broadcasts bring nothing new.
pub fn two_round_example_full_tree() -> SteinerTree {
    let v = EvoVertex::new;
    let (a, b, c, d, e) = (0, 1, 2, 3, 4);
    let mut edges = vec![
        (v(b, 0), v(b, 2)),
        (v(b, 0), v(b, 1)),
        (v(b, 1), v(a, 2)),
        (v(b, 1), v(c, 2)),
        (v(a, 2), v(a, 4)),
        (v(b, 2), v(b, 4)),
        (v(c, 2), v(c, 4)),
        (v(a, 2), v(a, 3)),
        (v(b, 2), v(b, 3)),
        (v(c, 2), v(c, 3)),
        (v(c, 3), v(d, 4)),
        (v(c, 3), v(e, 4)),
    ];
    edges.sort();
    SteinerTree {
        token: TokenId(0),
        root: v(b, 0),
        edges,
        terminals: (0..5).map(|x| v(x, 4)).collect(),
    }
}
