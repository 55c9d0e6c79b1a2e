use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{NodeId, TokenMatrix};

const FREE: usize = usize::MAX;

/// Maximum bipartite matching (Hopcroft-Karp). `adj[l]` lists the right
/// vertices adjacent to left vertex `l`; returns the partner of every left
/// vertex.
pub fn hopcroft_karp(right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let left = adj.len();
    let mut match_l = vec![FREE; left];
    let mut match_r = vec![FREE; right];
    let mut dist = vec![0usize; left];

    loop {
        // Layer the free left vertices.
        let mut queue = VecDeque::new();
        for l in 0..left {
            if match_l[l] == FREE {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let m = match_r[r];
                if m == FREE {
                    found = true;
                } else if dist[m] == usize::MAX {
                    dist[m] = dist[l] + 1;
                    queue.push_back(m);
                }
            }
        }
        if !found {
            break;
        }
        for l in 0..left {
            if match_l[l] == FREE {
                augment(l, adj, &mut match_l, &mut match_r, &mut dist);
            }
        }
    }
    match_l
        .into_iter()
        .map(|r| (r != FREE).then_some(r))
        .collect()
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &r in &adj[l] {
        let m = match_r[r];
        if m == FREE || (dist[m] == dist[l] + 1 && augment(m, adj, match_l, match_r, dist)) {
            match_l[l] = r;
            match_r[r] = l;
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}

/// Maps every node `v` of the single-token distribution to a distinct node
/// `u` whose tokens in `rich` include all of `v`'s tokens in `single`.
/// Returns `None` when no perfect matching exists.
pub fn matching_reduction(single: &TokenMatrix, rich: &TokenMatrix) -> Result<Option<Vec<NodeId>>> {
    if single.n() != rich.n() || single.k() != rich.k() {
        return Err(Error::DimensionMismatch(format!(
            "single is {}x{}, rich is {}x{}",
            single.n(),
            single.k(),
            rich.n(),
            rich.k()
        )));
    }
    for v in single.nodes() {
        if single.held_count(v) > 1 {
            return Err(Error::Precondition(format!(
                "node {v} starts with more than one token"
            )));
        }
    }
    for t in single.tokens() {
        if single.holder_count(t) != 1 {
            return Err(Error::Precondition(format!(
                "token {t} does not start at exactly one node"
            )));
        }
    }

    let n = single.n();
    let adj: Vec<Vec<usize>> = single
        .nodes()
        .map(|v| {
            rich.nodes()
                .filter(|&u| rich.row_contains(u, single, v))
                .map(|u| u.0)
                .collect()
        })
        .collect();
    let matched = hopcroft_karp(n, &adj);
    Ok(matched
        .into_iter()
        .map(|r| r.map(NodeId))
        .collect::<Option<Vec<_>>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{new_distribution, DistributionSpec, TokenId};

    #[test]
    fn classic_instance() {
        // Left 0 and 1 both only like right 0; maximum matching has size 2 of 3.
        let adj = vec![vec![0], vec![0, 1], vec![0]];
        let m = hopcroft_karp(2, &adj);
        assert_eq!(m.iter().flatten().count(), 2);
    }

    #[test]
    fn single_node_without_tokens() {
        let single = TokenMatrix::empty(1, 0);
        let m = matching_reduction(&single, &TokenMatrix::empty(1, 0)).unwrap();
        assert_eq!(m, Some(vec![NodeId(0)]));
    }

    #[test]
    fn full_rich_matrix_always_matches() {
        let single = new_distribution(6, 4, &DistributionSpec::OneTokenPerNode, 2).unwrap();
        let m = matching_reduction(&single, &TokenMatrix::full(6, 4))
            .unwrap()
            .unwrap();
        let mut seen = m.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 6);
    }

    #[test]
    fn impossible_instance() {
        // Token 0 at node 0 in `single`; nobody holds it in `rich`.
        let single = TokenMatrix::from_holders(2, 1, &[vec![TokenId(0)], vec![]]).unwrap();
        let rich = TokenMatrix::empty(2, 1);
        assert_eq!(matching_reduction(&single, &rich).unwrap(), None);
    }

    #[test]
    fn rejects_multi_token_nodes() {
        let single =
            TokenMatrix::from_holders(2, 2, &[vec![TokenId(0), TokenId(1)], vec![]]).unwrap();
        assert!(matches!(
            matching_reduction(&single, &TokenMatrix::full(2, 2)),
            Err(Error::Precondition(_))
        ));
    }
}
