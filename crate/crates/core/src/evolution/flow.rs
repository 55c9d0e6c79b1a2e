//! Dinic's blocking-flow max-flow on integer capacities.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
struct Arc {
    to: usize,
    residual: u64,
}

/// Directed network. Edge `e` is stored as arcs `2e` (forward) and
/// `2e + 1` (reverse).
#[derive(Clone, Debug, Default)]
pub struct FlowNetwork {
    arcs: Vec<Arc>,
    capacity: Vec<u64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNetwork {
    pub fn new(vertices: usize) -> Self {
        FlowNetwork {
            arcs: Vec::new(),
            capacity: Vec::new(),
            adj: vec![Vec::new(); vertices],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.capacity.len()
    }

    /// Adds `from -> to` and returns its edge id.
    pub fn add_edge(&mut self, from: usize, to: usize, capacity: u64) -> usize {
        let id = self.capacity.len();
        self.adj[from].push(self.arcs.len());
        self.arcs.push(Arc {
            to,
            residual: capacity,
        });
        self.adj[to].push(self.arcs.len());
        self.arcs.push(Arc {
            to: from,
            residual: 0,
        });
        self.capacity.push(capacity);
        id
    }

    /// Flow currently on edge `e`.
    pub fn flow(&self, e: usize) -> u64 {
        self.capacity[e] - self.arcs[2 * e].residual
    }

    fn levels(&self, s: usize, t: usize) -> Option<Vec<usize>> {
        let mut level = vec![usize::MAX; self.adj.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.residual > 0 && level[arc.to] == usize::MAX {
                    level[arc.to] = level[u] + 1;
                    queue.push_back(arc.to);
                }
            }
        }
        (level[t] != usize::MAX).then_some(level)
    }

    // Iterative DFS for one augmenting path in the level graph; `next`
    // holds the current-arc pointers.
    fn push_path(&mut self, s: usize, t: usize, level: &[usize], next: &mut [usize]) -> u64 {
        let mut stack: Vec<usize> = Vec::new(); // arcs on the current path
        let mut u = s;
        loop {
            if u == t {
                let bottleneck = stack
                    .iter()
                    .map(|&a| self.arcs[a].residual)
                    .min()
                    .unwrap_or(0);
                for &a in &stack {
                    self.arcs[a].residual -= bottleneck;
                    self.arcs[a ^ 1].residual += bottleneck;
                }
                return bottleneck;
            }
            let mut advanced = false;
            while next[u] < self.adj[u].len() {
                let a = self.adj[u][next[u]];
                let arc = &self.arcs[a];
                if arc.residual > 0 && level[arc.to] == level[u] + 1 {
                    stack.push(a);
                    u = arc.to;
                    advanced = true;
                    break;
                }
                next[u] += 1;
            }
            if !advanced {
                // Dead end: retreat and skip the arc that led here.
                match stack.pop() {
                    None => return 0,
                    Some(a) => {
                        u = self.arcs[a ^ 1].to;
                        next[u] += 1;
                    }
                }
            }
        }
    }

    /// Augments to a maximum `s`-`t` flow and returns the added value.
    pub fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        if s == t {
            return 0;
        }
        let mut total = 0;
        while let Some(level) = self.levels(s, t) {
            let mut next = vec![0; self.adj.len()];
            loop {
                let pushed = self.push_path(s, t, &level, &mut next);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
        total
    }

    /// Vertices reachable from `s` in the residual network. After
    /// [`FlowNetwork::max_flow`] this is the source side of a minimum cut.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.adj[u] {
                let arc = &self.arcs[a];
                if arc.residual > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let mut g = FlowNetwork::new(2);
        g.add_edge(0, 1, 7);
        assert_eq!(g.max_flow(0, 1), 7);
    }

    #[test]
    fn two_disjoint_unit_paths() {
        let mut g = FlowNetwork::new(4);
        g.add_edge(0, 1, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(2, 3, 1);
        assert_eq!(g.max_flow(0, 3), 2);
    }

    #[test]
    fn needs_a_reverse_arc() {
        // Greedy 0-1-2-3 blocks; the optimum reroutes through the back arc.
        let mut g = FlowNetwork::new(4);
        g.add_edge(0, 1, 1);
        g.add_edge(0, 2, 1);
        g.add_edge(1, 2, 1);
        g.add_edge(1, 3, 1);
        g.add_edge(2, 3, 1);
        assert_eq!(g.max_flow(0, 3), 2);
    }

    #[test]
    fn textbook_network() {
        let mut g = FlowNetwork::new(6);
        for (u, v, c) in [
            (0, 1, 16),
            (0, 2, 13),
            (1, 2, 10),
            (2, 1, 4),
            (1, 3, 12),
            (3, 2, 9),
            (2, 4, 14),
            (4, 3, 7),
            (3, 5, 20),
            (4, 5, 4),
        ] {
            g.add_edge(u, v, c);
        }
        assert_eq!(g.max_flow(0, 5), 23);
    }

    #[test]
    fn disconnected_sink() {
        let mut g = FlowNetwork::new(3);
        g.add_edge(0, 1, 5);
        assert_eq!(g.max_flow(0, 2), 0);
        assert_eq!(g.residual_reachable(0), vec![true, true, false]);
    }
}
