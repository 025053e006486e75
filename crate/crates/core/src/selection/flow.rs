use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Clone, Debug)]
struct Edge {
    to: usize,
    cap: i64,
    cost: i128,
}

/// Min-cost flow by successive shortest paths (Dijkstra with potentials).
///
/// Negative edge costs are allowed as long as the initial graph has no
/// negative cycle.
#[derive(Clone, Debug, Default)]
pub struct MinCostFlow {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl MinCostFlow {
    pub fn new(nodes: usize) -> Self {
        MinCostFlow {
            edges: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    /// Adds a directed edge and returns its handle for [`MinCostFlow::flow_on`].
    pub fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i128) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.adj[from].push(id);
        self.edges.push(Edge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[to].push(id + 1);
        id
    }

    pub fn flow_on(&self, edge: usize) -> i64 {
        self.edges[edge ^ 1].cap
    }

    /// Pushes flow from `s` to `t` while the cheapest augmenting path has
    /// negative cost, which yields the minimum-cost flow of any value.
    /// Returns (flow, cost).
    pub fn min_cost_any_flow(&mut self, s: usize, t: usize) -> (i64, i128) {
        let n = self.adj.len();
        let mut potential = self.bellman_ford(s);
        let (mut flow, mut cost) = (0i64, 0i128);
        loop {
            let mut dist: Vec<Option<i128>> = vec![None; n];
            let mut prev: Vec<Option<usize>> = vec![None; n];
            let mut heap = BinaryHeap::new();
            dist[s] = Some(0);
            heap.push(Reverse((0i128, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if dist[u] != Some(d) {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    let (Some(pu), Some(pv)) = (potential[u], potential[edge.to]) else {
                        continue;
                    };
                    if edge.cap <= 0 {
                        continue;
                    }
                    let nd = d + edge.cost + pu - pv;
                    if dist[edge.to].is_none_or(|old| nd < old) {
                        dist[edge.to] = Some(nd);
                        prev[edge.to] = Some(e);
                        heap.push(Reverse((nd, edge.to)));
                    }
                }
            }
            let Some(dt) = dist[t] else { break };
            let path_cost = dt - potential[s].unwrap_or(0) + potential[t].unwrap_or(0);
            if path_cost >= 0 {
                break;
            }
            for v in 0..n {
                if let (Some(d), Some(p)) = (dist[v], potential[v]) {
                    potential[v] = Some(p + d);
                }
            }
            let mut push = i64::MAX;
            let mut v = t;
            while let Some(e) = prev[v] {
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while let Some(e) = prev[v] {
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
            cost += path_cost * i128::from(push);
        }
        (flow, cost)
    }

    /// Shortest distances from `s` over edges with residual capacity;
    /// `None` for unreachable nodes.
    fn bellman_ford(&self, s: usize) -> Vec<Option<i128>> {
        let n = self.adj.len();
        let mut dist: Vec<Option<i128>> = vec![None; n];
        dist[s] = Some(0);
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                let Some(du) = dist[u] else { continue };
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > 0 && dist[edge.to].is_none_or(|d| du + edge.cost < d) {
                        dist[edge.to] = Some(du + edge.cost);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }
}
