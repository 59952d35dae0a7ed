//! Discrete optimal transport between two token mass distributions.

/// Mass below this is treated as exhausted.
const EPS: f64 = 1e-12;

struct Edge {
    to: usize,
    rev: usize,
    cap: f64,
    cost: f64,
}

struct Graph {
    adj: Vec<Vec<Edge>>,
}

impl Graph {
    fn new(n: usize) -> Self {
        Self {
            adj: (0..n).map(|_| Vec::new()).collect(),
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) {
        let rev_from = self.adj[to].len();
        let rev_to = self.adj[from].len();
        self.adj[from].push(Edge {
            to,
            rev: rev_from,
            cap,
            cost,
        });
        self.adj[to].push(Edge {
            to: from,
            rev: rev_to,
            cap: 0.0,
            cost: -cost,
        });
    }
}

fn check(a: &[f64], b: &[f64], cost: &[Vec<f64>]) {
    assert!(!a.is_empty() && !b.is_empty(), "both distributions need support");
    assert_eq!(cost.len(), a.len(), "cost rows must match the source distribution");
    assert!(cost.iter().all(|r| r.len() == b.len()), "cost columns must match the target");
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    assert!((sa - sb).abs() < 1e-9, "masses differ: {sa} vs {sb}");
}

/// Minimum total cost of moving mass `a` onto mass `b` with unit costs
/// `cost[i][j]`. Both distributions must carry the same total mass and all
/// costs must be non-negative.
///
/// Solved as a min-cost flow by successive shortest paths, using Dijkstra
/// with node potentials on the dense residual graph.
pub fn exact_cost(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    check(a, b, cost);
    let (n, m) = (a.len(), b.len());
    let (src, sink) = (0, n + m + 1);
    let nodes = n + m + 2;
    let mut g = Graph::new(nodes);
    for (i, &ai) in a.iter().enumerate() {
        g.add(src, 1 + i, ai, 0.0);
        for (j, &c) in cost[i].iter().enumerate() {
            debug_assert!(c >= 0.0, "negative cost");
            g.add(1 + i, 1 + n + j, f64::INFINITY, c);
        }
    }
    for (j, &bj) in b.iter().enumerate() {
        g.add(1 + n + j, sink, bj, 0.0);
    }

    let total: f64 = a.iter().sum();
    let mut pushed = 0.0;
    let mut result = 0.0;
    let mut potential = vec![0.0f64; nodes];
    while total - pushed > EPS {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut done = vec![false; nodes];
        dist[src] = 0.0;
        loop {
            let mut u = usize::MAX;
            for v in 0..nodes {
                if !done[v] && dist[v].is_finite() && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for (k, e) in g.adj[u].iter().enumerate() {
                if e.cap <= EPS {
                    continue;
                }
                // reduced costs are non-negative up to rounding
                let reduced = (e.cost + potential[u] - potential[e.to]).max(0.0);
                let nd = dist[u] + reduced;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    prev[e.to] = Some((u, k));
                }
            }
        }
        if !dist[sink].is_finite() {
            break;
        }
        for v in 0..nodes {
            if dist[v].is_finite() {
                potential[v] += dist[v];
            }
        }
        let mut flow = total - pushed;
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            flow = flow.min(g.adj[u][k].cap);
            v = u;
        }
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            let rev = g.adj[u][k].rev;
            g.adj[u][k].cap -= flow;
            g.adj[v][rev].cap += flow;
            result += flow * g.adj[u][k].cost;
            v = u;
        }
        pushed += flow;
    }
    result
}

/// Relaxed transport cost: each side ships all of its mass to its nearest
/// counterpart, ignoring the other side's capacities, and the larger of the
/// two directional costs is returned. Never exceeds [`exact_cost`].
pub fn relaxed_cost(a: &[f64], b: &[f64], cost: &[Vec<f64>]) -> f64 {
    check(a, b, cost);
    let forward: f64 = a
        .iter()
        .zip(cost)
        .map(|(ai, row)| ai * row.iter().copied().fold(f64::INFINITY, f64::min))
        .sum();
    let backward: f64 = b
        .iter()
        .enumerate()
        .map(|(j, bj)| bj * cost.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min))
        .sum();
    forward.max(backward)
}
