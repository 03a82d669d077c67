//! Reference transportation solver for tests.
//!
//! Successive shortest augmenting paths with Bellman-Ford path search —
//! deliberately unrelated to the scaling solver so the two can check
//! each other. Guarded to small instances.

use super::{check_dims, CostMatrix, Histogram, TransportError, TransportPlan};

const SIZE_LIMIT: usize = 12;

struct Edge {
    to: usize,
    residual: f64,
    cost: i64,
    rev: usize,
}

struct Residual {
    adj: Vec<Vec<Edge>>,
}

impl Residual {
    fn new(n: usize) -> Self {
        Residual { adj: (0..n).map(|_| Vec::new()).collect() }
    }

    fn add(&mut self, from: usize, to: usize, capacity: f64, cost: i64) {
        let rev_a = self.adj[to].len();
        let rev_b = self.adj[from].len();
        self.adj[from].push(Edge { to, residual: capacity, cost, rev: rev_a });
        self.adj[to].push(Edge { to: from, residual: 0.0, cost: -cost, rev: rev_b });
    }
}

/// Exact optimum by successive shortest paths. Independent of
/// [`super::solve_transport`]; intended for problems up to 12x12.
pub fn lp_oracle(
    supplies: &Histogram,
    demands: &Histogram,
    costs: &CostMatrix,
) -> Result<TransportPlan, TransportError> {
    check_dims(supplies, demands, costs)?;
    let (r, c) = (costs.rows(), costs.cols());
    if r > SIZE_LIMIT || c > SIZE_LIMIT {
        return Err(TransportError::SizeGuard { rows: r, cols: c, limit: SIZE_LIMIT });
    }
    let shipped = supplies.total().min(demands.total());
    if shipped == 0.0 {
        return Ok(TransportPlan { flows: Vec::new(), total_cost: 0.0, shipped: 0.0 });
    }

    // Nodes: source, suppliers, consumers, sink. Source-side capacities
    // bound the shipped amount to min of the totals.
    let n = r + c + 2;
    let (source, sink) = (r + c, r + c + 1);
    let mut g = Residual::new(n);
    for i in 0..r {
        g.add(source, i, supplies[i], 0);
    }
    for j in 0..c {
        g.add(r + j, sink, demands[j], 0);
    }
    for i in 0..r {
        for j in 0..c {
            g.add(i, r + j, supplies[i].min(demands[j]), costs.at(i, j));
        }
    }

    let mut remaining = shipped;
    while remaining > 0.0 {
        // Bellman-Ford from the source over residual edges.
        let mut dist = vec![i64::MAX; n];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        dist[source] = 0;
        for _ in 0..n {
            let mut changed = false;
            for v in 0..n {
                if dist[v] == i64::MAX {
                    continue;
                }
                for (ei, e) in g.adj[v].iter().enumerate() {
                    if e.residual > 0.0 && dist[v] + e.cost < dist[e.to] {
                        dist[e.to] = dist[v] + e.cost;
                        prev[e.to] = Some((v, ei));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if dist[sink] == i64::MAX {
            break;
        }
        let mut bottleneck = remaining;
        let mut node = sink;
        while let Some((v, ei)) = prev[node] {
            bottleneck = bottleneck.min(g.adj[v][ei].residual);
            node = v;
        }
        let mut node = sink;
        while let Some((v, ei)) = prev[node] {
            let rev = g.adj[v][ei].rev;
            g.adj[v][ei].residual -= bottleneck;
            let to = g.adj[v][ei].to;
            g.adj[to][rev].residual += bottleneck;
            node = v;
        }
        remaining -= bottleneck;
    }

    let mut flows = Vec::new();
    let mut total_cost = 0.0;
    for i in 0..r {
        for e in &g.adj[i] {
            if e.cost >= 0 && e.to >= r && e.to < r + c {
                let f = g.adj[e.to][e.rev].residual;
                if f > 0.0 {
                    flows.push((i as u32, (e.to - r) as u32, f));
                    total_cost += f * e.cost as f64;
                }
            }
        }
    }
    Ok(TransportPlan { flows, total_cost, shipped })
}

/// Brute-force minimum over every integral unit assignment, for very
/// small integer instances; validates the oracle itself. Unbalanced
/// problems are padded with a zero-cost dummy bin so partial shipping
/// is explored too.
pub fn enumerate_min_cost(supplies: &[i64], demands: &[i64], costs: &CostMatrix) -> i64 {
    fn rec(
        sup: &mut [i64],
        dem: &mut [i64],
        cost_at: &dyn Fn(usize, usize) -> i64,
        remaining: i64,
        acc: i64,
        best: &mut i64,
    ) {
        if acc >= *best {
            return;
        }
        if remaining == 0 {
            *best = acc;
            return;
        }
        let i = (0..sup.len()).find(|&i| sup[i] > 0).expect("supply left");
        for j in 0..dem.len() {
            if dem[j] > 0 {
                sup[i] -= 1;
                dem[j] -= 1;
                rec(sup, dem, cost_at, remaining - 1, acc + cost_at(i, j), best);
                sup[i] += 1;
                dem[j] += 1;
            }
        }
    }

    let total_p: i64 = supplies.iter().sum();
    let total_q: i64 = demands.iter().sum();
    let mut sup = supplies.to_vec();
    let mut dem = demands.to_vec();
    match total_p.cmp(&total_q) {
        std::cmp::Ordering::Greater => dem.push(total_p - total_q),
        std::cmp::Ordering::Less => sup.push(total_q - total_p),
        std::cmp::Ordering::Equal => {}
    }
    let (r, c) = (supplies.len(), demands.len());
    let cost_at = move |i: usize, j: usize| {
        if i >= r || j >= c {
            0
        } else {
            costs.at(i, j)
        }
    };
    let mut best = i64::MAX;
    rec(&mut sup, &mut dem, &cost_at, total_p.max(total_q), 0, &mut best);
    if best == i64::MAX {
        0
    } else {
        best
    }
}
