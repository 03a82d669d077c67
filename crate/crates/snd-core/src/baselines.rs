//! Competing distance measures and non-distance prediction rules.

use crate::netcore::{Network, NetworkState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Count of coordinates where the two states disagree.
pub fn hamming(p: &NetworkState, q: &NetworkState) -> usize {
    assert_eq!(p.len(), q.len(), "states must cover the same nodes");
    p.opinions().iter().zip(q.opinions()).filter(|(a, b)| a != b).count()
}

/// Sum of absolute coordinate differences; on monotone transitions
/// (activations only) this equals the number of changed users.
pub fn l1(p: &NetworkState, q: &NetworkState) -> f64 {
    assert_eq!(p.len(), q.len(), "states must cover the same nodes");
    p.opinions()
        .iter()
        .zip(q.opinions())
        .map(|(a, b)| (f64::from(*a) - f64::from(*b)).abs())
        .sum()
}

/// Laplacian of the symmetrized, unweighted view of a directed network,
/// kept in sparse form. The quadratic form is evaluated as a sum of
/// squared differences over undirected edges, which keeps it
/// nonnegative by construction.
#[derive(Clone, Debug)]
pub struct Laplacian {
    n: usize,
    /// Undirected edges, each pair stored once.
    edges: Vec<(u32, u32)>,
}

impl Laplacian {
    pub fn of(network: &Network) -> Self {
        let mut set = std::collections::HashSet::new();
        for e in network.edges() {
            let (a, b) = if e.src < e.dst { (e.src, e.dst) } else { (e.dst, e.src) };
            set.insert((a, b));
        }
        let mut edges: Vec<(u32, u32)> = set.into_iter().collect();
        edges.sort_unstable();
        Laplacian { n: network.node_count(), edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// `x^T L x = sum over undirected edges of (x_u - x_v)^2`.
    pub fn quadratic(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        self.edges
            .iter()
            .map(|&(a, b)| {
                let d = x[a as usize] - x[b as usize];
                d * d
            })
            .sum()
    }

    /// Dense matrix, for small-instance cross-checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for &(a, b) in &self.edges {
            let (a, b) = (a as usize, b as usize);
            m[a][a] += 1.0;
            m[b][b] += 1.0;
            m[a][b] -= 1.0;
            m[b][a] -= 1.0;
        }
        m
    }
}

/// Quadratic-form distance `sqrt((P-Q)^T L (P-Q))`; tiny negative
/// rounding residue clamps to zero.
pub fn quad_form(p: &NetworkState, q: &NetworkState, laplacian: &Laplacian) -> f64 {
    assert_eq!(p.len(), q.len());
    let diff: Vec<f64> = p
        .opinions()
        .iter()
        .zip(q.opinions())
        .map(|(a, b)| f64::from(*a) - f64::from(*b))
        .collect();
    laplacian.quadratic(&diff).max(0.0).sqrt()
}

/// Contention of each user: own opinion minus the mean opinion of
/// active in-neighbors, zero when there are none.
fn contention(state: &NetworkState, network: &Network) -> Vec<f64> {
    let n = network.node_count();
    let mut cnt = vec![0.0; n];
    for v in 0..n {
        let mut sum = 0.0;
        let mut active = 0usize;
        for &ei in network.in_edge_ids(v) {
            let u = network.edges()[ei as usize].src as usize;
            let o = state.opinion(u);
            if o != 0 {
                sum += f64::from(o);
                active += 1;
            }
        }
        if active > 0 {
            cnt[v] = f64::from(state.opinion(v)) - sum / active as f64;
        }
    }
    cnt
}

/// Mean absolute difference of the two states' contention vectors.
pub fn walk_dist(p: &NetworkState, q: &NetworkState, network: &Network) -> f64 {
    assert_eq!(p.len(), q.len());
    let cp = contention(p, network);
    let cq = contention(q, network);
    let n = network.node_count() as f64;
    cp.iter().zip(&cq).map(|(a, b)| (a - b).abs()).sum::<f64>() / n
}

fn random_sign(rng: &mut impl Rng) -> i8 {
    if rng.gen_bool(0.5) {
        1
    } else {
        -1
    }
}

/// Probabilistic vote over the opinions of active in-neighbors, uniform
/// random when a target has none.
pub fn nhood_voting_predict(
    state: &NetworkState,
    targets: &[u32],
    network: &Network,
    seed: u64,
) -> NetworkState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut opinions = state.opinions().to_vec();
    for &t in targets {
        let v = t as usize;
        let mut pos = 0u32;
        let mut neg = 0u32;
        for &ei in network.in_edge_ids(v) {
            match state.opinion(network.edges()[ei as usize].src as usize) {
                1 => pos += 1,
                -1 => neg += 1,
                _ => {}
            }
        }
        opinions[v] = if pos + neg == 0 {
            random_sign(&mut rng)
        } else if rng.gen_range(0..pos + neg) < pos {
            1
        } else {
            -1
        };
    }
    NetworkState::new(opinions).expect("votes are in the alphabet")
}

/// Community ids from synchronous label propagation on the symmetrized
/// graph: up to `max_rounds` sweeps, majority label with the smallest
/// label breaking ties.
pub fn label_propagation_communities(network: &Network, max_rounds: usize) -> Vec<u32> {
    let n = network.node_count();
    let mut labels: Vec<u32> = (0..n as u32).collect();
    let neighbors: Vec<Vec<u32>> = {
        let mut nb = vec![Vec::new(); n];
        for e in network.edges() {
            nb[e.src as usize].push(e.dst);
            nb[e.dst as usize].push(e.src);
        }
        for list in &mut nb {
            list.sort_unstable();
            list.dedup();
        }
        nb
    };
    let mut counts: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
    for _ in 0..max_rounds {
        let mut next = labels.clone();
        let mut changed = false;
        for v in 0..n {
            if neighbors[v].is_empty() {
                continue;
            }
            counts.clear();
            for &w in &neighbors[v] {
                *counts.entry(labels[w as usize]).or_insert(0) += 1;
            }
            let mut best = labels[v];
            let mut best_count = 0;
            for (&label, &count) in counts.iter() {
                if count > best_count || (count == best_count && label < best) {
                    best = label;
                    best_count = count;
                }
            }
            if best != labels[v] {
                changed = true;
            }
            next[v] = best;
        }
        labels = next;
        if !changed {
            break;
        }
    }
    labels
}

/// Community detection via label propagation, then each target adopts
/// its community's majority known opinion; communities with no known
/// opinion fall back to a uniform random one.
pub fn community_lp_predict(
    state: &NetworkState,
    targets: &[u32],
    network: &Network,
    seed: u64,
) -> NetworkState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = label_propagation_communities(network, 100);
    let target_set: std::collections::HashSet<u32> = targets.iter().copied().collect();
    let mut tally: std::collections::HashMap<u32, (i64, i64)> = std::collections::HashMap::new();
    for v in 0..network.node_count() {
        if target_set.contains(&(v as u32)) {
            continue;
        }
        match state.opinion(v) {
            1 => tally.entry(labels[v]).or_default().0 += 1,
            -1 => tally.entry(labels[v]).or_default().1 += 1,
            _ => {}
        }
    }
    let mut opinions = state.opinions().to_vec();
    for &t in targets {
        let (pos, neg) = tally.get(&labels[t as usize]).copied().unwrap_or((0, 0));
        opinions[t as usize] = match pos.cmp(&neg) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => -1,
            std::cmp::Ordering::Equal => random_sign(&mut rng),
        };
    }
    NetworkState::new(opinions).expect("majority opinions are in the alphabet")
}
