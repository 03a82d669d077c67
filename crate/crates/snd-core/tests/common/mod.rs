//! Shared helpers for the integration suites.

use rand::Rng;
use snd_core::netcore::{Edge, Network, NetworkState};
use snd_core::transport::{CostMatrix, Histogram};

pub fn histogram(masses: &[f64]) -> Histogram {
    Histogram::new(masses.to_vec()).unwrap()
}

/// Random integer-mass histogram with entries in `[0, max_mass]`.
pub fn random_histogram(n: usize, max_mass: i64, rng: &mut impl Rng) -> Histogram {
    Histogram::new((0..n).map(|_| rng.gen_range(0..=max_mass) as f64).collect()).unwrap()
}

/// Random metric ground distance: symmetric positive integers run
/// through a min-plus closure, so the triangle inequality holds by
/// construction and off-diagonal entries stay >= 1.
pub fn random_metric(n: usize, max_cost: i64, rng: &mut impl Rng) -> CostMatrix {
    let mut d = vec![0i64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(1..=max_cost);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i * n + k] + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    CostMatrix::new(n, n, d).unwrap()
}

/// Two dense 10-node communities joined by three bridge edges, with all
/// edges in both directions.
pub fn two_cluster_network() -> Network {
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for base in [0u32, 10] {
        // Ring plus skip chords keeps intra-cluster distances short.
        for i in 0..10 {
            pairs.push((base + i, base + (i + 1) % 10));
            pairs.push((base + i, base + (i + 2) % 10));
        }
    }
    pairs.extend([(0, 10), (1, 11), (2, 12)]);
    let mut edges = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (a, b) in pairs {
        if seen.insert((a, b)) {
            edges.push(Edge::plain(a, b));
        }
        if seen.insert((b, a)) {
            edges.push(Edge::plain(b, a));
        }
    }
    Network::new(20, edges, None).unwrap()
}

/// The three-state scenario over [`two_cluster_network`]: a base state
/// with mass only in the first community, one evolution that spills
/// across the bridges, and one that plants the same mass deep in the
/// second community.
pub fn fig_scenario() -> (Network, NetworkState, NetworkState, NetworkState) {
    let network = two_cluster_network();
    let mut base = vec![0i8; 20];
    for v in [0usize, 1, 2, 3, 4] {
        base[v] = 1;
    }
    let g1 = NetworkState::new(base.clone()).unwrap();
    // Spill-over: new mass right behind the bridge endpoints.
    let mut spread = base.clone();
    for v in [10usize, 11, 12] {
        spread[v] = 1;
    }
    let g2 = NetworkState::new(spread).unwrap();
    // Same amount of mass, placed at the far side of the second
    // community.
    let mut planted = base;
    for v in [15usize, 16, 17] {
        planted[v] = 1;
    }
    let g3 = NetworkState::new(planted).unwrap();
    (network, g1, g2, g3)
}
