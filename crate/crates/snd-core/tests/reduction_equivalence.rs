//! The reduced fast path must reproduce the dense evaluation exactly,
//! for every ground-distance model, and the reduction itself must
//! preserve the local-bank distance.

mod common;

use common::fig_scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snd_core::grounddist::{IccParams, LtcParams, ModelAgnosticParams, ModelParams};
use snd_core::netcore::{Edge, Network, NetworkState};
use snd_core::simgen::gen_scale_free;
use snd_core::snd::{fast_snd, snd, SndConfig};

fn random_network(n: usize, extra_edges: usize, rng: &mut impl Rng) -> Network {
    // Random connected-ish directed graph: a ring plus random arcs.
    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for v in 0..n as u32 {
        let w = (v + 1) % n as u32;
        if seen.insert((v, w)) {
            edges.push(Edge::plain(v, w));
        }
    }
    for _ in 0..extra_edges {
        let a = rng.gen_range(0..n as u32);
        let b = rng.gen_range(0..n as u32);
        if a != b && seen.insert((a, b)) {
            edges.push(Edge::plain(a, b));
        }
    }
    Network::new(n, edges, None).unwrap()
}

fn random_state(n: usize, rng: &mut impl Rng) -> NetworkState {
    NetworkState::new((0..n).map(|_| rng.gen_range(-1..=1)).collect()).unwrap()
}

fn models() -> Vec<ModelParams> {
    vec![
        ModelParams::Agnostic(ModelAgnosticParams::default()),
        ModelParams::Icc(IccParams::default()),
        ModelParams::Ltc(LtcParams::default()),
    ]
}

#[test]
fn fast_equals_dense_across_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for model in models() {
        let config = SndConfig { model, ..SndConfig::default() };
        for case in 0..25 {
            let n = rng.gen_range(8..=30);
            let network = random_network(n, 2 * n, &mut rng);
            let a = random_state(n, &mut rng);
            let b = random_state(n, &mut rng);
            let dense = snd(&a, &b, &network, &config).unwrap();
            let fast = fast_snd(&a, &b, &network, &config).unwrap();
            assert_eq!(dense, fast, "model {:?} case {case}", config.model);
        }
    }
}

#[test]
fn fast_equals_dense_on_scale_free_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let config = SndConfig::default();
    let network = gen_scale_free(60, -2.5, 17);
    for _ in 0..10 {
        let a = random_state(60, &mut rng);
        let b = random_state(60, &mut rng);
        assert_eq!(
            snd(&a, &b, &network, &config).unwrap(),
            fast_snd(&a, &b, &network, &config).unwrap()
        );
    }
}

#[test]
fn fast_equals_dense_on_sparse_changes() {
    // The intended regime: few users change between adjacent states.
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let network = gen_scale_free(50, -2.3, 3);
    let config = SndConfig::default();
    for _ in 0..10 {
        let a = random_state(50, &mut rng);
        let mut ops = a.opinions().to_vec();
        for _ in 0..rng.gen_range(1..=4) {
            let v = rng.gen_range(0..50);
            ops[v] = rng.gen_range(-1..=1);
        }
        let b = NetworkState::new(ops).unwrap();
        assert_eq!(
            snd(&a, &b, &network, &config).unwrap(),
            fast_snd(&a, &b, &network, &config).unwrap()
        );
    }
}

#[test]
fn asymmetric_mode_agrees_too() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let config = SndConfig { symmetric: false, ..SndConfig::default() };
    let network = random_network(20, 50, &mut rng);
    for _ in 0..10 {
        let a = random_state(20, &mut rng);
        let b = random_state(20, &mut rng);
        assert_eq!(
            snd(&a, &b, &network, &config).unwrap(),
            fast_snd(&a, &b, &network, &config).unwrap()
        );
    }
}

#[test]
fn distance_prefers_bridge_spillover() {
    // The end-to-end distance keeps the location sensitivity seen at
    // the transport layer.
    let (network, g1, g2, g3) = fig_scenario();
    let config = SndConfig::default();
    let near = fast_snd(&g1, &g2, &network, &config).unwrap();
    let far = fast_snd(&g1, &g3, &network, &config).unwrap();
    assert!(near < far, "{near} vs {far}");
}

#[test]
fn degenerate_sides_are_handled() {
    // One histogram side empty per sign exercises the uniform bank
    // fallback and the empty-supplier path.
    let network = gen_scale_free(30, -2.5, 5);
    let config = SndConfig::default();
    let neutral = NetworkState::neutral(30);
    let mut some = vec![0i8; 30];
    some[3] = 1;
    some[7] = -1;
    some[11] = 1;
    let active = NetworkState::new(some).unwrap();
    let dense = snd(&neutral, &active, &network, &config).unwrap();
    let fast = fast_snd(&neutral, &active, &network, &config).unwrap();
    assert_eq!(dense, fast);
    assert!(dense > 0.0);
}
