//! Synthetic scale-free networks and opinion-evolution generators.
//!
//! Everything is deterministic under a fixed seed.

use crate::netcore::{Edge, NetError, Network, NetworkState, StateSeries};
use crate::grounddist::IccParams;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SimParams {
    pub n: usize,
    /// Scale-free exponent, supported in [-2.9, -2.1].
    pub sf_exponent: f64,
    /// Probability that a sampled neutral user adopts from neighbors.
    pub p_nbr: f64,
    /// Probability of adopting a random opinion instead.
    pub p_ext: f64,
    pub initial_adopters: usize,
    /// Number of evolution steps; the series has `steps + 1` states.
    pub steps: usize,
    /// Fraction of neutral users sampled for a chance to activate.
    pub activation_fraction: f64,
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            n: 1000,
            sf_exponent: -2.5,
            p_nbr: 0.12,
            p_ext: 0.01,
            initial_adopters: 50,
            steps: 20,
            activation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), NetError> {
        if self.n < 10 {
            return Err(NetError::Validation("need at least 10 nodes".into()));
        }
        if !(-2.9..=-2.1).contains(&self.sf_exponent) {
            return Err(NetError::Validation(format!(
                "scale-free exponent {} outside the supported range [-2.9, -2.1]",
                self.sf_exponent
            )));
        }
        for (name, p) in [
            ("p_nbr", self.p_nbr),
            ("p_ext", self.p_ext),
            ("activation_fraction", self.activation_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(NetError::Validation(format!("{name}={p} outside [0, 1]")));
            }
        }
        if self.p_nbr + self.p_ext > 1.0 {
            return Err(NetError::Validation("p_nbr + p_ext must be at most 1".into()));
        }
        if self.initial_adopters > self.n {
            return Err(NetError::Validation("more initial adopters than nodes".into()));
        }
        Ok(())
    }
}

/// Scale-free directed network: a power-law degree sequence wired
/// through configuration-model stub pairing, self-loops and multi-edges
/// discarded, each surviving pair kept in both directions.
pub fn gen_scale_free(n: usize, exponent: f64, seed: u64) -> Network {
    assert!(n >= 10, "generator needs n >= 10");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k_min = 2usize;
    let k_max = (2.0 * (n as f64).sqrt()) as usize + 10;
    let k_max = k_max.min(n - 1);

    // Inverse-CDF sampling over k^exponent.
    let weights: Vec<f64> = (k_min..=k_max).map(|k| (k as f64).powf(exponent)).collect();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cumulative.push(acc);
    }
    let total = acc;
    let mut degrees: Vec<usize> = (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            let idx = cumulative.partition_point(|&c| c < u);
            k_min + idx.min(weights.len() - 1)
        })
        .collect();
    if degrees.iter().sum::<usize>() % 2 == 1 {
        degrees[rng.gen_range(0..n)] += 1;
    }

    let mut stubs: Vec<u32> = Vec::with_capacity(degrees.iter().sum());
    for (v, &d) in degrees.iter().enumerate() {
        stubs.extend(std::iter::repeat(v as u32).take(d));
    }
    stubs.shuffle(&mut rng);

    let mut seen = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for pair in stubs.chunks_exact(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            continue;
        }
        let key = (a.min(b), a.max(b));
        if seen.insert(key) {
            edges.push(Edge::plain(a, b));
            edges.push(Edge::plain(b, a));
        }
    }
    Network::new(n, edges, None).expect("generated edges are valid")
}

/// Uniformly chosen initial adopters with a fair-coin opinion split.
pub fn initial_state(network: &Network, adopters: usize, rng: &mut impl Rng) -> NetworkState {
    let n = network.node_count();
    let mut ids: Vec<usize> = (0..n).collect();
    let (chosen, _) = ids.partial_shuffle(rng, adopters);
    let mut opinions = vec![0i8; n];
    for &v in chosen.iter() {
        opinions[v] = if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    NetworkState::new(opinions).expect("coin flips are in the alphabet")
}

/// [`initial_state`] with its own seeded generator.
pub fn initial_state_seeded(network: &Network, adopters: usize, seed: u64) -> NetworkState {
    initial_state(network, adopters, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// One evolution step: active users persist; a sampled fraction of
/// neutral users adopt from neighbors with probability `p_nbr`
/// (probabilistic vote over active in-neighbor counts), a uniform
/// random opinion with probability `p_ext`, and otherwise stay neutral.
pub fn evolve_state(
    network: &Network,
    state: &NetworkState,
    p_nbr: f64,
    p_ext: f64,
    activation_fraction: f64,
    rng: &mut impl Rng,
) -> NetworkState {
    let mut neutrals: Vec<usize> =
        (0..network.node_count()).filter(|&v| !state.is_active(v)).collect();
    let chances = ((neutrals.len() as f64) * activation_fraction).round() as usize;
    let chances = chances.min(neutrals.len());
    let (sampled, _) = neutrals.partial_shuffle(rng, chances);

    let mut opinions = state.opinions().to_vec();
    for &v in sampled.iter() {
        let r = rng.gen::<f64>();
        if r < p_nbr {
            let mut pos = 0u32;
            let mut neg = 0u32;
            for &ei in network.in_edge_ids(v) {
                match state.opinion(network.edges()[ei as usize].src as usize) {
                    1 => pos += 1,
                    -1 => neg += 1,
                    _ => {}
                }
            }
            if pos + neg > 0 {
                opinions[v] = if rng.gen_range(0..pos + neg) < pos { 1 } else { -1 };
            }
        } else if r < p_nbr + p_ext {
            opinions[v] = if rng.gen_bool(0.5) { 1 } else { -1 };
        }
    }
    NetworkState::new(opinions).expect("evolved opinions are in the alphabet")
}

/// Per-step probability override used to inject anomalous transitions.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepOverride {
    /// Transition index: overrides the step producing state `step + 1`.
    pub step: usize,
    pub p_nbr: f64,
    pub p_ext: f64,
}

/// Generate a network and an evolved state series in one go.
pub fn gen_series(
    params: &SimParams,
    overrides: &[StepOverride],
) -> Result<(Network, StateSeries), NetError> {
    params.validate()?;
    let network = gen_scale_free(params.n, params.sf_exponent, params.seed);
    let series = gen_series_on(&network, params, overrides)?;
    Ok((network, series))
}

/// Evolve a series over an existing network.
pub fn gen_series_on(
    network: &Network,
    params: &SimParams,
    overrides: &[StepOverride],
) -> Result<StateSeries, NetError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(1));
    let mut states = vec![initial_state(network, params.initial_adopters, &mut rng)];
    for step in 0..params.steps {
        let (p_nbr, p_ext) = overrides
            .iter()
            .find(|o| o.step == step)
            .map_or((params.p_nbr, params.p_ext), |o| (o.p_nbr, o.p_ext));
        let next = evolve_state(
            network,
            states.last().expect("nonempty"),
            p_nbr,
            p_ext,
            params.activation_fraction,
            &mut rng,
        );
        states.push(next);
    }
    StateSeries::from_states(states)
}

/// One competitive-cascade round: every active node fires each outgoing
/// edge to a neutral target with the edge's activation probability;
/// targets fired on by several nodes adopt from the nearest (smallest
/// edge distance), ties resolved by an activation-probability-weighted
/// vote.
pub fn icc_step(
    network: &Network,
    state: &NetworkState,
    params: &IccParams,
    seed: u64,
) -> NetworkState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut opinions = state.opinions().to_vec();
    for v in 0..network.node_count() {
        if state.is_active(v) {
            continue;
        }
        // Firing in-edges from active nodes, in edge-id order.
        let mut best_d = f64::INFINITY;
        let mut pos_weight = 0.0;
        let mut neg_weight = 0.0;
        for &ei in network.in_edge_ids(v) {
            let e = &network.edges()[ei as usize];
            let u = e.src as usize;
            if !state.is_active(u) {
                continue;
            }
            let p = e.p.unwrap_or(params.default_p);
            if !rng.gen_bool(p.clamp(0.0, 1.0)) {
                continue;
            }
            let d = e.d.unwrap_or(params.default_d);
            if d < best_d {
                best_d = d;
                pos_weight = 0.0;
                neg_weight = 0.0;
            }
            if d == best_d {
                if state.opinion(u) == 1 {
                    pos_weight += p;
                } else {
                    neg_weight += p;
                }
            }
        }
        if pos_weight + neg_weight > 0.0 {
            let r = rng.gen::<f64>() * (pos_weight + neg_weight);
            opinions[v] = if r < pos_weight { 1 } else { -1 };
        }
    }
    NetworkState::new(opinions).expect("cascade opinions are in the alphabet")
}

/// Activate `k` uniformly chosen neutral users with uniform random
/// opinions.
pub fn random_transition(
    network: &Network,
    state: &NetworkState,
    k: usize,
    seed: u64,
) -> Result<NetworkState, NetError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut neutrals: Vec<usize> =
        (0..network.node_count()).filter(|&v| !state.is_active(v)).collect();
    if k > neutrals.len() {
        return Err(NetError::Validation(format!(
            "cannot activate {k} users, only {} are neutral",
            neutrals.len()
        )));
    }
    let (chosen, _) = neutrals.partial_shuffle(&mut rng, k);
    let mut opinions = state.opinions().to_vec();
    for &v in chosen.iter() {
        opinions[v] = if rng.gen_bool(0.5) { 1 } else { -1 };
    }
    NetworkState::new(opinions).map_err(|e| NetError::Validation(e.to_string()))
}
