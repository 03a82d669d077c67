//! Social network distance: four local-bank transport terms over the
//! positive and negative opinion parts of two states, in both time
//! directions.
//!
//! Two evaluation paths produce identical values:
//!
//! * the dense path materializes the full ground distance and the bank
//!   extension;
//! * the fast path first cancels the mass shared by both histograms at
//!   each bin and drops empty bins, then computes only the surviving
//!   ground-distance rows (running Dijkstra from whichever side has
//!   fewer distinct bins, over reversed edges when that side consumes)
//!   and solves the reduced flow problem.
//!
//! Masses are rescaled to integers before the solve whenever the inputs
//! are integral, so both paths return bit-identical results.

use crate::grounddist::{
    build_cost_graph, dense_ground_distance, shortest_paths_from, CostGraph, GroundDistError,
    ModelParams, Quantization, Sign,
};
use crate::netcore::{Network, NetworkState};
use crate::transport::{
    emd_star, integral_mass_scale, solve_transport, BankConfig, CostMatrix, Histogram,
    TransportError,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SndError {
    #[error("state has {state} nodes, network has {network}")]
    StateMismatch { state: usize, network: usize },
    #[error("the fast path supports only the per-bin bank policy")]
    FastPathNeedsPerBinBanks,
    #[error(transparent)]
    Ground(#[from] GroundDistError),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

/// Bank layout used by the four transport terms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum BankPolicy {
    /// One bank per bin with a uniform distance; `None` derives the
    /// distance from the network (see [`per_bin_gamma`]). Required by
    /// the fast path.
    PerBin { gamma: Option<i64> },
    /// Explicit clustered banks; dense path only.
    #[serde(skip)]
    Clustered(BankConfig),
}

impl Default for BankPolicy {
    fn default() -> Self {
        BankPolicy::PerBin { gamma: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SndConfig {
    pub model: ModelParams,
    pub quant: Quantization,
    pub bank_policy: BankPolicy,
    /// Compute all four terms (symmetric in the two states); when
    /// false, only the two forward terms grounded in the earlier state
    /// are summed.
    pub symmetric: bool,
    /// Node-count guard for the dense path.
    pub dense_limit: usize,
}

impl Default for SndConfig {
    fn default() -> Self {
        SndConfig {
            model: ModelParams::default(),
            quant: Quantization::default(),
            bank_policy: BankPolicy::default(),
            symmetric: true,
            dense_limit: 4096,
        }
    }
}

/// Uniform per-bin bank distance: the neutral-conductor edge cost
/// scaled by a breadth-first diameter estimate of the undirected view.
///
/// Per-bin clusters make any nonnegative value metric-safe; this choice
/// keeps bank routing on the same scale as real transport paths. The
/// value depends only on the network and configuration, so the dense
/// and fast paths always agree on it.
pub fn per_bin_gamma(network: &Network, config: &SndConfig) -> i64 {
    if let BankPolicy::PerBin { gamma: Some(g) } = config.bank_policy {
        return g;
    }
    let c_neutral = match &config.model {
        ModelParams::Agnostic(p) => f64::from(p.c_neutral),
        _ => 4.0,
    };
    let hops = undirected_diameter_estimate(network).max(1);
    let raw = (config.quant.scale * c_neutral * hops as f64).round() as i64;
    raw.clamp(1, i64::MAX / 4)
}

/// Double-sweep BFS over the undirected view of the network.
fn undirected_diameter_estimate(network: &Network) -> usize {
    let n = network.node_count();
    let bfs = |start: usize| -> (usize, usize) {
        let mut dist = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        let (mut far, mut far_d) = (start, 0);
        while let Some(v) = queue.pop_front() {
            let mut visit = |w: usize| {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            };
            for &ei in network.out_edge_ids(v) {
                visit(network.edges()[ei as usize].dst as usize);
            }
            for &ei in network.in_edge_ids(v) {
                visit(network.edges()[ei as usize].src as usize);
            }
            if dist[v] > far_d {
                far_d = dist[v];
                far = v;
            }
        }
        (far, far_d)
    };
    let (peripheral, _) = bfs(0);
    bfs(peripheral).1
}

/// Reduced transportation problem for one term: shared mass cancelled
/// bin-wise, empty bins dropped, per-bin banks (with capacities taken
/// from the lighter histogram's *original* masses) appended on the
/// lighter side.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    /// Surviving supply bins as (original bin id, mass).
    pub suppliers: Vec<(u32, f64)>,
    /// Surviving demand bins as (original bin id, mass).
    pub consumers: Vec<(u32, f64)>,
    /// Bank bins as (attachment bin id, capacity).
    pub banks: Vec<(u32, f64)>,
    /// Banks belong to the supply side when it is the lighter one.
    pub banks_on_supply_side: bool,
    /// Number of bins whose mass differs between the histograms.
    pub n_delta: usize,
}

/// Apply the two reduction steps to a supply/demand histogram pair.
pub fn reduce(supplies: &Histogram, demands: &Histogram) -> ReducedProblem {
    assert_eq!(supplies.len(), demands.len());
    let n = supplies.len();
    let total_p = supplies.total();
    let total_q = demands.total();
    let mismatch = (total_p - total_q).abs();
    let banks_on_supply_side = total_p <= total_q;

    let mut suppliers = Vec::new();
    let mut consumers = Vec::new();
    let mut n_delta = 0;
    for i in 0..n {
        let (p, q) = (supplies[i], demands[i]);
        if p == q {
            continue;
        }
        n_delta += 1;
        let m = p.min(q);
        if p - m > 0.0 {
            suppliers.push((i as u32, p - m));
        }
        if q - m > 0.0 {
            consumers.push((i as u32, q - m));
        }
    }

    let mut banks = Vec::new();
    if mismatch > 0.0 {
        let lighter = if banks_on_supply_side { supplies } else { demands };
        let lighter_total = lighter.total();
        if lighter_total > 0.0 {
            for i in 0..n {
                if lighter[i] > 0.0 {
                    banks.push((i as u32, mismatch * lighter[i] / lighter_total));
                }
            }
        } else {
            for i in 0..n {
                banks.push((i as u32, mismatch / n as f64));
            }
        }
    }
    ReducedProblem { suppliers, consumers, banks, banks_on_supply_side, n_delta }
}

/// One local-bank term evaluated through the reduction. Exactly equals
/// the dense evaluation over the same cost graph and per-bin banks.
fn fast_term(graph: &CostGraph, supplies: &Histogram, demands: &Histogram, gamma: i64) -> Result<f64, SndError> {
    if supplies == demands {
        return Ok(0.0);
    }
    let n = graph.node_count();
    let red = reduce(supplies, demands);
    let scale = integral_mass_scale(supplies, demands, n, 1);

    // Masses are pre-multiplied by the scale; bank capacities are built
    // as exact products on the integral path, matching the dense
    // evaluation bit for bit.
    let lighter = if red.banks_on_supply_side { supplies } else { demands };
    let lighter_total = lighter.total();
    let mismatch = (supplies.total() - demands.total()).abs();
    let scaled_bank = |bin: u32, truth: f64| -> f64 {
        if scale == 1.0 {
            truth
        } else if lighter_total > 0.0 {
            mismatch * lighter[bin as usize]
        } else {
            mismatch
        }
    };

    // Rows are suppliers (bins, then banks when the supply side is
    // lighter); columns the same on the demand side.
    let mut row_bins: Vec<(u32, f64, bool)> =
        red.suppliers.iter().map(|&(i, m)| (i, m * scale, false)).collect();
    let mut col_bins: Vec<(u32, f64, bool)> =
        red.consumers.iter().map(|&(i, m)| (i, m * scale, false)).collect();
    if red.banks_on_supply_side {
        row_bins.extend(red.banks.iter().map(|&(i, m)| (i, scaled_bank(i, m), true)));
    } else {
        col_bins.extend(red.banks.iter().map(|&(i, m)| (i, scaled_bank(i, m), true)));
    }

    let distinct = |bins: &[(u32, f64, bool)]| {
        let mut ids: Vec<u32> = bins.iter().map(|b| b.0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    };
    let row_ids = distinct(&row_bins);
    let col_ids = distinct(&col_bins);

    // Dijkstra runs from the bank-free side, which holds at most
    // n_delta distinct bins: forward from suppliers when banks consume,
    // over reversed edges from consumers when banks supply (distances
    // here run *into* the consumer). Without banks either side works;
    // take the smaller.
    use rayon::prelude::*;
    let rows_from_suppliers = if red.banks.is_empty() {
        row_ids.len() <= col_ids.len()
    } else {
        !red.banks_on_supply_side
    };
    let dist_rows: std::collections::HashMap<u32, Vec<i64>> = if rows_from_suppliers {
        row_ids
            .par_iter()
            .map(|&s| (s, shortest_paths_from(graph, s as usize)))
            .collect()
    } else {
        let reversed = graph.reversed();
        col_ids
            .par_iter()
            .map(|&c| (c, shortest_paths_from(&reversed, c as usize)))
            .collect()
    };
    let dist = |s: u32, c: u32| -> i64 {
        if rows_from_suppliers {
            dist_rows[&s][c as usize]
        } else {
            dist_rows[&c][s as usize]
        }
    };

    let mut costs = Vec::with_capacity(row_bins.len() * col_bins.len());
    for &(s, _, s_bank) in &row_bins {
        for &(c, _, c_bank) in &col_bins {
            let mut d = dist(s, c);
            if s_bank {
                d += gamma;
            }
            if c_bank {
                d += gamma;
            }
            costs.push(d);
        }
    }
    let costs = CostMatrix::new(row_bins.len(), col_bins.len(), costs)?;
    let p = Histogram::new(row_bins.iter().map(|b| b.1).collect())?;
    let q = Histogram::new(col_bins.iter().map(|b| b.1).collect())?;
    let plan = solve_transport(&p, &q, &costs)?;
    Ok(plan.total_cost / scale)
}

/// Dense evaluation of one term: full ground distance plus per-bin (or
/// clustered) bank extension.
fn dense_term(
    graph: &CostGraph,
    supplies: &Histogram,
    demands: &Histogram,
    config: &SndConfig,
    gamma: i64,
) -> Result<f64, SndError> {
    let dense = dense_ground_distance(graph, config.dense_limit)?;
    let bank_config = match &config.bank_policy {
        BankPolicy::PerBin { .. } => BankConfig::per_bin(graph.node_count(), gamma),
        BankPolicy::Clustered(cfg) => cfg.clone(),
    };
    Ok(emd_star(supplies, demands, &dense.to_cost_matrix(), &bank_config)?)
}

struct Term {
    ground_state: usize, // 0 => g1, 1 => g2
    sign: Sign,
    forward: bool, // supplies from g1 when true
}

const TERMS: [Term; 4] = [
    Term { ground_state: 0, sign: Sign::Pos, forward: true },
    Term { ground_state: 0, sign: Sign::Neg, forward: true },
    Term { ground_state: 1, sign: Sign::Pos, forward: false },
    Term { ground_state: 1, sign: Sign::Neg, forward: false },
];

fn check_states(g1: &NetworkState, g2: &NetworkState, network: &Network) -> Result<(), SndError> {
    for s in [g1, g2] {
        if s.len() != network.node_count() {
            return Err(SndError::StateMismatch { state: s.len(), network: network.node_count() });
        }
    }
    Ok(())
}

fn assemble(
    g1: &NetworkState,
    g2: &NetworkState,
    network: &Network,
    config: &SndConfig,
    term_eval: impl Fn(&Term, &CostGraph) -> Result<f64, SndError> + Sync,
) -> Result<f64, SndError> {
    check_states(g1, g2, network)?;
    let states = [g1, g2];
    let active: &[Term] = if config.symmetric { &TERMS } else { &TERMS[..2] };
    use rayon::prelude::*;
    let values: Result<Vec<f64>, SndError> = active
        .par_iter()
        .map(|term| {
            let graph = build_cost_graph(
                network,
                states[term.ground_state],
                term.sign,
                &config.model,
                &config.quant,
            )?;
            term_eval(term, &graph)
        })
        .collect();
    // Swapping the states permutes the four term values; summing in
    // sorted order keeps the symmetric mode exactly symmetric.
    let mut values = values?;
    values.sort_by(f64::total_cmp);
    let sum: f64 = values.iter().sum();
    Ok(if config.symmetric { 0.5 * sum } else { sum })
}

fn term_histograms(
    term: &Term,
    g1: &NetworkState,
    g2: &NetworkState,
) -> (Histogram, Histogram) {
    let (from, to) = if term.forward { (g1, g2) } else { (g2, g1) };
    match term.sign {
        Sign::Pos => (from.positive_part(), to.positive_part()),
        Sign::Neg => (from.negative_part(), to.negative_part()),
    }
}

/// Social network distance via the dense path.
pub fn snd(
    g1: &NetworkState,
    g2: &NetworkState,
    network: &Network,
    config: &SndConfig,
) -> Result<f64, SndError> {
    let gamma = per_bin_gamma(network, config);
    assemble(g1, g2, network, config, |term, graph| {
        let (p, q) = term_histograms(term, g1, g2);
        dense_term(graph, &p, &q, config, gamma)
    })
}

/// Social network distance via the reduction; exactly equals [`snd`].
pub fn fast_snd(
    g1: &NetworkState,
    g2: &NetworkState,
    network: &Network,
    config: &SndConfig,
) -> Result<f64, SndError> {
    if !matches!(config.bank_policy, BankPolicy::PerBin { .. }) {
        return Err(SndError::FastPathNeedsPerBinBanks);
    }
    let gamma = per_bin_gamma(network, config);
    assemble(g1, g2, network, config, |term, graph| {
        let (p, q) = term_histograms(term, g1, g2);
        fast_term(graph, &p, &q, gamma)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::Edge;
    use rand::{Rng, SeedableRng};

    fn ring(n: usize) -> Network {
        let mut edges = Vec::new();
        for v in 0..n as u32 {
            edges.push(Edge::plain(v, (v + 1) % n as u32));
            edges.push(Edge::plain((v + 1) % n as u32, v));
        }
        // Double edges collapse to duplicates for n == 2.
        edges.sort_by_key(|e| (e.src, e.dst));
        edges.dedup_by_key(|e| (e.src, e.dst));
        Network::new(n, edges, None).unwrap()
    }

    fn random_state(n: usize, rng: &mut impl Rng) -> NetworkState {
        NetworkState::new((0..n).map(|_| rng.gen_range(-1..=1)).collect()).unwrap()
    }

    #[test]
    fn identical_states_have_zero_distance() {
        let net = ring(6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let s = random_state(6, &mut rng);
        let cfg = SndConfig::default();
        assert_eq!(snd(&s, &s, &net, &cfg).unwrap(), 0.0);
        assert_eq!(fast_snd(&s, &s, &net, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_mode_is_symmetric() {
        let net = ring(8);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let cfg = SndConfig::default();
        for _ in 0..10 {
            let a = random_state(8, &mut rng);
            let b = random_state(8, &mut rng);
            let ab = fast_snd(&a, &b, &net, &cfg).unwrap();
            let ba = fast_snd(&b, &a, &net, &cfg).unwrap();
            assert_eq!(ab, ba);
        }
    }

    #[test]
    fn reduce_cancels_shared_mass() {
        let p = Histogram::new(vec![1.0, 0.0, 1.0]).unwrap();
        let q = Histogram::new(vec![1.0, 1.0, 0.0]).unwrap();
        let red = reduce(&p, &q);
        assert_eq!(red.suppliers, vec![(2, 1.0)]);
        assert_eq!(red.consumers, vec![(1, 1.0)]);
        assert_eq!(red.n_delta, 2);
        // Equal totals: no banks.
        assert!(red.banks.is_empty());
    }

    #[test]
    fn reduce_of_equal_histograms_is_empty() {
        let p = Histogram::new(vec![1.0, 2.0]).unwrap();
        let red = reduce(&p, &p);
        assert!(red.suppliers.is_empty() && red.consumers.is_empty() && red.banks.is_empty());
        assert_eq!(red.n_delta, 0);
    }

    #[test]
    fn reduce_banks_follow_lighter_side() {
        let p = Histogram::new(vec![1.0, 1.0, 0.0]).unwrap();
        let q = Histogram::new(vec![1.0, 1.0, 4.0]).unwrap();
        let red = reduce(&p, &q);
        assert!(red.banks_on_supply_side);
        // Mismatch 4 split over the lighter histogram's two massive
        // bins proportionally.
        assert_eq!(red.banks, vec![(0, 2.0), (1, 2.0)]);
    }

    #[test]
    fn fast_matches_dense_on_random_states() {
        let net = ring(10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let cfg = SndConfig::default();
        for _ in 0..20 {
            let a = random_state(10, &mut rng);
            let b = random_state(10, &mut rng);
            let dense = snd(&a, &b, &net, &cfg).unwrap();
            let fast = fast_snd(&a, &b, &net, &cfg).unwrap();
            assert_eq!(dense, fast, "a={:?} b={:?}", a.opinions(), b.opinions());
        }
    }

    #[test]
    fn asymmetric_mode_uses_two_terms() {
        let net = ring(6);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let a = random_state(6, &mut rng);
        let b = random_state(6, &mut rng);
        let cfg = SndConfig { symmetric: false, ..SndConfig::default() };
        let v = fast_snd(&a, &b, &net, &cfg).unwrap();
        assert!(v >= 0.0);
        assert_eq!(v, snd(&a, &b, &net, &cfg).unwrap());
    }

    #[test]
    fn fast_path_rejects_clustered_banks() {
        let net = ring(4);
        let s = NetworkState::neutral(4);
        let cfg = SndConfig {
            bank_policy: BankPolicy::Clustered(BankConfig::per_bin(4, 5)),
            ..SndConfig::default()
        };
        assert!(matches!(
            fast_snd(&s, &s, &net, &cfg),
            Err(SndError::FastPathNeedsPerBinBanks)
        ));
    }

    #[test]
    fn state_mismatch_is_reported() {
        let net = ring(4);
        let s3 = NetworkState::neutral(3);
        let s4 = NetworkState::neutral(4);
        assert!(matches!(
            snd(&s3, &s4, &net, &SndConfig::default()),
            Err(SndError::StateMismatch { .. })
        ));
    }
}
