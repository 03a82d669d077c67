//! Opinion-dependent transport costs and shortest-path ground distances.
//!
//! Each directed edge gets a cost `round(scale * (comm penalty +
//! adoption penalty + spreading penalty))`, clamped to `[1, cap]`, so
//! every cost is a bounded positive integer. The spreading penalty is
//! `-log` of a model probability; probabilities of exactly zero are
//! replaced by the model's epsilon before taking the log, because two
//! states must always be a finite distance apart.
//!
//! Ground distances are shortest-path lengths over the cost graph:
//! dense all-pairs for small graphs, or per-source rows for the reduced
//! fast path.

use crate::netcore::{Network, NetworkState};
use crate::transport::CostMatrix;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GroundDistError {
    #[error("invalid model parameters: {0}")]
    BadParams(String),
    #[error("state covers {state} nodes but the network has {network}")]
    StateMismatch { state: usize, network: usize },
    #[error("dense ground distance needs n <= {limit}, got {n}")]
    DenseGuard { n: usize, limit: usize },
}

/// Which opinion's propagation costs are being built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }

    pub fn opposite(self) -> i8 {
        -self.value()
    }
}

/// Fallback epsilon for zero probabilities in model-agnostic penalties
/// (communication or adoption attributes equal to zero).
pub const ZERO_PROB_EPSILON: f64 = 1e-6;

/// Constant spreading penalties for adverse / neutral / friendly
/// conductors, ordered `friendly < neutral < adverse`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ModelAgnosticParams {
    pub c_adverse: u32,
    pub c_neutral: u32,
    pub c_friendly: u32,
    /// Apply `-log` of the communication frequency when present.
    pub use_comm: bool,
    /// Apply `-log` of the adoption probability when present.
    pub use_adoption: bool,
}

impl Default for ModelAgnosticParams {
    fn default() -> Self {
        // One adverse hop costs more than a long friendly detour.
        ModelAgnosticParams {
            c_adverse: 16,
            c_neutral: 4,
            c_friendly: 1,
            use_comm: true,
            use_adoption: true,
        }
    }
}

impl ModelAgnosticParams {
    fn validate(&self) -> Result<(), GroundDistError> {
        if self.c_friendly == 0 || !(self.c_friendly < self.c_neutral && self.c_neutral < self.c_adverse)
        {
            return Err(GroundDistError::BadParams(format!(
                "penalties must satisfy 0 < friendly < neutral < adverse, got {} {} {}",
                self.c_friendly, self.c_neutral, self.c_adverse
            )));
        }
        Ok(())
    }
}

/// Competition-aware cascade parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct IccParams {
    pub epsilon: f64,
    /// Activation probability used when an edge has no `p`.
    pub default_p: f64,
    /// Edge distance used when an edge has no `d`.
    pub default_d: f64,
}

impl Default for IccParams {
    fn default() -> Self {
        IccParams { epsilon: 1e-6, default_p: 0.5, default_d: 1.0 }
    }
}

impl IccParams {
    fn validate(&self) -> Result<(), GroundDistError> {
        if !(self.epsilon > 0.0 && self.epsilon <= self.default_p && self.default_p <= 1.0) {
            return Err(GroundDistError::BadParams(format!(
                "need 0 < epsilon <= default_p <= 1, got {} and {}",
                self.epsilon, self.default_p
            )));
        }
        if self.default_d <= 0.0 {
            return Err(GroundDistError::BadParams("default_d must be positive".into()));
        }
        Ok(())
    }
}

/// Competition-aware threshold-model parameters.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LtcParams {
    pub epsilon: f64,
    /// Influence weight used when an edge has no `w`; `None` means
    /// `1 / in-degree` of the target.
    pub default_w: Option<f64>,
    /// Threshold used when the network carries none.
    pub default_theta: f64,
}

impl Default for LtcParams {
    fn default() -> Self {
        LtcParams { epsilon: 1e-6, default_w: None, default_theta: 0.5 }
    }
}

impl LtcParams {
    fn validate(&self) -> Result<(), GroundDistError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(GroundDistError::BadParams("epsilon must lie in (0, 1)".into()));
        }
        if self.default_w.is_some_and(|w| w < 0.0) || self.default_theta < 0.0 {
            return Err(GroundDistError::BadParams("weights must be >= 0".into()));
        }
        Ok(())
    }
}

/// Opinion-spreading model for the ground distance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelParams {
    Agnostic(ModelAgnosticParams),
    Icc(IccParams),
    Ltc(LtcParams),
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::Agnostic(ModelAgnosticParams::default())
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), GroundDistError> {
        match self {
            ModelParams::Agnostic(p) => p.validate(),
            ModelParams::Icc(p) => p.validate(),
            ModelParams::Ltc(p) => p.validate(),
        }
    }

    fn epsilon(&self) -> f64 {
        match self {
            ModelParams::Agnostic(_) => ZERO_PROB_EPSILON,
            ModelParams::Icc(p) => p.epsilon,
            ModelParams::Ltc(p) => p.epsilon,
        }
    }
}

/// Integer quantization of `-log` penalties.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Quantization {
    /// Multiplier applied before rounding; 100 gives resolution 0.01.
    pub scale: f64,
    /// Upper bound on a single edge cost.
    pub cost_cap: i64,
}

impl Default for Quantization {
    fn default() -> Self {
        Quantization { scale: 100.0, cost_cap: 1_000_000 }
    }
}

impl Quantization {
    pub fn validate(&self) -> Result<(), GroundDistError> {
        if !(self.scale > 0.0) || self.cost_cap < 1 {
            return Err(GroundDistError::BadParams(
                "quantization needs scale > 0 and cost_cap >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Round half-up and clamp into `[1, cost_cap]`.
    pub fn quantize(&self, neg_log_sum: f64) -> i64 {
        let raw = (self.scale * neg_log_sum).round();
        (raw as i64).clamp(1, self.cost_cap)
    }
}

fn neg_log(p: f64, epsilon: f64) -> f64 {
    if p > 0.0 {
        -p.ln()
    } else {
        -epsilon.ln()
    }
}

/// Directed graph with quantized integer costs, frozen for one (state,
/// opinion) pair.
#[derive(Clone, Debug)]
pub struct CostGraph {
    n: usize,
    op: Sign,
    cost_cap: i64,
    offsets: Vec<u32>,
    targets: Vec<u32>,
    costs: Vec<i64>,
}

impl CostGraph {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn op(&self) -> Sign {
        self.op
    }

    /// Distance stored for unreachable pairs: no real path exceeds it.
    pub fn sentinel(&self) -> i64 {
        (self.n as i64 - 1).max(1) * self.cost_cap
    }

    pub fn edge_costs(&self, v: usize) -> impl Iterator<Item = (u32, i64)> + '_ {
        let lo = self.offsets[v] as usize;
        let hi = self.offsets[v + 1] as usize;
        self.targets[lo..hi].iter().copied().zip(self.costs[lo..hi].iter().copied())
    }

    /// Same costs with every edge flipped; used to compute distances
    /// *into* a set of targets with forward Dijkstra runs.
    pub fn reversed(&self) -> CostGraph {
        let mut counts = vec![0u32; self.n + 1];
        for &t in &self.targets {
            counts[t as usize + 1] += 1;
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut slots = counts.clone();
        let mut targets = vec![0u32; self.targets.len()];
        let mut costs = vec![0i64; self.costs.len()];
        for v in 0..self.n {
            for (t, c) in self.edge_costs(v) {
                let pos = slots[t as usize] as usize;
                targets[pos] = v as u32;
                costs[pos] = c;
                slots[t as usize] += 1;
            }
        }
        CostGraph {
            n: self.n,
            op: self.op,
            cost_cap: self.cost_cap,
            offsets: counts,
            targets,
            costs,
        }
    }
}

fn state_check(network: &Network, state: &NetworkState) -> Result<(), GroundDistError> {
    if state.len() != network.node_count() {
        return Err(GroundDistError::StateMismatch {
            state: state.len(),
            network: network.node_count(),
        });
    }
    Ok(())
}

/// Per-node view of the cascade model's active set: the distance from
/// the nearest active node and the total activation probability over
/// active in-neighbors attaining that distance.
#[derive(Clone, Debug)]
pub struct IccActivation {
    /// Shortest distance from any active node, `f64::INFINITY` when no
    /// active node reaches the target.
    pub nearest_active: Vec<f64>,
    /// Sum of activation probabilities over active in-neighbor edges
    /// whose source attains the nearest-active distance.
    pub p_active: Vec<f64>,
    /// Per network edge: source is active and attains the target's
    /// nearest-active distance.
    attains: Vec<bool>,
}

impl IccActivation {
    pub fn edge_attains(&self, edge_idx: usize) -> bool {
        self.attains[edge_idx]
    }
}

/// Multi-source shortest distances from the active set over the cascade
/// edge distances, plus the attaining in-neighbor structure.
///
/// A source `u` attains the minimum at `v` exactly when `v` is
/// reachable from `u` through tight edges (`dist[x] + d == dist[y]`),
/// which is propagated as bitsets over the active sources in distance
/// order.
pub fn icc_nearest_active(
    network: &Network,
    state: &NetworkState,
    params: &IccParams,
) -> Result<IccActivation, GroundDistError> {
    params.validate()?;
    state_check(network, state)?;
    let n = network.node_count();
    let edge_d = |idx: usize| network.edges()[idx].d.unwrap_or(params.default_d);

    let sources: Vec<usize> = (0..n).filter(|&v| state.is_active(v)).collect();
    let mut source_slot = vec![usize::MAX; n];
    for (k, &s) in sources.iter().enumerate() {
        source_slot[s] = k;
    }

    let mut dist = vec![f64::INFINITY; n];
    let mut heap: BinaryHeap<Reverse<(ordered::F64, u32)>> = BinaryHeap::new();
    for &s in &sources {
        dist[s] = 0.0;
        heap.push(Reverse((ordered::F64(0.0), s as u32)));
    }
    while let Some(Reverse((ordered::F64(d), v))) = heap.pop() {
        let v = v as usize;
        if d > dist[v] {
            continue;
        }
        for &ei in network.out_edge_ids(v) {
            let e = &network.edges()[ei as usize];
            let nd = d + edge_d(ei as usize);
            if nd < dist[e.dst as usize] {
                dist[e.dst as usize] = nd;
                heap.push(Reverse((ordered::F64(nd), e.dst)));
            }
        }
    }

    // Which sources attain dist[v]: union over tight in-edges, seeded
    // at the sources themselves, processed in distance order.
    let words = sources.len().div_ceil(64).max(1);
    let mut reach = vec![0u64; n * words];
    for (k, &s) in sources.iter().enumerate() {
        reach[s * words + k / 64] |= 1 << (k % 64);
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| dist[v].is_finite()).collect();
    order.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
    for &v in &order {
        if dist[v] == 0.0 {
            continue; // active nodes attain only themselves
        }
        for &ei in network.in_edge_ids(v) {
            let e = &network.edges()[ei as usize];
            let u = e.src as usize;
            if dist[u].is_finite() && dist[u] + edge_d(ei as usize) == dist[v] {
                for w in 0..words {
                    let bits = reach[u * words + w];
                    reach[v * words + w] |= bits;
                }
            }
        }
    }

    let mut p_active = vec![0.0; n];
    let mut attains = vec![false; network.edges().len()];
    for (idx, e) in network.edges().iter().enumerate() {
        let u = e.src as usize;
        let v = e.dst as usize;
        let slot = source_slot[u];
        if slot == usize::MAX {
            continue;
        }
        if reach[v * words + slot / 64] >> (slot % 64) & 1 == 1 {
            attains[idx] = true;
            p_active[v] += e.p.unwrap_or(params.default_p);
        }
    }
    Ok(IccActivation { nearest_active: dist, p_active, attains })
}

mod ordered {
    /// Total-ordered f64 for the heap; distances are never NaN.
    #[derive(Clone, Copy, PartialEq)]
    pub struct F64(pub f64);
    impl Eq for F64 {}
    impl PartialOrd for F64 {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for F64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.total_cmp(&other.0)
        }
    }
}

/// Build the cost graph for spreading opinion `op` through the network
/// frozen in `state`.
pub fn build_cost_graph(
    network: &Network,
    state: &NetworkState,
    op: Sign,
    model: &ModelParams,
    quant: &Quantization,
) -> Result<CostGraph, GroundDistError> {
    model.validate()?;
    quant.validate()?;
    state_check(network, state)?;
    let n = network.node_count();
    let eps = model.epsilon();

    let icc_ctx = match model {
        ModelParams::Icc(p) => Some(icc_nearest_active(network, state, p)?),
        _ => None,
    };
    // Threshold model: influence mass of active in-neighbors per node.
    let ltc_omega: Option<Vec<f64>> = match model {
        ModelParams::Ltc(p) => {
            let mut omega = vec![0.0; n];
            for v in 0..n {
                for &ei in network.in_edge_ids(v) {
                    let e = &network.edges()[ei as usize];
                    if state.is_active(e.src as usize) {
                        omega[v] += ltc_weight(network, e, p);
                    }
                }
            }
            Some(omega)
        }
        _ => None,
    };

    let mut edge_cost = vec![0i64; network.edges().len()];
    for (idx, e) in network.edges().iter().enumerate() {
        let u = e.src as usize;
        let v = e.dst as usize;
        let comm_pen = match e.comm {
            Some(c) => neg_log(c, eps),
            None => 1.0, // plain connectivity penalty
        };
        let adopt_pen = match e.adopt {
            Some(a) => neg_log(a, eps),
            None => 0.0, // non-stubborn users
        };
        let spread_pen = match model {
            ModelParams::Agnostic(p) => {
                let gu = state.opinion(u);
                let gv = state.opinion(v);
                if gu == op.opposite() || gv == op.opposite() {
                    f64::from(p.c_adverse)
                } else if gu == 0 {
                    f64::from(p.c_neutral)
                } else {
                    f64::from(p.c_friendly)
                }
            }
            ModelParams::Icc(p) => {
                let ctx = icc_ctx.as_ref().expect("icc context");
                let gu = state.opinion(u);
                let gv = state.opinion(v);
                let prob = if gu == op.value() {
                    if !ctx.edge_attains(idx) {
                        0.0
                    } else if gv == op.value() {
                        1.0
                    } else if gv == 0 {
                        let num = (e.p.unwrap_or(p.default_p) - p.epsilon).max(0.0);
                        if num > 0.0 {
                            num / ctx.p_active[v]
                        } else {
                            0.0
                        }
                    } else {
                        p.epsilon
                    }
                } else {
                    p.epsilon
                };
                neg_log(prob, p.epsilon)
            }
            ModelParams::Ltc(p) => {
                let omega = ltc_omega.as_ref().expect("ltc context")[v];
                let theta = network
                    .thresholds()
                    .map(|t| t[v])
                    .unwrap_or(p.default_theta);
                let gu = state.opinion(u);
                let gv = state.opinion(v);
                let prob = if gu == 0 {
                    0.0 // u is not an active in-neighbor
                } else if gu == op.value() && gv == op.value() {
                    1.0
                } else if gu == op.value() && gv == 0 && omega >= theta {
                    (1.0 - p.epsilon) * ltc_weight(network, e, p) / omega
                } else {
                    p.epsilon
                };
                neg_log(prob, p.epsilon)
            }
        };
        let mut comm = comm_pen;
        let mut adopt = adopt_pen;
        if let ModelParams::Agnostic(p) = model {
            if !p.use_comm {
                comm = 1.0;
            }
            if !p.use_adoption {
                adopt = 0.0;
            }
        }
        edge_cost[idx] = quant.quantize(comm + adopt + spread_pen);
    }

    let mut offsets = vec![0u32; n + 1];
    for e in network.edges() {
        offsets[e.src as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut slots = offsets.clone();
    let mut targets = vec![0u32; network.edges().len()];
    let mut costs = vec![0i64; network.edges().len()];
    for (idx, e) in network.edges().iter().enumerate() {
        let pos = slots[e.src as usize] as usize;
        targets[pos] = e.dst;
        costs[pos] = edge_cost[idx];
        slots[e.src as usize] += 1;
    }
    Ok(CostGraph { n, op, cost_cap: quant.cost_cap, offsets, targets, costs })
}

fn ltc_weight(network: &Network, e: &crate::netcore::Edge, p: &LtcParams) -> f64 {
    e.w.or(p.default_w)
        .unwrap_or_else(|| 1.0 / network.in_degree(e.dst as usize).max(1) as f64)
}

/// Exact single-source shortest paths; unreachable nodes get the
/// sentinel. Binary-heap Dijkstra with ties broken by node id.
pub fn shortest_paths_from(graph: &CostGraph, source: usize) -> Vec<i64> {
    let n = graph.node_count();
    let sentinel = graph.sentinel();
    let mut dist = vec![i64::MAX; n];
    let mut heap: BinaryHeap<Reverse<(i64, u32)>> = BinaryHeap::new();
    dist[source] = 0;
    heap.push(Reverse((0, source as u32)));
    while let Some(Reverse((d, v))) = heap.pop() {
        let v = v as usize;
        if d > dist[v] {
            continue;
        }
        for (t, c) in graph.edge_costs(v) {
            let nd = d + c;
            if nd < dist[t as usize] {
                dist[t as usize] = nd;
                heap.push(Reverse((nd, t)));
            }
        }
    }
    for d in &mut dist {
        if *d == i64::MAX {
            *d = sentinel;
        }
    }
    dist
}

/// Dense all-pairs ground distance.
#[derive(Clone, Debug)]
pub struct DenseGroundDistance {
    n: usize,
    data: Vec<i64>,
}

impl DenseGroundDistance {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_cost_matrix(&self) -> CostMatrix {
        CostMatrix::new(self.n, self.n, self.data.clone()).expect("distances are nonnegative")
    }
}

/// All-pairs distances via one Dijkstra per source, guarded against
/// accidentally materializing huge matrices.
pub fn dense_ground_distance(
    graph: &CostGraph,
    limit: usize,
) -> Result<DenseGroundDistance, GroundDistError> {
    let n = graph.node_count();
    if n > limit {
        return Err(GroundDistError::DenseGuard { n, limit });
    }
    use rayon::prelude::*;
    let rows: Vec<Vec<i64>> = (0..n).into_par_iter().map(|s| shortest_paths_from(graph, s)).collect();
    let mut data = Vec::with_capacity(n * n);
    for row in rows {
        data.extend(row);
    }
    Ok(DenseGroundDistance { n, data })
}

/// Ground distance as either a materialized matrix or a per-row oracle
/// over the cost graph.
pub enum GroundDistance {
    Dense(DenseGroundDistance),
    Lazy(CostGraph),
}

impl GroundDistance {
    pub fn row(&self, source: usize) -> std::borrow::Cow<'_, [i64]> {
        match self {
            GroundDistance::Dense(d) => std::borrow::Cow::Borrowed(d.row(source)),
            GroundDistance::Lazy(g) => std::borrow::Cow::Owned(shortest_paths_from(g, source)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netcore::Edge;

    fn state(ops: &[i8]) -> NetworkState {
        NetworkState::new(ops.to_vec()).unwrap()
    }

    fn default_quant() -> Quantization {
        Quantization::default()
    }

    fn cost_of(net: &Network, st: &NetworkState, op: Sign, src: u32, dst: u32) -> i64 {
        let cg = build_cost_graph(
            net,
            st,
            op,
            &ModelParams::Agnostic(ModelAgnosticParams::default()),
            &default_quant(),
        )
        .unwrap();
        let cost = cg.edge_costs(src as usize).find(|&(t, _)| t == dst).map(|(_, c)| c);
        cost.unwrap()
    }

    #[test]
    fn agnostic_case_split() {
        let net = Network::new(2, vec![Edge::plain(0, 1)], None).unwrap();
        // Friendly conductor, neutral target: comm 1 + friendly 1.
        assert_eq!(cost_of(&net, &state(&[1, 0]), Sign::Pos, 0, 1), 200);
        // Adverse target forces the adverse penalty.
        assert_eq!(cost_of(&net, &state(&[1, -1]), Sign::Pos, 0, 1), 1700);
        // Adverse conductor.
        assert_eq!(cost_of(&net, &state(&[-1, 0]), Sign::Pos, 0, 1), 1700);
        // Neutral conductor.
        assert_eq!(cost_of(&net, &state(&[0, 0]), Sign::Pos, 0, 1), 500);
        // Friendly towards the negative opinion mirrors the split.
        assert_eq!(cost_of(&net, &state(&[-1, 0]), Sign::Neg, 0, 1), 200);
    }

    #[test]
    fn comm_and_adoption_penalties_add_up() {
        let mut e = Edge::plain(0, 1);
        e.comm = Some(0.5);
        e.adopt = Some(0.25);
        let net = Network::new(2, vec![e], None).unwrap();
        let c = cost_of(&net, &state(&[1, 0]), Sign::Pos, 0, 1);
        // -ln(0.5) + -ln(0.25) + 1, scaled by 100 and rounded.
        let expect = (100.0 * (0.5f64.ln().abs() + 0.25f64.ln().abs() + 1.0)).round() as i64;
        assert_eq!(c, expect);
    }

    #[test]
    fn costs_clamp_into_bounds() {
        let q = Quantization { scale: 100.0, cost_cap: 300 };
        assert_eq!(q.quantize(0.0), 1);
        assert_eq!(q.quantize(1e9), 300);
        assert_eq!(q.quantize(2.345), 235);
    }

    #[test]
    fn icc_distances_from_single_seed() {
        // 0 -> 1 -> 2 with unit distances, node 0 active.
        let net =
            Network::new(3, vec![Edge::plain(0, 1), Edge::plain(1, 2)], None).unwrap();
        let act =
            icc_nearest_active(&net, &state(&[1, 0, 0]), &IccParams::default()).unwrap();
        assert_eq!(act.nearest_active, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn icc_empty_active_set() {
        let net = Network::new(2, vec![Edge::plain(0, 1)], None).unwrap();
        let act = icc_nearest_active(&net, &state(&[0, 0]), &IccParams::default()).unwrap();
        assert!(act.nearest_active.iter().all(|d| d.is_infinite()));
        assert_eq!(act.p_active, vec![0.0, 0.0]);
    }

    #[test]
    fn icc_ties_sum_probabilities() {
        // Two equidistant active in-neighbors of node 2.
        let mut e0 = Edge::plain(0, 2);
        e0.p = Some(0.3);
        e0.d = Some(1.0);
        let mut e1 = Edge::plain(1, 2);
        e1.p = Some(0.4);
        e1.d = Some(1.0);
        let net = Network::new(3, vec![e0, e1], None).unwrap();
        let act =
            icc_nearest_active(&net, &state(&[1, -1, 0]), &IccParams::default()).unwrap();
        assert!((act.p_active[2] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn icc_far_active_source_is_cut_off() {
        // 0 and 1 both active; 1 sits next to 2, 0 is farther via its
        // direct edge, so 0 does not attain the minimum at 2.
        let mut e0 = Edge::plain(0, 2);
        e0.d = Some(5.0);
        e0.p = Some(0.9);
        let mut e1 = Edge::plain(1, 2);
        e1.d = Some(1.0);
        e1.p = Some(0.4);
        let net = Network::new(3, vec![e0, e1], None).unwrap();
        let act =
            icc_nearest_active(&net, &state(&[1, 1, 0]), &IccParams::default()).unwrap();
        assert_eq!(act.nearest_active[2], 1.0);
        assert!(!act.edge_attains(0));
        assert!(act.edge_attains(1));
        assert!((act.p_active[2] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn dijkstra_on_a_chain() {
        let net = Network::new(3, vec![Edge::plain(0, 1), Edge::plain(1, 2)], None).unwrap();
        let quant = Quantization { scale: 1.0, cost_cap: 10 };
        let cg = build_cost_graph(
            &net,
            &state(&[1, 1, 1]),
            Sign::Pos,
            &ModelParams::Agnostic(ModelAgnosticParams::default()),
            &quant,
        )
        .unwrap();
        // Each edge costs 1 + 1 = 2 at scale 1.
        assert_eq!(shortest_paths_from(&cg, 0), vec![0, 2, 4]);
        // Node 0 is unreachable from 2.
        let d = shortest_paths_from(&cg, 2);
        assert_eq!(d[0], cg.sentinel());
    }

    #[test]
    fn reversed_graph_flips_reachability() {
        let net = Network::new(2, vec![Edge::plain(0, 1)], None).unwrap();
        let cg = build_cost_graph(
            &net,
            &state(&[0, 0]),
            Sign::Pos,
            &ModelParams::default(),
            &default_quant(),
        )
        .unwrap();
        let rev = cg.reversed();
        let d = shortest_paths_from(&rev, 1);
        assert!(d[0] < cg.sentinel());
        assert_eq!(shortest_paths_from(&rev, 0)[1], cg.sentinel());
    }

    #[test]
    fn dense_distance_guard() {
        let net = Network::new(3, vec![Edge::plain(0, 1)], None).unwrap();
        let cg = build_cost_graph(
            &net,
            &state(&[0, 0, 0]),
            Sign::Pos,
            &ModelParams::default(),
            &default_quant(),
        )
        .unwrap();
        assert!(matches!(
            dense_ground_distance(&cg, 2),
            Err(GroundDistError::DenseGuard { .. })
        ));
        let d = dense_ground_distance(&cg, 16).unwrap();
        assert_eq!(d.at(0, 0), 0);
        assert_eq!(d.at(1, 0), cg.sentinel());
    }

    #[test]
    fn smaller_epsilon_raises_impossible_costs() {
        let net = Network::new(2, vec![Edge::plain(0, 1)], None).unwrap();
        let st = state(&[0, 0]); // neutral conductor: cascade gives epsilon
        let mut costs = Vec::new();
        for eps in [1e-2, 1e-4, 1e-6] {
            let cg = build_cost_graph(
                &net,
                &st,
                Sign::Pos,
                &ModelParams::Icc(IccParams { epsilon: eps, ..IccParams::default() }),
                &default_quant(),
            )
            .unwrap();
            costs.push(cg.edge_costs(0).next().unwrap().1);
        }
        assert!(costs[0] < costs[1] && costs[1] < costs[2]);
        // A tight cap clamps them.
        let cg = build_cost_graph(
            &net,
            &st,
            Sign::Pos,
            &ModelParams::Icc(IccParams { epsilon: 1e-6, ..IccParams::default() }),
            &Quantization { scale: 100.0, cost_cap: 500 },
        )
        .unwrap();
        assert_eq!(cg.edge_costs(0).next().unwrap().1, 500);
    }
}
