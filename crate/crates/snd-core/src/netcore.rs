//! Graph and opinion-state representation, validation, and file I/O.
//!
//! A [`Network`] is a fixed directed topology with optional per-edge
//! propagation attributes; a [`NetworkState`] assigns each node one of
//! the three opinions `-1`, `0`, `+1`. Both are immutable after
//! construction and safe to share across threads.

use crate::transport::Histogram;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

/// Directed edge with optional model attributes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub src: u32,
    pub dst: u32,
    /// Relative communication frequency, dimensionless >= 0.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub comm: Option<f64>,
    /// Opinion adoption probability in (0, 1].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub adopt: Option<f64>,
    /// Cascade activation probability in [0, 1].
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    /// Cascade edge distance, positive.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub d: Option<f64>,
    /// Threshold-model influence weight, >= 0.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub w: Option<f64>,
}

impl Edge {
    pub fn plain(src: u32, dst: u32) -> Self {
        Edge { src, dst, comm: None, adopt: None, p: None, d: None, w: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    thresholds: Option<Vec<f64>>,
}

/// Immutable directed graph over nodes `0..n` with adjacency indices in
/// both directions.
#[derive(Clone, Debug)]
pub struct Network {
    n: usize,
    edges: Vec<Edge>,
    thresholds: Option<Vec<f64>>,
    out_offsets: Vec<u32>,
    /// Edge indices grouped by source.
    out_edges: Vec<u32>,
    in_offsets: Vec<u32>,
    /// Edge indices grouped by destination.
    in_edges: Vec<u32>,
}

fn csr_by<F: Fn(&Edge) -> u32>(n: usize, edges: &[Edge], key: F) -> (Vec<u32>, Vec<u32>) {
    let mut counts = vec![0u32; n + 1];
    for e in edges {
        counts[key(e) as usize + 1] += 1;
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let mut slots = counts.clone();
    let mut order = vec![0u32; edges.len()];
    for (idx, e) in edges.iter().enumerate() {
        let k = key(e) as usize;
        order[slots[k] as usize] = idx as u32;
        slots[k] += 1;
    }
    (counts, order)
}

impl Network {
    pub fn new(
        n: usize,
        edges: Vec<Edge>,
        thresholds: Option<Vec<f64>>,
    ) -> Result<Self, NetError> {
        if n == 0 {
            return Err(NetError::Validation("node count must be positive".into()));
        }
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut attr_mask: Option<[bool; 5]> = None;
        for e in &edges {
            if e.src as usize >= n || e.dst as usize >= n {
                return Err(NetError::Validation(format!(
                    "edge ({}, {}) out of range for n={n}",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(NetError::Validation(format!("self-loop at node {}", e.src)));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(NetError::Validation(format!(
                    "duplicate edge ({}, {})",
                    e.src, e.dst
                )));
            }
            let mask = [
                e.comm.is_some(),
                e.adopt.is_some(),
                e.p.is_some(),
                e.d.is_some(),
                e.w.is_some(),
            ];
            match &attr_mask {
                None => attr_mask = Some(mask),
                Some(prev) if *prev != mask => {
                    return Err(NetError::Validation(
                        "optional edge attributes must be present on all edges or none".into(),
                    ))
                }
                _ => {}
            }
            for (name, value, lo, hi) in [
                ("comm", e.comm, 0.0, f64::INFINITY),
                ("adopt", e.adopt, 0.0, 1.0),
                ("p", e.p, 0.0, 1.0),
                ("d", e.d, 0.0, f64::INFINITY),
                ("w", e.w, 0.0, f64::INFINITY),
            ] {
                if let Some(v) = value {
                    if !v.is_finite() || v < lo || v > hi {
                        return Err(NetError::Validation(format!(
                            "edge ({}, {}): {name}={v} out of range",
                            e.src, e.dst
                        )));
                    }
                    if name == "d" && v <= 0.0 {
                        return Err(NetError::Validation(format!(
                            "edge ({}, {}): distance must be positive",
                            e.src, e.dst
                        )));
                    }
                }
            }
        }
        if let Some(th) = &thresholds {
            if th.len() != n {
                return Err(NetError::Validation(format!(
                    "{} thresholds for {n} nodes",
                    th.len()
                )));
            }
            if th.iter().any(|t| !t.is_finite() || *t < 0.0) {
                return Err(NetError::Validation("thresholds must be finite and >= 0".into()));
            }
        }
        let (out_offsets, out_edges) = csr_by(n, &edges, |e| e.src);
        let (in_offsets, in_edges) = csr_by(n, &edges, |e| e.dst);
        Ok(Network { n, edges, thresholds, out_offsets, out_edges, in_offsets, in_edges })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn thresholds(&self) -> Option<&[f64]> {
        self.thresholds.as_deref()
    }

    /// Indices of edges leaving `v`.
    pub fn out_edge_ids(&self, v: usize) -> &[u32] {
        &self.out_edges[self.out_offsets[v] as usize..self.out_offsets[v + 1] as usize]
    }

    /// Indices of edges entering `v`.
    pub fn in_edge_ids(&self, v: usize) -> &[u32] {
        &self.in_edges[self.in_offsets[v] as usize..self.in_offsets[v + 1] as usize]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_edge_ids(v).len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_edge_ids(v).len()
    }

    pub fn to_json(&self) -> String {
        let file = NetworkFile {
            n: self.n,
            edges: self.edges.clone(),
            thresholds: self.thresholds.clone(),
        };
        serde_json::to_string_pretty(&file).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NetError> {
        let file: NetworkFile =
            serde_json::from_str(text).map_err(|e| NetError::Parse(e.to_string()))?;
        Network::new(file.n, file.edges, file.thresholds)
    }
}

pub fn load_network(path: &Path) -> Result<Network, NetError> {
    let text = std::fs::read_to_string(path)?;
    Network::from_json(&text)
}

pub fn write_network(network: &Network, path: &Path) -> Result<(), NetError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(network.to_json().as_bytes())?;
    Ok(())
}

/// Opinion assignment over all nodes: entries in `{-1, 0, +1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkState {
    opinions: Vec<i8>,
}

impl NetworkState {
    pub fn new(opinions: Vec<i8>) -> Result<Self, NetError> {
        for (i, &o) in opinions.iter().enumerate() {
            if !(-1..=1).contains(&o) {
                return Err(NetError::Validation(format!(
                    "opinion {o} at node {i} is outside {{-1, 0, +1}}"
                )));
            }
        }
        Ok(NetworkState { opinions })
    }

    pub fn neutral(n: usize) -> Self {
        NetworkState { opinions: vec![0; n] }
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    pub fn opinion(&self, v: usize) -> i8 {
        self.opinions[v]
    }

    pub fn opinions(&self) -> &[i8] {
        &self.opinions
    }

    /// Number of nodes holding a non-neutral opinion.
    pub fn active_count(&self) -> usize {
        self.opinions.iter().filter(|&&o| o != 0).count()
    }

    pub fn is_active(&self, v: usize) -> bool {
        self.opinions[v] != 0
    }

    /// Builder used by generators; panics on a bad opinion value.
    pub fn with_opinion(&self, v: usize, opinion: i8) -> NetworkState {
        assert!((-1..=1).contains(&opinion));
        let mut opinions = self.opinions.clone();
        opinions[v] = opinion;
        NetworkState { opinions }
    }

    /// Unit mass at every node holding `+1`.
    pub fn positive_part(&self) -> Histogram {
        Histogram::new(self.opinions.iter().map(|&o| f64::from(o == 1)).collect())
            .expect("0/1 masses")
    }

    /// Unit mass at every node holding `-1`.
    pub fn negative_part(&self) -> Histogram {
        Histogram::new(self.opinions.iter().map(|&o| f64::from(o == -1)).collect())
            .expect("0/1 masses")
    }
}

/// Number of nodes whose opinion differs between two states.
pub fn state_delta(a: &NetworkState, b: &NetworkState) -> usize {
    assert_eq!(a.len(), b.len(), "states must cover the same nodes");
    a.opinions.iter().zip(&b.opinions).filter(|(x, y)| x != y).count()
}

/// Ordered snapshots of one network's opinions.
#[derive(Clone, Debug)]
pub struct StateSeries {
    states: Vec<NetworkState>,
    timestamps: Vec<u64>,
}

impl StateSeries {
    pub fn new(states: Vec<NetworkState>, timestamps: Vec<u64>) -> Result<Self, NetError> {
        if states.is_empty() {
            return Err(NetError::Validation("at least one state required".into()));
        }
        if timestamps.len() != states.len() {
            return Err(NetError::Validation("one timestamp per state required".into()));
        }
        if timestamps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NetError::Validation("timestamps must strictly increase".into()));
        }
        let n = states[0].len();
        if states.iter().any(|s| s.len() != n) {
            return Err(NetError::Validation("states differ in length".into()));
        }
        Ok(StateSeries { states, timestamps })
    }

    /// Epoch timestamps `0..k`.
    pub fn from_states(states: Vec<NetworkState>) -> Result<Self, NetError> {
        let ts = (0..states.len() as u64).collect();
        StateSeries::new(states, ts)
    }

    pub fn states(&self) -> &[NetworkState] {
        &self.states
    }

    pub fn timestamps(&self) -> &[u64] {
        &self.timestamps
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Parse a state-series CSV: one row per state, `n` values from
/// `{-1, 0, 1}`, with an optional non-numeric header row.
pub fn parse_state_series(text: &str, network: &Network) -> Result<StateSeries, NetError> {
    let n = network.node_count();
    let mut states = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if states.is_empty() && fields[0].parse::<i64>().is_err() {
            continue; // header row such as "t0,t1,..."
        }
        if fields.len() != n {
            return Err(NetError::Validation(format!(
                "line {}: {} values for {} nodes",
                lineno + 1,
                fields.len(),
                n
            )));
        }
        let mut opinions = Vec::with_capacity(n);
        for f in &fields {
            let v: i64 = f
                .parse()
                .map_err(|_| NetError::Parse(format!("line {}: bad value {f:?}", lineno + 1)))?;
            if !(-1..=1).contains(&v) {
                return Err(NetError::Validation(format!(
                    "line {}: opinion {v} is outside {{-1, 0, 1}}",
                    lineno + 1
                )));
            }
            opinions.push(v as i8);
        }
        states.push(NetworkState::new(opinions)?);
    }
    StateSeries::from_states(states)
}

pub fn load_state_series(path: &Path, network: &Network) -> Result<StateSeries, NetError> {
    let file = std::fs::File::open(path)?;
    let mut text = String::new();
    std::io::BufReader::new(file).read_to_string(&mut text)?;
    parse_state_series(&text, network)
}

pub fn write_state_series(series: &StateSeries, path: &Path) -> Result<(), NetError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for state in series.states() {
        let row: Vec<String> = state.opinions().iter().map(|o| o.to_string()).collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}
