//! Comparison of social-network opinion states via transport distances.
//!
//! The crate is organized around a pipeline:
//!
//! * [`netcore`] — graphs, three-valued opinion states, file formats;
//! * [`grounddist`] — opinion-dependent edge costs and shortest-path
//!   ground distances (quantized to bounded positive integers);
//! * [`transport`] — exact transportation solvers and the earth-mover
//!   family (plain, mismatch-penalized, single-bank, local-bank);
//! * [`snd`] — the social network distance assembled from four
//!   local-bank terms, with a reduced fast path that matches the dense
//!   evaluation exactly;
//! * [`baselines`] — competing distance measures and prediction rules;
//! * [`simgen`] — synthetic scale-free networks and opinion evolution;
//! * [`analysis`] — anomaly detection, opinion prediction, and the
//!   transition-separation study built on top of the distances.

pub mod analysis;
pub mod baselines;
pub mod config;
pub mod grounddist;
pub mod netcore;
pub mod simgen;
pub mod snd;
pub mod transport;
