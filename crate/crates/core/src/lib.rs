//! Joint UAV / ground-user service on one resource block.
//!
//! An access point serves a ground user (GU) and a UAV in the same frame of
//! `M` symbols, either by superposition coding (NOMA, the UAV cancels the
//! GU's signal before decoding its own) or by two-phase decode-and-forward
//! relaying (the UAV receives a combined packet and forwards the GU's part).
//! Both schemes are modeled in the infinite-blocklength (Shannon) regime and
//! in the finite-blocklength regime via the normal approximation of the
//! achievable coding rate.
//!
//! The crate is organized bottom-up:
//!
//! * [`fbl`] — scalar rate/error primitives: Shannon capacity, Q-function
//!   and inverse, finite-blocklength rate and error probability, SNR
//!   inversion.
//! * [`channel`] — geometry, log-distance path loss, elevation-dependent
//!   LoS probability, and the linear link gains.
//! * [`schemes`] — forward throughput models for {NOMA, relaying} ×
//!   {IBL, FBL}.
//! * [`solvers`] — optimal power/blocklength allocation maximizing the UAV
//!   throughput under a weighted GU throughput guarantee, plus a brute-force
//!   grid oracle and feasibility-range search.
//! * [`montecarlo`] — fading models and seeded campaign averaging.
//! * [`scenario`] — the TOML scenario configuration.
//! * [`sweep`] — parameter sweeps, the relaying ablation, and the CSV table
//!   format.
//! * [`validate`] — the self-check suite behind `uavalloc validate`.
//!
//! All numeric work is in linear units internally (watts, linear gains,
//! bits per frame); dBm appears only at configuration and report boundaries.
//!
//! # Example
//!
//! ```
//! use uavalloc_core::channel::build_link_budget;
//! use uavalloc_core::scenario::ScenarioConfig;
//! use uavalloc_core::solvers::{solve_relay_ibl, SolverOptions};
//!
//! // Default scenario, static channel.
//! let cfg = ScenarioConfig::default();
//! let budget = build_link_budget(&cfg, [1.0, 1.0, 1.0]).unwrap();
//!
//! // Guarantee the GU its full standalone throughput (beta = 1) and give
//! // the UAV whatever the relay's first hop has left.
//! let result = solve_relay_ibl(
//!     &budget,
//!     cfg.frame_length,
//!     cfg.p0_watts(),
//!     1.0,
//!     &SolverOptions::default(),
//! )
//! .unwrap();
//! assert!(result.feasible);
//! assert!(result.uav_bits() > 2_000.0);
//! assert!((result.gu_bits() - result.gu_target_bits).abs() < 1e-6 * result.gu_target_bits);
//! ```

// Domain validation uses `!(x > 0.0)` so NaN fails the check too, and
// frozen reference values keep their full high-precision digits.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]
#![cfg_attr(test, allow(clippy::field_reassign_with_default))]

pub mod channel;
pub mod fbl;
pub mod montecarlo;
pub mod scenario;
pub mod schemes;
pub mod search;
pub mod solvers;
pub mod sweep;
pub mod validate;

pub use channel::{LinkBudget, PathLossParams, Position3D};
pub use scenario::ScenarioConfig;
pub use schemes::{Regime, ReliabilityTargets, Scheme};
pub use solvers::{AllocationResult, InfeasibilityReason, SolverOptions};
