//! Simulation library for an IRS-aided MISO downlink designed in the angle
//! domain.
//!
//! The base station (BS) and the intelligent reflecting surface (IRS) carry
//! uniform rectangular arrays; all three links (BS→IRS, IRS→user, BS→user)
//! follow a Rician fading model whose line-of-sight parts are steering
//! vectors in the *effective angles* — the per-element phase increments
//! along the two array axes. The crate covers the full chain:
//!
//! * [`geometry`] — coordinates, URA index maps, effective angles, steering
//!   vectors;
//! * [`channel`] — Rician channel draws and large-scale gains;
//! * [`estimation`] — uplink pilot simulation, ML estimation of the BS→user
//!   effective angles, user localization and transfer to the IRS→user link;
//! * [`beamforming`] — the expected-received-power matrix under Gaussian
//!   angle error, the eigen BS beam, and projected-gradient optimization of
//!   the unit-modulus IRS phases;
//! * [`rate`] — exact achievable rate, closed-form approximation and upper
//!   bound;
//! * [`experiments`] — reproducible Monte Carlo sweeps with CSV/JSON output.
//!
//! Everything is deterministic for a fixed seed: trials derive independent
//! ChaCha streams from `(seed, trial index)` and reductions run in trial
//! order, so parallelism never changes results.
//!
//! ```
//! use irslink::{beamforming, estimation, rate, rngstream, SystemConfig};
//!
//! let mut cfg = SystemConfig::estimation_default();
//! cfg.m_irs = 16; // small surface keeps the example fast
//!
//! // one pilot snapshot -> angle estimate -> joint beams -> rate report
//! let est = estimation::estimate_all(&cfg, &mut rngstream::trial_rng(cfg.seed, 0))?;
//! let sol = beamforming::joint_optimize(&cfg, &est)?;
//! let report = rate::rate_report(&cfg, &est, &sol.xi)?;
//!
//! assert!(report.rate_exact > 0.0);
//! assert!(report.rate_exact <= report.rate_upper + 1e-9);
//! assert!(sol.xi.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
//! # Ok::<(), irslink::Error>(())
//! ```

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod rate;
pub mod rngstream;

pub use config::{OptimizerParams, SystemConfig};
pub use error::{Error, Result};
pub use linalg::{CMat, C64};
