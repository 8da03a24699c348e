//! Energy-efficiency maximization for multi-user MISO downlink channels.
//!
//! The transmit power at which the maximum energy efficiency saturates is
//! bracketed by two closed forms obtained from large-system analysis of MRT
//! beamforming, and refined by interpolating with the deterministic-equivalent
//! EE of RZF beamforming. A single WMMSE sum-rate maximization at
//! `min(P_prop, P)` then replaces the per-channel fractional-programming loop.
//!
//! Module map:
//!
//! * [`sysmodel`]: configuration, units and the power-consumption model.
//! * [`channel`]: seeded i.i.d. Rayleigh channel realizations.
//! * [`beamform`]: MRT / RZF directions and exact SINR, rate and EE.
//! * [`specfun`]: principal branch of the Lambert W function.
//! * [`asympt`]: large-system SINR, rate bounds and RZF deterministic equivalents.
//! * [`satpower`]: saturation powers, EE-gap interpolation and the proposed scheme.
//! * [`optim`]: WMMSE and the Dinkelbach EE baseline.
//! * [`harness`]: Monte Carlo experiments emitting CSV tables.

pub mod asympt;
pub mod beamform;
pub mod channel;
pub mod error;
pub mod harness;
pub mod optim;
pub mod satpower;
pub mod scalar;
pub mod specfun;
pub mod sysmodel;

pub use error::{Error, Result};
