//! Iterative reference optimizers: WMMSE sum-rate maximization and the
//! Dinkelbach energy-efficiency baseline built on top of it.

mod dinkelbach;
mod wmmse;

pub use dinkelbach::{dinkelbach_ee, DinkelbachOptions, DinkelbachOutcome, DinkelbachState};
pub use wmmse::{weighted_mmse, wmmse, WmmseOptions, WmmseOutcome, WmmseState};

use crate::sysmodel::SystemConfig;

impl WmmseOptions {
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self {
            tol: cfg.wmmse_tol,
            max_iter: cfg.wmmse_max_iter,
        }
    }
}

impl DinkelbachOptions {
    pub fn from_config(cfg: &SystemConfig) -> Self {
        Self {
            delta: cfg.dinkelbach_delta,
            max_outer: cfg.dinkelbach_max_outer,
            inner: WmmseOptions::from_config(cfg),
        }
    }
}
