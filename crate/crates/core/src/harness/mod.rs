//! Monte Carlo experiments and their CSV output.
//!
//! Every experiment draws trial `t` from the channel stream `(seed, t)` and
//! reuses that realization at every grid point, so curves are compared on
//! common random numbers. Trials run on a rayon pool of the requested size.
//! Results are collected in trial order and summed sequentially, which makes
//! the output byte-identical for any worker count.

mod experiments;
mod output;
mod stats;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sysmodel::SystemConfig;

pub use experiments::{
    run_compare, run_saturation, run_sweep, run_toy, run_tradeoff, CompareReport,
    SaturationReport, SweepReport, ToyReport, TradeoffReport,
};
pub use output::{write_csv, write_csv_file, EePoint, CSV_HEADER};
pub use stats::{Accumulator, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Sweep,
    Tradeoff,
    Saturation,
    Compare,
    Toy,
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sweep" => Ok(Self::Sweep),
            "tradeoff" => Ok(Self::Tradeoff),
            "saturation" => Ok(Self::Saturation),
            "compare" => Ok(Self::Compare),
            "toy" => Ok(Self::Toy),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

/// Transmit-power grid in dB (dBm over the band, or dB of normalized power).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Default for PowerGrid {
    fn default() -> Self {
        Self {
            start_db: -10.0,
            stop_db: 46.0,
            step_db: 2.0,
        }
    }
}

impl PowerGrid {
    pub fn new(start_db: f64, stop_db: f64, step_db: f64) -> Result<Self> {
        let g = Self {
            start_db,
            stop_db,
            step_db,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.start_db.is_finite() && self.stop_db.is_finite() && self.step_db.is_finite();
        if !finite || self.stop_db < self.start_db || self.step_db <= 0.0 {
            return Err(Error::Config(format!(
                "power grid must be nonempty and increasing (start {}, stop {}, step {})",
                self.start_db, self.stop_db, self.step_db
            )));
        }
        Ok(())
    }

    /// `start + i·step` for every point not beyond `stop`.
    pub fn points(&self) -> Vec<f64> {
        let span = (self.stop_db - self.start_db) / self.step_db;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start_db + i as f64 * self.step_db)
            .collect()
    }
}

/// One experiment invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub config: SystemConfig,
    pub kind: ExperimentKind,
    pub grid: PowerGrid,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads for the trial pool.
    pub workers: usize,
    /// Report rates in bits instead of nats.
    pub bits: bool,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(config: SystemConfig, kind: ExperimentKind) -> Self {
        Self {
            config,
            kind,
            grid: PowerGrid::default(),
            trials: 100,
            seed: 1,
            workers: 1,
            bits: false,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        self.grid.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    /// Multiplier applied to rates on output.
    pub fn rate_scale(&self) -> f64 {
        if self.bits {
            std::f64::consts::LOG2_E
        } else {
            1.0
        }
    }
}

/// Rows plus a human-readable summary for stderr.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<EePoint>,
    pub summary: String,
}

/// Runs the experiment named by `spec.kind`.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    let (rows, summary) = match spec.kind {
        ExperimentKind::Sweep => {
            let r = run_sweep(spec)?;
            let s = r.summary();
            (r.rows, s)
        }
        ExperimentKind::Tradeoff => {
            let r = run_tradeoff(spec)?;
            let s = r.summary();
            (r.rows, s)
        }
        ExperimentKind::Saturation => {
            let r = run_saturation(spec)?;
            let s = r.summary();
            (r.rows, s)
        }
        ExperimentKind::Compare => {
            let r = run_compare(spec)?;
            let s = r.summary();
            (r.rows, s)
        }
        ExperimentKind::Toy => {
            let r = run_toy(spec)?;
            let s = r.summary();
            (r.rows, s)
        }
    };
    Ok(RunOutput { rows, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_matches_figure_range() {
        let pts = PowerGrid::default().points();
        assert_eq!(pts.len(), 29);
        assert_eq!(pts[0], -10.0);
        assert_eq!(*pts.last().unwrap(), 46.0);
    }

    #[test]
    fn grid_validation() {
        assert!(PowerGrid::new(0.0, 0.0, 1.0).unwrap().points() == vec![0.0]);
        assert!(PowerGrid::new(1.0, 0.0, 1.0).is_err());
        assert!(PowerGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(PowerGrid::new(0.0, f64::NAN, 1.0).is_err());
        assert_eq!(PowerGrid::new(0.0, 1.0, 0.3).unwrap().points().len(), 4);
    }

    #[test]
    fn spec_validation() {
        let mut s = ExperimentSpec::new(SystemConfig::reference(), ExperimentKind::Sweep);
        assert!(s.validate().is_ok());
        s.trials = 0;
        assert!(s.validate().is_err());
        s.trials = 1;
        s.workers = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("toy".parse::<ExperimentKind>().unwrap(), ExperimentKind::Toy);
        assert!("plot".parse::<ExperimentKind>().is_err());
    }
}
