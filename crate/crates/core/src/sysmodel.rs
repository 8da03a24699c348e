//! System configuration, unit handling and the BS power-consumption model.
//!
//! All power quantities used by the rest of the crate are per-Hz (W/Hz). The
//! `T·W` factor of the per-block energy cancels in the EE ratio, so energy
//! efficiency is reported as (nats/s/Hz) / (W/Hz) = nats/Joule.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which backend produces the RZF deterministic-equivalent parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum DetEquivBackend {
    #[default]
    Analytic,
    Empirical,
}

/// Flat configuration document. Powers in dBm, bandwidth in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Transmit antennas at the BS.
    #[serde(rename = "M")]
    pub antennas: usize,
    /// Single-antenna users.
    #[serde(rename = "N")]
    pub users: usize,
    /// Bandwidth in Hz.
    #[serde(rename = "W")]
    pub bandwidth_hz: f64,
    /// Coherence time in s. Stored only; it cancels in every EE ratio.
    #[serde(rename = "T", default = "default_coherence")]
    pub coherence_s: f64,
    pub noise_psd_dbm_per_hz: f64,
    #[serde(default)]
    pub noise_figure_db: f64,
    /// Power amplifier inefficiency (>= 1).
    pub xi: f64,
    /// Per-antenna circuit power P_c' in dBm.
    #[serde(rename = "Pc_prime_dbm")]
    pub pc_prime_dbm: f64,
    /// Static BS power P_o' in dBm.
    #[serde(rename = "Po_prime_dbm")]
    pub po_prime_dbm: f64,

    /// EE gain of SE maximization over RZF used by the interpolation.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Fixed RZF regularizer. When absent the MMSE loading N/(M·rho) is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rzf_alpha: Option<f64>,
    #[serde(default)]
    pub det_equiv: DetEquivBackend,
    /// Normalized-unit mode: noise density is 1 and P_const takes this value
    /// directly. Grid values are then dB of the normalized transmit power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_p_const: Option<f64>,
    /// Static power of the single-link toy model.
    #[serde(default = "default_toy_p_static")]
    pub toy_p_static: f64,

    #[serde(default = "default_wmmse_tol")]
    pub wmmse_tol: f64,
    #[serde(default = "default_wmmse_max_iter")]
    pub wmmse_max_iter: usize,
    #[serde(default = "default_delta")]
    pub dinkelbach_delta: f64,
    #[serde(default = "default_max_outer")]
    pub dinkelbach_max_outer: usize,
}

fn default_coherence() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    1.3
}
fn default_toy_p_static() -> f64 {
    1.0
}
fn default_wmmse_tol() -> f64 {
    1e-4
}
fn default_wmmse_max_iter() -> usize {
    200
}
fn default_delta() -> f64 {
    1e-3
}
fn default_max_outer() -> usize {
    50
}

impl SystemConfig {
    /// Simulation settings of the reference evaluation: M = N = 3, 20 MHz,
    /// -174 dBm/Hz noise with a 7 dB noise figure, xi = 1, P_c' = 30 dBm and
    /// P_o' = 40 dBm.
    pub fn reference() -> Self {
        Self {
            antennas: 3,
            users: 3,
            bandwidth_hz: 20e6,
            coherence_s: 1.0,
            noise_psd_dbm_per_hz: -174.0,
            noise_figure_db: 7.0,
            xi: 1.0,
            pc_prime_dbm: 30.0,
            po_prime_dbm: 40.0,
            beta: default_beta(),
            rzf_alpha: None,
            det_equiv: DetEquivBackend::Analytic,
            normalized_p_const: None,
            toy_p_static: default_toy_p_static(),
            wmmse_tol: default_wmmse_tol(),
            wmmse_max_iter: default_wmmse_max_iter(),
            dinkelbach_delta: default_delta(),
            dinkelbach_max_outer: default_max_outer(),
        }
    }

    /// Same settings with a different antenna/user count.
    pub fn with_dims(mut self, antennas: usize, users: usize) -> Self {
        self.antennas = antennas;
        self.users = users;
        self
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("malformed JSON: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            context: format!("reading config {}", path.display()),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas < 1 {
            return Err(Error::Config("M must be at least 1".into()));
        }
        if self.users < 1 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::Config(format!(
                "bandwidth must be finite and positive, got {}",
                self.bandwidth_hz
            )));
        }
        if !(self.coherence_s.is_finite() && self.coherence_s > 0.0) {
            return Err(Error::Config("coherence time must be positive".into()));
        }
        if !(self.xi.is_finite() && self.xi >= 1.0) {
            return Err(Error::Config(format!("xi must be >= 1, got {}", self.xi)));
        }
        for (name, v) in [
            ("noise_psd_dbm_per_hz", self.noise_psd_dbm_per_hz),
            ("noise_figure_db", self.noise_figure_db),
            ("Pc_prime_dbm", self.pc_prime_dbm),
            ("Po_prime_dbm", self.po_prime_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::Config("beta must be positive".into()));
        }
        if let Some(a) = self.rzf_alpha {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::Config("rzf_alpha must be positive".into()));
            }
        }
        if let Some(pc) = self.normalized_p_const {
            if !(pc.is_finite() && pc > 0.0) {
                return Err(Error::Config("normalized_p_const must be positive".into()));
            }
        }
        if !(self.toy_p_static.is_finite() && self.toy_p_static > 0.0) {
            return Err(Error::Config("toy_p_static must be positive".into()));
        }
        if !(self.wmmse_tol > 0.0 && self.dinkelbach_delta > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.wmmse_max_iter == 0 || self.dinkelbach_max_outer == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        Ok(())
    }

    /// Users per antenna, N/M.
    pub fn load_ratio(&self) -> f64 {
        self.users as f64 / self.antennas as f64
    }
}

/// How grid values and reported powers map to internal per-Hz powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerUnits {
    /// dBm over the whole band, stored as W/Hz.
    PerHz { bandwidth_hz: f64 },
    /// dB of a dimensionless power with unit noise density.
    Normalized,
}

/// Per-Hz quantities derived from a [`SystemConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedPowerModel {
    /// Effective noise spectral density including the noise figure, W/Hz.
    pub n0: f64,
    /// Per-antenna circuit power, W/Hz.
    pub pc: f64,
    /// Static power, W/Hz.
    pub po: f64,
    /// M·pc + po.
    pub pconst: f64,
    pub xi: f64,
    pub units: PowerUnits,
}

/// Dimensions plus derived power model: everything the analytic formulas need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub antennas: usize,
    pub users: usize,
    pub power: DerivedPowerModel,
}

impl Scenario {
    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        Ok(Self {
            antennas: cfg.antennas,
            users: cfg.users,
            power: derive_power_model(cfg)?,
        })
    }

    pub fn m(&self) -> f64 {
        self.antennas as f64
    }

    pub fn n(&self) -> f64 {
        self.users as f64
    }

    pub fn n0(&self) -> f64 {
        self.power.n0
    }

    pub fn pconst(&self) -> f64 {
        self.power.pconst
    }

    pub fn xi(&self) -> f64 {
        self.power.xi
    }

    /// xi·P + P_const, for any P >= 0.
    pub fn consumed(&self, p: f64) -> f64 {
        self.power.xi * p + self.power.pconst
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn derive_power_model(cfg: &SystemConfig) -> Result<DerivedPowerModel> {
    cfg.validate()?;
    if let Some(pconst) = cfg.normalized_p_const {
        return Ok(DerivedPowerModel {
            n0: 1.0,
            pc: 0.0,
            po: pconst,
            pconst,
            xi: cfg.xi,
            units: PowerUnits::Normalized,
        });
    }
    let w = cfg.bandwidth_hz;
    let n0 = dbm_to_watts(cfg.noise_psd_dbm_per_hz + cfg.noise_figure_db);
    let pc = dbm_to_watts(cfg.pc_prime_dbm) / w;
    let po = dbm_to_watts(cfg.po_prime_dbm) / w;
    let pconst = cfg.antennas as f64 * pc + po;
    if !(n0 > 0.0 && pconst > 0.0 && n0.is_finite() && pconst.is_finite()) {
        return Err(Error::Config("derived power model is not strictly positive".into()));
    }
    Ok(DerivedPowerModel {
        n0,
        pc,
        po,
        pconst,
        xi: cfg.xi,
        units: PowerUnits::PerHz { bandwidth_hz: w },
    })
}

impl DerivedPowerModel {
    /// Grid value (dBm over the band, or dB normalized) to internal power.
    pub fn power_from_db(&self, db: f64) -> f64 {
        match self.units {
            PowerUnits::PerHz { bandwidth_hz } => dbm_to_watts(db) / bandwidth_hz,
            PowerUnits::Normalized => 10f64.powf(db / 10.0),
        }
    }

    /// Inverse of [`Self::power_from_db`].
    pub fn power_to_db(&self, p: f64) -> f64 {
        match self.units {
            PowerUnits::PerHz { bandwidth_hz } => watts_to_dbm(p * bandwidth_hz),
            PowerUnits::Normalized => 10.0 * p.log10(),
        }
    }

    pub fn total_power(&self, p_sum: f64) -> Result<f64> {
        total_power(p_sum, self.pconst, self.xi)
    }
}

/// xi·p_sum + P_const.
pub fn total_power(p_sum: f64, pconst: f64, xi: f64) -> Result<f64> {
    if p_sum.is_nan() || p_sum < 0.0 {
        return Err(Error::Domain(format!("transmit power must be >= 0, got {p_sum}")));
    }
    Ok(xi * p_sum + pconst)
}

/// Sum rate over total consumed power.
pub fn energy_efficiency(sum_rate: f64, total_power: f64) -> Result<f64> {
    if total_power.is_nan() || total_power <= 0.0 {
        return Err(Error::Domain(format!(
            "total power must be positive, got {total_power}"
        )));
    }
    Ok(sum_rate / total_power)
}
