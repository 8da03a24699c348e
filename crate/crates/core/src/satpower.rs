//! Saturation powers and the proposed one-shot EE scheme.
//!
//! The EE-optimal transmit power saturates: below it, EE maximization and
//! sum-rate maximization coincide; above it, spending more power only lowers
//! EE. Closed forms for the MRT lower bound (`P_LB`) and the interference-free
//! upper bound (`P_UB`) bracket it, and the RZF deterministic equivalent
//! locates the operating point `P_prop` inside that bracket. Everything here
//! depends on channel statistics only, so a band is computed once per
//! configuration and shared by every trial.

use std::f64::consts::E;

use crate::asympt::{
    self, det_equiv_rzf, det_equiv_rzf_empirical, DetEquivParams, EMPIRICAL_ANTENNAS,
};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::optim::{wmmse, WmmseOptions, WmmseOutcome};
use crate::scalar::bisect_log;
use crate::specfun::lambert_w0;
use crate::sysmodel::{DetEquivBackend, Scenario, SystemConfig};

/// EE of the single-link toy model `ln(1 + P) / (P + P_static)`.
pub fn toy_ee(p: f64, p_static: f64) -> f64 {
    p.ln_1p() / (p + p_static)
}

/// Maximizer of [`toy_ee`]: `exp(W0((P_static - 1)/e) + 1) - 1`.
pub fn p_ee_toy(p_static: f64) -> Result<f64> {
    if !(p_static.is_finite() && p_static > 0.0) {
        return Err(Error::Domain(format!("P_static must be > 0, got {p_static}")));
    }
    let w = lambert_w0((p_static - 1.0) / E)?;
    Ok((w + 1.0).exp_m1())
}

/// Maximizer of the lower-bound EE `R_LB/(xi·P + P_const)`:
/// `sqrt(N·n0·P_const / (xi·(N + M - 1)))`.
pub fn p_lb(sc: &Scenario) -> f64 {
    (sc.n() * sc.n0() * sc.pconst() / (sc.xi() * (sc.n() + sc.m() - 1.0))).sqrt()
}

/// Maximizer of the upper-bound EE `R_UB/(xi·P + P_const)`:
/// `(N·n0/M)·[exp(1 + W0((M·P_const/(N·n0·xi) - 1)/e)) - 1]`.
pub fn p_ub(sc: &Scenario) -> Result<f64> {
    let k = sc.m() * sc.pconst() / (sc.n() * sc.n0() * sc.xi());
    let w = lambert_w0((k - 1.0) / E)?;
    Ok(sc.n() * sc.n0() / sc.m() * (1.0 + w).exp_m1())
}

/// Stationarity function of the RZF EE curve; increasing in `P` with a
/// unique root at the RZF saturation power.
pub fn rzf_stationarity(p: f64, sc: &Scenario, de: &DetEquivParams) -> f64 {
    // per-n0 units keep every term near unity
    let u = p / sc.n0();
    let pc = sc.pconst() / sc.n0();
    let m2 = de.m0 * de.m0;
    let g = de.gamma0;
    let a = de.noise_term(1.0);
    let gu_a = g * u + a;
    (m2 * u / gu_a).ln_1p() - m2 * a * (u + pc / sc.xi()) / (((m2 + g) * u + a) * gu_a)
}

/// Root of [`rzf_stationarity`], by bisection on `ln P` with the upper end
/// doubled until the function turns positive.
pub fn p_rzf(sc: &Scenario, de: &DetEquivParams) -> Result<f64> {
    let f = |p: f64| rzf_stationarity(p, sc, de);
    let lo = sc.n0() * 1e-12;
    if f(lo) >= 0.0 {
        return Err(Error::Numerical(format!(
            "RZF stationarity not negative near zero power ({de:?})"
        )));
    }
    let mut hi = sc.n0();
    let mut doublings = 0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::Numerical(format!(
                "could not bracket the RZF saturation power ({de:?})"
            )));
        }
    }
    bisect_log(f, lo, hi, 1e-14)
}

/// Which side, if any, the EE-gap clamp engaged on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandClamp {
    None,
    /// `beta·gamma_RZF >= gamma_UB`; operating point pinned to `P_UB`.
    Upper,
    /// `beta·gamma_RZF <= gamma_LB`; operating point pinned to `P_LB`.
    Lower,
}

/// Inputs of the EE-gap interpolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandInputs {
    pub p_lb: f64,
    pub p_ub: f64,
    pub p_rzf: f64,
    pub gamma_lb: f64,
    pub gamma_ub: f64,
    pub gamma_rzf: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationBand {
    pub p_lb: f64,
    pub p_ub: f64,
    pub p_rzf: f64,
    pub p_prop: f64,
    pub gamma_lb: f64,
    pub gamma_ub: f64,
    pub gamma_rzf: f64,
    /// `beta·gamma_RZF`, clamped into `[gamma_LB, gamma_UB]`.
    pub gamma_se_est: f64,
    pub beta: f64,
    /// `G/(1 + G)`; 1 when `G` is infinite.
    pub omega: f64,
    /// EE gap `G = (gamma_UB - gamma_SE)/(gamma_SE - gamma_LB)`.
    pub gap: f64,
    pub clamp: BandClamp,
    pub det_equiv: DetEquivParams,
}

/// Places `P_prop = omega·P_LB + (1 - omega)·P_UB` where the estimated
/// SE-max EE `beta·gamma_RZF` sits between `gamma_LB` and `gamma_UB`.
pub fn interpolate(inputs: BandInputs, det_equiv: DetEquivParams) -> Result<SaturationBand> {
    let BandInputs {
        p_lb,
        p_ub,
        p_rzf,
        gamma_lb,
        gamma_ub,
        gamma_rzf,
        beta,
    } = inputs;
    if !(gamma_ub > gamma_lb) {
        return Err(Error::InvalidBand { gamma_lb, gamma_ub });
    }
    let raw = beta * gamma_rzf;
    let (gamma_se_est, gap, omega, clamp) = if raw >= gamma_ub {
        (gamma_ub, 0.0, 0.0, BandClamp::Upper)
    } else if raw <= gamma_lb {
        (gamma_lb, f64::INFINITY, 1.0, BandClamp::Lower)
    } else {
        let gap = (gamma_ub - raw) / (raw - gamma_lb);
        (raw, gap, gap / (1.0 + gap), BandClamp::None)
    };
    let p_prop = match clamp {
        BandClamp::Upper => p_ub,
        BandClamp::Lower => p_lb,
        BandClamp::None => omega * p_lb + (1.0 - omega) * p_ub,
    };
    Ok(SaturationBand {
        p_lb,
        p_ub,
        p_rzf,
        p_prop,
        gamma_lb,
        gamma_ub,
        gamma_rzf,
        gamma_se_est,
        beta,
        omega,
        gap,
        clamp,
        det_equiv,
    })
}

/// Deterministic equivalents from the backend selected in `cfg`.
pub fn det_equiv_for(cfg: &SystemConfig, alpha: f64) -> Result<DetEquivParams> {
    match cfg.det_equiv {
        DetEquivBackend::Analytic => det_equiv_rzf(cfg.load_ratio(), alpha),
        DetEquivBackend::Empirical => {
            det_equiv_rzf_empirical(EMPIRICAL_ANTENNAS, cfg.load_ratio(), alpha)
        }
    }
}

/// RZF deterministic equivalents and saturation power used by the band.
///
/// With a configured `rzf_alpha` this is a single evaluation. Otherwise the
/// regularizer is the MMSE loading `N·n0/(M·P)` evaluated at the RZF
/// saturation power itself, found by iterating `P -> p_rzf(alpha(P))`.
pub fn rzf_operating_point(cfg: &SystemConfig, sc: &Scenario) -> Result<(DetEquivParams, f64)> {
    if let Some(alpha) = cfg.rzf_alpha {
        let de = det_equiv_for(cfg, alpha)?;
        let p = p_rzf(sc, &de)?;
        return Ok((de, p));
    }
    let mmse = |p: f64| sc.n() * sc.n0() / (sc.m() * p);
    let mut p = (p_lb(sc) * p_ub(sc)?).sqrt();
    for _ in 0..200 {
        let de = det_equiv_for(cfg, mmse(p))?;
        let next = p_rzf(sc, &de)?;
        if ((next / p).ln()).abs() <= 1e-10 {
            let de = det_equiv_for(cfg, mmse(next))?;
            let p_final = p_rzf(sc, &de)?;
            return Ok((de, p_final));
        }
        // geometric damping
        p = (p * next).sqrt();
    }
    Err(Error::Numerical(
        "self-consistent RZF regularizer did not settle".into(),
    ))
}

/// Full saturation band for a configuration.
pub fn compute_band(cfg: &SystemConfig) -> Result<SaturationBand> {
    let sc = Scenario::from_config(cfg)?;
    let p_lb = p_lb(&sc);
    let p_ub = p_ub(&sc)?;
    let (de, p_rzf) = rzf_operating_point(cfg, &sc)?;
    let inputs = BandInputs {
        p_lb,
        p_ub,
        p_rzf,
        gamma_lb: asympt::ee_lower_bound(p_lb, &sc),
        gamma_ub: asympt::ee_upper_bound(p_ub, &sc),
        gamma_rzf: asympt::ee_rzf_asymptotic(p_rzf, &sc, &de),
        beta: cfg.beta,
    };
    interpolate(inputs, de)
}

/// Proposed scheme: one WMMSE sum-rate maximization at `min(P_prop, P)`.
pub fn proposed_scheme(
    h: &ChannelRealization,
    n0: f64,
    p_budget: f64,
    band: &SaturationBand,
    opts: &WmmseOptions,
) -> Result<WmmseOutcome> {
    wmmse(h, n0, p_budget.min(band.p_prop), opts)
}
