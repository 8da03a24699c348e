//! Large-system SINR and EE curves.
//!
//! With i.i.d. unit-variance channels and equal power `P/N` per user, MRT
//! gains concentrate (`|h_k^H v_k|^2 ≈ M`, `|h_k^H v_j|^2 ≈ 1`), giving a
//! channel-free SINR. Its rate is sandwiched between `R_LB` (from
//! `ln(1+x) <= x`) and the interference-free `R_UB`. RZF is described by the
//! deterministic-equivalent triple `(m, Γ, Ψ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::beamform;
use crate::channel::generate_dims;
use crate::error::{Error, Result};
use crate::sysmodel::Scenario;

pub fn sinr_mrt_asymptotic(p: f64, sc: &Scenario) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    sc.m() * p / ((sc.n() - 1.0) * p + sc.n() * sc.n0())
}

/// `N·ln(1 + SINR°_MRT)`.
pub fn rate_mrt_asymptotic(p: f64, sc: &Scenario) -> f64 {
    sc.n() * sinr_mrt_asymptotic(p, sc).ln_1p()
}

pub fn ee_mrt_asymptotic(p: f64, sc: &Scenario) -> f64 {
    rate_mrt_asymptotic(p, sc) / sc.consumed(p.max(0.0))
}

/// `R_LB = N·M·P / ((N + M - 1)·P + N·n0)`.
pub fn rate_lower_bound(p: f64, sc: &Scenario) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    sc.n() * sc.m() * p / ((sc.n() + sc.m() - 1.0) * p + sc.n() * sc.n0())
}

pub fn ee_lower_bound(p: f64, sc: &Scenario) -> f64 {
    rate_lower_bound(p, sc) / sc.consumed(p.max(0.0))
}

/// `R_UB = N·ln(1 + M·P / (N·n0))`.
pub fn rate_upper_bound(p: f64, sc: &Scenario) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    sc.n() * (sc.m() * p / (sc.n() * sc.n0())).ln_1p()
}

pub fn ee_upper_bound(p: f64, sc: &Scenario) -> f64 {
    rate_upper_bound(p, sc) / sc.consumed(p.max(0.0))
}

/// Deterministic equivalents of RZF with regularizer `alpha` at load `N/M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetEquivParams {
    pub m0: f64,
    pub gamma0: f64,
    pub psi0: f64,
    pub alpha: f64,
    pub ratio: f64,
}

impl DetEquivParams {
    /// `SINR° = m² / (Γ + (Ψ/ρ)(1 + m)²)` with `ρ = P/n0`.
    pub fn sinr(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        let m = self.m0;
        m * m / (self.gamma0 + self.psi0 / rho * (1.0 + m) * (1.0 + m))
    }

    /// `|m - 1/(alpha + c/(1+m))|`, the defining fixed-point residual.
    pub fn residual(&self) -> f64 {
        (self.m0 - stieltjes_map(self.m0, self.alpha, self.ratio)).abs()
    }

    /// `A = Ψ(1 + m)²·n0`.
    pub fn noise_term(&self, n0: f64) -> f64 {
        self.psi0 * (1.0 + self.m0) * (1.0 + self.m0) * n0
    }
}

fn stieltjes_map(m: f64, alpha: f64, ratio: f64) -> f64 {
    1.0 / (alpha + ratio / (1.0 + m))
}

/// Analytic deterministic equivalents for i.i.d. channels.
///
/// `m` is the fixed point of `m = 1/(alpha + c/(1+m))`, `c = N/M`, found by
/// Newton steps on `m·(alpha + c/(1+m)) - 1` from `m = 0`. The residual is
/// concave and increasing, so the iterates climb monotonically to the root.
/// `Γ` and `Ψ` follow from `m' = -dm/dalpha`:
/// `Γ = m - alpha·m'` and `Ψ = c·m'/(1+m)²`, which coincide for i.i.d.
/// channels and are evaluated in the cancellation-free form
/// `c·m² / ((1+m)² - c·m²)`.
pub fn det_equiv_rzf(ratio: f64, alpha: f64) -> Result<DetEquivParams> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("RZF regularizer must be > 0, got {alpha}")));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(Error::Domain(format!("load ratio must be > 0, got {ratio}")));
    }
    let mut m = 0.0f64;
    let mut converged = false;
    for _ in 0..200 {
        let g = m * (alpha + ratio / (1.0 + m)) - 1.0;
        let dg = alpha + ratio / ((1.0 + m) * (1.0 + m));
        let next = m - g / dg;
        let step = (next - m).abs();
        m = next;
        if step <= 1e-15 * m.max(1e-300) {
            converged = true;
            break;
        }
    }
    let residual = (m - stieltjes_map(m, alpha, ratio)).abs();
    if !converged && residual > 1e-10 * m.max(1.0) {
        return Err(Error::Numerical(format!(
            "deterministic-equivalent fixed point did not converge (alpha = {alpha:e})"
        )));
    }
    let opm2 = (1.0 + m) * (1.0 + m);
    let psi = ratio * m * m / (opm2 - ratio * m * m);
    let params = DetEquivParams {
        m0: m,
        gamma0: psi,
        psi0: psi,
        alpha,
        ratio,
    };
    if !(m > 0.0 && psi > 0.0 && m.is_finite() && psi.is_finite()) {
        return Err(Error::Numerical("non-positive deterministic equivalents".into()));
    }
    Ok(params)
}

/// Antenna count of the realization used by [`det_equiv_rzf_empirical`].
pub const EMPIRICAL_ANTENNAS: usize = 256;
const EMPIRICAL_SEED: u64 = 0x5a7e_e000;

/// Deterministic equivalents measured on one large channel realization.
///
/// `m` is the mean of `t_k/(1 - t_k)` with `t_k = x_k^H (X^H X + alpha I)^{-1} x_k`
/// (`x_k = h_k/sqrt(M)`). `Γ` and `Ψ` are then fitted so that
/// `m²/(Γ + Ψ(1+m)²/ρ)` reproduces the measured average signal power,
/// interference power and noise normalization of unit-norm RZF beams.
pub fn det_equiv_rzf_empirical(antennas: usize, ratio: f64, alpha: f64) -> Result<DetEquivParams> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("RZF regularizer must be > 0, got {alpha}")));
    }
    let users = ((ratio * antennas as f64).round() as usize).max(1);
    let h = generate_dims(antennas, users, EMPIRICAL_SEED, 0)?;
    let mf = antennas as f64;
    let c = users as f64 / mf;

    // C = X X^H + alpha I with X = H / sqrt(M)
    let x = beamform::channel_matrix(&h).unscale(mf.sqrt());
    let mut gram = &x * x.adjoint();
    for i in 0..antennas {
        gram[(i, i)] += Complex64::new(alpha, 0.0);
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("regularized Gram matrix not positive definite".into()))?;
    let w: DMatrix<Complex64> = chol.solve(&x);

    let mut m_acc = 0.0;
    for k in 0..users {
        let t = x.column(k).dotc(&w.column(k)).re;
        m_acc += t / (1.0 - t);
    }
    let m = m_acc / users as f64;

    let dirs = beamform::rzf(&h, alpha)?;
    let gains = beamform::gain_matrix(&h, &dirs);
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (k, row) in gains.iter().enumerate() {
        signal += row[k];
        interference += row.iter().sum::<f64>() - row[k];
    }
    let signal = signal / (users as f64 * mf);
    let interference = interference / (users as f64 * mf);

    // SINR = s/(i + c/ρ) = m²/(Γ + Ψ(1+m)²/ρ)
    let scale = m * m / signal;
    let gamma = interference * scale;
    let psi = c * scale / ((1.0 + m) * (1.0 + m));
    if !(m > 0.0 && gamma > 0.0 && psi > 0.0 && m.is_finite()) {
        return Err(Error::Numerical("empirical deterministic equivalents degenerate".into()));
    }
    Ok(DetEquivParams {
        m0: m,
        gamma0: gamma,
        psi0: psi,
        alpha,
        ratio,
    })
}

pub fn sinr_rzf_asymptotic(p: f64, sc: &Scenario, de: &DetEquivParams) -> f64 {
    de.sinr(p / sc.n0())
}

pub fn rate_rzf_asymptotic(p: f64, sc: &Scenario, de: &DetEquivParams) -> f64 {
    sc.n() * sinr_rzf_asymptotic(p, sc, de).ln_1p()
}

/// `N·ln(1 + m²P/(ΓP + A)) / (xi·P + P_const)`.
pub fn ee_rzf_asymptotic(p: f64, sc: &Scenario, de: &DetEquivParams) -> f64 {
    rate_rzf_asymptotic(p, sc, de) / sc.consumed(p.max(0.0))
}
