use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::beamform::{self, BeamformingSolution};
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::scalar::bisect_log;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmmseOptions {
    /// Stop when the objective moves less than `tol` times the sum rate.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for WmmseOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_iter: 200,
        }
    }
}

/// Block-coordinate iterate: beams `b_k = sqrt(p_k) v_k`, receive scalars
/// `u_k`, MSE weights `w_k`. Beams are stored scaled by `1/sqrt(n0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WmmseState {
    pub b: Vec<DVector<Complex64>>,
    pub u: Vec<Complex64>,
    pub w: Vec<f64>,
    pub iteration: usize,
    /// `sum_k ln(1 + SINR_k) - penalty·sum_k ||b_k||^2`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WmmseOutcome {
    pub solution: BeamformingSolution,
    pub sum_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective before the first update and after every iteration.
    pub history: Vec<f64>,
}

/// WMMSE sum-rate maximization under `sum_k p_k <= p_budget`, started from
/// equal-power RZF with the MMSE regularizer.
pub fn wmmse(
    h: &ChannelRealization,
    n0: f64,
    p_budget: f64,
    opts: &WmmseOptions,
) -> Result<WmmseOutcome> {
    weighted_mmse(h, n0, p_budget, 0.0, None, opts)
}

/// WMMSE for `max sum_k R_k - penalty·sum_k p_k` under the power budget.
///
/// `penalty` is in rate per unit power (W/Hz); zero gives plain sum-rate
/// maximization. `init` beams (physical units) replace the RZF start.
pub fn weighted_mmse(
    h: &ChannelRealization,
    n0: f64,
    p_budget: f64,
    penalty: f64,
    init: Option<&[DVector<Complex64>]>,
    opts: &WmmseOptions,
) -> Result<WmmseOutcome> {
    if !(p_budget.is_finite() && p_budget > 0.0) {
        return Err(Error::Domain(format!("power budget must be > 0, got {p_budget}")));
    }
    if !(n0 > 0.0) {
        return Err(Error::Domain("noise density must be > 0".into()));
    }
    // noise-normalized units: unit noise, budget P/n0, penalty·n0
    let budget = p_budget / n0;
    let pen = penalty * n0;
    let scale = n0.sqrt();

    let b0 = match init {
        Some(beams) => {
            if beams.len() != h.users() {
                return Err(Error::Domain("initial beams do not match user count".into()));
            }
            let mut b: Vec<_> = beams.iter().map(|b| b.unscale(scale)).collect();
            let power: f64 = b.iter().map(|v| v.norm_squared()).sum();
            if power > budget {
                let s = (budget / power).sqrt();
                b.iter_mut().for_each(|v| *v *= Complex64::new(s, 0.0));
            }
            b
        }
        None => {
            // RZF with the MMSE regularizer N/(M·budget), equal power
            let share = (budget / h.users() as f64).sqrt();
            let alpha = beamform::mmse_alpha(h.antennas(), h.users(), budget, 1.0);
            beamform::rzf(h, alpha)?
                .into_iter()
                .map(|v| v.scale(share))
                .collect()
        }
    };

    let mut state = WmmseState {
        objective: objective(h, &b0, pen),
        b: b0,
        u: vec![Complex64::new(0.0, 0.0); h.users()],
        w: vec![1.0; h.users()],
        iteration: 0,
    };
    let mut history = vec![state.objective];
    let mut converged = false;
    while state.iteration < opts.max_iter {
        step(h, &mut state, budget, pen)?;
        let prev = *history.last().unwrap();
        history.push(state.objective);
        let rate = state.objective + pen * total_power(&state.b);
        if (state.objective - prev).abs() <= opts.tol * rate.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    let beams: Vec<_> = state.b.iter().map(|b| b.scale(scale)).collect();
    let solution = BeamformingSolution::from_beams(&beams);
    let sum_rate = beamform::sum_rate(&beamform::sinr(h, &solution, n0));
    Ok(WmmseOutcome {
        solution,
        sum_rate,
        iterations: state.iteration,
        converged,
        history,
    })
}

fn total_power(b: &[DVector<Complex64>]) -> f64 {
    b.iter().map(|v| v.norm_squared()).sum()
}

/// Rate minus power penalty, unit noise.
fn objective(h: &ChannelRealization, b: &[DVector<Complex64>], pen: f64) -> f64 {
    let mut rate = 0.0;
    for (k, hk) in h.h.iter().enumerate() {
        let mut signal = 0.0;
        let mut total = 1.0;
        for (j, bj) in b.iter().enumerate() {
            let g = hk.dotc(bj).norm_sqr();
            total += g;
            if j == k {
                signal = g;
            }
        }
        rate += (signal / (total - signal)).ln_1p();
    }
    rate - pen * total_power(b)
}

/// One pass of receive-scalar, weight and beamformer updates.
fn step(h: &ChannelRealization, st: &mut WmmseState, budget: f64, pen: f64) -> Result<()> {
    let m = h.antennas();
    for (k, hk) in h.h.iter().enumerate() {
        let own = hk.dotc(&st.b[k]);
        let total: f64 = 1.0 + st.b.iter().map(|bj| hk.dotc(bj).norm_sqr()).sum::<f64>();
        st.u[k] = own / total;
        // 1/(1 - conj(u) h^H b) = total / (total - |h^H b|^2)
        st.w[k] = total / (total - own.norm_sqr());
    }

    let mut a = DMatrix::<Complex64>::zeros(m, m);
    for (j, hj) in h.h.iter().enumerate() {
        let coef = st.w[j] * st.u[j].norm_sqr();
        a.ger(Complex64::new(coef, 0.0), hj, &hj.conjugate(), Complex64::new(1.0, 0.0));
    }
    let eig = SymmetricEigen::new(a);
    let ut = eig.eigenvectors.adjoint();
    let d: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let dmax = d.iter().cloned().fold(0.0, f64::max);
    let floor = 1e-13 * dmax.max(f64::MIN_POSITIVE);

    // right-hand sides in the eigenbasis
    let rhs: Vec<DVector<Complex64>> = h
        .h
        .iter()
        .enumerate()
        .map(|(k, hk)| &ut * hk.scale(st.w[k]) * st.u[k])
        .collect();
    let weights: Vec<Vec<f64>> = rhs
        .iter()
        .map(|c| c.iter().map(|x| x.norm_sqr()).collect())
        .collect();
    let power_at = |mu: f64| -> f64 {
        let mut p = 0.0;
        for wk in &weights {
            for (i, &ci) in wk.iter().enumerate() {
                let den = d[i] + pen + mu;
                if den > floor {
                    p += ci / (den * den);
                }
            }
        }
        p
    };

    let mut mu = 0.0;
    if power_at(0.0) > budget {
        // power(mu) <= sum ||c||^2 / mu^2
        let c_norm: f64 = weights.iter().flatten().sum();
        let mut hi = (c_norm / budget).sqrt().max(f64::MIN_POSITIVE);
        while power_at(hi) > budget {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            if budget - power_at(hi) <= 1e-10 * budget {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if power_at(mid) > budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        mu = hi;
    }

    let v = &eig.eigenvectors;
    for (k, c) in rhs.iter().enumerate() {
        let scaled = DVector::from_fn(m, |i, _| {
            let den = d[i] + pen + mu;
            if den > floor {
                c[i] / den
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        st.b[k] = v * scaled;
    }
    if pen > 0.0 {
        rescale(h, &mut st.b, budget, pen)?;
    }
    st.iteration += 1;
    st.objective = objective(h, &st.b, pen);
    if !st.objective.is_finite() {
        return Err(Error::Numerical("WMMSE objective is not finite".into()));
    }
    Ok(())
}

/// Exact maximization of the penalized objective over a common power scale
/// `t`, `b_k -> sqrt(t)·b_k`, with `t·||b||^2 <= budget`.
///
/// The block updates shrink the total power only by a factor close to
/// `1 + pen/|h|^2` per pass, which stalls at high SNR. Along the scale ray
/// each rate is `ln(1 + t·T_k) - ln(1 + t·I_k)` with `T_k = S_k + I_k`, whose
/// derivative `(T_k - I_k)/((1 + t·T_k)(1 + t·I_k))` is positive and
/// decreasing, so the objective is concave in `t` and the step never
/// decreases it.
fn rescale(h: &ChannelRealization, b: &mut [DVector<Complex64>], budget: f64, pen: f64) -> Result<()> {
    let power = total_power(b);
    if !(power > 0.0) {
        return Ok(());
    }
    let mut terms = Vec::with_capacity(h.users());
    for (k, hk) in h.h.iter().enumerate() {
        let mut signal = 0.0;
        let mut interference = 0.0;
        for (j, bj) in b.iter().enumerate() {
            let g = hk.dotc(bj).norm_sqr();
            if j == k {
                signal = g;
            } else {
                interference += g;
            }
        }
        terms.push((signal + interference, interference));
    }
    let slope = |t: f64| -> f64 {
        terms
            .iter()
            .map(|&(tot, i)| (tot - i) / ((1.0 + t * tot) * (1.0 + t * i)))
            .sum::<f64>()
            - pen * power
    };
    let t_max = budget / power;
    let t_lo = t_max * 1e-30;
    let t = if slope(t_max) >= 0.0 {
        t_max
    } else if slope(t_lo) <= 0.0 {
        t_lo
    } else {
        bisect_log(slope, t_lo, t_max, 1e-12)?
    };
    let s = Complex64::new(t.sqrt(), 0.0);
    b.iter_mut().for_each(|v| *v *= s);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamform::{equal_power, mrt, sinr, sum_rate};
    use crate::channel::generate_dims;

    #[test]
    fn single_user_is_full_power_mrt() {
        let h = generate_dims(4, 1, 3, 0).unwrap();
        let out = wmmse(&h, 1.0, 10.0, &WmmseOptions::default()).unwrap();
        assert!(out.iterations <= 2);
        let v = &mrt(&h).unwrap()[0];
        let cos = out.solution.v[0].dotc(v).norm();
        assert!((cos - 1.0).abs() < 1e-10);
        assert!((out.solution.p[0] - 10.0).abs() < 1e-8);
    }

    #[test]
    fn feasible_and_monotone() {
        for t in 0..20 {
            let h = generate_dims(3, 3, 8, t).unwrap();
            let out = wmmse(&h, 1e-3, 1.0, &WmmseOptions::default()).unwrap();
            assert!(out.solution.transmit_power() <= 1.0 * (1.0 + 1e-10));
            for pair in out.history.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-9);
            }
        }
    }

    #[test]
    fn beats_equal_power_mrt() {
        let h = generate_dims(3, 3, 2, 5).unwrap();
        let out = wmmse(&h, 1.0, 100.0, &WmmseOptions::default()).unwrap();
        let base = sum_rate(&sinr(&h, &equal_power(mrt(&h).unwrap(), 100.0), 1.0));
        assert!(out.sum_rate >= base);
    }

    #[test]
    fn orthogonal_channels_beat_any_power_split() {
        let c = |x: f64| Complex64::new(x, 0.0);
        let h = ChannelRealization::from_vectors(vec![
            DVector::from_vec(vec![c(2.0), c(0.0)]),
            DVector::from_vec(vec![c(0.0), c(0.5)]),
        ])
        .unwrap();
        let budget = 1.0;
        let opts = WmmseOptions {
            tol: 1e-12,
            max_iter: 2000,
        };
        let out = wmmse(&h, 1.0, budget, &opts).unwrap();
        // brute force over splits with MRT directions
        let dirs = mrt(&h).unwrap();
        let mut best = 0.0f64;
        for i in 0..=10_000 {
            let p1 = budget * i as f64 / 10_000.0;
            let sol = BeamformingSolution {
                v: dirs.clone(),
                p: vec![p1, budget - p1],
            };
            best = best.max(sum_rate(&sinr(&h, &sol, 1.0)));
        }
        assert!(out.sum_rate >= best - 1e-6, "{} vs {}", out.sum_rate, best);
        let eq = sum_rate(&sinr(&h, &equal_power(dirs, budget), 1.0));
        assert!(out.sum_rate >= eq);
    }

    #[test]
    fn penalty_leaves_budget_slack() {
        let h = generate_dims(3, 3, 1, 0).unwrap();
        let out = weighted_mmse(&h, 1.0, 1e6, 0.5, None, &WmmseOptions::default()).unwrap();
        assert!(out.solution.transmit_power() < 1e6 * 0.5);
    }

    #[test]
    fn single_user_penalty_reaches_closed_form_power() {
        // max ln(1 + g·p) - pen·p  =>  p = 1/pen - 1/g
        let h = generate_dims(3, 1, 9, 0).unwrap();
        let g = h.h[0].norm_squared();
        let n0 = 1e-20;
        let pen = 0.01;
        let expect = (1.0 / pen - 1.0 / g) * n0;
        let out = weighted_mmse(&h, n0, 1e-6, pen / n0, None, &WmmseOptions::default()).unwrap();
        let p = out.solution.transmit_power();
        assert!((p / expect - 1.0).abs() < 1e-6, "{p:e} vs {expect:e}");
        assert!(out.iterations < 10);
    }

    #[test]
    fn rejects_bad_budget() {
        let h = generate_dims(2, 2, 1, 0).unwrap();
        assert!(wmmse(&h, 1.0, 0.0, &WmmseOptions::default()).is_err());
    }
}
