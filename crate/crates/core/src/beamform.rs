//! Instantaneous-CSI beamformers and exact SINR / rate / EE evaluation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::sysmodel::{energy_efficiency, DerivedPowerModel};

/// Unit-norm directions `v_k` with per-user powers `p_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingSolution {
    pub v: Vec<DVector<Complex64>>,
    pub p: Vec<f64>,
}

impl BeamformingSolution {
    /// Splits un-normalized beamformers `b_k = sqrt(p_k) v_k`. A zero beam
    /// keeps a zero direction and zero power.
    pub fn from_beams(beams: &[DVector<Complex64>]) -> Self {
        let mut v = Vec::with_capacity(beams.len());
        let mut p = Vec::with_capacity(beams.len());
        for b in beams {
            let norm_sq = b.norm_squared();
            if norm_sq > 0.0 {
                v.push(b.unscale(norm_sq.sqrt()));
            } else {
                v.push(b.clone());
            }
            p.push(norm_sq);
        }
        Self { v, p }
    }

    pub fn beams(&self) -> Vec<DVector<Complex64>> {
        self.v
            .iter()
            .zip(&self.p)
            .map(|(v, &p)| v.scale(p.sqrt()))
            .collect()
    }

    /// `sum_k p_k ||v_k||^2`.
    pub fn transmit_power(&self) -> f64 {
        self.v
            .iter()
            .zip(&self.p)
            .map(|(v, &p)| p * v.norm_squared())
            .sum()
    }
}

/// Equal split `p_k = P/N` over the given directions.
pub fn equal_power(directions: Vec<DVector<Complex64>>, p_total: f64) -> BeamformingSolution {
    let share = p_total / directions.len() as f64;
    let p = vec![share; directions.len()];
    BeamformingSolution { v: directions, p }
}

/// Maximal ratio transmission, `v_k = h_k / ||h_k||`.
pub fn mrt(h: &ChannelRealization) -> Result<Vec<DVector<Complex64>>> {
    h.h.iter()
        .enumerate()
        .map(|(k, hk)| {
            let n = hk.norm();
            if n > 0.0 && n.is_finite() {
                Ok(hk.unscale(n))
            } else {
                Err(Error::DegenerateChannel { user: k })
            }
        })
        .collect()
}

/// MMSE-style regularizer N/(M·rho) with rho = P/n0.
pub fn mmse_alpha(antennas: usize, users: usize, p_total: f64, n0: f64) -> f64 {
    users as f64 * n0 / (antennas as f64 * p_total)
}

/// Regularized zero forcing, `v_k ∝ (sum_j h_j h_j^H + M·alpha·I)^{-1} h_k`.
pub fn rzf(h: &ChannelRealization, alpha: f64) -> Result<Vec<DVector<Complex64>>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Domain(format!("RZF regularizer must be > 0, got {alpha}")));
    }
    let m = h.antennas();
    let hmat = channel_matrix(h);
    let load = Complex64::new(m as f64 * alpha, 0.0);
    let not_pd = || Error::Numerical("regularized Gram matrix not positive definite".into());
    // (H H^H + aI)^{-1} H = H (H^H H + aI)^{-1}; factor the smaller Gram so
    // that a tiny regularizer stays well conditioned
    let solved = if h.users() < m {
        let mut gram = hmat.adjoint() * &hmat;
        for i in 0..h.users() {
            gram[(i, i)] += load;
        }
        let inv = gram.cholesky().ok_or_else(not_pd)?.inverse();
        &hmat * inv
    } else {
        let mut gram = &hmat * hmat.adjoint();
        for i in 0..m {
            gram[(i, i)] += load;
        }
        gram.cholesky().ok_or_else(not_pd)?.solve(&hmat)
    };
    solved
        .column_iter()
        .enumerate()
        .map(|(k, col)| {
            let n = col.norm();
            if n > 0.0 && n.is_finite() {
                Ok(col.unscale(n))
            } else {
                Err(Error::DegenerateChannel { user: k })
            }
        })
        .collect()
}

/// `M x N` matrix whose k-th column is `h_k`.
pub fn channel_matrix(h: &ChannelRealization) -> DMatrix<Complex64> {
    DMatrix::from_columns(&h.h)
}

/// `gains[k][j] = |h_k^H v_j|^2`.
pub fn gain_matrix(h: &ChannelRealization, v: &[DVector<Complex64>]) -> Vec<Vec<f64>> {
    h.h.iter()
        .map(|hk| v.iter().map(|vj| hk.dotc(vj).norm_sqr()).collect())
        .collect()
}

/// Per-user SINR for the given beams and powers.
pub fn sinr(h: &ChannelRealization, sol: &BeamformingSolution, n0: f64) -> Vec<f64> {
    let gains = gain_matrix(h, &sol.v);
    gains
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let signal = row[k] * sol.p[k];
            let interference: f64 = row
                .iter()
                .zip(&sol.p)
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, (g, p))| g * p)
                .sum();
            signal / (interference + n0)
        })
        .collect()
}

/// `sum_k ln(1 + SINR_k)` in nats/s/Hz.
pub fn sum_rate(sinrs: &[f64]) -> f64 {
    sinrs.iter().map(|s| s.ln_1p()).sum()
}

pub fn instantaneous_ee(
    h: &ChannelRealization,
    sol: &BeamformingSolution,
    pm: &DerivedPowerModel,
) -> Result<f64> {
    let rate = sum_rate(&sinr(h, sol, pm.n0));
    energy_efficiency(rate, pm.total_power(sol.transmit_power())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_dims;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn realization(vs: Vec<Vec<Complex64>>) -> ChannelRealization {
        ChannelRealization::from_vectors(vs.into_iter().map(DVector::from_vec).collect()).unwrap()
    }

    fn angle(a: &DVector<Complex64>, b: &DVector<Complex64>) -> f64 {
        let cos = a.dotc(b).norm() / (a.norm() * b.norm());
        cos.min(1.0).acos()
    }

    #[test]
    fn mrt_normalizes() {
        let h = realization(vec![vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]]);
        let v = mrt(&h).unwrap();
        assert_eq!(v[0], DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]));
    }

    #[test]
    fn mrt_attains_channel_gain() {
        let h = generate_dims(4, 3, 7, 0).unwrap();
        let v = mrt(&h).unwrap();
        for (hk, vk) in h.h.iter().zip(&v) {
            let g = hk.dotc(vk).norm_sqr();
            assert!((g - hk.norm_squared()).abs() < 1e-12 * g);
        }
        let scalar = realization(vec![vec![c(0.3, -0.4)]]);
        let v = mrt(&scalar).unwrap();
        assert!((v[0][0] - c(0.6, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn mrt_rejects_zero_channel() {
        let h = realization(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]]);
        assert_eq!(mrt(&h), Err(Error::DegenerateChannel { user: 1 }));
    }

    #[test]
    fn rzf_single_user_is_mrt() {
        let h = generate_dims(5, 1, 2, 0).unwrap();
        let a = rzf(&h, 1e-3).unwrap();
        let b = mrt(&h).unwrap();
        assert!(angle(&a[0], &b[0]) < 1e-7);
    }

    #[test]
    fn rzf_large_alpha_tends_to_mrt() {
        let h = generate_dims(4, 3, 2, 0).unwrap();
        let b = mrt(&h).unwrap();
        let small = rzf(&h, 1e2).unwrap();
        let large = rzf(&h, 1e8).unwrap();
        for k in 0..3 {
            assert!(angle(&large[k], &b[k]) < 1e-6);
            assert!(angle(&large[k], &b[k]) < angle(&small[k], &b[k]) + 1e-12);
        }
    }

    #[test]
    fn rzf_orthogonal_channels_are_mrt() {
        let h = realization(vec![
            vec![c(0.0, 1.5), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.7, 0.7), c(0.0, 0.0)],
        ]);
        let a = rzf(&h, 0.01).unwrap();
        let b = mrt(&h).unwrap();
        for k in 0..2 {
            assert!(angle(&a[k], &b[k]) < 1e-12);
            assert!((a[k].norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rzf_rejects_nonpositive_alpha() {
        let h = generate_dims(2, 2, 0, 0).unwrap();
        assert!(matches!(rzf(&h, 0.0), Err(Error::Domain(_))));
        assert!(matches!(rzf(&h, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sinr_edge_cases() {
        let h = generate_dims(3, 3, 4, 0).unwrap();
        let zero = equal_power(mrt(&h).unwrap(), 0.0);
        assert!(sinr(&h, &zero, 1.0).iter().all(|&s| s == 0.0));
        assert_eq!(sum_rate(&sinr(&h, &zero, 1.0)), 0.0);

        let single = generate_dims(3, 1, 4, 0).unwrap();
        let sol = equal_power(mrt(&single).unwrap(), 2.0);
        let s = sinr(&single, &sol, 0.5);
        let expect = single.h[0].norm_squared() * 2.0 / 0.5;
        assert!((s[0] - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn rate_examples() {
        assert!((sum_rate(&[std::f64::consts::E - 1.0]) - 1.0).abs() < 1e-15);
        assert!(sum_rate(&[1.0, 2.0]) < sum_rate(&[1.0, 2.5]));
    }

    #[test]
    fn zero_power_ee_is_zero() {
        let pm = crate::sysmodel::derive_power_model(&crate::sysmodel::SystemConfig::reference())
            .unwrap();
        let h = generate_dims(3, 3, 4, 0).unwrap();
        let sol = equal_power(mrt(&h).unwrap(), 0.0);
        assert_eq!(instantaneous_ee(&h, &sol, &pm).unwrap(), 0.0);
    }

    #[test]
    fn beams_split_roundtrip() {
        let h = generate_dims(3, 2, 4, 1).unwrap();
        let sol = BeamformingSolution {
            v: mrt(&h).unwrap(),
            p: vec![0.25, 1.5],
        };
        let back = BeamformingSolution::from_beams(&sol.beams());
        for k in 0..2 {
            assert!((back.p[k] - sol.p[k]).abs() < 1e-14);
            assert!((&back.v[k] - &sol.v[k]).norm() < 1e-14);
        }
        assert!((sol.transmit_power() - 1.75).abs() < 1e-14);
    }

    #[test]
    fn rzf_beats_mrt_at_high_power() {
        let (m, n) = (4, 4);
        let p = 1e3;
        let n0 = 1.0;
        let mut wins = 0;
        let trials = 100;
        for t in 0..trials {
            let h = generate_dims(m, n, 11, t).unwrap();
            let r_mrt = sum_rate(&sinr(&h, &equal_power(mrt(&h).unwrap(), p), n0));
            let dirs = rzf(&h, mmse_alpha(m, n, p, n0)).unwrap();
            let r_rzf = sum_rate(&sinr(&h, &equal_power(dirs, p), n0));
            if r_rzf >= r_mrt {
                wins += 1;
            }
        }
        assert!(wins >= 90, "RZF won {wins}/{trials}");
    }

    proptest! {
        #[test]
        fn mrt_maximizes_own_gain(seed in 0u64..1000, re in prop::collection::vec(-1.0f64..1.0, 8)) {
            let h = generate_dims(4, 1, seed, 0).unwrap();
            let u = DVector::from_fn(4, |i, _| c(re[2 * i], re[2 * i + 1]));
            prop_assume!(u.norm() > 1e-3);
            let u = u.unscale(u.norm());
            let v = mrt(&h).unwrap();
            prop_assert!(h.h[0].dotc(&u).norm_sqr() <= h.h[0].dotc(&v[0]).norm_sqr() * (1.0 + 1e-12));
        }

        #[test]
        fn sinr_phase_invariant(seed in 0u64..1000, phase in 0.0f64..6.3, k in 0usize..3) {
            let h = generate_dims(3, 3, seed, 0).unwrap();
            let sol = equal_power(mrt(&h).unwrap(), 5.0);
            let mut rotated = sol.clone();
            rotated.v[k] *= Complex64::from_polar(1.0, phase);
            let a = sinr(&h, &sol, 1.0);
            let b = sinr(&h, &rotated, 1.0);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
            }
        }
    }
}
