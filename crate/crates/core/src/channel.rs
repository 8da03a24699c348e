//! Seeded i.i.d. Rayleigh channel realizations.
//!
//! Each trial gets its own ChaCha20 stream keyed by `(seed, trial_index)`, so
//! a realization never depends on which trials were drawn before it.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::sysmodel::SystemConfig;

/// Channel vectors `h_k` (length M) for all N users.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: Vec<DVector<Complex64>>,
    pub seed: u64,
    pub trial_index: u64,
}

impl ChannelRealization {
    /// Wraps explicit channel vectors. All vectors must share one length.
    pub fn from_vectors(h: Vec<DVector<Complex64>>) -> Result<Self> {
        let m = h.first().map(|v| v.len()).unwrap_or(0);
        if h.is_empty() || m == 0 || h.iter().any(|v| v.len() != m) {
            return Err(Error::Domain(
                "channel needs at least one user and equal-length vectors".into(),
            ));
        }
        Ok(Self {
            h,
            seed: 0,
            trial_index: 0,
        })
    }

    pub fn antennas(&self) -> usize {
        self.h[0].len()
    }

    pub fn users(&self) -> usize {
        self.h.len()
    }
}

/// Draws CN(0, 1) entries for an `antennas x users` channel.
pub fn generate_dims(
    antennas: usize,
    users: usize,
    seed: u64,
    trial_index: u64,
) -> Result<ChannelRealization> {
    if antennas == 0 || users == 0 {
        return Err(Error::Config("M and N must be at least 1".into()));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let h = (0..users)
        .map(|_| {
            DVector::from_fn(antennas, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
        })
        .collect();
    Ok(ChannelRealization {
        h,
        seed,
        trial_index,
    })
}

pub fn generate(cfg: &SystemConfig, seed: u64, trial_index: u64) -> Result<ChannelRealization> {
    cfg.validate()?;
    generate_dims(cfg.antennas, cfg.users, seed, trial_index)
}
