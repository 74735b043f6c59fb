//! Rician multipath self-interference coupling channels.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{arg_err, Result};
use crate::rng::{complex_gaussian_vec, derive_seed, rng_from_seed};
use crate::waveform::signal::db_to_lin;

/// Per (RX, TX) antenna pair FIR coupling responses, `taps[rx][tx][lag]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannel {
    pub taps: Vec<Vec<Vec<Complex64>>>,
    pub k_factor_db: f64,
    pub los_delay: usize,
}

impl MimoChannel {
    pub fn n_rx(&self) -> usize {
        self.taps.len()
    }

    pub fn n_tx(&self) -> usize {
        self.taps.first().map_or(0, Vec::len)
    }

    pub fn m_taps(&self) -> usize {
        self.taps.first().and_then(|r| r.first()).map_or(0, Vec::len)
    }

    pub fn response(&self, rx: usize, tx: usize) -> &[Complex64] {
        &self.taps[rx][tx]
    }

    pub fn los_tap(&self, rx: usize, tx: usize) -> Complex64 {
        self.taps[rx][tx][self.los_delay]
    }

    pub fn pair_power(&self, rx: usize, tx: usize) -> f64 {
        self.taps[rx][tx].iter().map(|t| t.norm_sqr()).sum()
    }

    /// Realized LOS-to-scatter power ratio of one pair in dB.
    pub fn realized_k_factor_db(&self, rx: usize, tx: usize) -> f64 {
        let los = self.los_tap(rx, tx).norm_sqr();
        let scatter = self.pair_power(rx, tx) - los;
        10.0 * (los / scatter).log10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelParams {
    pub n_rx: usize,
    pub n_tx: usize,
    pub m_taps: usize,
    /// `f64::INFINITY` yields a pure line-of-sight channel.
    pub k_factor_db: f64,
    pub los_delay: usize,
    pub mean_path_loss_db: f64,
}

/// Draw independent Rician responses for every antenna pair.
///
/// The dominant tap has a fixed magnitude and uniform random phase. The
/// scattered taps are complex Gaussian with a flat delay profile and are
/// rescaled so that each realization hits the configured K-factor and total
/// power exactly. A single-tap channel carries all of its power on the LOS tap.
pub fn draw_si_channel(p: &ChannelParams, seed: u64) -> Result<MimoChannel> {
    if p.m_taps == 0 {
        return Err(arg_err("channel needs at least one tap"));
    }
    if p.los_delay >= p.m_taps {
        return Err(arg_err(format!("LOS delay {} must be below the tap count {}", p.los_delay, p.m_taps)));
    }
    if p.k_factor_db.is_nan() || p.k_factor_db == f64::NEG_INFINITY {
        return Err(arg_err("K-factor must be finite or +inf"));
    }
    if !p.mean_path_loss_db.is_finite() {
        return Err(arg_err("mean path loss must be finite"));
    }
    if p.n_rx == 0 || p.n_tx == 0 {
        return Err(arg_err("channel needs at least one RX and one TX antenna"));
    }
    let total = db_to_lin(-p.mean_path_loss_db);
    let pure_los = p.k_factor_db == f64::INFINITY || p.m_taps == 1;
    let (los_power, scatter_power) = if pure_los {
        (total, 0.0)
    } else {
        let k = db_to_lin(p.k_factor_db);
        (total * k / (k + 1.0), total / (k + 1.0))
    };

    let mut taps = Vec::with_capacity(p.n_rx);
    for rx in 0..p.n_rx {
        let mut row = Vec::with_capacity(p.n_tx);
        for tx in 0..p.n_tx {
            let mut rng = rng_from_seed(derive_seed(seed, &[rx as u64, tx as u64]));
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            let mut h = vec![Complex64::new(0.0, 0.0); p.m_taps];
            if scatter_power > 0.0 {
                let draws = complex_gaussian_vec(&mut rng, p.m_taps - 1, 1.0);
                let drawn: f64 = draws.iter().map(|d| d.norm_sqr()).sum();
                let scale = (scatter_power / drawn).sqrt();
                let mut it = draws.into_iter();
                for (lag, tap) in h.iter_mut().enumerate() {
                    if lag != p.los_delay {
                        *tap = it.next().unwrap() * scale;
                    }
                }
            }
            h[p.los_delay] = Complex64::from_polar(los_power.sqrt(), phase);
            row.push(h);
        }
        taps.push(row);
    }
    Ok(MimoChannel { taps, k_factor_db: p.k_factor_db, los_delay: p.los_delay })
}
