//! Cyclic-prefixed, oversampled OFDM waveform generation.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, config_err, Result};
use crate::rng::rng_from_seed;
use crate::waveform::signal::ComplexSignal;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub n_data_subcarriers: usize,
    /// Square QAM order (4, 16, 64, ...).
    pub constellation_order: usize,
    /// Cyclic prefix length in samples at the critical (non-oversampled) rate.
    pub guard_interval_samples: usize,
    pub oversampling_factor: usize,
    /// Duration of the useful (IFFT) part of a symbol in seconds.
    pub symbol_duration: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        Self {
            n_subcarriers: 64,
            n_data_subcarriers: 48,
            constellation_order: 16,
            guard_interval_samples: 16,
            oversampling_factor: 4,
            symbol_duration: 4e-6,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(config_err("OFDM needs at least one subcarrier"));
        }
        if self.n_data_subcarriers == 0 || self.n_data_subcarriers > self.n_subcarriers {
            return Err(config_err(format!(
                "data subcarriers ({}) must be in 1..={}",
                self.n_data_subcarriers, self.n_subcarriers
            )));
        }
        let side = (self.constellation_order as f64).sqrt().round() as usize;
        if self.constellation_order < 4 || side * side != self.constellation_order {
            return Err(config_err(format!(
                "constellation order {} is not a square QAM",
                self.constellation_order
            )));
        }
        if self.oversampling_factor == 0 {
            return Err(config_err("oversampling factor must be at least 1"));
        }
        if !(self.symbol_duration.is_finite() && self.symbol_duration > 0.0) {
            return Err(config_err("symbol duration must be positive"));
        }
        Ok(())
    }

    pub fn fft_size(&self) -> usize {
        self.n_subcarriers * self.oversampling_factor
    }

    pub fn cyclic_prefix_len(&self) -> usize {
        self.guard_interval_samples * self.oversampling_factor
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.fft_size() + self.cyclic_prefix_len()
    }

    pub fn sample_rate(&self) -> f64 {
        self.fft_size() as f64 / self.symbol_duration
    }

    /// IFFT bins carrying data: nearest-to-DC first, DC itself only when every
    /// subcarrier is a data subcarrier.
    pub fn data_bins(&self) -> Vec<usize> {
        let n = self.fft_size() as isize;
        let mut logical: Vec<isize> = Vec::with_capacity(self.n_data_subcarriers);
        let half = self.n_subcarriers as isize / 2;
        let mut k = 1;
        while logical.len() < self.n_data_subcarriers && k <= half {
            if k < half || self.n_subcarriers % 2 == 1 {
                logical.push(k);
            }
            if logical.len() < self.n_data_subcarriers {
                logical.push(-k);
            }
            k += 1;
        }
        if logical.len() < self.n_data_subcarriers {
            logical.push(0);
        }
        logical.into_iter().map(|k| k.rem_euclid(n) as usize).collect()
    }
}

/// Streaming OFDM symbol source. Frames built from the same seed share a
/// prefix regardless of how many symbols are requested.
pub struct OfdmModulator {
    cfg: OfdmConfig,
    bins: Vec<usize>,
    ifft: Arc<dyn Fft<f64>>,
    levels: Vec<f64>,
}

impl OfdmModulator {
    pub fn new(cfg: &OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        let side = (cfg.constellation_order as f64).sqrt().round() as usize;
        // unit average symbol energy
        let norm = (2.0 * (cfg.constellation_order as f64 - 1.0) / 3.0).sqrt();
        let levels = (0..side).map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) / norm).collect();
        let ifft = FftPlanner::new().plan_fft_inverse(cfg.fft_size());
        Ok(Self { cfg: cfg.clone(), bins: cfg.data_bins(), ifft, levels })
    }

    /// Unnormalized time-domain samples for `n_symbols` symbols.
    pub fn modulate(&self, n_symbols: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rng_from_seed(seed);
        let n_fft = self.cfg.fft_size();
        let cp = self.cfg.cyclic_prefix_len();
        let mut out = Vec::with_capacity(n_symbols * (n_fft + cp));
        let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
        let side = self.levels.len();
        for _ in 0..n_symbols {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for &b in &self.bins {
                let i = self.levels[rng.random_range(0..side)];
                let q = self.levels[rng.random_range(0..side)];
                buf[b] = Complex64::new(i, q);
            }
            self.ifft.process(&mut buf);
            out.extend_from_slice(&buf[n_fft - cp..]);
            out.extend_from_slice(&buf);
        }
        out
    }
}

/// Random-data OFDM frame normalized to a mean power of `power_dbm`.
pub fn generate_ofdm_frame(cfg: &OfdmConfig, n_symbols: usize, power_dbm: f64, seed: u64) -> Result<ComplexSignal> {
    if n_symbols == 0 {
        return Err(arg_err("an OFDM frame needs at least one symbol"));
    }
    let modulator = OfdmModulator::new(cfg)?;
    let samples = modulator.modulate(n_symbols, seed);
    Ok(ComplexSignal::new(samples, cfg.sample_rate())?.normalized_to_dbm(power_dbm))
}

/// OFDM stream of exactly `n_samples` samples (the last symbol truncated) at `power_dbm`.
pub fn generate_ofdm_samples(cfg: &OfdmConfig, n_samples: usize, power_dbm: f64, seed: u64) -> Result<ComplexSignal> {
    if n_samples == 0 {
        return Err(arg_err("requested an empty OFDM stream"));
    }
    let per = cfg.samples_per_symbol();
    let n_symbols = n_samples.div_ceil(per);
    let modulator = OfdmModulator::new(cfg)?;
    let mut samples = modulator.modulate(n_symbols, seed);
    samples.truncate(n_samples);
    Ok(ComplexSignal::new(samples, cfg.sample_rate())?.normalized_to_dbm(power_dbm))
}
