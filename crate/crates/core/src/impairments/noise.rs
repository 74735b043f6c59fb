use crate::rng::{complex_gaussian, rng_from_seed};
use crate::waveform::{db_to_lin, ComplexSignal};

pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const T0_KELVIN: f64 = 290.0;

/// `k·T₀·B` in watts.
pub fn thermal_noise_power_w(bandwidth_hz: f64) -> f64 {
    BOLTZMANN * T0_KELVIN * bandwidth_hz
}

/// Add circular complex Gaussian noise of total power `F·k·T₀·B`.
pub fn add_thermal_noise(x: &ComplexSignal, nf_db: f64, bandwidth_hz: f64, seed: u64) -> ComplexSignal {
    assert!(bandwidth_hz > 0.0, "noise bandwidth must be positive");
    let variance = thermal_noise_power_w(bandwidth_hz) * db_to_lin(nf_db);
    let mut rng = rng_from_seed(seed);
    x.with_samples(x.samples().iter().map(|&s| s + complex_gaussian(&mut rng, variance)).collect())
}
