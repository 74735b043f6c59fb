//! VGA gain control and the I/Q ADC quantizer.
//!
//! Each rail is a uniform mid-rise quantizer with `2^bits` levels spanning
//! `[−A, A]`, where `A² = p_target·10^(headroom/10)/2`. A signal at the target
//! power that stays inside the range therefore sees a quantization SNR of
//! `6.02·bits + 4.76 − headroom` dB. Samples beyond full scale clip.

use serde::{Deserialize, Serialize};

use crate::waveform::{db_to_amplitude, db_to_lin, dbm_to_watts, ComplexSignal};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdcSpec {
    pub bits: u32,
    /// Per-rail full-scale headroom above the rail's mean power at the target level.
    pub papr_headroom_db: f64,
    pub target_power_dbm: f64,
}

impl Default for AdcSpec {
    fn default() -> Self {
        Self { bits: 12, papr_headroom_db: 10.0, target_power_dbm: -10.0 }
    }
}

impl AdcSpec {
    /// Per-rail clipping amplitude.
    pub fn full_scale(&self) -> f64 {
        (dbm_to_watts(self.target_power_dbm) * db_to_lin(self.papr_headroom_db) / 2.0).sqrt()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.full_scale() / 2f64.powi(self.bits as i32)
    }

    /// Quantization SNR in dB for an in-range signal at the target power.
    pub fn nominal_snr_db(&self) -> f64 {
        6.02 * self.bits as f64 + 4.76 - self.papr_headroom_db
    }
}

pub fn quantize(x: &ComplexSignal, adc: &AdcSpec) -> ComplexSignal {
    assert!(adc.bits >= 1, "ADC needs at least one bit");
    let step = adc.step();
    let half = 2f64.powi(adc.bits as i32 - 1);
    let rail = |v: f64| ((v / step).floor().clamp(-half, half - 1.0) + 0.5) * step;
    x.map(|s| Complex64::new(rail(s.re), rail(s.im)))
}

/// Gain (dB) that brings `input_dbm` to `target_dbm`, clamped to `range`.
/// The flag reports whether clamping happened.
pub fn choose_vga_gain(input_dbm: f64, target_dbm: f64, range: (f64, f64)) -> (f64, bool) {
    let wanted = target_dbm - input_dbm;
    let gain = wanted.clamp(range.0, range.1);
    (gain, gain != wanted)
}

#[derive(Debug, Clone)]
pub struct AgcOutput {
    pub signal: ComplexSignal,
    pub applied_gain_db: f64,
    pub clamped: bool,
}

/// Linear VGA set by the AGC followed by the ADC.
pub fn agc_and_quantize(x: &ComplexSignal, adc: &AdcSpec, vga_range_db: (f64, f64)) -> AgcOutput {
    let p_in = x.measure_power().expect("AGC input must not be empty");
    assert!(p_in.is_finite(), "AGC input must not be silent");
    let (gain, clamped) = choose_vga_gain(p_in, adc.target_power_dbm, vga_range_db);
    let signal = quantize(&x.scale(db_to_amplitude(gain)), adc);
    AgcOutput { signal, applied_gain_db: gain, clamped }
}
