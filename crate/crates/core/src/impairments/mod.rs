//! Hardware impairment models applied sample by sample.

pub mod adc;
pub mod amplifier;
pub mod iq;
pub mod noise;
pub mod two_tone;

pub use adc::{agc_and_quantize, choose_vga_gain, quantize, AdcSpec, AgcOutput};
pub use amplifier::{apply_pa, apply_rx_stage, AmplifierSpec};
pub use iq::{apply_iq_imbalance, IqSpec};
pub use noise::{add_thermal_noise, thermal_noise_power_w};

use crate::budget::TransceiverSpec;
use crate::waveform::{db_to_amplitude, ComplexSignal};

/// Coupled PA output at the reference receiver's mixer input: the TX signal
/// attenuated to the main receiver's post-RF-cancellation SI level and
/// amplified by the LNA gain, so both chains drive their mixers alike.
/// Infinite RF cancellation gives a silent reference.
pub fn reference_rx_front_end(pa_out: &ComplexSignal, spec: &TransceiverSpec) -> ComplexSignal {
    let db = spec.lna.gain_db - spec.a_ant_db - spec.a_rf_db;
    pa_out.scale(db_to_amplitude(db))
}
