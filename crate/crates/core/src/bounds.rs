//! Cramér–Rao bound of the SI channel estimate and the sample-size law that
//! makes an estimate without a calibration period as good as one with it.

use crate::error::{arg_err, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbInput {
    /// SOI power at the detector during estimation; 0 with a calibration period.
    pub p_soi_w: f64,
    pub p_n_w: f64,
    pub n_samples: u64,
    /// Per-branch reference power.
    pub p_ref_w: f64,
}

/// Per-tap variance bound `(p_soi + p_n) / (N·p_ref)`.
pub fn crlb_per_tap(inp: &CrlbInput) -> Result<f64> {
    if !(inp.p_ref_w > 0.0) || !inp.p_ref_w.is_finite() {
        return Err(arg_err(format!("reference power must be positive, got {}", inp.p_ref_w)));
    }
    if inp.n_samples == 0 {
        return Err(arg_err("bound needs at least one sample"));
    }
    if !(inp.p_soi_w >= 0.0 && inp.p_n_w >= 0.0) {
        return Err(arg_err("signal and noise powers must be non-negative"));
    }
    Ok((inp.p_soi_w + inp.p_n_w) / (inp.n_samples as f64 * inp.p_ref_w))
}

/// Samples needed without calibration to match `n_c` calibrated samples:
/// `ceil(n_c·(snr + 1))`.
pub fn required_samples(n_c: u64, snr_linear: f64) -> Result<u64> {
    if !(snr_linear >= 0.0) || !snr_linear.is_finite() {
        return Err(arg_err(format!("snr must be a finite non-negative ratio, got {snr_linear}")));
    }
    Ok((n_c as f64 * (snr_linear + 1.0)).ceil() as u64)
}
