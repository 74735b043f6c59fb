use num_complex::Complex64;

use crate::cancellation::{ls_estimate_with, BasisFunction, RegressionMatrix, SolverKind, DEFAULT_CONDITION_LIMIT};
use crate::error::{arg_err, Result};
use crate::waveform::ComplexSignal;

/// SOI lags fitted by [`measure_sinr`]: −1, 0 and +1 samples.
const FIT_TAPS: usize = 3;

/// SINR of `residual` with respect to the known SOI waveform.
///
/// The SOI is fitted to the residual with a three-tap LS filter (lags −1..1,
/// zero outside the window). The fitted part counts as signal, the rest as
/// interference plus noise. The result is clamped to `±cap_db`; a silent
/// residual carries no signal and reports `−cap_db`.
pub fn measure_sinr(residual: &ComplexSignal, soi_reference: &ComplexSignal, cap_db: f64) -> Result<f64> {
    if residual.len() != soi_reference.len() || residual.is_empty() {
        return Err(arg_err("residual and SOI reference must have the same non-zero length"));
    }
    if residual.mean_power_w() == 0.0 {
        return Ok(-cap_db);
    }
    if soi_reference.mean_power_w() == 0.0 {
        return Err(arg_err("SOI reference is silent"));
    }
    let zero = Complex64::new(0.0, 0.0);
    // padded[k] = soi[k − 1], so row r, column c reads soi[r + 1 − c]
    let mut padded = Vec::with_capacity(residual.len() + 2);
    padded.push(zero);
    padded.extend_from_slice(soi_reference.samples());
    padded.push(zero);
    let x = RegressionMatrix::build(&[&padded], FIT_TAPS, &[BasisFunction::LINEAR])?;
    let y = residual.samples();
    let est = ls_estimate_with(y, &x, SolverKind::Qr, DEFAULT_CONDITION_LIMIT)?;
    let fit = x.mul(&est.stacked());
    let p_fit: f64 = fit.iter().map(|z| z.norm_sqr()).sum();
    let p_rem: f64 = y.iter().zip(&fit).map(|(a, b)| (a - b).norm_sqr()).sum();
    let db = 10.0 * (p_fit / p_rem).log10();
    Ok(if db.is_nan() { cap_db } else { db.clamp(-cap_db, cap_db) })
}
