use num_complex::Complex64;

use crate::cancellation::matrix::conj_dot;
use crate::error::{arg_err, Result};
use crate::waveform::{convolve_same, db_to_lin, lin_to_db, ComplexSignal, MimoChannel};

#[derive(Debug, Clone)]
pub struct RfCancelOutput {
    pub signal: ComplexSignal,
    /// SI suppression actually reached, in dB.
    pub achieved_db: f64,
    /// Common scale applied to the LOS copies.
    pub scale: f64,
    /// True when the requested suppression was out of reach.
    pub shortfall: bool,
}

/// Subtract `c·ĥ_los,ij·x_j(n − d)` for every TX branch `j` from the signal of
/// receive chain `rx`.
///
/// The real scale `c` is the smallest non-negative value that brings the SI
/// power down by `a_rf_db`. When LOS subtraction alone cannot get there, the
/// power-minimizing scale is used and `shortfall` is set. The SI itself is
/// regenerated from `pa_outputs` and `channel`, so any SOI in `y_rx` does not
/// bias the scale.
pub fn rf_cancel(
    y_rx: &ComplexSignal,
    pa_outputs: &[ComplexSignal],
    channel: &MimoChannel,
    rx: usize,
    a_rf_db: f64,
) -> Result<RfCancelOutput> {
    if a_rf_db.is_nan() || a_rf_db < 0.0 {
        return Err(arg_err(format!("RF cancellation must be non-negative, got {a_rf_db}")));
    }
    if pa_outputs.len() != channel.n_tx() || rx >= channel.n_rx() {
        return Err(arg_err("channel dimensions do not match the TX branches or RX index"));
    }
    if pa_outputs.iter().any(|p| p.len() != y_rx.len()) {
        return Err(arg_err("PA outputs and RX capture differ in length"));
    }
    let n = y_rx.len();
    let mut si = vec![Complex64::new(0.0, 0.0); n];
    let mut los = vec![Complex64::new(0.0, 0.0); n];
    let d = channel.los_delay;
    for (j, pa) in pa_outputs.iter().enumerate() {
        for (acc, v) in si.iter_mut().zip(convolve_same(pa.samples(), channel.response(rx, j))) {
            *acc += v;
        }
        let tap = channel.los_tap(rx, j);
        for (acc, &x) in los.iter_mut().skip(d).zip(pa.samples()) {
            *acc += tap * x;
        }
    }
    let p_si = conj_dot(&si, &si).re;
    let p_l = conj_dot(&los, &los).re;
    let cross = conj_dot(&los, &si).re;
    if a_rf_db == 0.0 || p_si == 0.0 || p_l == 0.0 {
        return Ok(RfCancelOutput { signal: y_rx.clone(), achieved_db: 0.0, scale: 0.0, shortfall: a_rf_db > 0.0 && p_si > 0.0 });
    }
    // ‖si − c·los‖² = p_si − 2c·cross + c²·p_l = p_si / a_rf
    let target = p_si / db_to_lin(a_rf_db);
    let disc = cross * cross - p_l * (p_si - target);
    let (scale, shortfall) = if disc >= 0.0 {
        ((cross - disc.sqrt()) / p_l, false)
    } else {
        (cross / p_l, true)
    };
    let residual = p_si - 2.0 * scale * cross + scale * scale * p_l;
    let signal = y_rx.with_samples(y_rx.samples().iter().zip(&los).map(|(y, l)| y - l * scale).collect());
    Ok(RfCancelOutput { signal, achieved_db: lin_to_db(p_si / residual.max(0.0)), scale, shortfall })
}
