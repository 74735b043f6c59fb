//! RF cancellation, least-squares SI channel estimation and the digital
//! cancellers.

pub mod basis;
pub mod estimate;
pub mod ls;
pub mod matrix;
pub mod rf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use basis::{basis_for, BasisFunction, NonlinearBasis, Variant};
pub use estimate::{write_estimates_csv, ChannelEstimateSet, ESTIMATE_CSV_HEADER};
pub use ls::{LsFactorization, SolverKind, DEFAULT_CONDITION_LIMIT};
pub use matrix::{BlockTag, RegressionMatrix};
pub use rf::{rf_cancel, RfCancelOutput};

use crate::error::{arg_err, config_err, Result};
use crate::waveform::{convolve_same, ComplexSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CancellerConfig {
    /// FIR length per block. Longer than the physical coupling channel so the
    /// estimator does not assume the delay spread; 192 taps (3 µs at the
    /// default sample rate) put the calibrated and calibration-free saturation
    /// points of the sample-size sweep near 4·10³ and 10⁵ samples.
    pub m_taps: usize,
    pub solver: SolverKind,
    pub condition_limit: f64,
    pub nonlinear: NonlinearBasis,
}

impl Default for CancellerConfig {
    fn default() -> Self {
        Self {
            m_taps: 192,
            solver: SolverKind::SemiNormal,
            condition_limit: DEFAULT_CONDITION_LIMIT,
            nonlinear: NonlinearBasis::default(),
        }
    }
}

impl CancellerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_taps == 0 {
            return Err(config_err("canceller needs at least one tap"));
        }
        if !(self.condition_limit > 1.0) {
            return Err(config_err("condition limit must exceed 1"));
        }
        self.nonlinear.validate()
    }
}

/// Least-squares fit of `y` (one sample per matrix row) by Householder QR.
pub fn ls_estimate(y: &ComplexSignal, x: &RegressionMatrix) -> Result<ChannelEstimateSet> {
    ls_estimate_with(y.samples(), x, SolverKind::Qr, DEFAULT_CONDITION_LIMIT)
}

pub fn ls_estimate_with(
    y: &[Complex64],
    x: &RegressionMatrix,
    solver: SolverKind,
    condition_limit: f64,
) -> Result<ChannelEstimateSet> {
    let f = LsFactorization::new(x, solver, condition_limit)?;
    estimate_from(&f, x, y)
}

fn estimate_from(f: &LsFactorization<'_>, x: &RegressionMatrix, y: &[Complex64]) -> Result<ChannelEstimateSet> {
    let h = f.solve(y)?;
    let mut est = ChannelEstimateSet::from_stacked(&h, x.tags(), x.m_taps(), x.stream_len())?;
    est.condition = f.condition();
    Ok(est)
}

/// Subtract the SI regenerated from `refs` through `est`. Output is aligned
/// with `y`.
pub fn digital_cancel(y: &ComplexSignal, refs: &[ComplexSignal], est: &ChannelEstimateSet) -> Result<ComplexSignal> {
    if est.taps.iter().any(|t| t.len() != est.m_taps) || est.taps.len() != est.tags.len() {
        return Err(arg_err("estimate tap vectors do not match its tap count"));
    }
    if refs.iter().any(|r| r.len() != y.len()) {
        return Err(arg_err("references and observation differ in length"));
    }
    let mut out = y.samples().to_vec();
    for (tag, taps) in est.tags.iter().zip(&est.taps) {
        let r = refs
            .get(tag.branch)
            .ok_or_else(|| arg_err(format!("estimate refers to branch {} of {}", tag.branch, refs.len())))?;
        let regen = convolve_same(&tag.basis.expand(r.samples()), taps);
        for (o, v) in out.iter_mut().zip(regen) {
            *o -= v;
        }
    }
    Ok(y.with_samples(out))
}

/// Estimate on the first `n_est` samples of `rx_capture` and cancel over all of it.
pub fn run_canceller(
    variant: Variant,
    rx_capture: &ComplexSignal,
    tx_data: &[ComplexSignal],
    ref_rx_captures: &[ComplexSignal],
    cfg: &CancellerConfig,
    n_est: usize,
) -> Result<(ComplexSignal, ChannelEstimateSet)> {
    let mut out = run_canceller_multi(variant, std::slice::from_ref(rx_capture), tx_data, ref_rx_captures, cfg, n_est)?;
    Ok(out.remove(0))
}

/// [`run_canceller`] for several receive chains sharing one reference set.
/// The regression matrix is factored once.
pub fn run_canceller_multi(
    variant: Variant,
    rx_captures: &[ComplexSignal],
    tx_data: &[ComplexSignal],
    ref_rx_captures: &[ComplexSignal],
    cfg: &CancellerConfig,
    n_est: usize,
) -> Result<Vec<(ComplexSignal, ChannelEstimateSet)>> {
    cfg.validate()?;
    let refs = if variant.uses_reference_receivers() { ref_rx_captures } else { tx_data };
    if refs.is_empty() {
        return Err(arg_err(format!("no reference streams for the {variant} canceller")));
    }
    let len = rx_captures.first().map_or(0, ComplexSignal::len);
    if rx_captures.iter().chain(refs).any(|s| s.len() != len) {
        return Err(arg_err("captures and references differ in length"));
    }
    if n_est > len {
        return Err(arg_err(format!("estimation window {n_est} exceeds the capture length {len}")));
    }
    let m = cfg.m_taps;
    let windows: Vec<&[Complex64]> = refs.iter().map(|r| &r.samples()[..n_est]).collect();
    let x = RegressionMatrix::build(&windows, m, &basis_for(variant, &cfg.nonlinear))?;
    let f = LsFactorization::new(&x, cfg.solver, cfg.condition_limit)?;
    rx_captures
        .iter()
        .map(|y| {
            let mut est = estimate_from(&f, &x, &y.samples()[m - 1..n_est])?;
            est.variant = Some(variant);
            let cancelled = digital_cancel(y, refs, &est)?;
            Ok((cancelled, est))
        })
        .collect()
}
