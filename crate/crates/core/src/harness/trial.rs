//! One Monte-Carlo realization of the full transceiver chain.

use num_complex::Complex64;

use crate::cancellation::{basis_for, rf_cancel, run_canceller_multi, BlockTag, ChannelEstimateSet, Variant};
use crate::error::{arg_err, Error, Result};
use crate::harness::config::ScenarioConfig;
use crate::harness::sinr::measure_sinr;
use crate::impairments::{
    add_thermal_noise, apply_iq_imbalance, apply_pa, apply_rx_stage, choose_vga_gain, quantize,
    reference_rx_front_end, thermal_noise_power_w, IqSpec,
};
use crate::rng::derive_seed;
use crate::waveform::{db_to_lin, draw_si_channel, generate_ofdm_samples, watts_to_dbm, ComplexSignal, MimoChannel};

const STREAM_TX: u64 = 1;
const STREAM_CHANNEL: u64 = 2;
const STREAM_SOI: u64 = 3;
const STREAM_NOISE: u64 = 4;

pub const WARN_AGC_CLAMP: &str = "agc-clamp";
pub const WARN_RF_SHORTFALL: &str = "rf-shortfall";
pub const WARN_ESTIMATION_FAILED: &str = "estimation-failed";

/// Per-trial seed shared by every grid point and variant of an experiment.
pub fn trial_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, &[trial as u64])
}

/// Signals of one realization, digitized and ready for cancellation.
#[derive(Debug, Clone)]
pub struct Capture {
    /// Baseband data fed to each TX chain.
    pub tx_data: Vec<ComplexSignal>,
    pub pa_out: Vec<ComplexSignal>,
    pub channel: MimoChannel,
    /// SOI at each RX antenna, never gated.
    pub soi: Vec<ComplexSignal>,
    pub rx_adc: Vec<ComplexSignal>,
    pub ref_adc: Vec<ComplexSignal>,
    pub vga_gain_db: Vec<f64>,
    pub n_est: usize,
    pub warnings: Vec<String>,
}

/// SOI power over the thermal floor at the receiver input.
pub fn ideal_sinr_db(cfg: &ScenarioConfig) -> f64 {
    let t = &cfg.transceiver;
    t.p_soi_in_dbm - watts_to_dbm(thermal_noise_power_w(t.bandwidth_hz) * db_to_lin(t.f_rx_db))
}

/// Run the analog and mixed-signal chain for one realization.
///
/// TX: data → IQ imbalance → PA. RX: coupled SI + SOI → RF cancellation →
/// thermal noise referred to the input → LNA → IQ imbalance → mixer → VGA
/// set by the AGC → ADC. Reference chains: coupled PA output → attenuating
/// front end → IQ imbalance → mixer → the VGA gain of RX `j mod n_rx` → ADC.
/// With `calibrated` the SOI is off during the first `n_est` samples.
pub fn simulate_capture(cfg: &ScenarioConfig, p_tx_dbm: f64, n_est: usize, calibrated: bool, seed: u64) -> Result<Capture> {
    let t = &cfg.transceiver;
    let n = n_est + cfg.eval_samples;
    if n_est == 0 {
        return Err(arg_err("estimation window must be non-empty"));
    }
    let iq_tx = IqSpec { irr_db: t.irr_tx_db };
    let iq_rx = IqSpec { irr_db: t.irr_rx_db };

    let tx_data: Vec<ComplexSignal> = (0..t.n_tx)
        .map(|j| generate_ofdm_samples(&cfg.ofdm, n, p_tx_dbm - t.pa.gain_db, derive_seed(seed, &[STREAM_TX, j as u64])))
        .collect::<Result<_>>()?;
    let pa_out: Vec<ComplexSignal> = tx_data.iter().map(|d| apply_pa(&apply_iq_imbalance(d, &iq_tx), &t.pa)).collect();
    let channel = draw_si_channel(&cfg.channel_params(), derive_seed(seed, &[STREAM_CHANNEL]))?;

    let mut warnings = Vec::new();
    let mut soi = Vec::with_capacity(t.n_rx);
    let mut mixer_out = Vec::with_capacity(t.n_rx);
    for i in 0..t.n_rx {
        let s = generate_ofdm_samples(&cfg.ofdm, n, t.p_soi_in_dbm, derive_seed(seed, &[STREAM_SOI, i as u64]))?;
        let mut y: Vec<Complex64> = s.samples().to_vec();
        if calibrated {
            y[..n_est].iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        }
        for (j, p) in pa_out.iter().enumerate() {
            for (acc, v) in y.iter_mut().zip(p.convolve(channel.response(i, j))?.samples()) {
                *acc += v;
            }
        }
        let y = s.with_samples(y);
        let rf = rf_cancel(&y, &pa_out, &channel, i, t.a_rf_db)?;
        if rf.shortfall {
            warnings.push(format!("{WARN_RF_SHORTFALL}:rx{i}"));
        }
        let noisy = add_thermal_noise(&rf.signal, t.f_rx_db, t.bandwidth_hz, derive_seed(seed, &[STREAM_NOISE, i as u64]));
        let lna = apply_rx_stage(&noisy, &t.lna);
        let mixed = apply_rx_stage(&apply_iq_imbalance(&lna, &iq_rx), &t.mixer);
        soi.push(s);
        mixer_out.push(mixed);
    }

    let mut vga_gain_db = Vec::with_capacity(t.n_rx);
    let mut rx_adc = Vec::with_capacity(t.n_rx);
    for (i, m) in mixer_out.iter().enumerate() {
        let (gain, clamped) = choose_vga_gain(m.measure_power()?, t.adc_main.target_power_dbm, t.vga_range_db);
        if clamped {
            warnings.push(format!("{WARN_AGC_CLAMP}:rx{i}"));
        }
        rx_adc.push(quantize(&apply_rx_stage(m, &t.vga.with_gain(gain)), &t.adc_main));
        vga_gain_db.push(gain);
    }

    let ref_adc = pa_out
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let front = reference_rx_front_end(p, t);
            let mixed = apply_rx_stage(&apply_iq_imbalance(&front, &iq_rx), &t.mixer);
            quantize(&apply_rx_stage(&mixed, &t.vga.with_gain(vga_gain_db[j % t.n_rx])), &t.adc_ref)
        })
        .collect();

    Ok(Capture { tx_data, pa_out, channel, soi, rx_adc, ref_adc, vga_gain_db, n_est, warnings })
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub variant: Variant,
    /// Mean over RX chains of the per-chain SINR in dB.
    pub sinr_db: f64,
    pub per_rx_sinr_db: Vec<f64>,
    pub estimates: Vec<ChannelEstimateSet>,
    pub residuals: Vec<ComplexSignal>,
    pub warnings: Vec<String>,
}

/// Cancel one capture with `variant` and score the evaluation window.
///
/// When the estimation window cannot support the regression (fewer rows than
/// unknowns, or past the condition limit) no digital cancellation is applied
/// and the outcome carries an `estimation-failed` warning.
pub fn cancel_and_score(cfg: &ScenarioConfig, capture: &Capture, variant: Variant, calibrated: bool) -> Result<TrialOutcome> {
    let mut warnings = Vec::new();
    let attempt = if capture.n_est < cfg.canceller.m_taps {
        Err(Error::IllConditioned { condition: f64::INFINITY, limit: cfg.canceller.condition_limit })
    } else {
        run_canceller_multi(variant, &capture.rx_adc, &capture.tx_data, &capture.ref_adc, &cfg.canceller, capture.n_est)
    };
    let results = match attempt {
        Ok(r) => r,
        Err(Error::IllConditioned { condition, .. }) => {
            warnings.push(format!("{WARN_ESTIMATION_FAILED}:cond={condition:.1e}"));
            let n_refs = if variant.uses_reference_receivers() { capture.ref_adc.len() } else { capture.tx_data.len() };
            let tags: Vec<BlockTag> = (0..n_refs)
                .flat_map(|branch| {
                    basis_for(variant, &cfg.canceller.nonlinear).into_iter().map(move |basis| BlockTag { branch, basis })
                })
                .collect();
            let mut est = ChannelEstimateSet::zeros(&tags, cfg.canceller.m_taps);
            est.variant = Some(variant);
            capture.rx_adc.iter().map(|y| (y.clone(), est.clone())).collect()
        }
        Err(e) => return Err(e),
    };
    let eval = capture.n_est..capture.n_est + cfg.eval_samples;
    let mut per_rx = Vec::with_capacity(results.len());
    let mut estimates = Vec::with_capacity(results.len());
    let mut residuals = Vec::with_capacity(results.len());
    for (i, (residual, mut est)) in results.into_iter().enumerate() {
        per_rx.push(measure_sinr(&residual.window(eval.clone()), &capture.soi[i].window(eval.clone()), cfg.sinr_cap_db)?);
        est.calibrated = calibrated;
        estimates.push(est);
        residuals.push(residual);
    }
    let sinr_db = per_rx.iter().sum::<f64>() / per_rx.len() as f64;
    Ok(TrialOutcome { variant, sinr_db, per_rx_sinr_db: per_rx, estimates, residuals, warnings })
}

/// Full realization plus cancellation for a single variant.
pub fn simulate_trial(
    cfg: &ScenarioConfig,
    variant: Variant,
    p_tx_dbm: f64,
    n_est: usize,
    calibrated: bool,
    seed: u64,
) -> Result<(TrialOutcome, Vec<String>)> {
    let capture = simulate_capture(cfg, p_tx_dbm, n_est, calibrated, seed)?;
    let outcome = cancel_and_score(cfg, &capture, variant, calibrated)?;
    Ok((outcome, capture.warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::budget_proposed;

    fn quick() -> ScenarioConfig {
        let mut cfg = ScenarioConfig { eval_samples: 4000, ..Default::default() };
        cfg.canceller.m_taps = 16;
        cfg
    }

    #[test]
    fn ideal_sinr_is_fifteen_db() {
        assert!((ideal_sinr_db(&ScenarioConfig::default()) - 15.0).abs() < 0.05);
    }

    #[test]
    fn capture_levels() {
        let cfg = quick();
        let c = simulate_capture(&cfg, 15.0, 2000, true, 7).unwrap();
        for p in &c.pa_out {
            assert!((p.measure_power().unwrap() - 15.0).abs() < 0.5);
        }
        for (i, y) in c.rx_adc.iter().enumerate() {
            assert!((y.measure_power().unwrap() + 10.0).abs() < 0.1);
            assert!(c.vga_gain_db[i] > 0.0 && c.vga_gain_db[i] < 69.0);
        }
        assert!(c.warnings.is_empty(), "{:?}", c.warnings);
        // SOI gated during the calibration period only
        assert_eq!(c.soi[0].len(), 6000);
    }

    #[test]
    fn gain_tracks_budget() {
        // VGA gain + LNA + mixer equals the analytic RX gain to within the
        // realized channel power and PA compression
        let cfg = quick();
        for p in [-5.0, 15.0, 25.0] {
            let c = simulate_capture(&cfg, p, 2000, true, 3).unwrap();
            let b = budget_proposed(&cfg.transceiver.with_p_tx(p)).unwrap();
            let total = c.vga_gain_db[0] + cfg.transceiver.lna.gain_db + cfg.transceiver.mixer.gain_db;
            assert!((total - b.g_rx_db).abs() < 1.5, "{p}: {total} vs {}", b.g_rx_db);
        }
    }

    #[test]
    fn ideal_chain_hits_the_cap() {
        let mut cfg = quick();
        let t = &mut cfg.transceiver;
        t.irr_tx_db = f64::INFINITY;
        t.irr_rx_db = f64::INFINITY;
        for amp in [&mut t.pa, &mut t.lna, &mut t.mixer, &mut t.vga] {
            amp.iip2_dbm = f64::INFINITY;
            amp.iip3_dbm = f64::INFINITY;
        }
        t.f_rx_db = f64::NEG_INFINITY;
        t.adc_main.bits = 48;
        t.adc_ref.bits = 48;
        let (o, _) = simulate_trial(&cfg, Variant::RefRx, 15.0, 2000, true, 5).unwrap();
        assert_eq!(o.sinr_db, cfg.sinr_cap_db);
    }

    #[test]
    fn short_window_falls_back_to_no_cancellation() {
        let cfg = quick();
        let c = simulate_capture(&cfg, 15.0, 20, true, 2).unwrap();
        assert!(cancel_and_score(&cfg, &simulate_capture(&cfg, 15.0, 5, true, 2).unwrap(), Variant::Linear, true).is_ok());
        let o = cancel_and_score(&cfg, &c, Variant::RefRx, true).unwrap();
        assert!(o.warnings[0].starts_with(WARN_ESTIMATION_FAILED));
        assert_eq!(o.residuals[0], c.rx_adc[0]);
        assert!(o.sinr_db < -20.0);
    }

    #[test]
    fn same_seed_same_capture() {
        let cfg = quick();
        let a = simulate_capture(&cfg, 10.0, 500, false, 11).unwrap();
        let b = simulate_capture(&cfg, 10.0, 500, false, 11).unwrap();
        assert_eq!(a.rx_adc, b.rx_adc);
        assert_eq!(a.ref_adc, b.ref_adc);
        assert_ne!(simulate_capture(&cfg, 10.0, 500, false, 12).unwrap().rx_adc, a.rx_adc);
    }
}
