//! Impairment calibration suite: every model is measured with a synthetic
//! stimulus and compared with the configured parameter.

use std::io::Write;

use num_complex::Complex64;

use crate::budget::TransceiverSpec;
use crate::error::{Error, Result};
use crate::impairments::two_tone::{measure_iip2, measure_iip3};
use crate::impairments::{
    add_thermal_noise, apply_iq_imbalance, apply_pa, apply_rx_stage, quantize, thermal_noise_power_w, AdcSpec,
    AmplifierSpec, IqSpec,
};
use crate::waveform::{db_to_lin, dbm_to_watts, lin_to_db, watts_to_dbm, ComplexSignal};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self { name: name.into(), measured, expected, tolerance }
    }

    pub fn passed(&self) -> bool {
        (self.measured - self.expected).abs() <= self.tolerance
    }
}

/// Tone level for the two-tone tests, well inside the weakly nonlinear region.
const BACKOFF_DB: f64 = 25.0;
const NOISE_SAMPLES: usize = 1_000_000;
const ADC_SAMPLES: usize = 200_000;

fn stage_checks(out: &mut Vec<Check>, name: &str, spec: &AmplifierSpec, pa: bool) {
    if spec.iip3_dbm.is_finite() {
        let tone = spec.iip3_dbm - BACKOFF_DB;
        let m = if pa {
            measure_iip3(|x| apply_pa(x, spec), tone)
        } else {
            measure_iip3(|x| apply_rx_stage(x, spec), tone)
        };
        out.push(Check::new(format!("{name} iip3_dbm"), m, spec.iip3_dbm, 0.3));
    }
    if !pa && spec.iip2_dbm.is_finite() {
        let tone = spec.iip3_dbm.min(spec.iip2_dbm) - BACKOFF_DB;
        let m = measure_iip2(|x| apply_rx_stage(x, spec), tone);
        out.push(Check::new(format!("{name} iip2_dbm"), m, spec.iip2_dbm, 0.3));
    }
}

fn image_ratio_db(irr_db: f64) -> f64 {
    let x = ComplexSignal::new((0..4096).map(|k| Complex64::from_polar(0.1, 0.37 * k as f64)).collect(), 1.0)
        .expect("positive sample rate");
    let image = apply_iq_imbalance(&x, &IqSpec { irr_db }).sub(&x);
    lin_to_db(image.mean_power_w() / x.mean_power_w())
}

fn adc_sndr_db(adc: &AdcSpec) -> f64 {
    let a = dbm_to_watts(adc.target_power_dbm).sqrt();
    let x = ComplexSignal::new(
        (0..ADC_SAMPLES).map(|k| Complex64::from_polar(a, 0.123_456_7 * k as f64)).collect(),
        1.0,
    )
    .expect("positive sample rate");
    let err = quantize(&x, adc).sub(&x);
    lin_to_db(x.mean_power_w() / err.mean_power_w())
}

/// Measure every impairment model configured in `spec`.
pub fn run_validation(spec: &TransceiverSpec, seed: u64) -> Vec<Check> {
    let mut out = Vec::new();
    stage_checks(&mut out, "pa", &spec.pa, true);
    stage_checks(&mut out, "lna", &spec.lna, false);
    stage_checks(&mut out, "mixer", &spec.mixer, false);
    stage_checks(&mut out, "vga", &spec.vga, false);
    for (name, irr) in [("tx", spec.irr_tx_db), ("rx", spec.irr_rx_db)] {
        if irr.is_finite() {
            out.push(Check::new(format!("{name} iq image_db"), image_ratio_db(irr), -irr, 1e-6));
        }
    }
    let silent = ComplexSignal::zeros(NOISE_SAMPLES, 1.0).expect("positive sample rate");
    let noise = add_thermal_noise(&silent, spec.f_rx_db, spec.bandwidth_hz, seed);
    out.push(Check::new(
        "thermal noise_dbm",
        watts_to_dbm(noise.mean_power_w()),
        watts_to_dbm(thermal_noise_power_w(spec.bandwidth_hz) * db_to_lin(spec.f_rx_db)),
        0.1,
    ));
    for (name, adc) in [("adc_main", &spec.adc_main), ("adc_ref", &spec.adc_ref)] {
        out.push(Check::new(format!("{name} sndr_db"), adc_sndr_db(adc), adc.nominal_snr_db(), 1.0));
    }
    out
}

pub fn write_validation_csv<W: Write>(out: W, checks: &[Check]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(["check", "measured", "expected", "tolerance", "pass"])?;
    for c in checks {
        w.write_record([
            c.name.clone(),
            c.measured.to_string(),
            c.expected.to_string(),
            c.tolerance.to_string(),
            c.passed().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io { path: "<validation csv>".into(), source: e })
}
