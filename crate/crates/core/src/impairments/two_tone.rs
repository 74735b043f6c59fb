//! Two-tone intercept measurement.
//!
//! Two equal complex tones sit on exact DFT bins of a cyclic record, so the
//! fundamental, third-order (2f1−f2) and difference-frequency (f2−f1) lines
//! can be read off single DFT bins without leakage. Input-referred intercepts
//! are found by extrapolating the slope-1 fundamental line and the slope-3
//! (or slope-2) distortion line over three input levels.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::waveform::{dbm_to_watts, watts_to_dbm, ComplexSignal};

const RECORD: usize = 4096;
const BIN_1: i64 = 200;
const BIN_2: i64 = 230;

fn two_tone(per_tone_dbm: f64) -> ComplexSignal {
    let a = dbm_to_watts(per_tone_dbm).sqrt();
    let samples = (0..RECORD)
        .map(|n| {
            let t = n as f64 / RECORD as f64;
            Complex64::from_polar(a, TAU * BIN_1 as f64 * t) + Complex64::from_polar(a, TAU * BIN_2 as f64 * t + 0.3)
        })
        .collect();
    ComplexSignal::new(samples, 1.0).unwrap()
}

fn line_power_dbm(y: &ComplexSignal, bin: i64) -> f64 {
    let acc: Complex64 = y
        .samples()
        .iter()
        .enumerate()
        .map(|(n, s)| s * Complex64::from_polar(1.0, -TAU * bin as f64 * n as f64 / RECORD as f64))
        .sum();
    watts_to_dbm((acc / RECORD as f64).norm_sqr())
}

fn intercept(stage: impl Fn(&ComplexSignal) -> ComplexSignal, tone_dbm: f64, order: f64, bin: i64) -> f64 {
    let levels = [tone_dbm - 5.0, tone_dbm, tone_dbm + 5.0];
    let (mut c_fund, mut c_dist) = (0.0, 0.0);
    for &p in &levels {
        let y = stage(&two_tone(p));
        c_fund += line_power_dbm(&y, BIN_1) - p;
        c_dist += line_power_dbm(&y, bin) - order * p;
    }
    let n = levels.len() as f64;
    (c_fund / n - c_dist / n) / (order - 1.0)
}

/// Input-referred IIP3 in dBm (per-tone power), measured around `tone_dbm`.
pub fn measure_iip3(stage: impl Fn(&ComplexSignal) -> ComplexSignal, tone_dbm: f64) -> f64 {
    intercept(stage, tone_dbm, 3.0, 2 * BIN_1 - BIN_2)
}

/// Input-referred IIP2 in dBm from the difference-frequency line.
pub fn measure_iip2(stage: impl Fn(&ComplexSignal) -> ComplexSignal, tone_dbm: f64) -> f64 {
    intercept(stage, tone_dbm, 2.0, BIN_2 - BIN_1)
}
