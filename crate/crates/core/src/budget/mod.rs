//! Closed-form power levels at the detector input of one RX chain.
//!
//! All terms are evaluated in linear power units and converted to dB only on
//! the way out. The proposed (reference-receiver) structure follows the
//! system-calculation equations term by term, including the `(N_tx+1)`,
//! `(N_tx²+1)` and `N_tx²` multiplicities of the RX distortion term. The
//! traditional structure is the same calculation with the digital
//! cancellation removed from the TX-induced terms (image and PA distortion),
//! since data-referenced linear cancellation cannot see them, and without
//! reference-receiver quantization noise. This is an approximation of the
//! traditional architecture's full analysis.

mod transceiver;

use std::io::Write;

use serde::Serialize;

pub use transceiver::TransceiverSpec;

use crate::error::{config_err, Result};
use crate::impairments::noise::thermal_noise_power_w;
use crate::waveform::{db_to_lin, lin_to_db, watts_to_dbm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Structure {
    #[serde(rename = "proposed")]
    Proposed,
    #[serde(rename = "traditional")]
    Traditional,
}

impl Structure {
    pub fn name(&self) -> &'static str {
        match self {
            Structure::Proposed => "proposed",
            Structure::Traditional => "traditional",
        }
    }
}

/// Power levels of one operating point. Gains in dB, powers in dBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerBudget {
    pub g_rx_db: f64,
    pub p_soi_dbm: f64,
    pub p_n_dbm: f64,
    pub p_si_dbm: f64,
    pub p_si_im_dbm: f64,
    pub p_nl_tx_dbm: f64,
    pub p_nl_rx_dbm: f64,
    pub p_q_tot_dbm: f64,
    pub sinr_db: f64,
}

/// Linear-unit terms, kept for callers that need the raw sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBudget {
    pub g_rx: f64,
    pub p_soi: f64,
    pub p_n: f64,
    pub p_si: f64,
    pub p_si_im: f64,
    pub p_nl_tx: f64,
    pub p_nl_rx: f64,
    pub p_q_tot: f64,
}

impl LinearBudget {
    pub fn interference_plus_noise(&self) -> f64 {
        self.p_n + self.p_si + self.p_si_im + self.p_nl_tx + self.p_nl_rx + self.p_q_tot
    }

    pub fn to_db(&self) -> PowerBudget {
        // powers are in watts internally
        PowerBudget {
            g_rx_db: lin_to_db(self.g_rx),
            p_soi_dbm: watts_to_dbm(self.p_soi),
            p_n_dbm: watts_to_dbm(self.p_n),
            p_si_dbm: watts_to_dbm(self.p_si),
            p_si_im_dbm: watts_to_dbm(self.p_si_im),
            p_nl_tx_dbm: watts_to_dbm(self.p_nl_tx),
            p_nl_rx_dbm: watts_to_dbm(self.p_nl_rx),
            p_q_tot_dbm: watts_to_dbm(self.p_q_tot),
            sinr_db: lin_to_db(self.p_soi / self.interference_plus_noise()),
        }
    }
}

fn watts(dbm: f64) -> f64 {
    db_to_lin(dbm - 30.0)
}

fn intercept_w(name: &str, dbm: f64) -> Result<f64> {
    let w = watts(dbm);
    if w == 0.0 || w.is_nan() {
        return Err(config_err(format!("{name} intercept is zero in linear units")));
    }
    Ok(w)
}

pub fn budget_linear(spec: &TransceiverSpec, structure: Structure) -> Result<LinearBudget> {
    spec.validate()?;
    let n_tx = spec.n_tx as f64;
    let p_tx = watts(spec.p_tx_dbm);
    let p_target = watts(spec.adc_main.target_power_dbm);
    let a_ant = db_to_lin(spec.a_ant_db);
    let a_rf = db_to_lin(spec.a_rf_db);
    let a_dig = db_to_lin(spec.a_dig_db);
    let p_soi_in = watts(spec.p_soi_in_dbm);
    let f_rx = db_to_lin(spec.f_rx_db);
    let p_th = thermal_noise_power_w(spec.bandwidth_hz);
    let irr_tx = db_to_lin(spec.irr_tx_db);
    let irr_rx = db_to_lin(spec.irr_rx_db);
    let g_pa = db_to_lin(spec.pa.gain_db);
    let g_lna = db_to_lin(spec.lna.gain_db);
    let g_mixer = db_to_lin(spec.mixer.gain_db);
    let iip3_pa = intercept_w("PA iip3", spec.pa.iip3_dbm)?;
    let iip3_lna = intercept_w("LNA iip3", spec.lna.iip3_dbm)?;
    let iip2_mixer = intercept_w("mixer iip2", spec.mixer.iip2_dbm)?;
    let iip3_mixer = intercept_w("mixer iip3", spec.mixer.iip3_dbm)?;
    let iip2_vga = intercept_w("VGA iip2", spec.vga.iip2_dbm)?;
    let iip3_vga = intercept_w("VGA iip3", spec.vga.iip3_dbm)?;
    let snr_adc = db_to_lin(spec.adc_main.nominal_snr_db());
    let snr_adc_ref = db_to_lin(spec.adc_ref.nominal_snr_db());

    // 1/x with 1/inf = 0
    let inv = |x: f64| 1.0 / x;
    let coupled = p_tx / (a_ant * a_rf);
    let si_at_input = n_tx * p_tx / a_ant * (inv(a_rf) + p_tx * p_tx / (a_rf * iip3_pa * iip3_pa * g_pa * g_pa));
    let g_rx = p_target / (si_at_input + p_soi_in);

    let p_soi = g_rx * p_soi_in;
    let p_n = f_rx * g_rx * p_th;
    let p_si = n_tx * g_rx * coupled * inv(a_dig);
    let tx_dig = match structure {
        Structure::Proposed => inv(a_dig),
        Structure::Traditional => 1.0,
    };
    let p_si_im = g_rx * coupled * (n_tx * tx_dig / irr_tx + (n_tx + 1.0) / irr_rx);
    let p_nl_tx = n_tx * g_rx * p_tx.powi(3) / (iip3_pa * iip3_pa * g_pa * g_pa * a_ant * a_rf) * tx_dig;
    let second_order = (n_tx + 1.0) * (g_lna / iip2_mixer + g_lna * g_mixer / (2.0 * iip2_vga));
    let third_order_later = (n_tx * n_tx + 1.0) * coupled
        * ((g_lna / iip3_mixer).powi(2) + (g_lna * g_mixer / (2.0 * iip3_vga)).powi(2));
    let third_order_lna = n_tx * n_tx * coupled / (iip3_lna * iip3_lna);
    let p_nl_rx = n_tx * g_rx * coupled * coupled * (second_order + third_order_later + third_order_lna);
    let p_q_tot = match structure {
        Structure::Proposed => p_target * (1.0 / snr_adc + n_tx / snr_adc_ref),
        Structure::Traditional => p_target / snr_adc,
    };
    Ok(LinearBudget { g_rx, p_soi, p_n, p_si, p_si_im, p_nl_tx, p_nl_rx, p_q_tot })
}

/// Detector-input budget of the reference-receiver structure.
pub fn budget_proposed(spec: &TransceiverSpec) -> Result<PowerBudget> {
    Ok(budget_linear(spec, Structure::Proposed)?.to_db())
}

/// Detector-input budget of the traditional data-referenced linear canceller.
pub fn budget_traditional(spec: &TransceiverSpec) -> Result<PowerBudget> {
    Ok(budget_linear(spec, Structure::Traditional)?.to_db())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetRow {
    pub structure: Structure,
    pub p_tx_dbm: f64,
    pub budget: PowerBudget,
}

pub fn sweep_budget(spec: &TransceiverSpec, p_tx_dbm: &[f64], structure: Structure) -> Result<Vec<BudgetRow>> {
    if p_tx_dbm.is_empty() {
        return Err(config_err("budget sweep needs at least one transmit power"));
    }
    p_tx_dbm
        .iter()
        .map(|&p| {
            let budget = budget_linear(&spec.with_p_tx(p), structure)?.to_db();
            Ok(BudgetRow { structure, p_tx_dbm: p, budget })
        })
        .collect()
}

/// Column order of budget CSVs.
pub const BUDGET_CSV_HEADER: [&str; 11] = [
    "variant",
    "p_tx_dbm",
    "g_rx_db",
    "p_soi_dbm",
    "p_n_dbm",
    "p_si_dbm",
    "p_si_im_dbm",
    "p_nl_tx_dbm",
    "p_nl_rx_dbm",
    "p_q_tot_dbm",
    "sinr_db",
];

pub fn write_budget_csv<W: Write>(out: W, rows: &[BudgetRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(BUDGET_CSV_HEADER)?;
    for r in rows {
        let b = &r.budget;
        let mut rec = vec![r.structure.name().to_string()];
        rec.extend(
            [
                r.p_tx_dbm,
                b.g_rx_db,
                b.p_soi_dbm,
                b.p_n_dbm,
                b.p_si_dbm,
                b.p_si_im_dbm,
                b.p_nl_tx_dbm,
                b.p_nl_rx_dbm,
                b.p_q_tot_dbm,
                b.sinr_db,
            ]
            .iter()
            .map(|v| v.to_string()),
        );
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| crate::Error::Io { path: "<budget csv>".into(), source: e })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lin(dbm: f64) -> f64 {
        10f64.powf(dbm / 10.0)
    }

    fn db_sum(terms: &[f64]) -> f64 {
        10.0 * terms.iter().map(|&t| lin(t)).sum::<f64>().log10()
    }

    #[test]
    fn degenerate_case_without_si() {
        let spec = TransceiverSpec { a_rf_db: f64::INFINITY, p_tx_dbm: f64::NEG_INFINITY, ..Default::default() };
        let b = budget_proposed(&spec).unwrap();
        // hand evaluation: g_rx = p_target / p_soi,in
        assert!((b.g_rx_db - (-10.0 - (-83.9))).abs() < 1e-9);
        let sinr = b.p_soi_dbm - db_sum(&[b.p_n_dbm, b.p_q_tot_dbm]);
        assert!((b.sinr_db - sinr).abs() < 0.01);
    }

    #[test]
    fn proposed_is_thermal_noise_limited_at_low_power() {
        for p in [-5.0, 0.0] {
            let b = budget_proposed(&TransceiverSpec::default().with_p_tx(p)).unwrap();
            for other in [b.p_si_dbm, b.p_si_im_dbm, b.p_nl_tx_dbm, b.p_nl_rx_dbm, b.p_q_tot_dbm] {
                assert!(b.p_n_dbm > other);
            }
        }
    }

    #[test]
    fn rx_distortion_and_image_lead_interference_at_top_power() {
        let b = budget_proposed(&TransceiverSpec::default().with_p_tx(25.0)).unwrap();
        let others = [b.p_si_dbm, b.p_nl_tx_dbm, b.p_q_tot_dbm];
        for o in others {
            assert!(b.p_nl_rx_dbm > o && b.p_si_im_dbm > o);
        }
    }

    #[test]
    fn traditional_matches_proposed_without_digital_cancellation() {
        let spec = TransceiverSpec { a_dig_db: 0.0, ..Default::default() };
        let p = budget_proposed(&spec).unwrap();
        let t = budget_traditional(&spec).unwrap();
        assert_eq!(p.g_rx_db, t.g_rx_db);
        assert_eq!(p.p_soi_dbm, t.p_soi_dbm);
        assert_eq!(p.p_n_dbm, t.p_n_dbm);
        assert_eq!(p.p_si_dbm, t.p_si_dbm);
        assert!((p.p_si_im_dbm - t.p_si_im_dbm).abs() < 1e-12);
        assert!((p.p_nl_tx_dbm - t.p_nl_tx_dbm).abs() < 1e-12);
        assert_eq!(p.p_nl_rx_dbm, t.p_nl_rx_dbm);
        // reference-ADC quantization exists only in the proposed structure
        assert!(p.p_q_tot_dbm > t.p_q_tot_dbm);
    }

    #[test]
    fn traditional_is_image_and_pa_limited_at_low_power() {
        let t = budget_traditional(&TransceiverSpec::default().with_p_tx(5.0)).unwrap();
        assert!(t.p_si_im_dbm > t.p_n_dbm);
        assert!(db_sum(&[t.p_si_im_dbm, t.p_nl_tx_dbm]) > t.p_n_dbm);
        let p = budget_proposed(&TransceiverSpec::default().with_p_tx(5.0)).unwrap();
        assert!((p.p_nl_rx_dbm - t.p_nl_rx_dbm).abs() < 0.3);
    }

    #[test]
    fn zero_intercept_is_a_configuration_error() {
        let mut spec = TransceiverSpec::default();
        spec.pa.iip3_dbm = f64::NEG_INFINITY;
        assert!(budget_proposed(&spec).is_err());
    }

    #[test]
    fn ideal_mixers_and_pa_remove_their_terms() {
        let mut spec = TransceiverSpec { irr_tx_db: f64::INFINITY, irr_rx_db: f64::INFINITY, ..Default::default() };
        spec.pa.iip3_dbm = f64::INFINITY;
        let b = budget_linear(&spec, Structure::Traditional).unwrap();
        assert_eq!(b.p_si_im, 0.0);
        assert_eq!(b.p_nl_tx, 0.0);
        let n_tx = 2.0;
        let expected_grx = watts(-10.0) / (n_tx * watts(15.0) / (1e4 * 1e3) + watts(-83.9));
        assert!((b.g_rx / expected_grx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_single_point_equals_direct_call() {
        let spec = TransceiverSpec::default();
        let rows = sweep_budget(&spec, &[7.0], Structure::Proposed).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].budget, budget_proposed(&spec.with_p_tx(7.0)).unwrap());
        assert!(sweep_budget(&spec, &[], Structure::Proposed).is_err());
    }

    #[test]
    fn soi_and_gain_fall_with_transmit_power() {
        let grid: Vec<f64> = (-5..=25).step_by(5).map(f64::from).collect();
        let rows = sweep_budget(&TransceiverSpec::default(), &grid, Structure::Proposed).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].budget.g_rx_db <= w[0].budget.g_rx_db);
            assert!(w[1].budget.p_soi_dbm < w[0].budget.p_soi_dbm);
        }
    }

    #[test]
    fn adc_input_sums_to_target() {
        // pre-digital-cancellation view: a_dig = 0 dB
        for p in [-5.0, 5.0, 15.0, 25.0] {
            let spec = TransceiverSpec { a_dig_db: 0.0, ..TransceiverSpec::default().with_p_tx(p) };
            let b = budget_proposed(&spec).unwrap();
            let total = db_sum(&[b.p_si_dbm, b.p_nl_tx_dbm, b.p_soi_dbm]);
            assert!((total + 10.0).abs() < 0.01, "{total}");
        }
    }

    #[test]
    fn proposed_beats_traditional_across_sweep() {
        for p in -5..=25 {
            let spec = TransceiverSpec::default().with_p_tx(p as f64);
            assert!(budget_proposed(&spec).unwrap().sinr_db > budget_traditional(&spec).unwrap().sinr_db);
        }
    }

    #[test]
    fn csv_has_fixed_header_and_one_row_per_point() {
        let rows = sweep_budget(&TransceiverSpec::default(), &[0.0, 10.0], Structure::Traditional).unwrap();
        let mut buf = Vec::new();
        write_budget_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], BUDGET_CSV_HEADER.join(","));
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("traditional,0,"));
        assert!(text.ends_with('\n'));
    }

    proptest! {
        #[test]
        fn scaling_target_scales_every_power(p_tx in -10.0..30.0f64, shift_db in -20.0..20.0f64) {
            let base = TransceiverSpec::default().with_p_tx(p_tx);
            let mut moved = base.clone();
            moved.adc_main.target_power_dbm += shift_db;
            moved.adc_ref.target_power_dbm += shift_db;
            let a = budget_linear(&base, Structure::Proposed).unwrap();
            let b = budget_linear(&moved, Structure::Proposed).unwrap();
            let c = db_to_lin(shift_db);
            for (x, y) in [(a.g_rx, b.g_rx), (a.p_soi, b.p_soi), (a.p_n, b.p_n), (a.p_si_im, b.p_si_im),
                           (a.p_nl_tx, b.p_nl_tx), (a.p_nl_rx, b.p_nl_rx), (a.p_q_tot, b.p_q_tot)] {
                prop_assert!((y - c * x).abs() <= 1e-9 * (c * x).abs());
            }
            let sa = a.to_db().sinr_db;
            let sb = b.to_db().sinr_db;
            prop_assert!((sa - sb).abs() < 1e-9);
        }

        #[test]
        fn gain_identity_holds(p_tx in -20.0..35.0f64) {
            let spec = TransceiverSpec::default().with_p_tx(p_tx);
            let b = budget_linear(&spec, Structure::Proposed).unwrap();
            let n_tx = 2.0;
            let (ptx, a_ant, a_rf) = (watts(p_tx), 1e4, 1e3);
            let (iip3, g_pa) = (watts(15.0), lin(27.0));
            let denom = n_tx * ptx / a_ant * (1.0 / a_rf + ptx * ptx / (a_rf * iip3 * iip3 * g_pa * g_pa)) + watts(-83.9);
            prop_assert!((b.g_rx * denom / watts(-10.0) - 1.0).abs() < 1e-12);
        }
    }
}
