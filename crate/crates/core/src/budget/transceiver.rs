use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::impairments::{AdcSpec, AmplifierSpec};

/// Architecture parameters of the full-duplex transceiver.
///
/// `Default` is the 2x2 reference design: 40 dB antenna separation, 30 dB RF
/// cancellation, 25/60 dB TX/RX image rejection, 12-bit ADCs with 10 dB PAPR
/// headroom, SOI at -83.9 dBm in 12.5 MHz with a 4.1 dB noise figure, and the
/// PA/LNA/mixer/VGA parameters of [`AmplifierSpec`]'s constructors. Infinite
/// dB attenuations and intercepts are allowed and mean "ideal".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransceiverSpec {
    pub n_tx: usize,
    pub n_rx: usize,
    pub p_tx_dbm: f64,
    pub a_ant_db: f64,
    pub a_rf_db: f64,
    pub a_dig_db: f64,
    pub p_soi_in_dbm: f64,
    pub f_rx_db: f64,
    pub bandwidth_hz: f64,
    pub irr_tx_db: f64,
    pub irr_rx_db: f64,
    pub pa: AmplifierSpec,
    pub lna: AmplifierSpec,
    pub mixer: AmplifierSpec,
    pub vga: AmplifierSpec,
    pub vga_range_db: (f64, f64),
    pub adc_main: AdcSpec,
    pub adc_ref: AdcSpec,
}

impl Default for TransceiverSpec {
    fn default() -> Self {
        Self {
            n_tx: 2,
            n_rx: 2,
            p_tx_dbm: 15.0,
            a_ant_db: 40.0,
            a_rf_db: 30.0,
            a_dig_db: f64::INFINITY,
            p_soi_in_dbm: -83.9,
            f_rx_db: 4.1,
            bandwidth_hz: 12.5e6,
            irr_tx_db: 25.0,
            irr_rx_db: 60.0,
            pa: AmplifierSpec::pa(),
            lna: AmplifierSpec::lna(),
            mixer: AmplifierSpec::mixer(),
            vga: AmplifierSpec::vga(),
            vga_range_db: (0.0, 69.0),
            adc_main: AdcSpec::default(),
            adc_ref: AdcSpec::default(),
        }
    }
}

impl TransceiverSpec {
    pub fn with_p_tx(&self, p_tx_dbm: f64) -> Self {
        Self { p_tx_dbm, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx == 0 || self.n_rx == 0 {
            return Err(config_err("antenna counts must be at least 1"));
        }
        for (name, v) in [("a_ant_db", self.a_ant_db), ("a_rf_db", self.a_rf_db), ("a_dig_db", self.a_dig_db)] {
            if v.is_nan() || v < 0.0 {
                return Err(config_err(format!("{name} must be a non-negative attenuation, got {v}")));
            }
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(config_err("bandwidth must be positive"));
        }
        for (name, v) in [("irr_tx_db", self.irr_tx_db), ("irr_rx_db", self.irr_rx_db)] {
            if v.is_nan() || v <= 0.0 {
                return Err(config_err(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, amp) in [("pa", &self.pa), ("lna", &self.lna), ("mixer", &self.mixer), ("vga", &self.vga)] {
            if !amp.gain_db.is_finite() {
                return Err(config_err(format!("{name} gain must be finite")));
            }
            for (order, ip) in [("iip2", amp.iip2_dbm), ("iip3", amp.iip3_dbm)] {
                if ip.is_nan() || ip == f64::NEG_INFINITY {
                    return Err(config_err(format!("{name} {order} is zero in linear units")));
                }
            }
        }
        let (lo, hi) = self.vga_range_db;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(config_err(format!("invalid VGA range [{lo}, {hi}]")));
        }
        for (name, adc) in [("adc_main", &self.adc_main), ("adc_ref", &self.adc_ref)] {
            if adc.bits == 0 {
                return Err(config_err(format!("{name} needs at least one bit")));
            }
            if !adc.target_power_dbm.is_finite() || !adc.papr_headroom_db.is_finite() {
                return Err(config_err(format!("{name} target and headroom must be finite")));
            }
        }
        Ok(())
    }
}
