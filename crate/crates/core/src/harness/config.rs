use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::budget::TransceiverSpec;
use crate::cancellation::{CancellerConfig, Variant};
use crate::error::{arg_err, config_err, Error, Result};
use crate::waveform::{ChannelParams, OfdmConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BudgetSweep,
    SinrVsPtx,
    SinrVsN,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::BudgetSweep => "budget-sweep",
            Experiment::SinrVsPtx => "sinr-vs-ptx",
            Experiment::SinrVsN => "sinr-vs-n",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Experiment::BudgetSweep, Experiment::SinrVsPtx, Experiment::SinrVsN]
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| arg_err(format!("unknown experiment '{s}'")))
    }
}

/// Physical SI coupling channel. The mean path loss is the transceiver's
/// antenna separation `a_ant_db`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub m_taps: usize,
    pub k_factor_db: f64,
    pub los_delay: usize,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self { m_taps: 8, k_factor_db: 35.8, los_delay: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub p_tx_dbm: Vec<f64>,
    pub n_est: Vec<usize>,
    /// Estimation length of the transmit-power sweep.
    pub fixed_n_est: usize,
    /// Transmit power of the sample-size sweep.
    pub fixed_p_tx_dbm: f64,
    /// Whether the transmit-power sweep uses a calibration period.
    pub ptx_calibrated: bool,
    /// Calibration cases of the sample-size sweep.
    pub n_calibration: Vec<bool>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            p_tx_dbm: vec![-5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0],
            n_est: vec![100, 300, 1_000, 3_000, 10_000, 30_000, 100_000, 300_000],
            fixed_n_est: 10_000,
            fixed_p_tx_dbm: 15.0,
            ptx_calibrated: true,
            n_calibration: vec![true, false],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub n_trials: usize,
    /// Canceller variants; empty selects the experiment's default set.
    pub variants: Vec<Variant>,
    /// Samples scored after the estimation window.
    pub eval_samples: usize,
    pub sinr_cap_db: f64,
    pub output: PathBuf,
    /// Keys given in a `[transceiver]` table override the scenario defaults
    /// one by one, nested tables included.
    #[serde(deserialize_with = "merged_transceiver")]
    pub transceiver: TransceiverSpec,
    pub ofdm: OfdmConfig,
    pub channel: ChannelConfig,
    pub canceller: CancellerConfig,
    pub sweep: SweepConfig,
}

/// Transceiver used by the simulations. Each ADC rail gets 10 dB of envelope
/// PAPR, the 3 dB a single rail sits below the envelope and 1 dB of margin.
/// With 10 dB per rail an OFDM signal clips far above the quantization floor;
/// with 13 dB a clip still lands in roughly one 10^4-sample window in seven
/// and drags that trial's SINR down by several dB.
pub const HARNESS_ADC_HEADROOM_DB: f64 = 14.0;

pub fn harness_transceiver() -> TransceiverSpec {
    let mut t = TransceiverSpec::default();
    t.adc_main.papr_headroom_db = HARNESS_ADC_HEADROOM_DB;
    t.adc_ref.papr_headroom_db = HARNESS_ADC_HEADROOM_DB;
    t
}

fn merge_tables(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn merged_transceiver<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<TransceiverSpec, D::Error> {
    let over = toml::Table::deserialize(d)?;
    let mut base = toml::Table::try_from(harness_transceiver()).map_err(D::Error::custom)?;
    merge_tables(&mut base, over);
    toml::Value::Table(base).try_into().map_err(D::Error::custom)
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let transceiver = harness_transceiver();
        Self {
            experiment: Experiment::SinrVsPtx,
            seed: 1,
            n_trials: 20,
            variants: Vec::new(),
            eval_samples: 10_000,
            sinr_cap_db: 60.0,
            output: PathBuf::from("results.csv"),
            transceiver,
            ofdm: OfdmConfig::default(),
            channel: ChannelConfig::default(),
            canceller: CancellerConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.transceiver.validate()?;
        self.ofdm.validate()?;
        self.canceller.validate()?;
        if self.n_trials == 0 {
            return Err(config_err("n_trials must be at least 1"));
        }
        if self.eval_samples == 0 {
            return Err(config_err("evaluation window must be non-empty"));
        }
        if !(self.sinr_cap_db > 0.0) {
            return Err(config_err("SINR cap must be positive"));
        }
        let s = &self.sweep;
        if s.p_tx_dbm.is_empty() || s.n_est.is_empty() || s.n_calibration.is_empty() {
            return Err(config_err("sweep grids must be non-empty"));
        }
        if s.p_tx_dbm.iter().chain([&s.fixed_p_tx_dbm]).any(|p| !p.is_finite()) {
            return Err(config_err("transmit powers must be finite"));
        }
        if s.n_est.iter().chain([&s.fixed_n_est]).any(|&n| n == 0) {
            return Err(config_err("estimation windows must be non-empty"));
        }
        if self.channel.m_taps == 0 || self.channel.los_delay >= self.channel.m_taps {
            return Err(config_err("channel LOS delay must be below its tap count"));
        }
        if self.channel.k_factor_db.is_nan() || self.channel.k_factor_db == f64::NEG_INFINITY {
            return Err(config_err("channel K-factor must be finite or +inf"));
        }
        Ok(())
    }

    pub fn channel_params(&self) -> ChannelParams {
        ChannelParams {
            n_rx: self.transceiver.n_rx,
            n_tx: self.transceiver.n_tx,
            m_taps: self.channel.m_taps,
            k_factor_db: self.channel.k_factor_db,
            los_delay: self.channel.los_delay,
            mean_path_loss_db: self.transceiver.a_ant_db,
        }
    }

    /// Variants to run, falling back to the experiment default.
    pub fn active_variants(&self) -> Vec<Variant> {
        if !self.variants.is_empty() {
            let mut v = self.variants.clone();
            v.sort();
            v.dedup();
            return v;
        }
        match self.experiment {
            Experiment::SinrVsN => vec![Variant::RefRx],
            _ => Variant::ALL.to_vec(),
        }
    }
}
