//! Scenario configuration, Monte-Carlo experiments, SINR scoring and the
//! impairment calibration suite.

pub mod config;
pub mod experiment;
pub mod sinr;
pub mod trial;
pub mod validate;

pub use config::{harness_transceiver, HARNESS_ADC_HEADROOM_DB, ChannelConfig, Experiment, ScenarioConfig, SweepConfig};
pub use experiment::{
    run_experiment, simulate_sinr_rows, summarize, summary_path, write_sinr_csv, write_summary_csv,
    ExperimentReport, SinrRow, SinrSummary, SINR_CSV_HEADER, SUMMARY_CSV_HEADER,
};
pub use sinr::measure_sinr;
pub use trial::{
    cancel_and_score, ideal_sinr_db, simulate_capture, simulate_trial, trial_seed, Capture, TrialOutcome,
    WARN_AGC_CLAMP, WARN_ESTIMATION_FAILED, WARN_RF_SHORTFALL,
};
pub use validate::{run_validation, write_validation_csv, Check};
