//! Waveform generation, signal arithmetic and SI coupling channels.

pub mod channel;
pub mod ofdm;
pub mod signal;

pub use channel::{draw_si_channel, ChannelParams, MimoChannel};
pub use ofdm::{generate_ofdm_frame, generate_ofdm_samples, OfdmConfig, OfdmModulator};
pub use signal::{
    convolve_same, db_to_amplitude, db_to_lin, dbm_to_watts, lin_to_db, mean_power, watts_to_dbm, ComplexSignal,
    SILENT_DBM,
};
