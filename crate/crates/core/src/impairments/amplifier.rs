//! Memoryless polynomial models for the PA and the RX gain stages.
//!
//! With `|x|²` in watts the stage output is
//!
//! ```text
//! y = a1·x + a3·x·|x|² + a2·|x|²
//! a1 = 10^(gain_db/20)
//! a3 = −a1 / P_iip3          (P_iip3 in watts)
//! a2 =  a1 / √P_iip2          (P_iip2 in watts, RX stages only)
//! ```
//!
//! which places the two-tone third- and second-order intercepts at the
//! configured input powers (per-tone power convention).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::waveform::{db_to_amplitude, dbm_to_watts, ComplexSignal};

/// Gain stage parameters. An infinite intercept disables that order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierSpec {
    pub gain_db: f64,
    #[serde(default = "inf")]
    pub iip2_dbm: f64,
    #[serde(default = "inf")]
    pub iip3_dbm: f64,
    pub nf_db: f64,
}

fn inf() -> f64 {
    f64::INFINITY
}

impl AmplifierSpec {
    pub fn pa() -> Self {
        Self { gain_db: 27.0, iip2_dbm: f64::INFINITY, iip3_dbm: 15.0, nf_db: 5.0 }
    }

    pub fn lna() -> Self {
        Self { gain_db: 25.0, iip2_dbm: f64::INFINITY, iip3_dbm: 5.0, nf_db: 4.1 }
    }

    pub fn mixer() -> Self {
        Self { gain_db: 6.0, iip2_dbm: 50.0, iip3_dbm: 15.0, nf_db: 4.0 }
    }

    /// VGA at 0 dB; the AGC overrides the gain.
    pub fn vga() -> Self {
        Self { gain_db: 0.0, iip2_dbm: 50.0, iip3_dbm: 20.0, nf_db: 4.0 }
    }

    pub fn linear(gain_db: f64) -> Self {
        Self { gain_db, iip2_dbm: f64::INFINITY, iip3_dbm: f64::INFINITY, nf_db: 0.0 }
    }

    pub fn with_gain(self, gain_db: f64) -> Self {
        Self { gain_db, ..self }
    }

    pub fn a1(&self) -> f64 {
        db_to_amplitude(self.gain_db)
    }

    pub fn a2(&self) -> f64 {
        if self.iip2_dbm.is_finite() {
            self.a1() / dbm_to_watts(self.iip2_dbm).sqrt()
        } else {
            0.0
        }
    }

    pub fn a3(&self) -> f64 {
        if self.iip3_dbm.is_finite() {
            -self.a1() / dbm_to_watts(self.iip3_dbm)
        } else {
            0.0
        }
    }
}

fn polynomial(x: &ComplexSignal, a1: f64, a2: f64, a3: f64) -> ComplexSignal {
    x.map(|s| {
        let p = s.norm_sqr();
        s * (a1 + a3 * p) + Complex64::new(a2 * p, 0.0)
    })
}

/// Odd-order PA model: `y = a1·x + a3·x·|x|²`. Any IIP2 in `spec` is ignored.
pub fn apply_pa(x: &ComplexSignal, spec: &AmplifierSpec) -> ComplexSignal {
    polynomial(x, spec.a1(), 0.0, spec.a3())
}

/// RX stage model including the second-order envelope term when IIP2 is finite.
pub fn apply_rx_stage(x: &ComplexSignal, spec: &AmplifierSpec) -> ComplexSignal {
    polynomial(x, spec.a1(), spec.a2(), spec.a3())
}
