use serde::{Deserialize, Serialize};

use crate::waveform::{db_to_amplitude, ComplexSignal};

/// IQ mixer image rejection. `f64::INFINITY` is an ideal mixer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IqSpec {
    pub irr_db: f64,
}

impl IqSpec {
    pub fn tx() -> Self {
        Self { irr_db: 25.0 }
    }

    pub fn rx() -> Self {
        Self { irr_db: 60.0 }
    }

    /// Image coefficient; real and positive.
    pub fn image_gain(&self) -> f64 {
        if self.irr_db.is_infinite() && self.irr_db > 0.0 {
            0.0
        } else {
            db_to_amplitude(-self.irr_db)
        }
    }
}

/// `y = x + g2·conj(x)` with `g2 = 10^(−irr/20)`.
pub fn apply_iq_imbalance(x: &ComplexSignal, spec: &IqSpec) -> ComplexSignal {
    let g2 = spec.image_gain();
    if g2 == 0.0 {
        return x.clone();
    }
    x.map(|s| s + s.conj() * g2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn tone(n: usize) -> ComplexSignal {
        ComplexSignal::new((0..n).map(|k| Complex64::from_polar(0.1, 0.21 * k as f64)).collect(), 1.0).unwrap()
    }

    #[test]
    fn ideal_mixer_is_identity() {
        let x = tone(64);
        assert_eq!(apply_iq_imbalance(&x, &IqSpec { irr_db: f64::INFINITY }), x);
    }

    #[test]
    fn image_of_exponential_is_irr_below_direct() {
        let x = tone(4096);
        let y = apply_iq_imbalance(&x, &IqSpec::tx());
        // the image of e^{jwn} is the mirrored exponential, i.e. y − x
        let image = y.sub(&x);
        let ratio_db = 10.0 * (image.mean_power_w() / x.mean_power_w()).log10();
        assert!((ratio_db + 25.0).abs() < 1e-9, "{ratio_db}");
        let mirrored = image.samples().iter().enumerate().all(|(k, s)| {
            (s - Complex64::from_polar(0.1 * IqSpec::tx().image_gain(), -0.21 * k as f64)).norm() < 1e-15
        });
        assert!(mirrored);
    }

    #[test]
    fn real_input_is_scaled() {
        let x = ComplexSignal::new((0..32).map(|k| Complex64::new((k as f64).sin(), 0.0)).collect(), 1.0).unwrap();
        let spec = IqSpec { irr_db: 20.0 };
        let y = apply_iq_imbalance(&x, &spec);
        let g = 1.0 + spec.image_gain();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert!((a * g - b).norm() < 1e-15);
        }
    }
}
