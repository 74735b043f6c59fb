//! Complex baseband signal container and the basic arithmetic shared by every
//! other module.
//!
//! Normalization: `|s[n]|²` is instantaneous power in watts, so a constant
//! `1 + 0j` signal sits at 30 dBm. Every dB quantity in the crate converts
//! through this single convention.

use std::ops::Range;

use num_complex::Complex64;

use crate::error::{arg_err, Result};

/// Value reported by [`ComplexSignal::measure_power`] for an all-zero signal.
pub const SILENT_DBM: f64 = f64::NEG_INFINITY;

#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_lin(dbm - 30.0)
}

#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    lin_to_db(w) + 30.0
}

/// Amplitude scale factor corresponding to a power gain in dB.
#[inline]
pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// A finite run of complex baseband samples at a fixed sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(arg_err(format!("sample rate must be positive, got {sample_rate}")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate)
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same sample rate, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self { samples, sample_rate: self.sample_rate }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        self.with_samples(self.samples.iter().map(|&s| f(s)).collect())
    }

    /// Mean power in watts.
    pub fn mean_power_w(&self) -> f64 {
        mean_power(&self.samples)
    }

    /// Mean power in dBm, or [`SILENT_DBM`] for an all-zero signal.
    pub fn measure_power(&self) -> Result<f64> {
        if self.samples.is_empty() {
            return Err(arg_err("cannot measure the power of an empty signal"));
        }
        let p = self.mean_power_w();
        Ok(if p > 0.0 { watts_to_dbm(p) } else { SILENT_DBM })
    }

    /// Peak-to-average power ratio in dB.
    pub fn papr_db(&self) -> f64 {
        let peak = self.samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
        lin_to_db(peak / self.mean_power_w())
    }

    pub fn scale(&self, k: f64) -> Self {
        self.map(|s| s * k)
    }

    /// Rescale so the mean power equals `dbm`. Silent signals are returned unchanged.
    pub fn normalized_to_dbm(&self, dbm: f64) -> Self {
        let p = self.mean_power_w();
        if p == 0.0 {
            return self.clone();
        }
        self.scale((dbm_to_watts(dbm) / p).sqrt())
    }

    pub fn conj(&self) -> Self {
        self.map(|s| s.conj())
    }

    /// Sample-wise sum; the result has the length of the shorter operand.
    pub fn add(&self, other: &ComplexSignal) -> Self {
        self.with_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ComplexSignal) -> Self {
        self.with_samples(self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect())
    }

    /// Delay by `n` samples, keeping the length (leading zeros, tail dropped).
    pub fn delay(&self, n: usize) -> Self {
        let len = self.len();
        let mut out = vec![Complex64::new(0.0, 0.0); len];
        if n < len {
            out[n..].copy_from_slice(&self.samples[..len - n]);
        }
        self.with_samples(out)
    }

    pub fn window(&self, range: Range<usize>) -> Self {
        self.with_samples(self.samples[range].to_vec())
    }

    /// Convolve with an impulse response. See [`convolve_same`].
    pub fn convolve(&self, taps: &[Complex64]) -> Result<Self> {
        if taps.is_empty() {
            return Err(arg_err("impulse response must have at least one tap"));
        }
        Ok(self.with_samples(convolve_same(&self.samples, taps)))
    }
}

/// Linear convolution truncated to the input length, aligned to the input start:
/// `y[n] = Σ_k h[k]·x[n−k]` for `0 ≤ n < len(x)`, with `x[m] = 0` for `m < 0`.
pub fn convolve_same(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for (k, &hk) in h.iter().enumerate() {
        if hk == Complex64::new(0.0, 0.0) || k >= x.len() {
            continue;
        }
        for (yn, &xn) in y[k..].iter_mut().zip(x) {
            *yn += hk * xn;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn brute_force(x: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        (0..x.len())
            .map(|n| {
                let mut acc = c(0.0, 0.0);
                for k in 0..h.len() {
                    if n >= k {
                        acc += h[k] * x[n - k];
                    }
                }
                acc
            })
            .collect()
    }

    #[test]
    fn constant_unit_signal_is_30_dbm() {
        let s = ComplexSignal::new(vec![c(1.0, 0.0); 16], 1.0).unwrap();
        assert!((s.measure_power().unwrap() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn silent_signal_reports_sentinel() {
        let s = ComplexSignal::zeros(8, 1.0).unwrap();
        assert_eq!(s.measure_power().unwrap(), SILENT_DBM);
    }

    #[test]
    fn empty_signal_power_is_an_error() {
        let s = ComplexSignal::new(vec![], 1.0).unwrap();
        assert!(s.measure_power().is_err());
    }

    #[test]
    fn rejects_bad_sample_rate() {
        assert!(ComplexSignal::new(vec![c(1.0, 0.0)], 0.0).is_err());
        assert!(ComplexSignal::new(vec![c(1.0, 0.0)], f64::NAN).is_err());
    }

    #[test]
    fn white_gaussian_power_by_direct_averaging() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sigma = (dbm_to_watts(-100.0) / 2.0).sqrt();
        let v: Vec<Complex64> = (0..1_000_000)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                c(re * sigma, im * sigma)
            })
            .collect();
        let s = ComplexSignal::new(v, 1.0).unwrap();
        let oracle = watts_to_dbm(s.samples().iter().map(|x| x.re * x.re + x.im * x.im).sum::<f64>() / 1e6);
        let p = s.measure_power().unwrap();
        assert!((p - oracle).abs() < 1e-9);
        assert!((p + 100.0).abs() < 0.05, "{p}");
    }

    #[test]
    fn identity_and_unit_delay_taps() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = ComplexSignal::new(random_vec(&mut rng, 32), 1.0).unwrap();
        assert_eq!(x.convolve(&[c(1.0, 0.0)]).unwrap(), x);
        let d = x.convolve(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(d.samples()[0], c(0.0, 0.0));
        assert_eq!(&d.samples()[1..], &x.samples()[..31]);
        assert_eq!(d, x.delay(1));
    }

    #[test]
    fn convolution_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_vec(&mut rng, 64);
        let h = random_vec(&mut rng, 8);
        let fast = convolve_same(&x, &h);
        let slow = brute_force(&x, &h);
        let scale = slow.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn empty_taps_rejected() {
        let x = ComplexSignal::new(vec![c(1.0, 0.0)], 1.0).unwrap();
        assert!(x.convolve(&[]).is_err());
    }

    proptest! {
        #[test]
        fn convolution_is_linear(seed in any::<u64>(), a_re in -3.0..3.0f64, b_im in -3.0..3.0f64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_vec(&mut rng, 48);
            let y = random_vec(&mut rng, 48);
            let h = random_vec(&mut rng, 6);
            let (a, b) = (c(a_re, 0.5), c(0.25, b_im));
            let mixed: Vec<Complex64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let lhs = convolve_same(&mixed, &h);
            let hx = convolve_same(&x, &h);
            let hy = convolve_same(&y, &h);
            for n in 0..48 {
                let rhs = a * hx[n] + b * hy[n];
                let scale = 1.0 + rhs.norm();
                prop_assert!((lhs[n] - rhs).norm() <= 1e-12 * scale);
            }
        }
    }
}
