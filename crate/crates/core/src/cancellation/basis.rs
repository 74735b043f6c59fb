use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, config_err, Error, Result};

/// Digital canceller flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Linear model on the reference-receiver captures.
    RefRx,
    /// Linear model on the transmitted data.
    Linear,
    /// Data plus its conjugate.
    WidelyLinear,
    /// Parallel-Hammerstein polynomial of the data.
    Nonlinear,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::RefRx, Variant::Linear, Variant::WidelyLinear, Variant::Nonlinear];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::RefRx => "ref-rx",
            Variant::Linear => "linear",
            Variant::WidelyLinear => "widely-linear",
            Variant::Nonlinear => "nonlinear",
        }
    }

    pub fn uses_reference_receivers(&self) -> bool {
        matches!(self, Variant::RefRx)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| arg_err(format!("unknown canceller variant '{s}' (expected ref-rx, linear, widely-linear or nonlinear)")))
    }
}

/// Static nonlinearity applied to a reference stream before the FIR branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFunction {
    /// `x·|x|^(order−1)`; order 1 is the plain signal.
    Odd { order: u32 },
    /// `conj(x)·|x|^(order−1)`.
    ConjOdd { order: u32 },
}

impl BasisFunction {
    pub const LINEAR: BasisFunction = BasisFunction::Odd { order: 1 };
    pub const CONJUGATE: BasisFunction = BasisFunction::ConjOdd { order: 1 };

    pub fn apply(&self, x: Complex64) -> Complex64 {
        let (base, order) = match *self {
            BasisFunction::Odd { order } => (x, order),
            BasisFunction::ConjOdd { order } => (x.conj(), order),
        };
        if order == 1 {
            base
        } else {
            base * x.norm_sqr().powi(((order - 1) / 2) as i32)
        }
    }

    pub fn expand(&self, x: &[Complex64]) -> Vec<Complex64> {
        x.iter().map(|&s| self.apply(s)).collect()
    }

    pub fn label(&self) -> String {
        match *self {
            BasisFunction::Odd { order: 1 } => "x".into(),
            BasisFunction::ConjOdd { order: 1 } => "conj(x)".into(),
            BasisFunction::Odd { order } => format!("x|x|^{}", order - 1),
            BasisFunction::ConjOdd { order } => format!("conj(x)|x|^{}", order - 1),
        }
    }
}

/// Polynomial basis of the nonlinear canceller.
///
/// The default keeps the odd-order terms of the signal only, which is the
/// classic PA-oriented parallel-Hammerstein canceller. Setting
/// `include_conjugate` adds the conjugate of every term as well.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonlinearBasis {
    pub order: u32,
    pub include_conjugate: bool,
}

impl Default for NonlinearBasis {
    fn default() -> Self {
        Self { order: 3, include_conjugate: false }
    }
}

impl NonlinearBasis {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order.is_multiple_of(2) {
            return Err(config_err(format!("nonlinear order must be odd and positive, got {}", self.order)));
        }
        Ok(())
    }

    pub fn functions(&self) -> Vec<BasisFunction> {
        let orders = (1..=self.order).step_by(2);
        let mut out: Vec<BasisFunction> = orders.clone().map(|order| BasisFunction::Odd { order }).collect();
        if self.include_conjugate {
            out.extend(orders.map(|order| BasisFunction::ConjOdd { order }));
        }
        out
    }
}

/// Basis expansion used by `variant`.
pub fn basis_for(variant: Variant, nonlinear: &NonlinearBasis) -> Vec<BasisFunction> {
    match variant {
        Variant::RefRx | Variant::Linear => vec![BasisFunction::LINEAR],
        Variant::WidelyLinear => vec![BasisFunction::LINEAR, BasisFunction::CONJUGATE],
        Variant::Nonlinear => nonlinear.functions(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("quadratic".parse::<Variant>().is_err());
    }

    #[test]
    fn third_order_term() {
        let x = Complex64::new(0.3, -0.4);
        let y = BasisFunction::Odd { order: 3 }.apply(x);
        assert!((y - x * 0.25).norm() < 1e-15);
        let z = BasisFunction::ConjOdd { order: 5 }.apply(x);
        assert!((z - x.conj() * 0.0625).norm() < 1e-15);
    }

    #[test]
    fn variant_bases() {
        let nl = NonlinearBasis::default();
        assert_eq!(basis_for(Variant::RefRx, &nl), vec![BasisFunction::LINEAR]);
        assert_eq!(basis_for(Variant::WidelyLinear, &nl).len(), 2);
        assert_eq!(basis_for(Variant::Nonlinear, &nl), vec![BasisFunction::LINEAR, BasisFunction::Odd { order: 3 }]);
        let full = NonlinearBasis { order: 5, include_conjugate: true };
        assert_eq!(basis_for(Variant::Nonlinear, &full).len(), 6);
        assert!(NonlinearBasis { order: 4, include_conjugate: false }.validate().is_err());
    }
}
