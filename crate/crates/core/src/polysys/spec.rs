use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Marx design instance: the stage count, the even harmonics to assign,
/// and the storage capacitance / inductance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct DesignSpec {
    alpha: Vec<u32>,
    c: f64,
    ell: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n: usize,
    alpha: Vec<u32>,
    c: f64,
    ell: f64,
}

impl TryFrom<RawSpec> for DesignSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        if raw.alpha.len() != raw.n {
            return Err(Error::InvalidSpec(format!(
                "n = {} but {} harmonics given",
                raw.n,
                raw.alpha.len()
            )));
        }
        DesignSpec::new(raw.alpha, raw.c, raw.ell)
    }
}

impl From<DesignSpec> for RawSpec {
    fn from(s: DesignSpec) -> Self {
        RawSpec {
            n: s.n(),
            alpha: s.alpha,
            c: s.c,
            ell: s.ell,
        }
    }
}

impl DesignSpec {
    pub fn new(alpha: Vec<u32>, c: f64, ell: f64) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidSpec("at least one stage is required".into()));
        }
        for (i, &a) in alpha.iter().enumerate() {
            if a == 0 || a % 2 != 0 {
                return Err(Error::InvalidSpec(format!(
                    "alpha[{i}] = {a} is not a positive even integer"
                )));
            }
            if alpha[..i].contains(&a) {
                return Err(Error::InvalidSpec(format!("alpha value {a} is repeated")));
            }
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidSpec(format!("capacitance must be positive, got {c}")));
        }
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::InvalidSpec(format!("inductance must be positive, got {ell}")));
        }
        Ok(Self { alpha, c, ell })
    }

    /// `n` stages with the lowest harmonics `alpha_i = 2i` and `c = ell = 1`.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(default_alpha(n), 1.0, 1.0)
    }

    pub fn with_components(self, c: f64, ell: f64) -> Result<Self> {
        Self::new(self.alpha, c, ell)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Fundamental angular frequency `1 / sqrt(ell c)`.
    pub fn omega0(&self) -> f64 {
        1.0 / (self.ell * self.c).sqrt()
    }

    /// Time `pi sqrt(ell c)` at which the load holds all the energy.
    pub fn transfer_time(&self) -> f64 {
        std::f64::consts::PI * (self.ell * self.c).sqrt()
    }

    /// Target spectrum of `BF`: `alpha_i^2 - 1`, exact.
    pub fn targets(&self) -> Vec<BigRational> {
        self.alpha
            .iter()
            .map(|&a| BigRational::from_integer(BigInt::from(u64::from(a) * u64::from(a) - 1)))
            .collect()
    }

    /// Target spectrum of `K B^-1`: `1 / (alpha_i^2 - 1)`, exact.
    pub fn inverse_targets(&self) -> Vec<BigRational> {
        self.targets().iter().map(|t| t.recip()).collect()
    }

    pub fn targets_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(|&a| f64::from(a) * f64::from(a) - 1.0).collect()
    }
}

pub fn default_alpha(n: usize) -> Vec<u32> {
    (1..=n as u32).map(|i| 2 * i).collect()
}

/// `sum_j 1 / (alpha_j^2 - 1)`, exact.
pub fn inverse_target_sum(alpha: &[u32]) -> BigRational {
    alpha
        .iter()
        .map(|&a| BigRational::new(BigInt::from(1), BigInt::from(u64::from(a) * u64::from(a) - 1)))
        .sum()
}
