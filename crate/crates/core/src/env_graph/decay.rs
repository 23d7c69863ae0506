use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::Error;

/// Non-increasing decay `g` applied to hop distance.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Decay {
    /// `g(d) = 1 / (1 + d)`.
    #[default]
    InverseLinear,
    /// `g(d) = exp(-rate * d)`, `rate >= 0`.
    Exponential(f64),
}

impl Decay {
    #[inline]
    pub fn eval(&self, d: u32) -> f64 {
        match *self {
            Decay::InverseLinear => 1.0 / (1.0 + d as f64),
            Decay::Exponential(rate) => (-rate * d as f64).exp(),
        }
    }

    /// Values of `g` for distances `0..=d_max`.
    pub fn table(&self, d_max: u32) -> Vec<f64> {
        (0..=d_max).map(|d| self.eval(d)).collect()
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Decay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decay::InverseLinear => f.write_str("inv1p"),
            Decay::Exponential(rate) => write!(f, "exp:{rate}"),
        }
    }
}

impl FromStr for Decay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "inv1p" {
            return Ok(Decay::InverseLinear);
        }
        if let Some(rate) = s.strip_prefix("exp:") {
            let rate: f64 = rate
                .parse()
                .map_err(|_| Error::InvalidParams(format!("bad decay rate in {s:?}")))?;
            if rate < 0.0 || !rate.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "decay rate must be >= 0: {s:?}"
                )));
            }
            return Ok(Decay::Exponential(rate));
        }
        Err(Error::InvalidParams(format!("unknown decay {s:?}")))
    }
}

impl TryFrom<String> for Decay {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<Decay> for String {
    fn from(d: Decay) -> String {
        d.to_string()
    }
}
