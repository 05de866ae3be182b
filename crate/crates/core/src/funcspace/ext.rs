//! Values on the extended real line ℝ ∪ {±∞}.
//!
//! Addition saturates toward the infinite operand, except for `+∞ + (−∞)`,
//! which is reported as [`Error::Undefined`] instead of being assigned a
//! convention. Scaling is only defined for strictly positive factors, which is
//! all the deformations in this crate ever need.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedReal {
    NegInf,
    Finite(f64),
    PosInf,
}

pub use ExtendedReal::{NegInf, PosInf};

impl ExtendedReal {
    pub const ZERO: ExtendedReal = ExtendedReal::Finite(0.0);

    /// Maps IEEE infinities onto the markers. NaN is rejected.
    pub fn from_f64(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(Error::Undefined("NaN is not an extended real"))
        } else if x == f64::INFINITY {
            Ok(PosInf)
        } else if x == f64::NEG_INFINITY {
            Ok(NegInf)
        } else {
            Ok(ExtendedReal::Finite(x))
        }
    }

    /// Like [`ExtendedReal::from_f64`] but for values known not to be NaN.
    ///
    /// Panics on NaN.
    pub fn real(x: f64) -> Self {
        Self::from_f64(x).expect("NaN passed as an extended real")
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn is_pos_inf(self) -> bool {
        self == PosInf
    }

    pub fn is_neg_inf(self) -> bool {
        self == NegInf
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            NegInf => f64::NEG_INFINITY,
            ExtendedReal::Finite(x) => x,
            PosInf => f64::INFINITY,
        }
    }

    pub fn try_add(self, rhs: Self) -> Result<Self> {
        match (self, rhs) {
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::Undefined("+inf + -inf")),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => Ok(Self::real(a + b)),
        }
    }

    /// Adds a finite real. Never fails.
    pub fn add_real(self, rhs: f64) -> Self {
        debug_assert!(rhs.is_finite());
        match self {
            ExtendedReal::Finite(a) => Self::real(a + rhs),
            inf => inf,
        }
    }

    /// Multiplication by λ > 0; infinities keep their sign.
    pub fn scale(self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Undefined("scaling requires a finite factor > 0"));
        }
        Ok(match self {
            ExtendedReal::Finite(a) => Self::real(lambda * a),
            inf => inf,
        })
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl std::ops::Neg for ExtendedReal {
    type Output = Self;

    fn neg(self) -> Self {
        match self {
            NegInf => PosInf,
            PosInf => NegInf,
            ExtendedReal::Finite(a) => ExtendedReal::Finite(-a),
        }
    }
}

impl From<f64> for ExtendedReal {
    fn from(x: f64) -> Self {
        Self::real(x)
    }
}

impl Eq for ExtendedReal {}

impl Ord for ExtendedReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegInf => f.write_str("-inf"),
            PosInf => f.write_str("inf"),
            ExtendedReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for ExtendedReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" => Ok(PosInf),
            "-inf" => Ok(NegInf),
            t => {
                let x: f64 = t.parse().map_err(|_| Error::Parse(format!("not an extended real: `{t}`")))?;
                Self::from_f64(x)
            }
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(x) => s.serialize_f64(*x),
            NegInf => s.serialize_str("-inf"),
            PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => ExtendedReal::from_f64(x).map_err(serde::de::Error::custom),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}
