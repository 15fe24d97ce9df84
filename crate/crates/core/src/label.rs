//! Exact nonnegative rational labels.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A nonnegative rational number with arbitrary precision.
///
/// The textual form is always `p/q` in lowest terms (`0/1`, `1/1`, `1/3`),
/// so labels and distances round-trip through files without loss.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Label(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("label {0} is negative")]
    Negative(String),
    #[error("cannot parse {0:?} as an exact fraction")]
    Malformed(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("radius {0} is not positive")]
    NonpositiveRadius(String),
}

impl Label {
    pub fn new(value: BigRational) -> Result<Self, LabelError> {
        if value.is_negative() {
            return Err(LabelError::Negative(value.to_string()));
        }
        Ok(Label(value))
    }

    pub fn zero() -> Self {
        Label(BigRational::zero())
    }

    pub fn one() -> Self {
        Label(BigRational::one())
    }

    pub fn integer(n: u64) -> Self {
        Label(BigRational::from_integer(BigInt::from(n)))
    }

    /// `1/n`; panics on `n == 0`.
    pub fn reciprocal(n: u64) -> Self {
        assert!(n > 0, "reciprocal of zero");
        Label(BigRational::new(BigInt::one(), BigInt::from(n)))
    }

    /// `p/q` in lowest terms; panics on `q == 0`.
    pub fn ratio(p: u64, q: u64) -> Self {
        assert!(q > 0, "zero denominator");
        Label(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn into_rational(self) -> BigRational {
        self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses a possibly negative `p/q` or integer string into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational, LabelError> {
    let t = s.trim();
    let malformed = || LabelError::Malformed(s.to_string());
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| malformed())?;
            let q: BigInt = q.trim().parse().map_err(|_| malformed())?;
            if q.is_zero() {
                return Err(LabelError::ZeroDenominator(s.to_string()));
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = t.parse().map_err(|_| malformed())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

impl FromStr for Label {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Label::new(parse_rational(s)?)
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A strictly positive rational, used for radii and scales.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Radius(Label);

impl Radius {
    pub fn new(value: Label) -> Result<Self, LabelError> {
        if value.is_positive() {
            Ok(Radius(value))
        } else {
            Err(LabelError::NonpositiveRadius(value.to_string()))
        }
    }

    pub fn reciprocal(n: u64) -> Self {
        Radius(Label::reciprocal(n))
    }

    pub fn ratio(p: u64, q: u64) -> Self {
        Radius::new(Label::ratio(p, q)).expect("positive radius")
    }

    pub fn label(&self) -> &Label {
        &self.0
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Radius {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let r = parse_rational(s)?;
        if !r.is_positive() {
            return Err(LabelError::NonpositiveRadius(s.to_string()));
        }
        Ok(Radius(Label(r)))
    }
}

impl Serialize for Radius {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
