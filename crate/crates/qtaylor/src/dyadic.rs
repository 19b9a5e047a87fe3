//! Exact dyadic phase arithmetic.
//!
//! Every phase in these circuits is a rotation by `2π · num / 2^d`, so phases
//! are kept as integer numerators over a power-of-two denominator and only
//! converted to floating point when a backend needs a complex factor. Phase
//! values live on the circle: arithmetic is modulo 1.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::SimError;

/// Largest supported `log2(denominator)`. Numerators stay below `2^63` so
/// addition never overflows a `u64`.
pub const MAX_LOG_DENOM: u8 = 62;

/// A phase `num / 2^{log_denom}`, reduced (odd numerator unless zero) and
/// normalized into `[0, 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: u64,
    log_denom: u8,
}

impl Dyadic {
    /// Phase `num / 2^{log_denom}`, reduced modulo 1.
    pub fn new(num: u64, log_denom: u8) -> Self {
        assert!(
            log_denom <= MAX_LOG_DENOM,
            "dyadic denominator 2^{log_denom} exceeds the supported precision"
        );
        let mut num = num & ((1u64 << log_denom) - 1);
        let mut d = log_denom;
        while d > 0 && num % 2 == 0 {
            if num == 0 {
                d = 0;
                break;
            }
            num /= 2;
            d -= 1;
        }
        Dyadic { num, log_denom: d }
    }

    /// Fallible constructor for values coming from configuration files.
    pub fn checked_new(num: u64, log_denom: u8) -> Result<Self, SimError> {
        if log_denom > MAX_LOG_DENOM {
            return Err(SimError::PhasePrecision(log_denom));
        }
        Ok(Self::new(num, log_denom))
    }

    pub fn zero() -> Self {
        Dyadic { num: 0, log_denom: 0 }
    }

    pub fn half() -> Self {
        Dyadic { num: 1, log_denom: 1 }
    }

    /// The rotation applied by `R_k`: `1 / 2^k`.
    pub fn rk(k: u8) -> Self {
        assert!(k >= 1 && k <= MAX_LOG_DENOM);
        Dyadic { num: 1, log_denom: k }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn log_denom(&self) -> u8 {
        self.log_denom
    }

    pub fn add(self, other: Dyadic) -> Dyadic {
        let d = self.log_denom.max(other.log_denom);
        let a = self.num << (d - self.log_denom);
        let b = other.num << (d - other.log_denom);
        Dyadic::new(a.wrapping_add(b), d)
    }

    /// `-self` modulo 1.
    pub fn neg(self) -> Dyadic {
        if self.num == 0 {
            return Dyadic::zero();
        }
        Dyadic::new((1u64 << self.log_denom) - self.num, self.log_denom)
    }

    pub fn sub(self, other: Dyadic) -> Dyadic {
        self.add(other.neg())
    }

    /// `self · 2^e` modulo 1 (doubling shifts fraction bits out of the top).
    pub fn mul_pow2(self, e: i32) -> Dyadic {
        if e >= 0 {
            let e = e as u8;
            if e >= self.log_denom {
                Dyadic::zero()
            } else {
                Dyadic::new(self.num, self.log_denom - e)
            }
        } else {
            let shift = (-e) as u8;
            assert!(self.log_denom + shift <= MAX_LOG_DENOM);
            Dyadic { num: self.num, log_denom: self.log_denom + shift }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / (1u64 << self.log_denom) as f64
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.log_denom)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Dyadic {
    type Err = String;

    /// Parses `"num/2^d"`, plus the shorthands `"0"` and `"1"` (≡ 0 mod 1).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "0" || s == "1" {
            return Ok(Dyadic::zero());
        }
        let (num, den) = s
            .split_once('/')
            .ok_or_else(|| format!("invalid dyadic {s:?}: expected num/2^d"))?;
        let num: u64 = num.trim().parse().map_err(|e| format!("invalid numerator in {s:?}: {e}"))?;
        let den = den.trim();
        let d: u8 = den
            .strip_prefix("2^")
            .ok_or_else(|| format!("invalid denominator in {s:?}: expected 2^d"))?
            .parse()
            .map_err(|e| format!("invalid exponent in {s:?}: {e}"))?;
        Dyadic::checked_new(num, d).map_err(|e| e.to_string())
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
