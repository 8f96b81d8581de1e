//! Pair potential with exponentially decaying higher-order couplings.
//!
//! The potential of a pair with modified angle difference `theta` is the
//! normalised series `sum_k a^-k cos^k(theta) / sum_k a^-k` for `k = 1..n`,
//! evaluated here through its closed forms. The denominator is written as
//! `a - cos(theta)`, which keeps the maximum `+1` at zero contrast and reduces
//! to `cos(theta)` for `n = 1`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GprError, Result};

/// Angle modification factor applied to spin differences.
pub const Q: f64 = 0.5;

/// Number of harmonics, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn from_f64(v: f64) -> Result<Order> {
        if v.is_infinite() && v > 0.0 {
            Ok(Order::Infinite)
        } else if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(Order::Finite(v as u32))
        } else {
            Err(GprError::param("n", format!("{v} is not a positive integer or inf")))
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Order::Finite(n) => n as f64,
            Order::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(n) => s.serialize_u32(*n),
            Order::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = crate::numeric::deserialize_extended(d)?;
        Order::from_f64(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    pub n: Order,
    #[serde(
        serialize_with = "crate::numeric::serialize_extended",
        deserialize_with = "crate::numeric::deserialize_extended"
    )]
    pub alpha: f64,
}

impl Default for PotentialParams {
    fn default() -> Self {
        PotentialParams::mpr()
    }
}

impl PotentialParams {
    pub fn new(n: Order, alpha: f64) -> Result<Self> {
        let p = PotentialParams { n, alpha };
        p.validate()?;
        Ok(p)
    }

    /// The single-harmonic baseline, `cos(theta)`.
    pub fn mpr() -> Self {
        PotentialParams {
            n: Order::Finite(1),
            alpha: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Order::Finite(0) = self.n {
            return Err(GprError::param("n", "must be at least 1"));
        }
        if self.alpha.is_nan() || self.alpha <= 1.0 {
            return Err(GprError::param("alpha", format!("{} must exceed 1", self.alpha)));
        }
        Ok(())
    }

    #[inline]
    pub fn is_linear(&self) -> bool {
        self.n == Order::Finite(1) || self.alpha.is_infinite()
    }
}

/// Normalisation making the weights `a^-k`, `k = 1..n`, sum to one.
pub fn normalization(n: Order, alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return f64::INFINITY;
    }
    match n {
        Order::Infinite => alpha - 1.0,
        Order::Finite(n) => {
            let a = alpha - 1.0;
            // 1 - alpha^-n without cancellation for alpha close to 1
            let denom = -(-(n as f64) * a.ln_1p()).exp_m1();
            a / denom
        }
    }
}

/// Potential as a function of `c = cos(theta)`.
#[inline]
pub fn pair_potential(c: f64, params: &PotentialParams) -> f64 {
    if params.is_linear() {
        return c;
    }
    let alpha = params.alpha;
    let a = alpha - 1.0;
    let b = 1.0 - c;
    // alpha - c, split to keep precision when both terms are tiny
    let gap = a + b;
    match params.n {
        Order::Infinite => a * c / gap,
        Order::Finite(n) => {
            if gap < 1e-12 {
                return series_sum(c, n, alpha);
            }
            let nf = n as f64;
            let tail = if c > 0.0 {
                -(nf * ((-b).ln_1p() - a.ln_1p())).exp_m1()
            } else {
                1.0 - (c / alpha).powi(n as i32)
            };
            normalization(params.n, alpha) * c * tail / gap
        }
    }
}

fn series_sum(c: f64, n: u32, alpha: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut w = 1.0;
    let mut ck = 1.0;
    for _ in 0..n {
        w /= alpha;
        ck *= c;
        num += w * ck;
        den += w;
    }
    num / den
}

/// Potential of two spin angles.
#[inline]
pub fn pair_energy_term(phi_i: f64, phi_j: f64, params: &PotentialParams) -> f64 {
    pair_potential((Q * (phi_i - phi_j)).cos(), params)
}

/// Direct normalised summation of the harmonic series.
///
/// Reference implementation for tests; limited to finite `n <= 64`.
pub fn series_oracle(c: f64, n: Order, alpha: f64) -> Result<f64> {
    let n = match n {
        Order::Finite(n) if (1..=64).contains(&n) => n,
        _ => return Err(GprError::OracleUnsupported),
    };
    if alpha.is_infinite() {
        return Ok(c);
    }
    let weights: Vec<f64> = (1..=n).map(|k| alpha.powi(-(k as i32))).collect();
    let total: f64 = weights.iter().sum();
    Ok(weights
        .iter()
        .enumerate()
        .map(|(k, w)| w * c.powi(k as i32 + 1))
        .sum::<f64>()
        / total)
}
