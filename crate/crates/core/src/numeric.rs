//! Small numeric helpers shared across modules: JSON support for infinite
//! values, compensated summation, the modified Bessel function of the second
//! kind and seed derivation.

use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

/// Serialises `f64`, writing infinities as the strings `"inf"` / `"-inf"`.
pub fn serialize_extended<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_infinite() {
        s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
    } else {
        s.serialize_f64(*v)
    }
}

/// Accepts a JSON number or one of `"inf"`, `"infinity"`, `"-inf"`.
pub fn deserialize_extended<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    struct ExtVisitor;
    impl Visitor<'_> for ExtVisitor {
        type Value = f64;
        fn expecting(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            f.write_str("a number or \"inf\"")
        }
        fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
            Ok(v)
        }
        fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
            Ok(v as f64)
        }
        fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
            parse_extended(v).ok_or_else(|| E::custom(format!("invalid number `{v}`")))
        }
    }
    d.deserialize_any(ExtVisitor)
}

pub fn parse_extended(s: &str) -> Option<f64> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

pub fn format_extended(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v}")
    }
}

/// `f64` whose JSON form may be `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Extended(pub f64);

impl serde::Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_extended(&self.0, s)
    }
}

impl<'de> serde::Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        deserialize_extended(d).map(Extended)
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Modified Bessel function of the second kind, `K_nu(x)` for `x > 0`.
///
/// Uses `K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt`; the integrand
/// decays double-exponentially so a plain trapezoid rule converges fast.
pub fn bessel_k(nu: f64, x: f64) -> f64 {
    assert!(x > 0.0, "bessel_k requires x > 0");
    let nu = nu.abs();
    // upper limit where x cosh(t) - nu t exceeds ~750 (exp underflow)
    let mut t_max: f64 = 1.0;
    while x * t_max.cosh() - nu * t_max < 750.0 + x {
        t_max += 0.5;
    }
    let h = 1.0 / 64.0;
    let steps = (t_max / h).ceil() as usize;
    // scale by exp(x) to keep the terms representable for large x
    let mut acc = CompensatedSum::new();
    for k in 0..=steps {
        let t = k as f64 * h;
        let w = if k == 0 || k == steps { 0.5 } else { 1.0 };
        acc.add(w * (-x * (t.cosh() - 1.0) + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp()));
    }
    acc.value() * h * (-x).exp()
}

/// SplitMix64 finaliser.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and a path of counters.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |acc, &p| mix64(acc ^ mix64(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn bessel_half_integer_closed_forms() {
        for &x in &[0.05, 0.3, 1.0, 2.5, 7.0, 30.0] {
            let k05 = (PI / (2.0 * x)).sqrt() * (-x).exp();
            assert!((bessel_k(0.5, x) / k05 - 1.0).abs() < 1e-12, "x={x}");
            let k15 = k05 * (1.0 + 1.0 / x);
            assert!((bessel_k(1.5, x) / k15 - 1.0).abs() < 1e-12);
            let k25 = k05 * (1.0 + 3.0 / x + 3.0 / (x * x));
            assert!((bessel_k(2.5, x) / k25 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bessel_integer_reference_values() {
        // tabulated K_0(1), K_1(1)
        assert!((bessel_k(0.0, 1.0) - 0.421_024_438_240_708_3).abs() < 1e-13);
        assert!((bessel_k(1.0, 1.0) - 0.601_907_230_197_234_6).abs() < 1e-13);
    }

    #[test]
    fn extended_parse() {
        assert_eq!(parse_extended("inf"), Some(f64::INFINITY));
        assert_eq!(parse_extended("2.5"), Some(2.5));
        assert_eq!(parse_extended("x"), None);
        assert_eq!(format_extended(f64::INFINITY), "inf");
    }

    #[test]
    fn seeds_differ_by_path() {
        let a = derive_seed(1, &[0, 0, 1]);
        let b = derive_seed(1, &[0, 1, 0]);
        let c = derive_seed(2, &[0, 0, 1]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(1, &[0, 0, 1]));
    }

    #[test]
    fn compensated_sum_beats_naive() {
        let mut acc = CompensatedSum::new();
        acc.add(1e16);
        for _ in 0..1000 {
            acc.add(1.0);
        }
        acc.add(-1e16);
        assert_eq!(acc.value(), 1000.0);
    }
}
