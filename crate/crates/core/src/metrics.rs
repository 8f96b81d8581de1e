//! Validation measures at the prediction sites and their configuration means.

use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};

/// Errors of one sample configuration. When produced by [`aggregate`] the
/// fields hold configuration means (MAAE, MARE, MAARE, MRASE).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    #[serde(rename = "AAE")]
    pub aae: f64,
    #[serde(rename = "ARE")]
    pub are: f64,
    #[serde(rename = "AARE")]
    pub aare: f64,
    #[serde(rename = "RASE")]
    pub rase: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "MAAE")]
    Maae,
    #[serde(rename = "MARE")]
    Mare,
    #[serde(rename = "MAARE")]
    Maare,
    #[serde(rename = "MRASE")]
    Mrase,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Maae, Metric::Mare, Metric::Maare, Metric::Mrase];

    pub fn of(self, m: &MetricSet) -> f64 {
        match self {
            Metric::Maae => m.aae,
            Metric::Mare => m.are,
            Metric::Maare => m.aare,
            Metric::Mrase => m.rase,
        }
    }

    /// Objective minimised when locating optima; MARE is signed, so its
    /// magnitude is used.
    pub fn objective(self, m: &MetricSet) -> f64 {
        match self {
            Metric::Mare => m.are.abs(),
            _ => self.of(m),
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = GprError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MAAE" | "AAE" => Ok(Metric::Maae),
            "MARE" | "ARE" => Ok(Metric::Mare),
            "MAARE" | "AARE" => Ok(Metric::Maare),
            "MRASE" | "RASE" => Ok(Metric::Mrase),
            _ => Err(GprError::Config(format!("unknown metric `{s}`"))),
        }
    }
}

/// AAE, ARE, AARE and RASE with `eps = Z - Z_hat`. Relative errors divide by
/// the signed true value, so any zero true value is rejected.
pub fn compute_metrics(truth: &[f64], predicted: &[f64]) -> Result<MetricSet> {
    if truth.len() != predicted.len() {
        return Err(GprError::Length {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(GprError::param("truth", "at least one prediction site is required"));
    }
    let zeros: Vec<usize> = truth
        .iter()
        .enumerate()
        .filter_map(|(i, &z)| (z == 0.0).then_some(i))
        .collect();
    if !zeros.is_empty() {
        return Err(GprError::ZeroTruth(zeros));
    }
    let p = truth.len() as f64;
    let (mut abs, mut rel, mut abs_rel, mut sq) = (0.0, 0.0, 0.0, 0.0);
    for (&z, &zh) in truth.iter().zip(predicted) {
        let e = z - zh;
        abs += e.abs();
        rel += e / z;
        abs_rel += e.abs() / z;
        sq += e * e;
    }
    Ok(MetricSet {
        aae: abs / p,
        are: rel / p,
        aare: abs_rel / p,
        rase: (sq / p).sqrt(),
    })
}

/// Component-wise mean over sample configurations.
pub fn aggregate(sets: &[MetricSet]) -> Result<MetricSet> {
    if sets.is_empty() {
        return Err(GprError::EmptyAggregate);
    }
    let s = sets.len() as f64;
    let sum = sets.iter().fold([0.0; 4], |acc, m| {
        [acc[0] + m.aae, acc[1] + m.are, acc[2] + m.aare, acc[3] + m.rase]
    });
    Ok(MetricSet {
        aae: sum[0] / s,
        are: sum[1] / s,
        aare: sum[2] / s,
        rase: sum[3] / s,
    })
}
