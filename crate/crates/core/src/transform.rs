//! Linear map between data values and spin angles in `[0, 2pi]`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};
use crate::grid::{GridDims, GridField, ObservationMask};

/// Marker for an angle that has not been initialised yet.
pub const UNSET: f64 = f64::NAN;

const RANGE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformSpec {
    pub z_min: f64,
    pub z_max: f64,
}

impl TransformSpec {
    pub fn new(z_min: f64, z_max: f64) -> Result<Self> {
        if !(z_max > z_min) || !z_min.is_finite() || !z_max.is_finite() {
            return Err(GprError::DegenerateRange(z_min));
        }
        Ok(TransformSpec { z_min, z_max })
    }

    #[inline]
    pub fn to_angle(&self, z: f64) -> f64 {
        TAU * (z - self.z_min) / (self.z_max - self.z_min)
    }

    #[inline]
    pub fn to_value(&self, phi: f64) -> f64 {
        self.z_min + (self.z_max - self.z_min) * phi / TAU
    }
}

/// Angles on the full grid together with the observation mask. Missing sites
/// hold [`UNSET`] until the sampler initialises them.
#[derive(Debug, Clone)]
pub struct SpinField {
    pub angles: Vec<f64>,
    pub mask: ObservationMask,
}

impl SpinField {
    pub fn dims(&self) -> GridDims {
        self.mask.dims
    }

    #[inline]
    pub fn is_set(&self, site: usize) -> bool {
        !self.angles[site].is_nan()
    }

    pub fn first_unset(&self) -> Option<usize> {
        self.angles.iter().position(|a| a.is_nan())
    }

    pub fn check_range(&self) -> Result<()> {
        for (site, &angle) in self.angles.iter().enumerate() {
            if angle.is_nan() {
                continue;
            }
            if !(-RANGE_TOLERANCE..=TAU + RANGE_TOLERANCE).contains(&angle) {
                return Err(GprError::AngleRange { site, angle });
            }
        }
        Ok(())
    }
}

/// Maps the observed sample onto `[0, 2pi]` using the sample extremes.
pub fn to_spin_angles(sample: &GridField, mask: &ObservationMask) -> Result<(SpinField, TransformSpec)> {
    if sample.dims != mask.dims {
        return Err(GprError::Length {
            expected: sample.values.len(),
            actual: mask.observed.len(),
        });
    }
    let mut z_min = f64::INFINITY;
    let mut z_max = f64::NEG_INFINITY;
    let mut any = false;
    for site in mask.observed_sites() {
        let z = sample.values[site];
        if !z.is_finite() {
            return Err(GprError::param("sample", format!("non-finite value at site {site}")));
        }
        z_min = z_min.min(z);
        z_max = z_max.max(z);
        any = true;
    }
    if !any {
        return Err(GprError::EmptySample);
    }
    if z_max <= z_min {
        return Err(GprError::DegenerateRange(z_min));
    }
    let spec = TransformSpec { z_min, z_max };
    let angles = (0..sample.values.len())
        .map(|i| {
            if mask.is_observed(i) {
                spec.to_angle(sample.values[i]).clamp(0.0, TAU)
            } else {
                UNSET
            }
        })
        .collect();
    Ok((
        SpinField {
            angles,
            mask: mask.clone(),
        },
        spec,
    ))
}

/// Inverse map. Every angle must be set and lie in `[0, 2pi]` (up to 1e-9).
pub fn from_spin_angles(spins: &SpinField, spec: &TransformSpec) -> Result<GridField> {
    let mut values = Vec::with_capacity(spins.angles.len());
    for (site, &phi) in spins.angles.iter().enumerate() {
        if phi.is_nan() {
            return Err(GprError::UnsetAngle(site));
        }
        if !(-RANGE_TOLERANCE..=TAU + RANGE_TOLERANCE).contains(&phi) {
            return Err(GprError::AngleRange { site, angle: phi });
        }
        values.push(spec.to_value(phi.clamp(0.0, TAU)));
    }
    GridField::new(spins.dims(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn line(values: Vec<f64>) -> (GridField, ObservationMask) {
        let dims = GridDims::new(values.len(), 2).unwrap();
        let mut all = values.clone();
        all.extend(values);
        let field = GridField::new(dims, all).unwrap();
        (field, ObservationMask::all_observed(dims))
    }

    #[test]
    fn endpoints_and_midpoint() {
        let (f, m) = line(vec![3.0, 5.0, 7.0]);
        let (spins, spec) = to_spin_angles(&f, &m).unwrap();
        assert_eq!(spins.angles[0], 0.0);
        assert!((spins.angles[1] - PI).abs() < 1e-15);
        assert!((spins.angles[2] - TAU).abs() < 1e-15);
        assert_eq!((spec.z_min, spec.z_max), (3.0, 7.0));
    }

    #[test]
    fn inverse_examples() {
        let spec = TransformSpec::new(5.0, 9.0).unwrap();
        assert_eq!(spec.to_value(0.0), 5.0);
        assert!((spec.to_value(PI) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_is_degenerate() {
        let (f, m) = line(vec![2.0, 2.0, 2.0]);
        assert!(matches!(to_spin_angles(&f, &m), Err(GprError::DegenerateRange(_))));
    }

    #[test]
    fn missing_sites_are_unset() {
        let dims = GridDims::new(2, 2).unwrap();
        let f = GridField::new(dims, vec![1.0, 2.0, 3.0, 100.0]).unwrap();
        let m = ObservationMask::new(dims, vec![true, true, true, false]).unwrap();
        let (spins, spec) = to_spin_angles(&f, &m).unwrap();
        assert!(!spins.is_set(3));
        assert_eq!(spec.z_max, 3.0);
        assert!(matches!(from_spin_angles(&spins, &spec), Err(GprError::UnsetAngle(3))));
    }

    #[test]
    fn out_of_range_angle_rejected() {
        let dims = GridDims::new(2, 2).unwrap();
        let spins = SpinField {
            angles: vec![0.0, 1.0, 2.0, TAU + 1e-6],
            mask: ObservationMask::all_observed(dims),
        };
        let spec = TransformSpec::new(0.0, 1.0).unwrap();
        assert!(matches!(
            from_spin_angles(&spins, &spec),
            Err(GprError::AngleRange { site: 3, .. })
        ));
    }

    proptest! {
        #[test]
        fn round_trip_identity(angles in prop::collection::vec(0.0..TAU, 4..40), lo in -50.0f64..50.0, span in 0.1f64..100.0) {
            let n = angles.len() / 2 * 2;
            let dims = GridDims::new(n / 2, 2).unwrap();
            let spins = SpinField { angles: angles[..n].to_vec(), mask: ObservationMask::all_observed(dims) };
            let spec = TransformSpec::new(lo, lo + span).unwrap();
            let field = from_spin_angles(&spins, &spec).unwrap();
            for (z, phi) in field.values.iter().zip(&spins.angles) {
                prop_assert!((spec.to_angle(*z) - phi).abs() < 1e-12);
                prop_assert!(*z >= spec.z_min - 1e-12 && *z <= spec.z_max + 1e-12);
            }
        }

        #[test]
        fn monotone_and_affine_invariant(values in prop::collection::vec(-100.0f64..100.0, 6..30), a in 0.1f64..10.0, b in -10.0f64..10.0) {
            let n = values.len() / 2 * 2;
            let dims = GridDims::new(n / 2, 2).unwrap();
            let field = GridField::new(dims, values[..n].to_vec()).unwrap();
            let mask = ObservationMask::all_observed(dims);
            prop_assume!(field.values.iter().any(|&v| v != field.values[0]));
            let (spins, _) = to_spin_angles(&field, &mask).unwrap();
            for i in 0..n {
                for j in 0..n {
                    if field.values[i] < field.values[j] {
                        prop_assert!(spins.angles[i] < spins.angles[j]);
                    }
                }
            }
            let scaled = GridField::new(dims, field.values.iter().map(|v| a * v + b).collect()).unwrap();
            let (spins2, _) = to_spin_angles(&scaled, &mask).unwrap();
            for (p, q) in spins.angles.iter().zip(&spins2.angles) {
                prop_assert!((p - q).abs() < 1e-9);
            }
        }
    }
}
