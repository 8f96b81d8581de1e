//! Smooth bias field for the field term, and the interpolation-only baseline.
//!
//! The default provider fills gaps by biharmonic inpainting in angle space:
//! it minimises the squared discrete Laplacian summed over every grid site,
//! with observed sites held fixed. Sites near the border use one-sided second
//! differences so that linear functions have zero Laplacian everywhere. The
//! resulting normal equations are solved with Jacobi-preconditioned conjugate
//! gradients.

use std::f64::consts::TAU;

use crate::energy::BiasField;
use crate::error::{GprError, Result};
use crate::grid::{validate_mask, GridDims, GridField, ObservationMask};
use crate::transform::{to_spin_angles, SpinField};

/// Minimum number of observed sites needed to pin the interpolant.
pub const MIN_OBSERVED: usize = 4;

/// Source of the bias angles `h_i`.
pub trait BiasProvider: Send + Sync {
    fn bias_field(&self, spins: &SpinField) -> Result<BiasField>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiharmonicInpaint {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BiharmonicInpaint {
    fn default() -> Self {
        BiharmonicInpaint {
            tolerance: 1e-11,
            max_iterations: 50_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InpaintOutcome {
    pub field: BiasField,
    /// Number of sites clamped back into `[0, 2pi]`.
    pub clamped: usize,
    pub iterations: usize,
}

impl BiasProvider for BiharmonicInpaint {
    fn bias_field(&self, spins: &SpinField) -> Result<BiasField> {
        Ok(self.inpaint(spins)?.field)
    }
}

/// A bias field computed once and reused.
impl BiasProvider for BiasField {
    fn bias_field(&self, spins: &SpinField) -> Result<BiasField> {
        if self.h.len() != spins.angles.len() {
            return Err(crate::error::GprError::Length {
                expected: spins.angles.len(),
                actual: self.h.len(),
            });
        }
        Ok(self.clone())
    }
}

/// Second-difference stencil along one axis at coordinate `c` of an axis of
/// length `n`, as `(offset, weight)` triples relative to `c`.
fn second_difference(c: usize, n: usize) -> Option<[(isize, f64); 3]> {
    if n < 3 {
        None
    } else if c == 0 {
        Some([(0, 1.0), (1, -2.0), (2, 1.0)])
    } else if c == n - 1 {
        Some([(-2, 1.0), (-1, -2.0), (0, 1.0)])
    } else {
        Some([(-1, 1.0), (0, -2.0), (1, 1.0)])
    }
}

/// Sparse rows of the discrete Laplacian, one per site.
struct Laplacian {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Laplacian {
    fn new(dims: GridDims) -> Self {
        let rows = (0..dims.len())
            .map(|s| {
                let (x, y) = dims.coords(s);
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(6);
                if let Some(st) = second_difference(x, dims.lx) {
                    for (d, w) in st {
                        row.push((dims.index((x as isize + d) as usize, y), w));
                    }
                }
                if let Some(st) = second_difference(y, dims.ly) {
                    for (d, w) in st {
                        row.push((dims.index(x, (y as isize + d) as usize), w));
                    }
                }
                row
            })
            .collect();
        Laplacian { rows }
    }

    fn apply(&self, u: &[f64], out: &mut [f64]) {
        for (o, row) in out.iter_mut().zip(&self.rows) {
            *o = row.iter().map(|&(j, w)| w * u[j]).sum();
        }
    }

    fn apply_transpose(&self, r: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (row, &rv) in self.rows.iter().zip(r) {
            for &(j, w) in row {
                out[j] += w * rv;
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BiharmonicInpaint {
    pub fn inpaint(&self, spins: &SpinField) -> Result<InpaintOutcome> {
        let dims = spins.dims();
        let counts = validate_mask(&spins.mask, dims)?;
        if counts.observed < MIN_OBSERVED {
            return Err(GprError::TooFewObserved {
                needed: MIN_OBSERVED,
                got: counts.observed,
            });
        }
        for site in spins.mask.observed_sites() {
            if spins.angles[site].is_nan() {
                return Err(GprError::UnsetAngle(site));
            }
        }
        let missing: Vec<usize> = spins.mask.missing_sites().collect();
        let mut h: Vec<f64> = (0..dims.len())
            .map(|s| if spins.mask.is_observed(s) { spins.angles[s] } else { 0.0 })
            .collect();
        if missing.is_empty() {
            return Ok(InpaintOutcome {
                field: BiasField { h },
                clamped: 0,
                iterations: 0,
            });
        }

        let lap = Laplacian::new(dims);
        let n = dims.len();
        let ridge = 1e-12;
        let mut full = vec![0.0; n];
        let mut lu = vec![0.0; n];
        let mut ltl = vec![0.0; n];

        // A x = L_M^T L_M x + ridge x, restricted to missing sites
        let mut apply_a = |x: &[f64], out: &mut [f64]| {
            full.iter_mut().for_each(|v| *v = 0.0);
            for (&s, &v) in missing.iter().zip(x) {
                full[s] = v;
            }
            lap.apply(&full, &mut lu);
            lap.apply_transpose(&lu, &mut ltl);
            for ((o, &s), &v) in out.iter_mut().zip(&missing).zip(x) {
                *o = ltl[s] + ridge * v;
            }
        };

        // b = -L_M^T L_O u_O
        let mut rhs_full = vec![0.0; n];
        let mut rhs_lu = vec![0.0; n];
        lap.apply(&h, &mut rhs_lu);
        lap.apply_transpose(&rhs_lu, &mut rhs_full);
        let b: Vec<f64> = missing.iter().map(|&s| -rhs_full[s]).collect();

        let diag: Vec<f64> = {
            let mut d = vec![ridge; n];
            for row in &lap.rows {
                for &(j, w) in row {
                    d[j] += w * w;
                }
            }
            missing.iter().map(|&s| d[s]).collect()
        };

        let m = missing.len();
        // start from the mean observed angle
        let mean = spins.mask.observed_sites().map(|s| spins.angles[s]).sum::<f64>() / counts.observed as f64;
        let mut x = vec![mean; m];
        let mut ax = vec![0.0; m];
        apply_a(&x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let b_norm = dot(&b, &b).sqrt().max(dot(&diag, &diag).sqrt() * 1e-3);
        let mut ap = vec![0.0; m];
        let mut iterations = 0;
        while iterations < self.max_iterations {
            if dot(&r, &r).sqrt() <= self.tolerance * b_norm {
                break;
            }
            apply_a(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..m {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            for i in 0..m {
                z[i] = r[i] / diag[i];
            }
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for i in 0..m {
                p[i] = z[i] + beta * p[i];
            }
            iterations += 1;
        }

        let mut clamped = 0;
        for (&s, &v) in missing.iter().zip(&x) {
            let c = v.clamp(0.0, TAU);
            if c != v {
                clamped += 1;
            }
            h[s] = c;
        }
        Ok(InpaintOutcome {
            field: BiasField { h },
            clamped,
            iterations,
        })
    }
}

/// Bias field from the default biharmonic provider.
pub fn interpolate_bias(sample_angles: &SpinField, mask: &ObservationMask) -> Result<BiasField> {
    let spins = SpinField {
        angles: sample_angles.angles.clone(),
        mask: mask.clone(),
    };
    BiharmonicInpaint::default().bias_field(&spins)
}

/// Interpolation-only prediction: the bias field mapped back to data units.
/// Observed sites keep their sample values.
pub fn pure_bias_predict(sample: &GridField, mask: &ObservationMask, provider: &dyn BiasProvider) -> Result<GridField> {
    let counts = validate_mask(mask, sample.dims)?;
    if counts.missing == 0 {
        return Ok(sample.clone());
    }
    let (spins, spec) = to_spin_angles(sample, mask)?;
    let bias = provider.bias_field(&spins)?;
    let mut out = sample.clone();
    for site in mask.missing_sites() {
        out.values[site] = spec.to_value(bias.h[site]);
    }
    Ok(out)
}
