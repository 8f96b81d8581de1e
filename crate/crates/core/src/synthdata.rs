//! Synthetic ground truth: Whittle-Matérn random fields generated by spectral
//! mode superposition, and the missing-data designs (random thinning and a
//! solid square block).
//!
//! In scaled coordinates `t = (xi1 k1, xi2 k2)` the Whittle-Matérn spectral
//! density in two dimensions is proportional to `(1 + |t|^2)^-(nu + 1)`. Its
//! radial CDF is `1 - (1 + r^2)^-nu`, which is inverted in closed form.

use std::f64::consts::TAU;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{GprError, Result};
use crate::grid::{GridDims, GridField, ObservationMask};
use crate::numeric::bessel_k;

pub const DEFAULT_MODES: usize = 1000;
pub const MIN_MODES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Law {
    Gaussian,
    /// `log Z` is Gaussian with mean `m` and standard deviation `sigma`.
    Lognormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WmSpec {
    pub m: f64,
    pub sigma: f64,
    pub nu: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub law: Law,
}

impl WmSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(GprError::param(name, format!("{v} must be positive and finite")))
            }
        };
        positive("sigma", self.sigma)?;
        positive("nu", self.nu)?;
        positive("xi1", self.xi1)?;
        positive("xi2", self.xi2)?;
        if !self.m.is_finite() {
            return Err(GprError::param("m", "must be finite"));
        }
        Ok(())
    }

    /// Normalised lag distance.
    #[inline]
    pub fn rho(&self, u: (f64, f64)) -> f64 {
        ((u.0 / self.xi1).powi(2) + (u.1 / self.xi2).powi(2)).sqrt()
    }
}

/// Whittle-Matérn covariance of the underlying Gaussian field at lag `u`.
pub fn wm_covariance(u: (f64, f64), spec: &WmSpec) -> f64 {
    let var = spec.sigma * spec.sigma;
    let rho = spec.rho(u);
    if rho == 0.0 {
        return var;
    }
    let nu = spec.nu;
    let scaled = 2f64.powf(1.0 - nu) / gamma(nu) * rho.powf(nu) * bessel_k(nu, rho);
    var * scaled
}

/// One wavevector from the normalised Whittle-Matérn spectral density.
pub fn sample_wavevector<R: Rng + ?Sized>(spec: &WmSpec, rng: &mut R) -> (f64, f64) {
    let u: f64 = rng.random();
    let r = ((1.0 - u).powf(-1.0 / spec.nu) - 1.0).max(0.0).sqrt();
    let theta = rng.random_range(0.0..TAU);
    (r * theta.cos() / spec.xi1, r * theta.sin() / spec.xi2)
}

/// Gaussian (or lognormal) random field on the grid by superposing
/// `n_modes` cosine modes with random wavevectors and phases.
pub fn generate_field<R: Rng + ?Sized>(dims: GridDims, spec: &WmSpec, n_modes: usize, rng: &mut R) -> Result<GridField> {
    dims.validate()?;
    spec.validate()?;
    if n_modes < MIN_MODES {
        return Err(GprError::param("n_modes", format!("{n_modes} is below {MIN_MODES}")));
    }
    let mut acc = vec![0.0; dims.len()];
    // cos(kx x + ky y + psi) = Re(e^{i kx x} e^{i (ky y + psi)})
    let mut cx = vec![(0.0, 0.0); dims.lx];
    let mut cy = vec![(0.0, 0.0); dims.ly];
    for _ in 0..n_modes {
        let (kx, ky) = sample_wavevector(spec, rng);
        let psi = rng.random_range(0.0..TAU);
        for (x, c) in cx.iter_mut().enumerate() {
            let a = kx * x as f64;
            *c = (a.cos(), a.sin());
        }
        for (y, c) in cy.iter_mut().enumerate() {
            let a = ky * y as f64 + psi;
            *c = (a.cos(), a.sin());
        }
        for (y, &(ycos, ysin)) in cy.iter().enumerate() {
            let row = &mut acc[y * dims.lx..(y + 1) * dims.lx];
            for (v, &(xcos, xsin)) in row.iter_mut().zip(&cx) {
                *v += xcos * ycos - xsin * ysin;
            }
        }
    }
    let scale = spec.sigma * (2.0 / n_modes as f64).sqrt();
    let values = acc
        .into_iter()
        .map(|s| {
            let g = spec.m + scale * s;
            match spec.law {
                Law::Gaussian => g,
                Law::Lognormal => g.exp(),
            }
        })
        .collect();
    GridField::new(dims, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MaskSpec {
    /// Remove `floor(p/100 * N_G)` sites uniformly at random.
    Thinning { p: f64 },
    /// Remove an `lb x lb` square at a uniformly drawn position.
    Block { lb: usize },
}

impl MaskSpec {
    pub fn validate(&self, dims: GridDims) -> Result<()> {
        match *self {
            MaskSpec::Thinning { p } if !(p > 0.0 && p < 100.0) => {
                Err(GprError::param("p", format!("{p} outside (0, 100)")))
            }
            MaskSpec::Block { lb } if lb == 0 || lb > dims.lx || lb > dims.ly || lb * lb >= dims.len() => {
                Err(GprError::param("lb", format!("block {lb} does not fit a {}x{} grid", dims.lx, dims.ly)))
            }
            _ => Ok(()),
        }
    }

    /// Number of removed sites for this design on `dims`.
    pub fn missing_count(&self, dims: GridDims) -> usize {
        match *self {
            MaskSpec::Thinning { p } => (p / 100.0 * dims.len() as f64).floor() as usize,
            MaskSpec::Block { lb } => lb * lb,
        }
    }
}

pub fn make_mask<R: Rng + ?Sized>(dims: GridDims, spec: &MaskSpec, rng: &mut R) -> Result<ObservationMask> {
    dims.validate()?;
    spec.validate(dims)?;
    let mut observed = vec![true; dims.len()];
    match *spec {
        MaskSpec::Thinning { .. } => {
            let p = spec.missing_count(dims);
            for site in index::sample(rng, dims.len(), p) {
                observed[site] = false;
            }
        }
        MaskSpec::Block { lb } => {
            let x0 = rng.random_range(0..=dims.lx - lb);
            let y0 = rng.random_range(0..=dims.ly - lb);
            for y in y0..y0 + lb {
                for x in x0..x0 + lb {
                    observed[dims.index(x, y)] = false;
                }
            }
        }
    }
    ObservationMask::new(dims, observed)
}
