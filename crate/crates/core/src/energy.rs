//! Hamiltonian of the generalized planar rotator field.
//!
//! `H = -Jx sum_x V - Jy sum_y V - Jfn sum_fn V - K sum_i cos((phi_i - h_i)/2)`
//! with `V = pair_potential(cos(q (phi_i - phi_j)))`, `Jx = 1 - J_nn` and
//! `Jy = J_nn`. The uniform-field variant uses `h = 0` and a signed `K'`.

use serde::{Deserialize, Serialize};

use crate::error::{GprError, Result};
use crate::grid::{NeighborClass, NeighborTables};
use crate::numeric::CompensatedSum;
use crate::potential::{pair_energy_term, PotentialParams};
use crate::transform::SpinField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FieldMode {
    #[default]
    None,
    /// Attraction towards a site-dependent bias field with strength `k >= 0`.
    Bias { k: f64 },
    /// Uniform field with `h = 0` and signed strength.
    Uniform { k_prime: f64 },
}

impl FieldMode {
    /// Field coefficient, zero when there is no field.
    pub fn strength(&self) -> f64 {
        match *self {
            FieldMode::None => 0.0,
            FieldMode::Bias { k } => k,
            FieldMode::Uniform { k_prime } => k_prime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "T")]
    pub temperature: f64,
    #[serde(flatten)]
    pub potential: PotentialParams,
    #[serde(rename = "J_nn")]
    pub j_nn: f64,
    #[serde(rename = "J_fn")]
    pub j_fn: f64,
    #[serde(default)]
    pub field: FieldMode,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams::mpr(0.001)
    }
}

impl ModelParams {
    /// Isotropic nearest-neighbour model with the plain cosine potential.
    pub fn mpr(temperature: f64) -> Self {
        ModelParams {
            temperature,
            potential: PotentialParams::mpr(),
            j_nn: 0.5,
            j_fn: 0.0,
            field: FieldMode::None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(GprError::param("T", format!("{} must be positive", self.temperature)));
        }
        self.potential.validate()?;
        if !(0.0..=1.0).contains(&self.j_nn) {
            return Err(GprError::param("J_nn", format!("{} outside [0, 1]", self.j_nn)));
        }
        if !self.j_fn.is_finite() {
            return Err(GprError::param("J_fn", "must be finite"));
        }
        match self.field {
            FieldMode::Bias { k } if !(k >= 0.0) || !k.is_finite() => {
                Err(GprError::param("K", format!("{k} must be finite and non-negative")))
            }
            FieldMode::Uniform { k_prime } if !k_prime.is_finite() => {
                Err(GprError::param("K_prime", "must be finite"))
            }
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn j_x(&self) -> f64 {
        1.0 - self.j_nn
    }

    #[inline]
    pub fn j_y(&self) -> f64 {
        self.j_nn
    }
}

/// Bias angles `h_i` on the full grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasField {
    pub h: Vec<f64>,
}

#[inline]
pub fn bias_term(phi: f64, h: f64) -> f64 {
    (0.5 * (phi - h)).cos()
}

pub fn boltzmann_factor(dh: f64, temperature: f64) -> f64 {
    (-dh / temperature).exp()
}

/// Metropolis acceptance probability `min(1, exp(-dH/T))`.
#[inline]
pub fn acceptance_probability(dh: f64, temperature: f64) -> f64 {
    if dh <= 0.0 {
        1.0
    } else {
        (-dh / temperature).exp()
    }
}

/// Borrowed view of everything needed to evaluate energies.
#[derive(Debug, Clone, Copy)]
pub struct Hamiltonian<'a> {
    pub params: &'a ModelParams,
    pub tables: &'a NeighborTables,
    field: FieldTerm<'a>,
    jx: f64,
    jy: f64,
    jfn: f64,
}

#[derive(Debug, Clone, Copy)]
enum FieldTerm<'a> {
    None,
    Bias(f64, &'a [f64]),
    Uniform(f64),
}

impl<'a> Hamiltonian<'a> {
    pub fn new(params: &'a ModelParams, tables: &'a NeighborTables, bias: Option<&'a BiasField>) -> Result<Self> {
        params.validate()?;
        let field = match params.field {
            FieldMode::None => FieldTerm::None,
            FieldMode::Uniform { k_prime } => FieldTerm::Uniform(k_prime),
            FieldMode::Bias { k } => {
                let bias = bias.ok_or(GprError::MissingBiasField)?;
                if bias.h.len() != tables.dims.len() {
                    return Err(GprError::Length {
                        expected: tables.dims.len(),
                        actual: bias.h.len(),
                    });
                }
                FieldTerm::Bias(k, &bias.h)
            }
        };
        Ok(Hamiltonian {
            params,
            tables,
            field,
            jx: params.j_x(),
            jy: params.j_y(),
            jfn: params.j_fn,
        })
    }

    #[inline]
    fn field_energy(&self, site: usize, phi: f64) -> f64 {
        match self.field {
            FieldTerm::None => 0.0,
            FieldTerm::Bias(k, h) => -k * bias_term(phi, h[site]),
            FieldTerm::Uniform(k) => -k * bias_term(phi, 0.0),
        }
    }

    /// Energy of every term touching `site` when it holds angle `phi`, with
    /// neighbour angles read from `angles`.
    #[inline]
    pub fn site_energy(&self, site: usize, phi: f64, angles: &[f64]) -> f64 {
        let pot = &self.params.potential;
        let t = self.tables;
        let mut e = 0.0;
        if self.jx != 0.0 {
            let s: f64 = t
                .neighbors(NeighborClass::NnX, site)
                .iter()
                .map(|&j| pair_energy_term(phi, angles[j], pot))
                .sum();
            e -= self.jx * s;
        }
        if self.jy != 0.0 {
            let s: f64 = t
                .neighbors(NeighborClass::NnY, site)
                .iter()
                .map(|&j| pair_energy_term(phi, angles[j], pot))
                .sum();
            e -= self.jy * s;
        }
        if self.jfn != 0.0 {
            let s: f64 = t
                .neighbors(NeighborClass::Fn, site)
                .iter()
                .map(|&j| pair_energy_term(phi, angles[j], pot))
                .sum();
            e -= self.jfn * s;
        }
        e + self.field_energy(site, phi)
    }

    /// Total energy with every pair counted once.
    pub fn total(&self, angles: &[f64]) -> f64 {
        let pot = &self.params.potential;
        let mut acc = CompensatedSum::new();
        for (class, coupling) in [
            (NeighborClass::NnX, self.jx),
            (NeighborClass::NnY, self.jy),
            (NeighborClass::Fn, self.jfn),
        ] {
            if coupling == 0.0 {
                continue;
            }
            let s: CompensatedSum = self
                .tables
                .pairs(class)
                .iter()
                .map(|&(i, j)| pair_energy_term(angles[i], angles[j], pot))
                .collect();
            acc.add(-coupling * s.value());
        }
        if !matches!(self.field, FieldTerm::None) {
            for (site, &phi) in angles.iter().enumerate() {
                acc.add(self.field_energy(site, phi));
            }
        }
        acc.value()
    }

    /// Total energy from the per-site adjacency views: interaction terms are
    /// visited twice and halved.
    pub fn total_from_adjacency(&self, angles: &[f64]) -> f64 {
        let mut interactions = CompensatedSum::new();
        let mut field = CompensatedSum::new();
        for (site, &phi) in angles.iter().enumerate() {
            let f = self.field_energy(site, phi);
            interactions.add(self.site_energy(site, phi, angles) - f);
            field.add(f);
        }
        0.5 * interactions.value() + field.value()
    }
}

fn check_complete(spins: &SpinField) -> Result<()> {
    match spins.first_unset() {
        Some(site) => Err(GprError::UnsetAngle(site)),
        None => Ok(()),
    }
}

pub fn total_energy(
    spins: &SpinField,
    params: &ModelParams,
    tables: &NeighborTables,
    bias: Option<&BiasField>,
) -> Result<f64> {
    check_complete(spins)?;
    let h = Hamiltonian::new(params, tables, bias)?;
    Ok(h.total(&spins.angles))
}

pub fn local_energy(
    site: usize,
    spins: &SpinField,
    params: &ModelParams,
    tables: &NeighborTables,
    bias: Option<&BiasField>,
) -> Result<f64> {
    if site >= spins.angles.len() {
        return Err(GprError::param("site", format!("{site} out of range")));
    }
    let h = Hamiltonian::new(params, tables, bias)?;
    if !spins.is_set(site) {
        return Err(GprError::UnsetAngle(site));
    }
    for class in NeighborClass::ALL {
        if let Some(&j) = tables.neighbors(class, site).iter().find(|&&j| !spins.is_set(j)) {
            return Err(GprError::UnsetAngle(j));
        }
    }
    Ok(h.site_energy(site, spins.angles[site], &spins.angles))
}
