//! Parameter sweeps over synthetic data.
//!
//! A sweep draws `S` sample configurations (masks over one shared field by
//! default), runs conditional prediction for every point of a one- or
//! two-axis parameter grid, and averages the validation measures over the
//! configurations.
//!
//! Seeds are derived by counter from the master seed: the Monte Carlo seed of
//! cell `(s, i, j)` is `derive_seed(master, [s, i, j])`, so a cell's result
//! depends only on its coordinates and never on the rest of the grid.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bias::{pure_bias_predict, BiasProvider, BiharmonicInpaint};
use crate::energy::{FieldMode, ModelParams};
use crate::error::{GprError, Result};
use crate::grid::{build_neighbor_tables, GridDims, GridField, ObservationMask};
use crate::io::csv_io;
use crate::metrics::{aggregate, compute_metrics, Metric, MetricSet};
use crate::numeric::{derive_seed, format_extended, Extended};
use crate::potential::Order;
use crate::sampler::{conditional_predict_with_tables, McSchedule};
use crate::synthdata::{generate_field, make_mask, MaskSpec, WmSpec, DEFAULT_MODES};
use crate::transform::to_spin_angles;

const FIELD_TAG: u64 = 0x66_6965_6c64;
const MASK_TAG: u64 = 0x6d61_736b;

/// Temperature grid used when none is given: 16 log-spaced values in
/// `[0.001, 0.2]`.
pub fn default_temperature_grid() -> Vec<f64> {
    let (lo, hi) = (0.001f64.ln(), 0.2f64.ln());
    (0..16).map(|k| (lo + (hi - lo) * k as f64 / 15.0).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "T")]
    Temperature,
    #[serde(rename = "n")]
    Order,
    /// `1/alpha`; zero means `alpha = inf`.
    #[serde(rename = "alpha_inv")]
    AlphaInv,
    #[serde(rename = "J_nn")]
    JNn,
    #[serde(rename = "J_fn")]
    JFn,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "K_prime")]
    KPrime,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Temperature => "T",
            Axis::Order => "n",
            Axis::AlphaInv => "alpha_inv",
            Axis::JNn => "J_nn",
            Axis::JFn => "J_fn",
            Axis::K => "K",
            Axis::KPrime => "K_prime",
        }
    }

    /// Writes `v` into `params`, checking the axis domain. A zero field
    /// strength switches the field off.
    pub fn apply(self, params: &mut ModelParams, v: f64) -> Result<()> {
        let bad = |reason: &str| Err(GprError::Config(format!("{} = {}: {reason}", self.name(), format_extended(v))));
        match self {
            Axis::Temperature => {
                if !(v > 0.0 && v.is_finite()) {
                    return bad("must be positive");
                }
                params.temperature = v;
            }
            Axis::Order => params.potential.n = Order::from_f64(v)?,
            Axis::AlphaInv => {
                if !(0.0..1.0).contains(&v) {
                    return bad("must lie in [0, 1)");
                }
                params.potential.alpha = if v == 0.0 { f64::INFINITY } else { 1.0 / v };
            }
            Axis::JNn => {
                if !(0.0..=1.0).contains(&v) {
                    return bad("must lie in [0, 1]");
                }
                params.j_nn = v;
            }
            Axis::JFn => {
                if !v.is_finite() {
                    return bad("must be finite");
                }
                params.j_fn = v;
            }
            Axis::K => {
                if !(v >= 0.0 && v.is_finite()) {
                    return bad("must be non-negative");
                }
                params.field = if v == 0.0 { FieldMode::None } else { FieldMode::Bias { k: v } };
            }
            Axis::KPrime => {
                if !v.is_finite() {
                    return bad("must be finite");
                }
                params.field = if v == 0.0 { FieldMode::None } else { FieldMode::Uniform { k_prime: v } };
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub name: Axis,
    pub values: Vec<Extended>,
}

impl SweepAxis {
    pub fn new(name: Axis, values: &[f64]) -> Self {
        SweepAxis {
            name,
            values: values.iter().map(|&v| Extended(v)).collect(),
        }
    }
}

fn default_modes() -> usize {
    DEFAULT_MODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub dims: GridDims,
    pub wm: WmSpec,
    #[serde(default = "default_modes")]
    pub n_modes: usize,
    /// Draw a new field for every configuration instead of sharing one.
    #[serde(default)]
    pub redraw_per_config: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub data: DataSpec,
    pub mask: MaskSpec,
    #[serde(rename = "S")]
    pub s: usize,
    pub fixed_params: ModelParams,
    pub sweep_axes: Vec<SweepAxis>,
    #[serde(default)]
    pub schedule: McSchedule,
    pub master_seed: u64,
    /// Also score interpolation-only prediction on every configuration.
    #[serde(default)]
    pub bc_baseline: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.data.dims.validate()?;
        self.data.wm.validate()?;
        self.mask.validate(self.data.dims)?;
        self.schedule.validate()?;
        if self.s == 0 {
            return Err(GprError::Config("S must be at least 1".into()));
        }
        if self.sweep_axes.is_empty() || self.sweep_axes.len() > 2 {
            return Err(GprError::Config("one or two sweep axes are required".into()));
        }
        if self.sweep_axes.len() == 2 {
            let (a, b) = (self.sweep_axes[0].name, self.sweep_axes[1].name);
            let field_axes = [Axis::K, Axis::KPrime];
            if a == b || (field_axes.contains(&a) && field_axes.contains(&b)) {
                return Err(GprError::Config(format!("sweep axes {} and {} overlap", a.name(), b.name())));
            }
        }
        for axis in &self.sweep_axes {
            if axis.values.is_empty() {
                return Err(GprError::Config(format!("axis {} has no values", axis.name.name())));
            }
        }
        for point in self.grid_points() {
            self.params_at(&point)?.validate()?;
        }
        Ok(())
    }

    /// Axis values of every cell, first axis outermost.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.sweep_axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.0);
                        q
                    })
                })
                .collect();
        }
        points
    }

    fn grid_indices(&self) -> Vec<(u64, u64)> {
        let n1 = self.sweep_axes[0].values.len() as u64;
        let n2 = self.sweep_axes.get(1).map_or(1, |a| a.values.len() as u64);
        (0..n1).flat_map(|i| (0..n2).map(move |j| (i, j))).collect()
    }

    pub fn params_at(&self, point: &[f64]) -> Result<ModelParams> {
        let mut params = self.fixed_params;
        for (axis, &v) in self.sweep_axes.iter().zip(point) {
            axis.name.apply(&mut params, v)?;
        }
        Ok(params)
    }

    /// Seed of cell `(s, i, j)`.
    pub fn cell_seed(&self, s: usize, i: u64, j: u64) -> u64 {
        derive_seed(self.master_seed, &[s as u64, i, j])
    }

    /// Field and mask of configuration `s`.
    pub fn configuration(&self, s: usize) -> Result<(GridField, ObservationMask)> {
        let field_seed = if self.data.redraw_per_config {
            derive_seed(self.master_seed, &[FIELD_TAG, s as u64])
        } else {
            derive_seed(self.master_seed, &[FIELD_TAG])
        };
        let field = generate_field(
            self.data.dims,
            &self.data.wm,
            self.data.n_modes,
            &mut ChaCha8Rng::seed_from_u64(field_seed),
        )?;
        let mask_seed = derive_seed(self.master_seed, &[MASK_TAG, s as u64]);
        let mask = make_mask(self.data.dims, &self.mask, &mut ChaCha8Rng::seed_from_u64(mask_seed))?;
        Ok((field, mask))
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serialises");
        let digest = Sha256::digest(&json);
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_values: Vec<Extended>,
    /// Means over configurations.
    pub metrics: MetricSet,
    pub per_config: Vec<MetricSet>,
    /// Monte Carlo seed used for each configuration.
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub metrics: MetricSet,
    pub per_config: Vec<MetricSet>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub config_hash: String,
    pub rows: Vec<SweepRow>,
    #[serde(default)]
    pub bc_baseline: Option<Baseline>,
    /// Not serialised, so result files stay reproducible.
    #[serde(skip)]
    pub wall_time: Duration,
}

fn metrics_at_gaps(truth: &GridField, mask: &ObservationMask, predicted: impl Fn(usize) -> f64) -> Result<MetricSet> {
    let sites: Vec<usize> = mask.missing_sites().collect();
    let t: Vec<f64> = sites.iter().map(|&s| truth.values[s]).collect();
    let p: Vec<f64> = sites.iter().map(|&s| predicted(s)).collect();
    compute_metrics(&t, &p)
}

/// Sample with the missing values erased, so nothing downstream can read them.
fn sample_of(field: &GridField, mask: &ObservationMask) -> GridField {
    let mut sample = field.clone();
    for s in mask.missing_sites() {
        sample.values[s] = f64::NAN;
    }
    sample
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let start = std::time::Instant::now();
    config.validate()?;
    let tables = build_neighbor_tables(config.data.dims)?;
    let points = config.grid_points();
    let indices = config.grid_indices();
    let first_bias_cell = points
        .iter()
        .position(|p| matches!(config.params_at(p).map(|m| m.field), Ok(FieldMode::Bias { .. })));

    let configurations: Vec<(GridField, ObservationMask)> = (0..config.s)
        .into_par_iter()
        .map(|s| config.configuration(s))
        .collect::<Result<_>>()?;
    let samples: Vec<GridField> = configurations.iter().map(|(f, m)| sample_of(f, m)).collect();

    let inpaint = BiharmonicInpaint::default();
    let biases: Vec<Option<Box<dyn BiasProvider>>> = configurations
        .par_iter()
        .zip(&samples)
        .enumerate()
        .map(|(s, ((_, mask), sample))| -> Result<Option<Box<dyn BiasProvider>>> {
            let cell = match first_bias_cell {
                Some(c) if mask.n_missing() > 0 => c,
                _ => return Ok(None),
            };
            let field = to_spin_angles(sample, mask).and_then(|(spins, _)| inpaint.bias_field(&spins));
            match field {
                Ok(h) => Ok(Some(Box::new(h))),
                Err(e) => Err(GprError::Cell { config: s, cell, source: Box::new(e) }),
            }
        })
        .collect::<Result<_>>()?;

    let n_cells = points.len();
    let cells: Vec<(usize, usize)> = (0..n_cells).flat_map(|c| (0..config.s).map(move |s| (c, s))).collect();
    let results: Vec<MetricSet> = cells
        .par_iter()
        .map(|&(c, s)| {
            let (field, mask) = &configurations[s];
            let (i, j) = indices[c];
            let schedule = config.schedule.with_seed(config.cell_seed(s, i, j));
            let run = || -> Result<MetricSet> {
                let params = config.params_at(&points[c])?;
                let provider: &dyn BiasProvider = biases[s].as_deref().unwrap_or(&inpaint);
                let pred = conditional_predict_with_tables(&samples[s], mask, &params, &schedule, provider, &tables)?;
                metrics_at_gaps(field, mask, |site| {
                    let k = pred.sites.binary_search(&site).expect("prediction site");
                    pred.values[k]
                })
            };
            run().map_err(|e| GprError::Cell {
                config: s,
                cell: c,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let rows = points
        .iter()
        .enumerate()
        .map(|(c, point)| {
            let per_config = results[c * config.s..(c + 1) * config.s].to_vec();
            let (i, j) = indices[c];
            Ok(SweepRow {
                axis_values: point.iter().map(|&v| Extended(v)).collect(),
                metrics: aggregate(&per_config)?,
                per_config,
                seeds: (0..config.s).map(|s| config.cell_seed(s, i, j)).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let bc_baseline = if config.bc_baseline {
        let per_config: Vec<MetricSet> = configurations
            .par_iter()
            .zip(&samples)
            .zip(&biases)
            .map(|(((field, mask), sample), bias)| {
                let provider: &dyn BiasProvider = bias.as_deref().unwrap_or(&inpaint);
                let pred = pure_bias_predict(sample, mask, provider)?;
                metrics_at_gaps(field, mask, |site| pred.values[site])
            })
            .collect::<Result<_>>()?;
        Some(Baseline {
            metrics: aggregate(&per_config)?,
            per_config,
        })
    } else {
        None
    };

    Ok(SweepResult {
        config: config.clone(),
        config_hash: config.hash(),
        rows,
        bc_baseline,
        wall_time: start.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub row: usize,
    pub axis_values: Vec<f64>,
    pub value: f64,
}

/// Row minimising `metric` (its magnitude for MARE). Ties go to the lowest
/// temperature, then the lowest value of the other axis.
pub fn find_optima(result: &SweepResult, metric: Metric) -> Option<Optimum> {
    let axes: Vec<Axis> = result.config.sweep_axes.iter().map(|a| a.name).collect();
    let t_pos = axes.iter().position(|&a| a == Axis::Temperature);
    let key = |row: &SweepRow| {
        let mut k = Vec::with_capacity(axes.len());
        if let Some(t) = t_pos {
            k.push(row.axis_values[t].0);
        }
        k.extend(
            row.axis_values
                .iter()
                .enumerate()
                .filter(|&(p, _)| Some(p) != t_pos)
                .map(|(_, v)| v.0),
        );
        k
    };
    result
        .rows
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            metric
                .objective(&a.metrics)
                .total_cmp(&metric.objective(&b.metrics))
                .then_with(|| {
                    key(a)
                        .iter()
                        .zip(key(b).iter())
                        .map(|(x, y)| x.total_cmp(y))
                        .find(|o| o.is_ne())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        })
        .map(|(row, r)| Optimum {
            row,
            axis_values: r.axis_values.iter().map(|v| v.0).collect(),
            value: metric.of(&r.metrics),
        })
}

/// One line per cell: axis columns, the four means, `n_configs` and the
/// master seed.
pub fn write_result_csv(path: &Path, result: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_io)?;
    let mut header: Vec<&str> = result.config.sweep_axes.iter().map(|a| a.name.name()).collect();
    header.extend(["MAAE", "MARE", "MAARE", "MRASE", "n_configs", "seed"]);
    w.write_record(&header).map_err(csv_io)?;
    for row in &result.rows {
        let mut rec: Vec<String> = row.axis_values.iter().map(|v| format_extended(v.0)).collect();
        rec.extend(Metric::ALL.iter().map(|m| m.of(&row.metrics).to_string()));
        rec.push(row.per_config.len().to_string());
        rec.push(result.config.master_seed.to_string());
        w.write_record(&rec).map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Histogram of angles pooled over snapshots and sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleHistogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub std_dev: f64,
}

pub fn angle_histogram(snapshots: &[Vec<f64>], bins: usize) -> Result<AngleHistogram> {
    if bins == 0 {
        return Err(GprError::param("bins", "must be positive"));
    }
    let n: usize = snapshots.iter().map(Vec::len).sum();
    if n == 0 {
        return Err(GprError::EmptySample);
    }
    let tau = std::f64::consts::TAU;
    let mut counts = vec![0u64; bins];
    let (mut sum, mut sq) = (0.0, 0.0);
    for &a in snapshots.iter().flatten() {
        counts[((a / tau * bins as f64) as usize).min(bins - 1)] += 1;
        sum += a;
        sq += a * a;
    }
    let mean = sum / n as f64;
    let var = (sq / n as f64 - mean * mean).max(0.0) * n as f64 / (n as f64 - 1.0).max(1.0);
    Ok(AngleHistogram {
        edges: (0..=bins).map(|k| tau * k as f64 / bins as f64).collect(),
        counts,
        mean,
        std_dev: var.sqrt(),
    })
}
