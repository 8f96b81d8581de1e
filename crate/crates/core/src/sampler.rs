//! Metropolis Monte Carlo over the spin field.
//!
//! Sweeps use the checkerboard order: every site of parity A, then every site
//! of parity B. All interactions join opposite parities, so the sites of one
//! half-sweep are mutually independent; they are updated from a read-only view
//! and may run in parallel. Each site owns its own random stream, so the
//! trajectory does not depend on how the work is scheduled.
//!
//! Proposals are `phi + u`, `u ~ U(-w, w)`; a proposal leaving `[0, 2pi]` is
//! rejected. Optionally the width `w` is rescaled after every burn-in sweep
//! towards a target acceptance rate, then frozen for the averaging sweeps.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bias::BiasProvider;
use crate::energy::{acceptance_probability, BiasField, FieldMode, Hamiltonian, ModelParams};
use crate::error::{GprError, Result};
use crate::grid::{
    build_neighbor_tables, checkerboard_partition, validate_mask, GridDims, GridField, NeighborTables, ObservationMask,
    Parity,
};
use crate::numeric::CompensatedSum;
use crate::transform::{to_spin_angles, SpinField, TransformSpec};

const MIN_WIDTH: f64 = 1e-6;
const INIT_STREAM: u64 = u64::MAX;

fn default_burn_in() -> usize {
    200
}
fn default_averaging() -> usize {
    300
}
fn default_width() -> f64 {
    FRAC_PI_2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSchedule {
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_averaging")]
    pub averaging: usize,
    /// Initial proposal half-width in radians.
    #[serde(default = "default_width")]
    pub proposal_width: f64,
    /// Acceptance rate the width is tuned towards during burn-in; `None`
    /// (the default) keeps the width fixed.
    #[serde(default)]
    pub target_acceptance: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl Default for McSchedule {
    fn default() -> Self {
        McSchedule {
            burn_in: default_burn_in(),
            averaging: default_averaging(),
            proposal_width: default_width(),
            target_acceptance: None,
            seed: 0,
        }
    }
}

impl McSchedule {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.averaging < 1 {
            return Err(GprError::param("averaging", "at least one averaging sweep is required"));
        }
        if !(self.proposal_width > 0.0 && self.proposal_width <= TAU) {
            return Err(GprError::param(
                "proposal_width",
                format!("{} outside (0, 2pi]", self.proposal_width),
            ));
        }
        if let Some(t) = self.target_acceptance {
            if !(t > 0.0 && t < 1.0) {
                return Err(GprError::param("target_acceptance", format!("{t} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PredictionResult {
    /// Prediction sites in increasing order.
    pub sites: Vec<usize>,
    /// Predictions in data units, aligned with `sites`.
    pub values: Vec<f64>,
    /// Observed angles plus equilibrium mean angles at the prediction sites.
    pub mean_angles: SpinField,
    pub transform: Option<TransformSpec>,
    /// Specific energy after every sweep (burn-in then averaging).
    pub energy_trace: Vec<f64>,
    pub acceptance_rate: f64,
    pub final_width: f64,
}

impl PredictionResult {
    /// The sample with predictions written into the gaps.
    pub fn fill(&self, sample: &GridField) -> GridField {
        let mut out = sample.clone();
        for (&site, &v) in self.sites.iter().zip(&self.values) {
            out.values[site] = v;
        }
        out
    }
}

/// Draws each missing angle from the empirical distribution of observed
/// angles.
pub fn initialize_missing<R: Rng + ?Sized>(spins: &SpinField, rng: &mut R) -> Result<SpinField> {
    let pool: Vec<f64> = spins.mask.observed_sites().map(|i| spins.angles[i]).collect();
    if pool.is_empty() {
        return Err(GprError::EmptySample);
    }
    if let Some(site) = pool.iter().position(|a| a.is_nan()) {
        return Err(GprError::UnsetAngle(site));
    }
    let mut out = spins.clone();
    for site in spins.mask.missing_sites() {
        out.angles[site] = pool[rng.random_range(0..pool.len())];
    }
    Ok(out)
}

/// Outcome of one half-sweep.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepStats {
    pub proposed: usize,
    pub accepted: usize,
    pub energy_change: f64,
}

impl SweepStats {
    fn merge(self, other: SweepStats) -> SweepStats {
        SweepStats {
            proposed: self.proposed + other.proposed,
            accepted: self.accepted + other.accepted,
            energy_change: self.energy_change + other.energy_change,
        }
    }
}

/// Per-site random streams for the sites a chain updates.
pub struct SiteStreams {
    rngs: Vec<ChaCha8Rng>,
}

impl SiteStreams {
    pub fn new(seed: u64, sites: &[usize]) -> Self {
        let rngs = sites
            .iter()
            .map(|&s| {
                let mut r = ChaCha8Rng::seed_from_u64(seed);
                r.set_stream(s as u64);
                r
            })
            .collect();
        SiteStreams { rngs }
    }
}

/// Metropolis update of every listed site of one parity. `sites` must all
/// share that parity; `streams` is aligned with `sites`.
pub fn metropolis_half_sweep(
    angles: &mut [f64],
    sites: &[usize],
    streams: &mut SiteStreams,
    hamiltonian: &Hamiltonian<'_>,
    width: f64,
) -> SweepStats {
    let temperature = hamiltonian.params.temperature;
    let view: &[f64] = angles;
    let moves: Vec<Option<(f64, f64)>> = sites
        .par_iter()
        .zip(streams.rngs.par_iter_mut())
        .with_min_len(256)
        .map(|(&site, rng)| {
            let u: f64 = rng.random_range(-width..width);
            let r: f64 = rng.random();
            let old = view[site];
            let new = old + u;
            if !(0.0..=TAU).contains(&new) {
                return None;
            }
            let dh = hamiltonian.site_energy(site, new, view) - hamiltonian.site_energy(site, old, view);
            (r < acceptance_probability(dh, temperature)).then_some((new, dh))
        })
        .collect();
    let mut stats = SweepStats {
        proposed: sites.len(),
        ..Default::default()
    };
    let mut de = CompensatedSum::new();
    for (&site, mv) in sites.iter().zip(moves) {
        if let Some((new, dh)) = mv {
            angles[site] = new;
            stats.accepted += 1;
            de.add(dh);
        }
    }
    stats.energy_change = de.value();
    stats
}

/// A running chain over a fixed set of updatable sites.
struct Chain<'a> {
    hamiltonian: Hamiltonian<'a>,
    angles: Vec<f64>,
    groups: [(Vec<usize>, SiteStreams); 2],
    width: f64,
    energy: CompensatedSum,
    n_sites: f64,
}

impl<'a> Chain<'a> {
    fn new(
        hamiltonian: Hamiltonian<'a>,
        angles: Vec<f64>,
        updatable: impl Iterator<Item = usize>,
        dims: GridDims,
        schedule: &McSchedule,
    ) -> Self {
        let partition = checkerboard_partition(dims);
        let (a, b): (Vec<usize>, Vec<usize>) = updatable.partition(|&s| partition.parity[s] == Parity::A);
        let streams_a = SiteStreams::new(schedule.seed, &a);
        let streams_b = SiteStreams::new(schedule.seed, &b);
        let mut energy = CompensatedSum::new();
        energy.add(hamiltonian.total(&angles));
        Chain {
            hamiltonian,
            angles,
            groups: [(a, streams_a), (b, streams_b)],
            width: schedule.proposal_width,
            energy,
            n_sites: dims.len() as f64,
        }
    }

    fn sweep(&mut self) -> SweepStats {
        let mut stats = SweepStats::default();
        for (sites, streams) in self.groups.iter_mut() {
            let s = metropolis_half_sweep(&mut self.angles, sites, streams, &self.hamiltonian, self.width);
            self.energy.add(s.energy_change);
            stats = stats.merge(s);
        }
        stats
    }

    fn adapt(&mut self, stats: &SweepStats, target: f64) {
        if stats.proposed == 0 {
            return;
        }
        let rate = stats.accepted as f64 / stats.proposed as f64;
        self.width = (self.width * (rate / target).clamp(0.5, 2.0)).clamp(MIN_WIDTH, TAU);
    }

    fn specific_energy(&self) -> f64 {
        self.energy.value() / self.n_sites
    }
}

fn resolve_bias(
    params: &ModelParams,
    spins: &SpinField,
    provider: &dyn BiasProvider,
) -> Result<Option<BiasField>> {
    match params.field {
        FieldMode::Bias { .. } => Ok(Some(provider.bias_field(spins)?)),
        _ => Ok(None),
    }
}

/// Gap filling by conditional simulation: observed spins stay frozen, the
/// prediction at each gap is the equilibrium mean angle mapped back to data
/// units.
pub fn conditional_predict(
    sample: &GridField,
    mask: &ObservationMask,
    params: &ModelParams,
    schedule: &McSchedule,
    bias_provider: &dyn BiasProvider,
) -> Result<PredictionResult> {
    let tables = build_neighbor_tables(sample.dims)?;
    conditional_predict_with_tables(sample, mask, params, schedule, bias_provider, &tables)
}

pub fn conditional_predict_with_tables(
    sample: &GridField,
    mask: &ObservationMask,
    params: &ModelParams,
    schedule: &McSchedule,
    bias_provider: &dyn BiasProvider,
    tables: &NeighborTables,
) -> Result<PredictionResult> {
    params.validate()?;
    schedule.validate()?;
    let counts = validate_mask(mask, sample.dims)?;
    if counts.missing == 0 {
        let angles = match to_spin_angles(sample, mask) {
            Ok((spins, _)) => spins,
            Err(GprError::DegenerateRange(_)) => SpinField {
                angles: vec![0.0; sample.values.len()],
                mask: mask.clone(),
            },
            Err(e) => return Err(e),
        };
        return Ok(PredictionResult {
            sites: Vec::new(),
            values: Vec::new(),
            mean_angles: angles,
            transform: None,
            energy_trace: Vec::new(),
            acceptance_rate: 0.0,
            final_width: schedule.proposal_width,
        });
    }

    let (spins, spec) = to_spin_angles(sample, mask)?;
    let bias = resolve_bias(params, &spins, bias_provider)?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    init_rng.set_stream(INIT_STREAM);
    let spins = initialize_missing(&spins, &mut init_rng)?;

    let hamiltonian = Hamiltonian::new(params, tables, bias.as_ref())?;
    let missing: Vec<usize> = mask.missing_sites().collect();
    let mut chain = Chain::new(hamiltonian, spins.angles, missing.iter().copied(), sample.dims, schedule);

    let mut trace = Vec::with_capacity(schedule.burn_in + schedule.averaging);
    for _ in 0..schedule.burn_in {
        let stats = chain.sweep();
        if let Some(target) = schedule.target_acceptance {
            chain.adapt(&stats, target);
        }
        trace.push(chain.specific_energy());
    }

    let mut sums = vec![0.0; missing.len()];
    let mut accepted = 0;
    let mut proposed = 0;
    for _ in 0..schedule.averaging {
        let stats = chain.sweep();
        accepted += stats.accepted;
        proposed += stats.proposed;
        for (acc, &site) in sums.iter_mut().zip(&missing) {
            *acc += chain.angles[site];
        }
        trace.push(chain.specific_energy());
    }

    let n_avg = schedule.averaging as f64;
    let mut mean_angles = SpinField {
        angles: chain.angles.clone(),
        mask: mask.clone(),
    };
    let mut values = Vec::with_capacity(missing.len());
    for (&site, sum) in missing.iter().zip(&sums) {
        let mean = (sum / n_avg).clamp(0.0, TAU);
        mean_angles.angles[site] = mean;
        values.push(spec.to_value(mean));
    }
    Ok(PredictionResult {
        sites: missing,
        values,
        mean_angles,
        transform: Some(spec),
        energy_trace: trace,
        acceptance_rate: if proposed > 0 { accepted as f64 / proposed as f64 } else { 0.0 },
        final_width: chain.width,
    })
}

/// Output of an unconditional run.
#[derive(Debug, Clone)]
pub struct UnconditionalRun {
    /// One snapshot per averaging sweep.
    pub snapshots: Vec<Vec<f64>>,
    pub energy_trace: Vec<f64>,
}

/// Simulates the field with no conditioning data. Spins start uniformly in
/// `[0, 2pi]`.
pub fn unconditional_simulate(
    dims: GridDims,
    params: &ModelParams,
    schedule: &McSchedule,
    bias: Option<&BiasField>,
) -> Result<UnconditionalRun> {
    params.validate()?;
    schedule.validate()?;
    let tables = build_neighbor_tables(dims)?;
    let hamiltonian = Hamiltonian::new(params, &tables, bias)?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    init_rng.set_stream(INIT_STREAM);
    let angles: Vec<f64> = (0..dims.len()).map(|_| init_rng.random_range(0.0..=TAU)).collect();
    let mut chain = Chain::new(hamiltonian, angles, 0..dims.len(), dims, schedule);

    let mut trace = Vec::with_capacity(schedule.burn_in + schedule.averaging);
    for _ in 0..schedule.burn_in {
        let stats = chain.sweep();
        if let Some(target) = schedule.target_acceptance {
            chain.adapt(&stats, target);
        }
        trace.push(chain.specific_energy());
    }
    let mut snapshots = Vec::with_capacity(schedule.averaging);
    for _ in 0..schedule.averaging {
        chain.sweep();
        snapshots.push(chain.angles.clone());
        trace.push(chain.specific_energy());
    }
    Ok(UnconditionalRun {
        snapshots,
        energy_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bias::BiharmonicInpaint;
    use crate::grid::GridDims;
    use crate::potential::{Order, PotentialParams};

    fn ramp_sample(dims: GridDims) -> GridField {
        let values = (0..dims.len())
            .map(|i| {
                let (x, y) = dims.coords(i);
                1.0 + 0.3 * x as f64 + 0.1 * y as f64 + (0.7 * x as f64).sin()
            })
            .collect();
        GridField::new(dims, values).unwrap()
    }

    fn thinning(dims: GridDims, every: usize) -> ObservationMask {
        let observed = (0..dims.len()).map(|i| (i * 7 + 3) % every != 0).collect();
        ObservationMask::new(dims, observed).unwrap()
    }

    fn short_schedule(seed: u64) -> McSchedule {
        McSchedule {
            burn_in: 60,
            averaging: 60,
            seed,
            ..Default::default()
        }
    }

    #[test]
    fn initialize_examples() {
        let dims = GridDims::square(4).unwrap();
        let spins = SpinField {
            angles: vec![1.5; 16],
            mask: ObservationMask::all_observed(dims),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = initialize_missing(&spins, &mut rng).unwrap();
        assert_eq!(out.angles, spins.angles);

        let mut observed = vec![true; 16];
        observed[5] = false;
        observed[10] = false;
        let mut angles = vec![0.8; 16];
        angles[5] = f64::NAN;
        angles[10] = f64::NAN;
        let spins = SpinField {
            angles,
            mask: ObservationMask::new(dims, observed).unwrap(),
        };
        let out = initialize_missing(&spins, &mut rng).unwrap();
        assert_eq!(out.angles, vec![0.8; 16]);

        let none = SpinField {
            angles: vec![f64::NAN; 16],
            mask: ObservationMask::new(dims, vec![false; 16]).unwrap(),
        };
        assert!(initialize_missing(&none, &mut rng).is_err());
    }

    #[test]
    fn initialization_is_seeded() {
        let dims = GridDims::square(6).unwrap();
        let sample = ramp_sample(dims);
        let mask = thinning(dims, 3);
        let (spins, _) = to_spin_angles(&sample, &mask).unwrap();
        let a = initialize_missing(&spins, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = initialize_missing(&spins, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.angles, b.angles);
    }

    #[test]
    fn no_missing_sites_gives_empty_prediction() {
        let dims = GridDims::square(5).unwrap();
        let r = conditional_predict(
            &ramp_sample(dims),
            &ObservationMask::all_observed(dims),
            &ModelParams::mpr(0.01),
            &short_schedule(1),
            &BiharmonicInpaint::default(),
        )
        .unwrap();
        assert!(r.sites.is_empty() && r.values.is_empty());
    }

    #[test]
    fn observed_sites_frozen_and_runs_reproducible() {
        let dims = GridDims::square(12).unwrap();
        let sample = ramp_sample(dims);
        let mask = thinning(dims, 3);
        let mut p = ModelParams::mpr(0.05);
        p.j_fn = -0.04;
        p.potential = PotentialParams::new(Order::Finite(3), 1.2).unwrap();
        p.field = FieldMode::Bias { k: 0.2 };
        let a = conditional_predict(&sample, &mask, &p, &short_schedule(5), &BiharmonicInpaint::default()).unwrap();
        let b = conditional_predict(&sample, &mask, &p, &short_schedule(5), &BiharmonicInpaint::default()).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.energy_trace, b.energy_trace);
        let (spins, _) = to_spin_angles(&sample, &mask).unwrap();
        for site in mask.observed_sites() {
            assert_eq!(a.mean_angles.angles[site].to_bits(), spins.angles[site].to_bits());
        }
        assert_eq!(a.sites, mask.missing_sites().collect::<Vec<_>>());
        for (&site, &v) in a.sites.iter().zip(&a.values) {
            assert!(!mask.is_observed(site));
            let spec = a.transform.unwrap();
            assert!(v >= spec.z_min - 1e-12 && v <= spec.z_max + 1e-12);
        }
        let c = conditional_predict(&sample, &mask, &p, &short_schedule(6), &BiharmonicInpaint::default()).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn single_gap_low_temperature_aligns_with_neighbours() {
        let dims = GridDims::square(7).unwrap();
        let mut values = vec![3.0; dims.len()];
        // two extra values so the sample range is not degenerate; far from the gap
        values[0] = 1.0;
        values[dims.len() - 1] = 5.0;
        let sample = GridField::new(dims, values).unwrap();
        let mut observed = vec![true; dims.len()];
        let gap = dims.index(3, 3);
        observed[gap] = false;
        let mask = ObservationMask::new(dims, observed).unwrap();
        let r = conditional_predict(
            &sample,
            &mask,
            &ModelParams::mpr(0.001),
            &McSchedule {
                burn_in: 200,
                averaging: 300,
                seed: 2,
                ..Default::default()
            },
            &BiharmonicInpaint::default(),
        )
        .unwrap();
        assert_eq!(r.sites, vec![gap]);
        assert!((r.values[0] - 3.0).abs() < 0.01 * 4.0, "{}", r.values[0]);
    }

    #[test]
    fn zero_temperature_limit_never_raises_energy() {
        let dims = GridDims::square(10).unwrap();
        let sample = ramp_sample(dims);
        let mask = thinning(dims, 2);
        let r = conditional_predict(
            &sample,
            &mask,
            &ModelParams::mpr(1e-12),
            &McSchedule {
                burn_in: 30,
                averaging: 30,
                target_acceptance: None,
                proposal_width: 0.3,
                seed: 4,
            },
            &BiharmonicInpaint::default(),
        )
        .unwrap();
        for w in r.energy_trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn tracked_energy_matches_recomputation() {
        let dims = GridDims::square(10).unwrap();
        let sample = ramp_sample(dims);
        let mask = thinning(dims, 2);
        let mut p = ModelParams::mpr(0.2);
        p.j_nn = 0.3;
        p.j_fn = 0.05;
        // with one averaging sweep the mean angles are the final configuration
        let r = conditional_predict(
            &sample,
            &mask,
            &p,
            &McSchedule {
                averaging: 1,
                ..short_schedule(8)
            },
            &BiharmonicInpaint::default(),
        )
        .unwrap();
        assert_eq!(r.energy_trace.len(), 61);
        let tables = build_neighbor_tables(dims).unwrap();
        let h = Hamiltonian::new(&p, &tables, None).unwrap();
        let e = h.total(&r.mean_angles.angles) / dims.len() as f64;
        assert!((r.energy_trace.last().unwrap() - e).abs() < 1e-12);
    }

    #[test]
    fn mean_angles_inside_sampled_hull() {
        let dims = GridDims::square(8).unwrap();
        let sample = ramp_sample(dims);
        let mask = thinning(dims, 2);
        let r = conditional_predict(&sample, &mask, &ModelParams::mpr(0.5), &short_schedule(3), &BiharmonicInpaint::default())
            .unwrap();
        for &site in &r.sites {
            let a = r.mean_angles.angles[site];
            assert!((0.0..=TAU).contains(&a));
        }
    }

    #[test]
    fn schedule_validation() {
        let s = McSchedule { averaging: 0, ..Default::default() };
        assert!(s.validate().is_err());
        let s = McSchedule { proposal_width: 0.0, ..Default::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn unconditional_requires_bias_field_in_bias_mode() {
        let dims = GridDims::square(4).unwrap();
        let mut p = ModelParams::mpr(0.1);
        p.field = FieldMode::Bias { k: 1.0 };
        assert!(matches!(
            unconditional_simulate(dims, &p, &short_schedule(1), None),
            Err(GprError::MissingBiasField)
        ));
    }

    #[test]
    fn unconditional_snapshot_count_and_range() {
        let dims = GridDims::square(8).unwrap();
        let run = unconditional_simulate(dims, &ModelParams::mpr(0.1), &short_schedule(2), None).unwrap();
        assert_eq!(run.snapshots.len(), 60);
        assert!(run.snapshots.iter().flatten().all(|a| (0.0..=TAU).contains(a)));
    }

    #[test]
    fn energy_trace_equilibrates() {
        let dims = GridDims::square(16).unwrap();
        let sample = ramp_sample(dims);
        let mask = thinning(dims, 3);
        let schedule = McSchedule::default().with_seed(11);
        let r = conditional_predict(&sample, &mask, &ModelParams::mpr(0.05), &schedule, &BiharmonicInpaint::default())
            .unwrap();
        let (burn, avg) = r.energy_trace.split_at(schedule.burn_in);
        let tail = &burn[3 * burn.len() / 4..];
        let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
        // batch means absorb the autocorrelation of the trace
        let batches: Vec<f64> = avg.chunks(30).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
        let mean = batches.iter().sum::<f64>() / batches.len() as f64;
        let var = batches.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (batches.len() - 1) as f64;
        let se = (var / batches.len() as f64).sqrt();
        assert!((tail_mean - mean).abs() < 3.0 * se.max(1e-12), "{tail_mean} vs {mean} +- {se}");
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn freeze_and_range(lx in 3usize..10, ly in 3usize..10, every in 2usize..6, t in 0.001f64..0.5, seed in any::<u64>()) {
            let dims = GridDims::new(lx, ly).unwrap();
            let sample = ramp_sample(dims);
            let mask = thinning(dims, every);
            prop_assume!(mask.n_missing() > 0);
            let schedule = McSchedule { burn_in: 10, averaging: 10, seed, ..Default::default() };
            let mut params = ModelParams::mpr(t);
            params.j_fn = -0.05;
            let r = conditional_predict(&sample, &mask, &params, &schedule, &BiharmonicInpaint::default()).unwrap();
            let (spins, spec) = to_spin_angles(&sample, &mask).unwrap();
            for i in mask.observed_sites() {
                prop_assert_eq!(r.mean_angles.angles[i].to_bits(), spins.angles[i].to_bits());
            }
            prop_assert_eq!(r.sites, mask.missing_sites().collect::<Vec<_>>());
            for &v in &r.values {
                prop_assert!(v >= spec.z_min - 1e-9 && v <= spec.z_max + 1e-9);
            }
        }
    }
}
