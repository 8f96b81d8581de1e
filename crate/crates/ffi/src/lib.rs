//! C interface to `gpr-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`GprStatus`]; on failure a description is available from
//! [`gpr_last_error_message`] on the same thread until the next failing call.
//! Panics never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gpr_core::bias::{pure_bias_predict, BiharmonicInpaint};
use gpr_core::energy::{FieldMode, ModelParams};
use gpr_core::grid::{GridDims, GridField, ObservationMask};
use gpr_core::metrics::compute_metrics;
use gpr_core::potential::{pair_potential, Order, PotentialParams};
use gpr_core::sampler::{conditional_predict, McSchedule, PredictionResult};
use gpr_core::synthdata::{generate_field, Law, WmSpec};
use gpr_core::GprError;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GprStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDimensions = 3,
    /// The data cannot be processed: empty, constant, or too sparse.
    InvalidData = 4,
    Panic = 5,
}

/// Grid of values, row-major with `index = y * lx + x`.
pub struct GprField(GridField);

/// Observation mask; nonzero means observed.
pub struct GprMask(ObservationMask);

/// Model parameters. New handles hold the modified planar rotator.
pub struct GprParams(ModelParams);

pub struct GprPrediction(PredictionResult);

/// Monte Carlo schedule. A NaN `target_acceptance` keeps the proposal width
/// fixed.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GprSchedule {
    pub burn_in: usize,
    pub averaging: usize,
    pub proposal_width: f64,
    pub target_acceptance: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GprMetrics {
    pub aae: f64,
    pub are: f64,
    pub aare: f64,
    pub rase: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(GprStatus, String);

impl From<GprError> for Failure {
    fn from(e: GprError) -> Self {
        let status = match e {
            GprError::Dimension { .. } | GprError::Length { .. } => GprStatus::InvalidDimensions,
            GprError::EmptySample
            | GprError::DegenerateRange(_)
            | GprError::AngleRange { .. }
            | GprError::UnsetAngle(_)
            | GprError::ZeroTruth(_)
            | GprError::TooFewObserved { .. } => GprStatus::InvalidData,
            _ => GprStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(name: &str) -> Failure {
    Failure(GprStatus::NullPointer, format!("`{name}` is null"))
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GprStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GprStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GprStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn copy_out<T: Copy>(src: &[T], dst: *mut T, len: usize) -> Result<(), Failure> {
    if len != src.len() {
        return Err(Failure(
            GprStatus::InvalidDimensions,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    slice_mut(dst, len, "out")?.copy_from_slice(src);
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gpr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `values` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_field_new(
    lx: usize,
    ly: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut GprField,
) -> GprStatus {
    guard(|| {
        let dims = GridDims::new(lx, ly)?;
        let values = slice(values, len, "values")?.to_vec();
        write_out(out, GprField(GridField::new(dims, values)?))
    })
}

/// # Safety
/// `field` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gpr_field_free(field: *mut GprField) {
    free(field)
}

/// # Safety
/// Pointers must be valid; `lx` and `ly` may be null.
#[no_mangle]
pub unsafe extern "C" fn gpr_field_dims(field: *const GprField, lx: *mut usize, ly: *mut usize) -> GprStatus {
    guard(|| {
        let f = as_ref(field, "field")?;
        if let Some(lx) = lx.as_mut() {
            *lx = f.0.dims.lx;
        }
        if let Some(ly) = ly.as_mut() {
            *ly = f.0.dims.ly;
        }
        Ok(())
    })
}

/// Copies the values into `out`, which must hold exactly `lx * ly` doubles.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gpr_field_values(field: *const GprField, out: *mut f64, len: usize) -> GprStatus {
    guard(|| copy_out(&as_ref(field, "field")?.0.values, out, len))
}

/// # Safety
/// `observed` must point to `len` bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_mask_new(
    lx: usize,
    ly: usize,
    observed: *const u8,
    len: usize,
    out: *mut *mut GprMask,
) -> GprStatus {
    guard(|| {
        let dims = GridDims::new(lx, ly)?;
        let observed = slice(observed, len, "observed")?.iter().map(|&b| b != 0).collect();
        write_out(out, GprMask(ObservationMask::new(dims, observed)?))
    })
}

/// # Safety
/// `mask` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gpr_mask_free(mask: *mut GprMask) {
    free(mask)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_params_new(temperature: f64, out: *mut *mut GprParams) -> GprStatus {
    guard(|| {
        let p = ModelParams::mpr(temperature);
        p.validate()?;
        write_out(out, GprParams(p))
    })
}

/// # Safety
/// `params` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gpr_params_free(params: *mut GprParams) {
    free(params)
}

unsafe fn update(params: *mut GprParams, f: impl FnOnce(&mut ModelParams)) -> GprStatus {
    guard(|| {
        let p = params.as_mut().ok_or_else(|| null("params"))?;
        let mut next = p.0;
        f(&mut next);
        next.validate()?;
        p.0 = next;
        Ok(())
    })
}

/// Sets the potential order and shape. `n` and `alpha` accept `INFINITY`.
/// The handle is unchanged on failure.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpr_params_set_potential(params: *mut GprParams, n: f64, alpha: f64) -> GprStatus {
    let order = match Order::from_f64(n) {
        Ok(o) => o,
        Err(e) => return guard(|| Err(e.into())),
    };
    update(params, |p| p.potential = PotentialParams { n: order, alpha })
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpr_params_set_couplings(params: *mut GprParams, j_nn: f64, j_fn: f64) -> GprStatus {
    update(params, |p| {
        p.j_nn = j_nn;
        p.j_fn = j_fn;
    })
}

/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpr_params_set_temperature(params: *mut GprParams, temperature: f64) -> GprStatus {
    update(params, |p| p.temperature = temperature)
}

/// Attraction towards the interpolated bias field; `k = 0` removes the field.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpr_params_set_bias_field(params: *mut GprParams, k: f64) -> GprStatus {
    update(params, |p| p.field = if k == 0.0 { FieldMode::None } else { FieldMode::Bias { k } })
}

/// Uniform field of signed strength; `k_prime = 0` removes the field.
///
/// # Safety
/// `params` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpr_params_set_uniform_field(params: *mut GprParams, k_prime: f64) -> GprStatus {
    update(params, |p| {
        p.field = if k_prime == 0.0 {
            FieldMode::None
        } else {
            FieldMode::Uniform { k_prime }
        }
    })
}

#[no_mangle]
pub extern "C" fn gpr_schedule_default() -> GprSchedule {
    let s = McSchedule::default();
    GprSchedule {
        burn_in: s.burn_in,
        averaging: s.averaging,
        proposal_width: s.proposal_width,
        target_acceptance: s.target_acceptance.unwrap_or(f64::NAN),
        seed: s.seed,
    }
}

impl From<GprSchedule> for McSchedule {
    fn from(s: GprSchedule) -> Self {
        McSchedule {
            burn_in: s.burn_in,
            averaging: s.averaging,
            proposal_width: s.proposal_width,
            target_acceptance: (!s.target_acceptance.is_nan()).then_some(s.target_acceptance),
            seed: s.seed,
        }
    }
}

/// Fills the gaps of `sample` where `mask` is zero. Values at gaps are
/// ignored.
///
/// # Safety
/// Handles must be live, `schedule` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_predict(
    sample: *const GprField,
    mask: *const GprMask,
    params: *const GprParams,
    schedule: *const GprSchedule,
    out: *mut *mut GprPrediction,
) -> GprStatus {
    guard(|| {
        let sample = &as_ref(sample, "sample")?.0;
        let mask = &as_ref(mask, "mask")?.0;
        let params = &as_ref(params, "params")?.0;
        let schedule: McSchedule = (*as_ref(schedule, "schedule")?).into();
        let r = conditional_predict(sample, mask, params, &schedule, &BiharmonicInpaint::default())?;
        write_out(out, GprPrediction(r))
    })
}

/// # Safety
/// `prediction` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn gpr_prediction_free(prediction: *mut GprPrediction) {
    free(prediction)
}

/// Number of predicted sites, or 0 for a null handle.
///
/// # Safety
/// `prediction` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gpr_prediction_len(prediction: *const GprPrediction) -> usize {
    prediction.as_ref().map_or(0, |p| p.0.sites.len())
}

/// Row-major indices of the predicted sites.
///
/// # Safety
/// `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn gpr_prediction_sites(prediction: *const GprPrediction, out: *mut usize, len: usize) -> GprStatus {
    guard(|| copy_out(&as_ref(prediction, "prediction")?.0.sites, out, len))
}

/// Predicted values in the order of [`gpr_prediction_sites`].
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gpr_prediction_values(prediction: *const GprPrediction, out: *mut f64, len: usize) -> GprStatus {
    guard(|| copy_out(&as_ref(prediction, "prediction")?.0.values, out, len))
}

/// Acceptance rate over the averaging sweeps.
///
/// # Safety
/// `prediction` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn gpr_prediction_acceptance(prediction: *const GprPrediction, out: *mut f64) -> GprStatus {
    guard(|| {
        let rate = as_ref(prediction, "prediction")?.0.acceptance_rate;
        *out.as_mut().ok_or_else(|| null("out"))? = rate;
        Ok(())
    })
}

/// Copy of `sample` with the gaps replaced by predictions.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_prediction_fill(
    prediction: *const GprPrediction,
    sample: *const GprField,
    out: *mut *mut GprField,
) -> GprStatus {
    guard(|| {
        let p = &as_ref(prediction, "prediction")?.0;
        let sample = &as_ref(sample, "sample")?.0;
        if p.mean_angles.mask.dims != sample.dims {
            return Err(GprError::Length {
                expected: p.mean_angles.mask.dims.len(),
                actual: sample.dims.len(),
            }
            .into());
        }
        write_out(out, GprField(p.fill(sample)))
    })
}

/// Gap filling by biharmonic interpolation alone.
///
/// # Safety
/// Handles must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_bias_baseline(
    sample: *const GprField,
    mask: *const GprMask,
    out: *mut *mut GprField,
) -> GprStatus {
    guard(|| {
        let sample = &as_ref(sample, "sample")?.0;
        let mask = &as_ref(mask, "mask")?.0;
        let filled = pure_bias_predict(sample, mask, &BiharmonicInpaint::default())?;
        write_out(out, GprField(filled))
    })
}

/// Whittle-Matérn random field; `lognormal` nonzero exponentiates it.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_generate_field(
    lx: usize,
    ly: usize,
    m: f64,
    sigma: f64,
    nu: f64,
    xi1: f64,
    xi2: f64,
    lognormal: i32,
    n_modes: usize,
    seed: u64,
    out: *mut *mut GprField,
) -> GprStatus {
    guard(|| {
        let dims = GridDims::new(lx, ly)?;
        let law = if lognormal != 0 { Law::Lognormal } else { Law::Gaussian };
        let spec = WmSpec { m, sigma, nu, xi1, xi2, law };
        let field = generate_field(dims, &spec, n_modes, &mut ChaCha8Rng::seed_from_u64(seed))?;
        write_out(out, GprField(field))
    })
}

/// Validation metrics over `len` paired values.
///
/// # Safety
/// `truth` and `predicted` must point to `len` doubles, `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_metrics(
    truth: *const f64,
    predicted: *const f64,
    len: usize,
    out: *mut GprMetrics,
) -> GprStatus {
    guard(|| {
        let m = compute_metrics(slice(truth, len, "truth")?, slice(predicted, len, "predicted")?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = GprMetrics {
            aae: m.aae,
            are: m.are,
            aare: m.aare,
            rase: m.rase,
        };
        Ok(())
    })
}

/// Pair potential at `c = cos(theta)`. `n` and `alpha` accept
/// `INFINITY`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gpr_pair_potential(c: f64, n: f64, alpha: f64, out: *mut f64) -> GprStatus {
    guard(|| {
        if !(-1.0..=1.0).contains(&c) {
            return Err(Failure(GprStatus::InvalidArgument, format!("c = {c} outside [-1, 1]")));
        }
        let params = PotentialParams::new(Order::from_f64(n)?, alpha)?;
        *out.as_mut().ok_or_else(|| null("out"))? = pair_potential(c, &params);
        Ok(())
    })
}
