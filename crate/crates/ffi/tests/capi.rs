use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use gpr_ffi::*;

fn last_error() -> String {
    let p = gpr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn ramp(lx: usize, ly: usize) -> Vec<f64> {
    (0..lx * ly).map(|i| ((i % lx) + 2 * (i / lx)) as f64).collect()
}

#[test]
fn field_round_trip_and_dims() {
    let values = ramp(4, 3);
    let mut f = ptr::null_mut();
    unsafe {
        assert_eq!(gpr_field_new(4, 3, values.as_ptr(), values.len(), &mut f), GprStatus::Ok);
        let (mut lx, mut ly) = (0, 0);
        assert_eq!(gpr_field_dims(f, &mut lx, &mut ly), GprStatus::Ok);
        assert_eq!((lx, ly), (4, 3));
        let mut out = vec![0.0; 12];
        assert_eq!(gpr_field_values(f, out.as_mut_ptr(), out.len()), GprStatus::Ok);
        assert_eq!(out, values);
        assert_eq!(gpr_field_values(f, out.as_mut_ptr(), 5), GprStatus::InvalidDimensions);
        gpr_field_free(f);
        gpr_field_free(ptr::null_mut());
    }
}

#[test]
fn predict_fills_gaps_within_range() {
    let (lx, ly) = (8, 8);
    let values = ramp(lx, ly);
    let observed: Vec<u8> = (0..lx * ly).map(|i| (i % 3 != 0) as u8).collect();
    unsafe {
        let mut sample = ptr::null_mut();
        let mut mask = ptr::null_mut();
        let mut params = ptr::null_mut();
        assert_eq!(gpr_field_new(lx, ly, values.as_ptr(), values.len(), &mut sample), GprStatus::Ok);
        assert_eq!(gpr_mask_new(lx, ly, observed.as_ptr(), observed.len(), &mut mask), GprStatus::Ok);
        assert_eq!(gpr_params_new(0.01, &mut params), GprStatus::Ok);
        assert_eq!(gpr_params_set_couplings(params, 0.3, -0.05), GprStatus::Ok);
        assert_eq!(gpr_params_set_potential(params, 2.0, 1.5), GprStatus::Ok);
        let mut schedule = gpr_schedule_default();
        schedule.burn_in = 20;
        schedule.averaging = 20;
        schedule.seed = 7;

        let mut pred = ptr::null_mut();
        assert_eq!(gpr_predict(sample, mask, params, &schedule, &mut pred), GprStatus::Ok);
        let n = gpr_prediction_len(pred);
        assert_eq!(n, observed.iter().filter(|&&o| o == 0).count());
        let mut sites = vec![0usize; n];
        let mut preds = vec![0.0; n];
        assert_eq!(gpr_prediction_sites(pred, sites.as_mut_ptr(), n), GprStatus::Ok);
        assert_eq!(gpr_prediction_values(pred, preds.as_mut_ptr(), n), GprStatus::Ok);
        assert!(sites.iter().all(|&s| observed[s] == 0));
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        assert!(preds.iter().all(|&v| (0.0..=max).contains(&v)));
        let mut rate = -1.0;
        assert_eq!(gpr_prediction_acceptance(pred, &mut rate), GprStatus::Ok);
        assert!((0.0..=1.0).contains(&rate));

        let mut filled = ptr::null_mut();
        assert_eq!(gpr_prediction_fill(pred, sample, &mut filled), GprStatus::Ok);
        let mut all = vec![0.0; lx * ly];
        assert_eq!(gpr_field_values(filled, all.as_mut_ptr(), all.len()), GprStatus::Ok);
        for (k, &s) in sites.iter().enumerate() {
            assert_eq!(all[s], preds[k]);
        }

        let mut again = ptr::null_mut();
        assert_eq!(gpr_predict(sample, mask, params, &schedule, &mut again), GprStatus::Ok);
        let mut preds2 = vec![0.0; n];
        assert_eq!(gpr_prediction_values(again, preds2.as_mut_ptr(), n), GprStatus::Ok);
        assert_eq!(preds, preds2);

        let mut bc = ptr::null_mut();
        assert_eq!(gpr_bias_baseline(sample, mask, &mut bc), GprStatus::Ok);

        gpr_prediction_free(pred);
        gpr_prediction_free(again);
        gpr_field_free(filled);
        gpr_field_free(bc);
        gpr_field_free(sample);
        gpr_mask_free(mask);
        gpr_params_free(params);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut f = ptr::null_mut();
        let v = [1.0; 4];
        assert_eq!(gpr_field_new(1, 4, v.as_ptr(), 4, &mut f), GprStatus::InvalidDimensions);
        assert!(last_error().contains("dimensions"));
        assert!(f.is_null());
        assert_eq!(gpr_field_new(2, 2, v.as_ptr(), 3, &mut f), GprStatus::InvalidDimensions);
        assert_eq!(gpr_field_new(2, 2, ptr::null(), 4, &mut f), GprStatus::NullPointer);
        assert!(last_error().contains("values"));

        let mut params = ptr::null_mut();
        assert_eq!(gpr_params_new(-1.0, &mut params), GprStatus::InvalidArgument);
        assert_eq!(gpr_params_new(0.1, &mut params), GprStatus::Ok);
        assert_eq!(gpr_params_set_couplings(params, 1.5, 0.0), GprStatus::InvalidArgument);
        assert_eq!(gpr_params_set_potential(params, 0.5, 2.0), GprStatus::InvalidArgument);
        assert_eq!(gpr_params_set_uniform_field(params, 0.3), GprStatus::Ok);
        assert_eq!(gpr_params_set_temperature(params, 0.0), GprStatus::InvalidArgument);
        gpr_params_free(params);

        let values = ramp(4, 4);
        let observed = [0u8; 16];
        let mut sample = ptr::null_mut();
        let mut mask = ptr::null_mut();
        assert_eq!(gpr_field_new(4, 4, values.as_ptr(), 16, &mut sample), GprStatus::Ok);
        assert_eq!(gpr_mask_new(4, 4, observed.as_ptr(), 16, &mut mask), GprStatus::Ok);
        assert_eq!(gpr_params_new(0.1, &mut params), GprStatus::Ok);
        let schedule = gpr_schedule_default();
        let mut pred = ptr::null_mut();
        assert_eq!(gpr_predict(sample, mask, params, &schedule, &mut pred), GprStatus::InvalidData);
        assert!(pred.is_null());
        assert_eq!(gpr_predict(sample, mask, params, ptr::null(), &mut pred), GprStatus::NullPointer);
        gpr_field_free(sample);
        gpr_mask_free(mask);
        gpr_params_free(params);
    }
}

#[test]
fn generator_metrics_and_potential() {
    unsafe {
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(gpr_generate_field(16, 16, 5.0, 2.0, 0.5, 4.0, 4.0, 0, 200, 3, &mut a), GprStatus::Ok);
        assert_eq!(gpr_generate_field(16, 16, 5.0, 2.0, 0.5, 4.0, 4.0, 0, 200, 3, &mut b), GprStatus::Ok);
        let mut va = vec![0.0; 256];
        let mut vb = vec![0.0; 256];
        gpr_field_values(a, va.as_mut_ptr(), 256);
        gpr_field_values(b, vb.as_mut_ptr(), 256);
        assert_eq!(va, vb);
        gpr_field_free(a);
        gpr_field_free(b);
        assert_eq!(gpr_generate_field(16, 16, 5.0, -2.0, 0.5, 4.0, 4.0, 0, 200, 3, &mut a), GprStatus::InvalidArgument);
        assert!(last_error().contains("sigma"));
        assert_eq!(gpr_generate_field(16, 16, 5.0, 2.0, 0.5, 4.0, 4.0, 1, 200, 3, &mut a), GprStatus::Ok);
        gpr_field_values(a, va.as_mut_ptr(), 256);
        assert!(va.iter().all(|&v| v > 0.0));
        gpr_field_free(a);

        let truth = [1.0, 2.0, 4.0];
        let pred = [2.0, 2.0, 2.0];
        let mut m = GprMetrics::default();
        assert_eq!(gpr_metrics(truth.as_ptr(), pred.as_ptr(), 3, &mut m), GprStatus::Ok);
        assert!((m.aae - 1.0).abs() < 1e-15);
        assert!((m.are - (-1.0 + 0.0 + 0.5) / 3.0).abs() < 1e-15);
        assert!((m.aare - 0.5).abs() < 1e-15);
        let zero = [0.0, 1.0, 1.0];
        assert_eq!(gpr_metrics(zero.as_ptr(), pred.as_ptr(), 3, &mut m), GprStatus::InvalidData);

        let mut v = 0.0;
        assert_eq!(gpr_pair_potential(0.3, 1.0, f64::INFINITY, &mut v), GprStatus::Ok);
        assert!((v - 0.3).abs() < 1e-15);
        assert_eq!(gpr_pair_potential(1.0, 3.0, 1.5, &mut v), GprStatus::Ok);
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!(gpr_pair_potential(1.5, 3.0, 1.5, &mut v), GprStatus::InvalidArgument);
        assert_eq!(gpr_pair_potential(0.0, 3.0, 0.5, &mut v), GprStatus::InvalidArgument);
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/gpr_ffi.h");
    assert!(header.exists());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ GprSchedule s = gpr_schedule_default(); return (int)s.burn_in * 0; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("no C compiler found, header check skipped"),
    }
}
