use std::path::Path;
use std::process::{Command, Output};

fn gpr(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpr"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn ok(o: &Output) {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_mask_predict_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&gpr(&["--seed", "1", "generate", "--lx", "16", "--ly", "12", "--m", "5", "--sigma", "2", "--nu", "1.5"], d));
    let field = std::fs::read_to_string(d.join("field.csv")).unwrap();
    assert_eq!(field.lines().count(), 12);
    assert!(field.lines().all(|l| l.split(',').count() == 16));
    let prov: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("field.json")).unwrap()).unwrap();
    assert_eq!(prov["seed"], 1);
    assert_eq!(prov["spec"]["nu"], 1.5);

    ok(&gpr(&["--seed", "2", "mask", "--lx", "16", "--ly", "12", "--thinning", "25"], d));
    let mask = std::fs::read_to_string(d.join("mask.csv")).unwrap();
    assert_eq!(mask.matches('0').count(), 48);

    let sample = d.join("field.csv");
    let m = d.join("mask.csv");
    let args = ["predict", "--sample", sample.to_str().unwrap(), "--mask", m.to_str().unwrap(), "--burn-in", "20", "--averaging", "20"];
    ok(&gpr(&args, d));
    let preds = std::fs::read_to_string(d.join("predictions.csv")).unwrap();
    assert_eq!(preds.lines().count(), 49);
    let trace = std::fs::read_to_string(d.join("energy_trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 41);

    let first = std::fs::read(d.join("predictions.csv")).unwrap();
    ok(&gpr(&args, d));
    assert_eq!(first, std::fs::read(d.join("predictions.csv")).unwrap());

    ok(&gpr(&["baseline-bc", "--sample", sample.to_str().unwrap(), "--mask", m.to_str().unwrap()], d));
    assert_eq!(std::fs::read_to_string(d.join("predictions_bc.csv")).unwrap().lines().count(), 49);
    assert_eq!(std::fs::read_to_string(d.join("bias.csv")).unwrap().lines().count(), 12);
}

#[test]
fn predict_with_no_gaps_writes_empty_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("s.csv"), "1,2,3\n4,5,6\n").unwrap();
    std::fs::write(d.join("m.csv"), "1,1,1\n1,1,1\n").unwrap();
    let s = d.join("s.csv");
    let m = d.join("m.csv");
    ok(&gpr(&["predict", "--sample", s.to_str().unwrap(), "--mask", m.to_str().unwrap()], d));
    assert_eq!(std::fs::read_to_string(d.join("predictions.csv")).unwrap(), "x,y,prediction\n");
}

#[test]
fn invalid_inputs_fail_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = gpr(&["generate", "--sigma", "-1"], d);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma"));

    std::fs::write(d.join("s.csv"), "1,2,3\n4,oops,6\n").unwrap();
    std::fs::write(d.join("m.csv"), "1,1,1\n1,0,1\n").unwrap();
    let s = d.join("s.csv");
    let m = d.join("m.csv");
    let o = gpr(&["baseline-bc", "--sample", s.to_str().unwrap(), "--mask", m.to_str().unwrap()], d);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("s.csv") && err.contains("row 2") && err.contains("column 2"), "{err}");

    std::fs::write(d.join("c.json"), "{\"data\": ").unwrap();
    let o = gpr(&["sweep", "--config", d.join("c.json").to_str().unwrap()], d);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("c.json"));
}

#[test]
fn histogram_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&gpr(&["histogram", "--lx", "12", "--ly", "12", "--T", "0.1", "--K-prime", "-0.2", "--burn-in", "10", "--averaging", "10", "--bins", "12"], d));
    let h = std::fs::read_to_string(d.join("histogram.csv")).unwrap();
    assert_eq!(h.lines().count(), 13);
    let total: u64 = h.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 12 * 12 * 10);
    let o = gpr(&["histogram", "--K", "0.5"], d);
    assert!(!o.status.success());
}
