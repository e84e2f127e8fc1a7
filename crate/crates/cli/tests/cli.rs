use std::path::Path;
use std::process::{Command, Output};

const PARAMS: [&str; 14] = [
    "--r", "0.04", "--mu", "0.08", "--sigma", "0.2", "--lambda", "0.01", "--rho", "0.02", "--c", "1", "--L", "100",
];

fn parisian(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parisian"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PARISIAN_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn with_params<'a>(cmd: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend(PARAMS);
    v.extend(extra);
    v
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn solve_reports_constants_and_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&parisian(&with_params("solve", &[]), dir.path()));
    for k in ["manifest", "params", "constants", "dual", "beta"] {
        assert!(doc.get(k).is_some(), "{k}");
    }
    assert!((doc["constants"]["delta"].as_f64().unwrap() - 0.02).abs() < 1e-15);
    for k in ["delta", "B1", "B2", "B3", "B4", "q", "alpha"] {
        assert!(doc["constants"].get(k).is_some(), "{k}");
    }
    for k in ["z_hat", "y0", "yL", "D1", "D3", "D4", "residuals"] {
        assert!(doc["dual"].get(k).is_some(), "{k}");
    }
    assert!(doc["dual"]["residuals"]["g_at_root"].as_f64().unwrap() <= 1e-10);
    assert_eq!(doc["params"]["L"], 100.0);
    assert!(doc["manifest"].get("timings").is_none());
}

#[test]
fn equal_drift_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = with_params("solve", &[]);
    args[4] = "0.04";
    let out = parisian(&args, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8(out.stderr).unwrap();
    assert_eq!(msg.lines().count(), 1, "{msg}");
    assert!(msg.contains("μ > r"), "{msg}");
}

#[test]
fn scientific_notation_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = with_params("solve", &[]);
    args[2] = "4e-2";
    let a = json(&parisian(&args, dir.path()));
    assert_eq!(a["params"]["r"], 0.04);
}

#[test]
fn eval_writes_csv_with_manifest_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = parisian(
        &with_params("eval", &["--grid-min", "-100", "--grid-max", "25", "--points", "6"]),
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("eval.csv")).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "w,psi,pi_star,pi_zero,psi_restricted,m,rho_times_m,hjb_residual"
    );
    let psi: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!((psi[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((psi[4] - 0.074525111402855347).abs() < 1e-12);
    assert_eq!(psi[5], 0.0);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("eval.manifest.json")).unwrap()).unwrap();
    assert_eq!(sidecar["command"]["name"], "eval");
}

#[test]
fn eval_columns_respect_the_residual_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = parisian(&with_params("eval", &["--points", "257", "--out", "t.csv"]), dir.path());
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("t.csv")).unwrap();
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 257);
    for r in &rows {
        assert!(r[7].abs() <= 1e-8, "{r:?}");
        assert!(r[6] >= r[1], "{r:?}");
    }
}

#[test]
fn eval_outside_domain_needs_clamp() {
    let dir = tempfile::tempdir().unwrap();
    let out = parisian(&with_params("eval", &["--grid-min", "-150", "--points", "4"]), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = parisian(
        &with_params("eval", &["--grid-min", "-150", "--grid-max", "30", "--points", "4", "--clamp"]),
        dir.path(),
    );
    assert!(out.status.success());
}

#[test]
fn out_dir_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("artifacts");
    let out = Command::new(env!("CARGO_BIN_EXE_parisian"))
        .args(with_params("figure1", &["--points", "11"]))
        .current_dir(dir.path())
        .env("PARISIAN_OUT_DIR", &target)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(target.join("figure1.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "w,pi_0,pi_L,pi_rho_0.01,pi_rho_0.02,pi_rho_0.03,pi_rho_0.04"
    );
    assert_eq!(text.lines().count(), 12);
    assert!(target.join("figure1.manifest.json").exists());
}

#[test]
fn analytic_outputs_are_byte_identical_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = parisian(&with_params("figure1", &["--points", "64", "--out", name]), dir.path());
        assert!(out.status.success());
        std::fs::read(dir.path().join(name)).unwrap()
    };
    let (a, b) = (run("a.csv"), run("a.csv"));
    assert_eq!(a, b);
    let first = parisian(&with_params("solve", &[]), dir.path()).stdout;
    assert_eq!(first, parisian(&with_params("solve", &[]), dir.path()).stdout);
    std::fs::write(dir.path().join("solve.json"), &first).unwrap();
    assert_eq!(parisian(&["replay", "solve.json"], dir.path()).stdout, first);
    let out = parisian(&["replay", "a.manifest.json", "--out", "b.csv"], dir.path());
    assert!(out.status.success());
    assert_eq!(std::fs::read(dir.path().join("b.csv")).unwrap(), a);
}

#[test]
fn manifest_only_skips_computation() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&parisian(&with_params("eval", &["--manifest-only"]), dir.path()));
    assert_eq!(doc["tool"], "parisian");
    assert!(doc.get("constants").is_some());
    assert!(!dir.path().join("eval.csv").exists());
    let out = parisian(&with_params("eval", &["--manifest-only", "--grid-max", "99"]), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn timings_are_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&parisian(&with_params("solve", &["--timings"]), dir.path()));
    assert!(doc["manifest"]["timings"]["solve_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn simulation_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sim = |threads: &str| {
        let args = with_params(
            "simulate",
            &["--w0", "-10", "--paths", "400", "--seed", "7", "--threads", threads],
        );
        parisian(&args, dir.path())
    };
    let one = sim("1");
    let doc = json(&one);
    assert_eq!(one.stdout, sim("3").stdout);
    assert_eq!(doc["manifest"]["seeds"][0], 7);
    assert_eq!(doc["paths_used"], 400);
    assert_eq!(doc["oracle"]["name"], "psi");
    assert!(doc["manifest"]["command"]["args"].get("threads").is_none());
}

#[test]
fn simulate_at_safe_level_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&parisian(&with_params("simulate", &["--w0", "25", "--paths", "100"]), dir.path()));
    assert_eq!(doc["estimate"], 0.0);
}

#[test]
fn simulate_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = parisian(&with_params("simulate", &["--w0", "0", "--restricted"]), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = parisian(&with_params("simulate", &["--w0", "0", "--strategy", "nope"]), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes_and_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = parisian(
        &with_params("verify", &["--suite", "monotonicity", "--rho-ladder", "0.01,0.02", "--out", "v.json"]),
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("suite monotonicity"));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("v.json")).unwrap()).unwrap();
    assert_eq!(doc["report"]["passed"], true);
}

#[test]
fn verify_asymptotic_small_rho() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = with_params("verify", &["--suite", "asymptotic"]);
    args[10] = "0.001";
    assert_eq!(parisian(&args, dir.path()).status.code(), Some(0));
}

#[test]
fn verify_failure_exits_one() {
    // a descending ladder asserts the reverse of the true ordering in ρ
    let dir = tempfile::tempdir().unwrap();
    let args = with_params("verify", &["--suite", "monotonicity", "--rho-ladder", "0.02,0.01"]);
    let out = parisian(&args, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("FAIL monotonicity/pi_star_ordered_in_rho"), "{text}");
    assert!(out.stderr.is_empty());
}
