use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_photonflow");

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path) -> Output {
    Command::new(BIN).arg(cmd).arg("--config").arg(config).arg("--out").arg(out).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn cavity() -> Value {
    json!({"m": 2, "n": 1,
        "S_minus": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]],
        "C_minus": [[[1, 0]], [[1, 0]]],
        "Omega_minus": [[[0, 0]]]})
}

fn beamsplitter(r: [f64; 2], t: [f64; 2]) -> Value {
    json!({"m": 2, "n": 0, "S_minus": [[r, t], [t, r]]})
}

fn squeezer() -> Value {
    json!({"m": 1, "n": 1, "S_minus": [[[1, 0]]], "C_minus": [[[1, 0]]], "C_plus": [[[0.3, 0]]], "Omega_minus": [[[1, 0]]]})
}

fn job(dir: &Path, system: Value, pulse: Value, grid: Value) -> PathBuf {
    write(dir, "system.json", &system);
    write(dir, "job.json", &json!({"system": "system.json", "pulse": pulse, "grid": grid}))
}

fn read_bin(p: &Path) -> Vec<[f64; 2]> {
    std::fs::read(p)
        .unwrap()
        .chunks_exact(16)
        .map(|c| [f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())])
        .collect()
}

#[test]
fn realize_cavity_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), cavity(), Value::Null, Value::Null);
    let o = run("realize", &cfg, &dir.path().join("out"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["stable: true", "passive: true", "stability_margin: 1\n", "A: [[[-1.0,0.0],[0.0,0.0]],[[0.0,0.0],[-1.0,0.0]]]"] {
        assert!(text.contains(needle), "{needle} missing in\n{text}");
    }
}

#[test]
fn realize_static_network_has_empty_dynamics() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cfg = job(dir.path(), beamsplitter([h, 0.0], [0.0, h]), Value::Null, Value::Null);
    let o = run("realize", &cfg, &dir.path().join("out"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("n: 0") && text.contains("A: []"), "{text}");
}

#[test]
fn non_unitary_scattering_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), beamsplitter([0.6, 0.0], [0.8, 0.0]), Value::Null, Value::Null);
    let o = run("realize", &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: kind=NonUnitaryScattering code=2 msg=\""), "{err}");
}

#[test]
fn io_and_schema_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run("realize", &dir.path().join("absent.json"), dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).starts_with("error: kind=Io code=4"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"system\": 3}").unwrap();
    let o = run("realize", &bad, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("error: kind=ConfigSchema code=2"));

    let cfg = job(dir.path(), cavity(), json!({"kind": "vacuum", "m": 2}), json!({"t_min": 0, "t_max": 1, "n_points": 4}));
    let o = run("intensity", &cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kind=InvalidGrid"));
}

#[test]
fn hong_ou_mandel_job() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let cfg = job(
        dir.path(),
        beamsplitter([h, 0.0], [0.0, h]),
        json!({"kind": "gaussian", "center": 0, "sigma": 1, "m": 2}),
        json!({"t_min": -8, "t_max": 8, "n_points": 64}),
    );
    let out = dir.path().join("out");
    let o = run("transfer", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(report["cross_channel_max"].as_f64().unwrap() <= 1e-12);
    assert!(report["cross_channel_mass"].as_f64().unwrap() <= 1e-24);
    assert_eq!(report["route"], "mm");
    let header: Value = serde_json::from_str(&std::fs::read_to_string(out.join("psi_out.json")).unwrap()).unwrap();
    assert_eq!(header["shape"], json!([2, 2, 64, 64]));
    assert_eq!(read_bin(&out.join("psi_out.bin")).len(), 4 * 64 * 64);
}

#[test]
fn identity_system_output_is_lifted_input() {
    let dir = tempfile::tempdir().unwrap();
    let id = beamsplitter([1.0, 0.0], [0.0, 0.0]);
    let data: Vec<u8> = (0..32 * 32)
        .flat_map(|k| {
            let (i, j) = ((k / 32) as f64, (k % 32) as f64);
            let re = (-((i - 16.0).powi(2) + (j - 15.0).powi(2)) / 20.0).exp();
            [re.to_le_bytes(), (0.1 * re).to_le_bytes()].concat()
        })
        .collect();
    std::fs::write(dir.path().join("psi.bin"), &data).unwrap();
    let cfg = job(dir.path(), id, json!({"kind": "grid", "path": "psi.bin", "class": "function", "m": 2}), json!({"t_min": -8, "t_max": 8, "n_points": 32}));
    let out = dir.path().join("out");
    let o = run("transfer", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let bytes = std::fs::read(out.join("psi_out.bin")).unwrap();
    let slot = 32 * 32 * 16;
    assert_eq!(&bytes[slot..2 * slot], &data[..]);
    assert!(bytes[..slot].iter().chain(&bytes[2 * slot..]).all(|&b| b == 0));
}

#[test]
fn three_photon_job_lists_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let g = json!({"kind": "gaussian", "center": 0, "sigma": 1});
    let cfg = job(
        dir.path(),
        json!({"m": 2, "n": 0, "S_minus": [[[h, 0], [-h, 0]], [[h, 0], [h, 0]]]}),
        json!({"kind": "symmetrized", "multiplicities": [1, 2], "shapes": [g, g, g], "normalize": true}),
        json!({"t_min": -6, "t_max": 6, "n_points": 16}),
    );
    let out = dir.path().join("out");
    let o = run("transfer", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("three_photon_coefficients: "));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let coeffs = report["three_photon_coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 4);
    let total: f64 = coeffs.iter().map(|z| z[0].as_f64().unwrap().powi(2) + z[1].as_f64().unwrap().powi(2)).sum();
    assert!((total - 1.0).abs() < 1e-10, "{total}");
}

#[test]
fn vacuum_intensity_is_zero_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), cavity(), json!({"kind": "vacuum", "m": 2}), json!({"t_min": -8, "t_max": 8, "n_points": 256}));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let o = run("intensity", &cfg, &a);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("total_photons_out=0\n"), "{}", stdout(&o));
    assert!(run("intensity", &cfg, &b).status.success());
    let csv = std::fs::read_to_string(a.join("intensity.csv")).unwrap();
    assert_eq!(csv, std::fs::read_to_string(b.join("intensity.csv")).unwrap());
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,re(n_11),im(n_11),re(n_12),im(n_12),re(n_21),im(n_21),re(n_22),im(n_22)");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 256);
    assert!(rows.iter().all(|r| r.split(',').skip(1).all(|x| x == "0")));
}

#[test]
fn cavity_product_intensity_conserves_photons() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(
        dir.path(),
        cavity(),
        json!({"kind": "product", "factors": [{"kind": "gaussian", "center": -1.5, "sigma": 1}, {"kind": "gaussian", "center": -1, "sigma": 0.8}]}),
        json!({"t_min": -8, "t_max": 16, "n_points": 768}),
    );
    let o = run("intensity", &cfg, &dir.path().join("out"));
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let total: f64 = text.lines().find_map(|l| l.strip_prefix("total_photons_out=")).unwrap().parse().unwrap();
    assert!((total - 2.0).abs() <= 0.02, "{total}");
}

#[test]
fn spectrum_of_squeezing_system() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "system.json", &squeezer());
    let cfg = write(dir.path(), "job.json", &json!({"system": "system.json", "spectrum": {"omega_min": -2, "omega_max": 2, "count": 5}}));
    let out = dir.path().join("out");
    let o = run("spectrum", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("omega,re(R_11),im(R_11),re(R_12)"));
    assert_eq!(lines[1].split(',').count(), 9);
}

#[test]
fn nonpassive_transfer_uses_signed_channels() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), squeezer(), json!({"kind": "gaussian", "center": -1, "sigma": 1}), json!({"t_min": -16, "t_max": 16, "n_points": 256}));
    let out = dir.path().join("out");
    let o = run("transfer", &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let header: Value = serde_json::from_str(&std::fs::read_to_string(out.join("psi_out.json")).unwrap()).unwrap();
    assert_eq!(header["labels"], "channel_sign");
    assert_eq!(header["dims"], json!([2]));
}

#[test]
fn memory_budget_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = job(dir.path(), cavity(), json!({"kind": "gaussian", "center": -1, "sigma": 1, "m": 2}), json!({"t_min": -8, "t_max": 8, "n_points": 64}));
    let o = Command::new(BIN)
        .args(["transfer", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .env("PHOTONFLOW_MEM_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error: kind=DimensionBudget code=3"));
}

#[test]
fn verify_subset_passes_and_tightened_fails() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "system.json", &cavity());
    let ok = write(dir.path(), "ok.json", &json!({"system": "system.json", "verify": {"criteria": [2, 7]}}));
    let o = run("verify", &ok, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("criterion 2 PASS") && text.contains("criterion 7 PASS"), "{text}");
    assert!(text.ends_with("verify: PASS\n"));

    let tight = write(dir.path(), "tight.json", &json!({"system": "system.json", "verify": {"criteria": [3], "tolerance_scale": 0.01}}));
    let o = run("verify", &tight, dir.path());
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("criterion 3 FAIL"));
    assert!(stderr(&o).starts_with("error: kind=VerifyFailed code=5"));
}

#[test]
fn verify_skips_oracle_for_nonpassive_system() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "system.json", &squeezer());
    let cfg = write(dir.path(), "job.json", &json!({"system": "system.json", "verify": {"criteria": [10]}}));
    let o = run("verify", &cfg, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("criterion job SKIP configured system: no oracle"));
}

#[test]
fn verify_checks_configured_cavity_against_oracle() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "system.json", &cavity());
    let cfg = write(
        dir.path(),
        "job.json",
        &json!({"system": "system.json", "verify": {"criteria": []},
            "pulse": {"kind": "product", "factors": [{"kind": "gaussian", "center": -1, "sigma": 1}, {"kind": "gaussian", "center": -0.5, "sigma": 0.8}]},
            "grid": {"t_min": -8, "t_max": 12, "n_points": 400}}),
    );
    let o = run("verify", &cfg, dir.path());
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("cavity_oracle_rel_l2="));
}
