use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

fn qnd(args: &[&str], config: Option<&str>, dir: &Path) -> (i32, PathBuf) {
    let out = dir.join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qnd"));
    cmd.args(args).arg("--out").arg(&out);
    if let Some(text) = config {
        let path = dir.join("run.toml");
        fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    let status = cmd.output().unwrap().status;
    (status.code().unwrap(), out)
}

fn json(path: PathBuf) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: PathBuf, name: &str) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let col = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn spectrum_dips_and_lossless_flatness() {
    let d = TempDir::new().unwrap();
    let (code, out) = qnd(&["spectrum"], None, d.path());
    assert_eq!(code, 0);
    let s = json(out.join("spectrum.json"));
    let (f0, chi) = (10.62524e9, 1.5e6);
    // grid step is 10 kHz
    assert!((s["dip_g_hz"].as_f64().unwrap() - (f0 + chi)).abs() <= 1e4);
    assert!((s["dip_e_hz"].as_f64().unwrap() - (f0 - chi)).abs() <= 1e4);
    assert!(fs::read_to_string(out.join("manifest.toml")).unwrap().starts_with("# qnd spectrum"));

    let d = TempDir::new().unwrap();
    let (code, out) = qnd(&["spectrum"], Some("[params]\nkappa_in_hz = 0.0"), d.path());
    assert_eq!(code, 0);
    for col in ["reflectance_g", "reflectance_e"] {
        assert!(csv_column(out.join("spectrum.csv"), col).iter().all(|r| (r - 1.0).abs() < 1e-12));
    }

    let d = TempDir::new().unwrap();
    let (_, out) = qnd(&["spectrum"], Some("preset = \"ideal\""), d.path());
    let dphi = json(out.join("spectrum.json"))["differential_phase_at_center"].as_f64().unwrap();
    assert!((dphi - std::f64::consts::PI).abs() < 1e-9, "{dphi}");
}

#[test]
fn efficiency_presets_and_bad_grid() {
    let d = TempDir::new().unwrap();
    let (code, out) = qnd(&["efficiency"], None, d.path());
    assert_eq!(code, 0);
    let eta = json(out.join("efficiency.json"))["eta"].as_f64().unwrap();
    assert!((0.81..=0.87).contains(&eta), "{eta}");
    assert_eq!(csv_column(out.join("efficiency.csv"), "phase_flip").len(), 13);

    let d = TempDir::new().unwrap();
    let cfg = "preset = \"ideal\"\n[schedule]\ngate_interval = 1e-6\nphoton_grid = [0.0, 0.05, 0.1, 0.15]";
    let (code, out) = qnd(&["efficiency"], Some(cfg), d.path());
    assert_eq!(code, 0);
    assert!(json(out.join("efficiency.json"))["eta"].as_f64().unwrap() >= 0.98);

    let d = TempDir::new().unwrap();
    let (code, _) = qnd(&["efficiency"], Some("[schedule]\nphoton_grid = [0.0]"), d.path());
    assert_eq!(code, 2);
}

#[test]
fn protocol_outputs() {
    let d = TempDir::new().unwrap();
    let (code, out) = qnd(&["protocol"], None, d.path());
    assert_eq!(code, 0);
    let s = json(out.join("protocol.json"));
    let n = s["negativity"].as_f64().unwrap();
    assert!((0.25..=0.346).contains(&n), "{n}");
    for name in ["rho_g", "rho_e", "rho_uncond", "composite", "photon_distribution", "wigner_g", "wigner_e", "wigner_uncond"] {
        assert!(out.join(format!("{name}.csv")).exists(), "{name}");
    }
    let p: f64 = csv_column(out.join("photon_distribution.csv"), "rho_e_readout").iter().sum();
    assert!((p - 1.0).abs() < 1e-9);

    let d = TempDir::new().unwrap();
    let (code, out) = qnd(&["protocol"], Some("[schedule]\nmean_photons = 0.0"), d.path());
    assert_eq!(code, 0);
    let re = csv_column(out.join("rho_g.csv"), "re");
    assert!((re[0] - 1.0).abs() < 1e-9, "{}", re[0]);
}

#[test]
fn exit_codes() {
    let d = TempDir::new().unwrap();
    assert_eq!(qnd(&["spectrum"], Some("colour = 3"), d.path()).0, 2);
    assert_eq!(qnd(&["spectrum"], Some("[params]\nt3 = 1.0"), d.path()).0, 2);
    assert_eq!(qnd(&["sweep"], Some("[sweep]\naxis = \"temperature\""), d.path()).0, 2);
    assert_eq!(qnd(&["spectrum", "--config", "/nonexistent/run.toml"], None, d.path()).0, 2);
    assert_eq!(qnd(&["tomo-selftest"], None, d.path()).0, 2);
    // no photons and a perfect detector: the e outcome never occurs
    let cfg = "preset = \"ideal\"\n[schedule]\nmean_photons = 0.0";
    assert_eq!(qnd(&["protocol"], Some(cfg), d.path()).0, 3);
}

#[test]
fn sweep_finds_matched_coupling() {
    let d = TempDir::new().unwrap();
    let cfg = "preset = \"ideal\"\n[schedule]\nmean_photons = 0.0\nphoton_grid = [0.0, 0.05, 0.1, 0.15]\n[sweep]\naxis = \"kappa_ex\"\nvalues = [1.5e6, 3.0e6, 4.5e6]";
    let (code, out) = qnd(&["sweep"], Some(cfg), d.path());
    assert_eq!(code, 0);
    assert_eq!(json(out.join("sweep.json"))["argmax_eta"].as_f64().unwrap(), 3.0e6);
    assert_eq!(csv_column(out.join("sweep.csv"), "eta").len(), 3);
}

const SMALL_TOMO: &str = "[tomography]\nphases = 12\nshots = 2000\niterations = 400\n";

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let runs: Vec<(TempDir, PathBuf)> = ["1", "3"]
        .iter()
        .map(|threads| {
            let d = TempDir::new().unwrap();
            let (code, out) = qnd(&["tomo-selftest", "--seed", "11", "--threads", threads], Some(SMALL_TOMO), d.path());
            assert_eq!(code, 0);
            (d, out)
        })
        .collect();
    for name in ["selftest.csv", "selftest.json", "coherent_record.csv", "composite_record.csv"] {
        assert_eq!(fs::read(runs[0].1.join(name)).unwrap(), fs::read(runs[1].1.join(name)).unwrap(), "{name}");
    }
    let d = TempDir::new().unwrap();
    let (_, other) = qnd(&["tomo-selftest", "--seed", "12"], Some(SMALL_TOMO), d.path());
    assert_ne!(fs::read(runs[0].1.join("coherent_record.csv")).unwrap(), fs::read(other.join("coherent_record.csv")).unwrap());
}

#[test]
fn manifest_reruns_to_the_same_output() {
    let d = TempDir::new().unwrap();
    let (code, out) = qnd(&["tomo-selftest", "--seed", "3"], Some(SMALL_TOMO), d.path());
    assert_eq!(code, 0);
    let manifest = fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed = 3") && manifest.contains("eta = 0.43"));
    let d2 = TempDir::new().unwrap();
    let (code, again) = qnd(&["tomo-selftest"], Some(&manifest), d2.path());
    assert_eq!(code, 0);
    assert_eq!(fs::read(out.join("selftest.csv")).unwrap(), fs::read(again.join("selftest.csv")).unwrap());
}

#[test]
fn selftest_reference_values() {
    let d = TempDir::new().unwrap();
    let (code, out) = qnd(&["tomo-selftest", "--seed", "2024"], None, d.path());
    assert_eq!(code, 0);
    let rows = json(out.join("selftest.json"))["rows"].as_array().unwrap().clone();
    let get = |case: &str, corrected: bool, key: &str| {
        rows.iter()
            .find(|r| r["case"] == case && r["corrected"] == corrected)
            .unwrap()[key]
            .as_f64()
            .unwrap()
    };
    assert!((get("coherent", false, "mean_photons") - 0.058).abs() < 0.006);
    assert!(get("coherent", false, "fidelity") > 0.99);
    assert!((get("coherent", true, "mean_photons") - 0.137).abs() < 0.01);
    assert!((get("composite", false, "negativity") - 0.159).abs() < 0.03);
}
