use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kdv_momentum::cli::{resolve_config, Command as Sub, Flags, Model, OutputFormat, RunConfig};

fn kdvmom(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdvmom"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("OUT_DIR")
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn flags_override_file_and_env_overrides_file_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    fs::write(&path, "mu = 0.02\neps = 0.02\nN = 256\nout = from_file\n").unwrap();
    let flags = Flags {
        config: Some(path.clone()),
        n: Some(128),
        ..Flags::default()
    };
    let cfg = resolve_config(&Sub::Compare, &flags, None).unwrap();
    assert_eq!((cfg.mu, cfg.n), (0.02, 128));
    assert_eq!(cfg.out, Path::new("from_file"));
    assert_eq!(cfg.model, Model::Compare);

    let cfg = resolve_config(&Sub::Compare, &flags, Some("/tmp/env_out")).unwrap();
    assert_eq!(cfg.out, Path::new("/tmp/env_out"));
    let flags = Flags {
        out: Some("flag_out".into()),
        ..flags
    };
    let cfg = resolve_config(&Sub::Compare, &flags, Some("/tmp/env_out")).unwrap();
    assert_eq!(cfg.out, Path::new("flag_out"));
}

#[test]
fn json_config_matches_key_value_config() {
    let dir = tempfile::tempdir().unwrap();
    let kv = dir.path().join("a.conf");
    let js = dir.path().join("a.json");
    fs::write(&kv, "mu_list = 0.1, 0.05, 0.02\nT = 2\nformat = json\nprofile = sech2\n").unwrap();
    fs::write(&js, r#"{"mu_list": [0.1, 0.05, 0.02], "T": 2, "format": "json", "profile": "sech2"}"#).unwrap();
    let load = |p: &Path| {
        let mut c = RunConfig::default();
        c.apply_file(p).unwrap();
        c
    };
    let (a, b) = (load(&kv), load(&js));
    assert_eq!(a, b);
    assert_eq!(a.format, OutputFormat::Json);
    assert_eq!(a.mu_list, vec![0.1, 0.05, 0.02]);
}

#[test]
fn bad_configs_exit_nonzero_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "mu = 0.04\nwavelength = 3\n").unwrap();
    let o = kdvmom(&["compare", "--config", conf.to_str().unwrap()], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("wavelength"), "{}", stderr(&o));

    let o = kdvmom(&["sweep", "--mu-list", "0.02,0.04,0.01"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("mu_list"), "{}", stderr(&o));

    let o = kdvmom(&["run-kdv", "--dt=-0.1"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("dt"), "{}", stderr(&o));
}

#[test]
fn run_kdv_writes_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdvmom(&["run-kdv", "--N", "256", "--T", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("kdv.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    assert_eq!(lines.next(), Some("t,mass,l2,hamiltonian,max_eta"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    for r in &rows {
        assert!(((r[1] - rows[0][1]) / rows[0][1]).abs() < 1e-12);
    }
    assert!(dir.path().join("kdv_final.csv").exists());
}

#[test]
fn compare_writes_timeseries_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdvmom(&["compare", "--N", "256", "--Nz", "16", "--T", "0.2"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("timeseries.csv")).unwrap();
    assert_eq!(
        text.lines().nth(1),
        Some(
            "t,E_momentum,E_kdv_pair_linf,E_ww_pair_linf,E_kdv_pair_hsmu,E_ww_pair_hsmu,\
             residual_r_linf,residual_R_linf,proofbound_linf,mass_kdv,mass_peregrine,mass_ww"
        )
    );
    assert_eq!(text.lines().count(), 2 + 3);

    let o = kdvmom(&["compare", "--N", "256", "--Nz", "16", "--T", "0.2", "--format", "json"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("timeseries.json")).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["columns"][0], "t");
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn out_dir_environment_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_kdvmom"))
        .args(["run-peregrine", "--N", "128", "--T", "0.1"])
        .env("OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("peregrine.csv").exists());
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = kdvmom(&["selftest"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("all checks passed"));
}
