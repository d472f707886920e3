//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Runs without the libtest harness so the lines are
//! always visible under `cargo test`.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use kdv_momentum::cli::read_csv_body;
use kdv_momentum::experiments::{
    convergence_study, point_config, run_triple, ExperimentConfig, InitialProfile, RunResult, Sample,
    SweepConfig, SweepReport,
};
use kdv_momentum::kdv::{self, KdVState, KdvStepper, Soliton};
use kdv_momentum::peregrine::{PeregrineState, PeregrineStepper};
use kdv_momentum::waterwave::{VerticalGrid, WaterWaveSolver};
use kdv_momentum::{Grid1D, ModelParams, RealField};

const RATE_BAND: (f64, f64) = (1.7, 2.3);
const PROOF_BAND: (f64, f64) = (0.7, 1.3);
const MIN_R2: f64 = 0.98;
const RESOLUTION_CHANGE: f64 = 0.05;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Check = Box<dyn FnOnce() -> Result<Outcome, String>>;

fn in_band(x: f64, (lo, hi): (f64, f64)) -> bool {
    (lo..=hi).contains(&x)
}

fn flat_dno() -> Result<Outcome, String> {
    let grid = Grid1D::new(2.0 * std::f64::consts::PI, 256).map_err(|e| e.to_string())?;
    let vg = VerticalGrid::new(24).map_err(|e| e.to_string())?;
    let zeta = RealField::zeros(&grid);
    let mut worst = 0.0f64;
    for mu in [0.01, 0.04, 0.08] {
        let p = ModelParams::new(mu, mu).map_err(|e| e.to_string())?;
        let solver = WaterWaveSolver::new(&grid, &p, &vg);
        for k in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let phi = RealField::from_fn(&grid, |x| f64::cos(k * x));
            let g = solver.dirichlet_neumann(&zeta, &phi, 0.0).map_err(|e| e.to_string())?;
            let q = mu.sqrt() * k;
            let exact = phi.scale(q * q.tanh());
            worst = worst.max((&g - &exact).norm_linf());
        }
    }
    Ok(outcome(worst <= 1e-9, format!("max error {worst:.3e} (limit 1e-9)")))
}

fn soliton() -> Result<Outcome, String> {
    let p = ModelParams::new(0.04, 0.04).map_err(|e| e.to_string())?;
    let grid = Grid1D::new(80.0, 512).map_err(|e| e.to_string())?;
    let sol = Soliton {
        amplitude: 1.0,
        center: 40.0,
    };
    let start = KdVState::new(sol.profile(&grid, &p, 0.0));
    let end = kdv::integrate(&start, 1e-3, 1000, &p).map_err(|e| e.to_string())?;
    let err = (&end.eta - &sol.profile(&grid, &p, 1.0)).norm_linf();
    Ok(outcome(err <= 1e-6, format!("L-inf shape error {err:.3e} (limit 1e-6)")))
}

fn rel_drift(series: &[f64]) -> f64 {
    let i0 = series[0];
    series.iter().map(|v| ((v - i0) / i0).abs()).fold(0.0, f64::max)
}

fn conservation() -> Result<Outcome, String> {
    let cfg = ExperimentConfig {
        horizon: 10.0,
        ..ExperimentConfig::default()
    };
    let p = cfg.params().map_err(|e| e.to_string())?;
    let grid = Grid1D::new(cfg.length, cfg.n).map_err(|e| e.to_string())?;
    let eta0 = cfg.profile.sample(&grid, &p).map_err(|e| e.to_string())?;
    let steps = (cfg.horizon / cfg.dt).round() as usize;

    let kdv_stepper = KdvStepper::new(&grid, p, cfg.dt).map_err(|e| e.to_string())?;
    let mut k = KdVState::new(eta0.clone());
    let mut kdv_series = vec![kdv::conserved_integrals(&k.eta, &p).map_err(|e| e.to_string())?];
    let per_stepper = PeregrineStepper::new(p, cfg.dt).map_err(|e| e.to_string())?;
    let mut s = PeregrineState::new(eta0.clone(), kdv::v_kdv(&eta0, &p));
    let mut per_series = vec![s.invariants(&p)];
    let solver = WaterWaveSolver::new(&grid, &p, &VerticalGrid::new(cfg.nz).map_err(|e| e.to_string())?);
    let data = kdv_momentum::experiments::build_coupled_initial_data(&cfg.profile, &solver)
        .map_err(|e| e.to_string())?;
    let mut w = data.waterwave();
    let mut ww_series = vec![w.zeta.integral()];
    for _ in 0..steps {
        k = kdv_stepper.advance(&k).map_err(|e| e.to_string())?;
        s = per_stepper.advance(&s).map_err(|e| e.to_string())?;
        w = solver.step(&w, cfg.dt).map_err(|e| e.to_string())?;
        kdv_series.push(kdv::conserved_integrals(&k.eta, &p).map_err(|e| e.to_string())?);
        per_series.push(s.invariants(&p));
        ww_series.push(w.zeta.integral());
    }
    let kd = [
        rel_drift(&kdv_series.iter().map(|x| x.0).collect::<Vec<_>>()),
        rel_drift(&kdv_series.iter().map(|x| x.1).collect::<Vec<_>>()),
        rel_drift(&kdv_series.iter().map(|x| x.2).collect::<Vec<_>>()),
    ];
    let pd = [
        rel_drift(&per_series.iter().map(|x| x.0).collect::<Vec<_>>()),
        rel_drift(&per_series.iter().map(|x| x.1).collect::<Vec<_>>()),
    ];
    let wd = rel_drift(&ww_series);
    let kmax = kd.iter().cloned().fold(0.0, f64::max);
    let pmax = pd.iter().cloned().fold(0.0, f64::max);
    Ok(outcome(
        kmax <= 1e-8 && pmax <= 1e-8 && wd <= 1e-9,
        format!(
            "T=10: KdV {:.2e}/{:.2e}/{:.2e} (limit 1e-8), Peregrine {:.2e}/{:.2e} (limit 1e-8), water-wave mass {wd:.2e} (limit 1e-9)",
            kd[0], kd[1], kd[2], pd[0], pd[1]
        ),
    ))
}

fn family_line(report: &SweepReport, name: &str) -> Result<(f64, f64), String> {
    let f = report.family(name).ok_or_else(|| format!("missing family {name}"))?;
    Ok((f.fit.slope, f.fit.r2))
}

fn slopes_in_band(report: &SweepReport, names: &[&str], band: (f64, f64)) -> Result<Outcome, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for name in names {
        let (slope, r2) = family_line(report, name)?;
        pass &= in_band(slope, band);
        parts.push(format!("{name} {slope:.3} (r2 {r2:.4})"));
    }
    Ok(outcome(pass, format!("{} in [{}, {}]", parts.join(", "), band.0, band.1)))
}

/// Errors of criteria 4-6, reduced as in the rate fits.
fn reduced_errors(run: &RunResult) -> Vec<(&'static str, f64)> {
    let cols: [(&str, fn(&Sample) -> f64); 7] = [
        ("E_momentum", |s| s.e_momentum),
        ("E_kdv_pair_linf", |s| s.e_kdv_pair_linf),
        ("E_ww_pair_linf", |s| s.e_ww_pair_linf),
        ("E_kdv_pair_hsmu", |s| s.e_kdv_pair_hsmu),
        ("E_ww_pair_hsmu", |s| s.e_ww_pair_hsmu),
        ("residual_r_linf", |s| s.residual_r_linf),
        ("residual_R_linf", |s| s.residual_rr_linf),
    ];
    cols.iter().map(|(n, c)| (*n, run.sup_weighted(c))).collect()
}

fn resolution(sweep: &SweepConfig, base: &RunResult) -> Result<Outcome, String> {
    let coarse = point_config(sweep, 0.04);
    let fine = ExperimentConfig {
        n: 2 * coarse.n,
        nz: 2 * coarse.nz,
        dt: 0.5 * coarse.dt,
        ..coarse
    };
    let refined = run_triple(&fine).map_err(|e| e.to_string())?;
    let mut worst = (0.0, "");
    for ((name, a), (_, b)) in reduced_errors(base).into_iter().zip(reduced_errors(&refined)) {
        let change = (a - b).abs() / b.abs();
        if change > worst.0 {
            worst = (change, name);
        }
    }
    Ok(outcome(
        worst.0 < RESOLUTION_CHANGE,
        format!(
            "mu=0.04, N {}->{}, Nz {}->{}, dt {}->{}: largest change {:.2e} ({}) (limit 5%)",
            coarse.n, fine.n, coarse.nz, fine.nz, coarse.dt, fine.dt, worst.0, worst.1
        ),
    ))
}

fn rates_values(path: &Path) -> Result<serde_json::Value, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(v["families"].clone())
}

fn determinism() -> Result<Outcome, String> {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for run in ["a", "b"] {
        let out = root.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_kdvmom"))
            .args(["sweep", "--N", "256", "--Nz", "16", "--T", "1", "--mu-list", "0.08,0.04,0.02,0.01"])
            .arg("--out")
            .arg(&out)
            .env_remove("OUT_DIR")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("sweep invocation {run} failed: {status}"));
        }
        files.push(out);
    }
    let mut csvs = vec!["sweep.csv".to_string()];
    for mu in [0.08, 0.04, 0.02, 0.01] {
        csvs.push(format!("{}.csv", kdv_momentum::cli::point_stem(mu)));
    }
    let mut same = true;
    for name in &csvs {
        let a = read_csv_body(&files[0].join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = read_csv_body(&files[1].join(name)).map_err(|e| format!("{name}: {e}"))?;
        same &= a == b && !a.is_empty();
    }
    let rates_same = rates_values(&files[0].join("rates.json"))? == rates_values(&files[1].join("rates.json"))?;
    Ok(outcome(
        same && rates_same,
        format!(
            "{} CSV bodies identical: {same}; rates.json values identical: {rates_same}",
            csvs.len()
        ),
    ))
}

fn main() -> ExitCode {
    let sweep = SweepConfig {
        base: ExperimentConfig {
            profile: InitialProfile::default(),
            horizon: 5.0,
            ..ExperimentConfig::default()
        },
        mus: vec![0.08, 0.04, 0.02, 0.01],
        eps_ratio: 1.0,
        workers: 4,
        ..SweepConfig::default()
    };

    let mut results: Vec<(&str, Result<Outcome, String>, f64)> = Vec::new();
    let mut run = |name: &'static str, check: Check| {
        let t0 = Instant::now();
        let r = check();
        let secs = t0.elapsed().as_secs_f64();
        let (tag, detail) = match &r {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.detail.clone()),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        println!("{tag} {name}: {detail} [{secs:.1}s]");
        results.push((name, r, secs));
    };

    run("C1 flat-surface Dirichlet-Neumann map", Box::new(flat_dno));
    run("C2 KdV soliton transport", Box::new(soliton));
    run("C3 conservation drift", Box::new(conservation));

    let t0 = Instant::now();
    let report = convergence_study(&sweep);
    eprintln!("sweep finished in {:.1}s", t0.elapsed().as_secs_f64());
    match report {
        Ok(report) => {
            let r = &report;
            run(
                "C4 momentum rate",
                Box::new({
                    let r = r.clone();
                    move || {
                        let (slope, r2) = family_line(&r, "momentum")?;
                        Ok(outcome(
                            in_band(slope, RATE_BAND) && r2 >= MIN_R2,
                            format!("slope {slope:.3} in [1.7, 2.3], r2 {r2:.4} >= {MIN_R2}"),
                        ))
                    }
                }),
            );
            run(
                "C5 pair-error rates",
                Box::new({
                    let r = r.clone();
                    move || {
                        slopes_in_band(
                            &r,
                            &["kdv_pair_linf", "ww_pair_linf", "kdv_pair_hsmu", "ww_pair_hsmu"],
                            RATE_BAND,
                        )
                    }
                }),
            );
            run(
                "C6 consistency residual rates",
                Box::new({
                    let r = r.clone();
                    move || slopes_in_band(&r, &["residual_r", "residual_R"], RATE_BAND)
                }),
            );
            run(
                "C7 eta_xx + eta_xt bound rate",
                Box::new({
                    let r = r.clone();
                    move || slopes_in_band(&r, &["proofbound"], PROOF_BAND)
                }),
            );
            let base = r.runs.iter().find(|x| (x.mu - 0.04).abs() < 1e-12).cloned();
            let sweep = sweep.clone();
            run(
                "C8 resolution independence",
                Box::new(move || resolution(&sweep, &base.ok_or("no mu = 0.04 run")?)),
            );
        }
        Err(e) => {
            for name in [
                "C4 momentum rate",
                "C5 pair-error rates",
                "C6 consistency residual rates",
                "C7 eta_xx + eta_xt bound rate",
                "C8 resolution independence",
            ] {
                let msg = format!("sweep failed: {e}");
                run(name, Box::new(move || Err(msg)));
            }
        }
    }
    run("C9 determinism", Box::new(determinism));

    let failed: Vec<&str> = results
        .iter()
        .filter(|(_, r, _)| !matches!(r, Ok(o) if o.pass))
        .map(|(n, _, _)| *n)
        .collect();
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed.len(),
        failed.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
