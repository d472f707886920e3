//! Command-line driver behind the `kdvmom` binary.
//!
//! Settings are layered: built-in defaults, then `--config` (JSON or
//! `key = value`), then the `OUT_DIR` environment variable, then flags.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::experiments::{
    build_coupled_initial_data, convergence_study, fit_rate, run_triple, ExperimentConfig, InitialProfile,
    ProfileShape, RunResult, Sample, SweepReport,
};
use crate::kdv::{self, KdVState, KdvStepper, Soliton};
use crate::params::ModelParams;
use crate::peregrine::{PeregrineState, PeregrineStepper};
use crate::spectral::{Grid1D, RealField};
use crate::waterwave::{VerticalGrid, WaterWaveSolver, WaterWaveState};

pub use config::{ConfigError, Model, OutputFormat, RunConfig};
use output::{write_json, write_table, Table, SCHEMA_VERSION};

#[derive(Debug, Parser)]
#[command(name = "kdvmom", version, about = "KdV / Peregrine / water-wave solvers and the momentum-density convergence harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate KdV and record its invariants.
    RunKdv,
    /// Integrate the Peregrine system and record its invariants.
    RunPeregrine,
    /// Integrate the water-wave model and record mass and energy.
    RunWaterwave,
    /// Run all three models together at one (eps, mu) and write the error time series.
    Compare,
    /// Repeat `compare` over a decreasing list of mu and fit convergence rates.
    Sweep,
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Debug, Default, Clone, Args)]
pub struct Flags {
    /// JSON (`.json`) or `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Comma-separated, strictly decreasing (sweep only).
    #[arg(long = "mu-list", global = true, value_delimiter = ',')]
    pub mu_list: Option<Vec<f64>>,
    /// Horizontal grid points.
    #[arg(long = "N", global = true)]
    pub n: Option<usize>,
    /// Vertical collocation points.
    #[arg(long = "Nz", global = true)]
    pub nz: Option<usize>,
    /// Length of the periodic cell.
    #[arg(long = "L", global = true)]
    pub length: Option<f64>,
    /// Final time.
    #[arg(long = "T", global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true)]
    pub profile: Option<ProfileShape>,
    #[arg(long, global = true)]
    pub amplitude: Option<f64>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "csv|json")]
    pub format: Option<OutputFormat>,
}

impl Command {
    fn model(&self) -> Option<Model> {
        match self {
            Self::RunKdv => Some(Model::Kdv),
            Self::RunPeregrine => Some(Model::Peregrine),
            Self::RunWaterwave => Some(Model::Waterwave),
            Self::Compare => Some(Model::Compare),
            Self::Sweep => Some(Model::Sweep),
            Self::Selftest => None,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::RunKdv => "run-kdv",
            Self::RunPeregrine => "run-peregrine",
            Self::RunWaterwave => "run-waterwave",
            Self::Compare => "compare",
            Self::Sweep => "sweep",
            Self::Selftest => "selftest",
        }
    }
}

/// Builds the effective configuration for `command`.
pub fn resolve_config(command: &Command, flags: &Flags, out_dir_env: Option<&str>) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &flags.config {
        cfg.apply_file(path)?;
    }
    if let Some(dir) = out_dir_env.filter(|d| !d.is_empty()) {
        cfg.out = PathBuf::from(dir);
    }
    if let Some(m) = command.model() {
        cfg.model = m;
    }
    macro_rules! take {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = flags.$flag.clone() { cfg.$field = v; })*
        };
    }
    take!(mu => mu, eps => eps, mu_list => mu_list, n => n, nz => nz, length => length,
          horizon => horizon, dt => dt, profile => profile, amplitude => amplitude, out => out,
          workers => workers, seed => seed, format => format);
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let env = std::env::var("OUT_DIR").ok();
    let cfg = resolve_config(&cli.command, &cli.flags, env.as_deref())
        .with_context(|| format!("{}: invalid configuration", cli.command.name()))?;
    match cli.command {
        Command::RunKdv => run_kdv(&cfg).context("kdv"),
        Command::RunPeregrine => run_peregrine(&cfg).context("peregrine"),
        Command::RunWaterwave => run_waterwave(&cfg).context("waterwave"),
        Command::Compare => compare(&cfg).context("experiments"),
        Command::Sweep => sweep(&cfg).context("experiments"),
        Command::Selftest => selftest(&cfg),
    }
}

fn progress(msg: impl AsRef<str>) {
    eprintln!("[kdvmom] {}", msg.as_ref());
}

fn grid_and_surface(cfg: &RunConfig) -> Result<(std::sync::Arc<Grid1D>, ModelParams, RealField)> {
    let p = ModelParams::new(cfg.eps, cfg.mu)?;
    let grid = Grid1D::new(cfg.length, cfg.n)?;
    let surface = cfg.initial_profile().sample(&grid, &p)?;
    Ok((grid, p, surface))
}

fn write_profile(cfg: &RunConfig, stem: &str, names: &[&str], fields: &[&RealField]) -> Result<PathBuf> {
    let grid = fields[0].grid();
    let mut cols = vec!["x"];
    cols.extend_from_slice(names);
    let mut table = Table::new(&cols);
    for j in 0..grid.len() {
        let mut row = vec![grid.node(j)];
        row.extend(fields.iter().map(|f| f.values()[j]));
        table.push(row);
    }
    Ok(write_table(&cfg.out, stem, &table, cfg.format)?)
}

/// Calls `record` at t = 0 and after every `sample_interval`.
fn march<S>(
    cfg: &RunConfig,
    mut state: S,
    mut advance: impl FnMut(&S, f64) -> crate::Result<S>,
    mut record: impl FnMut(&S, f64) -> crate::Result<()>,
) -> Result<S> {
    let (steps, every) = cfg.experiment().schedule()?;
    record(&state, 0.0)?;
    for n in 1..=steps {
        let t = n as f64 * cfg.dt;
        state = advance(&state, t)?;
        if n % every == 0 || n == steps {
            record(&state, t)?;
        }
    }
    Ok(state)
}

fn run_kdv(cfg: &RunConfig) -> Result<()> {
    let (grid, p, eta0) = grid_and_surface(cfg)?;
    let stepper = KdvStepper::new(&grid, p, cfg.dt)?;
    let mut table = Table::new(&["t", "mass", "l2", "hamiltonian", "max_eta"]);
    progress(format!("run-kdv: eps={} mu={} N={} T={}", cfg.eps, cfg.mu, cfg.n, cfg.horizon));
    let last = march(
        cfg,
        KdVState::new(eta0),
        |s, t| {
            let mut next = stepper.advance(s)?;
            next.t = t;
            Ok(next)
        },
        |s, t| {
            let (m, l2, h) = kdv::conserved_integrals(&s.eta, &p)?;
            table.push(vec![t, m, l2, h, s.eta.max()]);
            Ok(())
        },
    )?;
    let path = write_table(&cfg.out, "kdv", &table, cfg.format)?;
    write_profile(cfg, "kdv_final", &["eta"], &[&last.eta])?;
    progress(format!("wrote {}", path.display()));
    Ok(())
}

fn run_peregrine(cfg: &RunConfig) -> Result<()> {
    let (_, p, xi0) = grid_and_surface(cfg)?;
    let u0 = kdv::v_kdv(&xi0, &p);
    let stepper = PeregrineStepper::new(p, cfg.dt)?;
    let mut table = Table::new(&["t", "mass", "momentum", "max_xi", "min_depth"]);
    progress(format!("run-peregrine: eps={} mu={} N={} T={}", cfg.eps, cfg.mu, cfg.n, cfg.horizon));
    let last = march(
        cfg,
        PeregrineState::new(xi0, u0),
        |s, t| {
            let mut next = stepper.advance(s)?;
            next.t = t;
            Ok(next)
        },
        |s, t| {
            let (m, q) = s.invariants(&p);
            table.push(vec![t, m, q, s.xi.max(), s.min_depth(&p)]);
            Ok(())
        },
    )?;
    let path = write_table(&cfg.out, "peregrine", &table, cfg.format)?;
    write_profile(cfg, "peregrine_final", &["xi", "u"], &[&last.xi, &last.u])?;
    progress(format!("wrote {}", path.display()));
    Ok(())
}

fn run_waterwave(cfg: &RunConfig) -> Result<()> {
    let exp = cfg.experiment();
    let p = exp.params()?;
    let grid = Grid1D::new(cfg.length, cfg.n)?;
    let solver = WaterWaveSolver::new(&grid, &p, &VerticalGrid::new(cfg.nz)?);
    let data = build_coupled_initial_data(&exp.profile, &solver)?;
    let mut table = Table::new(&["t", "mass", "energy", "max_zeta", "min_depth"]);
    progress(format!(
        "run-waterwave: eps={} mu={} N={} Nz={} T={}",
        cfg.eps, cfg.mu, cfg.n, cfg.nz, cfg.horizon
    ));
    let last = march(
        cfg,
        data.waterwave(),
        |s, t| {
            let mut next = solver.step(s, cfg.dt)?;
            next.t = t;
            Ok(next)
        },
        |s: &WaterWaveState, t| {
            table.push(vec![t, s.zeta.integral(), solver.energy(s)?, s.zeta.max(), s.min_depth(&p)]);
            Ok(())
        },
    )?;
    let path = write_table(&cfg.out, "waterwave", &table, cfg.format)?;
    write_profile(cfg, "waterwave_final", &["zeta", "phi_periodic"], &[&last.zeta, &last.phi_s])?;
    progress(format!("wrote {}", path.display()));
    Ok(())
}

pub fn timeseries_table(run: &RunResult) -> Table {
    let mut table = Table::new(&Sample::COLUMNS);
    for s in &run.samples {
        table.push(s.row().to_vec());
    }
    table
}

fn compare(cfg: &RunConfig) -> Result<()> {
    progress(format!(
        "compare: eps={} mu={} N={} Nz={} dt={} T={}",
        cfg.eps, cfg.mu, cfg.n, cfg.nz, cfg.dt, cfg.horizon
    ));
    let run = run_triple(&cfg.experiment())?;
    let path = write_table(&cfg.out, "timeseries", &timeseries_table(&run), cfg.format)?;
    progress(format!("wrote {}", path.display()));
    Ok(())
}

/// File stem of the per-point time series, e.g. `timeseries_mu0.04`.
pub fn point_stem(mu: f64) -> String {
    format!("timeseries_mu{mu}")
}

/// Contents of `rates.json`.
pub fn rates_json(cfg: &RunConfig, report: &SweepReport) -> Value {
    let mut families = Map::new();
    for f in &report.families {
        families.insert(
            f.name.clone(),
            json!({
                "reduction": f.reduction,
                "slope": f.fit.slope,
                "intercept": f.fit.intercept,
                "r2": f.fit.r2,
                "points": f.fit.points.iter().map(|(mu, v)| json!({"mu": mu, "value": v})).collect::<Vec<_>>(),
            }),
        );
    }
    json!({
        "schema_version": SCHEMA_VERSION,
        "config": cfg,
        "families": families,
    })
}

/// One row per sweep point: `mu, eps` and every family's reduced error.
pub fn sweep_table(report: &SweepReport) -> Table {
    let mut cols = vec!["mu".to_string(), "eps".to_string()];
    cols.extend(report.families.iter().map(|f| f.name.clone()));
    let mut table = Table::new(&cols);
    for (i, run) in report.runs.iter().enumerate() {
        let mut row = vec![run.mu, run.eps];
        row.extend(report.families.iter().map(|f| f.fit.points[i].1));
        table.push(row);
    }
    table
}

fn sweep(cfg: &RunConfig) -> Result<()> {
    progress(format!(
        "sweep: mu in {:?}, eps/mu={}, N={} Nz={} dt={} T={}, {} workers",
        cfg.mu_list, cfg.eps_ratio, cfg.n, cfg.nz, cfg.dt, cfg.horizon, cfg.workers
    ));
    let report = convergence_study(&cfg.sweep())?;
    for run in &report.runs {
        write_table(&cfg.out, &point_stem(run.mu), &timeseries_table(run), cfg.format)?;
    }
    write_table(&cfg.out, "sweep", &sweep_table(&report), cfg.format)?;
    write_json(&cfg.out.join("rates.json"), &rates_json(cfg, &report))?;
    for f in &report.families {
        progress(format!("{:<20} slope {:.3}  r2 {:.4}", f.name, f.fit.slope, f.fit.r2));
    }
    progress(format!("wrote {}", cfg.out.join("rates.json").display()));
    Ok(())
}

fn check(module: &str, what: &str, ok: bool, detail: String) -> Result<()> {
    if ok {
        progress(format!("selftest {module}: {what} ok ({detail})"));
        Ok(())
    } else {
        bail!("selftest {module}: {what} failed ({detail})")
    }
}

/// Small, fast checks of each module against closed-form answers.
fn selftest(cfg: &RunConfig) -> Result<()> {
    // spectral: derivative of a resolved trigonometric mode
    let grid = Grid1D::new(2.0 * std::f64::consts::PI, 32)?;
    let f = RealField::from_fn(&grid, |x| (3.0 * x).sin());
    let err = (&f.derivative(1)? - &RealField::from_fn(&grid, |x| 3.0 * (3.0 * x).cos())).norm_linf();
    check("spectral", "derivative", err < 1e-12, format!("err {err:e}"))?;

    // kdv: soliton transport
    let p = ModelParams::new(0.04, 0.04)?;
    let grid = Grid1D::new(80.0, 512)?;
    let sol = Soliton {
        amplitude: 1.0,
        center: 40.0,
    };
    let end = kdv::integrate(&KdVState::new(sol.profile(&grid, &p, 0.0)), 1e-3, 200, &p)?;
    let err = (&end.eta - &sol.profile(&grid, &p, 0.2)).norm_linf();
    check("kdv", "soliton transport", err < 1e-6, format!("err {err:e}"))?;

    // peregrine: invariants over a short run
    let xi = InitialProfile::default().sample(&grid, &p)?;
    let s0 = PeregrineState::new(xi.clone(), kdv::v_kdv(&xi, &p));
    let s1 = crate::peregrine::integrate(&s0, 0.01, 50, &p)?;
    let (a0, b0) = s0.invariants(&p);
    let (a1, b1) = s1.invariants(&p);
    let drift = ((a1 - a0) / a0).abs().max(((b1 - b0) / b0).abs());
    check("peregrine", "invariants", drift < 1e-10, format!("drift {drift:e}"))?;

    // waterwave: flat-strip Dirichlet-Neumann map of cos(kx)
    let grid = Grid1D::new(2.0 * std::f64::consts::PI, 32)?;
    let solver = WaterWaveSolver::new(&grid, &p, &VerticalGrid::new(16)?);
    let phi = RealField::from_fn(&grid, |x| (2.0 * x).cos());
    let g = solver.dirichlet_neumann(&RealField::zeros(&grid), &phi, 0.0)?;
    let q = 2.0 * p.mu().sqrt();
    let exact = phi.scale(q * q.tanh());
    let err = (&g - &exact).norm_linf();
    check("waterwave", "flat Dirichlet-Neumann map", err < 1e-9, format!("err {err:e}"))?;

    // experiments: rate fit of an exact power law, and one short coupled run
    let pts: Vec<_> = [0.08, 0.04, 0.02].iter().map(|&m: &f64| (m, 5.0 * m * m)).collect();
    let fit = fit_rate(&pts)?;
    check("experiments", "rate fit", (fit.slope - 2.0).abs() < 1e-12, format!("slope {}", fit.slope))?;
    let short = ExperimentConfig {
        n: 256,
        nz: 16,
        horizon: 0.1,
        sample_interval: 0.05,
        ..ExperimentConfig::default()
    };
    let run = run_triple(&short)?;
    let e = run.samples[0].e_momentum;
    check("experiments", "coupled run", e < 0.01, format!("E_momentum(0) {e:e}"))?;
    let _ = cfg;
    progress("selftest: all checks passed");
    Ok(())
}

/// Reads the body of a CSV written by this tool (comment lines removed).
pub fn read_csv_body(path: &Path) -> std::io::Result<String> {
    Ok(output::csv_body(&std::fs::read_to_string(path)?))
}
