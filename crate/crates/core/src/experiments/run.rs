use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kdv::{self, KdVState, KdvStepper};
use crate::params::ModelParams;
use crate::peregrine::{self, PeregrineState, PeregrineStepper};
use crate::spectral::{Grid1D, RealField};
use crate::waterwave::{
    averaged_velocity, momentum_density_exact, VerticalGrid, WaterWaveSolver, WaterWaveState,
};

use super::coupled::build_coupled_initial_data;
use super::profile::InitialProfile;

/// Largest field magnitude allowed near the cell boundary during a run.
pub const EDGE_LIMIT: f64 = 1e-8;
/// Fraction of the cell on each side treated as the boundary region.
pub const EDGE_FRACTION: f64 = 0.05;
/// Two states are simultaneous when their times agree to this tolerance.
pub const TIME_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub length: f64,
    pub n: usize,
    pub nz: usize,
    pub eps: f64,
    pub mu: f64,
    pub profile: InitialProfile,
    pub dt: f64,
    pub horizon: f64,
    pub sample_interval: f64,
    /// Sobolev index of the `H^s_mu` pair metric.
    pub hs_index: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            length: 80.0,
            n: 512,
            nz: VerticalGrid::DEFAULT_POINTS,
            eps: 0.04,
            mu: 0.04,
            profile: InitialProfile::default(),
            dt: 0.01,
            horizon: 5.0,
            sample_interval: 0.1,
            hs_index: 2.0,
        }
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.eps, self.mu)
    }

    /// `(total steps, steps between samples)`.
    pub fn schedule(&self) -> Result<(usize, usize)> {
        let ratio = |span: f64, what: &str| -> Result<usize> {
            if !(self.dt > 0.0 && span > 0.0) {
                return Err(Error::InvalidStep(format!("{what} and dt must be positive")));
            }
            let r = span / self.dt;
            let k = r.round();
            if (r - k).abs() > 1e-6 * r.max(1.0) || k < 1.0 {
                return Err(Error::InvalidStep(format!(
                    "{what} = {span} is not a multiple of dt = {}",
                    self.dt
                )));
            }
            Ok(k as usize)
        };
        Ok((
            ratio(self.horizon, "horizon")?,
            ratio(self.sample_interval, "sample interval")?,
        ))
    }
}

/// Errors between two `(surface, velocity)` pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairError {
    /// `max(|ds|_inf, |dv|_inf)`.
    pub linf: f64,
    /// `(|ds|_{H^s}^2 + |dv|_{H^s_mu}^2)^{1/2}`.
    pub hs_mu: f64,
}

pub fn pair_error(
    surface_a: &RealField,
    velocity_a: &RealField,
    surface_b: &RealField,
    velocity_b: &RealField,
    mu: f64,
    s: f64,
) -> PairError {
    let ds = surface_a - surface_b;
    let dv = velocity_a - velocity_b;
    PairError {
        linf: ds.norm_linf().max(dv.norm_linf()),
        hs_mu: (ds.norm_hs_mu(s, 0.0).powi(2) + dv.norm_hs_mu(s, mu).powi(2)).sqrt(),
    }
}

fn check_times(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > TIME_TOL {
        Err(Error::TimeMismatch(a, b))
    } else {
        Ok(())
    }
}

/// `|(eta, v_kdv) - (xi, u)|`.
pub fn pair_error_kdv(
    kdv_state: &KdVState,
    per: &PeregrineState,
    p: &ModelParams,
    s: f64,
) -> Result<PairError> {
    check_times(kdv_state.t, per.t)?;
    let v = kdv::v_kdv(&kdv_state.eta, p);
    Ok(pair_error(&kdv_state.eta, &v, &per.xi, &per.u, p.mu(), s))
}

/// `|(zeta, V) - (xi, u)|` with `V` the depth-averaged velocity.
pub fn pair_error_ww(
    ww: &WaterWaveState,
    per: &PeregrineState,
    solver: &WaterWaveSolver,
    s: f64,
) -> Result<PairError> {
    check_times(ww.t, per.t)?;
    let pf = solver.solve_potential(&ww.zeta, &ww.phi_s, ww.phi_slope)?;
    let v = averaged_velocity(&pf);
    Ok(pair_error(&ww.zeta, &v, &per.xi, &per.u, solver.params().mu(), s))
}

/// `|int phi_x dz - I(eta)|_inf`.
pub fn momentum_error(ww: &WaterWaveState, kdv_state: &KdVState, solver: &WaterWaveSolver) -> Result<f64> {
    check_times(ww.t, kdv_state.t)?;
    let pf = solver.solve_potential(&ww.zeta, &ww.phi_s, ww.phi_slope)?;
    let exact = momentum_density_exact(&pf);
    let approx = kdv::momentum_density_i(&kdv_state.eta, solver.params());
    Ok((&exact - &approx).norm_linf())
}

/// Every quantity recorded at one sample time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub e_momentum: f64,
    pub e_kdv_pair_linf: f64,
    pub e_ww_pair_linf: f64,
    pub e_kdv_pair_hsmu: f64,
    pub e_ww_pair_hsmu: f64,
    pub residual_r_linf: f64,
    pub residual_rr_linf: f64,
    pub proofbound_linf: f64,
    pub mass_kdv: f64,
    pub mass_peregrine: f64,
    pub mass_ww: f64,
}

impl Sample {
    pub const COLUMNS: [&'static str; 12] = [
        "t",
        "E_momentum",
        "E_kdv_pair_linf",
        "E_ww_pair_linf",
        "E_kdv_pair_hsmu",
        "E_ww_pair_hsmu",
        "residual_r_linf",
        "residual_R_linf",
        "proofbound_linf",
        "mass_kdv",
        "mass_peregrine",
        "mass_ww",
    ];

    pub fn row(&self) -> [f64; 12] {
        [
            self.t,
            self.e_momentum,
            self.e_kdv_pair_linf,
            self.e_ww_pair_linf,
            self.e_kdv_pair_hsmu,
            self.e_ww_pair_hsmu,
            self.residual_r_linf,
            self.residual_rr_linf,
            self.proofbound_linf,
            self.mass_kdv,
            self.mass_peregrine,
            self.mass_ww,
        ]
    }

    fn is_finite(&self) -> bool {
        self.row().iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub eps: f64,
    pub mu: f64,
    pub samples: Vec<Sample>,
}

impl RunResult {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// `sup_t E(t) / (1 + t)` of a column.
    pub fn sup_weighted(&self, column: impl Fn(&Sample) -> f64) -> f64 {
        self.samples
            .iter()
            .map(|s| column(s) / (1.0 + s.t))
            .fold(0.0, f64::max)
    }

    /// `sup_{t <= t_max} E(t)`.
    pub fn sup_until(&self, t_max: f64, column: impl Fn(&Sample) -> f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.t <= t_max + TIME_TOL)
            .map(column)
            .fold(0.0, f64::max)
    }

    /// Value at the last sample.
    pub fn last(&self, column: impl Fn(&Sample) -> f64) -> f64 {
        self.samples.last().map(column).unwrap_or(0.0)
    }
}

fn check_localized(what: &str, f: &RealField, t: f64) -> Result<()> {
    let width = ((EDGE_FRACTION * f.len() as f64).ceil() as usize).max(1);
    let edge = f.edge_magnitude(width);
    if edge > EDGE_LIMIT {
        return Err(Error::NotLocalized {
            what: format!("{what} at t = {t}"),
            edge,
            limit: EDGE_LIMIT,
        });
    }
    Ok(())
}

/// All three models stepped together; used by [`run_triple`].
pub struct TripleRun {
    pub params: ModelParams,
    pub solver: WaterWaveSolver,
    pub kdv: KdVState,
    pub peregrine: PeregrineState,
    pub waterwave: WaterWaveState,
    hs_index: f64,
}

impl TripleRun {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let params = cfg.params()?;
        let grid = Grid1D::new(cfg.length, cfg.n)?;
        let vg = VerticalGrid::new(cfg.nz)?;
        let solver = WaterWaveSolver::new(&grid, &params, &vg);
        let data = build_coupled_initial_data(&cfg.profile, &solver)?;
        Ok(Self {
            params,
            kdv: data.kdv(),
            peregrine: data.peregrine(),
            waterwave: data.waterwave(),
            solver,
            hs_index: cfg.hs_index,
        })
    }

    pub fn sample(&self) -> Result<Sample> {
        let p = &self.params;
        let (kdv_state, per, ww) = (&self.kdv, &self.peregrine, &self.waterwave);
        check_times(kdv_state.t, per.t)?;
        check_times(kdv_state.t, ww.t)?;
        let t = kdv_state.t;

        let pf = self.solver.solve_potential(&ww.zeta, &ww.phi_s, ww.phi_slope)?;
        let exact = momentum_density_exact(&pf);
        let vbar = averaged_velocity(&pf);
        let v = kdv::v_kdv(&kdv_state.eta, p);
        let e_momentum = (&exact - &kdv::momentum_density_i(&kdv_state.eta, p)).norm_linf();
        let kdv_pair = pair_error(&kdv_state.eta, &v, &per.xi, &per.u, p.mu(), self.hs_index);
        let ww_pair = pair_error(&ww.zeta, &vbar, &per.xi, &per.u, p.mu(), self.hs_index);
        let (r, rr) = peregrine::kdv_pair_residuals(&kdv_state.eta, p);

        for (what, f) in [
            ("kdv surface", &kdv_state.eta),
            ("kdv velocity", &v),
            ("peregrine surface", &per.xi),
            ("peregrine velocity", &per.u),
            ("water-wave surface", &ww.zeta),
            ("water-wave averaged velocity", &vbar),
        ] {
            check_localized(what, f, t)?;
        }

        let sample = Sample {
            t,
            e_momentum,
            e_kdv_pair_linf: kdv_pair.linf,
            e_ww_pair_linf: ww_pair.linf,
            e_kdv_pair_hsmu: kdv_pair.hs_mu,
            e_ww_pair_hsmu: ww_pair.hs_mu,
            residual_r_linf: r.norm_linf(),
            residual_rr_linf: rr.norm_linf(),
            proofbound_linf: kdv::proof_bound_field(&kdv_state.eta, p).norm_linf(),
            mass_kdv: kdv_state.eta.integral(),
            mass_peregrine: per.xi.integral(),
            mass_ww: ww.zeta.integral(),
        };
        if !sample.is_finite() {
            return Err(Error::NonFinite("run sample"));
        }
        Ok(sample)
    }
}

/// Steps KdV, Peregrine and the water-wave model from coupled initial data
/// to the horizon, recording a [`Sample`] every `sample_interval`.
pub fn run_triple(cfg: &ExperimentConfig) -> Result<RunResult> {
    let (steps, every) = cfg.schedule()?;
    let mut run = TripleRun::new(cfg)?;
    let grid = run.kdv.eta.grid().clone();
    let kdv_stepper = KdvStepper::new(&grid, run.params, cfg.dt)?;
    let per_stepper = PeregrineStepper::new(run.params, cfg.dt)?;

    let mut samples = vec![run.sample()?];
    for n in 1..=steps {
        let t = n as f64 * cfg.dt;
        run.kdv = kdv_stepper.advance(&run.kdv)?;
        run.peregrine = per_stepper.advance(&run.peregrine)?;
        run.waterwave = run.solver.step(&run.waterwave, cfg.dt)?;
        run.kdv.t = t;
        run.peregrine.t = t;
        run.waterwave.t = t;
        if n % every == 0 || n == steps {
            samples.push(run.sample()?);
        }
    }
    Ok(RunResult {
        eps: cfg.eps,
        mu: cfg.mu,
        samples,
    })
}
