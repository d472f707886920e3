//! KdV equation `eta_t + eta_x + (3/2) eps eta eta_x + (1/6) mu eta_xxx = 0`
//! on a periodic cell, and the diagnostics derived from it.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::spectral::{Grid1D, RealField};

/// Largest `|eta|` accepted before a run is declared blown up.
pub const BLOWUP_GUARD: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct KdVState {
    pub eta: RealField,
    pub t: f64,
}

impl KdVState {
    pub fn new(eta: RealField) -> Self {
        Self { eta, t: 0.0 }
    }
}

/// Solitary wave `A sech^2(k (x - x0 - c t))` with `c = 1 + eps A / 2` and
/// `k = sqrt(3 eps A / (4 mu))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Soliton {
    pub amplitude: f64,
    pub center: f64,
}

impl Soliton {
    pub fn speed(&self, p: &ModelParams) -> f64 {
        1.0 + 0.5 * p.eps() * self.amplitude
    }

    pub fn wavenumber(&self, p: &ModelParams) -> f64 {
        (3.0 * p.eps() * self.amplitude / (4.0 * p.mu())).sqrt()
    }

    /// Profile at time `t`, using the nearest periodic image of the crest.
    pub fn profile(&self, grid: &Arc<Grid1D>, p: &ModelParams, t: f64) -> RealField {
        let l = grid.length();
        let crest = self.center + self.speed(p) * t;
        let k = self.wavenumber(p);
        RealField::from_fn(grid, |x| {
            let d = (x - crest).rem_euclid(l);
            let d = if d >= 0.5 * l { d - l } else { d };
            self.amplitude / (k * d).cosh().powi(2)
        })
    }
}

/// Spectrum of the flux `eta + (3/4) eps eta^2 + (1/6) mu eta_xx` with the
/// quadratic term dealiased.
fn flux_spectrum(eta: &RealField, p: &ModelParams) -> Vec<Complex64> {
    let grid = eta.grid();
    let mut hat = eta.spectrum();
    let sq = eta.product_dealiased(eta).spectrum();
    for (i, c) in hat.iter_mut().enumerate() {
        let k = grid.wavenumbers()[i];
        *c = *c * (1.0 - p.mu() / 6.0 * k * k) + sq[i] * (0.75 * p.eps());
    }
    hat
}

/// `eta_t` as a function of `eta`: minus the x-derivative of the flux.
pub fn kdv_rhs(eta: &RealField, p: &ModelParams) -> RealField {
    let grid = eta.grid();
    let mut hat = flux_spectrum(eta, p);
    for (i, c) in hat.iter_mut().enumerate() {
        *c *= -grid.derivative_symbol(i, 1);
    }
    RealField::from_spectrum(grid, hat)
}

/// Linearization of [`kdv_rhs`] at `eta` applied to `w`:
/// `-(w + (3/2) eps eta w + (1/6) mu w_xx)_x`.
pub fn kdv_rhs_linearized(eta: &RealField, w: &RealField, p: &ModelParams) -> RealField {
    let grid = eta.grid();
    let prod = eta.product_dealiased(w).spectrum();
    let mut hat = w.spectrum();
    for (i, c) in hat.iter_mut().enumerate() {
        let k = grid.wavenumbers()[i];
        let flux = *c * (1.0 - p.mu() / 6.0 * k * k) + prod[i] * (1.5 * p.eps());
        *c = -grid.derivative_symbol(i, 1) * flux;
    }
    RealField::from_spectrum(grid, hat)
}

/// `eta_t` and `eta_tt`, both obtained by substituting the equation.
pub fn time_derivatives(eta: &RealField, p: &ModelParams) -> (RealField, RealField) {
    let eta_t = kdv_rhs(eta, p);
    let eta_tt = kdv_rhs_linearized(eta, &eta_t, p);
    (eta_t, eta_tt)
}

/// `eta_xt` via the x-derivative of the evolution equation.
pub fn eta_xt(eta: &RealField, p: &ModelParams) -> RealField {
    kdv_rhs(eta, p).d(1)
}

/// `eta_xx + eta_xt`, the quantity bounded by `C mu` in the momentum proof.
pub fn proof_bound_field(eta: &RealField, p: &ModelParams) -> RealField {
    &eta.d(2) + &eta_xt(eta, p)
}

/// `(int eta, int eta^2, int (mu/(3 eps)) eta_x^2 - eta^3)`.
pub fn conserved_integrals(eta: &RealField, p: &ModelParams) -> Result<(f64, f64, f64)> {
    if !(p.eps() > 0.0) {
        return Err(Error::InvalidParams(
            "third KdV invariant needs eps > 0".into(),
        ));
    }
    let eta_x = eta.d(1);
    let c = p.mu() / (3.0 * p.eps());
    let third = eta_x.zip_map(eta, |dx, e| c * dx * dx - e * e * e);
    Ok((eta.integral(), eta.map(|e| e * e).integral(), third.integral()))
}

/// Mass flux `eta + (3/4) eps eta^2 + (1/6) mu eta_xx` (pointwise products).
pub fn mass_flux(eta: &RealField, p: &ModelParams) -> RealField {
    let eta_xx = eta.d(2);
    let (eps, mu) = (p.eps(), p.mu());
    eta.zip_map(&eta_xx, |e, exx| e + 0.75 * eps * e * e + mu / 6.0 * exx)
}

/// KdV momentum density; the same expression as the mass flux.
pub fn momentum_density_i(eta: &RealField, p: &ModelParams) -> RealField {
    mass_flux(eta, p)
}

/// Velocity `eta - (1/4) eps eta^2 - (1/6) mu eta_xt` consistent with the
/// Peregrine system.
pub fn v_kdv(eta: &RealField, p: &ModelParams) -> RealField {
    let ext = eta_xt(eta, p);
    let (eps, mu) = (p.eps(), p.mu());
    eta.zip_map(&ext, |e, x| e - 0.25 * eps * e * e - mu / 6.0 * x)
}

/// Time derivative of [`v_kdv`] from `eta`, `eta_t` and `eta_tt`.
pub fn v_kdv_t(eta: &RealField, eta_t: &RealField, eta_tt: &RealField, p: &ModelParams) -> RealField {
    let ext_t = eta_tt.d(1);
    let (eps, mu) = (p.eps(), p.mu());
    let grid = eta.grid();
    let vals = (0..eta.len())
        .map(|j| {
            let (e, et) = (eta.values()[j], eta_t.values()[j]);
            et - 0.5 * eps * e * et - mu / 6.0 * ext_t.values()[j]
        })
        .collect();
    RealField::from_vec(grid.clone(), vals)
}

/// `0.5 dx / (1 + eps max|eta0|)`.
pub fn default_dt(eta0: &RealField, p: &ModelParams) -> f64 {
    0.5 * eta0.grid().dx() / (1.0 + p.eps() * eta0.norm_linf())
}

/// Integrating-factor RK4 for KdV: `eta_x + (1/6) mu eta_xxx` is propagated
/// exactly in Fourier space; the dealiased quadratic term goes through RK4.
pub struct KdvStepper {
    grid: Arc<Grid1D>,
    params: ModelParams,
    dt: f64,
    full: Vec<Complex64>,
    half: Vec<Complex64>,
}

impl KdvStepper {
    pub fn new(grid: &Arc<Grid1D>, params: ModelParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(format!("dt = {dt} must be positive")));
        }
        if dt > grid.dx() {
            return Err(Error::InvalidStep(format!(
                "dt = {dt} exceeds the grid spacing {}",
                grid.dx()
            )));
        }
        let exp = |tau: f64| -> Vec<Complex64> {
            (0..grid.len())
                .map(|i| {
                    // eta_t = L eta with L = -d/dx - (mu/6) d^3/dx^3
                    let l = -grid.derivative_symbol(i, 1)
                        - grid.derivative_symbol(i, 3) * (params.mu() / 6.0);
                    (l * tau).exp()
                })
                .collect()
        };
        Ok(Self {
            grid: grid.clone(),
            params,
            dt,
            full: exp(dt),
            half: exp(0.5 * dt),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn nonlinear(&self, hat: &[Complex64]) -> Vec<Complex64> {
        let eta = RealField::from_spectrum(&self.grid, hat.to_vec());
        let mut sq = eta.product_dealiased(&eta).spectrum();
        let coef = -0.75 * self.params.eps();
        for (i, c) in sq.iter_mut().enumerate() {
            *c *= self.grid.derivative_symbol(i, 1) * coef;
        }
        sq
    }

    pub fn advance(&self, state: &KdVState) -> Result<KdVState> {
        let dt = self.dt;
        let u = state.eta.spectrum();
        let (e, e2) = (&self.full, &self.half);
        let n = u.len();

        let k1 = self.nonlinear(&u);
        let a: Vec<_> = (0..n).map(|i| e2[i] * (u[i] + 0.5 * dt * k1[i])).collect();
        let k2 = self.nonlinear(&a);
        let b: Vec<_> = (0..n).map(|i| e2[i] * u[i] + 0.5 * dt * k2[i]).collect();
        let k3 = self.nonlinear(&b);
        let c: Vec<_> = (0..n).map(|i| e[i] * u[i] + dt * e2[i] * k3[i]).collect();
        let k4 = self.nonlinear(&c);
        let next: Vec<_> = (0..n)
            .map(|i| {
                e[i] * u[i]
                    + dt / 6.0 * (e[i] * k1[i] + 2.0 * e2[i] * (k2[i] + k3[i]) + k4[i])
            })
            .collect();

        let eta = RealField::from_spectrum(&self.grid, next);
        let t = state.t + dt;
        let norm = eta.norm_linf();
        if !eta.is_finite() || norm > BLOWUP_GUARD {
            return Err(Error::BlowUp {
                model: "kdv",
                time: t,
                norm,
            });
        }
        Ok(KdVState { eta, t })
    }
}

/// One integrating-factor RK4 step.
pub fn step(state: &KdVState, dt: f64, p: &ModelParams) -> Result<KdVState> {
    KdvStepper::new(state.eta.grid(), *p, dt)?.advance(state)
}

/// Advances `steps` times with a fixed `dt`; time is `t0 + n dt`.
pub fn integrate(state: &KdVState, dt: f64, steps: usize, p: &ModelParams) -> Result<KdVState> {
    let stepper = KdvStepper::new(state.eta.grid(), *p, dt)?;
    let t0 = state.t;
    let mut s = state.clone();
    for n in 1..=steps {
        s = stepper.advance(&s)?;
        s.t = t0 + n as f64 * dt;
    }
    Ok(s)
}
