//! Water-wave reference model in Zakharov–Craig–Sulem form
//!
//! ```text
//! zeta_t = G(eps zeta) Phi / mu
//! Phi_t  = -zeta - (eps/2) Phi_x^2
//!          + (eps/mu) [G Phi + eps mu zeta_x Phi_x]^2 / (2 (1 + eps^2 mu zeta_x^2))
//! ```
//!
//! with `G(eps zeta) Phi = -eps mu zeta_x phi_x + phi_z` at the surface. The
//! potential comes from a full Laplace solve in sigma coordinates, which
//! also gives the depth-integrated horizontal velocity.
//!
//! The surface potential is stored as `Phi = slope * x + phi_s` with `phi_s`
//! periodic. A localized wave carrying net momentum has a potential that
//! rises by `int Phi_x` across the cell; the linear part carries that rise
//! while the velocity field itself stays periodic. `slope` is invariant
//! under the evolution because `Phi_t` is periodic.

mod elliptic;
mod vertical;

use std::sync::Arc;

use rustfft::num_complex::Complex64;

pub use elliptic::{LaplaceSolver, SolveStats, RESIDUAL_LIMIT};
pub use vertical::VerticalGrid;

use crate::error::{Error, Result};
use crate::kdv::BLOWUP_GUARD;
use crate::params::ModelParams;
use crate::spectral::{Grid1D, RealField};

#[derive(Clone, Debug, PartialEq)]
pub struct WaterWaveState {
    pub zeta: RealField,
    /// Periodic part of the surface potential.
    pub phi_s: RealField,
    /// Mean gradient of the surface potential.
    pub phi_slope: f64,
    pub t: f64,
}

impl WaterWaveState {
    pub fn new(zeta: RealField, phi_s: RealField, phi_slope: f64) -> Self {
        Self {
            zeta,
            phi_s,
            phi_slope,
            t: 0.0,
        }
    }

    pub fn rest(grid: &Arc<Grid1D>) -> Self {
        Self::new(RealField::zeros(grid), RealField::zeros(grid), 0.0)
    }

    pub fn min_depth(&self, p: &ModelParams) -> f64 {
        1.0 + p.eps() * self.zeta.min()
    }

    /// Full surface velocity `Phi_x`.
    pub fn phi_x(&self) -> RealField {
        let slope = self.phi_slope;
        self.phi_s.d(1).map(|v| v + slope)
    }
}

/// Velocity potential on the `x x sigma` tensor grid together with the
/// surface it was solved for.
#[derive(Clone, Debug)]
pub struct PotentialField {
    zeta: RealField,
    slope: f64,
    /// Level-major `N_z x N` samples of the periodic part of `phi`.
    values: Vec<f64>,
    psi_x: Vec<f64>,
    psi_s: Vec<f64>,
    params: ModelParams,
    vg: VerticalGrid,
    stats: SolveStats,
}

impl PotentialField {
    pub fn zeta(&self) -> &RealField {
        &self.zeta
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vertical(&self) -> &VerticalGrid {
        &self.vg
    }

    pub fn stats(&self) -> SolveStats {
        self.stats
    }

    /// `phi(x_j, sigma_i)` including the linear part.
    pub fn value(&self, level: usize, j: usize) -> f64 {
        let n = self.zeta.len();
        self.values[level * n + j] + self.slope * self.zeta.grid().node(j)
    }

    fn depth(&self, j: usize) -> f64 {
        1.0 + self.params.eps() * self.zeta.values()[j]
    }

    /// `(phi_x, phi_z)` in physical coordinates at every tensor node,
    /// level-major.
    pub fn velocity(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.zeta.len();
        let eps = self.params.eps();
        let zx = self.zeta.d(1);
        let mut u = Vec::with_capacity(self.values.len());
        let mut w = Vec::with_capacity(self.values.len());
        for (i, &sigma) in self.vg.nodes().iter().enumerate() {
            for j in 0..n {
                let q = i * n + j;
                let h = self.depth(j);
                let hx = eps * zx.values()[j];
                u.push(self.slope + self.psi_x[q] - sigma * hx / h * self.psi_s[q]);
                w.push(self.psi_s[q] / h);
            }
        }
        (u, w)
    }

    /// Surface traces `(phi_x, phi_z)` at `sigma = 1`.
    pub fn surface_velocity(&self) -> (RealField, RealField) {
        let n = self.zeta.len();
        let top = self.vg.surface();
        let (u, w) = self.velocity();
        let grid = self.zeta.grid();
        (
            RealField::from_vec(grid.clone(), u[top * n..].to_vec()),
            RealField::from_vec(grid.clone(), w[top * n..].to_vec()),
        )
    }

    /// `(1/2) int int (mu phi_x^2 + phi_z^2) dz dx / mu`.
    pub fn kinetic_energy(&self) -> f64 {
        let n = self.zeta.len();
        let mu = self.params.mu();
        let (u, w) = self.velocity();
        let dx = self.zeta.grid().dx();
        let mut total = 0.0;
        for j in 0..n {
            let column: Vec<f64> = (0..self.vg.len())
                .map(|i| {
                    let q = i * n + j;
                    mu * u[q] * u[q] + w[q] * w[q]
                })
                .collect();
            total += self.depth(j) * self.vg.integrate(&column);
        }
        0.5 * dx * total / mu
    }
}

/// Elliptic workspace plus the model right-hand side. One instance per run;
/// not for concurrent use by several steppers.
pub struct WaterWaveSolver {
    laplace: LaplaceSolver,
}

impl WaterWaveSolver {
    pub fn new(grid: &Arc<Grid1D>, p: &ModelParams, vg: &VerticalGrid) -> Self {
        Self {
            laplace: LaplaceSolver::new(grid, vg, p),
        }
    }

    pub fn params(&self) -> &ModelParams {
        self.laplace.params()
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        self.laplace.grid()
    }

    pub fn vertical(&self) -> &VerticalGrid {
        self.laplace.vertical()
    }

    pub fn solve_potential(
        &self,
        zeta: &RealField,
        phi_s: &RealField,
        phi_slope: f64,
    ) -> Result<PotentialField> {
        let (values, stats) = self.laplace.solve(zeta, phi_s)?;
        let n = zeta.len();
        let grid = zeta.grid();
        let psi_x: Vec<f64> = values
            .chunks(n)
            .flat_map(|lvl| RealField::from_vec(grid.clone(), lvl.to_vec()).d(1).into_values())
            .collect();
        let psi_s = self.laplace.sigma_derivative(&values);
        Ok(PotentialField {
            zeta: zeta.clone(),
            slope: phi_slope,
            values,
            psi_x,
            psi_s,
            params: *self.params(),
            vg: self.vertical().clone(),
            stats,
        })
    }

    /// Residual of a potential against the discrete Laplace problem.
    pub fn potential_residual(&self, pf: &PotentialField, phi_s: &RealField) -> f64 {
        self.laplace.residual(&pf.zeta, phi_s, &pf.values)
    }

    pub fn dirichlet_neumann(
        &self,
        zeta: &RealField,
        phi_s: &RealField,
        phi_slope: f64,
    ) -> Result<RealField> {
        let pf = self.solve_potential(zeta, phi_s, phi_slope)?;
        Ok(dno_from_potential(&pf))
    }

    /// `(zeta_t, Phi_t)`; `Phi_t` is periodic and updates `phi_s` only.
    pub fn rhs(&self, state: &WaterWaveState) -> Result<(RealField, RealField)> {
        let p = self.params();
        let (eps, mu) = (p.eps(), p.mu());
        let pf = self.solve_potential(&state.zeta, &state.phi_s, state.phi_slope)?;
        let g = dno_from_potential(&pf);
        let zx = state.zeta.d(1);
        let phix = state.phi_x();
        let zeta_t = g.scale(1.0 / mu).dealias();
        let vals = (0..g.len())
            .map(|j| {
                let (gj, zxj, pxj) = (g.values()[j], zx.values()[j], phix.values()[j]);
                let num = gj + eps * mu * zxj * pxj;
                -state.zeta.values()[j] - 0.5 * eps * pxj * pxj
                    + eps / mu * num * num / (2.0 * (1.0 + eps * eps * mu * zxj * zxj))
            })
            .collect();
        let phi_t = RealField::from_vec(g.grid().clone(), vals).dealias();
        Ok((zeta_t, phi_t))
    }

    /// Classical RK4 step; one elliptic solve per stage.
    pub fn step(&self, s: &WaterWaveState, dt: f64) -> Result<WaterWaveState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(format!("dt = {dt} must be positive")));
        }
        let shifted = |k: &(RealField, RealField), h: f64| WaterWaveState {
            zeta: s.zeta.axpy(h, &k.0),
            phi_s: s.phi_s.axpy(h, &k.1),
            phi_slope: s.phi_slope,
            t: s.t + h,
        };
        let k1 = self.rhs(s)?;
        let k2 = self.rhs(&shifted(&k1, 0.5 * dt))?;
        let k3 = self.rhs(&shifted(&k2, 0.5 * dt))?;
        let k4 = self.rhs(&shifted(&k3, dt))?;
        let combine = |y: &RealField, a: &RealField, b: &RealField, c: &RealField, d: &RealField| {
            let vals = (0..y.len())
                .map(|j| {
                    y.values()[j]
                        + dt / 6.0
                            * (a.values()[j]
                                + 2.0 * (b.values()[j] + c.values()[j])
                                + d.values()[j])
                })
                .collect();
            RealField::from_vec(y.grid().clone(), vals)
        };
        let next = WaterWaveState {
            zeta: combine(&s.zeta, &k1.0, &k2.0, &k3.0, &k4.0),
            phi_s: combine(&s.phi_s, &k1.1, &k2.1, &k3.1, &k4.1),
            phi_slope: s.phi_slope,
            t: s.t + dt,
        };
        let norm = next.zeta.norm_linf();
        if !(next.zeta.is_finite() && next.phi_s.is_finite()) || norm > BLOWUP_GUARD {
            return Err(Error::BlowUp {
                model: "waterwave",
                time: next.t,
                norm,
            });
        }
        let min_depth = next.min_depth(self.params());
        if !(min_depth > 0.0) {
            return Err(Error::DepthViolation {
                model: "waterwave",
                min_depth,
            });
        }
        Ok(next)
    }

    pub fn integrate(&self, state: &WaterWaveState, dt: f64, steps: usize) -> Result<WaterWaveState> {
        let t0 = state.t;
        let mut s = state.clone();
        for n in 1..=steps {
            s = self.step(&s, dt)?;
            s.t = t0 + n as f64 * dt;
        }
        Ok(s)
    }

    /// `(1/2) int zeta^2 + (1/(2 mu)) int int (mu phi_x^2 + phi_z^2)`.
    pub fn energy(&self, state: &WaterWaveState) -> Result<f64> {
        let pf = self.solve_potential(&state.zeta, &state.phi_s, state.phi_slope)?;
        Ok(0.5 * state.zeta.map(|z| z * z).integral() + pf.kinetic_energy())
    }

    /// Finds the surface potential whose depth-averaged velocity equals
    /// `target`. The correction uses the flat-strip ratio
    /// `tanh(sqrt(mu) k) / (sqrt(mu) k)` between `Phi_x` and the averaged
    /// velocity, so the iteration contracts at a rate of order `eps`.
    /// Returns `(phi_s, phi_slope)`.
    pub fn invert_averaged_velocity(
        &self,
        zeta: &RealField,
        target: &RealField,
    ) -> Result<(RealField, f64)> {
        const MAX_ITERS: usize = 200;
        let grid = zeta.grid().clone();
        let sqrt_mu = self.params().mu().sqrt();
        let inverse_ratio = |f: &RealField| {
            f.apply_symbol(|i| {
                let q = sqrt_mu * grid.wavenumbers()[i].abs();
                let r = if q == 0.0 { 1.0 } else { q / q.tanh() };
                Complex64::new(r, 0.0)
            })
        };
        let split = |phix: &RealField| -> Result<(RealField, f64)> {
            let m = phix.mean();
            Ok((phix.map(|v| v - m).antiderivative()?, m))
        };
        // phi_x has no Nyquist mode, so the corrections cannot act on it
        let nyquist = grid.nyquist_slot();
        let reachable = |f: &RealField| f.apply_symbol(|i| Complex64::new(if i == nyquist { 0.0 } else { 1.0 }, 0.0));
        let tol = 1e-13 * target.norm_linf().max(1.0);
        let mut phix = inverse_ratio(target);
        let mut last = f64::INFINITY;
        for _ in 0..MAX_ITERS {
            let (phi_s, m) = split(&phix)?;
            let pf = self.solve_potential(zeta, &phi_s, m)?;
            let mismatch = reachable(&(target - &averaged_velocity(&pf)));
            let err = mismatch.norm_linf();
            if err <= tol {
                return Ok((phi_s, m));
            }
            if err > 0.99 * last && err < 1e3 * tol {
                // stalled at round-off
                return Ok((phi_s, m));
            }
            last = err;
            phix = &phix + &inverse_ratio(&mismatch);
        }
        Err(Error::SolverDiverged {
            iterations: MAX_ITERS,
            residual: last,
        })
    }
}

/// `-eps mu zeta_x phi_x + phi_z` at the surface.
pub fn dno_from_potential(pf: &PotentialField) -> RealField {
    let (eps, mu) = (pf.params.eps(), pf.params.mu());
    let (u, w) = pf.surface_velocity();
    let zx = pf.zeta.d(1);
    let vals = (0..u.len())
        .map(|j| -eps * mu * zx.values()[j] * u.values()[j] + w.values()[j])
        .collect();
    RealField::from_vec(pf.zeta.grid().clone(), vals)
}

/// `int_{-1}^{eps zeta} phi_x dz` with the true horizontal derivative.
pub fn momentum_density_exact(pf: &PotentialField) -> RealField {
    let n = pf.zeta.len();
    let (u, _) = pf.velocity();
    let vals = (0..n)
        .map(|j| {
            let column: Vec<f64> = (0..pf.vg.len()).map(|i| u[i * n + j]).collect();
            pf.depth(j) * pf.vg.integrate(&column)
        })
        .collect();
    RealField::from_vec(pf.zeta.grid().clone(), vals)
}

/// Depth-averaged horizontal velocity.
pub fn averaged_velocity(pf: &PotentialField) -> RealField {
    let q = momentum_density_exact(pf);
    let vals = (0..q.len()).map(|j| q.values()[j] / pf.depth(j)).collect();
    RealField::from_vec(q.grid().clone(), vals)
}

pub fn solve_potential(
    zeta: &RealField,
    phi_s: &RealField,
    p: &ModelParams,
    vg: &VerticalGrid,
) -> Result<PotentialField> {
    WaterWaveSolver::new(zeta.grid(), p, vg).solve_potential(zeta, phi_s, 0.0)
}

pub fn dirichlet_neumann(
    zeta: &RealField,
    phi_s: &RealField,
    p: &ModelParams,
    vg: &VerticalGrid,
) -> Result<RealField> {
    WaterWaveSolver::new(zeta.grid(), p, vg).dirichlet_neumann(zeta, phi_s, 0.0)
}

pub fn zcs_rhs(
    state: &WaterWaveState,
    p: &ModelParams,
    vg: &VerticalGrid,
) -> Result<(RealField, RealField)> {
    WaterWaveSolver::new(state.zeta.grid(), p, vg).rhs(state)
}

pub fn step(
    state: &WaterWaveState,
    dt: f64,
    p: &ModelParams,
    vg: &VerticalGrid,
) -> Result<WaterWaveState> {
    WaterWaveSolver::new(state.zeta.grid(), p, vg).step(state, dt)
}
