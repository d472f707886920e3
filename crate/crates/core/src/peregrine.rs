//! Peregrine system
//!
//! ```text
//! xi_t + [(1 + eps xi) u]_x = 0
//! u_t + xi_x + eps u u_x = (mu/3) u_xxt
//! ```
//!
//! The operator `(1 - mu/3 d_xx)` is inverted with its Fourier symbol
//! `1 + mu k^2 / 3`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kdv;
use crate::params::ModelParams;
use crate::spectral::{Grid1D, RealField};

#[derive(Clone, Debug, PartialEq)]
pub struct PeregrineState {
    pub xi: RealField,
    pub u: RealField,
    pub t: f64,
}

impl PeregrineState {
    pub fn new(xi: RealField, u: RealField) -> Self {
        Self { xi, u, t: 0.0 }
    }

    pub fn min_depth(&self, p: &ModelParams) -> f64 {
        1.0 + p.eps() * self.xi.min()
    }

    fn check_depth(&self, p: &ModelParams) -> Result<()> {
        let min_depth = self.min_depth(p);
        if min_depth > 0.0 {
            Ok(())
        } else {
            Err(Error::DepthViolation {
                model: "peregrine",
                min_depth,
            })
        }
    }

    /// `(int xi, int (u - mu/3 u_xx))`.
    pub fn invariants(&self, p: &ModelParams) -> (f64, f64) {
        let uxx = self.u.d(2);
        (self.xi.integral(), self.u.axpy(-p.mu() / 3.0, &uxx).integral())
    }
}

/// `d/dx (a + eps * dealias(b c) * scale)`, computed in one transform pass.
fn flux_derivative(a: &RealField, b: &RealField, c: &RealField, coef: f64) -> RealField {
    let grid = a.grid();
    let prod = b.product_dealiased(c).spectrum();
    let mut hat = a.spectrum();
    for (i, h) in hat.iter_mut().enumerate() {
        *h = grid.derivative_symbol(i, 1) * (*h + prod[i] * coef);
    }
    RealField::from_spectrum(grid, hat)
}

fn elliptic_inverse(f: &RealField, mu: f64) -> RealField {
    let grid = f.grid().clone();
    f.apply_symbol(|i| {
        let k = grid.wavenumbers()[i];
        Complex64::new(1.0 / (1.0 + mu * k * k / 3.0), 0.0)
    })
}

/// `(xi_t, u_t)`.
pub fn peregrine_rhs(state: &PeregrineState, p: &ModelParams) -> Result<(RealField, RealField)> {
    state.check_depth(p)?;
    let eps = p.eps();
    let xi_t = -&flux_derivative(&state.u, &state.xi, &state.u, eps);
    let forcing = -&flux_derivative(&state.xi, &state.u, &state.u, 0.5 * eps);
    Ok((xi_t, elliptic_inverse(&forcing, p.mu())))
}

/// `(xi_t, u_t, u_xxt)` for a Peregrine state.
pub fn time_derivatives(
    state: &PeregrineState,
    p: &ModelParams,
) -> Result<(RealField, RealField, RealField)> {
    let (xi_t, u_t) = peregrine_rhs(state, p)?;
    let u_xxt = u_t.d(2);
    Ok((xi_t, u_t, u_xxt))
}

/// Raw residuals of the Peregrine operators on an arbitrary pair:
///
/// ```text
/// r = xi_t + [(1 + eps xi) v]_x
/// R = v_t - mu/3 v_xxt + xi_x + eps v v_x
/// ```
///
/// Products are dealiased the same way as in [`peregrine_rhs`], so exact
/// solver states give zero residual to round-off.
pub fn consistency_residuals(
    xi: &RealField,
    v: &RealField,
    xi_t: &RealField,
    v_t: &RealField,
    v_xxt: &RealField,
    p: &ModelParams,
) -> (RealField, RealField) {
    let eps = p.eps();
    let r = xi_t + &flux_derivative(v, xi, v, eps);
    let big_r = &v_t.axpy(-p.mu() / 3.0, v_xxt) + &flux_derivative(xi, v, v, 0.5 * eps);
    (r, big_r)
}

/// Residuals of the pair `(eta, v_kdv(eta))` with every time derivative
/// obtained by substituting the KdV equation.
pub fn kdv_pair_residuals(eta: &RealField, p: &ModelParams) -> (RealField, RealField) {
    let (eta_t, eta_tt) = kdv::time_derivatives(eta, p);
    let v = kdv::v_kdv(eta, p);
    let v_t = kdv::v_kdv_t(eta, &eta_t, &eta_tt, p);
    let v_xxt = v_t.d(2);
    consistency_residuals(eta, &v, &eta_t, &v_t, &v_xxt, p)
}

/// Classical RK4 for the Peregrine system.
pub struct PeregrineStepper {
    params: ModelParams,
    dt: f64,
}

impl PeregrineStepper {
    pub fn new(params: ModelParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidStep(format!("dt = {dt} must be positive")));
        }
        Ok(Self { params, dt })
    }

    pub fn advance(&self, s: &PeregrineState) -> Result<PeregrineState> {
        let (p, dt) = (&self.params, self.dt);
        let shifted = |k: &(RealField, RealField), h: f64| PeregrineState {
            xi: s.xi.axpy(h, &k.0),
            u: s.u.axpy(h, &k.1),
            t: s.t + h,
        };
        let k1 = peregrine_rhs(s, p)?;
        let k2 = peregrine_rhs(&shifted(&k1, 0.5 * dt), p)?;
        let k3 = peregrine_rhs(&shifted(&k2, 0.5 * dt), p)?;
        let k4 = peregrine_rhs(&shifted(&k3, dt), p)?;
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
        let next = PeregrineState {
            xi: combine(&s.xi, &k1.0, &k2.0, &k3.0, &k4.0),
            u: combine(&s.u, &k1.1, &k2.1, &k3.1, &k4.1),
            t: s.t + dt,
        };
        let norm = next.xi.norm_linf().max(next.u.norm_linf());
        if !(next.xi.is_finite() && next.u.is_finite()) || norm > kdv::BLOWUP_GUARD {
            return Err(Error::BlowUp {
                model: "peregrine",
                time: next.t,
                norm,
            });
        }
        next.check_depth(p)?;
        Ok(next)
    }
}

pub fn step(state: &PeregrineState, dt: f64, p: &ModelParams) -> Result<PeregrineState> {
    PeregrineStepper::new(*p, dt)?.advance(state)
}

pub fn integrate(
    state: &PeregrineState,
    dt: f64,
    steps: usize,
    p: &ModelParams,
) -> Result<PeregrineState> {
    let stepper = PeregrineStepper::new(*p, dt)?;
    let t0 = state.t;
    let mut s = state.clone();
    for n in 1..=steps {
        s = stepper.advance(&s)?;
        s.t = t0 + n as f64 * dt;
    }
    Ok(s)
}

/// Zero state on `grid`.
pub fn rest(grid: &Arc<Grid1D>) -> PeregrineState {
    PeregrineState::new(RealField::zeros(grid), RealField::zeros(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gauss(g: &Arc<Grid1D>, a: f64, x0: f64, w: f64) -> RealField {
        RealField::from_fn(g, |x| a * (-((x - x0) / w).powi(2)).exp())
    }

    #[test]
    fn rhs_trivial_cases() {
        let g = Grid1D::new(80.0, 128).unwrap();
        let p = ModelParams::new(0.04, 0.04).unwrap();
        let (a, b) = peregrine_rhs(&rest(&g), &p).unwrap();
        assert_eq!(a.norm_linf() + b.norm_linf(), 0.0);
        let s = PeregrineState::new(RealField::constant(&g, 0.3), RealField::constant(&g, -0.2));
        let (a, b) = peregrine_rhs(&s, &p).unwrap();
        assert!(a.norm_linf() < 1e-14 && b.norm_linf() < 1e-14);
    }

    #[test]
    fn linearized_mode() {
        let l = 40.0;
        let g = Grid1D::new(l, 64).unwrap();
        let p = ModelParams::unchecked(0.0, 0.1);
        let k = 3.0 * 2.0 * PI / l;
        let s = PeregrineState::new(RealField::from_fn(&g, |x| (k * x).cos()), RealField::zeros(&g));
        let (xi_t, u_t) = peregrine_rhs(&s, &p).unwrap();
        let expect = RealField::from_fn(&g, |x| k * (k * x).sin() / (1.0 + p.mu() * k * k / 3.0));
        assert!((&u_t - &expect).norm_linf() < 1e-14);
        assert!(xi_t.norm_linf() < 1e-14);
    }

    #[test]
    fn depth_violation() {
        let g = Grid1D::new(20.0, 32).unwrap();
        let p = ModelParams::new(0.2, 0.1).unwrap();
        let s = PeregrineState::new(RealField::constant(&g, -6.0), RealField::zeros(&g));
        assert!(matches!(peregrine_rhs(&s, &p), Err(Error::DepthViolation { .. })));
    }

    #[test]
    fn rest_is_fixed_point() {
        let g = Grid1D::new(80.0, 128).unwrap();
        let p = ModelParams::new(0.04, 0.04).unwrap();
        let s = integrate(&rest(&g), 0.01, 10, &p).unwrap();
        assert_eq!(s.xi.norm_linf() + s.u.norm_linf(), 0.0);
    }

    #[test]
    fn exact_states_have_zero_residual() {
        let g = Grid1D::new(80.0, 256).unwrap();
        let p = ModelParams::new(0.05, 0.05).unwrap();
        let s = PeregrineState::new(gauss(&g, 0.8, 40.0, 2.0), gauss(&g, 0.6, 41.0, 2.5));
        let (xi_t, u_t, u_xxt) = time_derivatives(&s, &p).unwrap();
        let (r, rr) = consistency_residuals(&s.xi, &s.u, &xi_t, &u_t, &u_xxt, &p);
        assert!(r.norm_linf() < 1e-12 && rr.norm_linf() < 1e-12);

        let z = RealField::zeros(&g);
        let (r, rr) = consistency_residuals(&z, &z, &z, &z, &z, &p);
        assert_eq!(r.norm_linf() + rr.norm_linf(), 0.0);
    }

    #[test]
    fn invariants_conserved() {
        let g = Grid1D::new(80.0, 256).unwrap();
        let p = ModelParams::new(0.05, 0.05).unwrap();
        let s0 = PeregrineState::new(gauss(&g, 1.0, 40.0, 2.0), gauss(&g, 1.0, 40.0, 2.0));
        let (m0, q0) = s0.invariants(&p);
        let s = integrate(&s0, 0.01, 1000, &p).unwrap();
        let (m1, q1) = s.invariants(&p);
        assert!((m1 - m0).abs() <= 1e-10 * m0.abs());
        assert!((q1 - q0).abs() <= 1e-8 * q0.abs());
    }

    #[test]
    fn fourth_order_in_time() {
        let g = Grid1D::new(80.0, 256).unwrap();
        let p = ModelParams::new(0.08, 0.08).unwrap();
        let s0 = PeregrineState::new(gauss(&g, 1.0, 40.0, 2.0), RealField::zeros(&g));
        let t_end = 1.0;
        let run = |dt: f64| integrate(&s0, dt, (t_end / dt).round() as usize, &p).unwrap();
        let reference = run(0.0025);
        let err = |dt: f64| {
            let s = run(dt);
            (&s.xi - &reference.xi).norm_linf().max((&s.u - &reference.u).norm_linf())
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 3.0, "ratio {ratio}");
    }
}
