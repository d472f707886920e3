//! Laplace solve `mu phi_xx + phi_zz = 0` on the fluid strip mapped to
//! `sigma in [0, 1]` through `z = -1 + sigma h(x)`, `h = 1 + eps zeta`.
//!
//! With `psi(x, sigma) = phi(x, z)` and `s_x = -sigma h_x / h`, the equation
//! multiplied by `h^2` reads
//!
//! ```text
//! mu h^2 psi_xx + 2 mu h^2 s_x psi_xs + (1 + mu h^2 s_x^2) psi_ss + mu h^2 s_xx psi_s = 0
//! ```
//!
//! with `psi_s = 0` at the bottom and `psi = Phi` at the surface. It is
//! discretized by Fourier collocation in x and Chebyshev collocation in
//! sigma, and solved with right-preconditioned GMRES. The preconditioner is
//! the flat-strip operator `mu psi_xx + psi_ss`, which is diagonal in the
//! Fourier index and is factored once per mode.

use std::sync::Arc;

use nalgebra::{DMatrix, Dyn, LU};
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;
use crate::params::ModelParams;
use crate::spectral::{Grid1D, RealField};
use crate::waterwave::VerticalGrid;

/// Largest acceptable max-norm residual of the discrete equations, relative
/// to `max(1, |Phi|_inf)`.
pub const RESIDUAL_LIMIT: f64 = 1e-9;

const GMRES_RTOL: f64 = 1e-13;
const GMRES_RESTART: usize = 40;
const GMRES_MAX_ITERS: usize = 400;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Variable coefficients of the mapped operator, level-major.
pub(crate) struct MappedCoefficients {
    xx: Vec<f64>,
    xs: Vec<f64>,
    ss: Vec<f64>,
    s: Vec<f64>,
}

impl MappedCoefficients {
    fn new(zeta: &RealField, vg: &VerticalGrid, p: &ModelParams) -> Self {
        let (eps, mu) = (p.eps(), p.mu());
        let zx = zeta.d(1);
        let zxx = zeta.d(2);
        let n = zeta.len();
        let size = n * vg.len();
        let (mut xx, mut xs, mut ss, mut s) = (
            Vec::with_capacity(size),
            Vec::with_capacity(size),
            Vec::with_capacity(size),
            Vec::with_capacity(size),
        );
        for &sigma in vg.nodes() {
            for j in 0..n {
                let h = 1.0 + eps * zeta.values()[j];
                let hx = eps * zx.values()[j];
                let hxx = eps * zxx.values()[j];
                xx.push(mu * h * h);
                xs.push(-2.0 * mu * sigma * h * hx);
                ss.push(1.0 + mu * sigma * sigma * hx * hx);
                s.push(mu * sigma * (2.0 * hx * hx - h * hxx));
            }
        }
        Self { xx, xs, ss, s }
    }
}

/// Elliptic workspace for one `(grid, vertical grid, params)` triple.
/// Holds the per-mode factorizations of the flat-strip operator.
pub struct LaplaceSolver {
    grid: Arc<Grid1D>,
    vg: VerticalGrid,
    params: ModelParams,
    diff_t: DMatrix<f64>,
    diff2_t: DMatrix<f64>,
    modes: Vec<LU<f64, Dyn, Dyn>>,
}

impl LaplaceSolver {
    pub fn new(grid: &Arc<Grid1D>, vg: &VerticalGrid, params: &ModelParams) -> Self {
        let nz = vg.len();
        let top = nz - 1;
        let modes = (0..=grid.len() / 2)
            .map(|slot| {
                let k = grid.wavenumbers()[slot];
                let mut m = vg.diff2().clone();
                for i in 1..top {
                    m[(i, i)] -= params.mu() * k * k;
                }
                for j in 0..nz {
                    m[(0, j)] = vg.diff()[(0, j)];
                    m[(top, j)] = if j == top { 1.0 } else { 0.0 };
                }
                m.lu()
            })
            .collect();
        Self {
            grid: grid.clone(),
            vg: vg.clone(),
            params: *params,
            diff_t: vg.diff().transpose(),
            diff2_t: vg.diff2().transpose(),
            modes,
        }
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }

    pub fn vertical(&self) -> &VerticalGrid {
        &self.vg
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `D psi` along sigma for a level-major array.
    pub(crate) fn sigma_derivative(&self, psi: &[f64]) -> Vec<f64> {
        let x = DMatrix::from_column_slice(self.grid.len(), self.vg.len(), psi);
        (&x * &self.diff_t).as_slice().to_vec()
    }

    fn sigma_second_derivative(&self, psi: &[f64]) -> Vec<f64> {
        let x = DMatrix::from_column_slice(self.grid.len(), self.vg.len(), psi);
        (&x * &self.diff2_t).as_slice().to_vec()
    }

    /// Applies the mapped operator, bottom Neumann row and surface Dirichlet
    /// row to `psi`.
    fn apply(&self, coeffs: &MappedCoefficients, psi: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let top = self.vg.len() - 1;
        let psi_s = self.sigma_derivative(psi);
        let psi_ss = self.sigma_second_derivative(psi);
        let grid = &self.grid;
        let mut out = vec![0.0; psi.len()];
        par::for_each_chunk_mut(&mut out, n, |i, row| {
            let lvl = i * n..(i + 1) * n;
            if i == 0 {
                row.copy_from_slice(&psi_s[lvl]);
                return;
            }
            if i == top {
                row.copy_from_slice(&psi[lvl]);
                return;
            }
            let mut hat: Vec<Complex64> =
                psi[lvl.clone()].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            grid.forward_in_place(&mut hat);
            let mut dx: Vec<Complex64> = (0..n).map(|m| hat[m] * grid.derivative_symbol(m, 1)).collect();
            let mut dxx: Vec<Complex64> = (0..n).map(|m| hat[m] * grid.derivative_symbol(m, 2)).collect();
            let mut ds: Vec<Complex64> =
                psi_s[lvl.clone()].iter().map(|&v| Complex64::new(v, 0.0)).collect();
            grid.forward_in_place(&mut ds);
            for (m, c) in ds.iter_mut().enumerate() {
                *c *= grid.derivative_symbol(m, 1);
            }
            grid.inverse_in_place(&mut dx);
            grid.inverse_in_place(&mut dxx);
            grid.inverse_in_place(&mut ds);
            for (j, r) in row.iter_mut().enumerate() {
                let q = i * n + j;
                *r = coeffs.xx[q] * dxx[j].re
                    + coeffs.xs[q] * ds[j].re
                    + coeffs.ss[q] * psi_ss[q]
                    + coeffs.s[q] * psi_s[q];
            }
        });
        out
    }

    /// Exact inverse of the flat-strip operator with the same boundary rows.
    fn precondition(&self, r: &[f64]) -> Vec<f64> {
        let n = self.grid.len();
        let nz = self.vg.len();
        let grid = &self.grid;

        let mut rhat = vec![Complex64::new(0.0, 0.0); n * nz];
        par::for_each_chunk_mut(&mut rhat, n, |i, row| {
            for (c, &v) in row.iter_mut().zip(&r[i * n..(i + 1) * n]) {
                *c = Complex64::new(v, 0.0);
            }
            grid.forward_in_place(row);
        });

        let mut zhat = vec![Complex64::new(0.0, 0.0); n * nz];
        par::for_each_chunk_mut(&mut zhat, nz, |m, col| {
            let slot = if m <= n / 2 { m } else { n - m };
            let mut rhs = DMatrix::zeros(nz, 2);
            for i in 0..nz {
                let c = rhat[i * n + m];
                rhs[(i, 0)] = c.re;
                rhs[(i, 1)] = c.im;
            }
            // flat-strip matrices are nonsingular for every mode
            let sol = self.modes[slot]
                .solve(&rhs)
                .expect("flat-strip factorization is nonsingular");
            for (i, c) in col.iter_mut().enumerate() {
                *c = Complex64::new(sol[(i, 0)], sol[(i, 1)]);
            }
        });

        let mut z = vec![0.0; n * nz];
        par::for_each_chunk_mut(&mut z, n, |i, row| {
            let mut buf: Vec<Complex64> = (0..n).map(|m| zhat[m * nz + i]).collect();
            grid.inverse_in_place(&mut buf);
            for (v, c) in row.iter_mut().zip(&buf) {
                *v = c.re;
            }
        });
        z
    }

    /// Solves for `psi` (level-major, `N_z x N`) with surface data `surface`.
    pub fn solve(&self, zeta: &RealField, surface: &RealField) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.grid.len();
        let nz = self.vg.len();
        let min_depth = 1.0 + self.params.eps() * zeta.min();
        if !(min_depth > 0.0) {
            return Err(Error::DepthViolation {
                model: "waterwave",
                min_depth,
            });
        }
        let mut b = vec![0.0; n * nz];
        b[(nz - 1) * n..].copy_from_slice(surface.values());
        let scale = surface.norm_linf();
        if scale == 0.0 {
            return Ok((b, SolveStats::default()));
        }
        let coeffs = MappedCoefficients::new(zeta, &self.vg, &self.params);
        let (x, iterations) = gmres(
            |v| self.apply(&coeffs, v),
            |v| self.precondition(v),
            &b,
        );
        let ax = self.apply(&coeffs, &x);
        let residual = b
            .iter()
            .zip(&ax)
            .fold(0.0f64, |m, (bi, ai)| m.max((bi - ai).abs()));
        if !residual.is_finite() || residual > RESIDUAL_LIMIT * scale.max(1.0) {
            return Err(Error::SolverDiverged {
                iterations,
                residual,
            });
        }
        Ok((x, SolveStats {
            iterations,
            residual,
        }))
    }

    /// Max-norm residual of `psi` against the discrete equations.
    pub fn residual(&self, zeta: &RealField, surface: &RealField, psi: &[f64]) -> f64 {
        let n = self.grid.len();
        let nz = self.vg.len();
        let coeffs = MappedCoefficients::new(zeta, &self.vg, &self.params);
        let ax = self.apply(&coeffs, psi);
        let mut b = vec![0.0; n * nz];
        b[(nz - 1) * n..].copy_from_slice(surface.values());
        b.iter()
            .zip(&ax)
            .fold(0.0f64, |m, (bi, ai)| m.max((bi - ai).abs()))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES with right preconditioning, zero initial guess.
/// Returns the iterate and the number of Arnoldi steps taken.
fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precondition: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
) -> (Vec<f64>, usize) {
    let len = b.len();
    let b_norm = norm2(b);
    let target = GMRES_RTOL * b_norm;
    let mut x = vec![0.0; len];
    let mut total = 0;

    while total < GMRES_MAX_ITERS {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        if beta <= target {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut precond: Vec<Vec<f64>> = Vec::with_capacity(GMRES_RESTART);
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(GMRES_RESTART);
        let mut cs: Vec<f64> = Vec::with_capacity(GMRES_RESTART);
        let mut sn: Vec<f64> = Vec::with_capacity(GMRES_RESTART);
        let mut g = vec![beta];
        let mut converged = false;

        for j in 0..GMRES_RESTART {
            let z = precondition(&basis[j]);
            let mut w = apply(&z);
            precond.push(z);
            let mut col = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                col[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let w_norm = norm2(&w);
            col[j + 1] = w_norm;
            for i in 0..j {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = cs[i] * a + sn[i] * bb;
                col[i + 1] = -sn[i] * a + cs[i] * bb;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[j] / denom, col[j + 1] / denom)
            };
            col[j] = denom;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g.push(-s * g[j]);
            g[j] *= c;
            h.push(col);
            total += 1;

            if g[j + 1].abs() <= target || w_norm == 0.0 || total >= GMRES_MAX_ITERS {
                converged = true;
                break;
            }
            basis.push(w.iter().map(|v| v / w_norm).collect());
        }

        // back substitution on the triangular system
        let m = h.len();
        let mut y = vec![0.0; m];
        for i in (0..m).rev() {
            let mut acc = g[i];
            for (k, yk) in y.iter().enumerate().skip(i + 1) {
                acc -= h[k][i] * yk;
            }
            y[i] = acc / h[i][i];
        }
        for (yi, z) in y.iter().zip(&precond) {
            for (xk, zk) in x.iter_mut().zip(z) {
                *xk += yi * zk;
            }
        }
        if converged {
            break;
        }
    }
    (x, total)
}
