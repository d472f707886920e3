//! Periodic Fourier collocation: grids, fields, derivatives, dealiasing,
//! quadrature and the Sobolev-type norms used by every error metric.
//!
//! Transform convention: `forward` returns Fourier-series coefficients
//! `f_hat[m] = (1/N) sum_j f_j exp(-i k_m x_j)`, so that
//! `f(x) = sum_m f_hat[m] exp(i k_m x)` and Parseval reads
//! `integral(|f|^2) = L * sum_m |f_hat[m]|^2`, consistent with the
//! rectangle-rule `integral` below.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Tolerance on the mean of a field passed to [`RealField::antiderivative`].
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// Uniform periodic grid on `[0, L)` with `N` nodes.
pub struct Grid1D {
    length: f64,
    n: usize,
    dx: f64,
    wavenumbers: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid1D")
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for Grid1D {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Arc<Self>> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length {length} must be positive")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "num_points {n} must be even and >= 8"
            )));
        }
        let scale = 2.0 * PI / length;
        let wavenumbers = (0..n)
            .map(|i| Self::signed_index(i, n) as f64 * scale)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            length,
            n,
            dx: length / n as f64,
            wavenumbers,
            fft: planner.plan_fft_forward(n),
            ifft: planner.plan_fft_inverse(n),
        }))
    }

    fn signed_index(i: usize, n: usize) -> i64 {
        if i <= n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Wavenumbers in FFT order; the Nyquist slot holds `+pi N / L`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Integer mode number of FFT slot `i` (Nyquist reported as `+N/2`).
    pub fn mode(&self, i: usize) -> i64 {
        Self::signed_index(i, self.n)
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n / 2
    }

    /// Largest retained mode number under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Fourier symbol of `d^order/dx^order` in slot `i`. Odd derivatives
    /// drop the Nyquist mode so real fields stay real.
    pub fn derivative_symbol(&self, i: usize, order: u32) -> Complex64 {
        if order % 2 == 1 && i == self.nyquist_slot() {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(0.0, self.wavenumbers[i]).powu(order)
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let inv_n = 1.0 / self.n as f64;
        let mut buf: Vec<Complex64> = values
            .iter()
            .map(|&v| Complex64::new(v * inv_n, 0.0))
            .collect();
        self.fft.process(&mut buf);
        buf
    }

    /// Inverse of [`forward`](Self::forward); the imaginary part is discarded.
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.ifft.process(&mut coeffs);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    /// In-place variants for callers that manage their own buffers.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        let inv_n = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= inv_n;
        }
        self.fft.process(buf);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.ifft.process(buf);
    }
}

/// Real samples of a periodic function at the nodes of a [`Grid1D`].
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Arc<Grid1D>,
    values: Vec<f64>,
}

impl PartialEq for RealField {
    fn eq(&self, other: &Self) -> bool {
        *self.grid == *other.grid && self.values == other.values
    }
}

impl RealField {
    pub fn new(grid: Arc<Grid1D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("RealField::new"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec(grid: Arc<Grid1D>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: &Arc<Grid1D>, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.len()).map(|j| f(grid.node(j))).collect();
        Self::from_vec(grid.clone(), values)
    }

    pub fn zeros(grid: &Arc<Grid1D>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<Grid1D>, c: f64) -> Self {
        Self::from_vec(grid.clone(), vec![c; grid.len()])
    }

    pub fn grid(&self) -> &Arc<Grid1D> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &RealField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn from_spectrum(grid: &Arc<Grid1D>, coeffs: Vec<Complex64>) -> Self {
        Self::from_vec(grid.clone(), grid.inverse(coeffs))
    }

    /// Applies a Fourier multiplier given per FFT slot.
    pub fn apply_symbol(&self, symbol: impl Fn(usize) -> Complex64) -> RealField {
        let mut coeffs = self.spectrum();
        for (i, c) in coeffs.iter_mut().enumerate() {
            *c *= symbol(i);
        }
        Self::from_spectrum(&self.grid, coeffs)
    }

    /// Spectral derivative of order 1 to 4.
    pub fn derivative(&self, order: u32) -> Result<RealField> {
        if !(1..=4).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(self.apply_symbol(|i| self.grid.derivative_symbol(i, order)))
    }

    /// `derivative` for orders known to be valid at the call site.
    pub(crate) fn d(&self, order: u32) -> RealField {
        debug_assert!((1..=4).contains(&order));
        self.apply_symbol(|i| self.grid.derivative_symbol(i, order))
    }

    /// Zero-mean periodic primitive.
    pub fn antiderivative(&self) -> Result<RealField> {
        let mean = self.mean();
        if mean.abs() > ZERO_MEAN_TOL {
            return Err(Error::NonzeroMean(mean));
        }
        let grid = &self.grid;
        Ok(self.apply_symbol(|i| {
            if i == 0 || i == grid.nyquist_slot() {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / grid.wavenumbers()[i])
            }
        }))
    }

    /// 2/3-rule truncation: modes with `|m| > N/3` are zeroed.
    pub fn dealias(&self) -> RealField {
        let grid = &self.grid;
        let cutoff = grid.dealias_cutoff();
        self.apply_symbol(|i| {
            if grid.mode(i).abs() > cutoff {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
    }

    /// Rectangle rule `dx * sum f_j`; spectrally accurate for periodic data.
    pub fn integral(&self) -> f64 {
        self.grid.dx * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_l2(&self) -> f64 {
        (self.grid.dx * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// `(||f||_{H^s}^2 + mu ||f_x||_{H^s}^2)^{1/2}` evaluated on the Fourier
    /// side with weights `(1 + k^2)^s (1 + mu k^2)`.
    pub fn norm_hs_mu(&self, s: f64, mu: f64) -> f64 {
        let coeffs = self.spectrum();
        let sum: f64 = coeffs
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(c, &k)| {
                let k2 = k * k;
                (1.0 + k2).powf(s) * (1.0 + mu * k2) * c.norm_sqr()
            })
            .sum();
        (self.grid.length * sum).sqrt()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> RealField {
        Self::from_vec(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &RealField, f: impl Fn(f64, f64) -> f64) -> RealField {
        assert!(self.same_grid(other), "fields on different grids");
        Self::from_vec(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// Pointwise product followed by 2/3-rule truncation.
    pub fn product_dealiased(&self, other: &RealField) -> RealField {
        self.zip_map(other, |a, b| a * b).dealias()
    }

    pub fn scale(&self, a: f64) -> RealField {
        self.map(|v| a * v)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &RealField) -> RealField {
        self.zip_map(other, |x, y| x + a * y)
    }

    /// Largest magnitude among the first and last `width` nodes.
    pub fn edge_magnitude(&self, width: usize) -> f64 {
        let n = self.len();
        let w = width.min(n / 2);
        self.values[..w]
            .iter()
            .chain(&self.values[n - w..])
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Add for &RealField {
    type Output = RealField;
    fn add(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &RealField {
    type Output = RealField;
    fn sub(self, rhs: &RealField) -> RealField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &RealField {
    type Output = RealField;
    fn mul(self, rhs: f64) -> RealField {
        self.scale(rhs)
    }
}

impl Neg for &RealField {
    type Output = RealField;
    fn neg(self) -> RealField {
        self.scale(-1.0)
    }
}
