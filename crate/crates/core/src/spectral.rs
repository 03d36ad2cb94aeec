//! Fourier calculus on a uniform periodic grid over `[0, 2ωπ)`.
//!
//! Everything here is exact for trigonometric polynomials that the grid
//! resolves: derivatives multiply mode `m` by `(i m/ω)^p`, quadrature is the
//! rectangle rule, and interpolation evaluates the trigonometric interpolant.
//! The Nyquist mode is treated as a cosine, so its odd derivatives vanish.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Highest derivative order supported by [`GridFunction::deriv`].
pub const MAX_DERIV_ORDER: u32 = 8;

pub(crate) fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// Uniform grid `θ_j = 2ωπ j / n` with cached FFT plans.
#[derive(Clone)]
pub struct PeriodicGrid {
    omega: u32,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("omega", &self.omega)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.omega == other.omega && self.n == other.n
    }
}

impl PeriodicGrid {
    pub fn new(omega: u32, n: usize) -> Result<Self> {
        if omega == 0 {
            return Err(Error::InvalidGrid("winding number must be positive".into()));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "sample count must be even and at least 8, got {n}"
            )));
        }
        let (forward, inverse) = {
            let mut planner = planner().lock().unwrap_or_else(|e| e.into_inner());
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        };
        Ok(Self {
            omega,
            n,
            forward,
            inverse,
        })
    }

    pub fn omega(&self) -> u32 {
        self.omega
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Length of the periodic domain, `2ωπ`.
    pub fn period(&self) -> f64 {
        2.0 * PI * self.omega as f64
    }

    pub fn spacing(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        self.period() * j as f64 / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Integer mode index of FFT slot `j`, in `[-n/2, n/2)`.
    pub fn mode(&self, j: usize) -> i64 {
        let half = self.n / 2;
        if j < half {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Effective wavenumber `m/ω` of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.mode(j) as f64 / self.omega as f64
    }

    /// Largest resolved wavenumber `n/(2ω)`.
    pub fn max_wavenumber(&self) -> f64 {
        self.n as f64 / (2.0 * self.omega as f64)
    }

    /// Normalized DFT coefficients `c_j = (1/n) Σ f_l e^{-2πi jl/n}`.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(values.len(), self.n);
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for c in &mut buf {
            *c *= scale;
        }
        buf
    }

    /// Inverse of [`forward`](Self::forward); returns the real part.
    pub fn inverse(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        debug_assert_eq!(coeffs.len(), self.n);
        self.inverse.process(&mut coeffs);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    /// Multiplies coefficients by `(iξ)^order` in place.
    pub fn apply_deriv(&self, coeffs: &mut [Complex64], order: u32) {
        if order == 0 {
            return;
        }
        let nyquist = self.n / 2;
        for (j, c) in coeffs.iter_mut().enumerate() {
            if j == nyquist && order % 2 == 1 {
                *c = Complex64::new(0.0, 0.0);
                continue;
            }
            *c *= Complex64::new(0.0, self.wavenumber(j)).powu(order);
        }
    }

    /// Evaluates the `order`-th derivative of the interpolant with
    /// coefficients `coeffs` (as produced by [`forward`](Self::forward)) at `x`.
    pub fn eval_series(&self, coeffs: &[Complex64], x: f64, order: u32) -> f64 {
        let half = self.n / 2;
        let omega = self.omega as f64;
        let step = Complex64::from_polar(1.0, x / omega);
        let mut z = Complex64::new(1.0, 0.0);
        let mut acc = if order == 0 { coeffs[0].re } else { 0.0 };
        for (m, c) in coeffs.iter().enumerate().take(half).skip(1) {
            z *= step;
            // re-anchor the recurrence every 64 modes
            if m % 64 == 0 {
                z = Complex64::from_polar(1.0, m as f64 * x / omega);
            }
            let factor = Complex64::new(0.0, m as f64 / omega).powu(order);
            acc += 2.0 * (c * factor * z).re;
        }
        if order.is_multiple_of(2) {
            let xi = half as f64 / omega;
            let sign = if (order / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
            acc += sign * xi.powi(order as i32) * coeffs[half].re * (xi * x).cos();
        }
        acc
    }
}

/// Zeroes every coefficient with `|c| ≤ rel_tol · max|c|`.
pub fn drop_small_modes(coeffs: &mut [Complex64], rel_tol: f64) {
    let cut = rel_tol * coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for c in coeffs.iter_mut().filter(|c| c.norm() <= cut) {
        *c = Complex64::new(0.0, 0.0);
    }
}

/// Samples of a real function on a [`PeriodicGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn constant(grid: &PeriodicGrid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.n()],
        }
    }

    /// Builds without the finiteness check; for intermediate integrator stages.
    pub(crate) fn from_raw(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values)
    }

    pub fn deriv(&self, order: u32) -> Result<GridFunction> {
        if order > MAX_DERIV_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if order == 0 {
            return Ok(self.clone());
        }
        let mut coeffs = self.spectrum();
        self.grid.apply_deriv(&mut coeffs, order);
        Ok(Self::from_raw(self.grid.clone(), self.grid.inverse(coeffs)))
    }

    /// Several derivatives sharing one forward transform.
    pub fn derivs(&self, orders: &[u32]) -> Result<Vec<GridFunction>> {
        self.derivs_from(self.spectrum(), orders, true)
    }

    /// [`derivs`](Self::derivs) of the spectrum with every mode
    /// `|f̂_m| ≤ rel_tol · max|f̂|` removed.
    ///
    /// The filter is applied to the coefficients themselves: filtering the
    /// values first (as [`denoise`](Self::denoise) does) would let the inverse
    /// transform re-seed round-off in every mode before differentiation.
    pub fn derivs_denoised(&self, orders: &[u32], rel_tol: f64) -> Result<Vec<GridFunction>> {
        let mut spectrum = self.spectrum();
        drop_small_modes(&mut spectrum, rel_tol);
        self.derivs_from(spectrum, orders, false)
    }

    fn derivs_from(&self, spectrum: Vec<Complex64>, orders: &[u32], keep_values: bool) -> Result<Vec<GridFunction>> {
        if let Some(&bad) = orders.iter().find(|&&p| p > MAX_DERIV_ORDER) {
            return Err(Error::UnsupportedOrder(bad));
        }
        Ok(orders
            .iter()
            .map(|&p| {
                if p == 0 && keep_values {
                    return self.clone();
                }
                let mut coeffs = spectrum.clone();
                self.grid.apply_deriv(&mut coeffs, p);
                Self::from_raw(self.grid.clone(), self.grid.inverse(coeffs))
            })
            .collect())
    }

    /// Rectangle rule `(2ωπ/n) Σ f_j`.
    pub fn integrate(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    /// `∫ (∂^p f)^2 dθ` from the spectrum (Parseval).
    pub fn deriv_l2sq(&self, order: u32) -> Result<f64> {
        if order > MAX_DERIV_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        let mut coeffs = self.spectrum();
        self.grid.apply_deriv(&mut coeffs, order);
        Ok(self.grid.period() * coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>())
    }

    pub fn interpolate(&self, points: &[f64]) -> Vec<f64> {
        let coeffs = self.spectrum();
        points
            .iter()
            .map(|&x| self.grid.eval_series(&coeffs, x.rem_euclid(self.grid.period()), 0))
            .collect()
    }

    /// Derivative of the interpolant at arbitrary points.
    pub fn interpolate_deriv(&self, points: &[f64], order: u32) -> Result<Vec<f64>> {
        if order > MAX_DERIV_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        let coeffs = self.spectrum();
        Ok(points
            .iter()
            .map(|&x| self.grid.eval_series(&coeffs, x.rem_euclid(self.grid.period()), order))
            .collect())
    }

    /// Zeroes all modes with `|m| > keep_fraction · n/2`.
    pub fn lowpass(&self, keep_fraction: f64) -> Result<GridFunction> {
        if !(keep_fraction > 0.0 && keep_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "keep_fraction must lie in (0, 1], got {keep_fraction}"
            )));
        }
        if keep_fraction == 1.0 {
            return Ok(self.clone());
        }
        let cutoff = keep_fraction * (self.grid.n() / 2) as f64;
        let mut coeffs = self.spectrum();
        for (j, c) in coeffs.iter_mut().enumerate() {
            if (self.grid.mode(j).unsigned_abs() as f64) > cutoff {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Ok(Self::from_raw(self.grid.clone(), self.grid.inverse(coeffs)))
    }

    /// Zeroes every mode with `|f̂_m| ≤ rel_tol · max|f̂|`.
    pub fn denoise(&self, rel_tol: f64) -> GridFunction {
        let mut coeffs = self.spectrum();
        drop_small_modes(&mut coeffs, rel_tol);
        Self::from_raw(self.grid.clone(), self.grid.inverse(coeffs))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Index and value of the smallest sample.
    pub fn argmin(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (j, v)| if v < best.1 { (j, v) } else { best })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(omega: u32, n: usize) -> PeriodicGrid {
        PeriodicGrid::new(omega, n).unwrap()
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PeriodicGrid::new(0, 16).is_err());
        assert!(PeriodicGrid::new(1, 6).is_err());
        assert!(PeriodicGrid::new(1, 15).is_err());
    }

    #[test]
    fn cosine_is_eigenfunction() {
        let g = grid(1, 16);
        let f = GridFunction::from_fn(&g, f64::cos);
        let d2 = f.deriv(2).unwrap();
        let expected: Vec<f64> = g.nodes().iter().map(|t| -t.cos()).collect();
        assert!(max_err(d2.values(), &expected) < 1e-14);
    }

    #[test]
    fn constant_has_zero_derivative() {
        let g = grid(1, 16);
        let d = GridFunction::constant(&g, 3.0).deriv(1).unwrap();
        assert!(d.max_abs() < 1e-15);
    }

    #[test]
    fn wavenumbers_respect_winding() {
        let g = grid(2, 32);
        let f = GridFunction::from_fn(&g, |t| (t / 2.0).cos());
        let d2 = f.deriv(2).unwrap();
        let expected: Vec<f64> = g.nodes().iter().map(|t| -0.25 * (t / 2.0).cos()).collect();
        assert!(max_err(d2.values(), &expected) < 1e-14);
    }

    #[test]
    fn unsupported_order() {
        let g = grid(1, 16);
        let f = GridFunction::constant(&g, 1.0);
        assert!(matches!(f.deriv(9), Err(Error::UnsupportedOrder(9))));
        assert!(f.deriv(8).is_ok());
    }

    #[test]
    fn nyquist_odd_derivative_is_zeroed() {
        let g = grid(1, 8);
        let f = GridFunction::from_fn(&g, |t| (4.0 * t).cos());
        assert!(f.deriv(1).unwrap().max_abs() < 1e-13);
        let d2 = f.deriv(2).unwrap();
        let expected: Vec<f64> = g.nodes().iter().map(|t| -16.0 * (4.0 * t).cos()).collect();
        assert!(max_err(d2.values(), &expected) < 1e-12);
    }

    #[test]
    fn quadrature() {
        assert!((GridFunction::constant(&grid(1, 8), 1.0).integrate() - 2.0 * PI).abs() < 1e-14);
        assert!((GridFunction::constant(&grid(3, 8), 1.0).integrate() - 6.0 * PI).abs() < 1e-13);
        let f = GridFunction::from_fn(&grid(1, 8), |t| t.cos().powi(2));
        assert!((f.integrate() - PI).abs() < 1e-14);
    }

    #[test]
    fn interpolation() {
        let g = grid(1, 16);
        let s = GridFunction::from_fn(&g, f64::sin);
        let v = s.interpolate(&[PI / 7.0]);
        assert!((v[0] - (PI / 7.0).sin()).abs() < 1e-14);
        let c = GridFunction::constant(&g, 2.5);
        assert!((c.interpolate(&[1.234])[0] - 2.5).abs() < 1e-14);
        let c3 = GridFunction::from_fn(&g, |t| (3.0 * t).cos());
        assert!((c3.interpolate(&[0.4])[0] - 1.2f64.cos()).abs() < 1e-14);
        // points outside the period are reduced
        assert!((s.interpolate(&[PI / 7.0 + 4.0 * PI])[0] - (PI / 7.0).sin()).abs() < 1e-13);
    }

    #[test]
    fn interpolated_derivatives() {
        let g = grid(2, 32);
        let f = GridFunction::from_fn(&g, |t| (1.5 * t).sin() + 0.3 * (t / 2.0).cos());
        let x = 0.731;
        let d1 = f.interpolate_deriv(&[x], 1).unwrap()[0];
        let d2 = f.interpolate_deriv(&[x], 2).unwrap()[0];
        assert!((d1 - (1.5 * (1.5 * x).cos() - 0.15 * (x / 2.0).sin())).abs() < 1e-13);
        assert!((d2 - (-2.25 * (1.5 * x).sin() - 0.075 * (x / 2.0).cos())).abs() < 1e-13);
    }

    #[test]
    fn denoised_derivatives_suppress_round_off() {
        let g = grid(1, 256);
        let f = GridFunction::from_fn(&g, |t| (3.0 * t).sin());
        let exact: Vec<f64> = g.nodes().iter().map(|t| 81.0 * (3.0 * t).sin()).collect();
        let plain = f.deriv(4).unwrap();
        let filtered = f.derivs_denoised(&[4], 1e-15).unwrap();
        assert!(max_err(filtered[0].values(), &exact) < 1e-12);
        // value-space filtering re-seeds round-off before differentiating
        assert!(max_err(plain.values(), &exact) > 1e-10);
        assert!(max_err(f.denoise(1e-15).values(), f.values()) < 1e-14);
    }

    #[test]
    fn lowpass_keeps_low_modes() {
        let g = grid(1, 16);
        let f = GridFunction::from_fn(&g, |t| t.cos() + (7.0 * t).cos());
        assert_eq!(f.lowpass(1.0).unwrap(), f);
        let low = f.lowpass(0.5).unwrap();
        let expected: Vec<f64> = g.nodes().iter().map(|t| t.cos()).collect();
        assert!(max_err(low.values(), &expected) < 1e-14);
        let one = GridFunction::constant(&g, 1.0).lowpass(0.1).unwrap();
        assert!(max_err(one.values(), &[1.0; 16]) < 1e-15);
        assert!(f.lowpass(0.0).is_err());
    }

    #[test]
    fn parseval_matches_quadrature() {
        let g = grid(1, 32);
        let f = GridFunction::from_fn(&g, |t| 1.0 + 0.2 * (2.0 * t).cos() + 0.1 * (5.0 * t).sin());
        for p in 0..=4 {
            let direct = f.deriv(p).unwrap().map(|v| v * v).integrate();
            let modal = f.deriv_l2sq(p).unwrap();
            assert!((direct - modal).abs() <= 1e-10 * modal.max(1e-300) + 1e-14, "p={p}");
        }
    }

    #[test]
    fn rejects_bad_values() {
        let g = grid(1, 8);
        assert!(matches!(
            GridFunction::new(g.clone(), vec![0.0; 7]),
            Err(Error::LengthMismatch { .. })
        ));
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(matches!(GridFunction::new(g, v), Err(Error::NonFinite { node: 3 })));
    }
}
