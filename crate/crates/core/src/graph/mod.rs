//! Graph parametrization over a fixed base curve.
//!
//! A curve near a strictly convex base `γ₀(u)` (arclength `u ∈ [0, L₀)`) is
//! written as `γ = γ₀ − ρν₀`, where `ν₀` is the outer unit normal, so that
//! `T₀' = −k₀ν₀` and `ν₀' = k₀T₀`. Writing `N₀ = −ν₀` for the inner normal,
//! `γ_u = (1 − k₀ρ)T₀ + ρ_u N₀`. This module evaluates the closed-form
//! derivatives of `γ`, the normal velocity of the entropy flow in graph form
//! and its quasilinear splitting, and compares them with direct spectral
//! differentiation of the sampled composite curve.
//!
//! Functions over `u` are stored on a [`PeriodicGrid`] with `ω = 1` in the
//! normalized parameter `φ = 2πu/L₀`; `∂_u = (2π/L₀)∂_φ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::spectral::{drop_small_modes, GridFunction, PeriodicGrid};
use crate::support::SupportGrid;

mod bundle;
pub mod printed;
mod velocity;

pub use bundle::{build_bundle, DerivativeBundle, BUNDLE_ENTRIES};
pub use velocity::{
    check_parametrization_identity, operator_split, velocity_graph, velocity_via_support, OperatorSplit,
};

const MIN_FINE: usize = 64;
const MAX_FINE: usize = 8192;
/// Spectral tail level treated as resolved when sampling a parametric curve.
const TAIL_TOL: f64 = 1e-13;
/// Relative level below which position modes are treated as round-off.
const SERIES_DENOISE: f64 = 1e-15;
/// Relative level below which curvature modes are discarded before differentiating.
const JET_DENOISE: f64 = 1e-13;

/// Orientation of the normal along which `ρ` displaces the base curve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FrameConvention {
    /// `γ = γ₀ − ρν₀` with `ν₀` the outer normal; the closed-form derivatives hold.
    #[default]
    SelfConsistent,
    /// `γ = γ₀ + ρν₀`: the opposite sign, under which the closed forms disagree
    /// with direct differentiation.
    Flipped,
}

/// Arclength-sampled strictly convex base curve with its curvature jet.
#[derive(Clone, Debug)]
pub struct BaseCurve {
    length: f64,
    grid: PeriodicGrid,
    gamma: Vec<Vec2>,
    tangent: Vec<Vec2>,
    /// `k₀, (k₀)_u, (k₀)_uu, (k₀)_u³`.
    k: [Vec<f64>; 4],
}

impl BaseCurve {
    /// Counter-clockwise circle of the given radius about the origin.
    pub fn circle(radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("circle radius must be positive".into()));
        }
        let grid = PeriodicGrid::new(1, n)?;
        let nodes = grid.nodes();
        Ok(Self {
            length: 2.0 * PI * radius,
            gamma: nodes.iter().map(|&p| radius * Vec2::polar(p)).collect(),
            tangent: nodes.iter().map(|&p| Vec2::polar(p).perp()).collect(),
            k: [vec![1.0 / radius; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            grid,
        })
    }

    /// Ellipse `(a cos φ, b sin φ)`, resampled by arclength.
    pub fn ellipse(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidArgument("ellipse semi-axes must be positive".into()));
        }
        Self::from_parametric(1, n, |p| Vec2::new(a * p.cos(), b * p.sin()))
    }

    /// The curve with support function `s`, resampled by arclength.
    pub fn from_support(s: &SupportGrid, n: usize) -> Result<Self> {
        s.curvature()?;
        let grid = s.grid();
        let coeffs = s.h().spectrum();
        Self::from_parametric(s.omega(), n, |t| {
            let h = grid.eval_series(&coeffs, t, 0);
            let ht = grid.eval_series(&coeffs, t, 1);
            h * Vec2::polar(t) + ht * Vec2::polar(t).perp()
        })
    }

    /// Resamples a smooth closed counter-clockwise curve `c(φ)`, `φ ∈ [0, 2ωπ)`.
    ///
    /// `c` is sampled on the coarsest power-of-two grid whose upper half-band
    /// carries no coefficient above the round-off floor; the curvature is then
    /// interpolated at the arclength nodes and its `u`-derivatives taken
    /// spectrally after discarding round-off-level modes.
    pub fn from_parametric(omega: u32, n: usize, c: impl Fn(f64) -> Vec2) -> Result<Self> {
        let mut m = MIN_FINE;
        let (fine, pts) = loop {
            let fine = PeriodicGrid::new(omega, m)?;
            let pts: Vec<Vec2> = fine.nodes().into_iter().map(&c).collect();
            let resolved = curve_is_resolved(&fine, &pts)?;
            if resolved || m >= MAX_FINE {
                break (fine, pts);
            }
            m *= 2;
        };
        Self::from_samples(&fine, &pts, n)
    }

    fn from_samples(fine: &PeriodicGrid, pts: &[Vec2], n: usize) -> Result<Self> {
        let grid = PeriodicGrid::new(1, n)?;
        let x = GridFunction::new(fine.clone(), pts.iter().map(|p| p.x).collect())?;
        let y = GridFunction::new(fine.clone(), pts.iter().map(|p| p.y).collect())?;
        let [x1, x2] = <[_; 2]>::try_from(x.derivs(&[1, 2])?).expect("two derivatives");
        let [y1, y2] = <[_; 2]>::try_from(y.derivs(&[1, 2])?).expect("two derivatives");
        let speed = x1.zip_map(&y1, f64::hypot)?;
        if let Some((j, &v)) = speed.values().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::DegenerateGraph { sample: j, speed: v });
        }
        let m = fine.n();
        let kv: Vec<f64> = (0..m)
            .map(|j| {
                (x1.values()[j] * y2.values()[j] - y1.values()[j] * x2.values()[j]) / speed.values()[j].powi(3)
            })
            .collect();
        if let Some((j, &v)) = kv.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::NotLocallyConvex {
                node: j,
                theta: fine.node(j),
                margin: v,
            });
        }

        // arclength s(φ) = mean(σ)·φ + P(φ) − P(0), with P' = σ − mean(σ)
        let mean = speed.mean();
        let mut coeffs = speed.spectrum();
        for (j, c) in coeffs.iter_mut().enumerate() {
            *c = if j == 0 || j == m / 2 { Complex64::new(0.0, 0.0) } else { *c / Complex64::new(0.0, fine.wavenumber(j)) };
        }
        let p = GridFunction::new(fine.clone(), fine.inverse(coeffs))?;
        let p0 = p.values()[0];
        let arclength = |phi: f64| mean * phi + p.interpolate(&[phi])[0] - p0;
        let length = mean * fine.period();

        let mut phis = Vec::with_capacity(n);
        for j in 0..n {
            let target = length * j as f64 / n as f64;
            let mut phi = fine.period() * j as f64 / n as f64;
            for _ in 0..50 {
                let step = (arclength(phi) - target) / speed.interpolate(&[phi])[0];
                phi -= step;
                if step.abs() < 1e-15 * (1.0 + phi.abs()) {
                    break;
                }
            }
            phis.push(phi);
        }
        // derivatives summed from the filtered series at the nodes, not
        // differentiated on the grid
        let series = |f: &GridFunction| {
            let mut c = f.spectrum();
            drop_small_modes(&mut c, SERIES_DENOISE);
            c
        };
        let (cx, cy) = (series(&x), series(&y));
        let at = |c: &[Complex64], p: u32| phis.iter().map(|&t| fine.eval_series(c, t, p)).collect::<Vec<f64>>();
        let (xs, ys) = (at(&cx, 0), at(&cy, 0));
        let (x1s, y1s, x2s, y2s) = (at(&cx, 1), at(&cy, 1), at(&cx, 2), at(&cy, 2));
        let kv: Vec<f64> = (0..n)
            .map(|j| (x1s[j] * y2s[j] - y1s[j] * x2s[j]) / x1s[j].hypot(y1s[j]).powi(3))
            .collect();
        let mut base = Self {
            length,
            gamma: (0..n).map(|j| Vec2::new(xs[j], ys[j])).collect(),
            tangent: (0..n).map(|j| Vec2::new(x1s[j], y1s[j]).normalized()).collect(),
            k: Default::default(),
            grid,
        };
        let k = GridFunction::new(base.grid.clone(), kv)?;
        let jet = base.u_derivs_denoised(&k, &[0, 1, 2, 3], JET_DENOISE)?;
        base.k = <[GridFunction; 4]>::try_from(jet).expect("four orders").map(GridFunction::into_values);
        Ok(base)
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid in the normalized parameter `φ = 2πu/L₀`.
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Arclength of sample `j`.
    pub fn u(&self, j: usize) -> f64 {
        self.length * j as f64 / self.n() as f64
    }

    /// `∂_u / ∂_φ = 2π/L₀`.
    pub fn param_scale(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn points(&self) -> &[Vec2] {
        &self.gamma
    }

    pub fn tangents(&self) -> &[Vec2] {
        &self.tangent
    }

    /// Inner unit normal `N₀ = −ν₀`.
    pub fn inner_normal(&self, j: usize) -> Vec2 {
        self.tangent[j].perp()
    }

    /// `(k₀)_{u^p}` samples for `p = 0..=3`.
    pub fn curvature_jet(&self, p: usize) -> &[f64] {
        &self.k[p]
    }

    pub fn max_curvature(&self) -> f64 {
        self.k[0].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_curvature(&self) -> f64 {
        self.k[0].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Derivatives `∂_u^p f` of a function on the base grid.
    pub fn u_derivs(&self, f: &GridFunction, orders: &[u32]) -> Result<Vec<GridFunction>> {
        self.check_grid(f)?;
        Ok(self.scale_derivs(f.derivs(orders)?, orders))
    }

    /// [`u_derivs`](Self::u_derivs) after dropping modes below `rel_tol` of the
    /// largest; see [`GridFunction::derivs_denoised`].
    pub fn u_derivs_denoised(&self, f: &GridFunction, orders: &[u32], rel_tol: f64) -> Result<Vec<GridFunction>> {
        self.check_grid(f)?;
        Ok(self.scale_derivs(f.derivs_denoised(orders, rel_tol)?, orders))
    }

    fn check_grid(&self, f: &GridFunction) -> Result<()> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn scale_derivs(&self, d: Vec<GridFunction>, orders: &[u32]) -> Vec<GridFunction> {
        let scale = self.param_scale();
        d.into_iter()
            .zip(orders)
            .map(|(d, &p)| {
                let c = scale.powi(p as i32);
                d.map(|v| c * v)
            })
            .collect()
    }
}

/// Whether position and inverse speed have a spectral tail (upper half-band)
/// below [`TAIL_TOL`] relative to their largest mode.
///
/// `1/σ` shares the decay rate of the curvature but only involves first
/// derivatives, so its tail is not swamped by differentiation round-off.
fn curve_is_resolved(fine: &PeriodicGrid, pts: &[Vec2]) -> Result<bool> {
    let x = GridFunction::new(fine.clone(), pts.iter().map(|p| p.x).collect())?;
    let y = GridFunction::new(fine.clone(), pts.iter().map(|p| p.y).collect())?;
    let inv_speed = x.deriv(1)?.zip_map(&y.deriv(1)?, |a, b| 1.0 / a.hypot(b))?;
    let m = fine.n();
    Ok([x, y, inv_speed].iter().all(|f| {
        let spec = f.spectrum();
        let top = spec.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (0..m)
            .filter(|&j| fine.mode(j).unsigned_abs() as usize > m / 4)
            .all(|j| spec[j].norm() <= TAIL_TOL * top)
    }))
}

/// Base curve, graph function and frame convention.
#[derive(Clone, Debug)]
pub struct GraphCurveScene {
    base: BaseCurve,
    rho: GridFunction,
    frame: FrameConvention,
}

/// Per-sample values of `k₀` and `ρ` with their `u`-derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet {
    pub k: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub r: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
}

impl Jet {
    /// `1 − k₀ρ`.
    pub fn w(&self) -> f64 {
        1.0 - self.k * self.r
    }
}

impl GraphCurveScene {
    /// Validates `‖ρ‖∞ < min(1/k₀)` and regularity of the composite curve.
    pub fn new(base: BaseCurve, rho: GridFunction, frame: FrameConvention) -> Result<Self> {
        if rho.grid() != base.grid() {
            return Err(Error::GridMismatch);
        }
        let bound = 1.0 / base.max_curvature();
        if !(rho.max_abs() < bound) {
            return Err(Error::InvalidArgument(format!(
                "graph amplitude {:.6e} must stay below min(1/k0) = {bound:.6e}",
                rho.max_abs()
            )));
        }
        let scene = Self { base, rho, frame };
        for (j, jet) in scene.jets()?.iter().enumerate() {
            let speed = jet.w().hypot(jet.r1);
            if !(speed > 1e-12) {
                return Err(Error::DegenerateGraph { sample: j, speed });
            }
        }
        Ok(scene)
    }

    /// Constant graph function `ρ ≡ c`.
    pub fn constant(base: BaseCurve, c: f64, frame: FrameConvention) -> Result<Self> {
        let rho = GridFunction::constant(base.grid(), c);
        Self::new(base, rho, frame)
    }

    pub fn base(&self) -> &BaseCurve {
        &self.base
    }

    pub fn rho(&self) -> &GridFunction {
        &self.rho
    }

    pub fn frame(&self) -> FrameConvention {
        self.frame
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn jets(&self) -> Result<Vec<Jet>> {
        let d = self.base.u_derivs_denoised(&self.rho, &[0, 1, 2, 3, 4], bundle::DIRECT_DENOISE)?;
        let k = &self.base.k;
        Ok((0..self.n())
            .map(|j| Jet {
                k: k[0][j],
                k1: k[1][j],
                k2: k[2][j],
                k3: k[3][j],
                r: d[0].values()[j],
                r1: d[1].values()[j],
                r2: d[2].values()[j],
                r3: d[3].values()[j],
                r4: d[4].values()[j],
            })
            .collect())
    }

    /// Unit vector along which `ρ` displaces sample `j`.
    pub fn displacement_normal(&self, j: usize) -> Vec2 {
        match self.frame {
            FrameConvention::SelfConsistent => self.base.inner_normal(j),
            FrameConvention::Flipped => -self.base.inner_normal(j),
        }
    }

    /// Sampled composite curve.
    pub fn points(&self) -> Vec<Vec2> {
        (0..self.n())
            .map(|j| self.base.gamma[j] + self.rho.values()[j] * self.displacement_normal(j))
            .collect()
    }
}

/// Band-limited random graph functions from a seeded ChaCha8 stream.
///
/// Each draw is `Σ_{m=0}^{M} (α_m cos mφ + β_m sin mφ)` with `α_m, β_m`
/// uniform in `[−1, 1)`, rescaled to `max|ρ| = amplitude`. Draws whose
/// composite curve is not locally convex are rejected and redrawn.
#[derive(Clone, Debug)]
pub struct RhoSampler {
    rng: ChaCha8Rng,
    pub max_mode: usize,
    pub amplitude: f64,
}

impl RhoSampler {
    pub fn new(seed: u64, max_mode: usize, amplitude: f64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            max_mode,
            amplitude,
        }
    }

    fn draw_raw(&mut self, grid: &PeriodicGrid) -> GridFunction {
        let coeffs: Vec<(f64, f64)> = (0..=self.max_mode)
            .map(|_| (self.rng.gen_range(-1.0..1.0), self.rng.gen_range(-1.0..1.0)))
            .collect();
        let f = GridFunction::from_fn(grid, |p| {
            coeffs
                .iter()
                .enumerate()
                .map(|(m, (a, b))| a * (m as f64 * p).cos() + b * (m as f64 * p).sin())
                .sum()
        });
        let scale = self.amplitude / f.max_abs().max(f64::MIN_POSITIVE);
        f.map(|v| v * scale)
    }

    /// Draws a scene over `base` whose composite is regular and locally convex.
    pub fn draw(&mut self, base: &BaseCurve, frame: FrameConvention) -> Result<GraphCurveScene> {
        for _ in 0..100 {
            let rho = self.draw_raw(base.grid());
            let Ok(scene) = GraphCurveScene::new(base.clone(), rho, frame) else {
                continue;
            };
            if build_bundle(&scene)?.uu_n.iter().all(|&a| a > 0.0) {
                return Ok(scene);
            }
        }
        Err(Error::InvalidArgument("no locally convex graph function in 100 draws".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_base() {
        let b = BaseCurve::circle(2.0, 32).unwrap();
        assert!((b.length() - 4.0 * PI).abs() < 1e-15);
        assert!((b.points()[8] - Vec2::new(0.0, 2.0)).norm() < 1e-15);
        assert!((b.inner_normal(0) - Vec2::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ellipse_base_is_arclength_sampled() {
        let (a, b) = (2.0, 1.0);
        let base = BaseCurve::ellipse(a, b, 128).unwrap();
        // 4·E(e) with e² = 3/4
        assert!((base.length() - 9.688448220547675).abs() < 1e-12);
        let pts = base.points();
        let step = base.length() / 128.0;
        for j in 0..128 {
            let chord = (pts[(j + 1) % 128] - pts[j]).norm();
            // chord of an arc of length `step` is shorter by ≈ k²step³/24
            assert!(chord <= step && step - chord < 4.0 * step.powi(3) / 24.0 + 1e-14);
            let p = pts[j];
            assert!(((p.x / a).powi(2) + (p.y / b).powi(2) - 1.0).abs() < 1e-13);
        }
        // curvature at the vertex (a, 0) is a/b²
        assert!((base.curvature_jet(0)[0] - a / (b * b)).abs() < 1e-12);
        assert!(base.curvature_jet(1)[0].abs() < 1e-10);
    }

    #[test]
    fn ellipse_curvature_jet_matches_spectral_derivatives() {
        let base = BaseCurve::ellipse(1.5, 1.0, 64).unwrap();
        let k = GridFunction::new(base.grid().clone(), base.curvature_jet(0).to_vec()).unwrap();
        let d = base.u_derivs(&k, &[1, 2, 3]).unwrap();
        for p in 1..=3 {
            let err = d[p - 1]
                .values()
                .iter()
                .zip(base.curvature_jet(p))
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(err < 1e-9, "p={p} err={err}");
        }
    }

    #[test]
    fn support_base_matches_circle() {
        let s = SupportGrid::from_values(1, vec![1.5; 16]).unwrap();
        let base = BaseCurve::from_support(&s, 32).unwrap();
        assert!((base.length() - 3.0 * PI).abs() < 1e-12);
        assert!(base.curvature_jet(0).iter().all(|k| (k - 1.0 / 1.5).abs() < 1e-12));
    }

    #[test]
    fn scene_guards() {
        let base = BaseCurve::circle(1.0, 16).unwrap();
        assert!(GraphCurveScene::constant(base.clone(), 0.5, FrameConvention::SelfConsistent).is_ok());
        assert!(GraphCurveScene::constant(base, 1.0, FrameConvention::SelfConsistent).is_err());
    }

    #[test]
    fn constant_graph_shrinks_circle() {
        let base = BaseCurve::circle(1.0, 16).unwrap();
        let inward = GraphCurveScene::constant(base.clone(), 0.25, FrameConvention::SelfConsistent).unwrap();
        assert!(inward.points().iter().all(|p| (p.norm() - 0.75).abs() < 1e-15));
        let outward = GraphCurveScene::constant(base, 0.25, FrameConvention::Flipped).unwrap();
        assert!(outward.points().iter().all(|p| (p.norm() - 1.25).abs() < 1e-15));
    }

    #[test]
    fn sampler_is_deterministic() {
        let base = BaseCurve::ellipse(2.0, 1.0, 64).unwrap();
        let mut a = RhoSampler::new(7, 6, 0.02);
        let mut b = RhoSampler::new(7, 6, 0.02);
        let sa = a.draw(&base, FrameConvention::SelfConsistent).unwrap();
        let sb = b.draw(&base, FrameConvention::SelfConsistent).unwrap();
        assert_eq!(sa.rho(), sb.rho());
        assert!((sa.rho().max_abs() - 0.02).abs() < 1e-15);
    }
}
