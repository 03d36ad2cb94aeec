//! Support-function description of locally convex closed curves.
//!
//! With `u = (cos θ, sin θ)` the outward normal and `u⊥` its left rotation,
//! a curve with support function `h` is `γ = h·u + h_θ·u⊥`, its tangent is
//! `u⊥` and its radius of curvature is `h_θθ + h`.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::spectral::{planner, GridFunction, PeriodicGrid};

/// Relative convexity threshold: valid states need `min(h_θθ + h) > GUARD · mean(h)`.
pub const CONVEXITY_GUARD: f64 = 1e-10;

/// Samples of a positive, strictly locally convex support function.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportGrid {
    h: GridFunction,
}

impl SupportGrid {
    pub fn new(h: GridFunction) -> Result<Self> {
        if let Some((node, &value)) = h.values().iter().enumerate().find(|(_, &v)| v <= 0.0) {
            return Err(Error::NonPositiveSupport { node, value });
        }
        let s = Self { h };
        s.check_convex()?;
        Ok(s)
    }

    pub fn from_values(omega: u32, values: Vec<f64>) -> Result<Self> {
        let grid = PeriodicGrid::new(omega, values.len())?;
        Self::new(GridFunction::new(grid, values)?)
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = GridFunction::from_fn(grid, f);
        if let Some(node) = h.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node });
        }
        Self::new(h)
    }

    /// Wraps samples without validation; callers check the margin themselves.
    pub(crate) fn new_unchecked(h: GridFunction) -> Self {
        Self { h }
    }

    pub fn h(&self) -> &GridFunction {
        &self.h
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.h.grid()
    }

    pub fn omega(&self) -> u32 {
        self.grid().omega()
    }

    pub fn n(&self) -> usize {
        self.grid().n()
    }

    pub fn into_inner(self) -> GridFunction {
        self.h
    }

    /// Radius of curvature `h_θθ + h` without any validity check.
    pub fn radius_of_curvature(&self) -> GridFunction {
        let h2 = self.h.deriv(2).expect("order 2 is supported");
        GridFunction::from_raw(
            self.grid().clone(),
            h2.values().iter().zip(self.h.values()).map(|(a, b)| a + b).collect(),
        )
    }

    /// `min(h_θθ + h)`; non-positive for states that are not locally convex.
    pub fn convexity_margin(&self) -> f64 {
        self.radius_of_curvature().min()
    }

    fn guard_threshold(&self) -> f64 {
        CONVEXITY_GUARD * self.h.mean().abs()
    }

    fn check_convex(&self) -> Result<GridFunction> {
        let radius = self.radius_of_curvature();
        let (node, margin) = radius.argmin();
        if !(margin > self.guard_threshold()) {
            return Err(Error::NotLocallyConvex {
                node,
                theta: self.grid().node(node),
                margin,
            });
        }
        Ok(radius)
    }

    /// `k = 1/(h_θθ + h)`.
    pub fn curvature(&self) -> Result<GridFunction> {
        Ok(self.check_convex()?.map(|r| 1.0 / r))
    }

    /// Curve points `h·u + h_θ·u⊥` at the grid angles.
    pub fn reconstruct(&self) -> Result<CurveSample> {
        self.check_convex()?;
        let ht = self.h.deriv(1)?;
        let thetas = self.grid().nodes();
        let mut points = Vec::with_capacity(thetas.len());
        let mut tangents = Vec::with_capacity(thetas.len());
        for (j, &theta) in thetas.iter().enumerate() {
            let u = Vec2::polar(theta);
            points.push(self.h.values()[j] * u + ht.values()[j] * u.perp());
            tangents.push(u.perp());
        }
        Ok(CurveSample {
            points,
            tangents,
            thetas,
        })
    }

    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Self::new(self.h.map(|v| lambda * v))
    }

    /// Support function of the curve translated by `(a, b)`.
    pub fn translated(&self, a: f64, b: f64) -> Result<Self> {
        let shift = GridFunction::from_fn(self.grid(), |t| a * t.cos() + b * t.sin());
        Self::new(self.h.zip_map(&shift, |x, y| x + y)?)
    }
}

/// Points, unit tangents and tangent angles of a locally convex curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSample {
    pub points: Vec<Vec2>,
    pub tangents: Vec<Vec2>,
    pub thetas: Vec<f64>,
}

impl CurveSample {
    pub fn new(points: Vec<Vec2>, tangents: Vec<Vec2>, thetas: Vec<f64>) -> Result<Self> {
        let m = points.len();
        if tangents.len() != m || thetas.len() != m {
            return Err(Error::Ingestion("points, tangents and thetas differ in length".into()));
        }
        if let Some(j) = tangents.iter().position(|t| (t.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Ingestion(format!("tangent {j} is not a unit vector")));
        }
        if thetas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Ingestion("tangent angles are not strictly increasing".into()));
        }
        Ok(Self {
            points,
            tangents,
            thetas,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How raw point data is turned into a support function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IngestMode {
    /// Invert the tangent angle of the trigonometric interpolant through the points.
    Immersed,
    /// `h(θ) = max_i ⟨p_i, u(θ)⟩` over a convex polygon containing the origin.
    Embedded,
}

/// Trigonometric interpolant of a closed polyline in its index parameter `τ ∈ [0, 2π)`.
struct ClosedInterpolant {
    coeffs: Vec<Complex64>,
}

impl ClosedInterpolant {
    fn new(points: &[Vec2]) -> Self {
        let m = points.len();
        let mut buf: Vec<Complex64> = points.iter().map(|p| Complex64::new(p.x, p.y)).collect();
        let fft = planner().lock().unwrap_or_else(|e| e.into_inner()).plan_fft_forward(m);
        fft.process(&mut buf);
        let scale = 1.0 / m as f64;
        for c in &mut buf {
            *c *= scale;
        }
        Self { coeffs: buf }
    }

    fn eval(&self, tau: f64, order: u32) -> Vec2 {
        let m = self.coeffs.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = if 2 * j < m { j as i64 } else { j as i64 - m as i64 };
            if m.is_multiple_of(2) && 2 * j == m {
                let nyq = (m / 2) as f64;
                let phase = nyq * tau + order as f64 * PI / 2.0;
                acc += c * nyq.powi(order as i32) * phase.cos();
                continue;
            }
            let kf = k as f64;
            acc += c * Complex64::new(0.0, kf).powu(order) * Complex64::from_polar(1.0, kf * tau);
        }
        Vec2::new(acc.re, acc.im)
    }

    fn param(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.coeffs.len() as f64
    }
}

/// Outward-normal angle of a tangent direction: `t = u⊥(θ)`.
fn normal_angle(t: Vec2) -> f64 {
    t.y.atan2(t.x) - PI / 2.0
}

/// Resamples a closed curve given as points onto the uniform θ-grid.
pub fn support_from_points(points: &[Vec2], omega: u32, n: usize, mode: IngestMode) -> Result<SupportGrid> {
    if points.len() < 5 {
        return Err(Error::Ingestion(format!("need at least 5 points, got {}", points.len())));
    }
    if let Some(j) = points.iter().position(|p| !p.is_finite()) {
        return Err(Error::Ingestion(format!("point {j} is not finite")));
    }
    let grid = PeriodicGrid::new(omega, n)?;
    match mode {
        IngestMode::Immersed => immersed_support(points, &grid),
        IngestMode::Embedded => embedded_support(points, &grid),
    }
}

/// Resamples a [`CurveSample`]; ω is read off the total tangent turning.
pub fn support_from_sample(sample: &CurveSample, n: usize) -> Result<SupportGrid> {
    let m = sample.len();
    if m < 5 {
        return Err(Error::Ingestion(format!("need at least 5 points, got {m}")));
    }
    // the last-to-first gap closes the curve; estimate it from the mean spacing
    let span = sample.thetas[m - 1] - sample.thetas[0];
    let turning = span * m as f64 / (m - 1) as f64;
    let omega = (turning / (2.0 * PI)).round();
    if omega < 1.0 {
        return Err(Error::Ingestion("tangent angle turns less than once".into()));
    }
    support_from_points(&sample.points, omega as u32, n, IngestMode::Immersed)
}

fn immersed_support(points: &[Vec2], grid: &PeriodicGrid) -> Result<SupportGrid> {
    let mut interp = ClosedInterpolant::new(points);
    let m = points.len();
    let mut angles = unwrapped_angles(&interp, m);
    let mut turning = angles[m] - angles[0];
    if turning < 0.0 {
        let reversed: Vec<Vec2> = points.iter().rev().copied().collect();
        interp = ClosedInterpolant::new(&reversed);
        angles = unwrapped_angles(&interp, m);
        turning = angles[m] - angles[0];
    }
    let period = grid.period();
    if (turning - period).abs() > 1e-6 * period {
        return Err(Error::Ingestion(format!(
            "tangent turning is {:.6}·2π, expected winding number {}",
            turning / (2.0 * PI),
            grid.omega()
        )));
    }
    if let Some(l) = angles.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Ingestion(format!("tangent angle is not increasing at point {l}")));
    }
    if let Some(l) = angles.windows(2).position(|w| w[1] - w[0] >= PI / 2.0) {
        return Err(Error::Ingestion(format!("tangent turns too fast at point {l}; sample more densely")));
    }

    let theta0 = angles[0];
    let mut values = Vec::with_capacity(grid.n());
    let mut bracket = 0usize;
    for j in 0..grid.n() {
        let target = theta0 + (grid.node(j) - theta0).rem_euclid(period);
        while bracket + 1 < m && angles[bracket + 1] <= target {
            bracket += 1;
        }
        // targets wrap once; restart the scan when they do
        if angles[bracket] > target {
            bracket = 0;
            while bracket + 1 < m && angles[bracket + 1] <= target {
                bracket += 1;
            }
        }
        let u = Vec2::polar(grid.node(j));
        let tau = solve_tangency(&interp, u, bracket, &angles, target)?;
        values.push(interp.eval(tau, 0).dot(u));
    }
    SupportGrid::new(GridFunction::new(grid.clone(), values)?)
}

fn unwrapped_angles(interp: &ClosedInterpolant, m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut prev = normal_angle(interp.eval(0.0, 1));
    out.push(prev);
    for l in 1..=m {
        let raw = normal_angle(interp.eval(interp.param(l), 1));
        let mut next = raw + 2.0 * PI * ((prev - raw) / (2.0 * PI)).round();
        while next - prev > PI {
            next -= 2.0 * PI;
        }
        while next - prev < -PI {
            next += 2.0 * PI;
        }
        out.push(next);
        prev = next;
    }
    out
}

/// Finds τ in the bracket with `⟨γ'(τ), u⟩ = 0` by safeguarded Newton.
fn solve_tangency(interp: &ClosedInterpolant, u: Vec2, bracket: usize, angles: &[f64], target: f64) -> Result<f64> {
    let mut lo = interp.param(bracket);
    let mut hi = interp.param(bracket + 1);
    let frac = (target - angles[bracket]) / (angles[bracket + 1] - angles[bracket]);
    let mut tau = lo + frac * (hi - lo);
    // g > 0 before the tangency and < 0 after it
    let g = |t: f64| interp.eval(t, 1).dot(u);
    for _ in 0..60 {
        let val = g(tau);
        if val.abs() <= 1e-15 * interp.eval(tau, 1).norm() {
            return Ok(tau);
        }
        if val > 0.0 {
            lo = tau;
        } else {
            hi = tau;
        }
        let slope = interp.eval(tau, 2).dot(u);
        let newton = tau - val / slope;
        let next = if slope < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - tau).abs() <= 1e-15 * (1.0 + tau.abs()) || hi - lo <= 1e-15 {
            return Ok(next);
        }
        tau = next;
    }
    Err(Error::Ingestion(format!("tangency search did not converge near τ = {tau:.6}")))
}

fn signed_area(points: &[Vec2]) -> f64 {
    let m = points.len();
    0.5 * (0..m).map(|i| points[i].cross(points[(i + 1) % m])).sum::<f64>()
}

fn area_centroid(points: &[Vec2]) -> Vec2 {
    let m = points.len();
    let a = signed_area(points);
    let mut c = Vec2::default();
    for i in 0..m {
        let (p, q) = (points[i], points[(i + 1) % m]);
        c += (p + q) * p.cross(q);
    }
    c * (1.0 / (6.0 * a))
}

fn embedded_support(points: &[Vec2], grid: &PeriodicGrid) -> Result<SupportGrid> {
    if grid.omega() != 1 {
        return Err(Error::Ingestion("embedded ingestion requires winding number 1".into()));
    }
    let mut poly: Vec<Vec2> = points.to_vec();
    if signed_area(&poly) < 0.0 {
        poly.reverse();
    }
    let m = poly.len();
    let scale = poly.iter().fold(0.0f64, |s, p| s.max(p.norm()));
    let mut turning = 0.0;
    for i in 0..m {
        let e0 = poly[(i + 1) % m] - poly[i];
        let e1 = poly[(i + 2) % m] - poly[(i + 1) % m];
        if e0.norm() <= 1e-14 * scale {
            return Err(Error::Ingestion(format!("repeated point at index {}", (i + 1) % m)));
        }
        if e0.cross(e1) < -1e-12 * e0.norm() * e1.norm() {
            return Err(Error::Ingestion(format!("polygon is not convex at vertex {}", (i + 1) % m)));
        }
        turning += e0.cross(e1).atan2(e0.dot(e1));
    }
    if (turning - 2.0 * PI).abs() > 1e-6 {
        return Err(Error::Ingestion("polygon is not simple (turns more than once)".into()));
    }
    let contains_origin = (0..m).all(|i| poly[i].cross(poly[(i + 1) % m]) > 0.0);
    if !contains_origin {
        let c = area_centroid(&poly);
        for p in &mut poly {
            *p = *p - c;
        }
    }
    let values = grid
        .nodes()
        .iter()
        .map(|&t| {
            let u = Vec2::polar(t);
            poly.iter().fold(f64::NEG_INFINITY, |s, p| s.max(p.dot(u)))
        })
        .collect();
    SupportGrid::new(GridFunction::new(grid.clone(), values)?)
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Reads "x y" pairs, one per line; `#` lines are comments.
pub fn read_curve_file(path: impl AsRef<Path>) -> Result<Vec<Vec2>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    data_lines(&text)
        .map(|(lineno, line)| {
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) if x.is_finite() && y.is_finite() => Ok(Vec2::new(x, y)),
                _ => Err(parse_err(path, format!("line {lineno}: expected two finite numbers"))),
            }
        })
        .collect()
}

pub fn write_curve_file(path: impl AsRef<Path>, points: &[Vec2]) -> Result<()> {
    let mut out = String::with_capacity(points.len() * 48);
    for p in points {
        out.push_str(&format!("{:.16e} {:.16e}\n", p.x, p.y));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

/// Reads one h value per line; `#` lines are skipped.
pub fn read_support_file(path: impl AsRef<Path>, omega: u32, n: Option<usize>) -> Result<SupportGrid> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let values = data_lines(&text)
        .map(|(lineno, line)| {
            line.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(path, format!("line {lineno}: expected one finite number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some(n) = n {
        if values.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
    }
    SupportGrid::from_values(omega, values)
}

pub fn write_support_file(path: impl AsRef<Path>, s: &SupportGrid) -> Result<()> {
    let mut out = String::with_capacity(s.n() * 24);
    for v in s.h().values() {
        out.push_str(&format!("{v:.16e}\n"));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}
