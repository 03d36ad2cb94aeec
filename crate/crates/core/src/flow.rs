//! Time integration of the entropy flow `h_t = k_θθ + k` and its rescalings.
//!
//! Two rescaled right-hand sides are provided. `RescaledChainrule` is
//! `k_θθ + k − 4ω²π²h`, obtained from `h^η = h/φ` with
//! `φ = sqrt(L₀² + 8ω²π²t)` and `∂_{t^η} = φ²∂_t`; its constant fixed point is
//! `h ≡ 1/(2ωπ)`. `RescaledPaper` is the literal `k_θθ + k − h`.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::spectral::{GridFunction, PeriodicGrid};
use crate::support::SupportGrid;

/// Real-axis stability limit of classical RK4, rounded down.
pub const RK4_STABILITY: f64 = 2.7;

/// Rejected steps are retried with halved dt at most this many times.
pub const MAX_HALVINGS: u32 = 40;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowVariant {
    #[default]
    Unscaled,
    RescaledChainrule,
    RescaledPaper,
}

impl FlowVariant {
    pub const ALL: [FlowVariant; 3] = [Self::Unscaled, Self::RescaledChainrule, Self::RescaledPaper];

    pub fn is_rescaled(self) -> bool {
        self != Self::Unscaled
    }

    /// Coefficient `c` of the `−c·h` term in the right-hand side.
    pub fn linear_coeff(self, omega: u32) -> f64 {
        match self {
            Self::Unscaled => 0.0,
            Self::RescaledChainrule => 4.0 * (omega as f64 * PI).powi(2),
            Self::RescaledPaper => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Unscaled => "unscaled",
            Self::RescaledChainrule => "rescaled_chainrule",
            Self::RescaledPaper => "rescaled_paper",
        }
    }
}

impl fmt::Display for FlowVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FlowVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown flow variant '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ExplicitRk4,
    SemiImplicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepperConfig {
    /// First step size; later steps grow by 2× per accepted step up to `max_dt`.
    pub dt_init: f64,
    /// Multiplier on the RK4 stability estimate.
    pub safety: f64,
    pub max_dt: f64,
    /// A step is rejected when the convexity margin drops below this fraction of its previous value.
    pub guard_ratio: f64,
    pub scheme: Scheme,
    /// Semi-implicit shift is `stabilization_coeff · max(k)²`.
    pub stabilization_coeff: f64,
    /// Fraction of modes kept in `k` before differentiating; 1 disables dealiasing.
    pub dealias: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt_init: 1e-3,
            safety: 0.9,
            max_dt: 1e-2,
            guard_ratio: 0.2,
            scheme: Scheme::ExplicitRk4,
            stabilization_coeff: 1.0,
            dealias: 1.0,
        }
    }
}

impl StepperConfig {
    pub fn semi_implicit(max_dt: f64) -> Self {
        Self {
            dt_init: max_dt,
            max_dt,
            scheme: Scheme::SemiImplicit,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("stepper: {what}")));
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return bad("dt_init must be positive");
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return bad("safety must lie in (0, 1]");
        }
        if !(self.max_dt > 0.0 && self.max_dt.is_finite()) {
            return bad("max_dt must be positive");
        }
        if !(self.guard_ratio > 0.0 && self.guard_ratio < 1.0) {
            return bad("guard_ratio must lie in (0, 1)");
        }
        if !(self.stabilization_coeff >= 0.0 && self.stabilization_coeff.is_finite()) {
            return bad("stabilization_coeff must be non-negative");
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            return bad("dealias must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub support: SupportGrid,
    /// Unscaled `t`, or `t^η` for rescaled variants.
    pub time: f64,
    pub variant: FlowVariant,
}

impl FlowState {
    pub fn new(support: SupportGrid, variant: FlowVariant) -> Self {
        Self {
            support,
            time: 0.0,
            variant,
        }
    }

    pub fn h(&self) -> &GridFunction {
        self.support.h()
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.support.grid()
    }
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub states: Vec<FlowState>,
    pub records: Vec<DiagnosticsRecord>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&FlowState> {
        self.states.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }
}

/// Velocity of `h` with the variant's linear term; `Err(margin)` when `h` is not convex.
fn velocity(h: &GridFunction, lin: f64, dealias: f64) -> std::result::Result<(GridFunction, f64), f64> {
    let radius = SupportGrid::new_unchecked(h.clone()).radius_of_curvature();
    let margin = radius.min();
    if !(margin > 0.0) {
        return Err(margin);
    }
    let mut k = radius.map(|r| 1.0 / r);
    if dealias < 1.0 {
        k = k.lowpass(dealias).expect("dealias fraction validated");
    }
    let kmax = k.max();
    let ktt = k.deriv(2).expect("order 2 is supported");
    let values = ktt
        .values()
        .iter()
        .zip(k.values())
        .zip(h.values())
        .map(|((a, b), c)| a + b - lin * c)
        .collect();
    Ok((GridFunction::from_raw(h.grid().clone(), values), kmax))
}

/// Right-hand side of the given variant.
pub fn rhs(s: &SupportGrid, variant: FlowVariant) -> Result<GridFunction> {
    let k = s.curvature()?;
    let ktt = k.deriv(2)?;
    let lin = variant.linear_coeff(s.omega());
    ktt.zip_map(&k, |a, b| a + b)?
        .zip_map(s.h(), |f, h| f - lin * h)
}

/// `F = k_θθ + k`.
pub fn rhs_unscaled(s: &SupportGrid) -> Result<GridFunction> {
    rhs(s, FlowVariant::Unscaled)
}

pub fn rhs_rescaled(s: &SupportGrid, variant: FlowVariant) -> Result<GridFunction> {
    if !variant.is_rescaled() {
        return Err(Error::InvalidArgument("rhs_rescaled needs a rescaled variant".into()));
    }
    rhs(s, variant)
}

/// RK4 step-size bound `safety·2.7/(max(k)²·ξ_max⁴ + lin)`.
pub fn stable_dt(s: &SupportGrid, variant: FlowVariant, cfg: &StepperConfig) -> Result<f64> {
    let kmax = s.curvature()?.max();
    Ok(stable_dt_for(kmax, s.grid(), variant, cfg))
}

fn stable_dt_for(kmax: f64, grid: &PeriodicGrid, variant: FlowVariant, cfg: &StepperConfig) -> f64 {
    let xi = grid.max_wavenumber();
    let lin = variant.linear_coeff(grid.omega());
    cfg.safety * RK4_STABILITY / (kmax * kmax * xi.powi(4) + lin)
}

fn axpy(a: f64, x: &GridFunction, y: &GridFunction) -> GridFunction {
    GridFunction::from_raw(
        y.grid().clone(),
        x.values().iter().zip(y.values()).map(|(p, q)| q + a * p).collect(),
    )
}

/// One step of size `dt`; fails with [`Error::StepRejected`] if the guard trips.
pub fn step(state: &FlowState, dt: f64, cfg: &StepperConfig) -> Result<FlowState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {dt}")));
    }
    // validates the incoming state
    state.support.curvature()?;
    let h = state.h();
    let lin = state.variant.linear_coeff(state.support.omega());
    let before = state.support.convexity_margin();
    let reject = |margin: f64| Error::StepRejected { margin, before };

    let next = match cfg.scheme {
        Scheme::ExplicitRk4 => {
            let (k1, _) = velocity(h, lin, cfg.dealias).map_err(reject)?;
            let (k2, _) = velocity(&axpy(0.5 * dt, &k1, h), lin, cfg.dealias).map_err(reject)?;
            let (k3, _) = velocity(&axpy(0.5 * dt, &k2, h), lin, cfg.dealias).map_err(reject)?;
            let (k4, _) = velocity(&axpy(dt, &k3, h), lin, cfg.dealias).map_err(reject)?;
            let values = (0..h.values().len())
                .map(|j| {
                    h.values()[j]
                        + dt / 6.0
                            * (k1.values()[j] + 2.0 * k2.values()[j] + 2.0 * k3.values()[j] + k4.values()[j])
                })
                .collect();
            GridFunction::from_raw(h.grid().clone(), values)
        }
        Scheme::SemiImplicit => {
            let (f, kmax) = velocity(h, lin, cfg.dealias).map_err(reject)?;
            let c = cfg.stabilization_coeff * kmax * kmax;
            let grid = h.grid();
            let h_hat = h.spectrum();
            let mut f_hat = f.spectrum();
            for (j, fh) in f_hat.iter_mut().enumerate() {
                let shift = dt * c * grid.wavenumber(j).powi(4);
                *fh = (h_hat[j] + dt * *fh + shift * h_hat[j]) / (1.0 + shift);
            }
            GridFunction::from_raw(grid.clone(), grid.inverse(f_hat))
        }
    };

    if next.values().iter().any(|v| !v.is_finite()) {
        return Err(reject(f64::NAN));
    }
    let candidate = SupportGrid::new_unchecked(next);
    let after = candidate.convexity_margin();
    if !(after >= cfg.guard_ratio * before) {
        return Err(reject(after));
    }
    if let Some((node, &value)) = candidate.h().values().iter().enumerate().find(|(_, &v)| v <= 0.0) {
        return Err(Error::NonPositiveSupport { node, value });
    }
    Ok(FlowState {
        support: candidate,
        time: state.time + dt,
        variant: state.variant,
    })
}

/// Advances to `t_end`, recording a snapshot every `monitor_every` and at `t_end`.
pub fn evolve(state: &FlowState, t_end: f64, cfg: &StepperConfig, monitor_every: f64) -> Result<Trajectory> {
    evolve_with(state, t_end, cfg, monitor_every, |_, _| {})
}

/// [`evolve`] with a callback invoked on every recorded snapshot.
pub fn evolve_with(
    state: &FlowState,
    t_end: f64,
    cfg: &StepperConfig,
    monitor_every: f64,
    on_record: impl FnMut(&FlowState, &DiagnosticsRecord),
) -> Result<Trajectory> {
    if !(monitor_every > 0.0) {
        return Err(Error::InvalidArgument("monitor_every must be positive".into()));
    }
    let times = record_times(state.time, t_end, monitor_every, None)?;
    evolve_at(state, &times, cfg, on_record)
}

/// Record times `t0 + i·every` up to `t_end`, with `t_end` always included.
///
/// With `layer = Some(ratio)`, the records start at `t0 + 1e-4·every` and grow
/// geometrically by `ratio` until their spacing reaches `every`; uniform
/// multiples of `every` follow. Difference quotients then resolve the initial
/// smoothing layer, whose time scale is proportional to `t − t0`.
pub fn record_times(t0: f64, t_end: f64, every: f64, layer: Option<f64>) -> Result<Vec<f64>> {
    if !(every > 0.0 && every.is_finite()) {
        return Err(Error::InvalidArgument("record spacing must be positive".into()));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must exceed the start time {t0}")));
    }
    let mut times = Vec::new();
    let mut i = 1u64;
    if let Some(ratio) = layer {
        if !(ratio > 1.0) {
            return Err(Error::InvalidArgument("layer ratio must exceed 1".into()));
        }
        let mut dt = 1e-4 * every;
        let mut last = 0.0;
        while dt * (ratio - 1.0) < every && t0 + dt < t_end {
            times.push(t0 + dt);
            last = dt;
            dt *= ratio;
        }
        i = (last / every).floor() as u64 + 1;
    }
    loop {
        let t = (t0 + i as f64 * every).min(t_end);
        times.push(t);
        if t >= t_end {
            break;
        }
        i += 1;
    }
    Ok(times)
}

/// Advances through the increasing `times`, recording a snapshot at the
/// start and at each listed time.
pub fn evolve_at(
    state: &FlowState,
    times: &[f64],
    cfg: &StepperConfig,
    mut on_record: impl FnMut(&FlowState, &DiagnosticsRecord),
) -> Result<Trajectory> {
    cfg.validate()?;
    let mut prev = state.time;
    for &t in times {
        if !(t > prev && t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "record times must increase from {}; got {t} after {prev}",
                state.time
            )));
        }
        prev = t;
    }
    if times.is_empty() {
        return Err(Error::InvalidArgument("no record times".into()));
    }
    state.support.curvature()?;

    let mut traj = Trajectory::default();
    let first = diagnostics::record(state, 0.0)?;
    on_record(state, &first);
    traj.states.push(state.clone());
    traj.records.push(first);

    let mut current = state.clone();
    let mut dt_cap = cfg.dt_init.min(cfg.max_dt);
    let mut out_index = 0usize;
    let mut halvings = 0u32;
    while out_index < times.len() {
        let next_out = times[out_index];
        let remaining = next_out - current.time;
        let mut dt = dt_cap.min(cfg.max_dt);
        if cfg.scheme == Scheme::ExplicitRk4 {
            let kmax = current.support.curvature()?.max();
            dt = dt.min(stable_dt_for(kmax, current.grid(), current.variant, cfg));
        }
        let lands = dt >= remaining * (1.0 - 1e-12);
        if lands {
            dt = remaining;
        }
        match step(&current, dt, cfg) {
            Ok(mut next) => {
                halvings = 0;
                dt_cap = (2.0 * dt_cap).min(cfg.max_dt);
                if lands {
                    next.time = next_out;
                    let rec = diagnostics::record(&next, dt)?;
                    on_record(&next, &rec);
                    traj.states.push(next.clone());
                    traj.records.push(rec);
                    out_index += 1;
                }
                current = next;
            }
            Err(Error::StepRejected { .. }) => {
                halvings += 1;
                if halvings > MAX_HALVINGS {
                    return Err(Error::FlowBreakdown {
                        state: Box::new(current),
                        halvings: MAX_HALVINGS,
                    });
                }
                dt_cap = 0.5 * dt;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(traj)
}

/// `φ(t) = sqrt(L₀² + 8ω²π²t)`.
pub fn phi(t: f64, l0: f64, omega: u32) -> f64 {
    (l0 * l0 + 8.0 * (omega as f64 * PI).powi(2) * t).sqrt()
}

/// `t^η(t) = ln(1 + 8ω²π²t/L₀²)/(8ω²π²)`.
pub fn rescaled_time(t: f64, l0: f64, omega: u32) -> f64 {
    let a = 8.0 * (omega as f64 * PI).powi(2);
    (a * t / (l0 * l0)).ln_1p() / a
}

/// Inverse of [`rescaled_time`].
pub fn unscaled_time(t_eta: f64, l0: f64, omega: u32) -> f64 {
    let a = 8.0 * (omega as f64 * PI).powi(2);
    (a * t_eta).exp_m1() * l0 * l0 / a
}

/// Maps an unscaled trajectory to `(h/φ(t), t^η(t))`.
pub fn rescale_trajectory(tr: &Trajectory, l0: f64) -> Result<Trajectory> {
    if !(l0 > 0.0) {
        return Err(Error::InvalidArgument("initial length must be positive".into()));
    }
    let mut out = Trajectory::default();
    for (i, s) in tr.states.iter().enumerate() {
        if s.variant != FlowVariant::Unscaled {
            return Err(Error::InvalidArgument("rescale_trajectory expects an unscaled run".into()));
        }
        let omega = s.support.omega();
        let p = phi(s.time, l0, omega);
        let state = FlowState {
            support: SupportGrid::new(s.h().map(|v| v / p))?,
            time: rescaled_time(s.time, l0, omega),
            variant: FlowVariant::RescaledChainrule,
        };
        let dt = tr.records.get(i).map_or(0.0, |r| r.dt_used / (p * p));
        out.records.push(diagnostics::record(&state, dt)?);
        out.states.push(state);
    }
    Ok(out)
}

pub fn write_snapshot(path: impl AsRef<Path>, state: &FlowState) -> Result<()> {
    let mut out = format!(
        "# omega={}\n# n={}\n# t={:.16e}\n# variant={}\n",
        state.support.omega(),
        state.support.n(),
        state.time,
        state.variant
    );
    for v in state.h().values() {
        out.push_str(&format!("{v:.16e}\n"));
    }
    fs::File::create(path)?.write_all(out.as_bytes())?;
    Ok(())
}

pub fn read_snapshot(path: impl AsRef<Path>) -> Result<FlowState> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let perr = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let (mut omega, mut n, mut t, mut variant) = (None, None, None, None);
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((key, val)) = rest.trim().split_once('=') {
                let val = val.trim();
                let bad = || perr(format!("line {}: bad value for {key}", i + 1));
                match key.trim() {
                    "omega" => omega = Some(val.parse::<u32>().map_err(|_| bad())?),
                    "n" => n = Some(val.parse::<usize>().map_err(|_| bad())?),
                    "t" => t = Some(val.parse::<f64>().map_err(|_| bad())?),
                    "variant" => variant = Some(val.parse::<FlowVariant>().map_err(|_| bad())?),
                    _ => {}
                }
            }
            continue;
        }
        values.push(
            line.parse::<f64>()
                .map_err(|_| perr(format!("line {}: expected a number", i + 1)))?,
        );
    }
    let omega = omega.ok_or_else(|| perr("missing '# omega=' header".into()))?;
    if let Some(n) = n {
        if n != values.len() {
            return Err(Error::LengthMismatch {
                expected: n,
                got: values.len(),
            });
        }
    }
    Ok(FlowState {
        support: SupportGrid::from_values(omega, values)?,
        time: t.unwrap_or(0.0),
        variant: variant.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn support(omega: u32, n: usize, f: impl Fn(f64) -> f64) -> SupportGrid {
        SupportGrid::from_fn(&PeriodicGrid::new(omega, n).unwrap(), f).unwrap()
    }

    fn assert_const(f: &GridFunction, c: f64, tol: f64) {
        for v in f.values() {
            assert!((v - c).abs() <= tol, "{v} vs {c}");
        }
    }

    #[test]
    fn rhs_examples() {
        assert_const(&rhs_unscaled(&support(1, 16, |_| 2.0)).unwrap(), 0.5, 1e-15);
        assert_const(&rhs_unscaled(&support(1, 16, |t| 2.0 + 0.1 * t.cos())).unwrap(), 0.5, 1e-14);
        let f = rhs_unscaled(&support(1, 128, |t| 1.0 + 0.2 * (2.0 * t).cos())).unwrap();
        // round-off of h_θθ is amplified by the second k-derivative: ε·ξ⁴ ≈ 4e-9
        assert!((f.values()[0] + 12.5).abs() < 1e-8, "{}", f.values()[0]);
    }

    #[test]
    fn rescaled_rhs_examples() {
        let fixed = support(1, 16, |_| 1.0 / (2.0 * PI));
        assert_const(&rhs_rescaled(&fixed, FlowVariant::RescaledChainrule).unwrap(), 0.0, 1e-13);
        let fixed2 = support(3, 16, |_| 1.0 / (6.0 * PI));
        assert_const(&rhs_rescaled(&fixed2, FlowVariant::RescaledChainrule).unwrap(), 0.0, 1e-12);
        let one = support(1, 16, |_| 1.0);
        assert_const(&rhs_rescaled(&one, FlowVariant::RescaledPaper).unwrap(), 0.0, 1e-15);
        assert_const(
            &rhs_rescaled(&one, FlowVariant::RescaledChainrule).unwrap(),
            1.0 - 4.0 * PI * PI,
            1e-13,
        );
        assert!(rhs_rescaled(&one, FlowVariant::Unscaled).is_err());
    }

    #[test]
    fn single_rk4_step_on_circle() {
        let state = FlowState::new(support(1, 16, |_| 1.0), FlowVariant::Unscaled);
        let next = step(&state, 1e-3, &StepperConfig::default()).unwrap();
        assert_eq!(next.time, 1e-3);
        assert_const(next.h(), (1.0f64 + 2e-3).sqrt(), 1e-14);
    }

    #[test]
    fn step_rejects_invalid_input() {
        let g = PeriodicGrid::new(1, 16).unwrap();
        let bad = SupportGrid::new_unchecked(GridFunction::from_fn(&g, |t| 1.0 + 0.8 * (2.0 * t).cos()));
        let state = FlowState::new(bad, FlowVariant::Unscaled);
        assert!(matches!(
            step(&state, 1e-3, &StepperConfig::default()),
            Err(Error::NotLocallyConvex { .. })
        ));
    }

    #[test]
    fn oversized_step_is_rejected() {
        let state = FlowState::new(support(1, 64, |t| 1.0 + 0.2 * (2.0 * t).cos()), FlowVariant::Unscaled);
        let err = step(&state, 1e-2, &StepperConfig::default()).unwrap_err();
        assert!(matches!(err, Error::StepRejected { .. }), "{err:?}");
    }

    #[test]
    fn circle_law() {
        let state = FlowState::new(support(1, 32, |_| 1.0), FlowVariant::Unscaled);
        let tr = evolve(&state, 1.5, &StepperConfig::default(), 0.5).unwrap();
        assert_eq!(tr.times(), vec![0.0, 0.5, 1.0, 1.5]);
        assert_const(tr.last().unwrap().h(), 2.0, 1e-8);
    }

    #[test]
    fn semi_implicit_circle() {
        // the shift vanishes on constants, so this is forward Euler on h' = 1/h
        let state = FlowState::new(support(1, 16, |_| 1.0), FlowVariant::Unscaled);
        let next = step(&state, 0.01, &StepperConfig::semi_implicit(0.01)).unwrap();
        assert_const(next.h(), 1.01, 1e-14);
    }

    #[test]
    fn rescaled_time_examples() {
        let l0 = 2.0 * PI;
        assert_eq!(rescaled_time(0.0, l0, 1), 0.0);
        let t = ((8.0 * PI * PI).exp() - 1.0) / 2.0;
        assert!((rescaled_time(t, l0, 1) - 1.0).abs() < 1e-12);
        assert!((unscaled_time(0.3, 3.0, 2) - (0.3f64 * 32.0 * PI * PI).exp_m1() * 9.0 / (32.0 * PI * PI)).abs() < 1e-9);
        assert!((unscaled_time(rescaled_time(0.7, 5.0, 1), 5.0, 1) - 0.7).abs() < 1e-13);
    }

    #[test]
    fn rescaled_circle_is_stationary() {
        let g = PeriodicGrid::new(1, 16).unwrap();
        let states = [0.0, 0.5, 3.0]
            .iter()
            .map(|&t| FlowState {
                support: SupportGrid::from_fn(&g, |_| (1.0f64 + 2.0 * t).sqrt()).unwrap(),
                time: t,
                variant: FlowVariant::Unscaled,
            })
            .collect();
        let tr = Trajectory { states, records: vec![] };
        let rs = rescale_trajectory(&tr, 2.0 * PI).unwrap();
        for s in &rs.states {
            assert_const(s.h(), 1.0 / (2.0 * PI), 1e-15);
        }
    }

    #[test]
    fn snapshot_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.txt");
        let state = FlowState {
            support: support(2, 16, |t| 1.0 + 0.1 * (1.5 * t).cos()),
            time: 0.125,
            variant: FlowVariant::RescaledPaper,
        };
        write_snapshot(&path, &state).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# omega=2\n# n=16\n# t="));
        assert!(text.contains("# variant=rescaled_paper\n"));
        assert_eq!(read_snapshot(&path).unwrap(), state);
    }

    #[test]
    fn config_validation() {
        assert!(StepperConfig::default().validate().is_ok());
        let bad = StepperConfig {
            guard_ratio: 1.0,
            ..StepperConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn record_schedules() {
        let t = record_times(0.0, 0.35, 0.1, None).unwrap();
        assert_eq!(t.len(), 4);
        assert!((t[2] - 0.3).abs() < 1e-15 && t[3] == 0.35);
        let g = record_times(1.0, 2.0, 0.1, Some(1.5)).unwrap();
        assert!((g[0] - 1.0 - 1e-5).abs() < 1e-15);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        // graded spacing never exceeds the uniform one, then the grid is uniform
        assert!(g.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-12));
        let tail: Vec<f64> = g.iter().copied().filter(|&x| x > 1.3).collect();
        assert!(tail.windows(2).all(|w| (w[1] - w[0] - 0.1).abs() < 1e-12));
        assert_eq!(*g.last().unwrap(), 2.0);
        assert!(record_times(0.0, 1.0, 0.0, None).is_err());
        assert!(record_times(0.0, 1.0, 0.1, Some(1.0)).is_err());
        assert!(record_times(1.0, 1.0, 0.1, None).is_err());
    }

    #[test]
    fn evolve_at_lands_on_requested_times() {
        let s = support(1, 16, |_| 1.0);
        let times = [0.01, 0.015, 0.2];
        let tr = evolve_at(&FlowState::new(s, FlowVariant::Unscaled), &times, &StepperConfig::default(), |_, _| {})
            .unwrap();
        assert_eq!(tr.times(), vec![0.0, 0.01, 0.015, 0.2]);
        for st in &tr.states {
            assert_const(st.h(), (1.0 + 2.0 * st.time).sqrt(), 1e-12);
        }
        let s = support(1, 16, |_| 1.0);
        let state = FlowState::new(s, FlowVariant::Unscaled);
        assert!(evolve_at(&state, &[0.2, 0.1], &StepperConfig::default(), |_, _| {}).is_err());
        assert!(evolve_at(&state, &[], &StepperConfig::default(), |_, _| {}).is_err());
    }
}
