//! The acceptance suite: thirteen criteria with built-in configurations.
//!
//! Each criterion runs its own trajectories and reports a list of sub-checks,
//! each with a measured value, a bound and the resulting slack.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use entflow::diagnostics::length;
use entflow::flow::{evolve_at, record_times, rescale_trajectory, rescaled_time, unscaled_time};
use entflow::graph::{
    build_bundle, check_parametrization_identity, operator_split, velocity_graph, BaseCurve, FrameConvention,
    GraphCurveScene, RhoSampler,
};
use entflow::{
    evolve, run_monitors, CheckStatus, Error, FlowState, FlowVariant, GridFunction, MonitorReport,
    MonitorTolerances, PeriodicGrid, Scheme, StepperConfig, SupportGrid, Trajectory,
};
use serde::Serialize;

use crate::config::{ellipse_support, fourier_support, FourierTerm};

/// Record ratio inside the initial layer of runs started from rough data.
pub const LAYER_RATIO: f64 = 1.05;
/// Seed of the random graph functions in criterion 11.
pub const APPENDIX_SEED: u64 = 2024;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    Within(f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub measured: f64,
    /// `None` when the check does not apply (e.g. a threshold never reached).
    pub bound: Option<Bound>,
    pub slack: f64,
    pub passed: bool,
}

impl SubCheck {
    pub fn new(name: impl Into<String>, measured: f64, bound: Bound) -> Self {
        let slack = match bound {
            Bound::AtMost(b) => b - measured,
            Bound::AtLeast(b) => measured - b,
            Bound::Within(lo, hi) => (measured - lo).min(hi - measured),
        };
        Self {
            name: name.into(),
            measured,
            bound: Some(bound),
            slack: if slack.is_nan() { f64::NEG_INFINITY } else { slack },
            passed: slack >= 0.0,
        }
    }

    fn vacuous(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measured: f64::NAN,
            bound: None,
            slack: f64::INFINITY,
            passed: true,
        }
    }

    /// From a monitor result: measured is the normalized violation `tol − slack`.
    fn from_monitor(prefix: &str, report: &MonitorReport, name: &str, tol: f64) -> Self {
        let label = format!("{prefix}/{name}");
        match report.get(name) {
            Some(c) if c.status == CheckStatus::NotApplicable => Self::vacuous(label),
            Some(c) => Self::new(label, tol - c.slack.unwrap_or(f64::NEG_INFINITY), Bound::AtMost(tol)),
            None => Self::new(label, f64::INFINITY, Bound::AtMost(tol)),
        }
    }
}

impl fmt::Display for SubCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "ok  " } else { "FAIL" };
        match self.bound {
            None => write!(f, "{verdict} {:<44} not applicable", self.name),
            Some(b) => {
                let bound = match b {
                    Bound::AtMost(x) => format!("<= {x:.3e}"),
                    Bound::AtLeast(x) => format!(">= {x:.3e}"),
                    Bound::Within(lo, hi) => format!("in [{lo}, {hi}]"),
                };
                write!(
                    f,
                    "{verdict} {:<44} {:>12.5e} {bound:<20} slack {:.3e}",
                    self.name, self.measured, self.slack
                )
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<SubCheck>,
    /// Set when the criterion could not be evaluated at all.
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.passed)
    }

    /// Smallest slack over the sub-checks.
    pub fn worst_slack(&self) -> f64 {
        self.checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min)
    }

    /// `criterion NN PASS|FAIL title (worst slack …)`.
    pub fn summary_line(&self) -> String {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => format!("criterion {:02} {verdict} {} (error: {e})", self.id, self.title),
            None => format!(
                "criterion {:02} {verdict} {} (worst slack {:.3e}, {:.2} s)",
                self.id,
                self.title,
                self.worst_slack(),
                self.seconds
            ),
        }
    }

    pub fn report(&self) -> String {
        let mut out = self.summary_line();
        for c in &self.checks {
            out.push_str("\n    ");
            out.push_str(&c.to_string());
        }
        out
    }
}

pub const TITLES: [&str; 13] = [
    "circle law",
    "exact L2 growth of h",
    "entropy dissipation identity",
    "monotonicity battery",
    "length bracketing",
    "entropy bracketing",
    "area law",
    "L2 contraction",
    "rescaled convergence to a round circle",
    "rescaling consistency",
    "graph-parametrization validation",
    "arclength parametrization identity",
    "convergence orders",
];

/// Criterion ids run by `verify <suite>`.
pub fn suite(name: &str) -> Option<Vec<u8>> {
    Some(match name {
        "circle" => vec![1],
        "identities" => vec![2, 3, 7, 8],
        "monotone" => vec![4, 5, 6],
        "rescaled" => vec![9, 10],
        "appendix" => vec![11, 12],
        "convergence" => vec![13],
        "all" => (1..=13).collect(),
        _ => return None,
    })
}

pub const SUITES: [&str; 7] = ["circle", "identities", "monotone", "rescaled", "appendix", "convergence", "all"];

/// Runs criterion `id` (1..=13).
pub fn run(id: u8) -> CriterionOutcome {
    let start = Instant::now();
    let result = match id {
        1 => circle_law(),
        2 => l2_growth(),
        3 => dissipation(),
        4 => monotonicity(),
        5 => length_bracketing(),
        6 => entropy_bracketing(),
        7 => area_law(),
        8 => contraction(),
        9 => rescaled_convergence(),
        10 => rescaling_consistency(),
        11 => appendix(),
        12 => parametrization_identity(),
        13 => convergence_orders(),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let title = TITLES.get(usize::from(id).wrapping_sub(1)).copied().unwrap_or("unknown");
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(checks) => CriterionOutcome {
            id,
            title,
            checks,
            error: None,
            seconds,
        },
        Err(e) => CriterionOutcome {
            id,
            title,
            checks: Vec::new(),
            error: Some(e.to_string()),
            seconds,
        },
    }
}

type Checks = Result<Vec<SubCheck>, Error>;

fn grid(omega: u32, n: usize) -> Result<PeriodicGrid, Error> {
    PeriodicGrid::new(omega, n)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn ellipse_13(n: usize) -> Result<SupportGrid, Error> {
    SupportGrid::from_fn(&grid(1, n)?, |t| ellipse_support(1.3, 1.0, t))
}

/// The 3-mode initial datum `1 + 0.15 cos 2θ + 0.05 sin 3θ`.
pub fn three_mode_terms() -> Vec<FourierTerm> {
    vec![FourierTerm(2.0, 0.15, 0.0), FourierTerm(3.0, 0.0, 0.05)]
}

/// A finished unscaled run with its monitor report.
struct Run {
    label: &'static str,
    report: MonitorReport,
}

impl Run {
    fn new(label: &'static str, s: SupportGrid, t_end: f64, every: f64, layer: Option<f64>) -> Result<Self, Error> {
        let state = FlowState::new(s, FlowVariant::Unscaled);
        let times = record_times(0.0, t_end, every, layer)?;
        let traj = evolve_at(&state, &times, &StepperConfig::default(), |_, _| {})?;
        let report = run_monitors(&traj, &traj.records[0], &MonitorTolerances::default());
        Ok(Self { label, report })
    }

    fn check(&self, name: &str, tol: f64) -> SubCheck {
        SubCheck::from_monitor(self.label, &self.report, name, tol)
    }
}

fn cached(cell: &'static OnceLock<Result<Run, String>>, f: fn() -> Result<Run, Error>) -> Result<&'static Run, Error> {
    cell.get_or_init(|| f().map_err(|e| e.to_string()))
        .as_ref()
        .map_err(|e| Error::InvalidArgument(format!("shared run failed: {e}")))
}

/// Ellipse `a = 1.3, b = 1` on 32 nodes to `t = 0.5`, uniform records every `1e-3`.
fn ellipse_run_fresh() -> Result<Run, Error> {
    Run::new("ellipse", ellipse_13(32)?, 0.5, 1e-3, None)
}

fn ellipse_run() -> Result<&'static Run, Error> {
    static CELL: OnceLock<Result<Run, String>> = OnceLock::new();
    cached(&CELL, ellipse_run_fresh)
}

/// The 3-mode datum to `t = 0.5`. Its curvature ratio is about 10, so it needs
/// 64 nodes, and its initial layer needs geometrically graded records.
fn three_mode_run() -> Result<&'static Run, Error> {
    static CELL: OnceLock<Result<Run, String>> = OnceLock::new();
    cached(&CELL, || {
        let terms = three_mode_terms();
        let s = SupportGrid::from_fn(&grid(1, 64)?, |t| fourier_support(1.0, &terms, t))?;
        Run::new("3-mode", s, 0.5, 1e-3, Some(LAYER_RATIO))
    })
}

fn circle_law() -> Checks {
    let mut checks = Vec::new();
    for (omega, t_end, r_end) in [(1u32, 1.5, 2.0), (2, 4.0, 3.0)] {
        let start = Instant::now();
        let s = SupportGrid::from_fn(&grid(omega, 32)?, |_| 1.0)?;
        let tr = evolve(&FlowState::new(s, FlowVariant::Unscaled), t_end, &StepperConfig::default(), 0.1)?;
        let err = tr.last().expect("non-empty").h().values().iter().map(|h| (h - r_end).abs()).fold(0.0, f64::max);
        let secs = start.elapsed().as_secs_f64();
        checks.push(SubCheck::new(format!("omega={omega} max|h-{r_end}| at t={t_end}"), err, Bound::AtMost(1e-8)));
        checks.push(SubCheck::new(format!("omega={omega} runtime [s]"), secs, Bound::AtMost(1.0)));
    }
    Ok(checks)
}

fn l2_growth() -> Checks {
    let start = Instant::now();
    let run = ellipse_run_fresh()?;
    let secs = start.elapsed().as_secs_f64();
    let tol = MonitorTolerances::default();
    let slope = run.report.get("M9_h_l2_slope").and_then(|c| c.value).unwrap_or(f64::NAN);
    Ok(vec![
        SubCheck::new("ellipse |slope - 4pi|/4pi", (slope - 4.0 * PI).abs() / (4.0 * PI), Bound::AtMost(tol.slope_rel)),
        SubCheck::new("ellipse runtime [s]", secs, Bound::AtMost(10.0)),
    ])
}

fn dissipation() -> Checks {
    let run = ellipse_run()?;
    Ok(vec![run.check("M1_entropy_dissipation", MonitorTolerances::default().identity_rel)])
}

fn battery(names: &[&str], tol: f64) -> Checks {
    let runs = [ellipse_run()?, three_mode_run()?];
    Ok(runs
        .iter()
        .flat_map(|r| names.iter().map(move |n| r.check(n, tol)))
        .collect())
}

fn monotonicity() -> Checks {
    battery(
        &[
            "M3_length_monotone",
            "M2_velocity_monotone",
            "M9_h1_monotone",
            "M10_logk_small_forever",
        ],
        MonitorTolerances::default().monotone_rel,
    )
}

fn length_bracketing() -> Checks {
    battery(&["M5_length_lower", "M5_length_upper"], MonitorTolerances::default().inequality_rel)
}

fn entropy_bracketing() -> Checks {
    battery(&["M6_entropy_lower", "M6_entropy_upper"], MonitorTolerances::default().inequality_rel)
}

fn area_law() -> Checks {
    let tol = MonitorTolerances::default();
    let runs = [ellipse_run()?, three_mode_run()?];
    Ok(runs
        .iter()
        .flat_map(|r| [r.check("M8_area_rate", tol.identity_rel), r.check("M8_area_lower", tol.area_abs)])
        .collect())
}

/// Three-point derivative at interior index `i` on a non-uniform grid.
fn centered(t: &[f64], x: &[f64], i: usize) -> f64 {
    let (ha, hb) = (t[i] - t[i - 1], t[i + 1] - t[i]);
    -hb / (ha * (ha + hb)) * x[i - 1] + (hb - ha) / (ha * hb) * x[i] + ha / (hb * (ha + hb)) * x[i + 1]
}

/// Record times, `D`, and the predicted `dD/dt`.
pub type ContractionSeries = (Vec<f64>, Vec<f64>, Vec<f64>);

/// `D = ∫(h¹ − h²)²` and `−2∫(k¹ − k²)²/(k¹k²)` at every record of two runs with equal record times.
pub fn contraction_series(a: &Trajectory, b: &Trajectory) -> Result<ContractionSeries, Error> {
    let mut t = Vec::new();
    let mut d = Vec::new();
    let mut rate = Vec::new();
    for (sa, sb) in a.states.iter().zip(&b.states) {
        let dh = sa.h().zip_map(sb.h(), |x, y| (x - y).powi(2))?;
        let (ka, kb) = (sa.support.curvature()?, sb.support.curvature()?);
        let q = ka.zip_map(&kb, |x, y| (x - y).powi(2) / (x * y))?;
        t.push(sa.time);
        d.push(dh.integrate());
        rate.push(-2.0 * q.integrate());
    }
    Ok((t, d, rate))
}

fn contraction() -> Checks {
    let h1 = ellipse_13(32)?;
    let h2 = SupportGrid::new(h1.h().zip_map(&GridFunction::from_fn(h1.grid(), |t| 0.01 * (3.0 * t).cos()), |x, y| x + y)?)?;
    // D decays like e^{-128t}: records every 1e-4 to t = 0.1 keep the
    // difference quotient accurate and D far above round-off
    let times = record_times(0.0, 0.1, 1e-4, Some(LAYER_RATIO))?;
    let cfg = StepperConfig::default();
    let a = evolve_at(&FlowState::new(h1, FlowVariant::Unscaled), &times, &cfg, |_, _| {})?;
    let b = evolve_at(&FlowState::new(h2, FlowVariant::Unscaled), &times, &cfg, |_, _| {})?;
    let (t, d, rate) = contraction_series(&a, &b)?;
    let dmax = d.iter().copied().fold(0.0, f64::max);
    let increase = d.windows(2).map(|w| (w[1] - w[0]) / dmax).fold(f64::NEG_INFINITY, f64::max);
    let mismatch = (1..t.len() - 1)
        .map(|i| (centered(&t, &d, i) - rate[i]).abs() / rate[i].abs())
        .fold(0.0, f64::max);
    Ok(vec![
        SubCheck::new("max (D[i+1]-D[i])/max D", increase, Bound::AtMost(MonitorTolerances::default().monotone_rel)),
        SubCheck::new("max |D' + 2int(k1-k2)^2/(k1k2)| / |rhs|", mismatch, Bound::AtMost(1e-3)),
        SubCheck::new("D(0.1)/D(0)", d[d.len() - 1] / d[0], Bound::AtMost(1.0)),
    ])
}

/// Ellipse scaled to unit length, the `t^η = 0` state of the rescaled flow.
fn unit_length_ellipse(n: usize) -> Result<(SupportGrid, f64), Error> {
    let s = ellipse_13(n)?;
    let l0 = length(&s);
    Ok((s.scaled(1.0 / l0)?, l0))
}

fn rescaled_convergence() -> Checks {
    let (s, _) = unit_length_ellipse(32)?;
    let state = FlowState::new(s, FlowVariant::RescaledChainrule);
    // the linearized decay rates are 4π²((m² − 1)² + 1) ≥ 4π², so explicit
    // RK4 would spend millions of steps at the ξ⁴ limit on a window of length 3
    let cfg = StepperConfig::semi_implicit(1e-4);
    let tr = evolve(&state, 3.0, &cfg, 1e-2)?;
    let report = run_monitors(&tr, &tr.records[0], &MonitorTolerances::default());
    let h = tr.last().expect("non-empty").h();
    let mean = h.mean();
    let dev = h.values().iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let mut checks = vec![
        SubCheck::new("final max|h - mean h|", dev, Bound::AtMost(1e-4)),
        SubCheck::new("final |mean h - 1/(2pi)|", (mean - 0.5 / PI).abs(), Bound::AtMost(1e-4)),
    ];
    for p in 1..=4 {
        let rate = report.get(&format!("M12_decay_p{p}")).and_then(|c| c.value).unwrap_or(f64::NAN);
        checks.push(SubCheck::new(format!("fitted decay rate of |h_(theta^{p})|^2"), rate, Bound::AtLeast(f64::MIN_POSITIVE)));
    }
    checks.push(SubCheck::from_monitor("rescaled", &report, "M12_curvature_bracket", 0.0));
    checks.push(SubCheck::from_monitor(
        "rescaled",
        &report,
        "M12_length_bracket",
        MonitorTolerances::default().inequality_rel,
    ));
    Ok(checks)
}

fn rescaling_consistency() -> Checks {
    let (s, l0) = unit_length_ellipse(32)?;
    let tau = rescaled_time(1.0, l0, 1);
    let eta_times: Vec<f64> = (1..=10).map(|i| tau * i as f64 / 10.0).collect();
    let t_times: Vec<f64> = eta_times.iter().map(|&e| unscaled_time(e, l0, 1)).collect();
    let cfg = StepperConfig::default();
    let direct = evolve_at(&FlowState::new(s, FlowVariant::RescaledChainrule), &eta_times, &cfg, |_, _| {})?;
    let unscaled = evolve_at(&FlowState::new(ellipse_13(32)?, FlowVariant::Unscaled), &t_times, &cfg, |_, _| {})?;
    let mapped = rescale_trajectory(&unscaled, l0)?;
    let mut err = 0.0f64;
    let mut time_err = 0.0f64;
    for (a, b) in direct.states.iter().zip(&mapped.states).skip(1) {
        err = err.max(max_diff(a.h().values(), b.h().values()));
        time_err = time_err.max((a.time - b.time).abs() / a.time);
    }
    // guard against a vacuous match: the first matched state must still be visibly non-round
    let first = direct.states[1].h();
    let spread = first.max() - first.min();
    Ok(vec![
        SubCheck::new("matched states", (direct.states.len() - 1) as f64, Bound::Within(10.0, 10.0)),
        SubCheck::new("first matched state: max h - min h", spread, Bound::AtLeast(1e-3)),
        SubCheck::new("max node error over 10 matched t^eta", err, Bound::AtMost(1e-5)),
        SubCheck::new("max relative t^eta mismatch", time_err, Bound::AtMost(1e-12)),
    ])
}

/// Largest bundle and split residuals over `draws` random graphs over `base`.
pub fn appendix_residuals(base: &BaseCurve, seed: u64, draws: usize) -> Result<(f64, f64), Error> {
    let mut sampler = RhoSampler::new(seed, 4, 0.05 / base.max_curvature());
    let (mut bundle, mut split) = (0.0f64, 0.0f64);
    for _ in 0..draws {
        let scene = sampler.draw(base, FrameConvention::SelfConsistent)?;
        let b = build_bundle(&scene)?;
        bundle = bundle.max(b.direct_residuals.values().copied().fold(0.0, f64::max));
        split = split.max(operator_split(&scene)?.residual);
    }
    Ok((bundle, split))
}

/// `max|V − expected|` for the constant graph `ρ ≡ c` over the unit circle.
pub fn concentric_velocity_error(c: f64, expected: f64, n: usize) -> Result<f64, Error> {
    let base = BaseCurve::circle(1.0, n)?;
    let rho = GridFunction::constant(base.grid(), c);
    let scene = GraphCurveScene::new(base, rho, FrameConvention::SelfConsistent)?;
    Ok(velocity_graph(&scene)?.values().iter().map(|v| (v - expected).abs()).fold(0.0, f64::max))
}

fn appendix() -> Checks {
    let start = Instant::now();
    let n = 256;
    let mut checks = Vec::new();
    for (label, base, seed) in [
        ("circle", BaseCurve::circle(1.0, n)?, APPENDIX_SEED),
        ("2:1 ellipse", BaseCurve::ellipse(2.0, 1.0, n)?, APPENDIX_SEED + 1),
    ] {
        let (bundle, split) = appendix_residuals(&base, seed, 100)?;
        checks.push(SubCheck::new(format!("{label}: bundle vs direct, 100 draws"), bundle, Bound::AtMost(1e-8)));
        checks.push(SubCheck::new(format!("{label}: operator split, 100 draws"), split, Bound::AtMost(1e-8)));
    }
    checks.push(SubCheck::new(
        "rho=0.5 on unit circle: max|V - 2/3|",
        concentric_velocity_error(0.5, 2.0 / 3.0, n)?,
        Bound::AtMost(1e-10),
    ));
    // under the frame the formulas require, rho = 0.5 is the radius-1/2 circle
    checks.push(SubCheck::new(
        "rho=0.5 on unit circle: max|V - 2| (radius 1/2)",
        concentric_velocity_error(0.5, 2.0, n)?,
        Bound::AtMost(1e-10),
    ));
    checks.push(SubCheck::new(
        "rho=-0.5 on unit circle: max|V - 2/3| (radius 3/2)",
        concentric_velocity_error(-0.5, 2.0 / 3.0, n)?,
        Bound::AtMost(1e-10),
    ));
    checks.push(SubCheck::new("runtime [s]", start.elapsed().as_secs_f64(), Bound::AtMost(30.0)));
    Ok(checks)
}

fn parametrization_identity() -> Checks {
    let s = SupportGrid::from_fn(&grid(1, 128)?, |t| 1.0 + 0.2 * (2.0 * t).cos())?;
    Ok(vec![SubCheck::new(
        "n=128, h = 1 + 0.2cos2theta",
        check_parametrization_identity(&s)?,
        Bound::AtMost(1e-9),
    )])
}

/// Errors of the ω = 2 circle at `t = 1.5` for RK4 with `dt = 0.075/2^i`, `i = 0..=3`.
pub fn temporal_errors() -> Result<Vec<f64>, Error> {
    (0..4)
        .map(|i| {
            let dt = 0.075 / f64::powi(2.0, i);
            let cfg = StepperConfig {
                dt_init: dt,
                max_dt: dt,
                scheme: Scheme::ExplicitRk4,
                ..StepperConfig::default()
            };
            let s = SupportGrid::from_fn(&grid(2, 8)?, |_| 1.0)?;
            let tr = evolve(&FlowState::new(s, FlowVariant::Unscaled), 1.5, &cfg, 1.5)?;
            let exact = 4f64.sqrt();
            Ok(tr.last().expect("non-empty").h().values().iter().map(|h| (h - exact).abs()).fold(0.0, f64::max))
        })
        .collect()
}

/// Node errors of the 2:1 ellipse at `t = 0.05` on `n = 32, 64` against `n = 256`,
/// all with the semi-implicit scheme at the same `dt = 1e-4`.
pub fn spatial_errors() -> Result<[f64; 2], Error> {
    let cfg = StepperConfig::semi_implicit(1e-4);
    let solve = |n: usize| -> Result<Vec<f64>, Error> {
        let s = SupportGrid::from_fn(&grid(1, n)?, |t| ellipse_support(2.0, 1.0, t))?;
        let tr = evolve(&FlowState::new(s, FlowVariant::Unscaled), 0.05, &cfg, 0.05)?;
        Ok(tr.last().expect("non-empty").h().values().to_vec())
    };
    let reference = solve(256)?;
    let err = |n: usize| -> Result<f64, Error> {
        let h = solve(n)?;
        let stride = 256 / n;
        Ok((0..n).map(|j| (h[j] - reference[stride * j]).abs()).fold(0.0, f64::max))
    };
    Ok([err(32)?, err(64)?])
}

fn convergence_orders() -> Checks {
    let e = temporal_errors()?;
    let mut checks: Vec<SubCheck> = e
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            SubCheck::new(
                format!("temporal order, dt = 0.075/2^{i} -> /2^{}", i + 1),
                (w[0] / w[1]).log2(),
                Bound::Within(3.7, 4.3),
            )
        })
        .collect();
    let [e32, e64] = spatial_errors()?;
    checks.push(SubCheck::new("spatial error ratio n=32 / n=64", e32 / e64, Bound::AtLeast(100.0)));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcheck_slack() {
        assert!(SubCheck::new("a", 1.0, Bound::AtMost(2.0)).passed);
        assert!(!SubCheck::new("a", 3.0, Bound::AtMost(2.0)).passed);
        assert!(SubCheck::new("a", 4.0, Bound::Within(3.7, 4.3)).passed);
        assert_eq!(SubCheck::new("a", 4.4, Bound::Within(3.7, 4.3)).slack, 4.3 - 4.4);
        assert!(!SubCheck::new("a", f64::NAN, Bound::AtLeast(0.0)).passed);
        assert!(SubCheck::new("a", 150.0, Bound::AtLeast(100.0)).passed);
    }

    #[test]
    fn suites_cover_all_criteria() {
        let mut ids: Vec<u8> = SUITES[..6].iter().flat_map(|s| suite(s).unwrap()).collect();
        ids.sort();
        assert_eq!(ids, (1..=13).collect::<Vec<_>>());
        assert_eq!(suite("all").unwrap().len(), 13);
        assert!(suite("bogus").is_none());
    }

    #[test]
    fn unknown_criterion_is_an_error() {
        let out = run(14);
        assert!(!out.passed());
        assert!(out.summary_line().contains("FAIL"));
    }
}
