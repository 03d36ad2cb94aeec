//! Runtime checks of the identities and inequalities satisfied by the flow.
//!
//! Time derivatives of recorded scalars are three-point (non-uniform)
//! centered differences on the record cadence. Every check reports a slack
//! `tolerance − violation`; it passes when the slack is non-negative.

use std::f64::consts::PI;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::{entropy_lower_bound, DiagnosticsRecord};
use crate::flow::{phi, FlowVariant, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub status: CheckStatus,
    pub slack: Option<f64>,
    pub worst_t: Option<f64>,
    /// Measured quantity for checks that estimate one (slopes, rates).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub value: Option<f64>,
}

impl CheckResult {
    fn not_applicable() -> Self {
        Self {
            status: CheckStatus::NotApplicable,
            slack: None,
            worst_t: None,
            value: None,
        }
    }

    /// From the largest normalized violation and where it happened.
    fn from_violation(tolerance: f64, worst: Option<(f64, f64)>) -> Self {
        match worst {
            None => Self::not_applicable(),
            Some((violation, t)) => {
                let slack = tolerance - violation;
                Self {
                    status: if slack >= 0.0 { CheckStatus::Pass } else { CheckStatus::Fail },
                    slack: Some(slack),
                    worst_t: Some(t),
                    value: None,
                }
            }
        }
    }

    fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MonitorReport {
    pub checks: IndexMap<String, CheckResult>,
}

impl MonitorReport {
    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.checks.get(name)
    }

    pub fn passed(&self) -> bool {
        self.checks.values().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, c)| c.status == CheckStatus::Fail)
            .map(|(n, _)| n.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn push(&mut self, name: &str, result: CheckResult) {
        self.checks.insert(name.to_string(), result);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonitorTolerances {
    /// Relative residual for identities checked by centered differences.
    pub identity_rel: f64,
    /// Relative slack for inequalities.
    pub inequality_rel: f64,
    /// Relative slack for monotonicity.
    pub monotone_rel: f64,
    /// Absolute slack for the area lower bound.
    pub area_abs: f64,
    /// Relative error of the fitted `‖h‖₂²` slope.
    pub slope_rel: f64,
}

impl Default for MonitorTolerances {
    fn default() -> Self {
        Self {
            identity_rel: 1e-3,
            inequality_rel: 1e-6,
            monotone_rel: 1e-9,
            area_abs: 1e-6,
            slope_rel: 1e-4,
        }
    }
}

/// Three-point derivative at interior index `i` on a non-uniform grid.
fn centered(t: &[f64], x: &[f64], i: usize) -> f64 {
    let (ha, hb) = (t[i] - t[i - 1], t[i + 1] - t[i]);
    -hb / (ha * (ha + hb)) * x[i - 1] + (hb - ha) / (ha * hb) * x[i] + ha / (hb * (ha + hb)) * x[i + 1]
}

/// Largest value of `f(i)` with its time, over the given indices.
fn worst(t: &[f64], idx: impl Iterator<Item = usize>, f: impl Fn(usize) -> f64) -> Option<(f64, f64)> {
    idx.map(|i| {
        let v = f(i);
        (if v.is_nan() { f64::INFINITY } else { v }, t[i])
    })
    .fold(None, |acc: Option<(f64, f64)>, (v, ti)| match acc {
        Some((w, _)) if w >= v => acc,
        _ => Some((v, ti)),
    })
}

fn interior(n: usize) -> std::ops::Range<usize> {
    if n >= 3 {
        1..n - 1
    } else {
        0..0
    }
}

fn max_abs(xs: impl Iterator<Item = f64>) -> f64 {
    xs.fold(0.0, |m, v| m.max(v.abs()))
}

/// Least-squares slope and intercept of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Exponential decay rate `r` in `y ≈ C e^{−r t}`, fitted on the latter half
/// of the samples that lie above `floor`. Needs at least three such samples.
pub fn fit_decay_rate(t: &[f64], y: &[f64], floor: f64) -> Option<f64> {
    let above: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, &v)| v > floor && v.is_finite())
        .map(|(&a, &b)| (a, b.ln()))
        .collect();
    let tail = &above[above.len() / 2..];
    if tail.len() < 3 {
        return None;
    }
    let (ts, ls): (Vec<f64>, Vec<f64>) = tail.iter().copied().unzip();
    linear_fit(&ts, &ls).map(|(slope, _)| -slope)
}

/// `∫ dθ/(kmin + c₂|θ|)` over `[−ωπ, ωπ)`, a lower bound for `L` when `‖k_θ‖∞ ≤ c₂`.
pub fn gradient_length_bound(c2: f64, kmin: f64, omega: u32) -> f64 {
    let half = PI * omega as f64;
    let x = c2 * half / kmin;
    let ratio = if x > 1e-8 { x.ln_1p() / x } else { 1.0 - 0.5 * x };
    2.0 * half / kmin * ratio
}

/// Upper length bound `L₀ + (4ω²π²/c₁)(sqrt(4ω²π² + t c₁²) − 2ωπ)`.
fn length_upper(t: f64, l0: f64, c1: f64, omega: u32) -> f64 {
    let w = 2.0 * PI * omega as f64;
    l0 + w * w / c1 * ((w * w + t * c1 * c1).sqrt() - w)
}

/// Rescaled length bound `c_L = sup_t upper(t)/φ(t)` for an initial curve of
/// length `l0` and total curvature `c1`, with `φ(0) = 1`.
pub fn length_bound_constant(l0: f64, c1: f64, omega: u32) -> f64 {
    let w = 2.0 * PI * omega as f64;
    // the ratio tends to w/√2 as t → ∞
    let mut best = w / 2f64.sqrt();
    for i in 0..=4000 {
        let t = 10f64.powf(-12.0 + 24.0 * i as f64 / 4000.0);
        best = best.max(length_upper(t, l0, c1, omega) / phi(t, 1.0, omega));
    }
    best.max(length_upper(0.0, l0, c1, omega))
}

/// Evaluates every applicable check on a trajectory; `init` supplies the
/// frozen initial constants (`L₀`, `c₁`, `𝒮ℰ₀`, `A₀`).
pub fn run_monitors(tr: &Trajectory, init: &DiagnosticsRecord, tol: &MonitorTolerances) -> MonitorReport {
    let recs = &tr.records;
    let variant = tr.states.first().map_or(FlowVariant::Unscaled, |s| s.variant);
    let omega = tr.states.first().map_or(1, |s| s.support.omega());
    let xi_max = tr.states.first().map_or(1.0, |s| s.grid().max_wavenumber());
    let mut report = MonitorReport::default();
    if variant == FlowVariant::Unscaled {
        unscaled_checks(&mut report, recs, init, omega, tol);
    } else {
        rescaled_checks(&mut report, recs, init, omega, xi_max, variant, tol);
    }
    report
}

fn unscaled_checks(
    report: &mut MonitorReport,
    recs: &[DiagnosticsRecord],
    init: &DiagnosticsRecord,
    omega: u32,
    tol: &MonitorTolerances,
) {
    let n = recs.len();
    let t: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let col = |f: fn(&DiagnosticsRecord) -> f64| recs.iter().map(f).collect::<Vec<f64>>();
    let entropy = col(|r| r.entropy);
    let length = col(|r| r.length);
    let fl2 = col(|r| r.f_l2sq);
    let kl1 = col(|r| r.k_l1);
    let diss = col(|r| r.length_dissipation);
    let logk = col(|r| r.logk_dirichlet);
    let h0 = col(|r| r.h_seminorms[0]);
    let h1 = col(|r| r.h_seminorms[1]);
    let w = 2.0 * PI * omega as f64;
    let all = || 0..n;
    let steps = || 0..n.saturating_sub(1);

    // M1: 𝒮ℰ' = −‖F‖²
    report.push(
        "M1_entropy_dissipation",
        CheckResult::from_violation(
            tol.identity_rel,
            worst(&t, interior(n), |i| (centered(&t, &entropy, i) + fl2[i]).abs() / fl2[i].max(f64::MIN_POSITIVE)),
        ),
    );

    // M2: ‖F‖² nonincreasing
    let fscale = max_abs(fl2.iter().copied()).max(f64::MIN_POSITIVE);
    report.push(
        "M2_velocity_monotone",
        CheckResult::from_violation(tol.monotone_rel, worst(&t, steps(), |i| (fl2[i + 1] - fl2[i]) / fscale)),
    );

    // M3: L' = ∫k > 0 and L nondecreasing
    report.push(
        "M3_length_rate",
        CheckResult::from_violation(
            tol.identity_rel,
            worst(&t, interior(n), |i| {
                if kl1[i] <= 0.0 {
                    f64::INFINITY
                } else {
                    (centered(&t, &length, i) - kl1[i]).abs() / kl1[i]
                }
            }),
        ),
    );
    let lscale = max_abs(length.iter().copied());
    report.push(
        "M3_length_monotone",
        CheckResult::from_violation(tol.monotone_rel, worst(&t, steps(), |i| (length[i] - length[i + 1]) / lscale)),
    );

    // M4: L'' ≤ −∫(½k k_θθ² + ⅓k³), with L'' = (∫k)'
    if diss.iter().all(|d| d.is_finite()) {
        report.push(
            "M4_length_concavity",
            CheckResult::from_violation(
                tol.identity_rel,
                worst(&t, interior(n), |i| {
                    let lpp = centered(&t, &kl1, i);
                    (lpp + diss[i]) / lpp.abs().max(diss[i])
                }),
            ),
        );
    } else {
        report.push("M4_length_concavity", CheckResult::not_applicable());
    }

    // M5: φ(t) ≤ L(t) ≤ L₀ + (4ω²π²/c₁)(sqrt(4ω²π² + t c₁²) − 2ωπ)
    let (l0, c1) = (init.length, init.k_l1);
    report.push(
        "M5_length_lower",
        CheckResult::from_violation(
            tol.inequality_rel,
            worst(&t, all(), |i| (phi(t[i] - init.t, l0, omega) - length[i]) / length[i]),
        ),
    );
    report.push(
        "M5_length_upper",
        CheckResult::from_violation(
            tol.inequality_rel,
            worst(&t, all(), |i| (length[i] - length_upper(t[i] - init.t, l0, c1, omega)) / length[i]),
        ),
    );

    // M6: 2ωπ log(2ωπ/L) ≤ 𝒮ℰ ≤ 𝒮ℰ₀
    let escale = max_abs(entropy.iter().copied()).max(w);
    report.push(
        "M6_entropy_lower",
        CheckResult::from_violation(
            tol.inequality_rel,
            worst(&t, all(), |i| (entropy_lower_bound(length[i], omega) - entropy[i]) / escale),
        ),
    );
    report.push(
        "M6_entropy_upper",
        CheckResult::from_violation(tol.inequality_rel, worst(&t, all(), |i| (entropy[i] - init.entropy) / escale)),
    );

    // M7: ∫k + ∫₀ᵗ∫(½k k_θθ² + ⅓k³) ≤ c₁
    if diss.iter().all(|d| d.is_finite()) && n >= 1 {
        let mut acc = vec![0.0; n];
        for i in 1..n {
            acc[i] = acc[i - 1] + 0.5 * (t[i] - t[i - 1]) * (diss[i] + diss[i - 1]);
        }
        report.push(
            "M7_curvature_budget",
            CheckResult::from_violation(tol.inequality_rel, worst(&t, all(), |i| (kl1[i] + acc[i] - c1) / c1)),
        );
    } else {
        report.push("M7_curvature_budget", CheckResult::not_applicable());
    }

    // M8: A' = 2π + ∫σ², A ≥ A₀ + 2πt
    match (omega, init.area, recs.iter().map(|r| r.area).collect::<Option<Vec<f64>>>()) {
        (1, Some(a0), Some(area)) => {
            report.push(
                "M8_area_rate",
                CheckResult::from_violation(
                    tol.identity_rel,
                    worst(&t, interior(n), |i| (centered(&t, &area, i) - 2.0 * PI - logk[i]).abs() / (2.0 * PI)),
                ),
            );
            report.push(
                "M8_area_lower",
                CheckResult::from_violation(
                    tol.area_abs,
                    worst(&t, all(), |i| a0 + 2.0 * PI * (t[i] - init.t) - area[i]),
                ),
            );
        }
        _ => {
            report.push("M8_area_rate", CheckResult::not_applicable());
            report.push("M8_area_lower", CheckResult::not_applicable());
        }
    }

    // M9: (‖h_θ‖²)' = −2∫σ², (‖h‖²)' = 4ωπ
    let sscale = 2.0 * max_abs(logk.iter().copied()) + 1e-12 * h0[0].abs();
    report.push(
        "M9_h1_rate",
        CheckResult::from_violation(
            tol.identity_rel,
            worst(&t, interior(n), |i| (centered(&t, &h1, i) + 2.0 * logk[i]).abs() / sscale),
        ),
    );
    let h1scale = max_abs(h1.iter().copied()).max(1e-12 * h0[0].abs());
    report.push(
        "M9_h1_monotone",
        CheckResult::from_violation(tol.monotone_rel, worst(&t, steps(), |i| (h1[i + 1] - h1[i]) / h1scale)),
    );
    let slope = if n >= 3 { linear_fit(&t, &h0).map(|(s, _)| s) } else { None };
    report.push(
        "M9_h_l2_slope",
        match slope {
            Some(s) => CheckResult::from_violation(tol.slope_rel, Some(((s - 2.0 * w).abs() / (2.0 * w), t[n - 1])))
                .with_value(s),
            None => CheckResult::not_applicable(),
        },
    );

    // M10: once ∫σ² ≤ 1/(22ωπ), it never increases
    let threshold = 1.0 / (11.0 * w);
    report.push(
        "M10_logk_small_forever",
        match logk.iter().position(|&v| v <= threshold) {
            Some(start) if start + 1 < n => CheckResult::from_violation(
                tol.monotone_rel,
                worst(&t, start..n - 1, |i| (logk[i + 1] - logk[i]) / threshold),
            ),
            _ => CheckResult::not_applicable(),
        },
    );

    // M11: L ≥ (2/c₂) log(1 + c₂ωπ/kmin) with c₂ = ‖k_θ‖∞
    report.push(
        "M11_gradient_bound",
        CheckResult::from_violation(
            tol.inequality_rel,
            worst(&t, all(), |i| {
                let r = &recs[i];
                (gradient_length_bound(r.kgrad_inf, r.kmin, omega) - r.length) / r.length
            }),
        ),
    );
}

fn rescaled_checks(
    report: &mut MonitorReport,
    recs: &[DiagnosticsRecord],
    init: &DiagnosticsRecord,
    omega: u32,
    xi_max: f64,
    variant: FlowVariant,
    tol: &MonitorTolerances,
) {
    let n = recs.len();
    let t: Vec<f64> = recs.iter().map(|r| r.t).collect();
    let w = 2.0 * PI * omega as f64;
    let c_l = length_bound_constant(init.length, init.k_l1, omega);

    if variant == FlowVariant::RescaledChainrule {
        let lower = init.length.min(1.0);
        report.push(
            "M12_length_bracket",
            CheckResult::from_violation(
                tol.inequality_rel,
                worst(&t, 0..n, |i| {
                    let l = recs[i].length;
                    ((lower - l) / lower).max((l - c_l) / c_l)
                }),
            )
            .with_value(c_l),
        );

        // 8ωπ ≥ k ≥ ωπ/(2 c_L) from some time on
        let (klo, khi) = (0.25 * w / c_l, 4.0 * w);
        let inside = |r: &DiagnosticsRecord| r.kmin >= klo && r.kmax <= khi;
        let entry = recs.iter().position(inside);
        report.push(
            "M12_curvature_bracket",
            match entry {
                None => CheckResult {
                    status: CheckStatus::Fail,
                    slack: Some(f64::NEG_INFINITY),
                    worst_t: t.last().copied(),
                    value: None,
                },
                Some(start) => {
                    let viol = worst(&t, start..n, |i| {
                        let r = &recs[i];
                        ((klo - r.kmin) / klo).max((r.kmax - khi) / khi)
                    });
                    let mut res = CheckResult::from_violation(0.0, viol.map(|(v, ti)| (v.max(-1.0), ti)));
                    res.worst_t = Some(t[start]);
                    res
                }
            },
        );
    } else {
        report.push("M12_length_bracket", CheckResult::not_applicable());
        report.push("M12_curvature_bracket", CheckResult::not_applicable());
    }

    for p in 1..=4usize {
        let y: Vec<f64> = recs.iter().map(|r| r.h_seminorms[p]).collect();
        let floor = roundoff_floor(init, p, xi_max);
        let name = format!("M12_decay_p{p}");
        let res = match fit_decay_rate(&t, &y, floor) {
            Some(rate) => CheckResult::from_violation(0.0, Some((-rate, *t.last().unwrap()))).with_value(rate),
            None => CheckResult::not_applicable(),
        };
        report.push(&name, res);
    }
}

/// Seminorm level below which round-off dominates: `(1e3·ε·ξ_max^p)²·‖h‖₂²`.
fn roundoff_floor(init: &DiagnosticsRecord, p: usize, xi_max: f64) -> f64 {
    (1e3 * f64::EPSILON * xi_max.powi(p as i32)).powi(2) * init.h_seminorms[0]
}
