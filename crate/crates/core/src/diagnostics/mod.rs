//! Functionals of a support function and the per-snapshot diagnostics record.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{self, FlowState};
use crate::spectral::MAX_DERIV_ORDER;
use crate::support::SupportGrid;

mod monitors;

pub use monitors::{
    fit_decay_rate, gradient_length_bound, length_bound_constant, run_monitors, CheckResult, CheckStatus, MonitorReport,
    MonitorTolerances,
};

/// Entropy `∫ log k dθ`.
pub fn entropy(s: &SupportGrid) -> Result<f64> {
    Ok(s.curvature()?.map(f64::ln).integrate())
}

/// Length `∫ h dθ`, equal to `∫ 1/k dθ`.
pub fn length(s: &SupportGrid) -> f64 {
    s.h().integrate()
}

/// Enclosed area `½∫(h² − h_θ²) dθ`; winding number 1 only.
pub fn area(s: &SupportGrid) -> Result<f64> {
    if s.omega() != 1 {
        return Err(Error::NotApplicable("area"));
    }
    Ok(0.5 * (seminorm(s, 0)? - seminorm(s, 1)?))
}

/// `‖k_θθ + k‖₂²`.
pub fn velocity_l2sq(s: &SupportGrid) -> Result<f64> {
    Ok(flow::rhs_unscaled(s)?.map(|f| f * f).integrate())
}

/// `∫ (∂_θ^p h)² dθ`, computed from the modes.
pub fn seminorm(s: &SupportGrid, p: u32) -> Result<f64> {
    if p > MAX_DERIV_ORDER {
        return Err(Error::UnsupportedOrder(p));
    }
    s.h().deriv_l2sq(p)
}

/// `∫ ((log k)_θ)² dθ`.
pub fn logk_dirichlet(s: &SupportGrid) -> Result<f64> {
    let k = s.curvature()?;
    let kt = k.deriv(1)?;
    Ok(kt.zip_map(&k, |a, b| (a / b).powi(2))?.integrate())
}

/// `∫ (½ k k_θθ² + ⅓ k³) dθ`, the dissipation bounding `−L''`.
pub fn length_dissipation(s: &SupportGrid) -> Result<f64> {
    let k = s.curvature()?;
    let ktt = k.deriv(2)?;
    Ok(ktt
        .zip_map(&k, |a, b| 0.5 * b * a * a + b * b * b / 3.0)?
        .integrate())
}

/// One row of monitored quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub entropy: f64,
    pub length: f64,
    pub area: Option<f64>,
    pub f_l2sq: f64,
    /// `‖∂_θ^p h‖₂²` for `p = 0..=4`.
    pub h_seminorms: [f64; 5],
    pub logk_dirichlet: f64,
    pub kmin: f64,
    pub kmax: f64,
    pub kgrad_inf: f64,
    pub k_l1: f64,
    pub margin: f64,
    pub dt_used: f64,
    /// `∫ (½ k k_θθ² + ⅓ k³) dθ`; not part of the CSV layout.
    #[serde(skip)]
    pub length_dissipation: f64,
}

pub fn record(state: &FlowState, dt_used: f64) -> Result<DiagnosticsRecord> {
    let s = &state.support;
    let k = s.curvature()?;
    let [kt, ktt] = <[_; 2]>::try_from(k.derivs(&[1, 2])?).expect("two derivatives");
    let integrate = |f: &dyn Fn(usize) -> f64| s.grid().spacing() * (0..s.n()).map(f).sum::<f64>();
    let (kv, ktv, kttv) = (k.values(), kt.values(), ktt.values());
    let mut h_seminorms = [0.0; 5];
    for (p, v) in h_seminorms.iter_mut().enumerate() {
        *v = seminorm(s, p as u32)?;
    }
    Ok(DiagnosticsRecord {
        t: state.time,
        entropy: integrate(&|j| kv[j].ln()),
        length: length(s),
        area: (s.omega() == 1).then(|| 0.5 * (h_seminorms[0] - h_seminorms[1])),
        f_l2sq: integrate(&|j| (kttv[j] + kv[j]).powi(2)),
        h_seminorms,
        logk_dirichlet: integrate(&|j| (ktv[j] / kv[j]).powi(2)),
        kmin: k.min(),
        kmax: k.max(),
        kgrad_inf: kt.max_abs(),
        k_l1: k.integrate(),
        margin: 1.0 / k.max(),
        dt_used,
        length_dissipation: integrate(&|j| 0.5 * kv[j] * kttv[j] * kttv[j] + kv[j].powi(3) / 3.0),
    })
}

pub const CSV_HEADER: &str =
    "t,entropy,length,area,f_l2sq,h0,h1,h2,h3,h4,logk_dirichlet,kmin,kmax,kgrad_inf,k_l1,margin,dt";

pub fn records_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity((records.len() + 1) * 400);
    out.push_str(CSV_HEADER);
    out.push('\n');
    let f = |v: f64| format!("{v:.16e}");
    for r in records {
        let mut cols = vec![f(r.t), f(r.entropy), f(r.length), r.area.map(f).unwrap_or_default(), f(r.f_l2sq)];
        cols.extend(r.h_seminorms.iter().map(|&v| f(v)));
        cols.extend([r.logk_dirichlet, r.kmin, r.kmax, r.kgrad_inf, r.k_l1, r.margin, r.dt_used].map(f));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: impl AsRef<Path>, records: &[DiagnosticsRecord]) -> Result<()> {
    fs::File::create(path)?.write_all(records_to_csv(records).as_bytes())?;
    Ok(())
}

/// Parses a diagnostics CSV; `length_dissipation` is not stored and reads back as NaN.
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<DiagnosticsRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let perr = |msg: String| Error::Parse {
        path: path.to_path_buf(),
        msg,
    };
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(CSV_HEADER) {
        return Err(perr("unexpected CSV header".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 17 {
                return Err(perr(format!("row {}: expected 17 columns, got {}", i + 2, cols.len())));
            }
            let num = |c: usize| {
                cols[c]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| perr(format!("row {}: column {} is not a number", i + 2, c + 1)))
            };
            let area = if cols[3].trim().is_empty() { None } else { Some(num(3)?) };
            Ok(DiagnosticsRecord {
                t: num(0)?,
                entropy: num(1)?,
                length: num(2)?,
                area,
                f_l2sq: num(4)?,
                h_seminorms: [num(5)?, num(6)?, num(7)?, num(8)?, num(9)?],
                logk_dirichlet: num(10)?,
                kmin: num(11)?,
                kmax: num(12)?,
                kgrad_inf: num(13)?,
                k_l1: num(14)?,
                margin: num(15)?,
                dt_used: num(16)?,
                length_dissipation: f64::NAN,
            })
        })
        .collect()
}

/// `2ωπ·log(2ωπ/L)`, the entropy lower bound at length `L`.
pub fn entropy_lower_bound(length: f64, omega: u32) -> f64 {
    let c = 2.0 * PI * omega as f64;
    c * (c / length).ln()
}
