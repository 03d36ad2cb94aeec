//! Subcommands and their artifacts.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use entflow::diagnostics::{write_csv, CSV_HEADER};
use entflow::flow::{evolve_at, record_times, write_snapshot};
use entflow::graph::{
    build_bundle, check_parametrization_identity, operator_split, velocity_graph, BaseCurve, FrameConvention,
    GraphCurveScene, RhoSampler,
};
use entflow::support::write_curve_file;
use entflow::{run_monitors, Error, FlowState, GridFunction, MonitorReport, MonitorTolerances, Trajectory};
use indexmap::IndexMap;
use serde::Serialize;

use crate::acceptance::{self, concentric_velocity_error, CriterionOutcome};
use crate::config::{InitialData, RunConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitStatus {
    Success,
    Validation,
    Breakdown,
    MonitorFailure,
    Io,
}

impl ExitStatus {
    pub fn code(self) -> u8 {
        match self {
            Self::Success => 0,
            Self::Validation => 1,
            Self::Breakdown => 2,
            Self::MonitorFailure => 3,
            Self::Io => 4,
        }
    }
}

#[derive(Debug)]
pub struct CommandError {
    pub status: ExitStatus,
    pub message: String,
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CommandError {}

impl CommandError {
    /// An error raised before any stepping.
    pub fn setup(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => ExitStatus::Io,
            _ => ExitStatus::Validation,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }

    /// An error raised while the flow runs.
    fn during_run(e: Error) -> Self {
        let status = match e {
            Error::Io(_) => ExitStatus::Io,
            Error::FlowBreakdown { .. }
            | Error::NonPositiveSupport { .. }
            | Error::NotLocallyConvex { .. }
            | Error::StepRejected { .. } => ExitStatus::Breakdown,
            _ => ExitStatus::Validation,
        };
        Self {
            status,
            message: e.to_string(),
        }
    }

    fn io(path: &Path, e: impl fmt::Display) -> Self {
        Self {
            status: ExitStatus::Io,
            message: format!("{}: {e}", path.display()),
        }
    }
}

/// What a successful (or monitor-failing) command reports.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: ExitStatus,
    pub summary: String,
}

pub type CommandResult = Result<Outcome, CommandError>;

#[derive(Serialize)]
struct RunReport<'a> {
    command: &'a str,
    variant: String,
    omega: u32,
    n: usize,
    records: usize,
    t_final: f64,
    summary: IndexMap<String, f64>,
    monitors: &'a MonitorReport,
    failures: Vec<&'a str>,
    exit_code: u8,
}

fn create_dir(path: &Path) -> Result<(), CommandError> {
    fs::create_dir_all(path).map_err(|e| CommandError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CommandError> {
    fs::write(path, text).map_err(|e| CommandError::io(path, e))
}

fn core_io(path: &Path) -> impl Fn(Error) -> CommandError + '_ {
    move |e| match e {
        Error::Io(inner) => CommandError::io(path, inner),
        other => CommandError::during_run(other),
    }
}

/// Writes `effective_config.json`, which reloads to the same run.
fn write_effective_config(cfg: &RunConfig) -> Result<(), CommandError> {
    create_dir(&cfg.output_dir)?;
    write_text(&cfg.output_dir.join("effective_config.json"), &(cfg.to_json() + "\n"))
}

/// Diagnostics CSV, one snapshot and one curve file per record.
fn write_trajectory(dir: &Path, tr: &Trajectory) -> Result<(), CommandError> {
    let snaps = dir.join("snapshots");
    let curves = dir.join("curves");
    create_dir(&snaps)?;
    create_dir(&curves)?;
    let csv = dir.join("diagnostics.csv");
    write_csv(&csv, &tr.records).map_err(core_io(&csv))?;
    for (i, state) in tr.states.iter().enumerate() {
        let p = snaps.join(format!("snap_{i:05}.txt"));
        write_snapshot(&p, state).map_err(core_io(&p))?;
        let c = curves.join(format!("curve_{i:05}.txt"));
        let sample = state.support.reconstruct().map_err(CommandError::during_run)?;
        write_curve_file(&c, &sample.points).map_err(core_io(&c))?;
    }
    Ok(())
}

fn run_flow(command: &str, cfg: &RunConfig) -> CommandResult {
    let s = cfg.initial_support().map_err(CommandError::setup)?;
    let times = record_times(0.0, cfg.t_end, cfg.monitor_every, cfg.record_layer).map_err(CommandError::setup)?;
    write_effective_config(cfg)?;
    let state = FlowState::new(s, cfg.variant);
    let tr = match evolve_at(&state, &times, &cfg.stepper, |_, _| {}) {
        Ok(tr) => tr,
        Err(Error::FlowBreakdown { state, halvings }) => {
            let p = cfg.output_dir.join("breakdown_state.txt");
            write_snapshot(&p, &state).map_err(core_io(&p))?;
            return Err(CommandError::during_run(Error::FlowBreakdown { state, halvings }));
        }
        Err(e) => return Err(CommandError::during_run(e)),
    };
    write_trajectory(&cfg.output_dir, &tr)?;

    let report = run_monitors(&tr, &tr.records[0], &MonitorTolerances::default());
    let last = tr.last().expect("trajectory has the initial state");
    let mut summary = IndexMap::new();
    let h = last.h();
    let mean = h.mean();
    summary.insert("final_mean_h".into(), mean);
    summary.insert(
        "final_sup_deviation".into(),
        h.values().iter().map(|v| (v - mean).abs()).fold(0.0, f64::max),
    );
    if cfg.variant.is_rescaled() {
        for p in 1..=4 {
            let rate = report.get(&format!("M12_decay_p{p}")).and_then(|c| c.value);
            summary.insert(format!("decay_rate_p{p}"), rate.unwrap_or(f64::NAN));
        }
    }
    let status = if report.passed() {
        ExitStatus::Success
    } else {
        ExitStatus::MonitorFailure
    };
    let out = RunReport {
        command,
        variant: cfg.variant.to_string(),
        omega: cfg.omega,
        n: cfg.n,
        records: tr.records.len(),
        t_final: last.time,
        summary,
        monitors: &report,
        failures: report.failures(),
        exit_code: status.code(),
    };
    let json = serde_json::to_string_pretty(&out).expect("report serializes");
    write_text(&cfg.output_dir.join("report.json"), &(json + "\n"))?;

    let mut text = format!(
        "{command}: {} records to t = {}, output in {}",
        tr.records.len(),
        last.time,
        cfg.output_dir.display()
    );
    for (k, v) in &out.summary {
        text.push_str(&format!("\n  {k} = {v:.6e}"));
    }
    if !out.failures.is_empty() {
        text.push_str(&format!("\n  failed monitors: {}", out.failures.join(", ")));
    }
    Ok(Outcome { status, summary: text })
}

pub fn simulate(cfg: &RunConfig) -> CommandResult {
    run_flow("simulate", cfg)
}

pub fn rescaled(cfg: &RunConfig) -> CommandResult {
    if !cfg.variant.is_rescaled() {
        return Err(CommandError::setup(Error::InvalidArgument(format!(
            "rescaled needs a rescaled variant, got '{}'",
            cfg.variant
        ))));
    }
    run_flow("rescaled", cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    /// Rows that are not gated are reported without affecting the exit code.
    pub gated: bool,
    pub passed: bool,
    pub note: String,
}

impl ResidualRow {
    fn new(name: impl Into<String>, residual: f64, threshold: f64, gated: bool, note: &str) -> Self {
        Self {
            name: name.into(),
            residual,
            threshold,
            gated,
            passed: residual <= threshold,
            note: note.into(),
        }
    }
}

fn base_curve(cfg: &RunConfig) -> Result<BaseCurve, Error> {
    cfg.validate()?;
    match cfg.initial {
        InitialData::Circle { r } if cfg.omega == 1 => BaseCurve::circle(r, cfg.n),
        InitialData::Ellipse { a, b } if cfg.omega == 1 => BaseCurve::ellipse(a, b, cfg.n),
        _ if cfg.omega != 1 => Err(Error::NotApplicable("the graph parametrization")),
        _ => BaseCurve::from_support(&cfg.initial_support()?, cfg.n),
    }
}

/// `V` of the zero graph against `k_ss/k² − k_s²/k³ + k` of the base.
fn zero_graph_residual(base: &BaseCurve) -> Result<f64, Error> {
    let rho = GridFunction::constant(base.grid(), 0.0);
    let scene = GraphCurveScene::new(base.clone(), rho, FrameConvention::SelfConsistent)?;
    let v = velocity_graph(&scene)?;
    let (k, ks, kss) = (base.curvature_jet(0), base.curvature_jet(1), base.curvature_jet(2));
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for j in 0..base.n() {
        let expected = kss[j] / (k[j] * k[j]) - ks[j] * ks[j] / k[j].powi(3) + k[j];
        err = err.max((v.values()[j] - expected).abs());
        scale = scale.max(expected.abs());
    }
    Ok(err / scale)
}

/// Residual table of the graph-parametrization checks.
pub fn crosscheck_rows(cfg: &RunConfig, draws: usize) -> Result<Vec<ResidualRow>, Error> {
    let base = base_curve(cfg)?;
    let mut rows = vec![ResidualRow::new(
        "rho=0: V vs k_ss/k^2 - k_s^2/k^3 + k",
        zero_graph_residual(&base)?,
        1e-10,
        true,
        "relative to max|V|",
    )];
    let mut sampler = RhoSampler::new(cfg.seed, 4, 0.05 / base.max_curvature());
    let (mut bundle, mut split) = (0.0f64, 0.0f64);
    for _ in 0..draws {
        let scene = sampler.draw(&base, FrameConvention::SelfConsistent)?;
        bundle = bundle.max(build_bundle(&scene)?.direct_residuals.values().copied().fold(0.0, f64::max));
        split = split.max(operator_split(&scene)?.residual);
    }
    let note = format!("max over {draws} seeded draws");
    rows.push(ResidualRow::new("bundle vs direct differentiation", bundle, 1e-8, true, &note));
    rows.push(ResidualRow::new("operator split vs velocity", split, 1e-8, true, &note));
    let n = cfg.n.max(16);
    rows.push(ResidualRow::new(
        "rho=0.5 on unit circle: V vs 2/3",
        concentric_velocity_error(0.5, 2.0 / 3.0, n)?,
        1e-10,
        false,
        "literal oracle; the (1 - k0 rho) frame makes this the radius-1/2 circle",
    ));
    rows.push(ResidualRow::new(
        "rho=0.5 on unit circle: V vs 2",
        concentric_velocity_error(0.5, 2.0, n)?,
        1e-10,
        true,
        "radius 1/2",
    ));
    rows.push(ResidualRow::new(
        "rho=-0.5 on unit circle: V vs 2/3",
        concentric_velocity_error(-0.5, 2.0 / 3.0, n)?,
        1e-10,
        true,
        "radius 3/2",
    ));
    rows.push(ResidualRow::new(
        "parametrization identity on the initial support",
        check_parametrization_identity(&cfg.initial_support()?)?,
        // fourth derivatives of arbitrary data at large n; same budget as the bundle rows
        1e-8,
        true,
        "relative to max|k_tt + k|",
    ));
    Ok(rows)
}

fn rows_to_csv(rows: &[ResidualRow]) -> String {
    let mut out = String::from("name,residual,threshold,gated,passed\n");
    for r in rows {
        out.push_str(&format!(
            "\"{}\",{:.16e},{:e},{},{}\n",
            r.name, r.residual, r.threshold, r.gated, r.passed
        ));
    }
    out
}

pub fn crosscheck(cfg: &RunConfig, draws: usize) -> CommandResult {
    let rows = crosscheck_rows(cfg, draws).map_err(CommandError::setup)?;
    write_effective_config(cfg)?;
    write_text(&cfg.output_dir.join("crosscheck.csv"), &rows_to_csv(&rows))?;
    let json = serde_json::to_string_pretty(&rows).expect("rows serialize");
    write_text(&cfg.output_dir.join("crosscheck.json"), &(json + "\n"))?;
    let ok = rows.iter().all(|r| r.passed || !r.gated);
    let mut text = String::from("crosscheck residuals:");
    for r in &rows {
        let tag = match (r.passed, r.gated) {
            (true, _) => "ok  ",
            (false, true) => "FAIL",
            (false, false) => "info",
        };
        text.push_str(&format!(
            "\n  {tag} {:<50} {:>12.4e} (<= {:e})",
            r.name, r.residual, r.threshold
        ));
    }
    Ok(Outcome {
        status: if ok { ExitStatus::Success } else { ExitStatus::MonitorFailure },
        summary: text,
    })
}

/// Runs an acceptance suite; `on_done` sees each criterion as it finishes.
pub fn verify(
    suite: &str,
    out: Option<&Path>,
    mut on_done: impl FnMut(&CriterionOutcome),
) -> CommandResult {
    let ids = acceptance::suite(suite).ok_or_else(|| {
        CommandError::setup(Error::InvalidArgument(format!(
            "unknown suite '{suite}'; expected one of {}",
            acceptance::SUITES.join(", ")
        )))
    })?;
    let mut outcomes = Vec::new();
    for id in ids {
        let o = acceptance::run(id);
        on_done(&o);
        outcomes.push(o);
    }
    if let Some(dir) = out {
        create_dir(dir)?;
        let json = serde_json::to_string_pretty(&outcomes).expect("outcomes serialize");
        write_text(&dir.join(format!("verify_{suite}.json")), &(json + "\n"))?;
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.id.to_string()).collect();
    let summary = if failed.is_empty() {
        format!("{} criteria passed", outcomes.len())
    } else {
        format!("{} of {} criteria failed: {}", failed.len(), outcomes.len(), failed.join(", "))
    };
    Ok(Outcome {
        status: if failed.is_empty() {
            ExitStatus::Success
        } else {
            ExitStatus::MonitorFailure
        },
        summary,
    })
}

/// Writes `plot.gp`, a gnuplot script over `diagnostics.csv` in `dir`.
pub fn plot(dir: &Path) -> Result<PathBuf, CommandError> {
    let column = |name: &str| CSV_HEADER.split(',').position(|c| c == name).map(|i| i + 1).expect("known column");
    let panels = [
        ("length", "L(t)"),
        ("entropy", "entropy(t)"),
        ("f_l2sq", "|F|_2^2(t)"),
        ("h1", "|h_theta|_2^2(t)"),
        ("logk_dirichlet", "int ((log k)_theta)^2"),
        ("kmax", "max k(t)"),
    ];
    let mut gp = String::from(
        "set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 1200,800\n\
         set output 'diagnostics.png'\nset multiplot layout 2,3\n",
    );
    for (col, title) in panels {
        gp.push_str(&format!(
            "set title '{title}'\nplot 'diagnostics.csv' using 1:{} with lines notitle\n",
            column(col)
        ));
    }
    gp.push_str("unset multiplot\n");
    create_dir(dir)?;
    let path = dir.join("plot.gp");
    write_text(&path, &gp)?;
    Ok(path)
}
