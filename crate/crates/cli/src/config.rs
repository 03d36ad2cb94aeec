//! Run configuration: JSON file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use entflow::flow::FlowVariant;
use entflow::support::{read_curve_file, read_support_file, support_from_points};
use entflow::{Error, IngestMode, PeriodicGrid, StepperConfig, SupportGrid};
use serde::{Deserialize, Serialize};

/// One term `cos_coeff·cos(mode·θ) + sin_coeff·sin(mode·θ)`; `mode·ω` must be an integer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm(pub f64, pub f64, pub f64);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    Fourier { constant: f64, terms: Vec<FourierTerm> },
    CurveFile { path: PathBuf },
    SupportFile { path: PathBuf },
}

impl Default for InitialData {
    fn default() -> Self {
        Self::Circle { r: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub omega: u32,
    pub n: usize,
    pub variant: FlowVariant,
    pub initial: InitialData,
    pub t_end: f64,
    pub stepper: StepperConfig,
    pub monitor_every: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Geometric ratio of extra records inside the initial smoothing layer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_layer: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega: 1,
            n: 32,
            variant: FlowVariant::Unscaled,
            initial: InitialData::default(),
            t_end: 1.0,
            stepper: StepperConfig::default(),
            monitor_every: 1e-3,
            output_dir: PathBuf::from("out"),
            seed: 0,
            record_layer: None,
        }
    }
}

/// Values given on the command line; each replaces the file value when set.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub t_end: Option<f64>,
    pub variant: Option<FlowVariant>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.output_dir {
            self.output_dir = d.clone();
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(n) = o.n {
            self.n = n;
        }
        if let Some(t) = o.t_end {
            self.t_end = t;
        }
        if let Some(v) = o.variant {
            self.variant = v;
        }
    }

    /// Checks scalar fields; the initial data are checked by [`RunConfig::initial_support`].
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.omega == 0 {
            return bad("omega must be at least 1".into());
        }
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return bad(format!("n must be an even integer ≥ 8, got {}", self.n));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.monitor_every > 0.0 && self.monitor_every.is_finite()) {
            return bad(format!("monitor_every must be positive, got {}", self.monitor_every));
        }
        if let Some(r) = self.record_layer {
            if !(r > 1.0 && r.is_finite()) {
                return bad(format!("record_layer must exceed 1, got {r}"));
            }
        }
        self.stepper.validate()
    }

    /// Builds and validates the initial support function.
    pub fn initial_support(&self) -> Result<SupportGrid, Error> {
        self.validate()?;
        let grid = PeriodicGrid::new(self.omega, self.n)?;
        match &self.initial {
            InitialData::Circle { r } => {
                if !(*r > 0.0 && r.is_finite()) {
                    return Err(Error::InvalidArgument(format!("circle radius must be positive, got {r}")));
                }
                SupportGrid::from_fn(&grid, |_| *r)
            }
            InitialData::Ellipse { a, b } => {
                if self.omega != 1 {
                    return Err(Error::InvalidArgument("ellipse initial data need omega = 1".into()));
                }
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::InvalidArgument(format!("ellipse axes must be positive, got {a}, {b}")));
                }
                SupportGrid::from_fn(&grid, |t| ellipse_support(*a, *b, t))
            }
            InitialData::Fourier { constant, terms } => {
                for &FourierTerm(m, _, _) in terms {
                    let mw = m * self.omega as f64;
                    if !(m >= 0.0 && (mw - mw.round()).abs() < 1e-12) {
                        return Err(Error::InvalidArgument(format!(
                            "fourier mode {m} is not {}-periodic on [0, 2·{}π)",
                            2 * self.omega,
                            self.omega
                        )));
                    }
                }
                SupportGrid::from_fn(&grid, |t| fourier_support(*constant, terms, t))
            }
            InitialData::CurveFile { path } => {
                let points = read_curve_file(path)?;
                support_from_points(&points, self.omega, self.n, IngestMode::Immersed)
            }
            InitialData::SupportFile { path } => read_support_file(path, self.omega, Some(self.n)),
        }
    }
}

/// Support function of the centred ellipse with semi-axes `a` (x) and `b` (y).
pub fn ellipse_support(a: f64, b: f64, theta: f64) -> f64 {
    (a * a * theta.cos().powi(2) + b * b * theta.sin().powi(2)).sqrt()
}

pub fn fourier_support(constant: f64, terms: &[FourierTerm], theta: f64) -> f64 {
    terms
        .iter()
        .fold(constant, |acc, &FourierTerm(m, c, s)| acc + c * (m * theta).cos() + s * (m * theta).sin())
}
