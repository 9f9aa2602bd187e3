//! Run configuration, read from TOML.
//!
//! ```toml
//! [model]
//! alpha = 1.5
//! kind = "exp"        # or "poly"
//! beta = 0.5          # gamma = ... for kind = "poly"
//!
//! [grid]
//! L = 50.0
//! v_max = 50.0
//! Nx = 128
//! Nv = 128
//!
//! [time]
//! t_final = 50.0
//! dt = "auto"         # or a number
//! cfl_safety = 0.5
//! ```
//!
//! Every key except `model.alpha` and `model.kind` (with its `beta` or
//! `gamma`) has a default; see the `Default` impls below. Unknown keys are
//! errors.

use std::path::PathBuf;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::diagnostics::RateMode;
use crate::error::{Error, Result};
use crate::lyapunov::ScanConfig;
use crate::model::{Equilibrium, LyapunovSpec, ModelParams, WeightMode};
use crate::solver::{build_grid, cfl_timestep, PhaseGrid, RunSettings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EquilibriumKind {
    Exp,
    Poly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub alpha: f64,
    pub kind: EquilibriumKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    #[serde(rename = "L")]
    pub l: f64,
    pub v_max: f64,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "Nv")]
    pub nv: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { l: 50.0, v_max: 50.0, nx: 128, nv: 128 }
    }
}

/// `"auto"` or an explicit step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum TimeStep {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for TimeStep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeStep::Auto => s.serialize_str("auto"),
            TimeStep::Fixed(dt) => s.serialize_f64(*dt),
        }
    }
}

impl<'de> Deserialize<'de> for TimeStep {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(d)? {
            Raw::Number(dt) => Ok(TimeStep::Fixed(dt)),
            Raw::Text(t) if t == "auto" => Ok(TimeStep::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("dt must be \"auto\" or a number (got {t:?})"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_final: f64,
    pub dt: TimeStep,
    pub cfl_safety: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self { t_final: 50.0, dt: TimeStep::Auto, cfl_safety: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InitialPreset {
    #[default]
    #[serde(rename = "paper-default")]
    PaperDefault,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct InitialSection {
    pub preset: InitialPreset,
    /// Tabulated `x,v,f` CSV on the configured grid; overrides `preset`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSource {
    #[default]
    None,
    /// The mass-normalised `exp(-δ E^{β/2})`.
    Profile,
    /// Computed with the steady-state driver before the run.
    SteadyState,
    /// A checkpoint file given by `reference_file`.
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RateModeName {
    #[default]
    ExpTheta,
    PolyK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    pub snapshot_cadence: u64,
    pub diagnostics_cadence: u64,
    pub reference: ReferenceSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_file: Option<PathBuf>,
    pub rate_mode: RateModeName,
    pub theta: f64,
    pub burn_fraction: f64,
    pub tail_window: [f64; 2],
    pub delta: f64,
    pub steady_tol: f64,
    pub steady_window: u64,
    pub steady_max_steps: u64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self {
            snapshot_cadence: 1000,
            diagnostics_cadence: 100,
            reference: ReferenceSource::None,
            reference_file: None,
            rate_mode: RateModeName::ExpTheta,
            theta: 0.25,
            burn_fraction: 0.1,
            tail_window: [20.0, 40.0],
            delta: 1.15,
            steady_tol: 1e-8,
            steady_window: 200,
            steady_max_steps: 2_000_000,
        }
    }
}

impl DiagnosticsSection {
    pub fn rate_mode(&self) -> RateMode {
        match self.rate_mode {
            RateModeName::ExpTheta => RateMode::ExpTheta { theta: self.theta },
            RateModeName::PolyK => RateMode::PolyK,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    #[default]
    Exp,
    Poly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovSection {
    pub ell: f64,
    pub eps: f64,
    pub a_exp: f64,
    pub b_exp: f64,
    pub weight: WeightKind,
    pub theta: f64,
    pub delta: f64,
    pub k: f64,
    pub x_half_width: f64,
    pub v_half_width: f64,
    pub samples_per_axis: usize,
    pub radii: Vec<f64>,
    pub fd_step: f64,
}

impl Default for LyapunovSection {
    fn default() -> Self {
        let scan = ScanConfig::default();
        Self {
            ell: 2.0,
            eps: 0.3,
            a_exp: 0.75,
            b_exp: 0.5,
            weight: WeightKind::Exp,
            theta: 0.25,
            delta: 2.0,
            k: 1.5,
            x_half_width: scan.x_half_width,
            v_half_width: scan.v_half_width,
            samples_per_axis: scan.samples_per_axis,
            radii: scan.radii,
            fd_step: scan.fd_step,
        }
    }
}

impl LyapunovSection {
    pub fn spec(&self) -> LyapunovSpec {
        let mode = match self.weight {
            WeightKind::Exp => WeightMode::Exp { theta: self.theta, delta: self.delta },
            WeightKind::Poly => WeightMode::Poly { k: self.k },
        };
        LyapunovSpec { ell: self.ell, eps: self.eps, a_exp: self.a_exp, b_exp: self.b_exp, mode }
    }

    pub fn scan(&self) -> ScanConfig {
        ScanConfig {
            x_half_width: self.x_half_width,
            v_half_width: self.v_half_width,
            samples_per_axis: self.samples_per_axis,
            radii: self.radii.clone(),
            fd_step: self.fd_step,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    #[default]
    Csv,
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub snapshot_format: SnapshotFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), snapshot_format: SnapshotFormat::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
    #[serde(default)]
    pub lyapunov: LyapunovSection,
    #[serde(default)]
    pub output: OutputSection,
}

const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("model", &["alpha", "kind", "beta", "gamma"]),
    ("grid", &["L", "v_max", "Nx", "Nv"]),
    ("time", &["t_final", "dt", "cfl_safety"]),
    ("initial", &["preset", "file"]),
    (
        "diagnostics",
        &[
            "snapshot_cadence",
            "diagnostics_cadence",
            "reference",
            "reference_file",
            "rate_mode",
            "theta",
            "burn_fraction",
            "tail_window",
            "delta",
            "steady_tol",
            "steady_window",
            "steady_max_steps",
        ],
    ),
    (
        "lyapunov",
        &[
            "ell",
            "eps",
            "a_exp",
            "b_exp",
            "weight",
            "theta",
            "delta",
            "k",
            "x_half_width",
            "v_half_width",
            "samples_per_axis",
            "radii",
            "fd_step",
        ],
    ),
    ("output", &["directory", "snapshot_format"]),
];

fn unknown_keys(table: &toml::Table) -> Vec<String> {
    let mut out = Vec::new();
    for (section, value) in table {
        let Some((_, keys)) = KNOWN_KEYS.iter().find(|(name, _)| name == section) else {
            out.push(format!("{section}: unknown section"));
            continue;
        };
        match value.as_table() {
            Some(t) => {
                for key in t.keys() {
                    if !keys.contains(&key.as_str()) {
                        out.push(format!("{section}.{key}: unknown key"));
                    }
                }
            }
            None => out.push(format!("{section}: expected a table")),
        }
    }
    out
}

/// Parses and validates a configuration, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let unknown = unknown_keys(&table);
    if !unknown.is_empty() {
        return Err(Error::Config(unknown));
    }
    let config: RunConfig =
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
    let problems = config.violations();
    if problems.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(problems))
    }
}

impl RunConfig {
    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration is always representable")
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let m = &self.model;
        let equilibrium = match m.kind {
            EquilibriumKind::Exp => Equilibrium::Exp {
                beta: m.beta.ok_or_else(|| Error::param("model.beta is required for kind = \"exp\""))?,
            },
            EquilibriumKind::Poly => Equilibrium::Poly {
                gamma: m.gamma.ok_or_else(|| Error::param("model.gamma is required for kind = \"poly\""))?,
            },
        };
        ModelParams::new(m.alpha, equilibrium, 1)
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        build_grid(self.grid.l, self.grid.v_max, self.grid.nx, self.grid.nv)
    }

    /// Step size: the CFL value for `"auto"`, otherwise the given one.
    pub fn dt(&self, grid: &PhaseGrid, params: &ModelParams) -> f64 {
        match self.time.dt {
            TimeStep::Auto => cfl_timestep(grid, params, self.time.cfl_safety),
            TimeStep::Fixed(dt) => dt,
        }
    }

    pub fn run_settings(&self) -> Result<RunSettings> {
        let params = self.model_params()?;
        let grid = self.phase_grid()?;
        Ok(RunSettings {
            t_final: self.time.t_final,
            dt: self.dt(&grid, &params),
            snapshot_cadence: self.diagnostics.snapshot_cadence,
            diagnostics_cadence: self.diagnostics.diagnostics_cadence,
        })
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = &self.model;
        if !(m.alpha > 1.0) {
            out.push(format!("model.alpha: alpha must exceed 1 (got {})", m.alpha));
        }
        match m.kind {
            EquilibriumKind::Exp => {
                if m.gamma.is_some() {
                    out.push("model.gamma: only used with kind = \"poly\"".into());
                }
                match m.beta {
                    None => out.push("model.beta: required for kind = \"exp\"".into()),
                    Some(b) if !(b > 0.0) => out.push(format!("model.beta: must be positive (got {b})")),
                    _ => {}
                }
            }
            EquilibriumKind::Poly => {
                if m.beta.is_some() {
                    out.push("model.beta: only used with kind = \"exp\"".into());
                }
                match m.gamma {
                    None => out.push("model.gamma: required for kind = \"poly\"".into()),
                    Some(g) if !(g > 1.0) => out.push(format!("model.gamma: must exceed 1 (got {g})")),
                    _ => {}
                }
            }
        }
        let params = if out.is_empty() {
            match self.model_params() {
                Ok(p) => Some(p),
                Err(e) => {
                    out.push(format!("model: {e}"));
                    None
                }
            }
        } else {
            None
        };
        let grid = match self.phase_grid() {
            Ok(g) => Some(g),
            Err(e) => {
                out.push(format!("grid: {e}"));
                None
            }
        };
        let t = &self.time;
        if !(t.t_final >= 0.0 && t.t_final.is_finite()) {
            out.push(format!("time.t_final: must be finite and nonnegative (got {})", t.t_final));
        }
        if !(t.cfl_safety > 0.0 && t.cfl_safety <= 1.0) {
            out.push(format!("time.cfl_safety: must lie in (0, 1] (got {})", t.cfl_safety));
        } else if let TimeStep::Fixed(dt) = t.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                out.push(format!("time.dt: must be positive (got {dt})"));
            } else if let (Some(p), Some(g)) = (&params, &grid) {
                let bound = cfl_timestep(g, p, t.cfl_safety);
                if dt > bound {
                    out.push(format!("time.dt: {dt:e} exceeds the CFL bound {bound:e}"));
                }
            }
        }
        let d = &self.diagnostics;
        if d.snapshot_cadence == 0 {
            out.push("diagnostics.snapshot_cadence: must be positive".into());
        }
        if d.diagnostics_cadence == 0 {
            out.push("diagnostics.diagnostics_cadence: must be positive".into());
        }
        if d.reference == ReferenceSource::File && d.reference_file.is_none() {
            out.push("diagnostics.reference_file: required when reference = \"file\"".into());
        }
        if d.reference == ReferenceSource::Profile && m.kind != EquilibriumKind::Exp {
            out.push("diagnostics.reference: \"profile\" needs kind = \"exp\"".into());
        }
        if !(d.theta > 0.0 && d.theta <= 1.0) {
            out.push(format!("diagnostics.theta: must lie in (0, 1] (got {})", d.theta));
        }
        if !(0.0..1.0).contains(&d.burn_fraction) {
            out.push(format!("diagnostics.burn_fraction: must lie in [0, 1) (got {})", d.burn_fraction));
        }
        if !(d.tail_window[0] < d.tail_window[1]) {
            out.push(format!("diagnostics.tail_window: lower end must be below upper end (got {:?})", d.tail_window));
        }
        if !(d.delta > 0.0) {
            out.push(format!("diagnostics.delta: must be positive (got {})", d.delta));
        }
        if !(d.steady_tol > 0.0) {
            out.push(format!("diagnostics.steady_tol: must be positive (got {})", d.steady_tol));
        }
        if d.steady_window == 0 || d.steady_max_steps == 0 {
            out.push("diagnostics.steady_window, steady_max_steps: must be positive".into());
        }
        let ly = &self.lyapunov;
        if let Some(p) = &params {
            if let Err(e) = ly.spec().validate(p) {
                out.push(format!("lyapunov: {e}"));
            }
        }
        if let Err(e) = ly.scan().validate() {
            out.push(format!("lyapunov: {e}"));
        }
        out
    }
}
