//! Run configuration: a nested TOML document with cross-field validation.

use std::path::{Path, PathBuf};

use elsim::initial::{FourierMode, Preset};
use elsim::solver::Mode;
use elsim::{Discretization, Grid, ModelParams, SolverConfig};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const OUTPUT_DIR_ENV: &str = "ELSIM_OUTPUT_DIR";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    /// A violated rule, named by a stable identifier.
    #[error("invalid config [{rule}]: {detail}")]
    Invalid { rule: &'static str, detail: String },
}

fn invalid<T>(rule: &'static str, detail: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid { rule, detail: detail.into() })
}

/// A scalar applied to all three axes, or one value per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    Same(T),
    Each([T; 3]),
}

impl<T: Copy> PerAxis<T> {
    pub fn get(self) -> [T; 3] {
        match self {
            PerAxis::Same(v) => [v; 3],
            PerAxis::Each(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: PerAxis<usize>,
    #[serde(default = "default_box")]
    pub box_length: PerAxis<f64>,
}

fn default_box() -> PerAxis<f64> {
    PerAxis::Same(2.0 * std::f64::consts::PI)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsSection {
    pub alpha: f64,
    pub nu: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for ParamsSection {
    fn default() -> Self {
        let p = ModelParams::default();
        Self { alpha: p.alpha, nu: p.nu, lambda: p.lambda, gamma: p.gamma }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_disc")]
    pub discretization: String,
    #[serde(default = "default_cfl")]
    pub cfl_guard: f64,
    #[serde(default = "default_true")]
    pub mollify_ericksen_gradient: bool,
}

fn default_mode() -> String {
    "direct".into()
}
fn default_disc() -> String {
    "spectral".into()
}
fn default_cfl() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub component: usize,
    pub k: [i32; 3],
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

impl From<&ModeSpec> for FourierMode {
    fn from(m: &ModeSpec) -> Self {
        FourierMode { component: m.component, k: m.k, amplitude: m.amplitude, phase: m.phase }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub director_base: Option<[f64; 3]>,
    #[serde(default)]
    pub u_modes: Vec<ModeSpec>,
    #[serde(default)]
    pub d_modes: Vec<ModeSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiScanSection {
    pub radii: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_pressure_exponent")]
    pub pressure_exponent: f64,
}

pub fn default_threshold() -> f64 {
    0.5
}
fn default_stride() -> usize {
    1
}
fn default_pressure_exponent() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsSection {
    #[serde(default = "default_every")]
    pub energy_every: usize,
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub phi_scan: Option<PhiScanSection>,
}

fn default_every() -> usize {
    1
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        Self { energy_every: 1, snapshot_every: 0, phi_scan: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub grid: GridSection,
    #[serde(default)]
    pub params: ParamsSection,
    pub solver: SolverSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsSection,
}

fn default_output() -> PathBuf {
    PathBuf::from("elsim-out")
}

/// How the initial state is built.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Preset(Preset),
    Modes { director_base: [f64; 3], u: Vec<FourierMode>, d: Vec<FourierMode> },
}

/// A validated configuration resolved into library types.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub grid: Grid,
    pub params: ModelParams,
    pub solver: SolverConfig,
    pub initial: InitialSpec,
    pub energy_every: usize,
    pub phi_scan: Option<PhiScanSection>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

pub fn parse_discretization(s: &str) -> Result<Discretization, ConfigError> {
    match s {
        "spectral" => Ok(Discretization::Spectral),
        "fd2" => Ok(Discretization::FiniteDifference),
        other => invalid("solver.discretization", format!("expected \"spectral\" or \"fd2\", got \"{other}\"")),
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Check every rule and resolve into library types. The output directory
    /// honours the `ELSIM_OUTPUT_DIR` override.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let n = self.grid.n.get();
        if n.iter().any(|&v| v < 4 || v % 2 != 0) {
            return invalid("grid.n", format!("every axis needs an even count >= 4, got {n:?}"));
        }
        let l = self.grid.box_length.get();
        if l.iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return invalid("grid.box_length", format!("lengths must be positive, got {l:?}"));
        }
        let grid = Grid::new(n, l).map_err(|e| ConfigError::Invalid { rule: "grid", detail: e.to_string() })?;

        let p = &self.params;
        let params = ModelParams::new(p.alpha, p.nu, p.lambda, p.gamma)
            .map_err(|e| ConfigError::Invalid { rule: "params", detail: e.to_string() })?;

        let s = &self.solver;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return invalid("solver.dt", format!("dt must be positive, got {}", s.dt));
        }
        if !(s.t_end.is_finite() && s.t_end >= 0.0) {
            return invalid("solver.t_end", format!("t_end must be non-negative, got {}", s.t_end));
        }
        if !(s.cfl_guard.is_finite() && s.cfl_guard > 0.0) {
            return invalid("solver.cfl_guard", format!("cfl_guard must be positive, got {}", s.cfl_guard));
        }
        let mode = match (s.mode.as_str(), s.theta) {
            ("direct", _) => Mode::Direct,
            ("mollified", None) => return invalid("solver.theta", "mollified mode needs theta"),
            ("mollified", Some(theta)) => {
                if !(theta > 0.0 && theta <= 1.0) {
                    return invalid("solver.theta", format!("theta must lie in (0, 1], got {theta}"));
                }
                if s.dt > theta / 4.0 * (1.0 + 1e-12) {
                    return invalid("dt_theta", format!("dt = {} exceeds theta/4 = {}", s.dt, theta / 4.0));
                }
                let steps = s.t_end / s.dt;
                if (steps - steps.round()).abs() > 1e-6 {
                    return invalid("solver.t_end", "mollified runs need t_end to be a multiple of dt");
                }
                Mode::Mollified { theta }
            }
            (other, _) => {
                return invalid("solver.mode", format!("expected \"direct\" or \"mollified\", got \"{other}\""))
            }
        };
        let discretization = parse_discretization(&s.discretization)?;

        let init = &self.initial;
        let has_modes = init.director_base.is_some() || !init.u_modes.is_empty() || !init.d_modes.is_empty();
        let initial = match (&init.preset, has_modes) {
            (Some(_), true) => return invalid("initial", "give either a preset or mode lists, not both"),
            (None, false) => return invalid("initial", "give a preset or mode lists"),
            (Some(name), false) => InitialSpec::Preset(
                name.parse().map_err(|e: elsim::initial::InitialError| ConfigError::Invalid {
                    rule: "initial.preset",
                    detail: e.to_string(),
                })?,
            ),
            (None, true) => {
                if let Some(m) = init.u_modes.iter().chain(&init.d_modes).find(|m| m.component > 2) {
                    return invalid("initial.modes", format!("component must be 0, 1 or 2, got {}", m.component));
                }
                InitialSpec::Modes {
                    director_base: init.director_base.unwrap_or([0.0, 0.0, 1.0]),
                    u: init.u_modes.iter().map(Into::into).collect(),
                    d: init.d_modes.iter().map(Into::into).collect(),
                }
            }
        };

        let dg = &self.diagnostics;
        if dg.energy_every == 0 {
            return invalid("diagnostics.energy_every", "energy_every must be at least 1");
        }
        if let Some(scan) = &dg.phi_scan {
            check_radii(grid, &scan.radii)?;
            if scan.stride == 0 {
                return invalid("diagnostics.phi_scan.stride", "stride must be at least 1");
            }
        }

        let output_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| self.output_dir.clone());
        let solver = SolverConfig {
            dt: s.dt,
            t_end: s.t_end,
            mode,
            discretization,
            snapshot_every: dg.snapshot_every,
            cfl_guard: s.cfl_guard,
            mollify_ericksen_gradient: s.mollify_ericksen_gradient,
        };
        Ok(Resolved {
            grid,
            params,
            solver,
            initial,
            energy_every: dg.energy_every,
            phi_scan: dg.phi_scan.clone(),
            output_dir,
            seed: self.seed,
        })
    }
}

/// Radii must be resolvable (`≥ 2dx`) and below half the box.
pub fn check_radii(grid: Grid, radii: &[f64]) -> Result<(), ConfigError> {
    if radii.is_empty() {
        return invalid("phi_radii", "at least one radius is required");
    }
    let min = 2.0 * grid.min_dx();
    let half = 0.5 * grid.box_length().iter().copied().fold(f64::INFINITY, f64::min);
    for &r in radii {
        if !(r >= min * (1.0 - 1e-12)) {
            return invalid("phi_radii", format!("radius {r} is below 2dx = {min}"));
        }
        if r >= half {
            return invalid("phi_radii", format!("radius {r} reaches half the box ({half})"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 3
[grid]
n = 16
[solver]
dt = 0.01
t_end = 0.1
[initial]
preset = "small-smooth"
"#;

    fn with(extra: &str) -> String {
        format!("{BASE}{extra}")
    }

    fn rule(text: &str) -> String {
        match RunConfig::from_toml(text).unwrap().resolve() {
            Err(e) => e.to_string(),
            Ok(_) => "ok".into(),
        }
    }

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let r = RunConfig::from_toml(BASE).unwrap().resolve().unwrap();
        assert_eq!(r.grid.n(), [16; 3]);
        assert_eq!(r.solver.mode, Mode::Direct);
        assert_eq!(r.solver.discretization, Discretization::Spectral);
        assert_eq!(r.initial, InitialSpec::Preset(Preset::SmallSmooth));
        assert_eq!(r.energy_every, 1);
        assert_eq!(r.params, ModelParams::default());
    }

    #[test]
    fn rejection_messages_are_stable() {
        let mollified = BASE.replace("t_end = 0.1", "t_end = 0.1\nmode = \"mollified\"\ntheta = 0.02");
        assert_eq!(rule(&mollified), "invalid config [dt_theta]: dt = 0.01 exceeds theta/4 = 0.005");
        let no_theta = BASE.replace("t_end = 0.1", "t_end = 0.1\nmode = \"mollified\"");
        assert_eq!(rule(&no_theta), "invalid config [solver.theta]: mollified mode needs theta");
        assert_eq!(
            rule(&BASE.replace("small-smooth", "lumpy")),
            "invalid config [initial.preset]: unknown preset \"lumpy\""
        );
        assert_eq!(
            rule(&with("[diagnostics.phi_scan]\nradii = [0.5]\n")),
            "invalid config [phi_radii]: radius 0.5 is below 2dx = 0.7853981633974483"
        );
        assert_eq!(
            rule(&BASE.replace("n = 16", "n = 15")),
            "invalid config [grid.n]: every axis needs an even count >= 4, got [15, 15, 15]"
        );
        assert_eq!(
            rule(&BASE.replace("dt = 0.01", "dt = 0.01\ndiscretization = \"fd4\"")),
            "invalid config [solver.discretization]: expected \"spectral\" or \"fd2\", got \"fd4\""
        );
        assert_eq!(
            rule(&with("[params]\nalpha = 1.5\n")),
            format!("invalid config [params]: {}", ModelParams::new(1.5, 1.0, 1.0, 1.0).unwrap_err())
        );
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let e = RunConfig::from_toml(&BASE.replace("seed = 3", "seed = 3\nsede = 4")).unwrap_err();
        assert!(matches!(e, ConfigError::Parse(_)), "{e}");
    }

    #[test]
    fn modes_and_per_axis_grid() {
        let text = r#"
[grid]
n = [8, 8, 16]
box_length = [1.0, 1.0, 2.0]
[solver]
dt = 0.01
t_end = 0.0
[initial]
director_base = [1.0, 0.0, 0.0]
[[initial.u_modes]]
component = 0
k = [0, 1, 0]
amplitude = 0.1
"#;
        let r = RunConfig::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(r.grid.n(), [8, 8, 16]);
        match r.initial {
            InitialSpec::Modes { director_base, u, d } => {
                assert_eq!(director_base, [1.0, 0.0, 0.0]);
                assert_eq!(u.len(), 1);
                assert!(d.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::from_toml(BASE).unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml()).unwrap(), c);
    }
}
