//! Subcommand implementations. Each writes its human-readable report to `out`
//! and returns a [`CliError`] that carries the process exit code.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use elsim::diagnostics::{
    candidates_from, log_scales, parabolic_dimension_estimate, phi_scan, Candidate, DimensionReport, EnergyAudit,
    EnergyReport, PhiData, PhiOptions, ScanSpec, SpaceTimePoint,
};
use elsim::initial::{fourier_field, preset_state};
use elsim::mms::{spatial_study, temporal_study, ConvergenceStudy, MmsError};
use elsim::solver::{Sink, SolverError};
use elsim::verify::{run_suite, VerifyOptions, VerifyReport};
use elsim::{Discretization, Operators, ScalarField, SimState, Solver};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{check_radii, parse_discretization, ConfigError, InitialSpec, Resolved, RunConfig, OUTPUT_DIR_ENV};
use crate::snapshot::{self, SnapshotError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Input(_) | CliError::Io(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
            CliError::Numerical(_) => "numerical",
            CliError::Verification(_) => "verification",
        }
    }

    /// Single line for the end of stderr: `ELSIM_ERROR code=<c> kind=<k> detail=<text>`.
    pub fn machine_line(&self) -> String {
        let detail = self.to_string().replace(['\n', '\r'], " ");
        format!("ELSIM_ERROR code={} kind={} detail={}", self.exit_code(), self.kind(), detail)
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        CliError::Input(format!("snapshot: {e}"))
    }
}

pub const ENERGY_HEADER: &str = "t,kinetic,elastic,potential,total,diss_visc,diss_dir,cum_diss,slack";

pub fn energy_row(r: &EnergyReport) -> String {
    [
        r.t,
        r.kinetic,
        r.elastic,
        r.potential,
        r.total,
        r.dissipation_visc,
        r.dissipation_dir,
        r.cumulative_dissipation,
        r.slack,
    ]
    .iter()
    .map(|v| format!("{v:.16e}"))
    .collect::<Vec<_>>()
    .join(",")
}

pub fn build_initial(ops: &Operators, r: &Resolved) -> Result<SimState, CliError> {
    let g = ops.grid();
    let state = match &r.initial {
        InitialSpec::Preset(p) => preset_state(ops, *p, r.params, r.seed),
        InitialSpec::Modes { director_base, u, d } => {
            let bad = |e: elsim::initial::InitialError| ConfigError::Invalid { rule: "initial.modes", detail: e.to_string() };
            SimState {
                u: fourier_field(g, [0.0; 3], u).map_err(bad)?,
                d: fourier_field(g, *director_base, d).map_err(bad)?,
                p: ScalarField::zeros(g),
                t: 0.0,
                params: r.params,
            }
        }
    };
    let u = ops.leray_project(&state.u);
    Ok(SimState { u, p: ScalarField::zeros(g), ..state })
}

struct RunSink<'a> {
    ops: &'a Operators,
    audit: EnergyAudit,
    csv: BufWriter<File>,
    every: usize,
    dir: PathBuf,
    theta: f64,
    snapshots: Vec<PathBuf>,
}

impl Sink for RunSink<'_> {
    fn record(&mut self, step: usize, state: &SimState, snap: bool) -> Result<(), String> {
        let report = self.audit.push(self.ops, state);
        if step.is_multiple_of(self.every) || snap {
            writeln!(self.csv, "{}", energy_row(&report)).map_err(|e| e.to_string())?;
        }
        if snap {
            let path = self.dir.join(snapshot::file_name(step));
            snapshot::write(&path, state, self.theta).map_err(|e| e.to_string())?;
            self.snapshots.push(path);
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<(), String> {
        self.csv.flush().map_err(|e| e.to_string())
    }
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub steps: usize,
    pub final_time: f64,
    pub max_negative_slack: f64,
    pub snapshots: Vec<PathBuf>,
    pub scan: Option<ScanSummary>,
}

fn solver_error(e: SolverError) -> CliError {
    match e {
        SolverError::InvalidConfig(m) => CliError::Config(ConfigError::Invalid { rule: "solver", detail: m }),
        other => CliError::Numerical(other.to_string()),
    }
}

pub fn cmd_run(config: &Path, out: &mut dyn Write) -> Result<RunSummary, CliError> {
    let resolved = RunConfig::load(config)?.resolve()?;
    run_resolved(&resolved, out)
}

pub fn run_resolved(r: &Resolved, out: &mut dyn Write) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&r.output_dir)?;
    let ops = Operators::new(r.grid, r.solver.discretization);
    let initial = build_initial(&ops, r)?;
    let mut solver = Solver::new(r.grid, r.solver).map_err(solver_error)?;
    let mut sink = RunSink {
        ops: &ops,
        audit: EnergyAudit::new(),
        csv: BufWriter::new(File::create(r.output_dir.join("energy.csv"))?),
        every: r.energy_every,
        dir: r.output_dir.clone(),
        theta: r.solver.mode.theta().unwrap_or(0.0),
        snapshots: Vec::new(),
    };
    writeln!(sink.csv, "{ENERGY_HEADER}")?;
    let result = solver.run(initial, &mut sink);
    let steps = sink.audit.reports.len().saturating_sub(1);
    let max_negative_slack = sink.audit.max_negative_slack();
    let snapshots = std::mem::take(&mut sink.snapshots);
    drop(sink);
    let last = result.map_err(solver_error)?;
    writeln!(
        out,
        "run complete: {steps} steps to t = {}, max negative slack {max_negative_slack:.3e}, {} snapshots in {}",
        last.t,
        snapshots.len(),
        r.output_dir.display()
    )?;
    let scan = match &r.phi_scan {
        Some(s) => Some(scan_snapshots(
            &snapshots,
            &ScanRequest {
                radii: s.radii.clone(),
                threshold: s.threshold,
                stride: s.stride,
                discretization: r.solver.discretization,
                pressure_exponent: s.pressure_exponent,
            },
            &r.output_dir,
            out,
        )?),
        None => None,
    };
    Ok(RunSummary { output_dir: r.output_dir.clone(), steps, final_time: last.t, max_negative_slack, snapshots, scan })
}

pub fn verify_table(report: &VerifyReport) -> String {
    let mut s = format!("{:<26} {:<34} {:>12} {:>22}  status\n", "identity", "case", "value", "accepted");
    for r in &report.rows {
        let range = if r.lo == f64::NEG_INFINITY { format!("<= {:.1e}", r.hi) } else { format!("[{}, {}]", r.lo, r.hi) };
        let status = if r.passed() { "ok" } else { "FAIL" };
        s += &format!("{:<26} {:<34} {:>12.3e} {:>22}  {status}\n", r.name, r.detail, r.value, range);
    }
    s
}

pub fn cmd_verify(opts: &VerifyOptions, out: &mut dyn Write) -> Result<VerifyReport, CliError> {
    let report = run_suite(opts);
    write!(out, "{}", verify_table(&report))?;
    if report.all_passed() {
        Ok(report)
    } else {
        Err(CliError::Verification(report.failures().join(",")))
    }
}

#[derive(Clone, Debug)]
pub struct MmsSummary {
    pub spatial: ConvergenceStudy,
    pub temporal: ConvergenceStudy,
}

pub const MMS_SPATIAL_ORDER: f64 = 1.8;
pub const MMS_TEMPORAL_ORDER: f64 = 0.8;

fn study_table(label: &str, h: &str, s: &ConvergenceStudy) -> String {
    let mut t = format!("{label}\n{h:>12} {:>14} {:>8}\n", "error", "order");
    for (i, (x, e)) in s.rows.iter().enumerate() {
        let order = if i == 0 { String::new() } else { format!("{:.3}", s.orders[i - 1]) };
        t += &format!("{x:>12.5e} {e:>14.6e} {order:>8}\n");
    }
    if s.exact {
        t += "spatial error at round-off floor: exact\n";
    }
    t
}

pub fn cmd_mms(
    params: elsim::ModelParams,
    resolutions: &[usize],
    discretization: &str,
    dts: &[f64],
    out: &mut dyn Write,
) -> Result<MmsSummary, CliError> {
    if resolutions.len() < 3 {
        return Err(ConfigError::Invalid {
            rule: "mms.resolutions",
            detail: format!("need at least 3 resolutions, got {}", resolutions.len()),
        }
        .into());
    }
    if dts.len() < 3 {
        return Err(ConfigError::Invalid { rule: "mms.dts", detail: format!("need at least 3 time steps, got {}", dts.len()) }.into());
    }
    let disc = parse_discretization(discretization)?;
    let map = |e: MmsError| match e {
        MmsError::Solver(s) => solver_error(s),
        other => CliError::Config(ConfigError::Invalid { rule: "mms", detail: other.to_string() }),
    };
    let spatial = spatial_study(params, resolutions, disc).map_err(map)?;
    write!(out, "{}", study_table(&format!("spatial ({discretization}, steady)"), "dx", &spatial))?;
    let temporal = temporal_study(params, dts).map_err(map)?;
    write!(out, "{}", study_table("temporal (spectral)", "dt", &temporal))?;
    let mut failed = Vec::new();
    if !spatial.passes(MMS_SPATIAL_ORDER) {
        failed.push(format!("spatial order {:.3} < {MMS_SPATIAL_ORDER}", spatial.min_order()));
    }
    if !temporal.passes(MMS_TEMPORAL_ORDER) {
        failed.push(format!("temporal order {:.3} < {MMS_TEMPORAL_ORDER}", temporal.min_order()));
    }
    if failed.is_empty() {
        Ok(MmsSummary { spatial, temporal })
    } else {
        Err(CliError::Verification(failed.join("; ")))
    }
}

#[derive(Clone, Debug)]
pub struct ScanRequest {
    pub radii: Vec<f64>,
    pub threshold: f64,
    pub stride: usize,
    pub discretization: Discretization,
    pub pressure_exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub x: [f64; 3],
    pub t: f64,
    pub phi_min: f64,
}

impl From<&Candidate> for CandidateRecord {
    fn from(c: &Candidate) -> Self {
        Self { x: c.x, t: c.t, phi_min: c.phi_min }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatesFile {
    pub threshold: f64,
    pub radii: Vec<f64>,
    pub candidates: Vec<CandidateRecord>,
}

#[derive(Clone, Debug)]
pub struct ScanSummary {
    pub cylinders: usize,
    pub max_phi: f64,
    pub candidates: Vec<CandidateRecord>,
    pub phi_csv: PathBuf,
    pub candidates_json: PathBuf,
}

pub const PHI_HEADER: &str = "x,y,z,t,r,term_velocity,term_pressure,term_oscillation,phi";

/// Load snapshots and require one grid and uniformly spaced times.
pub fn load_window(paths: &[PathBuf]) -> Result<Vec<SimState>, CliError> {
    if paths.is_empty() {
        return Err(CliError::Input("no snapshots to scan".into()));
    }
    let mut states = paths
        .iter()
        .map(|p| snapshot::read(p).map(|s| s.state).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    states.sort_by(|a, b| a.t.total_cmp(&b.t));
    let g = states[0].grid();
    if states.iter().any(|s| s.grid() != g) {
        return Err(CliError::Input("snapshots live on different grids".into()));
    }
    if states.len() > 2 {
        let gap = states[1].t - states[0].t;
        for w in states.windows(2) {
            let h = w[1].t - w[0].t;
            if (h - gap).abs() > 1e-9 * gap.abs().max(1e-300) || h <= 0.0 {
                return Err(CliError::Input(format!(
                    "snapshots are not contiguous: gap {h} between t = {} and t = {} differs from {gap}",
                    w[0].t, w[1].t
                )));
            }
        }
    }
    Ok(states)
}

pub fn scan_snapshots(paths: &[PathBuf], req: &ScanRequest, out_dir: &Path, out: &mut dyn Write) -> Result<ScanSummary, CliError> {
    let states = load_window(paths)?;
    let grid = states[0].grid();
    check_radii(grid, &req.radii)?;
    if req.stride == 0 {
        return Err(ConfigError::Invalid { rule: "phi_scan.stride", detail: "stride must be at least 1".into() }.into());
    }
    let ops = Operators::new(grid, req.discretization);
    let data = PhiData::new(&ops, &states).map_err(|e| CliError::Input(e.to_string()))?;
    let opts = PhiOptions { pressure_exponent: req.pressure_exponent };
    let spec = ScanSpec { stride: req.stride, times: None };
    let reports = phi_scan(&data, &req.radii, &spec, opts).map_err(|e| CliError::Input(e.to_string()))?;
    if reports.is_empty() {
        let rmax = req.radii.iter().copied().fold(0.0, f64::max);
        return Err(CliError::Input(format!("snapshot window is shorter than the largest cylinder (r^2 = {})", rmax * rmax)));
    }
    fs::create_dir_all(out_dir)?;
    let phi_csv = out_dir.join("phi.csv");
    let mut w = BufWriter::new(File::create(&phi_csv)?);
    writeln!(w, "{PHI_HEADER}")?;
    for r in &reports {
        let z = r.cylinder;
        let row = [z.x[0], z.x[1], z.x[2], z.t, z.r, r.term_velocity, r.term_pressure, r.term_oscillation, r.phi];
        writeln!(w, "{}", row.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(","))?;
    }
    w.flush()?;
    let candidates: Vec<CandidateRecord> =
        candidates_from(&reports, req.radii.len(), req.threshold).iter().map(Into::into).collect();
    let file = CandidatesFile { threshold: req.threshold, radii: req.radii.clone(), candidates: candidates.clone() };
    let candidates_json = out_dir.join("candidates.json");
    fs::write(&candidates_json, serde_json::to_string_pretty(&file).expect("serializable"))?;
    let max_phi = reports.iter().map(|r| r.phi).fold(0.0, f64::max);
    writeln!(
        out,
        "phi scan: {} cylinders, max phi {max_phi:.4e}, {} candidates above {}",
        reports.len(),
        candidates.len(),
        req.threshold
    )?;
    Ok(ScanSummary { cylinders: reports.len(), max_phi, candidates, phi_csv, candidates_json })
}

/// Output directory for read-only commands: explicit flag, then the
/// environment override, then the working directory.
pub fn output_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."))
}

pub fn cmd_phi_scan(pattern: &str, req: &ScanRequest, out_dir: &Path, out: &mut dyn Write) -> Result<ScanSummary, CliError> {
    let paths = glob::glob(pattern)
        .map_err(|e| CliError::Input(format!("bad snapshot pattern: {e}")))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(e.to_string()))?;
    if paths.is_empty() {
        return Err(CliError::Input(format!("no snapshots match {pattern}")));
    }
    scan_snapshots(&paths, req, out_dir, out)
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionOutput {
    pub points: usize,
    pub estimate: Option<f64>,
    pub residual: Option<f64>,
    pub intercept: Option<f64>,
    pub scales: Vec<(f64, usize)>,
}

impl From<(usize, Option<DimensionReport>)> for DimensionOutput {
    fn from((points, r): (usize, Option<DimensionReport>)) -> Self {
        match r {
            Some(r) => Self {
                points,
                estimate: Some(r.slope),
                residual: Some(r.residual),
                intercept: Some(r.intercept),
                scales: r.scales,
            },
            None => Self { points, estimate: None, residual: None, intercept: None, scales: Vec::new() },
        }
    }
}

pub fn cmd_dim_estimate(
    candidates: &Path,
    r_max: f64,
    r_min: f64,
    scales: usize,
    out: &mut dyn Write,
) -> Result<DimensionOutput, CliError> {
    let text = fs::read_to_string(candidates).map_err(|e| CliError::Input(format!("{}: {e}", candidates.display())))?;
    let file: CandidatesFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", candidates.display())))?;
    let points: Vec<SpaceTimePoint> = file.candidates.iter().map(|c| SpaceTimePoint { x: c.x, t: c.t }).collect();
    let radii = log_scales(r_max, r_min, scales);
    let report = parabolic_dimension_estimate(&points, &radii)
        .map_err(|e| CliError::Config(ConfigError::Invalid { rule: "dim.scales", detail: e.to_string() }))?;
    let result = DimensionOutput::from((points.len(), report));
    writeln!(out, "{}", serde_json::to_string_pretty(&result).expect("serializable"))?;
    Ok(result)
}
