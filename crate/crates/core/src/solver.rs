//! Semi-implicit time stepping for the rewritten Ericksen–Leslie system
//!
//! ```text
//! ∂t u + a·∇u + ∇P = νΔu − λ∇d_e·(Δd − f(d)) − λ∇·S_α[Δd − f(d), d_e]
//! ∂t d + u·∇d_e − T_α[∇u, d_e] = γ(Δd − f(d))
//! ```
//!
//! In direct mode `a = u` and `d_e = d`. In mollified mode `a = Ψ_θ[u]` and
//! `d_e = Ψ_θ[d]`, with the history of accepted states feeding the mollifier.

use thiserror::Error;

use crate::fields::{Discretization, FieldError, Grid, Operators, ScalarField, TensorField, VectorField};
use crate::lc_tensors::{
    gl_force, gl_force_at, kinematic_transport_at, leslie_stress, mat_t_vec, mat_vec, ModelParams, ParamError,
};
use crate::mollifier::{make_kernel, DiscreteKernel, HistoryBuffer, MollifierError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Mollifier(#[from] MollifierError),
    #[error("CFL guard exceeded at t = {t}: dt*max|u|/dx = {cfl:.4} > {guard}; advisory dt = {advisory_dt:.3e}")]
    Cfl { t: f64, cfl: f64, guard: f64, advisory_dt: f64 },
    #[error("non-finite value in {term} at t = {t}")]
    NonFinite { term: &'static str, t: f64 },
    #[error("output sink failed: {0}")]
    Sink(String),
    #[error("test function support [{from}, {to}] exceeds trajectory window [{start}, {end}]")]
    SupportOutsideWindow { from: f64, to: f64, start: f64, end: f64 },
}

/// Velocity, director and zero-mean pressure at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub u: VectorField,
    pub d: VectorField,
    pub p: ScalarField,
    pub t: f64,
    pub params: ModelParams,
}

impl SimState {
    pub fn new(u: VectorField, d: VectorField, p: ScalarField, t: f64, params: ModelParams) -> Result<Self, SolverError> {
        if u.grid() != d.grid() || u.grid() != p.grid() {
            return Err(FieldError::GridMismatch.into());
        }
        params.validate()?;
        Ok(Self { u, d, p, t, params })
    }

    pub fn zeros(grid: Grid, params: ModelParams) -> Self {
        Self {
            u: VectorField::zeros(grid),
            d: VectorField::zeros(grid),
            p: ScalarField::zeros(grid),
            t: 0.0,
            params,
        }
    }

    pub fn grid(&self) -> Grid {
        self.u.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.d.is_finite() && self.p.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode {
    Direct,
    Mollified { theta: f64 },
}

impl Mode {
    pub fn theta(self) -> Option<f64> {
        match self {
            Mode::Direct => None,
            Mode::Mollified { theta } => Some(theta),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    pub mode: Mode,
    pub discretization: Discretization,
    /// Emit a snapshot every this many steps (0 disables periodic snapshots).
    pub snapshot_every: usize,
    /// Largest admissible `dt·max|u|/dx`.
    pub cfl_guard: f64,
    /// In mollified mode, use `∇Ψ_θ[d]` in the Ericksen force (literal form)
    /// rather than `∇d`.
    pub mollify_ericksen_gradient: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 0.1,
            mode: Mode::Direct,
            discretization: Discretization::Spectral,
            snapshot_every: 0,
            cfl_guard: 0.5,
            mollify_ericksen_gradient: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if !(self.cfl_guard > 0.0) {
            return bad(format!("cfl_guard must be positive, got {}", self.cfl_guard));
        }
        if let Mode::Mollified { theta } = self.mode {
            if !(theta > 0.0 && theta <= 1.0) {
                return bad(format!("theta must lie in (0, 1], got {theta}"));
            }
            if self.dt > theta / 4.0 * (1.0 + 1e-12) {
                return bad(format!("dt = {} exceeds theta/4 = {}", self.dt, theta / 4.0));
            }
        }
        Ok(())
    }

    /// Number of steps to reach `t_end` from `t0`.
    pub fn step_count(&self, t0: f64) -> usize {
        let span = self.t_end - t0;
        if span <= 0.0 {
            0
        } else {
            (span / self.dt - 1e-9).ceil() as usize
        }
    }
}

/// Body forces added to the right-hand sides, sampled at the new time level.
pub trait Forcing: Sync {
    fn velocity(&self, grid: Grid, t: f64) -> VectorField;
    fn director(&self, grid: Grid, t: f64) -> VectorField;
}

/// Receives accepted states during `run`.
pub trait Sink {
    fn record(&mut self, step: usize, state: &SimState, snapshot: bool) -> Result<(), String>;

    fn finish(&mut self) -> Result<(), String> {
        Ok(())
    }
}

impl Sink for () {
    fn record(&mut self, _: usize, _: &SimState, _: bool) -> Result<(), String> {
        Ok(())
    }
}

/// Keeps every state flagged as a snapshot.
#[derive(Default)]
pub struct SnapshotCollector {
    pub states: Vec<SimState>,
}

impl Sink for SnapshotCollector {
    fn record(&mut self, _: usize, state: &SimState, snapshot: bool) -> Result<(), String> {
        if snapshot {
            self.states.push(state.clone());
        }
        Ok(())
    }
}

/// Fields feeding the velocity update of one step.
struct Coupling {
    a: VectorField,
    d_e: VectorField,
    grad_de_force: TensorField,
    h: VectorField,
}

pub struct Solver {
    cfg: SolverConfig,
    ops: Operators,
    mollifier: Option<(DiscreteKernel, HistoryBuffer)>,
    forcing: Option<Box<dyn Forcing>>,
}

fn finite<F: crate::fields::Field>(f: F, term: &'static str, t: f64) -> Result<F, SolverError> {
    if f.components().iter().all(|c| c.is_finite()) {
        Ok(f)
    } else {
        Err(SolverError::NonFinite { term, t })
    }
}

impl Solver {
    pub fn new(grid: Grid, cfg: SolverConfig) -> Result<Self, SolverError> {
        cfg.validate()?;
        let mollifier = match cfg.mode {
            Mode::Direct => None,
            Mode::Mollified { theta } => {
                let kernel = make_kernel(theta)?.discretize(grid, cfg.dt)?;
                let history = HistoryBuffer::for_kernel(&kernel);
                Some((kernel, history))
            }
        };
        Ok(Self { cfg, ops: Operators::new(grid, cfg.discretization), mollifier, forcing: None })
    }

    pub fn with_forcing(mut self, forcing: Box<dyn Forcing>) -> Self {
        self.forcing = Some(forcing);
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn ops(&self) -> &Operators {
        &self.ops
    }

    pub fn history(&self) -> Option<&HistoryBuffer> {
        self.mollifier.as_ref().map(|m| &m.1)
    }

    /// Remove gradient parts from the initial velocity and zero the pressure.
    pub fn prepare(&self, mut state: SimState) -> SimState {
        state.u = self.ops.leray_project(&state.u);
        state.p = ScalarField::zeros(state.grid());
        state
    }

    fn record_history(&mut self, state: &SimState) -> Result<(), SolverError> {
        if let Some((_, history)) = &mut self.mollifier {
            let fresh = history.latest().is_none_or(|l| state.t > l.t + 0.5 * history.dt());
            if fresh {
                history.push(state.clone())?;
            }
        }
        Ok(())
    }

    fn coupling(&mut self, state: &SimState) -> Result<(VectorField, VectorField), SolverError> {
        self.record_history(state)?;
        match &self.mollifier {
            None => Ok((state.u.clone(), state.d.clone())),
            Some((kernel, history)) => {
                let a: VectorField = kernel.apply(history, |s| &s.u, state.t)?;
                let d_e: VectorField = kernel.apply(history, |s| &s.d, state.t)?;
                Ok((a, d_e))
            }
        }
    }

    fn check_cfl(&self, state: &SimState, a: &VectorField, dt: f64) -> Result<(), SolverError> {
        let vmax = state.u.max_norm().max(a.max_norm());
        let dx = state.grid().min_dx();
        let cfl = dt * vmax / dx;
        if cfl > self.cfg.cfl_guard {
            let advisory_dt = 0.9 * self.cfg.cfl_guard * dx / vmax;
            return Err(SolverError::Cfl { t: state.t, cfl, guard: self.cfg.cfl_guard, advisory_dt });
        }
        Ok(())
    }

    fn advance(&mut self, state: &SimState, dt: f64) -> Result<(SimState, Coupling), SolverError> {
        let t = state.t;
        let t_new = t + dt;
        let prm = state.params;
        let grid = state.grid();
        let (a, d_e) = self.coupling(state)?;
        self.check_cfl(state, &a, dt)?;
        let ops = &self.ops;

        // (1) director
        let grad_u = finite(ops.vector_gradient(&state.u), "velocity_gradient", t)?;
        let grad_de = finite(ops.vector_gradient(&d_e), "director_gradient", t)?;
        let f_d = finite(gl_force(&state.d), "gl_force", t)?;
        let forcing_d = self.forcing.as_ref().map(|f| f.director(grid, t_new));
        let alpha = prm.alpha;
        let rhs_d = VectorField::from_index_fn(grid, |i| {
            let dv = d_e.at(i);
            let gu = grad_u.at(i);
            let adv = mat_vec(&grad_de.at(i), state.u.at(i));
            let tr = kinematic_transport_at(&gu, dv, alpha);
            let f = f_d.at(i);
            let fd = forcing_d.as_ref().map_or([0.0; 3], |g| g.at(i));
            let d0 = state.d.at(i);
            let mut r = [0.0; 3];
            for c in 0..3 {
                r[c] = d0[c] + dt * (-adv[c] + tr[c] - prm.gamma * f[c] + fd[c]);
            }
            r
        });
        let rhs_d = finite(rhs_d, "director_rhs", t)?;
        let (d_new, lap_d_new) = ops.shifted_solve_with_laplacian(&rhs_d, prm.gamma * dt);
        let d_new = finite(d_new, "director", t_new)?;

        // (2) tentative velocity
        let h = VectorField::from_index_fn(grid, |i| {
            let l = lap_d_new.at(i);
            let f = f_d.at(i);
            [l[0] - f[0], l[1] - f[1], l[2] - f[2]]
        });
        let grad_de_force = match self.cfg.mode {
            Mode::Mollified { .. } if !self.cfg.mollify_ericksen_gradient => ops.vector_gradient(&state.d),
            _ => grad_de,
        };
        let stress = finite(leslie_stress(&h, &d_e, alpha)?, "leslie_stress", t)?;
        let div_stress = ops.tensor_divergence(&stress);
        let forcing_u = self.forcing.as_ref().map(|f| f.velocity(grid, t_new));
        let rhs_u = VectorField::from_index_fn(grid, |i| {
            let adv = mat_vec(&grad_u.at(i), a.at(i));
            let er = mat_t_vec(&grad_de_force.at(i), h.at(i));
            let ds = div_stress.at(i);
            let fu = forcing_u.as_ref().map_or([0.0; 3], |g| g.at(i));
            let u0 = state.u.at(i);
            let mut r = [0.0; 3];
            for c in 0..3 {
                r[c] = u0[c] + dt * (-adv[c] - prm.lambda * (er[c] + ds[c]) + fu[c]);
            }
            r
        });
        let rhs_u = finite(rhs_u, "velocity_rhs", t)?;

        // (3) projection
        let (u_new, q) = ops.implicit_project(&rhs_u, prm.nu * dt);
        let u_new = finite(u_new, "velocity", t_new)?;
        let p_new = finite(q.scaled(1.0 / dt), "pressure", t_new)?;

        let next = SimState { u: u_new, d: d_new, p: p_new, t: t_new, params: prm };
        Ok((next, Coupling { a, d_e, grad_de_force, h }))
    }

    /// One step of size `cfg.dt`.
    pub fn step(&mut self, state: &SimState) -> Result<SimState, SolverError> {
        Ok(self.advance(state, self.cfg.dt)?.0)
    }

    /// One step together with the pressure assembled independently from
    /// `−ΔP = div²(u⊗a) + λ div(∇d_e·h) + λ div²S_α[h, d_e]`.
    pub fn step_with_poisson_pressure(&mut self, state: &SimState) -> Result<(SimState, ScalarField), SolverError> {
        let (next, c) = self.advance(state, self.cfg.dt)?;
        let ops = &self.ops;
        let lambda = state.params.lambda;
        let grid = state.grid();
        let flux = TensorField::from_index_fn(grid, |i| {
            let (u, a) = (state.u.at(i), c.a.at(i));
            let mut m = [[0.0; 3]; 3];
            for (r, row) in m.iter_mut().enumerate() {
                for (s, v) in row.iter_mut().enumerate() {
                    *v = u[r] * a[s];
                }
            }
            m
        });
        let er = VectorField::from_index_fn(grid, |i| mat_t_vec(&c.grad_de_force.at(i), c.h.at(i)));
        let s = leslie_stress(&c.h, &c.d_e, state.params.alpha)?;
        let mut rhs = ops.divergence(&ops.tensor_divergence(&flux));
        rhs = rhs.lin_comb(1.0, &ops.divergence(&er), lambda)?;
        rhs = rhs.lin_comb(1.0, &ops.divergence(&ops.tensor_divergence(&s)), lambda)?;
        let p = ops.poisson_solve(&rhs)?;
        Ok((next, p))
    }

    /// Step until `t_end`, reporting every accepted state to `sink`. The sink
    /// is finished before any error is returned.
    pub fn run(&mut self, initial: SimState, sink: &mut dyn Sink) -> Result<SimState, SolverError> {
        let t0 = initial.t;
        let steps = self.cfg.step_count(t0);
        if let Mode::Mollified { .. } = self.cfg.mode {
            let exact = (self.cfg.t_end - t0) / self.cfg.dt;
            if (exact - exact.round()).abs() > 1e-6 {
                return Err(SolverError::InvalidConfig("mollified runs need t_end - t0 to be a multiple of dt".into()));
            }
        }
        let every = self.cfg.snapshot_every;
        let result = (|| -> Result<SimState, SolverError> {
            sink.record(0, &initial, true).map_err(SolverError::Sink)?;
            let mut state = initial;
            for n in 1..=steps {
                let target = if n == steps { self.cfg.t_end } else { t0 + n as f64 * self.cfg.dt };
                let (mut next, _) = self.advance(&state, target - state.t)?;
                next.t = target;
                let snap = n == steps || (every > 0 && n % every == 0);
                sink.record(n, &next, snap).map_err(SolverError::Sink)?;
                state = next;
            }
            Ok(state)
        })();
        let flushed = sink.finish().map_err(SolverError::Sink);
        let state = result?;
        flushed?;
        Ok(state)
    }
}

/// Analytic vector test function on space-time.
pub trait TestField: Sync {
    fn value(&self, x: [f64; 3], t: f64) -> [f64; 3];

    fn time_derivative(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let h = 1e-5;
        let (a, b) = (self.value(x, t + h), self.value(x, t - h));
        [(a[0] - b[0]) / (2.0 * h), (a[1] - b[1]) / (2.0 * h), (a[2] - b[2]) / (2.0 * h)]
    }

    /// Closed interval outside which the function vanishes identically.
    fn time_support(&self) -> (f64, f64);
}

/// Trapezoid accumulator over a stream of `(t, value)` pairs.
#[derive(Clone, Debug, Default)]
pub struct Trapezoid {
    last: Option<(f64, f64)>,
    sum: f64,
}

impl Trapezoid {
    pub fn push(&mut self, t: f64, v: f64) {
        if let Some((t0, v0)) = self.last {
            self.sum += 0.5 * (t - t0) * (v + v0);
        }
        self.last = Some((t, v));
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Streaming residuals of the weak formulations
///
/// ```text
/// ∫∫ −u·∂tφ + ν∇u:∇φ − (u⊗u):∇φ + λ(φ·∇d)·h − λ S_α[h, d]:∇φ
/// ∫∫ −d·∂tψ + γ∇d:∇ψ − (d⊗u):∇ψ + γ f(d)·ψ − T_α[∇u, d]·ψ
/// ```
///
/// with `h = Δd − f(d)` and `(∇φ)_{ij} = ∂_j φ_i`. Both vanish for smooth
/// solutions when the test functions are supported inside the window.
pub struct WeakResidual<'a> {
    ops: &'a Operators,
    phi: &'a dyn TestField,
    psi: &'a dyn TestField,
    ru: Trapezoid,
    rd: Trapezoid,
    window: Option<(f64, f64)>,
}

impl<'a> WeakResidual<'a> {
    pub fn new(ops: &'a Operators, phi: &'a dyn TestField, psi: &'a dyn TestField) -> Self {
        Self { ops, phi, psi, ru: Trapezoid::default(), rd: Trapezoid::default(), window: None }
    }

    pub fn push(&mut self, s: &SimState) {
        let ops = self.ops;
        let g = s.grid();
        let t = s.t;
        let prm = s.params;
        let phi = VectorField::from_index_fn(g, |i| self.phi.value(g.position(i), t));
        let phi_t = VectorField::from_index_fn(g, |i| self.phi.time_derivative(g.position(i), t));
        let psi = VectorField::from_index_fn(g, |i| self.psi.value(g.position(i), t));
        let psi_t = VectorField::from_index_fn(g, |i| self.psi.time_derivative(g.position(i), t));
        let gphi = ops.vector_gradient(&phi);
        let gpsi = ops.vector_gradient(&psi);
        let gu = ops.vector_gradient(&s.u);
        let gd = ops.vector_gradient(&s.d);
        let lap = ops.laplacian(&s.d);
        let a = prm.alpha;
        let iu = ScalarField::from_index_fn(g, |i| {
            let (u, d) = (s.u.at(i), s.d.at(i));
            let f = gl_force_at(d);
            let l = lap.at(i);
            let h = [l[0] - f[0], l[1] - f[1], l[2] - f[2]];
            let gp = gphi.at(i);
            let gui = gu.at(i);
            let ph = phi.at(i);
            let pt = phi_t.at(i);
            let mut v = -(u[0] * pt[0] + u[1] * pt[1] + u[2] * pt[2]);
            for r in 0..3 {
                for c in 0..3 {
                    let sv = a * h[r] * d[c] - (1.0 - a) * d[r] * h[c];
                    v += (prm.nu * gui[r][c] - u[r] * u[c] - prm.lambda * sv) * gp[r][c];
                }
            }
            // (φ·∇d)_k = φ_j ∂_j d_k
            let pd = mat_vec(&gd.at(i), ph);
            v + prm.lambda * (pd[0] * h[0] + pd[1] * h[1] + pd[2] * h[2])
        })
        .integrate();
        let id = ScalarField::from_index_fn(g, |i| {
            let (u, d) = (s.u.at(i), s.d.at(i));
            let f = gl_force_at(d);
            let gp = gpsi.at(i);
            let gdi = gd.at(i);
            let ps = psi.at(i);
            let pt = psi_t.at(i);
            let tr = kinematic_transport_at(&gu.at(i), d, a);
            let mut v = -(d[0] * pt[0] + d[1] * pt[1] + d[2] * pt[2]);
            for r in 0..3 {
                for c in 0..3 {
                    v += (prm.gamma * gdi[r][c] - d[r] * u[c]) * gp[r][c];
                }
                v += (prm.gamma * f[r] - tr[r]) * ps[r];
            }
            v
        })
        .integrate();
        self.ru.push(t, iu);
        self.rd.push(t, id);
        self.window = Some(match self.window {
            None => (t, t),
            Some((a, _)) => (a, t),
        });
    }

    pub fn finish(self) -> Result<(f64, f64), SolverError> {
        let (start, end) = self.window.unwrap_or((0.0, 0.0));
        for tf in [self.phi, self.psi] {
            let (from, to) = tf.time_support();
            if from < start - 1e-12 || to > end + 1e-12 {
                return Err(SolverError::SupportOutsideWindow { from, to, start, end });
            }
        }
        Ok((self.ru.value().abs(), self.rd.value().abs()))
    }
}

pub fn weak_residual(
    ops: &Operators,
    trajectory: &[SimState],
    phi: &dyn TestField,
    psi: &dyn TestField,
) -> Result<(f64, f64), SolverError> {
    let mut acc = WeakResidual::new(ops, phi, psi);
    for s in trajectory {
        acc.push(s);
    }
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::band_limited_vector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Grid {
        Grid::cubic(16, 2.0 * std::f64::consts::PI).unwrap()
    }

    fn cfg(dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig { dt, t_end, ..SolverConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.0, 1.0).validate().is_err());
        assert!(cfg(0.1, -1.0).validate().is_err());
        let m = SolverConfig { mode: Mode::Mollified { theta: 0.2 }, ..cfg(0.1, 1.0) };
        assert!(m.validate().is_err());
        let m = SolverConfig { mode: Mode::Mollified { theta: 0.2 }, ..cfg(0.05, 1.0) };
        assert!(m.validate().is_ok());
        assert_eq!(cfg(0.1, 1.0).step_count(0.0), 10);
        assert_eq!(cfg(0.3, 1.0).step_count(0.0), 4);
        assert_eq!(cfg(0.1, 0.0).step_count(0.0), 0);
    }

    #[test]
    fn equilibria_are_fixed_points() {
        let g = grid();
        for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
            for d0 in [[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.0; 3]] {
                let mut s = SimState::zeros(g, ModelParams::default());
                s.d = VectorField::constant(g, d0);
                let mut solver = Solver::new(g, SolverConfig { discretization: disc, ..cfg(0.01, 0.05) }).unwrap();
                let out = solver.run(s.clone(), &mut ()).unwrap();
                assert!((&out.d - &s.d).max_abs() < 1e-12);
                assert!(out.u.max_abs() < 1e-12 && out.p.max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_end_time_returns_initial() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = SimState::zeros(g, ModelParams::default());
        s.d = band_limited_vector(g, 2, 0.1, &mut rng);
        let mut solver = Solver::new(g, cfg(0.01, 0.0)).unwrap();
        let mut sink = SnapshotCollector::default();
        let out = solver.run(s.clone(), &mut sink).unwrap();
        assert_eq!(out, s);
        assert_eq!(sink.states.len(), 1);
    }

    #[test]
    fn step_keeps_velocity_solenoidal_and_pressure_zero_mean() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut solver = Solver::new(g, cfg(1e-3, 1.0)).unwrap();
        let mut s = SimState::zeros(g, ModelParams::with_alpha(0.3).unwrap());
        s.u = band_limited_vector(g, 2, 0.2, &mut rng);
        s.d = &VectorField::constant(g, [0.0, 0.0, 1.0]) + &band_limited_vector(g, 2, 0.2, &mut rng);
        let s = solver.prepare(s);
        let mut cur = s;
        for _ in 0..5 {
            cur = solver.step(&cur).unwrap();
            assert!(solver.ops().divergence(&cur.u).max_abs() <= 1e-8);
            assert!(cur.p.mean().abs() < 1e-12);
        }
    }

    #[test]
    fn projection_pressure_matches_poisson_assembly() {
        // Fine enough that the cubic products stay below the Nyquist mode.
        let g = Grid::cubic(32, 2.0 * std::f64::consts::PI).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut solver = Solver::new(g, cfg(1e-3, 1.0)).unwrap();
        let mut s = SimState::zeros(g, ModelParams::new(0.7, 0.5, 2.0, 0.8).unwrap());
        s.u = band_limited_vector(g, 2, 0.3, &mut rng);
        s.d = &VectorField::constant(g, [1.0, 0.0, 0.0]) + &band_limited_vector(g, 2, 0.3, &mut rng);
        let s = solver.prepare(s);
        let (next, p) = solver.step_with_poisson_pressure(&s).unwrap();
        assert!((&next.p - &p).max_abs() < 1e-9 * (1.0 + p.max_abs()));
    }

    #[test]
    fn cfl_guard_rejects_with_advice() {
        let g = grid();
        let mut s = SimState::zeros(g, ModelParams::default());
        s.u = VectorField::constant(g, [100.0, 0.0, 0.0]);
        let mut solver = Solver::new(g, cfg(0.01, 1.0)).unwrap();
        match solver.step(&s) {
            Err(SolverError::Cfl { advisory_dt, .. }) => {
                assert!(advisory_dt * 100.0 / g.min_dx() < 0.5);
            }
            other => panic!("expected CFL rejection, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_input_names_term() {
        let g = grid();
        let mut s = SimState::zeros(g, ModelParams::default());
        s.d = VectorField::constant(g, [f64::NAN, 0.0, 0.0]);
        let mut solver = Solver::new(g, cfg(0.01, 1.0)).unwrap();
        match solver.step(&s) {
            Err(SolverError::NonFinite { term, .. }) => assert!(!term.is_empty()),
            other => panic!("expected non-finite error, got {other:?}"),
        }
    }

    #[test]
    fn mollified_start_is_decoupled() {
        // Before t = θ the mollified fields vanish, so the velocity obeys the
        // Stokes system and the director a pure Ginzburg–Landau flow.
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut s = SimState::zeros(g, ModelParams::default());
        s.u = band_limited_vector(g, 2, 0.3, &mut rng);
        s.d = &VectorField::constant(g, [0.0, 0.0, 1.0]) + &band_limited_vector(g, 2, 0.3, &mut rng);
        let dt = 0.01;
        let mcfg = SolverConfig { mode: Mode::Mollified { theta: 0.1 }, ..cfg(dt, 0.1) };
        let mut solver = Solver::new(g, mcfg).unwrap();
        let s = solver.prepare(s);
        let out = solver.run(s.clone(), &mut ()).unwrap();

        let ops = Operators::new(g, Discretization::Spectral);
        let (mut u, mut d) = (s.u.clone(), s.d.clone());
        for _ in 0..10 {
            u = ops.shifted_solve(&u, dt);
            let rhs = d.lin_comb(1.0, &gl_force(&d), -dt).unwrap();
            d = ops.shifted_solve(&rhs, dt);
        }
        assert!((&out.u - &u).max_abs() < 1e-12);
        assert!((&out.d - &d).max_abs() < 1e-12);
    }

    struct Zero;
    impl TestField for Zero {
        fn value(&self, _: [f64; 3], _: f64) -> [f64; 3] {
            [0.0; 3]
        }
        fn time_support(&self) -> (f64, f64) {
            (0.0, 0.0)
        }
    }

    struct Bump;
    impl TestField for Bump {
        fn value(&self, x: [f64; 3], t: f64) -> [f64; 3] {
            let w = crate::mollifier::bump((t - 0.05) / 0.05);
            [w * x[1].sin(), w * x[2].cos(), w * x[0].sin()]
        }
        fn time_support(&self) -> (f64, f64) {
            (0.0, 0.1)
        }
    }

    #[test]
    fn weak_residual_trivial_trajectories() {
        let g = grid();
        let ops = Operators::new(g, Discretization::Spectral);
        let times: Vec<f64> = (0..=10).map(|n| n as f64 * 0.01).collect();
        let zero: Vec<SimState> = times
            .iter()
            .map(|&t| SimState { t, ..SimState::zeros(g, ModelParams::default()) })
            .collect();
        assert_eq!(weak_residual(&ops, &zero, &Bump, &Bump).unwrap(), (0.0, 0.0));
        let eq: Vec<SimState> = zero
            .iter()
            .map(|s| SimState { d: VectorField::constant(g, [0.0, 0.0, 1.0]), ..s.clone() })
            .collect();
        let (a, b) = weak_residual(&ops, &eq, &Bump, &Bump).unwrap();
        assert!(a < 1e-12 && b < 1e-12);
        assert!(weak_residual(&ops, &zero[..5], &Bump, &Zero).is_err());
    }
}
