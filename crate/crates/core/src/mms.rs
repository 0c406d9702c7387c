//! Manufactured-solution convergence studies.
//!
//! Exact fields on the `2π` torus:
//! `u = A(t)(sin y, sin z, sin x)`, `d = (B(t) cos z, B(t) sin x, 1)`.
//! The residual forcing is assembled with spectral derivatives, which are
//! exact for these low trigonometric degrees once `n ≥ 16`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::fields::{Discretization, Grid, Operators, VectorField};
use crate::lc_tensors::{gl_force_at, kinematic_transport_at, leslie_stress, mat_t_vec, mat_vec, ModelParams};
use crate::solver::{Forcing, Mode, SimState, Solver, SolverConfig, SolverError};

#[derive(Debug, Error)]
pub enum MmsError {
    #[error("need at least 3 resolutions, got {0}")]
    TooFewResolutions(usize),
    #[error("need at least 3 time steps, got {0}")]
    TooFewSteps(usize),
    #[error("resolution {0} is below 16")]
    Coarse(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Manufactured {
    pub params: ModelParams,
    pub a0: f64,
    pub b0: f64,
    /// Freeze `A` and `B` at their initial values.
    pub steady: bool,
}

impl Manufactured {
    pub fn new(params: ModelParams, steady: bool) -> Self {
        Self { params, a0: 0.5, b0: 0.3, steady }
    }

    fn amp(&self, t: f64) -> (f64, f64, f64, f64) {
        if self.steady {
            (self.a0, 0.0, self.b0, 0.0)
        } else {
            (
                self.a0 * (1.0 + 0.5 * (2.0 * t).sin()),
                self.a0 * (2.0 * t).cos(),
                self.b0 * t.cos(),
                -self.b0 * t.sin(),
            )
        }
    }

    pub fn velocity(&self, grid: Grid, t: f64) -> VectorField {
        let a = self.amp(t).0;
        VectorField::from_fn(grid, |x| [a * x[1].sin(), a * x[2].sin(), a * x[0].sin()])
    }

    pub fn director(&self, grid: Grid, t: f64) -> VectorField {
        let b = self.amp(t).2;
        VectorField::from_fn(grid, |x| [b * x[2].cos(), b * x[0].sin(), 1.0])
    }

    fn velocity_rate(&self, grid: Grid, t: f64) -> VectorField {
        let da = self.amp(t).1;
        VectorField::from_fn(grid, |x| [da * x[1].sin(), da * x[2].sin(), da * x[0].sin()])
    }

    fn director_rate(&self, grid: Grid, t: f64) -> VectorField {
        let db = self.amp(t).3;
        VectorField::from_fn(grid, |x| [db * x[2].cos(), db * x[0].sin(), 0.0])
    }

    pub fn state(&self, grid: Grid, t: f64) -> SimState {
        SimState { u: self.velocity(grid, t), d: self.director(grid, t), t, ..SimState::zeros(grid, self.params) }
    }

    /// Residual forcing on `grid`.
    pub fn forcing(&self, grid: Grid) -> ManufacturedForcing {
        ManufacturedForcing { sol: *self, ops: Operators::new(grid, Discretization::Spectral) }
    }

    /// `√(‖u − u_e‖² + ‖d − d_e‖²)` at the state's time.
    pub fn error(&self, s: &SimState) -> f64 {
        let g = s.grid();
        let du = &s.u - &self.velocity(g, s.t);
        let dd = &s.d - &self.director(g, s.t);
        (du.inner(&du).expect("grid") + dd.inner(&dd).expect("grid")).sqrt()
    }
}

pub struct ManufacturedForcing {
    sol: Manufactured,
    ops: Operators,
}

impl ManufacturedForcing {
    fn h(&self, d: &VectorField) -> VectorField {
        let lap = self.ops.laplacian(d);
        VectorField::from_index_fn(d.grid(), |i| {
            let (l, f) = (lap.at(i), gl_force_at(d.at(i)));
            [l[0] - f[0], l[1] - f[1], l[2] - f[2]]
        })
    }
}

impl Forcing for ManufacturedForcing {
    fn velocity(&self, grid: Grid, t: f64) -> VectorField {
        assert_eq!(grid, self.ops.grid(), "forcing sampled on a foreign grid");
        let prm = self.sol.params;
        let (u, d) = (self.sol.velocity(grid, t), self.sol.director(grid, t));
        let ut = self.sol.velocity_rate(grid, t);
        let gu = self.ops.vector_gradient(&u);
        let gd = self.ops.vector_gradient(&d);
        let lap_u = self.ops.laplacian(&u);
        let h = self.h(&d);
        let div_s = self.ops.tensor_divergence(&leslie_stress(&h, &d, prm.alpha).expect("grid"));
        VectorField::from_index_fn(grid, |i| {
            let adv = mat_vec(&gu.at(i), u.at(i));
            let er = mat_t_vec(&gd.at(i), h.at(i));
            let (a, l, s) = (ut.at(i), lap_u.at(i), div_s.at(i));
            let mut r = [0.0; 3];
            for c in 0..3 {
                r[c] = a[c] - prm.nu * l[c] + adv[c] + prm.lambda * (er[c] + s[c]);
            }
            r
        })
    }

    fn director(&self, grid: Grid, t: f64) -> VectorField {
        assert_eq!(grid, self.ops.grid(), "forcing sampled on a foreign grid");
        let prm = self.sol.params;
        let (u, d) = (self.sol.velocity(grid, t), self.sol.director(grid, t));
        let dt_d = self.sol.director_rate(grid, t);
        let gu = self.ops.vector_gradient(&u);
        let gd = self.ops.vector_gradient(&d);
        let h = self.h(&d);
        VectorField::from_index_fn(grid, |i| {
            let adv = mat_vec(&gd.at(i), u.at(i));
            let tr = kinematic_transport_at(&gu.at(i), d.at(i), prm.alpha);
            let (a, hv) = (dt_d.at(i), h.at(i));
            let mut r = [0.0; 3];
            for c in 0..3 {
                r[c] = a[c] + adv[c] - tr[c] - prm.gamma * hv[c];
            }
            r
        })
    }
}

/// Error at `t_end` of a forced run started from the exact state.
pub fn mms_error(
    sol: &Manufactured,
    n: usize,
    disc: Discretization,
    dt: f64,
    t_end: f64,
) -> Result<f64, MmsError> {
    let grid = Grid::cubic(n, 2.0 * PI).expect("valid grid");
    let cfg = SolverConfig { dt, t_end, mode: Mode::Direct, discretization: disc, ..SolverConfig::default() };
    let mut solver = Solver::new(grid, cfg)?.with_forcing(Box::new(sol.forcing(grid)));
    let end = solver.run(sol.state(grid, 0.0), &mut ())?;
    Ok(sol.error(&end))
}

/// Errors at successive refinements with the observed orders between them.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    /// `(h, error)` with `h` the grid spacing or time step.
    pub rows: Vec<(f64, f64)>,
    pub orders: Vec<f64>,
    /// Every error sits at the round-off floor.
    pub exact: bool,
}

/// Errors below this are treated as round-off.
pub const EXACT_FLOOR: f64 = 1e-10;

impl ConvergenceStudy {
    fn from_rows(rows: Vec<(f64, f64)>) -> Self {
        let orders = rows.windows(2).map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln()).collect();
        let exact = rows.iter().all(|r| r.1 < EXACT_FLOOR);
        Self { rows, orders, exact }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Exact results pass any order requirement.
    pub fn passes(&self, order: f64) -> bool {
        self.exact || self.min_order() >= order
    }
}

pub const SPATIAL_DT: f64 = 0.01;
pub const SPATIAL_T_END: f64 = 0.1;

/// Steady manufactured solution, fixed `dt`, grid refinement.
pub fn spatial_study(params: ModelParams, resolutions: &[usize], disc: Discretization) -> Result<ConvergenceStudy, MmsError> {
    if resolutions.len() < 3 {
        return Err(MmsError::TooFewResolutions(resolutions.len()));
    }
    if let Some(&n) = resolutions.iter().find(|&&n| n < 16) {
        return Err(MmsError::Coarse(n));
    }
    let sol = Manufactured::new(params, true);
    let rows = resolutions
        .iter()
        .map(|&n| Ok((2.0 * PI / n as f64, mms_error(&sol, n, disc, SPATIAL_DT, SPATIAL_T_END)?)))
        .collect::<Result<Vec<_>, MmsError>>()?;
    Ok(ConvergenceStudy::from_rows(rows))
}

pub const TEMPORAL_N: usize = 16;
pub const TEMPORAL_T_END: f64 = 0.4;

/// Time-dependent manufactured solution, spectral in space, `dt` refinement.
pub fn temporal_study(params: ModelParams, dts: &[f64]) -> Result<ConvergenceStudy, MmsError> {
    if dts.len() < 3 {
        return Err(MmsError::TooFewSteps(dts.len()));
    }
    let sol = Manufactured::new(params, false);
    let rows = dts
        .iter()
        .map(|&dt| Ok((dt, mms_error(&sol, TEMPORAL_N, Discretization::Spectral, dt, TEMPORAL_T_END)?)))
        .collect::<Result<Vec<_>, MmsError>>()?;
    Ok(ConvergenceStudy::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_fields_are_solenoidal() {
        let g = Grid::cubic(16, 2.0 * PI).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let sol = Manufactured::new(ModelParams::default(), false);
        assert!(ops.divergence(&sol.velocity(g, 0.3)).max_abs() < 1e-13);
    }

    #[test]
    fn spectral_forcing_keeps_solution_to_first_order() {
        let sol = Manufactured::new(ModelParams::default(), false);
        let e1 = mms_error(&sol, 16, Discretization::Spectral, 0.02, 0.2).unwrap();
        let e2 = mms_error(&sol, 16, Discretization::Spectral, 0.01, 0.2).unwrap();
        let order = (e1 / e2).log2();
        assert!(order > 0.8 && order < 1.3, "{e1} {e2} {order}");
    }

    #[test]
    fn steady_spectral_is_exact() {
        let sol = Manufactured::new(ModelParams::default(), true);
        let e = mms_error(&sol, 16, Discretization::Spectral, 0.01, 0.05).unwrap();
        assert!(e < EXACT_FLOOR, "{e}");
    }

    #[test]
    fn argument_checks() {
        let p = ModelParams::default();
        assert!(matches!(spatial_study(p, &[16], Discretization::FiniteDifference), Err(MmsError::TooFewResolutions(1))));
        assert!(matches!(spatial_study(p, &[8, 16, 32], Discretization::FiniteDifference), Err(MmsError::Coarse(8))));
        assert!(matches!(temporal_study(p, &[0.1, 0.05]), Err(MmsError::TooFewSteps(2))));
    }
}
