use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{det_sum_by, Operators, VectorField};
use crate::lc_tensors::{ddot, dot};
use crate::solver::SimState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SeminormError {
    #[error("exponent p must exceed 2, got {0}")]
    ExponentTooSmall(f64),
    #[error("need at least 3 time slices, got {0}")]
    TooFewSlices(usize),
}

/// Exponent used by the parabolic Sobolev–Poincaré chain.
pub const DEFAULT_EXPONENT: f64 = 20.0 / 7.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeminormReport {
    /// `∫ₓ ∫∫_{|t−s| ≥ dt} |f(x,t) − f(x,s)|^p / |t−s|^{1+p/2}`
    pub time_part: f64,
    /// `∫∫ |∇f|^p`
    pub gradient_part: f64,
    pub total: f64,
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let m = times.len();
    let mut w = vec![0.0; m];
    for j in 0..m - 1 {
        let h = times[j + 1] - times[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    w
}

/// Fractional parabolic seminorm of the director to the power `p`. Pairs of
/// distinct slices enter the double time integral; the diagonal band
/// `|t − s| < dt` is excluded.
pub fn fractional_time_seminorm(
    ops: &Operators,
    trajectory: &[SimState],
    p: f64,
) -> Result<SeminormReport, SeminormError> {
    seminorm_of(ops, trajectory, |s| &s.d, p)
}

pub fn seminorm_of<S>(ops: &Operators, trajectory: &[SimState], select: S, p: f64) -> Result<SeminormReport, SeminormError>
where
    S: Fn(&SimState) -> &VectorField + Sync,
{
    if !(p > 2.0) {
        return Err(SeminormError::ExponentTooSmall(p));
    }
    if trajectory.len() < 3 {
        return Err(SeminormError::TooFewSlices(trajectory.len()));
    }
    let times: Vec<f64> = trajectory.iter().map(|s| s.t).collect();
    let w = trapezoid_weights(&times);
    let g = select(&trajectory[0]).grid();
    let cell = g.cell_volume();
    let m = trajectory.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|j| (j + 1..m).map(move |k| (j, k))).collect();
    let pair_terms: Vec<f64> = pairs
        .par_iter()
        .map(|&(j, k)| {
            let (a, b) = (select(&trajectory[j]), select(&trajectory[k]));
            let s: f64 = (0..g.len())
                .map(|i| {
                    let (x, y) = (a.at(i), b.at(i));
                    let e = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
                    dot(e, e).powf(0.5 * p)
                })
                .sum();
            let gap = (times[k] - times[j]).abs();
            2.0 * w[j] * w[k] * cell * s / gap.powf(1.0 + 0.5 * p)
        })
        .collect();
    let time_part: f64 = pair_terms.iter().sum();
    let mut gradient_part = 0.0;
    for (s, wj) in trajectory.iter().zip(&w) {
        let gd = ops.vector_gradient(select(s));
        gradient_part += wj * cell * det_sum_by(g.len(), |i| {
            let m = gd.at(i);
            ddot(&m, &m).powf(0.5 * p)
        });
    }
    Ok(SeminormReport { time_part, gradient_part, total: time_part + gradient_part })
}

/// Both sides of `∫ ‖∇d‖_{L^{30/13}}^{10} dt ≤ C ‖d‖⁸_{L^∞H¹} ‖d‖²_{L²H²}`.
/// The torus constant `C` is not asserted; the ratio is reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterpolationReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, `None` when both vanish.
    pub ratio: Option<f64>,
}

pub fn interpolation_bound_check(ops: &Operators, trajectory: &[SimState]) -> InterpolationReport {
    let q = 30.0 / 13.0;
    let times: Vec<f64> = trajectory.iter().map(|s| s.t).collect();
    let w = if times.len() >= 2 { trapezoid_weights(&times) } else { vec![0.0; times.len()] };
    let mut lhs = 0.0;
    let mut sup_h1 = 0.0f64;
    let mut l2_h2 = 0.0;
    for (s, wj) in trajectory.iter().zip(&w) {
        let g = s.grid();
        let cell = g.cell_volume();
        let gd = ops.vector_gradient(&s.d);
        let hess: Vec<_> = (0..3).map(|c| ops.vector_gradient(&ops.gradient(s.d.comp(c)))).collect();
        let lq = cell * det_sum_by(g.len(), |i| {
            let m = gd.at(i);
            ddot(&m, &m).powf(0.5 * q)
        });
        let l2 = cell * det_sum_by(g.len(), |i| {
            let d = s.d.at(i);
            dot(d, d)
        });
        let g2 = cell * det_sum_by(g.len(), |i| {
            let m = gd.at(i);
            ddot(&m, &m)
        });
        let h2 = cell * det_sum_by(g.len(), |i| hess.iter().map(|h| {
            let m = h.at(i);
            ddot(&m, &m)
        }).sum());
        lhs += wj * lq.powf(1.0 / q).powi(10);
        sup_h1 = sup_h1.max(l2 + g2);
        l2_h2 += wj * (l2 + g2 + h2);
    }
    let rhs = sup_h1.powi(4) * l2_h2;
    let ratio = if lhs == 0.0 && rhs == 0.0 { None } else { Some(lhs / rhs) };
    InterpolationReport { lhs, rhs, ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Discretization, Grid};
    use crate::lc_tensors::ModelParams;
    use std::f64::consts::PI;

    fn traj(g: Grid, m: usize, t_end: f64, d: impl Fn([f64; 3], f64) -> [f64; 3] + Sync) -> Vec<SimState> {
        (0..m)
            .map(|j| {
                let t = t_end * j as f64 / (m - 1) as f64;
                SimState {
                    d: VectorField::from_fn(g, |x| d(x, t)),
                    t,
                    ..SimState::zeros(g, ModelParams::default())
                }
            })
            .collect()
    }

    #[test]
    fn rejects_small_exponent_and_short_trajectories() {
        let g = Grid::cubic(4, 1.0).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let t = traj(g, 3, 1.0, |_, _| [0.0; 3]);
        assert!(fractional_time_seminorm(&ops, &t, 2.0).is_err());
        assert!(fractional_time_seminorm(&ops, &t[..2], 3.0).is_err());
        assert_eq!(fractional_time_seminorm(&ops, &t, DEFAULT_EXPONENT).unwrap().total, 0.0);
    }

    #[test]
    fn linear_in_time_matches_closed_form() {
        let g = Grid::cubic(4, 1.0).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let big_t: f64 = 1.5;
        let t = traj(g, 400, big_t, |_, t| [t, 0.0, 0.0]);
        let r = fractional_time_seminorm(&ops, &t, DEFAULT_EXPONENT).unwrap();
        let exact = 2.0 * (7.0 / 10.0) * (7.0 / 17.0) * big_t.powf(17.0 / 7.0);
        assert!((r.time_part - exact).abs() / exact < 1e-2, "{} vs {exact}", r.time_part);
        assert!(r.gradient_part.abs() < 1e-20);
    }

    #[test]
    fn time_constant_field_has_only_gradient_part() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let t = traj(g, 5, 2.0, |x, _| [(2.0 * PI * x[0]).sin(), 0.0, 0.0]);
        let r = fractional_time_seminorm(&ops, &t, 3.0).unwrap();
        assert_eq!(r.time_part, 0.0);
        let per_slice: f64 = (0..g.len())
            .map(|i| ((2.0 * PI) * (2.0 * PI * g.position(i)[0]).cos()).abs().powi(3))
            .sum::<f64>()
            * g.cell_volume();
        assert!((r.gradient_part - 2.0 * per_slice).abs() < 1e-9 * per_slice);
    }

    #[test]
    fn interpolation_sides_are_homogeneous() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let f = |x: [f64; 3], t: f64| [(2.0 * PI * x[0]).sin() * (1.0 + t), (2.0 * PI * x[1]).cos(), 0.3];
        let a = interpolation_bound_check(&ops, &traj(g, 6, 1.0, f));
        let b = interpolation_bound_check(&ops, &traj(g, 6, 1.0, |x, t| f(x, t).map(|v| 2.0 * v)));
        assert!((b.lhs / a.lhs - 1024.0).abs() < 1e-9);
        assert!((b.rhs / a.rhs - 1024.0).abs() < 1e-9);
        let z = interpolation_bound_check(&ops, &traj(g, 3, 1.0, |_, _| [0.0; 3]));
        assert_eq!((z.lhs, z.rhs, z.ratio), (0.0, 0.0, None));
    }
}
