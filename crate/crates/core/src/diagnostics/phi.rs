use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{Grid, Operators, ScalarField, VectorField};
use crate::lc_tensors::{ddot, dot};
use crate::solver::SimState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhiError {
    #[error("trajectory is empty")]
    Empty,
    #[error("trajectory times must increase strictly")]
    Unordered,
    #[error("cylinder time window [{from}, {to}] is outside the data [{start}, {end}]")]
    OutsideData { from: f64, to: f64, start: f64, end: f64 },
    #[error("radius {r} is below two grid spacings ({min})")]
    Unresolved { r: f64, min: f64 },
    #[error("radius {r} reaches half the box ({half})")]
    TooLarge { r: f64, half: f64 },
    #[error("radius must be positive and finite, got {0}")]
    BadRadius(f64),
}

/// `B_r(x) × [t − r², t]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParabolicCylinder {
    pub x: [f64; 3],
    pub t: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiReport {
    pub cylinder: ParabolicCylinder,
    /// `r⁻² ∫ (|u|³ + |∇d|³)`
    pub term_velocity: f64,
    /// `(r^{−k} ∫ |P|^{3/2})²`, `k = 2` by default
    pub term_pressure: f64,
    /// `(⨍ |d − d̄|⁶)^{1/2}`
    pub term_oscillation: f64,
    pub d_mean: [f64; 3],
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiOptions {
    /// Power of `r` dividing the pressure integral before squaring.
    pub pressure_exponent: f64,
}

impl Default for PhiOptions {
    fn default() -> Self {
        Self { pressure_exponent: 2.0 }
    }
}

/// Per-slice integrands precomputed from a trajectory.
pub struct PhiData {
    grid: Grid,
    times: Vec<f64>,
    cubic: Vec<ScalarField>,
    pressure: Vec<ScalarField>,
    d: Vec<VectorField>,
}

impl PhiData {
    pub fn new(ops: &Operators, trajectory: &[SimState]) -> Result<Self, PhiError> {
        let first = trajectory.first().ok_or(PhiError::Empty)?;
        if trajectory.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(PhiError::Unordered);
        }
        let grid = first.grid();
        let mut cubic = Vec::with_capacity(trajectory.len());
        let mut pressure = Vec::with_capacity(trajectory.len());
        for s in trajectory {
            let gd = ops.vector_gradient(&s.d);
            cubic.push(ScalarField::from_index_fn(grid, |i| {
                let u = s.u.at(i);
                let m = gd.at(i);
                dot(u, u).powf(1.5) + ddot(&m, &m).powf(1.5)
            }));
            pressure.push(s.p.map(|v| v.abs().powf(1.5)));
        }
        Ok(Self {
            grid,
            times: trajectory.iter().map(|s| s.t).collect(),
            cubic,
            pressure,
            d: trajectory.iter().map(|s| s.d.clone()).collect(),
        })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Weights `∫ₐᵇ ℓ_j(s) ds` of the piecewise-linear interpolant.
    fn time_weights(&self, a: f64, b: f64) -> Result<Vec<(usize, f64)>, PhiError> {
        let ts = &self.times;
        let (start, end) = (ts[0], ts[ts.len() - 1]);
        let eps = 1e-9 * (1.0 + end.abs());
        if a < start - eps || b > end + eps {
            return Err(PhiError::OutsideData { from: a, to: b, start, end });
        }
        if ts.len() == 1 {
            return Ok(vec![(0, b - a)]);
        }
        let mut w = vec![0.0; ts.len()];
        for j in 0..ts.len() - 1 {
            let (t0, t1) = (ts[j], ts[j + 1]);
            let lo = a.max(t0);
            let hi = b.min(t1);
            if hi <= lo {
                continue;
            }
            let len = t1 - t0;
            // ∫ (t1 − s)/len and ∫ (s − t0)/len over [lo, hi]
            w[j] += ((t1 - lo).powi(2) - (t1 - hi).powi(2)) / (2.0 * len);
            w[j + 1] += ((hi - t0).powi(2) - (lo - t0).powi(2)) / (2.0 * len);
        }
        Ok(w.into_iter().enumerate().filter(|(_, v)| *v > 0.0).collect())
    }

    fn check_radius(&self, r: f64) -> Result<(), PhiError> {
        if !(r.is_finite() && r > 0.0) {
            return Err(PhiError::BadRadius(r));
        }
        let min = 2.0 * self.grid.min_dx() * (1.0 - 1e-12);
        if r < min {
            return Err(PhiError::Unresolved { r, min });
        }
        let half = 0.5 * self.grid.box_length().iter().copied().fold(f64::INFINITY, f64::min);
        if r >= half {
            return Err(PhiError::TooLarge { r, half });
        }
        Ok(())
    }

    pub fn phi(&self, cyl: ParabolicCylinder, opts: PhiOptions) -> Result<PhiReport, PhiError> {
        self.check_radius(cyl.r)?;
        let ball = ball_weights(self.grid, cyl.x, cyl.r);
        self.evaluate(cyl, &ball, opts)
    }

    fn evaluate(&self, cyl: ParabolicCylinder, ball: &[(usize, f64)], opts: PhiOptions) -> Result<PhiReport, PhiError> {
        let tw = self.time_weights(cyl.t - cyl.r * cyl.r, cyl.t)?;
        let (mut vel, mut pres, mut vol) = (0.0, 0.0, 0.0);
        let mut mean = [0.0; 3];
        for &(j, wt) in &tw {
            let (c, p, d) = (self.cubic[j].data(), self.pressure[j].data(), &self.d[j]);
            for &(i, wx) in ball {
                let w = wt * wx;
                vel += w * c[i];
                pres += w * p[i];
                vol += w;
                let dv = d.at(i);
                for k in 0..3 {
                    mean[k] += w * dv[k];
                }
            }
        }
        for m in &mut mean {
            *m /= vol;
        }
        let mut osc = 0.0;
        for &(j, wt) in &tw {
            let d = &self.d[j];
            for &(i, wx) in ball {
                let dv = d.at(i);
                let e = [dv[0] - mean[0], dv[1] - mean[1], dv[2] - mean[2]];
                osc += wt * wx * dot(e, e).powi(3);
            }
        }
        let term_velocity = vel / (cyl.r * cyl.r);
        let term_pressure = (pres / cyl.r.powf(opts.pressure_exponent)).powi(2);
        let term_oscillation = (osc / vol).sqrt();
        Ok(PhiReport {
            cylinder: cyl,
            term_velocity,
            term_pressure,
            term_oscillation,
            d_mean: mean,
            phi: term_velocity + term_pressure + term_oscillation,
        })
    }
}

pub fn phi(ops: &Operators, trajectory: &[SimState], cyl: ParabolicCylinder) -> Result<PhiReport, PhiError> {
    PhiData::new(ops, trajectory)?.phi(cyl, PhiOptions::default())
}

const SUBSAMPLES: usize = 6;

/// Fraction of each lattice cell inside `B_r(center)` times the cell volume.
/// Cells cut by the sphere are subsampled on a 6³ midpoint lattice.
pub fn ball_weights(grid: Grid, center: [f64; 3], r: f64) -> Vec<(usize, f64)> {
    let h = grid.dx();
    let cell = grid.cell_volume();
    let c: Vec<isize> = (0..3).map(|a| (center[a] / h[a]).round() as isize).collect();
    let m: Vec<isize> = (0..3).map(|a| (r / h[a]).ceil() as isize + 1).collect();
    let mut out = Vec::new();
    for k in -m[2]..=m[2] {
        for j in -m[1]..=m[1] {
            for i in -m[0]..=m[0] {
                let idx = grid.index_wrapped(c[0] + i, c[1] + j, c[2] + k);
                let y = grid.min_image(grid.position(idx), center);
                let frac = cell_fraction(y, h, r);
                if frac > 0.0 {
                    out.push((idx, frac * cell));
                }
            }
        }
    }
    // The bounding box can wrap onto itself only when r approaches L/2.
    out.sort_by_key(|e| e.0);
    out.dedup_by_key(|e| e.0);
    out
}

fn cell_fraction(y: [f64; 3], h: [f64; 3], r: f64) -> f64 {
    let mut near = 0.0;
    let mut far = 0.0;
    for a in 0..3 {
        let lo = (y[a].abs() - 0.5 * h[a]).max(0.0);
        let hi = y[a].abs() + 0.5 * h[a];
        near += lo * lo;
        far += hi * hi;
    }
    let r2 = r * r;
    if far <= r2 {
        return 1.0;
    }
    if near >= r2 {
        return 0.0;
    }
    let n = SUBSAMPLES;
    let mut inside = 0usize;
    for a in 0..n {
        let px = y[0] + h[0] * ((a as f64 + 0.5) / n as f64 - 0.5);
        for b in 0..n {
            let py = y[1] + h[1] * ((b as f64 + 0.5) / n as f64 - 0.5);
            for c in 0..n {
                let pz = y[2] + h[2] * ((c as f64 + 0.5) / n as f64 - 0.5);
                if px * px + py * py + pz * pz < r2 {
                    inside += 1;
                }
            }
        }
    }
    inside as f64 / (n * n * n) as f64
}

/// Which lattice points and times to test for candidates.
#[derive(Clone, Debug, PartialEq)]
pub struct ScanSpec {
    /// Test every `stride`-th lattice point along each axis.
    pub stride: usize,
    /// Explicit cylinder top times; `None` uses every slice time that leaves
    /// room for the largest cylinder.
    pub times: Option<Vec<f64>>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self { stride: 1, times: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub x: [f64; 3],
    pub t: f64,
    /// Smallest Φ over the scanned radii.
    pub phi_min: f64,
}

/// Φ at every scanned lattice point, top time and radius. Reports are
/// ordered by time, then lattice point (x fastest), then radius as given.
pub fn phi_scan(data: &PhiData, radii: &[f64], scan: &ScanSpec, opts: PhiOptions) -> Result<Vec<PhiReport>, PhiError> {
    if radii.is_empty() {
        return Ok(Vec::new());
    }
    for &r in radii {
        data.check_radius(r)?;
    }
    let rmax = radii.iter().copied().fold(0.0, f64::max);
    let t0 = data.times[0];
    let times: Vec<f64> = match &scan.times {
        Some(ts) => ts.clone(),
        None => data.times.iter().copied().filter(|&t| t - rmax * rmax >= t0 - 1e-12).collect(),
    };
    let g = data.grid;
    // Ball stencils about the origin, translated to each lattice point.
    let stencils: Vec<Vec<([isize; 3], f64)>> = radii
        .iter()
        .map(|&r| {
            ball_weights(g, [0.0; 3], r)
                .into_iter()
                .map(|(idx, w)| {
                    let c = g.coords(idx);
                    let n = g.n();
                    let off = |v: usize, n: usize| if v > n / 2 { v as isize - n as isize } else { v as isize };
                    ([off(c[0], n[0]), off(c[1], n[1]), off(c[2], n[2])], w)
                })
                .collect()
        })
        .collect();
    let n = g.n();
    let stride = scan.stride.max(1);
    let mut points = Vec::new();
    for k in (0..n[2]).step_by(stride) {
        for j in (0..n[1]).step_by(stride) {
            for i in (0..n[0]).step_by(stride) {
                points.push([i, j, k]);
            }
        }
    }
    let mut out = Vec::new();
    for &t in &times {
        let found: Result<Vec<Vec<PhiReport>>, PhiError> = points
            .par_iter()
            .map(|p| {
                let x = g.position(g.index(p[0], p[1], p[2]));
                radii
                    .iter()
                    .zip(&stencils)
                    .map(|(r, st)| {
                        let ball: Vec<(usize, f64)> = st
                            .iter()
                            .map(|(o, w)| {
                                (g.index_wrapped(p[0] as isize + o[0], p[1] as isize + o[1], p[2] as isize + o[2]), *w)
                            })
                            .collect();
                        data.evaluate(ParabolicCylinder { x, t, r: *r }, &ball, opts)
                    })
                    .collect()
            })
            .collect();
        out.extend(found?.into_iter().flatten());
    }
    Ok(out)
}

/// Centers whose smallest Φ over the scanned radii exceeds `threshold`.
/// Expects the ordering produced by [`phi_scan`].
pub fn candidates_from(reports: &[PhiReport], radii: usize, threshold: f64) -> Vec<Candidate> {
    if radii == 0 {
        return Vec::new();
    }
    reports
        .chunks(radii)
        .filter_map(|c| {
            let phi_min = c.iter().map(|r| r.phi).fold(f64::INFINITY, f64::min);
            let z = c[0].cylinder;
            (phi_min > threshold).then_some(Candidate { x: z.x, t: z.t, phi_min })
        })
        .collect()
}

/// Space-time lattice points whose Φ stays above `threshold` at every radius.
pub fn singular_candidates(
    data: &PhiData,
    radii: &[f64],
    threshold: f64,
    scan: &ScanSpec,
    opts: PhiOptions,
) -> Result<Vec<Candidate>, PhiError> {
    let reports = phi_scan(data, radii, scan, opts)?;
    Ok(candidates_from(&reports, radii.len(), threshold))
}
