//! Retarded space-time mollifier.
//!
//! `Ψ_θ[f](x, t) = θ⁻⁴ ∫ η(y/θ, τ/θ) f̃(x − y, t − τ) dy dτ` where `η` is
//! supported in `{|x|² < t, 1 < t < 2}` and `f̃` extends `f` by zero to
//! negative times. The output at `t` only reads slices with times in
//! `(t − 2θ, t − θ)`.
//!
//! The spatial convolution wraps around the torus, so results are only a
//! faithful discretization while `√2·θ` stays well below the box size.

use std::collections::VecDeque;

use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{Field, Grid, Operators, ScalarField};
use crate::solver::SimState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MollifierError {
    #[error("mollification scale theta must lie in (0, 1], got {0}")]
    ThetaOutOfRange(f64),
    #[error("time step {dt} exceeds theta/4 = {limit}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("history slice at t = {found} does not follow t = {last} with step {dt}")]
    NonUniformHistory { last: f64, found: f64, dt: f64 },
    #[error("history slice lives on a different grid")]
    GridMismatch,
    #[error("history is missing slices for times [{from}, {to}]")]
    MissingHistory { from: f64, to: f64 },
    #[error("history capacity must be at least 1")]
    ZeroCapacity,
}

/// `exp(−1/(1−s²))` on `|s| < 1`, zero elsewhere.
#[inline]
pub fn bump(s: f64) -> f64 {
    if s.abs() < 1.0 {
        (-1.0 / (1.0 - s * s)).exp()
    } else {
        0.0
    }
}

/// Unscaled profile `b(2t − 3) · b(|x|/√t)` on the support set.
#[inline]
fn profile(r2: f64, t: f64) -> f64 {
    if t <= 1.0 || t >= 2.0 || r2 >= t {
        return 0.0;
    }
    bump(2.0 * t - 3.0) * bump((r2 / t).sqrt())
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Continuous kernel `η` with the constant `c` chosen so `∫η dx dt = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MollifierKernel {
    theta: f64,
    c: f64,
}

pub fn make_kernel(theta: f64) -> Result<MollifierKernel, MollifierError> {
    MollifierKernel::new(theta)
}

impl MollifierKernel {
    pub fn new(theta: f64) -> Result<Self, MollifierError> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(MollifierError::ThetaOutOfRange(theta));
        }
        // ∫ b(|x|/√t) dx = 4π t^{3/2} ∫₀¹ b(s) s² ds.
        let radial = 4.0 * std::f64::consts::PI * simpson(|s| bump(s) * s * s, 0.0, 1.0, 4000);
        let temporal = simpson(|t| bump(2.0 * t - 3.0) * t.powf(1.5), 1.0, 2.0, 4000);
        Ok(Self { theta, c: 1.0 / (radial * temporal) })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn normalization(&self) -> f64 {
        self.c
    }

    /// `η(x, t)` in unscaled variables.
    pub fn eta(&self, x: [f64; 3], t: f64) -> f64 {
        self.c * profile(x[0] * x[0] + x[1] * x[1] + x[2] * x[2], t)
    }

    /// `θ⁻⁴ η(y/θ, τ/θ)`.
    pub fn scaled(&self, y: [f64; 3], tau: f64) -> f64 {
        let th = self.theta;
        self.eta([y[0] / th, y[1] / th, y[2] / th], tau / th) / th.powi(4)
    }

    /// Sample on the lattice `τ = k·dt`, `y ∈ grid offsets` and renormalize so
    /// the discrete weights sum to one.
    pub fn discretize(&self, grid: Grid, dt: f64) -> Result<DiscreteKernel, MollifierError> {
        let limit = self.theta / 4.0;
        if !(dt > 0.0 && dt <= limit * (1.0 + 1e-12)) {
            return Err(MollifierError::StepTooLarge { dt, limit });
        }
        let th = self.theta;
        let h = grid.dx();
        let cell = grid.cell_volume();
        let k_lo = (th / dt).floor() as usize;
        let k_hi = (2.0 * th / dt).ceil() as usize;
        let mut lags = Vec::new();
        for k in k_lo..=k_hi {
            let tau = k as f64 * dt;
            let radius = (th * tau).sqrt();
            let m: Vec<isize> = (0..3).map(|a| (radius / h[a]).ceil() as isize).collect();
            let mut taps = Vec::new();
            for c in -m[2]..=m[2] {
                for b in -m[1]..=m[1] {
                    for a in -m[0]..=m[0] {
                        let y = [a as f64 * h[0], b as f64 * h[1], c as f64 * h[2]];
                        let w = self.scaled(y, tau) * cell * dt;
                        if w > 0.0 {
                            taps.push(([a, b, c], w));
                        }
                    }
                }
            }
            if !taps.is_empty() {
                lags.push(LagStencil { lag: k, taps });
            }
        }
        let total: f64 = lags.iter().flat_map(|l| l.taps.iter().map(|t| t.1)).sum();
        for l in &mut lags {
            for t in &mut l.taps {
                t.1 /= total;
            }
        }
        Ok(DiscreteKernel { theta: th, dt, grid, lags })
    }
}

#[derive(Clone, Debug)]
struct LagStencil {
    lag: usize,
    taps: Vec<([isize; 3], f64)>,
}

/// Kernel weights on a fixed `(θ, dt, grid)` lattice.
#[derive(Clone, Debug)]
pub struct DiscreteKernel {
    theta: f64,
    dt: f64,
    grid: Grid,
    lags: Vec<LagStencil>,
}

impl DiscreteKernel {
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn total_weight(&self) -> f64 {
        self.lags.iter().flat_map(|l| l.taps.iter().map(|t| t.1)).sum()
    }

    /// Time lags (in steps) that carry weight.
    pub fn lags(&self) -> Vec<usize> {
        self.lags.iter().map(|l| l.lag).collect()
    }

    pub fn tap_count(&self) -> usize {
        self.lags.iter().map(|l| l.taps.len()).sum()
    }

    /// Every `(lag, lattice offset, weight)` triple.
    pub fn taps(&self) -> impl Iterator<Item = (usize, [isize; 3], f64)> + '_ {
        self.lags.iter().flat_map(|l| l.taps.iter().map(move |&(o, w)| (l.lag, o, w)))
    }

    /// Spatial convolution of one slice with the stencil of lag `k`,
    /// accumulated into `out`.
    fn accumulate(&self, stencil: &LagStencil, src: &[f64], out: &mut [f64]) {
        let [n0, n1, n2] = self.grid.n();
        let wrap = |v: isize, n: usize| v.rem_euclid(n as isize) as usize;
        out.par_chunks_mut(n0 * n1).enumerate().for_each(|(k, plane)| {
            for &([a, b, c], w) in &stencil.taps {
                let ks = wrap(k as isize - c, n2);
                for j in 0..n1 {
                    let js = wrap(j as isize - b, n1);
                    let row = n0 * (js + n1 * ks);
                    let dst = &mut plane[j * n0..(j + 1) * n0];
                    for (i, o) in dst.iter_mut().enumerate() {
                        *o += w * src[row + wrap(i as isize - a, n0)];
                    }
                }
            }
        });
        debug_assert_eq!(n2 * n0 * n1, out.len());
    }

    /// `Ψ_θ[f](·, t)` for the field picked out of each slice by `select`.
    pub fn apply<F, S>(&self, history: &HistoryBuffer, select: S, t: f64) -> Result<F, MollifierError>
    where
        F: Field,
        S: Fn(&SimState) -> &F,
    {
        self.apply_with(history, select, t, Extension::Zero)
    }

    fn apply_with<F, S>(&self, history: &HistoryBuffer, select: S, t: f64, ext: Extension) -> Result<F, MollifierError>
    where
        F: Field,
        S: Fn(&SimState) -> &F,
    {
        let template = history.slices.front().ok_or(MollifierError::MissingHistory {
            from: (t - 2.0 * self.theta).max(0.0),
            to: t - self.theta,
        })?;
        if template.u.grid() != self.grid {
            return Err(MollifierError::GridMismatch);
        }
        let tol = 1e-6 * self.dt;
        let mut sources = Vec::with_capacity(self.lags.len());
        let mut missing: Option<(f64, f64)> = None;
        for stencil in &self.lags {
            let s = t - stencil.lag as f64 * self.dt;
            match history.find(s, tol) {
                Some(slice) => sources.push(Some((stencil, slice))),
                None => match ext {
                    Extension::HoldFirst if s < template.t => sources.push(Some((stencil, template))),
                    _ if s < -tol => sources.push(None),
                    _ => {
                        let (lo, hi) = missing.unwrap_or((s, s));
                        missing = Some((lo.min(s), hi.max(s)));
                    }
                },
            }
        }
        if let Some((from, to)) = missing {
            return Err(MollifierError::MissingHistory { from, to });
        }
        let ncomp = select(template).components().len();
        let mut acc = vec![vec![0.0; self.grid.len()]; ncomp];
        for (stencil, slice) in sources.into_iter().flatten() {
            for (dst, c) in acc.iter_mut().zip(select(slice).components()) {
                self.accumulate(stencil, c.data(), dst);
            }
        }
        let mut it = acc.into_iter();
        let grid = self.grid;
        Ok(select(template).map_scalar(|_| {
            ScalarField::new(grid, it.next().expect("component count")).expect("grid-sized buffer")
        }))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Extension {
    Zero,
    HoldFirst,
}

/// Timestamped states at uniform spacing `dt`, oldest first. When full the
/// oldest slice is dropped.
#[derive(Clone, Debug)]
pub struct HistoryBuffer {
    capacity: usize,
    dt: f64,
    slices: VecDeque<SimState>,
}

impl HistoryBuffer {
    pub fn new(capacity: usize, dt: f64) -> Result<Self, MollifierError> {
        if capacity == 0 {
            return Err(MollifierError::ZeroCapacity);
        }
        Ok(Self { capacity, dt, slices: VecDeque::with_capacity(capacity) })
    }

    /// Enough capacity to serve `apply` at every step for this kernel.
    pub fn for_kernel(kernel: &DiscreteKernel) -> Self {
        let cap = kernel.lags().last().copied().unwrap_or(0) + 2;
        Self { capacity: cap, dt: kernel.dt, slices: VecDeque::with_capacity(cap) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn slices(&self) -> impl Iterator<Item = &SimState> {
        self.slices.iter()
    }

    pub fn latest(&self) -> Option<&SimState> {
        self.slices.back()
    }

    pub fn push(&mut self, state: SimState) -> Result<(), MollifierError> {
        if let Some(last) = self.slices.back() {
            if last.u.grid() != state.u.grid() {
                return Err(MollifierError::GridMismatch);
            }
            if ((state.t - last.t) - self.dt).abs() > 1e-6 * self.dt {
                return Err(MollifierError::NonUniformHistory { last: last.t, found: state.t, dt: self.dt });
            }
        }
        if self.slices.len() == self.capacity {
            self.slices.pop_front();
        }
        self.slices.push_back(state);
        Ok(())
    }

    fn find(&self, s: f64, tol: f64) -> Option<&SimState> {
        let first = self.slices.front()?.t;
        let pos = ((s - first) / self.dt).round();
        if pos < 0.0 || pos as usize >= self.slices.len() {
            return None;
        }
        let slice = &self.slices[pos as usize];
        ((slice.t - s).abs() <= tol).then_some(slice)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    Value(f64),
    /// Both numerator and denominator vanish.
    Degenerate,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Self {
        if den == 0.0 && num == 0.0 {
            Ratio::Degenerate
        } else {
            Ratio::Value(num / den)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::Degenerate => None,
        }
    }
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Ratio::Value(v) => write!(f, "{v:.6e}"),
            Ratio::Degenerate => f.write_str("degenerate"),
        }
    }
}

/// `sup_t ‖Ψ[w]‖² / sup_t ‖w‖²` and `Σ_t ‖∇Ψ[w]‖² / Σ_t ‖∇w‖²` over the
/// stored slices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundsReport {
    pub l2_ratio: Ratio,
    pub grad_ratio: Ratio,
}

/// Evaluates `Ψ_θ[u]` at every stored time. Lags reaching before the first
/// stored slice reuse it, so a single slice stands for data held constant in
/// time.
pub fn mollifier_bounds_check(ops: &Operators, kernel: &DiscreteKernel, history: &HistoryBuffer) -> BoundsReport {
    let grad_sq = |v: &crate::fields::VectorField| {
        let g = ops.vector_gradient(v);
        g.components().iter().map(|c| c.inner(c).expect("same grid")).sum::<f64>()
    };
    let (mut sup_w, mut sup_m, mut gw, mut gm) = (0.0f64, 0.0f64, 0.0, 0.0);
    for slice in history.slices() {
        let m = kernel
            .apply_with(history, |s: &SimState| &s.u, slice.t, Extension::HoldFirst)
            .expect("held extension covers every lag");
        sup_w = sup_w.max(slice.u.inner(&slice.u).expect("same grid"));
        sup_m = sup_m.max(m.inner(&m).expect("same grid"));
        gw += grad_sq(&slice.u);
        gm += grad_sq(&m);
    }
    BoundsReport { l2_ratio: Ratio::of(sup_m, sup_w), grad_ratio: Ratio::of(gm, gw) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Discretization, VectorField};
    use crate::lc_tensors::ModelParams;

    fn state(u: VectorField, t: f64) -> SimState {
        let g = u.grid();
        SimState::new(u, VectorField::zeros(g), ScalarField::zeros(g), t, ModelParams::default()).unwrap()
    }

    #[test]
    fn theta_range_is_checked() {
        assert!(make_kernel(0.0).is_err());
        assert!(make_kernel(1.5).is_err());
        assert!(make_kernel(f64::NAN).is_err());
        assert!(make_kernel(1.0).is_ok());
    }

    #[test]
    fn support_constraints() {
        let k = make_kernel(0.5).unwrap();
        assert!(k.eta([0.0; 3], 1.5) > 0.0);
        assert_eq!(k.eta([0.0; 3], 1.0), 0.0);
        assert_eq!(k.eta([0.0; 3], 2.0), 0.0);
        assert_eq!(k.eta([0.0; 3], 0.7), 0.0);
        assert_eq!(k.eta([1.3, 0.0, 0.0], 1.6), 0.0);
        assert_eq!(k.eta([0.9, 0.9, 0.0], 1.6), 0.0);
        assert!(k.eta([0.5, 0.5, 0.0], 1.6) > 0.0);
    }

    #[test]
    fn continuous_normalization_matches_fine_quadrature() {
        // Independent 4-D midpoint sum over a box enclosing the support.
        let k = make_kernel(1.0).unwrap();
        let (nt, nx) = (40, 48);
        let ht = 1.0 / nt as f64;
        let hx = 2.0 * 2f64.sqrt() / nx as f64;
        let mut s = 0.0;
        for it in 0..nt {
            let t = 1.0 + (it as f64 + 0.5) * ht;
            for a in 0..nx {
                for b in 0..nx {
                    for c in 0..nx {
                        let x = |i: usize| -2f64.sqrt() + (i as f64 + 0.5) * hx;
                        s += k.eta([x(a), x(b), x(c)], t);
                    }
                }
            }
        }
        s *= ht * hx.powi(3);
        assert!((s - 1.0).abs() < 1e-3, "∫η = {s}");
    }

    #[test]
    fn discrete_weights_sum_to_one() {
        let g = Grid::cubic(16, 1.0).unwrap();
        for theta in [0.05, 0.2, 1.0] {
            let dk = make_kernel(theta).unwrap().discretize(g, theta / 8.0).unwrap();
            assert!((dk.total_weight() - 1.0).abs() < 1e-12);
            assert!(dk.lags().iter().all(|&k| k as f64 * dk.dt() > theta && (k as f64) * dk.dt() < 2.0 * theta));
        }
        assert!(make_kernel(0.2).unwrap().discretize(g, 0.06).is_err());
    }

    #[test]
    fn history_rejects_gaps_and_evicts() {
        let g = Grid::cubic(4, 1.0).unwrap();
        let mut h = HistoryBuffer::new(2, 0.1).unwrap();
        h.push(state(VectorField::zeros(g), 0.0)).unwrap();
        assert!(h.push(state(VectorField::zeros(g), 0.25)).is_err());
        h.push(state(VectorField::zeros(g), 0.1)).unwrap();
        h.push(state(VectorField::zeros(g), 0.2)).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h.slices().next().unwrap().t, 0.1);
        assert!(HistoryBuffer::new(0, 0.1).is_err());
    }

    #[test]
    fn constant_history_is_reproduced() {
        let g = Grid::cubic(8, 1.0).unwrap();
        let theta = 0.2;
        let dk = make_kernel(theta).unwrap().discretize(g, 0.025).unwrap();
        let mut h = HistoryBuffer::for_kernel(&dk);
        for n in 0..=20 {
            h.push(state(VectorField::constant(g, [1.5, -2.0, 0.25]), n as f64 * 0.025)).unwrap();
        }
        let out: VectorField = dk.apply(&h, |s| &s.u, 0.5).unwrap();
        for (c, v) in [1.5, -2.0, 0.25].iter().enumerate() {
            assert!(out.comp(c).data().iter().all(|x| (x - v).abs() < 1e-10));
        }
    }

    #[test]
    fn early_times_see_zero_extension() {
        let g = Grid::cubic(4, 1.0).unwrap();
        let dk = make_kernel(0.4).unwrap().discretize(g, 0.1).unwrap();
        let mut h = HistoryBuffer::for_kernel(&dk);
        h.push(state(VectorField::constant(g, [1.0; 3]), 0.0)).unwrap();
        let at0: VectorField = dk.apply(&h, |s| &s.u, 0.0).unwrap();
        assert_eq!(at0.max_abs(), 0.0);
        // Every weighted lag reaches before t = 0.
        h.push(state(VectorField::constant(g, [1.0; 3]), 0.1)).unwrap();
        let early: VectorField = dk.apply(&h, |s| &s.u, 0.1).unwrap();
        assert_eq!(early.max_abs(), 0.0);
    }

    #[test]
    fn missing_history_names_range() {
        let g = Grid::cubic(4, 1.0).unwrap();
        let dk = make_kernel(0.4).unwrap().discretize(g, 0.1).unwrap();
        let mut h = HistoryBuffer::new(3, 0.1).unwrap();
        for n in 5..8 {
            h.push(state(VectorField::zeros(g), n as f64 * 0.1)).unwrap();
        }
        let err = dk.apply::<VectorField, _>(&h, |s| &s.u, 1.0).unwrap_err();
        match err {
            MollifierError::MissingHistory { from, to } => {
                assert!(from > 0.2 - 1e-9 && to < 0.6 + 1e-9 && from <= to);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bounds_check_reports() {
        let g = Grid::cubic(8, 1.0).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let dk = make_kernel(0.4).unwrap().discretize(g, 0.1).unwrap();
        let mut h = HistoryBuffer::for_kernel(&dk);
        h.push(state(VectorField::constant(g, [0.0, 0.0, 2.0]), 0.0)).unwrap();
        let r = mollifier_bounds_check(&ops, &dk, &h);
        assert!((r.l2_ratio.value().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.grad_ratio, Ratio::Degenerate);

        let mut z = HistoryBuffer::for_kernel(&dk);
        z.push(state(VectorField::zeros(g), 0.0)).unwrap();
        let r = mollifier_bounds_check(&ops, &dk, &z);
        assert_eq!(r.l2_ratio, Ratio::Degenerate);
        assert_eq!(r.grad_ratio, Ratio::Degenerate);
        assert_eq!(r.l2_ratio.to_string(), "degenerate");
    }
}
