//! Identity suite: algebraic and discrete identities of the stress and
//! transport tensors, the potential, and the retarded mollifier, each checked
//! against a tolerance.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::{Discretization, Grid, Operators, TensorField, VectorField};
use crate::lc_tensors::{
    check_stress_divergence_identity, delta_expansion_residual, dot, gl_force_at, gl_potential_at, kinematic_transport_at,
    leslie_stress_at, ddot, ModelParams,
};
use crate::mollifier::{HistoryBuffer, MollifierKernel};
use crate::random::band_limited_vector;
use crate::solver::SimState;

pub const ALPHA_SWEEP: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

pub const TOL_CANCELLATION: f64 = 1e-12;
pub const TOL_STRESS_SPECTRAL: f64 = 1e-9;
pub const FD_RATIO_RANGE: (f64, f64) = (3.5, 4.5);
pub const TOL_EXPANSION: f64 = 1e-9;
/// Relative slack on the exact `ε²(d·e)` error of the central difference.
pub const TOL_GRADIENT: f64 = 1e-3;
pub const GRADIENT_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const TOL_MOLLIFIER_DIV: f64 = 1e-10;
pub const TOL_NORMALIZATION: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Number of random field triples per α in the cancellation check.
    pub triples: usize,
    pub n: usize,
    /// Number of random directors in the expansion check.
    pub directors: usize,
    pub seed: u64,
    /// Mutation hook: evaluate the cancellation with `−T_α`.
    pub flip_transport_sign: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { triples: 100, n: 32, directors: 20, seed: 2024, flip_transport_sign: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityRow {
    pub name: &'static str,
    pub detail: String,
    pub value: f64,
    /// Pass iff `lo ≤ value ≤ hi`.
    pub lo: f64,
    pub hi: f64,
}

impl IdentityRow {
    fn at_most(name: &'static str, detail: String, value: f64, tol: f64) -> Self {
        Self { name, detail, value, lo: f64::NEG_INFINITY, hi: tol }
    }

    pub fn passed(&self) -> bool {
        self.value >= self.lo && self.value <= self.hi
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyReport {
    pub rows: Vec<IdentityRow>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(IdentityRow::passed)
    }

    /// Names of failing identities, without repeats.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for r in self.rows.iter().filter(|r| !r.passed()) {
            if !out.contains(&r.name) {
                out.push(r.name);
            }
        }
        out
    }
}

pub fn run_suite(opts: &VerifyOptions) -> VerifyReport {
    let mut rows = Vec::new();
    rows.extend(cancellation_rows(opts));
    rows.extend(stress_divergence_rows(opts));
    rows.push(expansion_row(opts));
    rows.extend(gradient_rows(opts));
    rows.extend(mollifier_rows());
    VerifyReport { rows }
}

fn uniform_vector(g: Grid, rng: &mut ChaCha8Rng) -> VectorField {
    let data: Vec<[f64; 3]> = (0..g.len()).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
    VectorField::from_index_fn(g, |i| data[i])
}

fn uniform_tensor(g: Grid, rng: &mut ChaCha8Rng) -> TensorField {
    let data: Vec<[[f64; 3]; 3]> = (0..g.len())
        .map(|_| {
            let mut m = [[0.0; 3]; 3];
            for row in &mut m {
                for v in row {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
            m
        })
        .collect();
    TensorField::from_index_fn(g, |i| data[i])
}

/// `max |S_α[h,d] : G − s·T_α[G,d]·h|` over random pointwise triples.
pub fn cancellation_rows(opts: &VerifyOptions) -> Vec<IdentityRow> {
    let g = Grid::cubic(opts.n, 1.0).expect("grid");
    let sign = if opts.flip_transport_sign { -1.0 } else { 1.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst = vec![0.0f64; ALPHA_SWEEP.len()];
    for _ in 0..opts.triples {
        let h = uniform_vector(g, &mut rng);
        let d = uniform_vector(g, &mut rng);
        let gu = uniform_tensor(g, &mut rng);
        for (w, &alpha) in worst.iter_mut().zip(&ALPHA_SWEEP) {
            let r = (0..g.len())
                .map(|i| {
                    let (hv, dv, m) = (h.at(i), d.at(i), gu.at(i));
                    let lhs = ddot(&leslie_stress_at(hv, dv, alpha), &m);
                    let rhs = sign * dot(kinematic_transport_at(&m, dv, alpha), hv);
                    (lhs - rhs).abs()
                })
                .fold(0.0, f64::max);
            *w = w.max(r);
        }
    }
    ALPHA_SWEEP
        .iter()
        .zip(worst)
        .map(|(a, w)| IdentityRow::at_most("cancellation", format!("alpha={a}"), w, TOL_CANCELLATION))
        .collect()
}

/// Spectral residuals on band-limited directors, and the FD residual ratio
/// under one halving of the grid spacing.
pub fn stress_divergence_rows(opts: &VerifyOptions) -> Vec<IdentityRow> {
    let g = Grid::cubic(opts.n, 2.0 * PI).expect("grid");
    let ops = Operators::new(g, Discretization::Spectral);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let (mut er, mut ch) = (0.0f64, 0.0f64);
    for _ in 0..3 {
        let d = band_limited_vector(g, 2, 1.0, &mut rng);
        let r = check_stress_divergence_identity(&ops, &d);
        er = er.max(r.ericksen);
        ch = ch.max(r.chain_rule);
    }
    let fd = |n: usize| {
        let g = Grid::cubic(n, 2.0 * PI).expect("grid");
        let ops = Operators::new(g, Discretization::FiniteDifference);
        let d = VectorField::from_fn(g, |x| [x[2].cos(), 0.5 * x[0].sin(), (x[1] + 0.3).cos()]);
        check_stress_divergence_identity(&ops, &d).ericksen
    };
    let (coarse, fine) = (fd(32), fd(64));
    vec![
        IdentityRow::at_most("stress_divergence", "spectral".into(), er, TOL_STRESS_SPECTRAL),
        IdentityRow::at_most("chain_rule", "spectral".into(), ch, TOL_STRESS_SPECTRAL),
        IdentityRow {
            name: "stress_divergence",
            detail: format!("fd ratio n=32->64 ({coarse:.3e} -> {fine:.3e})"),
            value: coarse / fine,
            lo: FD_RATIO_RANGE.0,
            hi: FD_RATIO_RANGE.1,
        },
    ]
}

pub fn expansion_row(opts: &VerifyOptions) -> IdentityRow {
    let g = Grid::cubic(opts.n, 2.0 * PI).expect("grid");
    let ops = Operators::new(g, Discretization::Spectral);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xe4a);
    let worst = (0..opts.directors)
        .map(|_| delta_expansion_residual(&ops, &band_limited_vector(g, 2, 1.0, &mut rng)).relative())
        .fold(0.0, f64::max);
    IdentityRow::at_most("expansion", format!("{} directors", opts.directors), worst, TOL_EXPANSION)
}

/// Central difference of `F` along unit `e` versus `f(d)·e`. For the quartic
/// potential the error is exactly `ε²(d·e)`; the row reports the worst
/// deviation from that, normalized by `TOL_GRADIENT·ε²` plus the round-off of
/// the difference quotient. Pass iff `≤ 1`.
pub fn gradient_rows(opts: &VerifyOptions) -> Vec<IdentityRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x9ad);
    let samples: Vec<([f64; 3], [f64; 3])> = (0..200)
        .map(|_| {
            let d = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            let mut e = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let n = dot(e, e).sqrt();
            e.iter_mut().for_each(|v| *v /= n);
            (d, e)
        })
        .collect();
    GRADIENT_EPS
        .iter()
        .map(|&eps| {
            let worst = samples
                .iter()
                .map(|&(d, e)| {
                    let plus = gl_potential_at([d[0] + eps * e[0], d[1] + eps * e[1], d[2] + eps * e[2]]);
                    let minus = gl_potential_at([d[0] - eps * e[0], d[1] - eps * e[1], d[2] - eps * e[2]]);
                    let err = (plus - minus) / (2.0 * eps) - dot(gl_force_at(d), e);
                    let rounding = 64.0 * f64::EPSILON * (1.0 + plus.abs().max(minus.abs())) / eps;
                    (err - eps * eps * dot(d, e)).abs() / (TOL_GRADIENT * eps * eps + rounding)
                })
                .fold(0.0, f64::max);
            IdentityRow::at_most("gradient_consistency", format!("eps={eps:e}"), worst, 1.0)
        })
        .collect()
}

/// Normalization, support, causality and divergence preservation of the
/// discrete retarded mollifier.
pub fn mollifier_rows() -> Vec<IdentityRow> {
    let theta = 0.2;
    let dt = 0.02;
    let g = Grid::cubic(16, 2.0 * PI).expect("grid");
    let ops = Operators::new(g, Discretization::Spectral);
    let kernel = MollifierKernel::new(theta).expect("theta").discretize(g, dt).expect("dt");
    let mut rows = vec![IdentityRow::at_most(
        "mollifier_normalization",
        format!("theta={theta}, dt={dt}"),
        (kernel.total_weight() - 1.0).abs(),
        TOL_NORMALIZATION,
    )];

    let h = g.dx();
    let violations = kernel
        .taps()
        .filter(|&(lag, o, w)| {
            let tau = lag as f64 * dt;
            let y2: f64 = (0..3).map(|a| (o[a] as f64 * h[a]).powi(2)).sum();
            !(w > 0.0 && tau > theta && tau < 2.0 * theta && y2 < theta * tau)
        })
        .count();
    rows.push(IdentityRow::at_most("mollifier_support", format!("{} taps", kernel.tap_count()), violations as f64, 0.0));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let steps = 30;
    let mut history = HistoryBuffer::for_kernel(&kernel);
    let mut slices = Vec::new();
    for k in 0..=steps {
        let u = ops.leray_project(&band_limited_vector(g, 3, 1.0, &mut rng));
        let s = SimState { u, t: k as f64 * dt, ..SimState::zeros(g, ModelParams::default()) };
        history.push(s.clone()).expect("uniform steps");
        slices.push(s);
    }
    let t = steps as f64 * dt;
    let base: VectorField = kernel.apply(&history, |s| &s.u, t).expect("history");
    rows.push(IdentityRow::at_most(
        "mollifier_divergence",
        "spectral n=16".into(),
        ops.divergence(&base).max_abs(),
        TOL_MOLLIFIER_DIV,
    ));

    // Replace every slice newer than t − θ; the result must not move a bit.
    let mut perturbed = HistoryBuffer::for_kernel(&kernel);
    for s in &slices {
        let mut s = s.clone();
        if s.t > t - theta + 1e-9 {
            s.u = band_limited_vector(g, 2, 5.0, &mut rng);
        }
        perturbed.push(s).expect("uniform steps");
    }
    let moved: VectorField = kernel.apply(&perturbed, |s| &s.u, t).expect("history");
    let changed = (0..3).filter(|&c| moved.comp(c).data() != base.comp(c).data()).count();
    rows.push(IdentityRow::at_most("mollifier_causality", "bitwise".into(), changed as f64, 0.0));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions { triples: 2, n: 32, directors: 2, ..VerifyOptions::default() }
    }

    #[test]
    fn suite_passes_on_small_inputs() {
        let r = run_suite(&small());
        for row in &r.rows {
            assert!(row.passed(), "{row:?}");
        }
    }

    #[test]
    fn sign_flip_is_caught() {
        let rows = cancellation_rows(&VerifyOptions { flip_transport_sign: true, ..small() });
        assert!(rows.iter().any(|r| !r.passed()));
        let report = VerifyReport { rows };
        assert_eq!(report.failures(), vec!["cancellation"]);
    }
}
