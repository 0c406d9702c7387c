use std::f64::consts::PI;

use elsim::diagnostics::{
    fractional_time_seminorm, global_energy, ParabolicCylinder, PhiData, PhiOptions,
};
use elsim::lc_tensors::{dot, ddot, kinematic_transport_at, leslie_stress_at};
use elsim::mollifier::{HistoryBuffer, MollifierKernel};
use elsim::random::{band_limited_scalar, band_limited_vector};
use elsim::solver::Mode;
use elsim::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn disc() -> impl Strategy<Value = Discretization> {
    prop_oneof![Just(Discretization::Spectral), Just(Discretization::FiniteDifference)]
}

fn vec3(r: f64) -> impl Strategy<Value = [f64; 3]> {
    [-r..r, -r..r, -r..r]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn gradient_and_divergence_are_adjoint(seed in any::<u64>(), d in disc()) {
        let g = Grid::cubic(12, 2.0 * PI).unwrap();
        let ops = Operators::new(g, d);
        let mut r = rng(seed);
        let f = band_limited_scalar(g, 3, 1.0, &mut r);
        let v = band_limited_vector(g, 3, 1.0, &mut r);
        let lhs = f.inner(&ops.divergence(&v)).unwrap();
        let rhs = -ops.gradient(&f).inner(&v).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal(seed in any::<u64>(), d in disc()) {
        let g = Grid::cubic(12, 2.0 * PI).unwrap();
        let ops = Operators::new(g, d);
        let v = band_limited_vector(g, 3, 1.0, &mut rng(seed));
        let p = ops.leray_project(&v);
        prop_assert!(ops.divergence(&p).max_abs() < 1e-10);
        prop_assert!((&ops.leray_project(&p) - &p).max_abs() < 1e-12);
    }

    #[test]
    fn cancellation_holds_pointwise(h in vec3(10.0), d in vec3(10.0), a in vec3(10.0), b in vec3(10.0), c in vec3(10.0), alpha in 0.0..=1.0f64) {
        let m = [a, b, c];
        let lhs = ddot(&leslie_stress_at(h, d, alpha), &m);
        let rhs = dot(kinematic_transport_at(&m, d, alpha), h);
        let scale = dot(h, h).sqrt() * dot(d, d).sqrt() * ddot(&m, &m).sqrt();
        prop_assert!((lhs - rhs).abs() <= 1e-14 * (1.0 + scale));
    }

    #[test]
    fn energy_entries_are_nonnegative(seed in any::<u64>(), amp in 0.0..3.0f64) {
        let g = Grid::cubic(8, 2.0 * PI).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let mut r = rng(seed);
        let s = SimState {
            u: band_limited_vector(g, 2, amp, &mut r),
            d: band_limited_vector(g, 2, amp, &mut r),
            ..SimState::zeros(g, ModelParams::default())
        };
        let e = global_energy(&ops, &s);
        for v in [e.kinetic, e.elastic, e.potential, e.dissipation_visc, e.dissipation_dir] {
            prop_assert!(v >= 0.0 && v.is_finite());
        }
    }

    #[test]
    fn seminorm_scales_with_power_p(seed in any::<u64>(), c in -3.0..3.0f64, p in 2.1..4.0f64) {
        let g = Grid::cubic(6, 2.0 * PI).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let mut r = rng(seed);
        let traj: Vec<SimState> = (0..4)
            .map(|k| SimState { d: band_limited_vector(g, 1, 1.0, &mut r), t: 0.1 * k as f64, ..SimState::zeros(g, ModelParams::default()) })
            .collect();
        let scaled: Vec<SimState> = traj.iter().map(|s| SimState { d: s.d.scaled(c), ..s.clone() }).collect();
        let a = fractional_time_seminorm(&ops, &traj, p).unwrap().total;
        let b = fractional_time_seminorm(&ops, &scaled, p).unwrap().total;
        prop_assert!((b - c.abs().powf(p) * a).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn mollifier_is_linear(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let g = Grid::cubic(8, 2.0 * PI).unwrap();
        let dt = 0.05;
        let kernel = MollifierKernel::new(0.2).unwrap().discretize(g, dt).unwrap();
        let mut r = rng(seed);
        let mut hist = HistoryBuffer::for_kernel(&kernel);
        for k in 0..12 {
            let s = SimState {
                u: band_limited_vector(g, 2, 1.0, &mut r),
                d: band_limited_vector(g, 2, 1.0, &mut r),
                t: k as f64 * dt,
                ..SimState::zeros(g, ModelParams::default())
            };
            hist.push(s).unwrap();
        }
        let t = 11.0 * dt;
        let pu: VectorField = kernel.apply(&hist, |s| &s.u, t).unwrap();
        let pd: VectorField = kernel.apply(&hist, |s| &s.d, t).unwrap();
        let mut comb = HistoryBuffer::for_kernel(&kernel);
        for s in hist.slices() {
            comb.push(SimState { u: s.u.lin_comb(a, &s.d, b).unwrap(), ..s.clone() }).unwrap();
        }
        let pc: VectorField = kernel.apply(&comb, |s| &s.u, t).unwrap();
        let expect = pu.lin_comb(a, &pd, b).unwrap();
        prop_assert!((&pc - &expect).max_abs() < 1e-12);
    }

    #[test]
    fn phi_velocity_term_is_cubic(seed in any::<u64>(), c in 1.0..4.0f64) {
        let g = Grid::cubic(16, 2.0 * PI).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let mut r = rng(seed);
        let traj: Vec<SimState> = (0..3)
            .map(|k| SimState {
                u: band_limited_vector(g, 2, 1.0, &mut r),
                d: band_limited_vector(g, 2, 1.0, &mut r),
                t: 0.5 * k as f64,
                ..SimState::zeros(g, ModelParams::default())
            })
            .collect();
        let scaled: Vec<SimState> =
            traj.iter().map(|s| SimState { u: s.u.scaled(c), d: s.d.scaled(c), ..s.clone() }).collect();
        let cyl = ParabolicCylinder { x: [1.0, 2.0, 3.0], t: 1.0, r: 1.0 };
        let a = PhiData::new(&ops, &traj).unwrap().phi(cyl, PhiOptions::default()).unwrap();
        let b = PhiData::new(&ops, &scaled).unwrap().phi(cyl, PhiOptions::default()).unwrap();
        prop_assert!((b.term_velocity - c.powi(3) * a.term_velocity).abs() <= 1e-12 * b.term_velocity);
        prop_assert!(b.term_velocity >= a.term_velocity);
    }

    #[test]
    fn constant_unit_director_is_a_fixed_point(d in vec3(1.0), alpha in 0.0..=1.0f64) {
        let n = dot(d, d).sqrt();
        prop_assume!(n > 1e-3);
        let unit = [d[0] / n, d[1] / n, d[2] / n];
        let g = Grid::cubic(8, 2.0 * PI).unwrap();
        let params = ModelParams::with_alpha(alpha).unwrap();
        let s = SimState { d: VectorField::constant(g, unit), ..SimState::zeros(g, params) };
        let mut solver = Solver::new(g, SolverConfig { dt: 0.01, mode: Mode::Direct, ..SolverConfig::default() }).unwrap();
        let next = solver.step(&s).unwrap();
        prop_assert!((&next.d - &s.d).max_abs() < 1e-12);
        prop_assert!(next.u.max_abs() < 1e-12);
    }
}
