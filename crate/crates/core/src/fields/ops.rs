use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use super::fft::Fft3;
use super::storage::{check_grids, Field, ScalarField, TensorField, VectorField};
use super::{FieldError, Grid};

/// Which discrete derivative family the operators use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Discretization {
    /// Exact derivatives of the trigonometric interpolant.
    Spectral,
    /// Second-order central differences (3-point first derivative, 7-point Laplacian).
    FiniteDifference,
}

impl Discretization {
    pub fn name(self) -> &'static str {
        match self {
            Discretization::Spectral => "spectral",
            Discretization::FiniteDifference => "fd2",
        }
    }
}

impl fmt::Display for Discretization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Discretization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectral" => Ok(Discretization::Spectral),
            "fd2" | "fd" => Ok(Discretization::FiniteDifference),
            other => Err(format!("unknown discretization '{other}' (expected 'spectral' or 'fd2')")),
        }
    }
}

/// Differential and integral operators on one grid.
///
/// Conventions used throughout the crate:
/// * the gradient of a vector field is `(∇u)_{ij} = ∂_j u_i` (row = component,
///   column = derivative), so that `[(∇u) d]_i = Σ_j ∂_j u_i d_j`;
/// * the divergence of a tensor contracts the derivative with the second index,
///   `(∇·T)_i = Σ_j ∂_j T_{ij}`. This is the adjoint of the gradient above:
///   `∫ v·(∇·T) = -∫ T : ∇v` on the torus.
///
/// In finite-difference mode, derivatives are evaluated with stencils in real
/// space while solves (Poisson, projection, implicit diffusion) use the exact
/// Fourier symbols of those same stencils, so e.g. the projected field has zero
/// stencil divergence.
pub struct Operators {
    grid: Grid,
    disc: Discretization,
    fft: Fft3,
    /// Derivative symbol per axis: `∂_a ↔ i * deriv[a][idx]`.
    deriv: [Vec<f64>; 3],
    /// Laplacian symbol (non-positive).
    lap: Vec<f64>,
}

impl Operators {
    pub fn new(grid: Grid, disc: Discretization) -> Self {
        let n = grid.n();
        let dx = grid.dx();
        let len = grid.len();
        let axis_symbols = |a: usize| -> (Vec<f64>, Vec<f64>) {
            let l = grid.box_length()[a];
            let mut d = vec![0.0; n[a]];
            let mut s = vec![0.0; n[a]];
            for (m, (dm, sm)) in d.iter_mut().zip(s.iter_mut()).enumerate() {
                let mm = if m <= n[a] / 2 { m as f64 } else { m as f64 - n[a] as f64 };
                let k = 2.0 * PI * mm / l;
                let nyquist = n[a].is_multiple_of(2) && m == n[a] / 2;
                match disc {
                    Discretization::Spectral => {
                        *dm = if nyquist { 0.0 } else { k };
                        *sm = -k * k;
                    }
                    Discretization::FiniteDifference => {
                        *dm = if nyquist { 0.0 } else { (k * dx[a]).sin() / dx[a] };
                        *sm = -(2.0 - 2.0 * (k * dx[a]).cos()) / (dx[a] * dx[a]);
                    }
                }
            }
            (d, s)
        };
        let per_axis: Vec<(Vec<f64>, Vec<f64>)> = (0..3).map(axis_symbols).collect();
        let mut deriv = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        let mut lap = vec![0.0; len];
        for idx in 0..len {
            let c = grid.coords(idx);
            let mut s = 0.0;
            for a in 0..3 {
                deriv[a][idx] = per_axis[a].0[c[a]];
                s += per_axis[a].1[c[a]];
            }
            lap[idx] = s;
        }
        Self { grid, disc, fft: Fft3::new(grid), deriv, lap }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn discretization(&self) -> Discretization {
        self.disc
    }

    fn check(&self, g: Grid) {
        assert_eq!(g, self.grid, "field grid does not match operator grid");
    }

    fn times_ik(&self, spec: &[Complex64], axis: usize) -> Vec<Complex64> {
        let k = &self.deriv[axis];
        spec.iter().zip(k).map(|(s, &k)| Complex64::new(-k * s.im, k * s.re)).collect()
    }

    fn fd_partial(&self, data: &[f64], axis: usize) -> Vec<f64> {
        let g = self.grid;
        let inv = 0.5 / g.dx()[axis];
        (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let c = g.coords(idx);
                let mut p = [c[0] as isize, c[1] as isize, c[2] as isize];
                let mut m = p;
                p[axis] += 1;
                m[axis] -= 1;
                (data[g.index_wrapped(p[0], p[1], p[2])] - data[g.index_wrapped(m[0], m[1], m[2])]) * inv
            })
            .collect()
    }

    fn fd_laplacian(&self, data: &[f64]) -> Vec<f64> {
        let g = self.grid;
        let dx = g.dx();
        let inv = [1.0 / (dx[0] * dx[0]), 1.0 / (dx[1] * dx[1]), 1.0 / (dx[2] * dx[2])];
        (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let c = g.coords(idx);
                let (i, j, k) = (c[0] as isize, c[1] as isize, c[2] as isize);
                let f0 = data[idx];
                let at = |a, b, c| data[g.index_wrapped(a, b, c)];
                (at(i + 1, j, k) - 2.0 * f0 + at(i - 1, j, k)) * inv[0]
                    + (at(i, j + 1, k) - 2.0 * f0 + at(i, j - 1, k)) * inv[1]
                    + (at(i, j, k + 1) - 2.0 * f0 + at(i, j, k - 1)) * inv[2]
            })
            .collect()
    }

    fn scalar(&self, data: Vec<f64>) -> ScalarField {
        ScalarField::from_vec_unchecked(self.grid, data)
    }

    /// `∂f/∂x_axis`.
    pub fn partial(&self, f: &ScalarField, axis: usize) -> ScalarField {
        self.check(f.grid());
        match self.disc {
            Discretization::FiniteDifference => self.scalar(self.fd_partial(f.data(), axis)),
            Discretization::Spectral => {
                let spec = self.fft.forward(f.data());
                self.scalar(self.fft.inverse_real(self.times_ik(&spec, axis)))
            }
        }
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        self.check(f.grid());
        match self.disc {
            Discretization::FiniteDifference => {
                let c = |a| self.scalar(self.fd_partial(f.data(), a));
                VectorField::from_components([c(0), c(1), c(2)]).expect("same grid")
            }
            Discretization::Spectral => {
                let spec = self.fft.forward(f.data());
                let parts: Vec<Vec<Complex64>> = (0..3).map(|a| self.times_ik(&spec, a)).collect();
                let mut out = self.fft.inverse_many(&parts).into_iter().map(|d| self.scalar(d));
                let mut next = || out.next().expect("three components");
                VectorField::from_components([next(), next(), next()]).expect("same grid")
            }
        }
    }

    /// `(∇v)_{ij} = ∂_j v_i`.
    pub fn vector_gradient(&self, v: &VectorField) -> TensorField {
        self.check(v.grid());
        let comps: Vec<ScalarField> = match self.disc {
            Discretization::FiniteDifference => (0..9)
                .into_par_iter()
                .map(|ij| self.scalar(self.fd_partial(v.comp(ij / 3).data(), ij % 3)))
                .collect(),
            Discretization::Spectral => {
                let specs = self.fft.forward_many(&[v.comp(0).data(), v.comp(1).data(), v.comp(2).data()]);
                let parts: Vec<Vec<Complex64>> =
                    (0..9).map(|ij| self.times_ik(&specs[ij / 3], ij % 3)).collect();
                self.fft.inverse_many(&parts).into_iter().map(|d| self.scalar(d)).collect()
            }
        };
        let mut it = comps.into_iter();
        let mut next = || it.next().expect("nine components");
        TensorField::from_components([[next(), next(), next()], [next(), next(), next()], [next(), next(), next()]])
            .expect("same grid")
    }

    pub fn divergence(&self, v: &VectorField) -> ScalarField {
        self.check(v.grid());
        match self.disc {
            Discretization::FiniteDifference => {
                let parts: Vec<Vec<f64>> = (0..3).map(|a| self.fd_partial(v.comp(a).data(), a)).collect();
                self.scalar((0..self.grid.len()).map(|i| parts[0][i] + parts[1][i] + parts[2][i]).collect())
            }
            Discretization::Spectral => {
                let specs = self.fft.forward_many(&[v.comp(0).data(), v.comp(1).data(), v.comp(2).data()]);
                self.scalar(self.fft.inverse_real(self.spectral_div(&specs)))
            }
        }
    }

    fn spectral_div(&self, specs: &[Vec<Complex64>]) -> Vec<Complex64> {
        (0..self.grid.len())
            .map(|idx| {
                let mut s = Complex64::new(0.0, 0.0);
                for (a, sp) in specs.iter().enumerate() {
                    let k = self.deriv[a][idx];
                    s += Complex64::new(-k * sp[idx].im, k * sp[idx].re);
                }
                s
            })
            .collect()
    }

    /// `(∇·T)_i = Σ_j ∂_j T_{ij}`.
    pub fn tensor_divergence(&self, t: &TensorField) -> VectorField {
        self.check(t.grid());
        let comps: Vec<ScalarField> = match self.disc {
            Discretization::FiniteDifference => (0..3)
                .map(|i| {
                    let parts: Vec<Vec<f64>> = (0..3).map(|j| self.fd_partial(t.comp(i, j).data(), j)).collect();
                    self.scalar((0..self.grid.len()).map(|x| parts[0][x] + parts[1][x] + parts[2][x]).collect())
                })
                .collect(),
            Discretization::Spectral => {
                let rows: Vec<Vec<Complex64>> = (0..3)
                    .map(|i| {
                        let specs =
                            self.fft.forward_many(&[t.comp(i, 0).data(), t.comp(i, 1).data(), t.comp(i, 2).data()]);
                        self.spectral_div(&specs)
                    })
                    .collect();
                self.fft.inverse_many(&rows).into_iter().map(|d| self.scalar(d)).collect()
            }
        };
        let mut it = comps.into_iter();
        let mut next = || it.next().expect("three components");
        VectorField::from_components([next(), next(), next()]).expect("same grid")
    }

    /// Componentwise Laplacian of any field kind.
    pub fn laplacian<F: Field>(&self, f: &F) -> F {
        self.check(f.grid());
        match self.disc {
            Discretization::FiniteDifference => f.map_scalar(|c| self.scalar(self.fd_laplacian(c.data()))),
            Discretization::Spectral => self.apply_symbol(f, |idx| self.lap[idx]),
        }
    }

    /// Multiply every component by a real, even Fourier symbol.
    fn apply_symbol<F: Field, S: Fn(usize) -> f64 + Sync>(&self, f: &F, symbol: S) -> F {
        let comps = f.components();
        let data: Vec<&[f64]> = comps.iter().map(|c| c.data()).collect();
        let specs: Vec<Vec<Complex64>> = self
            .fft
            .forward_many(&data)
            .into_iter()
            .map(|mut s| {
                s.par_iter_mut().enumerate().for_each(|(i, v)| *v *= symbol(i));
                s
            })
            .collect();
        let mut out = self.fft.inverse_many(&specs).into_iter();
        f.map_scalar(|_| self.scalar(out.next().expect("component count")))
    }

    /// Solve `(I - c Δ) x = rhs` componentwise (`c ≥ 0`).
    pub fn shifted_solve<F: Field>(&self, rhs: &F, c: f64) -> F {
        self.check(rhs.grid());
        self.apply_symbol(rhs, |idx| 1.0 / (1.0 - c * self.lap[idx]))
    }

    /// Solve `(I - c Δ) x = rhs` and return `(x, Δx)` using one forward transform.
    pub fn shifted_solve_with_laplacian(&self, rhs: &VectorField, c: f64) -> (VectorField, VectorField) {
        self.check(rhs.grid());
        let specs = self.fft.forward_many(&[rhs.comp(0).data(), rhs.comp(1).data(), rhs.comp(2).data()]);
        let mut all = Vec::with_capacity(6);
        for s in &specs {
            all.push(s.iter().enumerate().map(|(i, v)| v / (1.0 - c * self.lap[i])).collect::<Vec<_>>());
        }
        for s in &specs {
            all.push(
                s.iter().enumerate().map(|(i, v)| v * (self.lap[i] / (1.0 - c * self.lap[i]))).collect::<Vec<_>>(),
            );
        }
        let mut out = self.fft.inverse_many(&all).into_iter().map(|d| self.scalar(d));
        let mut next = || out.next().expect("six components");
        let x = VectorField::from_components([next(), next(), next()]).expect("same grid");
        let lx = VectorField::from_components([next(), next(), next()]).expect("same grid");
        (x, lx)
    }

    /// Helmholtz split in spectral space: returns `(w, q)` with `v = w + ∇q`,
    /// `∇·w = 0` for this operator family and `q` of zero mean.
    fn split_spectra(&self, specs: &mut [Vec<Complex64>]) -> Vec<Complex64> {
        let mut q = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (idx, qv) in q.iter_mut().enumerate() {
            let k = [self.deriv[0][idx], self.deriv[1][idx], self.deriv[2][idx]];
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                continue;
            }
            let kv = specs[0][idx] * k[0] + specs[1][idx] * k[1] + specs[2][idx] * k[2];
            for a in 0..3 {
                specs[a][idx] -= kv * (k[a] / k2);
            }
            // ∇q = i k q̂ must equal k (k·v̂)/|k|².
            *qv = Complex64::new(kv.im, -kv.re) / k2;
        }
        q
    }

    pub fn helmholtz_split(&self, v: &VectorField) -> (VectorField, ScalarField) {
        self.check(v.grid());
        let mut specs = self.fft.forward_many(&[v.comp(0).data(), v.comp(1).data(), v.comp(2).data()]);
        let q = self.split_spectra(&mut specs);
        specs.push(q);
        let mut out = self.fft.inverse_many(&specs).into_iter().map(|d| self.scalar(d));
        let mut next = || out.next().expect("four components");
        let w = VectorField::from_components([next(), next(), next()]).expect("same grid");
        (w, next())
    }

    /// Orthogonal projection onto divergence-free fields.
    pub fn leray_project(&self, v: &VectorField) -> VectorField {
        self.helmholtz_split(v).0
    }

    /// Split `rhs = r + ∇q` and solve `(I - c Δ) w = r`, so that
    /// `(I - c Δ) w + ∇q = rhs` with `∇·w = 0`. Returns `(w, q)`.
    pub fn implicit_project(&self, rhs: &VectorField, c: f64) -> (VectorField, ScalarField) {
        self.check(rhs.grid());
        let mut specs = self.fft.forward_many(&[rhs.comp(0).data(), rhs.comp(1).data(), rhs.comp(2).data()]);
        let q = self.split_spectra(&mut specs);
        for s in specs.iter_mut() {
            s.par_iter_mut().enumerate().for_each(|(i, v)| *v /= 1.0 - c * self.lap[i]);
        }
        specs.push(q);
        let mut out = self.fft.inverse_many(&specs).into_iter().map(|d| self.scalar(d));
        let mut next = || out.next().expect("four components");
        let w = VectorField::from_components([next(), next(), next()]).expect("same grid");
        (w, next())
    }

    /// Zero-mean solution of `-ΔP = rhs`.
    pub fn poisson_solve(&self, rhs: &ScalarField) -> Result<ScalarField, FieldError> {
        self.check(rhs.grid());
        let mean = rhs.mean();
        let scale = rhs.max_abs();
        if mean.abs() > 1e-8 * scale {
            return Err(FieldError::NonZeroMean { mean, tolerance: 1e-8 * scale });
        }
        let mut spec = self.fft.forward(rhs.data());
        for (i, v) in spec.iter_mut().enumerate() {
            if self.lap[i] == 0.0 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v /= -self.lap[i];
            }
        }
        Ok(self.scalar(self.fft.inverse_real(spec)))
    }
}

/// Integral of a scalar field over the torus (rectangle rule).
pub fn integrate(f: &ScalarField) -> f64 {
    f.integrate()
}

/// `∫ f g` over the torus.
pub fn inner(f: &ScalarField, g: &ScalarField) -> Result<f64, FieldError> {
    check_grids(f.grid(), g.grid())?;
    f.inner(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{band_limited_scalar, band_limited_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid {
        Grid::cubic(n, 1.0).unwrap()
    }

    fn sine(g: Grid) -> ScalarField {
        ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin())
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
            let ops = Operators::new(grid(8), disc);
            let g = ops.gradient(&ScalarField::constant(grid(8), 3.5));
            assert!(g.max_abs() < 1e-12);
            let l = ops.laplacian(&ScalarField::constant(grid(8), 3.5));
            assert!(l.max_abs() < 1e-10);
            assert!(ops.divergence(&VectorField::constant(grid(8), [1.0, 2.0, 3.0])).max_abs() < 1e-12);
        }
    }

    #[test]
    fn spectral_derivative_of_sine_is_exact() {
        let g = grid(16);
        let ops = Operators::new(g, Discretization::Spectral);
        let grad = ops.gradient(&sine(g));
        let exact = ScalarField::from_fn(g, |x| 2.0 * PI * (2.0 * PI * x[0]).cos());
        assert!((grad.comp(0) - &exact).max_abs() < 1e-12);
        assert!(grad.comp(1).max_abs() < 1e-12);
        let div = ops.divergence(&grad);
        let lap_exact = sine(g).scaled(-(2.0 * PI).powi(2));
        assert!((&div - &lap_exact).max_abs() < 1e-10);
        assert!((&ops.laplacian(&sine(g)) - &lap_exact).max_abs() < 1e-10);
    }

    #[test]
    fn fd_gradient_is_second_order() {
        // Refinement study against the analytic derivative.
        let err = |n: usize| {
            let g = grid(n);
            let ops = Operators::new(g, Discretization::FiniteDifference);
            let d = ops.partial(&sine(g), 0);
            let exact = ScalarField::from_fn(g, |x| 2.0 * PI * (2.0 * PI * x[0]).cos());
            (&d - &exact).max_abs()
        };
        let ratio = err(16) / err(32);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        let ratio = err(32) / err(64);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn fd_laplacian_is_second_order() {
        let err = |n: usize| {
            let g = grid(n);
            let ops = Operators::new(g, Discretization::FiniteDifference);
            let exact = sine(g).scaled(-(2.0 * PI).powi(2));
            (&ops.laplacian(&sine(g)) - &exact).max_abs()
        };
        let ratio = err(16) / err(32);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn laplacian_equals_divergence_of_gradient_spectrally() {
        let g = grid(16);
        let ops = Operators::new(g, Discretization::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = band_limited_scalar(g, 4, 1.0, &mut rng);
        let a = ops.laplacian(&f);
        let b = ops.divergence(&ops.gradient(&f));
        assert!((&a - &b).max_abs() < 1e-12 * (1.0 + a.max_abs()));
    }

    #[test]
    fn leray_projection_properties() {
        let g = grid(16);
        for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
            let ops = Operators::new(g, disc);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let v = band_limited_vector(g, 6, 1.0, &mut rng);
            let w = ops.leray_project(&v);
            assert!(ops.divergence(&w).max_abs() < 1e-10, "{disc}");
            let ww = ops.leray_project(&w);
            assert!((&ww - &w).max_abs() < 1e-12);
            assert!(w.l2_norm() <= v.l2_norm() + 1e-12);
            let (mv, mw) = (v.mean(), w.mean());
            for a in 0..3 {
                assert!((mv[a] - mw[a]).abs() < 1e-12);
            }
            // Pure gradients are annihilated.
            let q = band_limited_scalar(g, 5, 1.0, &mut rng);
            let q = q.lin_comb(1.0, &ScalarField::constant(g, q.mean()), -1.0).unwrap();
            assert!(ops.leray_project(&ops.gradient(&q)).max_abs() < 1e-10);
        }
    }

    #[test]
    fn helmholtz_potential_reconstructs_gradient_part() {
        let g = grid(12);
        let ops = Operators::new(g, Discretization::Spectral);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = band_limited_vector(g, 4, 1.0, &mut rng);
        let (w, q) = ops.helmholtz_split(&v);
        let rebuilt = &w + &ops.gradient(&q);
        assert!((&rebuilt - &v).max_abs() < 1e-10);
        assert!(q.mean().abs() < 1e-14);
    }

    #[test]
    fn poisson_solve_cases() {
        let g = grid(16);
        let ops = Operators::new(g, Discretization::Spectral);
        let zero = ops.poisson_solve(&ScalarField::zeros(g)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let rhs = sine(g).scaled((2.0 * PI).powi(2));
        let p = ops.poisson_solve(&rhs).unwrap();
        assert!((&p - &sine(g)).max_abs() < 1e-12);
        assert!(matches!(
            ops.poisson_solve(&ScalarField::constant(g, 1.0)),
            Err(FieldError::NonZeroMean { .. })
        ));
        for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
            let ops = Operators::new(g, disc);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let r = band_limited_scalar(g, 8, 1.0, &mut rng);
            let r = r.lin_comb(1.0, &ScalarField::constant(g, r.mean()), -1.0).unwrap();
            let p = ops.poisson_solve(&r).unwrap();
            let resid = &ops.laplacian(&p) + &r;
            assert!(resid.max_abs() < 1e-10, "{disc}: {}", resid.max_abs());
        }
    }

    #[test]
    fn shifted_solve_inverts_operator() {
        let g = grid(8);
        for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
            let ops = Operators::new(g, disc);
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let f = band_limited_vector(g, 3, 1.0, &mut rng);
            let (x, lx) = ops.shifted_solve_with_laplacian(&f, 0.01);
            let back = &x - &ops.laplacian(&x).scaled(0.01);
            assert!((&back - &f).max_abs() < 1e-11);
            assert!((&lx - &ops.laplacian(&x)).max_abs() < 1e-9);
            let y: VectorField = ops.shifted_solve(&f, 0.01);
            assert!((&y - &x).max_abs() < 1e-13);
        }
    }

    #[test]
    fn implicit_project_solves_stokes_like_system() {
        let g = grid(8);
        for disc in [Discretization::Spectral, Discretization::FiniteDifference] {
            let ops = Operators::new(g, disc);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let f = band_limited_vector(g, 3, 1.0, &mut rng);
            let (w, q) = ops.implicit_project(&f, 0.05);
            assert!(ops.divergence(&w).max_abs() < 1e-10);
            let back = &(&w - &ops.laplacian(&w).scaled(0.05)) + &ops.gradient(&q);
            assert!((&back - &f).max_abs() < 1e-10);
            assert!(q.mean().abs() < 1e-14);
        }
    }
}
