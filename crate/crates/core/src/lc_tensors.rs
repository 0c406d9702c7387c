//! Tensor algebra of the Ericksen–Leslie system: Ginzburg–Landau force and
//! potential, Leslie stress `S_α`, kinematic transport `T_α`, Ericksen stress,
//! and residual checks for the identities the energy laws rest on.
//!
//! Gradients follow the crate convention `(∇u)_{ij} = ∂_j u_i`. With it the
//! cancellation `S_α[h, d] : G = T_α[G, d] · h` holds pointwise for every
//! matrix `G`, not only for velocity gradients.

use thiserror::Error;

use crate::fields::{check_grids, FieldError, Operators, ScalarField, TensorField, VectorField};

pub type Mat3 = [[f64; 3]; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("alpha must lie in [0, 1], got {0}")]
    Alpha(f64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

/// Shape parameter and the three transport coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub alpha: f64,
    pub nu: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { alpha: 0.5, nu: 1.0, lambda: 1.0, gamma: 1.0 }
    }
}

impl ModelParams {
    pub fn new(alpha: f64, nu: f64, lambda: f64, gamma: f64) -> Result<Self, ParamError> {
        let p = Self { alpha, nu, lambda, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn with_alpha(alpha: f64) -> Result<Self, ParamError> {
        Self::new(alpha, 1.0, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ParamError::Alpha(self.alpha));
        }
        for (name, value) in [("nu", self.nu), ("lambda", self.lambda), ("gamma", self.gamma)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(ParamError::NonPositive { name, value });
            }
        }
        Ok(())
    }
}

// ---- pointwise kernels ----

#[inline]
pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn outer(a: [f64; 3], b: [f64; 3]) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = a[i] * b[j];
        }
    }
    m
}

/// `A w`, i.e. `Σ_j A_{ij} w_j`.
#[inline]
pub fn mat_vec(a: &Mat3, w: [f64; 3]) -> [f64; 3] {
    [dot(a[0], w), dot(a[1], w), dot(a[2], w)]
}

/// `Aᵀ w`, i.e. `Σ_i A_{ij} w_i`.
#[inline]
pub fn mat_t_vec(a: &Mat3, w: [f64; 3]) -> [f64; 3] {
    let mut r = [0.0; 3];
    for (i, row) in a.iter().enumerate() {
        for j in 0..3 {
            r[j] += row[j] * w[i];
        }
    }
    r
}

/// `A : B = Σ_{ij} A_{ij} B_{ij}`.
#[inline]
pub fn ddot(a: &Mat3, b: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

#[inline]
pub fn gl_force_at(d: [f64; 3]) -> [f64; 3] {
    let s = dot(d, d) - 1.0;
    [s * d[0], s * d[1], s * d[2]]
}

#[inline]
pub fn gl_potential_at(d: [f64; 3]) -> f64 {
    let s = 1.0 - dot(d, d);
    0.25 * s * s
}

/// `α h⊗d − (1−α) d⊗h`.
#[inline]
pub fn leslie_stress_at(h: [f64; 3], d: [f64; 3], alpha: f64) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = alpha * h[i] * d[j] - (1.0 - alpha) * d[i] * h[j];
        }
    }
    m
}

/// `α (G) d − (1−α) Gᵀ d`.
#[inline]
pub fn kinematic_transport_at(grad_u: &Mat3, d: [f64; 3], alpha: f64) -> [f64; 3] {
    let a = mat_vec(grad_u, d);
    let b = mat_t_vec(grad_u, d);
    [
        alpha * a[0] - (1.0 - alpha) * b[0],
        alpha * a[1] - (1.0 - alpha) * b[1],
        alpha * a[2] - (1.0 - alpha) * b[2],
    ]
}

/// `(∇d⊙∇d)_{ij} = Σ_k ∂_i d_k ∂_j d_k` from `G_{kj} = ∂_j d_k`, i.e. `GᵀG`.
#[inline]
pub fn ericksen_stress_at(grad_d: &Mat3) -> Mat3 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| grad_d[k][i] * grad_d[k][j]).sum();
        }
    }
    m
}

// ---- field-level operations ----

pub fn gl_force(d: &VectorField) -> VectorField {
    VectorField::from_index_fn(d.grid(), |i| gl_force_at(d.at(i)))
}

pub fn gl_potential(d: &VectorField) -> ScalarField {
    ScalarField::from_index_fn(d.grid(), |i| gl_potential_at(d.at(i)))
}

pub fn leslie_stress(h: &VectorField, d: &VectorField, alpha: f64) -> Result<TensorField, FieldError> {
    check_grids(h.grid(), d.grid())?;
    Ok(TensorField::from_index_fn(d.grid(), |i| leslie_stress_at(h.at(i), d.at(i), alpha)))
}

pub fn kinematic_transport(grad_u: &TensorField, d: &VectorField, alpha: f64) -> Result<VectorField, FieldError> {
    check_grids(grad_u.grid(), d.grid())?;
    Ok(VectorField::from_index_fn(d.grid(), |i| kinematic_transport_at(&grad_u.at(i), d.at(i), alpha)))
}

pub fn ericksen_stress_from_gradient(grad_d: &TensorField) -> TensorField {
    TensorField::from_index_fn(grad_d.grid(), |i| ericksen_stress_at(&grad_d.at(i)))
}

pub fn ericksen_stress(ops: &Operators, d: &VectorField) -> TensorField {
    ericksen_stress_from_gradient(&ops.vector_gradient(d))
}

/// `max_x |S_α[h,d] : G − T_α[G,d] · h|`. `G` may be any tensor field.
pub fn check_cancellation(
    h: &VectorField,
    d: &VectorField,
    grad_u: &TensorField,
    alpha: f64,
) -> Result<f64, FieldError> {
    check_grids(h.grid(), d.grid())?;
    check_grids(h.grid(), grad_u.grid())?;
    Ok((0..h.grid().len())
        .map(|i| {
            let g = grad_u.at(i);
            let (hv, dv) = (h.at(i), d.at(i));
            let lhs = ddot(&leslie_stress_at(hv, dv, alpha), &g);
            let rhs = dot(kinematic_transport_at(&g, dv, alpha), hv);
            (lhs - rhs).abs()
        })
        .fold(0.0, f64::max))
}

/// Sup-norm residuals of `∇·(∇d⊙∇d) = ∇d·Δd + ∇(½|∇d|²)` and of the chain
/// rule `∇F(d) = ∇d·f(d)`, each assembled from the operator toolbox.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressDivergenceResidual {
    pub ericksen: f64,
    pub chain_rule: f64,
}

pub fn check_stress_divergence_identity(ops: &Operators, d: &VectorField) -> StressDivergenceResidual {
    let grad_d = ops.vector_gradient(d);
    let lap_d = ops.laplacian(d);
    let lhs = ops.tensor_divergence(&ericksen_stress_from_gradient(&grad_d));
    let half_sq = ScalarField::from_index_fn(d.grid(), |i| {
        let g = grad_d.at(i);
        0.5 * ddot(&g, &g)
    });
    let grad_half_sq = ops.gradient(&half_sq);
    let rhs = VectorField::from_index_fn(d.grid(), |i| {
        let a = mat_t_vec(&grad_d.at(i), lap_d.at(i));
        let b = grad_half_sq.at(i);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    });
    let ericksen = (&lhs - &rhs).max_abs();

    let grad_f = ops.gradient(&gl_potential(d));
    let chain = VectorField::from_index_fn(d.grid(), |i| mat_t_vec(&grad_d.at(i), gl_force_at(d.at(i))));
    let chain_rule = (&grad_f - &chain).max_abs();
    StressDivergenceResidual { ericksen, chain_rule }
}

/// Both sides of
/// `∫|Δd−f(d)|² = ∫(|Δd|² + |f|² − 2|∇d|² + 2|∇d|²|d|² + 4|(∇d)ᵀd|²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansionResidual {
    pub lhs: f64,
    pub rhs: f64,
}

impl ExpansionResidual {
    pub fn absolute(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    /// `|LHS − RHS| / (1 + |LHS|)`.
    pub fn relative(&self) -> f64 {
        self.absolute() / (1.0 + self.lhs.abs())
    }
}

pub fn delta_expansion_residual(ops: &Operators, d: &VectorField) -> ExpansionResidual {
    let grad_d = ops.vector_gradient(d);
    let lap_d = ops.laplacian(d);
    let g = d.grid();
    let lhs = ScalarField::from_index_fn(g, |i| {
        let f = gl_force_at(d.at(i));
        let l = lap_d.at(i);
        let r = [l[0] - f[0], l[1] - f[1], l[2] - f[2]];
        dot(r, r)
    })
    .integrate();
    let rhs = ScalarField::from_index_fn(g, |i| {
        let dv = d.at(i);
        let f = gl_force_at(dv);
        let l = lap_d.at(i);
        let gd = grad_d.at(i);
        let grad_sq = ddot(&gd, &gd);
        let gtd = mat_t_vec(&gd, dv);
        dot(l, l) + dot(f, f) - 2.0 * grad_sq + 2.0 * grad_sq * dot(dv, dv) + 4.0 * dot(gtd, gtd)
    })
    .integrate();
    ExpansionResidual { lhs, rhs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Discretization, Grid};
    use std::f64::consts::PI;

    #[test]
    fn gl_force_and_potential_values() {
        assert_eq!(gl_force_at([0.0; 3]), [0.0; 3]);
        assert_eq!(gl_force_at([1.0, 0.0, 0.0]), [0.0; 3]);
        assert_eq!(gl_force_at([2.0, 0.0, 0.0]), [6.0, 0.0, 0.0]);
        assert_eq!(gl_potential_at([0.0; 3]), 0.25);
        assert_eq!(gl_potential_at([0.0, 0.6, 0.8]), 0.0);
        assert_eq!(gl_potential_at([2.0, 0.0, 0.0]), 2.25);
    }

    #[test]
    fn leslie_stress_examples() {
        let h = [1.0, 0.0, 0.0];
        let d = [0.0, 1.0, 0.0];
        let s = leslie_stress_at(h, d, 1.0);
        let mut expected = [[0.0; 3]; 3];
        expected[0][1] = 1.0;
        assert_eq!(s, expected);
        let s = leslie_stress_at(h, d, 0.0);
        let mut expected = [[0.0; 3]; 3];
        expected[1][0] = -1.0;
        assert_eq!(s, expected);
        let v = [0.3, -1.2, 2.0];
        assert_eq!(leslie_stress_at(v, v, 0.5), [[0.0; 3]; 3]);
    }

    #[test]
    fn kinematic_transport_examples() {
        let mut g = [[0.0; 3]; 3];
        g[0][1] = 1.0;
        let d = [0.0, 1.0, 0.0];
        assert_eq!(kinematic_transport_at(&g, d, 1.0), [1.0, 0.0, 0.0]);
        assert_eq!(kinematic_transport_at(&g, d, 0.0), [0.0, 0.0, 0.0]);
        assert_eq!(kinematic_transport_at(&g, d, 0.5), [0.5, 0.0, 0.0]);
    }

    #[test]
    fn cancellation_direct_evaluation() {
        // S:G = α and T·h = α for this triple.
        let mut g = [[0.0; 3]; 3];
        g[0][1] = 1.0;
        let (h, d) = ([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]);
        for alpha in [0.0, 0.3, 1.0] {
            assert_eq!(ddot(&leslie_stress_at(h, d, alpha), &g), alpha);
            assert_eq!(dot(kinematic_transport_at(&g, d, alpha), h), alpha);
        }
    }

    #[test]
    fn ericksen_stress_of_single_partial() {
        let grid = Grid::cubic(16, 1.0).unwrap();
        let ops = Operators::new(grid, Discretization::Spectral);
        let d = VectorField::from_fn(grid, |x| [(2.0 * PI * x[0]).sin(), 0.0, 0.0]);
        let e = ericksen_stress(&ops, &d);
        let expected = ScalarField::from_fn(grid, |x| (2.0 * PI).powi(2) * (2.0 * PI * x[0]).cos().powi(2));
        assert!((e.comp(0, 0) - &expected).max_abs() < 1e-10);
        for (i, j) in [(0, 1), (1, 1), (2, 2), (1, 2)] {
            assert!(e.comp(i, j).max_abs() < 1e-10);
        }
        let e0 = ericksen_stress(&ops, &VectorField::constant(grid, [0.2, 0.4, 1.0]));
        assert!(e0.max_abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.2, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, -1.0, 1.0).is_err());
        assert!(ModelParams::new(0.0, 0.3, 2.0, 0.7).is_ok());
    }

    #[test]
    fn expansion_identity_trivial_directors() {
        let grid = Grid::cubic(8, 1.0).unwrap();
        let ops = Operators::new(grid, Discretization::Spectral);
        for d in [VectorField::constant(grid, [0.0, 0.0, 1.0]), VectorField::zeros(grid)] {
            let r = delta_expansion_residual(&ops, &d);
            assert!(r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14);
        }
    }
}
