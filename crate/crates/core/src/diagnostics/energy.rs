use crate::fields::{det_sum_many, Operators, ScalarField};
use crate::lc_tensors::{ddot, dot, ericksen_stress_at, gl_force_at, gl_potential_at, kinematic_transport_at, leslie_stress_at, mat_t_vec, mat_vec};
use crate::solver::{SimState, Trapezoid};

/// Instantaneous energies and dissipation integrals of one state. The raw
/// integrals are unweighted; `total` and `dissipation_rate` apply `ν, λ, γ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    /// `∫ ½|u|²`
    pub kinetic: f64,
    /// `∫ ½|∇d|²`
    pub elastic: f64,
    /// `∫ F(d)`
    pub potential: f64,
    /// `∫ |∇u|²`
    pub dissipation_visc: f64,
    /// `∫ |Δd − f(d)|²`
    pub dissipation_dir: f64,
    /// `kinetic + λ (elastic + potential)`
    pub total: f64,
    /// Running `Σ D·Δt`, zero for an isolated report.
    pub cumulative_dissipation: f64,
    /// `E(0) − E(t) − Σ D·Δt`, zero for an isolated report.
    pub slack: f64,
}

impl EnergyReport {
    /// `ν ∫|∇u|² + λγ ∫|Δd − f(d)|²`.
    pub fn dissipation_rate(&self, nu: f64, lambda: f64, gamma: f64) -> f64 {
        nu * self.dissipation_visc + lambda * gamma * self.dissipation_dir
    }
}

pub fn global_energy(ops: &Operators, s: &SimState) -> EnergyReport {
    let g = s.grid();
    let gu = ops.vector_gradient(&s.u);
    let gd = ops.vector_gradient(&s.d);
    let lap = ops.laplacian(&s.d);
    let cell = g.cell_volume();
    let [k2, g2, potential, v2, h2] = det_sum_many(g.len(), |i| {
        let u = s.u.at(i);
        let d = s.d.at(i);
        let (m, w) = (gd.at(i), gu.at(i));
        let (l, f) = (lap.at(i), gl_force_at(d));
        let h = [l[0] - f[0], l[1] - f[1], l[2] - f[2]];
        [dot(u, u), ddot(&m, &m), gl_potential_at(d), ddot(&w, &w), dot(h, h)]
    })
    .map(|v| v * cell);
    let (kinetic, elastic, dissipation_visc, dissipation_dir) = (0.5 * k2, 0.5 * g2, v2, h2);
    EnergyReport {
        t: s.t,
        kinetic,
        elastic,
        potential,
        dissipation_visc,
        dissipation_dir,
        total: kinetic + s.params.lambda * (elastic + potential),
        cumulative_dissipation: 0.0,
        slack: 0.0,
    }
}

/// Streaming check of `E(t) + ∫₀ᵗ D ≤ E(0)`. The dissipation of each step is
/// taken at its new time level, matching the implicit treatment of the
/// Laplacians.
#[derive(Clone, Debug, Default)]
pub struct EnergyAudit {
    e0: Option<f64>,
    last_t: f64,
    cumulative: f64,
    pub reports: Vec<EnergyReport>,
}

impl EnergyAudit {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, ops: &Operators, s: &SimState) -> EnergyReport {
        let mut r = global_energy(ops, s);
        match self.e0 {
            None => self.e0 = Some(r.total),
            Some(_) => {
                let p = s.params;
                self.cumulative += r.dissipation_rate(p.nu, p.lambda, p.gamma) * (s.t - self.last_t);
            }
        }
        self.last_t = s.t;
        r.cumulative_dissipation = self.cumulative;
        r.slack = self.e0.unwrap_or(r.total) - r.total - self.cumulative;
        self.reports.push(r);
        r
    }

    /// Largest `max(0, −slack)` seen so far.
    pub fn max_negative_slack(&self) -> f64 {
        self.reports.iter().map(|r| (-r.slack).max(0.0)).fold(0.0, f64::max)
    }

    /// Reports whose slack is below `-tol`.
    pub fn violations(&self, tol: f64) -> Vec<&EnergyReport> {
        self.reports.iter().filter(|r| r.slack < -tol).collect()
    }
}

pub fn energy_inequality_audit(ops: &Operators, trajectory: &[SimState]) -> EnergyAudit {
    let mut audit = EnergyAudit::new();
    for s in trajectory {
        audit.push(ops, s);
    }
    audit
}

/// Non-negative scalar test function on space-time.
pub trait ScalarTestFn: Sync {
    fn value(&self, x: [f64; 3], t: f64) -> f64;

    fn time_derivative(&self, x: [f64; 3], t: f64) -> f64 {
        let h = 1e-5;
        (self.value(x, t + h) - self.value(x, t - h)) / (2.0 * h)
    }

    /// Closed interval outside which the function vanishes identically.
    fn time_support(&self) -> (f64, f64);
}

/// `b(|x − c|/R) · b((2t − t₀ − t₁)/(t₁ − t₀))` with the periodic
/// minimum-image distance.
#[derive(Clone, Copy, Debug)]
pub struct SpaceTimeBump {
    pub grid: crate::fields::Grid,
    pub center: [f64; 3],
    pub radius: f64,
    pub t0: f64,
    pub t1: f64,
}

impl SpaceTimeBump {
    fn time_factor(&self, t: f64) -> f64 {
        crate::mollifier::bump((2.0 * t - self.t0 - self.t1) / (self.t1 - self.t0))
    }
}

impl ScalarTestFn for SpaceTimeBump {
    fn value(&self, x: [f64; 3], t: f64) -> f64 {
        let y = self.grid.min_image(x, self.center);
        let r = dot(y, y).sqrt() / self.radius;
        crate::mollifier::bump(r) * self.time_factor(t)
    }

    fn time_derivative(&self, x: [f64; 3], t: f64) -> f64 {
        let s = (2.0 * t - self.t0 - self.t1) / (self.t1 - self.t0);
        if s.abs() >= 1.0 {
            return 0.0;
        }
        let ds = 2.0 / (self.t1 - self.t0);
        // d/ds exp(−1/(1−s²)) = −2s/(1−s²)² · b(s)
        let db = -2.0 * s / (1.0 - s * s).powi(2) * crate::mollifier::bump(s);
        let y = self.grid.min_image(x, self.center);
        crate::mollifier::bump(dot(y, y).sqrt() / self.radius) * db * ds
    }

    fn time_support(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }
}

pub const LOCAL_TERM_NAMES: [&str; 13] = [
    "kinetic_time",
    "elastic_time",
    "potential_time",
    "kinetic_diffusion",
    "elastic_diffusion",
    "kinetic_flux",
    "pressure_flux",
    "ericksen_flux",
    "ericksen_hessian",
    "leslie_flux",
    "transport_flux",
    "gl_flux",
    "gl_gradient",
];

/// Space-time integrals of the local energy balance tested against `φ ≥ 0`:
///
/// ```text
/// ∫E φ |_{t_end} + ∫∫ (ν|∇u|² + λγ(|Δd|² + |f|²)) φ
///   = ∫E φ |_{t_start} + Σ terms
/// ```
///
/// with `E = ½|u|² + λ(½|∇d|² + F(d))`. For smooth solutions the two sides
/// agree, so `slack = RHS − LHS` measures discretization error.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalEnergyReport {
    pub terms: [(&'static str, f64); 13],
    pub energy_end: f64,
    pub energy_start: f64,
    pub dissipation: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LocalAuditError {
    #[error("test function support [{from}, {to}] is not inside the trajectory window [{start}, {end}]")]
    Support { from: f64, to: f64, start: f64, end: f64 },
    #[error("test function takes negative value {0}")]
    Negative(f64),
    #[error("empty trajectory")]
    Empty,
}

/// Streaming local energy audit; push states in time order.
pub struct LocalEnergyAudit<'a> {
    ops: &'a Operators,
    phi: &'a dyn ScalarTestFn,
    terms: [Trapezoid; 13],
    dissipation: Trapezoid,
    first: Option<(f64, f64)>,
    last: Option<(f64, f64)>,
    min_phi: f64,
}

impl<'a> LocalEnergyAudit<'a> {
    pub fn new(ops: &'a Operators, phi: &'a dyn ScalarTestFn) -> Self {
        Self {
            ops,
            phi,
            terms: Default::default(),
            dissipation: Trapezoid::default(),
            first: None,
            last: None,
            min_phi: 0.0,
        }
    }

    pub fn push(&mut self, s: &SimState) {
        let ops = self.ops;
        let g = s.grid();
        let t = s.t;
        let p = s.params;
        let (nu, lam, gam, alpha) = (p.nu, p.lambda, p.gamma, p.alpha);
        let phi = ScalarField::from_index_fn(g, |i| self.phi.value(g.position(i), t));
        self.min_phi = self.min_phi.min(phi.data().iter().copied().fold(0.0, f64::min));
        let phi_t = ScalarField::from_index_fn(g, |i| self.phi.time_derivative(g.position(i), t));
        let gphi = ops.gradient(&phi);
        let hphi = ops.vector_gradient(&gphi);
        let lphi = ops.laplacian(&phi);
        let gu = ops.vector_gradient(&s.u);
        let gd = ops.vector_gradient(&s.d);
        let lap = ops.laplacian(&s.d);
        let cell = g.cell_volume();

        let per_point = |i: usize| -> [f64; 15] {
            let u = s.u.at(i);
            let d = s.d.at(i);
            let gdi = gd.at(i);
            let gui = gu.at(i);
            let l = lap.at(i);
            let f = gl_force_at(d);
            let h = [l[0] - f[0], l[1] - f[1], l[2] - f[2]];
            let ph = phi.data()[i];
            let pt = phi_t.data()[i];
            let gp = gphi.at(i);
            let hp = hphi.at(i);
            let lp = lphi.data()[i];
            let u2 = 0.5 * dot(u, u);
            let gd2 = ddot(&gdi, &gdi);
            let fpot = gl_potential_at(d);
            let ud = dot(u, gp);
            let e = ericksen_stress_at(&gdi);
            let sa = leslie_stress_at(h, d, alpha);
            let tr = kinematic_transport_at(&gui, d, alpha);
            // (∇φ·∇d)_i = Σ_j ∂_jφ ∂_j d_i
            let pd = mat_vec(&gdi, gp);
            let mut e_flux = 0.0;
            let mut s_flux = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    e_flux += e[a][b] * u[a] * gp[b];
                    s_flux += sa[a][b] * u[a] * gp[b];
                }
            }
            let mut hess = ddot(&e, &hp);
            hess -= gd2 * (hp[0][0] + hp[1][1] + hp[2][2]);
            let gtd = mat_t_vec(&gdi, d);
            let grad_f_grad_d = 2.0 * dot(gtd, gtd) + (dot(d, d) - 1.0) * gd2;
            let energy = u2 + lam * (0.5 * gd2 + fpot);
            [
                u2 * pt,
                lam * 0.5 * gd2 * pt,
                lam * fpot * pt,
                nu * u2 * lp,
                lam * gam * 0.5 * gd2 * lp,
                u2 * ud,
                s.p.data()[i] * ud,
                lam * e_flux,
                lam * gam * hess,
                lam * s_flux,
                -lam * dot(tr, pd),
                -lam * gam * dot(pd, f),
                -2.0 * lam * gam * grad_f_grad_d * ph,
                (nu * ddot(&gui, &gui) + lam * gam * (dot(l, l) + dot(f, f))) * ph,
                energy * ph,
            ]
        };
        let sums = det_sum_many(g.len(), per_point).map(|v| v * cell);
        for k in 0..13 {
            self.terms[k].push(t, sums[k]);
        }
        self.dissipation.push(t, sums[13]);
        if self.first.is_none() {
            self.first = Some((t, sums[14]));
        }
        self.last = Some((t, sums[14]));
    }

    pub fn finish(self) -> Result<LocalEnergyReport, LocalAuditError> {
        let (first, last) = match (self.first, self.last) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(LocalAuditError::Empty),
        };
        let (from, to) = self.phi.time_support();
        if from < first.0 - 1e-12 || to > last.0 + 1e-12 {
            return Err(LocalAuditError::Support { from, to, start: first.0, end: last.0 });
        }
        if self.min_phi < 0.0 {
            return Err(LocalAuditError::Negative(self.min_phi));
        }
        let mut terms = [("", 0.0); 13];
        for k in 0..13 {
            terms[k] = (LOCAL_TERM_NAMES[k], self.terms[k].value());
        }
        let dissipation = self.dissipation.value();
        let lhs = last.1 + dissipation;
        let rhs = first.1 + terms.iter().map(|t| t.1).sum::<f64>();
        Ok(LocalEnergyReport {
            terms,
            energy_end: last.1,
            energy_start: first.1,
            dissipation,
            lhs,
            rhs,
            slack: rhs - lhs,
        })
    }
}

pub fn local_energy_audit(
    ops: &Operators,
    trajectory: &[SimState],
    phi: &dyn ScalarTestFn,
) -> Result<LocalEnergyReport, LocalAuditError> {
    let mut audit = LocalEnergyAudit::new(ops, phi);
    for s in trajectory {
        audit.push(s);
    }
    audit.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{Discretization, Grid, VectorField};
    use crate::lc_tensors::ModelParams;
    use std::f64::consts::PI;

    #[test]
    fn closed_form_energies() {
        let g = Grid::cubic(16, 1.0).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let mut s = SimState::zeros(g, ModelParams::default());
        s.d = VectorField::constant(g, [0.0, 0.0, 1.0]);
        assert_eq!(global_energy(&ops, &s).total, 0.0);

        let z = SimState::zeros(g, ModelParams::default());
        assert!((global_energy(&ops, &z).total - 0.25).abs() < 1e-14);

        s.u = VectorField::from_fn(g, |x| [(2.0 * PI * x[1]).sin(), 0.0, 0.0]);
        let r = global_energy(&ops, &s);
        assert!((r.kinetic - 0.25).abs() < 1e-13);
        assert!((r.dissipation_visc - (2.0 * PI).powi(2) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn audit_of_trivial_trajectories() {
        let g = Grid::cubic(8, 1.0).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let mut traj: Vec<SimState> = (0..5)
            .map(|n| SimState { t: n as f64 * 0.1, ..SimState::zeros(g, ModelParams::default()) })
            .collect();
        let a = energy_inequality_audit(&ops, &traj);
        assert!(a.reports.iter().all(|r| r.slack == 0.0));
        for s in &mut traj {
            s.d = VectorField::constant(g, [1.0, 0.0, 0.0]);
        }
        let a = energy_inequality_audit(&ops, &traj);
        assert!(a.reports.iter().all(|r| r.slack == 0.0 && r.total == 0.0));
    }

    #[test]
    fn local_audit_trivial_trajectories() {
        let g = Grid::cubic(16, 2.0 * PI).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let phi = SpaceTimeBump { grid: g, center: [PI; 3], radius: 2.0, t0: 0.05, t1: 0.35 };
        let mut traj: Vec<SimState> = (0..=40)
            .map(|n| SimState { t: n as f64 * 0.01, ..SimState::zeros(g, ModelParams::default()) })
            .collect();
        for s in &mut traj {
            s.d = VectorField::constant(g, [0.0, 1.0, 0.0]);
        }
        let r = local_energy_audit(&ops, &traj, &phi).unwrap();
        assert!(r.terms.iter().all(|t| t.1 == 0.0));
        assert_eq!(r.slack, 0.0);
        assert!(local_energy_audit(&ops, &traj[..20], &phi).is_err());
    }

    #[test]
    fn bump_time_derivative_matches_difference() {
        let g = Grid::cubic(8, 1.0).unwrap();
        let b = SpaceTimeBump { grid: g, center: [0.5; 3], radius: 0.4, t0: 0.0, t1: 1.0 };
        let x = [0.45, 0.6, 0.5];
        for t in [0.2, 0.5, 0.77] {
            let h = 1e-6;
            let fd = (b.value(x, t + h) - b.value(x, t - h)) / (2.0 * h);
            assert!((fd - b.time_derivative(x, t)).abs() < 1e-7);
        }
    }
}
