//! Initial conditions: named presets, Fourier-mode lists and synthetic
//! singular directors.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diagnostics::global_energy;
use crate::fields::{Grid, Operators, ScalarField, VectorField};
use crate::lc_tensors::ModelParams;
use crate::random::{band_limited_scalar, band_limited_vector};
use crate::solver::SimState;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InitialError {
    #[error("unknown preset \"{0}\"")]
    UnknownPreset(String),
    #[error("mode component must be 0, 1 or 2, got {0}")]
    Component(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Zero,
    EquilibriumUnitDirector,
    SmallSmooth,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Zero, Preset::EquilibriumUnitDirector, Preset::SmallSmooth];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::EquilibriumUnitDirector => "equilibrium-unit-director",
            Preset::SmallSmooth => "small-smooth",
        }
    }
}

impl FromStr for Preset {
    type Err = InitialError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| InitialError::UnknownPreset(s.to_string()))
    }
}

/// `amplitude · cos(2π k·x / L + phase)` added to one component.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierMode {
    pub component: usize,
    pub k: [i32; 3],
    pub amplitude: f64,
    pub phase: f64,
}

/// Sum of `base` and the listed modes.
pub fn fourier_field(grid: Grid, base: [f64; 3], modes: &[FourierMode]) -> Result<VectorField, InitialError> {
    if let Some(m) = modes.iter().find(|m| m.component > 2) {
        return Err(InitialError::Component(m.component));
    }
    let l = grid.box_length();
    Ok(VectorField::from_fn(grid, |x| {
        let mut v = base;
        for m in modes {
            let arg: f64 = (0..3).map(|a| 2.0 * PI * m.k[a] as f64 * x[a] / l[a]).sum();
            v[m.component] += m.amplitude * (arg + m.phase).cos();
        }
        v
    }))
}

/// Kinetic energy of the small-smooth preset.
pub const SMALL_SMOOTH_KINETIC: f64 = 4e-3;
/// Director energy `λ(∫½|∇d|² + F(d))` of the small-smooth preset.
pub const SMALL_SMOOTH_DIRECTOR: f64 = 4e-3;

pub fn preset_state(ops: &Operators, preset: Preset, params: ModelParams, seed: u64) -> SimState {
    let g = ops.grid();
    match preset {
        Preset::Zero => SimState::zeros(g, params),
        Preset::EquilibriumUnitDirector => {
            SimState { d: VectorField::constant(g, [0.0, 0.0, 1.0]), ..SimState::zeros(g, params) }
        }
        Preset::SmallSmooth => small_smooth(ops, params, seed),
    }
}

/// Divergence-free band-limited velocity and a perturbed `e_z` director,
/// scaled to fixed kinetic and director energies (total `8·10⁻³`).
pub fn small_smooth(ops: &Operators, params: ModelParams, seed: u64) -> SimState {
    let g = ops.grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = ops.leray_project(&band_limited_vector(g, 2, 1.0, &mut rng));
    let ke = 0.5 * u.inner(&u).expect("same grid");
    let u = u.scaled((SMALL_SMOOTH_KINETIC / ke).sqrt());
    let delta = band_limited_vector(g, 2, 1.0, &mut rng);
    let director = |s: f64| {
        VectorField::from_index_fn(g, |i| {
            let e = delta.at(i);
            [s * e[0], s * e[1], 1.0 + s * e[2]]
        })
    };
    let director_energy = |d: &VectorField| {
        let r = global_energy(ops, &SimState { d: d.clone(), ..SimState::zeros(g, params) });
        params.lambda * (r.elastic + r.potential)
    };
    // Nearly quadratic in s for small s: a few secant-free rescalings converge.
    let mut s = 0.1;
    for _ in 0..8 {
        let e = director_energy(&director(s));
        s *= (SMALL_SMOOTH_DIRECTOR / e).sqrt();
    }
    SimState { u, d: director(s), p: ScalarField::zeros(g), t: 0.0, params }
}

/// `e_z` plus a small band-limited perturbation of amplitude `eps`.
pub fn perturbed_equilibrium(grid: Grid, params: ModelParams, eps: f64, seed: u64) -> SimState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = [
        band_limited_scalar(grid, 1, 1.0, &mut rng),
        band_limited_scalar(grid, 1, 1.0, &mut rng),
        band_limited_scalar(grid, 1, 1.0, &mut rng),
    ];
    let scale = eps / p.iter().map(|f| f.max_abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let d = VectorField::from_index_fn(grid, |i| {
        [scale * p[0].data()[i], scale * p[1].data()[i], 1.0 + scale * p[2].data()[i]]
    });
    SimState { d, ..SimState::zeros(grid, params) }
}

/// Hedgehog `d = y/|y|` about `center` (minimum image) inside `cutoff/2`,
/// blended smoothly into `e_z` by `|y| = cutoff`. `|∇d| ~ √2/|y|` near the
/// center; zero at the center itself.
pub fn hedgehog(grid: Grid, center: [f64; 3], cutoff: f64) -> VectorField {
    let psi = |a: f64| if a > 0.0 { (-1.0 / a).exp() } else { 0.0 };
    let chi = |rho: f64| {
        let a = 2.0 * (1.0 - rho / cutoff);
        psi(a) / (psi(a) + psi(1.0 - a))
    };
    VectorField::from_index_fn(grid, |i| {
        let y = grid.min_image(grid.position(i), center);
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        if r == 0.0 {
            return [0.0; 3];
        }
        let c = chi(r);
        [c * y[0] / r, c * y[1] / r, c * y[2] / r + (1.0 - c)]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Discretization;

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert_eq!("smooth".parse::<Preset>(), Err(InitialError::UnknownPreset("smooth".into())));
    }

    #[test]
    fn small_smooth_hits_energy_targets() {
        let g = Grid::cubic(32, 2.0 * PI).unwrap();
        let ops = Operators::new(g, Discretization::Spectral);
        let s = small_smooth(&ops, ModelParams::default(), 7);
        let e = global_energy(&ops, &s);
        assert!((e.kinetic - SMALL_SMOOTH_KINETIC).abs() < 1e-12);
        assert!((e.elastic + e.potential - SMALL_SMOOTH_DIRECTOR).abs() < 1e-6);
        assert!(e.total <= 1e-2);
        assert!(ops.divergence(&s.u).max_abs() < 1e-10);
        let again = small_smooth(&ops, ModelParams::default(), 7);
        assert_eq!(s.u.comp(0).data(), again.u.comp(0).data());
        assert_eq!(s.d.comp(2).data(), again.d.comp(2).data());
    }

    #[test]
    fn fourier_modes_sample_cosines() {
        let g = Grid::cubic(8, 2.0).unwrap();
        let m = FourierMode { component: 1, k: [1, 0, 0], amplitude: 0.5, phase: 0.0 };
        let f = fourier_field(g, [0.0, 0.0, 1.0], &[m]).unwrap();
        for i in 0..g.len() {
            let x = g.position(i);
            assert!((f.at(i)[1] - 0.5 * (PI * x[0]).cos()).abs() < 1e-15);
            assert_eq!(f.at(i)[2], 1.0);
        }
        assert!(fourier_field(g, [0.0; 3], &[FourierMode { component: 3, ..m }]).is_err());
    }

    #[test]
    fn hedgehog_is_unit_away_from_center() {
        let g = Grid::cubic(8, 1.0).unwrap();
        let c = g.position(g.index(4, 4, 4));
        let h = hedgehog(g, c, 0.4);
        assert_eq!(h.at(g.index(4, 4, 4)), [0.0; 3]);
        let v = h.at(g.index(5, 4, 4));
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert_eq!(h.at(g.index(0, 4, 4)), [0.0, 0.0, 1.0]);
    }
}
