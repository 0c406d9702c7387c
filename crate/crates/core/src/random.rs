//! Seeded band-limited random fields for tests, presets and the identity suite.

use std::f64::consts::PI;

use rand::Rng;

use crate::fields::{Grid, ScalarField, VectorField};

/// Random trigonometric polynomial with integer wavenumbers `|m_a| ≤ kmax`
/// on every axis. Each mode gets a uniform amplitude in `[-amp, amp]` and a
/// uniform phase. Wavenumbers stay well below Nyquist when `kmax < n/2`.
pub fn band_limited_scalar<R: Rng>(grid: Grid, kmax: i32, amp: f64, rng: &mut R) -> ScalarField {
    let l = grid.box_length();
    let mut modes: Vec<([f64; 3], f64, f64)> = Vec::new();
    for a in -kmax..=kmax {
        for b in -kmax..=kmax {
            for c in 0..=kmax {
                // Half-space of wavevectors; the other half is the conjugate.
                if c == 0 && (b < 0 || (b == 0 && a < 0)) {
                    continue;
                }
                let k = [2.0 * PI * a as f64 / l[0], 2.0 * PI * b as f64 / l[1], 2.0 * PI * c as f64 / l[2]];
                let amplitude = rng.gen_range(-amp..=amp);
                let phase = rng.gen_range(0.0..2.0 * PI);
                modes.push((k, amplitude, phase));
            }
        }
    }
    let norm = 1.0 / (modes.len() as f64).sqrt();
    ScalarField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(k, a, p)| a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + p).cos())
            .sum::<f64>()
            * norm
    })
}

pub fn band_limited_vector<R: Rng>(grid: Grid, kmax: i32, amp: f64, rng: &mut R) -> VectorField {
    let a = band_limited_scalar(grid, kmax, amp, rng);
    let b = band_limited_scalar(grid, kmax, amp, rng);
    let c = band_limited_scalar(grid, kmax, amp, rng);
    VectorField::from_components([a, b, c]).expect("same grid")
}
