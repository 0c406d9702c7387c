use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use super::Grid;

/// Complex 3-D FFT over the lattice, built from 1-D plans along each axis.
/// Forward transforms are unnormalized; inverse transforms divide by the
/// number of lattice points.
pub(crate) struct Fft3 {
    n: [usize; 3],
    fwd: [Arc<dyn Fft<f64>>; 3],
    inv: [Arc<dyn Fft<f64>>; 3],
    /// Lattice index of the wavevector `-k` for each `k`.
    neg: Vec<usize>,
}

impl Fft3 {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = [planner.plan_fft_forward(n[0]), planner.plan_fft_forward(n[1]), planner.plan_fft_forward(n[2])];
        let inv = [planner.plan_fft_inverse(n[0]), planner.plan_fft_inverse(n[1]), planner.plan_fft_inverse(n[2])];
        let neg = (0..grid.len())
            .map(|idx| {
                let c = grid.coords(idx);
                let m = |v: usize, n: usize| (n - v) % n;
                grid.index(m(c[0], n[0]), m(c[1], n[1]), m(c[2], n[2]))
            })
            .collect();
        Self { n, fwd, inv, neg }
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let [n0, n1, n2] = self.n;
        let plans = if inverse { &self.inv } else { &self.fwd };
        let plane = n0 * n1;

        // x: contiguous lines.
        buf.par_chunks_mut(plane).for_each(|p| {
            let mut scratch = vec![Complex64::new(0.0, 0.0); plans[0].get_inplace_scratch_len()];
            plans[0].process_with_scratch(p, &mut scratch);
        });

        // y: transpose each z-plane so lines become contiguous.
        buf.par_chunks_mut(plane).for_each(|p| {
            let mut tmp = vec![Complex64::new(0.0, 0.0); plane];
            for j in 0..n1 {
                for i in 0..n0 {
                    tmp[i * n1 + j] = p[i + n0 * j];
                }
            }
            let mut scratch = vec![Complex64::new(0.0, 0.0); plans[1].get_inplace_scratch_len()];
            plans[1].process_with_scratch(&mut tmp, &mut scratch);
            for j in 0..n1 {
                for i in 0..n0 {
                    p[i + n0 * j] = tmp[i * n1 + j];
                }
            }
        });

        // z: gather lines per y-row, transform, scatter back.
        let rows: Vec<Vec<Complex64>> = (0..n1)
            .into_par_iter()
            .map(|j| {
                let mut tmp = vec![Complex64::new(0.0, 0.0); n0 * n2];
                for k in 0..n2 {
                    let base = n0 * (j + n1 * k);
                    for i in 0..n0 {
                        tmp[i * n2 + k] = buf[base + i];
                    }
                }
                let mut scratch = vec![Complex64::new(0.0, 0.0); plans[2].get_inplace_scratch_len()];
                plans[2].process_with_scratch(&mut tmp, &mut scratch);
                tmp
            })
            .collect();
        for (j, tmp) in rows.iter().enumerate() {
            for k in 0..n2 {
                let base = n0 * (j + n1 * k);
                for i in 0..n0 {
                    buf[base + i] = tmp[i * n2 + k];
                }
            }
        }

        if inverse {
            let scale = 1.0 / (n0 * n1 * n2) as f64;
            buf.par_iter_mut().for_each(|v| *v *= scale);
        }
    }

    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        buf
    }

    /// Spectra of two real arrays from a single complex transform.
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        self.transform(&mut buf, false);
        let half = Complex64::new(0.5, 0.0);
        let minus_half_i = Complex64::new(0.0, -0.5);
        let sa = (0..buf.len()).map(|k| (buf[k] + buf[self.neg[k]].conj()) * half).collect();
        let sb = (0..buf.len()).map(|k| (buf[k] - buf[self.neg[k]].conj()) * minus_half_i).collect();
        (sa, sb)
    }

    /// Real part of the inverse transform. The spectrum must be Hermitian.
    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spec, true);
        spec.into_iter().map(|c| c.re).collect()
    }

    /// Inverse of two Hermitian spectra with one complex transform.
    pub fn inverse_pair(&self, a: &[Complex64], b: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let mut buf: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| x + i * y).collect();
        self.transform(&mut buf, true);
        let re = buf.iter().map(|c| c.re).collect();
        let im = buf.iter().map(|c| c.im).collect();
        (re, im)
    }

    /// Inverse-transform any number of Hermitian spectra, pairing them up.
    pub fn inverse_many(&self, specs: &[Vec<Complex64>]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(specs.len());
        let mut chunks = specs.chunks_exact(2);
        for pair in &mut chunks {
            let (a, b) = self.inverse_pair(&pair[0], &pair[1]);
            out.push(a);
            out.push(b);
        }
        if let [last] = chunks.remainder() {
            out.push(self.inverse_real(last.clone()));
        }
        out
    }

    /// Forward-transform any number of real arrays, pairing them up.
    pub fn forward_many(&self, data: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(data.len());
        let mut chunks = data.chunks_exact(2);
        for pair in &mut chunks {
            let (a, b) = self.forward_pair(pair[0], pair[1]);
            out.push(a);
            out.push(b);
        }
        if let [last] = chunks.remainder() {
            out.push(self.forward(last));
        }
        out
    }
}
