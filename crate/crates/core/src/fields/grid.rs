use super::FieldError;

/// Periodic rectangular lattice. Index arithmetic wraps modulo `n` on every axis
/// and the storage order is row-major with x fastest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: [usize; 3],
    box_length: [f64; 3],
}

impl Grid {
    pub const MIN_POINTS: usize = 4;

    pub fn new(n: [usize; 3], box_length: [f64; 3]) -> Result<Self, FieldError> {
        for axis in 0..3 {
            if n[axis] < Self::MIN_POINTS {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {axis} has {} points, need at least {}",
                    n[axis],
                    Self::MIN_POINTS
                )));
            }
            if !(box_length[axis].is_finite() && box_length[axis] > 0.0) {
                return Err(FieldError::InvalidGrid(format!(
                    "axis {axis} box length {} must be positive",
                    box_length[axis]
                )));
            }
        }
        Ok(Self { n, box_length })
    }

    /// Same point count and side length on every axis.
    pub fn cubic(n: usize, length: f64) -> Result<Self, FieldError> {
        Self::new([n; 3], [length; 3])
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn box_length(&self) -> [f64; 3] {
        self.box_length
    }

    pub fn dx(&self) -> [f64; 3] {
        [
            self.box_length[0] / self.n[0] as f64,
            self.box_length[1] / self.n[1] as f64,
            self.box_length[2] / self.n[2] as f64,
        ]
    }

    pub fn min_dx(&self) -> f64 {
        let dx = self.dx();
        dx[0].min(dx[1]).min(dx[2])
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        let dx = self.dx();
        dx[0] * dx[1] * dx[2]
    }

    pub fn volume(&self) -> f64 {
        self.box_length.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    /// Index of a lattice point given possibly out-of-range (wrapped) coordinates.
    #[inline]
    pub fn index_wrapped(&self, i: isize, j: isize, k: isize) -> usize {
        let w = |v: isize, n: usize| v.rem_euclid(n as isize) as usize;
        self.index(w(i, self.n[0]), w(j, self.n[1]), w(k, self.n[2]))
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n[0];
        let rest = idx / self.n[0];
        [i, rest % self.n[1], rest / self.n[1]]
    }

    /// Physical position of a lattice point; the lattice starts at the origin.
    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        let dx = self.dx();
        [c[0] as f64 * dx[0], c[1] as f64 * dx[1], c[2] as f64 * dx[2]]
    }

    /// Minimum-image displacement `a - b` on the torus.
    #[inline]
    pub fn min_image(&self, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        let mut d = [0.0; 3];
        for axis in 0..3 {
            let l = self.box_length[axis];
            let mut v = (a[axis] - b[axis]) % l;
            if v > 0.5 * l {
                v -= l;
            } else if v < -0.5 * l {
                v += l;
            }
            d[axis] = v;
        }
        d
    }

    /// Lattice point closest to a physical position (wrapped).
    pub fn nearest_index(&self, x: [f64; 3]) -> usize {
        let dx = self.dx();
        let c: Vec<isize> = (0..3).map(|a| (x[a] / dx[a]).round() as isize).collect();
        self.index_wrapped(c[0], c[1], c[2])
    }
}
