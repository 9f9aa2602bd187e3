use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform cell-centred mesh on `[-L, L] × [-v_max, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub l: f64,
    pub v_max: f64,
    pub nx: usize,
    pub nv: usize,
}

/// Builds a grid; both cell counts must be even so the velocity mesh is
/// symmetric and never places a centre at `v = 0`.
pub fn build_grid(l: f64, v_max: f64, nx: usize, nv: usize) -> Result<PhaseGrid> {
    let mut problems = Vec::new();
    if !(l > 0.0 && l.is_finite()) {
        problems.push(format!("L must be positive (got {l})"));
    }
    if !(v_max > 0.0 && v_max.is_finite()) {
        problems.push(format!("v_max must be positive (got {v_max})"));
    }
    if nx == 0 || !nx.is_multiple_of(2) {
        problems.push(format!("Nx must be a positive even number (got {nx})"));
    }
    if nv == 0 || !nv.is_multiple_of(2) {
        problems.push(format!("Nv must be a positive even number (got {nv})"));
    }
    if !problems.is_empty() {
        return Err(Error::param(problems.join("; ")));
    }
    Ok(PhaseGrid { l, v_max, nx, nv })
}

impl PhaseGrid {
    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.nx as f64
    }

    pub fn dv(&self) -> f64 {
        2.0 * self.v_max / self.nv as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dv()
    }

    pub fn len(&self) -> usize {
        self.nx * self.nv
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    // Written as an offset from the middle so x(n) = -x(Nx-1-n) holds
    // bit for bit; algebraically this is -L + (n + 1/2) dx.
    pub fn x(&self, n: usize) -> f64 {
        (n as f64 + 0.5 - 0.5 * self.nx as f64) * self.dx()
    }

    pub fn v(&self, m: usize) -> f64 {
        (m as f64 + 0.5 - 0.5 * self.nv as f64) * self.dv()
    }

    /// Velocity at the face between cells `m` and `m + 1`.
    pub fn v_face(&self, m: usize) -> f64 {
        (m as f64 + 1.0 - 0.5 * self.nv as f64) * self.dv()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|n| self.x(n)).collect()
    }

    pub fn vs(&self) -> Vec<f64> {
        (0..self.nv).map(|m| self.v(m)).collect()
    }

    #[inline]
    pub fn index(&self, n: usize, m: usize) -> usize {
        n * self.nv + m
    }

    /// Index of the cell with the opposite velocity.
    #[inline]
    pub fn mirror_v(&self, m: usize) -> usize {
        self.nv - 1 - m
    }

    pub fn same_shape(&self, other: &PhaseGrid) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fine_grid_spacing() {
        let g = build_grid(400.0, 400.0, 400, 400).unwrap();
        assert_eq!(g.dx(), 2.0);
        assert_eq!(g.x(0), -399.0);
        assert_eq!(g.x(399), 399.0);
    }

    #[test]
    fn two_cells() {
        let g = build_grid(1.0, 1.0, 2, 2).unwrap();
        assert_eq!(g.xs(), vec![-0.5, 0.5]);
        assert_eq!(g.vs(), vec![-0.5, 0.5]);
    }

    #[test]
    fn centres_are_symmetric() {
        let g = build_grid(3.7, 2.1, 18, 26).unwrap();
        for n in 0..g.nx {
            assert_eq!(g.x(n), -g.x(g.nx - 1 - n));
        }
        for m in 0..g.nv {
            assert_eq!(g.v(m), -g.v(g.mirror_v(m)));
        }
    }

    #[test]
    fn odd_counts_rejected() {
        assert!(build_grid(1.0, 1.0, 3, 4).is_err());
        assert!(build_grid(1.0, 1.0, 4, 5).is_err());
        assert!(build_grid(-1.0, 1.0, 4, 4).is_err());
    }
}
