//! Second-order central (Kurganov–Tadmor) flux for `∂ₜf + v ∂ₓf = 0`.
//!
//! For linear advection the KT numerical flux reduces to upwinding the
//! minmod-limited reconstruction with the row speed `v_m`, so the speed
//! bound never introduces extra dissipation.

use serde::{Deserialize, Serialize};

use crate::solver::grid::PhaseGrid;

/// Closure at `x = ±L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum XBoundary {
    /// Reflect the velocity: ghost values come from the interior cells at
    /// `-v`. Two ghost layers are filled so the wall slopes are mirrored
    /// too, which makes the wall fluxes cancel pairwise.
    #[default]
    Specular,
    /// Used for test fixtures.
    Periodic,
}

#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

/// Scratch space for [`TransportOperator::rhs`].
#[derive(Debug, Clone)]
pub struct TransportOperator {
    grid: PhaseGrid,
    boundary: XBoundary,
    vs: Vec<f64>,
    // Rows -2..nx+2 of the ghost-extended field.
    ext: Vec<f64>,
    // Slopes on rows -1..nx+1.
    slope: Vec<f64>,
    flux: Vec<f64>,
}

impl TransportOperator {
    pub fn new(grid: PhaseGrid, boundary: XBoundary) -> Self {
        let nv = grid.nv;
        Self {
            grid,
            boundary,
            vs: grid.vs(),
            ext: vec![0.0; (grid.nx + 4) * nv],
            slope: vec![0.0; (grid.nx + 2) * nv],
            flux: vec![0.0; nv],
        }
    }

    pub fn boundary(&self) -> XBoundary {
        self.boundary
    }

    fn fill_ghosts(&mut self, f: &[f64]) {
        let (nx, nv) = (self.grid.nx, self.grid.nv);
        self.ext[2 * nv..(nx + 2) * nv].copy_from_slice(f);
        // Ghost row k of the extended array, taken from interior row `src`.
        let put = |ext: &mut [f64], k: usize, src: usize, mirrored: bool| {
            for m in 0..nv {
                let mm = if mirrored { nv - 1 - m } else { m };
                ext[k * nv + m] = f[src * nv + mm];
            }
        };
        match self.boundary {
            XBoundary::Specular => {
                let second = 1.min(nx - 1);
                put(&mut self.ext, 1, 0, true);
                put(&mut self.ext, 0, second, true);
                put(&mut self.ext, nx + 2, nx - 1, true);
                put(&mut self.ext, nx + 3, nx - 1 - second, true);
            }
            XBoundary::Periodic => {
                put(&mut self.ext, 1, nx - 1, false);
                put(&mut self.ext, 0, (2 * nx - 2) % nx, false);
                put(&mut self.ext, nx + 2, 0, false);
                put(&mut self.ext, nx + 3, 1 % nx, false);
            }
        }
    }

    /// Writes `-v ∂ₓf` in conservative form into `out`.
    pub fn rhs(&mut self, f: &[f64], out: &mut [f64]) {
        let (nx, nv) = (self.grid.nx, self.grid.nv);
        debug_assert_eq!(f.len(), nx * nv);
        self.fill_ghosts(f);
        // slope row j corresponds to cell j - 1, extended row j + 1.
        for j in 0..nx + 2 {
            let lo = &self.ext[j * nv..(j + 1) * nv];
            let mid = &self.ext[(j + 1) * nv..(j + 2) * nv];
            let hi = &self.ext[(j + 2) * nv..(j + 3) * nv];
            let s = &mut self.slope[j * nv..(j + 1) * nv];
            for m in 0..nv {
                s[m] = minmod(hi[m] - mid[m], mid[m] - lo[m]);
            }
        }
        let inv_dx = 1.0 / self.grid.dx();
        // Face i sits between cells i - 1 and i, for i in 0..=nx.
        let face = |this: &Self, i: usize, m: usize| -> f64 {
            let a = this.vs[m];
            if a > 0.0 {
                let left = this.ext[(i + 1) * nv + m];
                a * (left + 0.5 * this.slope[i * nv + m])
            } else {
                let right = this.ext[(i + 2) * nv + m];
                a * (right - 0.5 * this.slope[(i + 1) * nv + m])
            }
        };
        for m in 0..nv {
            self.flux[m] = face(self, 0, m);
        }
        for n in 0..nx {
            let row = &mut out[n * nv..(n + 1) * nv];
            // `face` borrows `self`, so the flux buffer is indexed.
            #[allow(clippy::needless_range_loop)]
            for m in 0..nv {
                let right = face(self, n + 1, m);
                row[m] = -(right - self.flux[m]) * inv_dx;
                self.flux[m] = right;
            }
        }
    }
}
