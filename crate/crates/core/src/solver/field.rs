use crate::error::{Error, Result};
use crate::solver::grid::PhaseGrid;

/// Cell averages `f[n, m]` on a [`PhaseGrid`], stored with `x` outer and
/// `v` inner.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub grid: PhaseGrid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl Field {
    pub fn zeros(grid: PhaseGrid) -> Self {
        Self { grid, values: vec![0.0; grid.len()], time: 0.0 }
    }

    pub fn from_values(grid: PhaseGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values supplied for a {}x{} grid",
                values.len(),
                grid.nx,
                grid.nv
            )));
        }
        Ok(Self { grid, values, time: 0.0 })
    }

    /// Samples `f(x, v)` at cell centres.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for n in 0..grid.nx {
            let x = grid.x(n);
            for m in 0..grid.nv {
                values.push(f(x, grid.v(m)));
            }
        }
        Self { grid, values, time: 0.0 }
    }

    #[inline]
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.values[self.grid.index(n, m)]
    }

    /// Values at fixed `x_n`, contiguous in `v`.
    pub fn column(&self, n: usize) -> &[f64] {
        &self.values[n * self.grid.nv..(n + 1) * self.grid.nv]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn check_grid(&self, other: &Field) -> Result<()> {
        if self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)))
        }
    }
}

/// The normalised datum `(1/16) exp(-|x|/2 - |v|/2)`.
pub fn initial_datum(x: f64, v: f64) -> f64 {
    (-0.5 * x.abs() - 0.5 * v.abs()).exp() / 16.0
}

// Mean of exp(-|s|/2) over [a, b].
fn cell_mean_exp_abs(a: f64, b: f64) -> f64 {
    let prim = |s: f64| {
        // Antiderivative of exp(-|s|/2), continuous at 0.
        if s >= 0.0 {
            -2.0 * (-0.5 * s).exp_m1()
        } else {
            2.0 * (0.5 * s).exp_m1()
        }
    };
    (prim(b) - prim(a)) / (b - a)
}

/// Exact cell averages of [`initial_datum`]; the mass equals
/// `(1 - e^{-L/2})(1 - e^{-v_max/2})`.
pub fn default_initial_condition(grid: &PhaseGrid) -> Field {
    let dx = grid.dx();
    let dv = grid.dv();
    let gx: Vec<f64> = (0..grid.nx)
        .map(|n| {
            let a = -grid.l + n as f64 * dx;
            0.25 * cell_mean_exp_abs(a, a + dx)
        })
        .collect();
    let gv: Vec<f64> = (0..grid.nv)
        .map(|m| {
            let a = -grid.v_max + m as f64 * dv;
            0.25 * cell_mean_exp_abs(a, a + dv)
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    for &a in &gx {
        for &b in &gv {
            values.push(a * b);
        }
    }
    Field { grid: *grid, values, time: 0.0 }
}
