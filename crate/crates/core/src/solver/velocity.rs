//! Chang–Cooper discretisation of `∂ᵥ(∂ᵥf + D f)` with
//! `D(x, v) = V'(x) - (∂ᵥM/M)(v)` and zero flux at `v = ±v_max`.

use crate::model::ModelParams;
use crate::solver::grid::PhaseGrid;

/// Chang–Cooper weight `δ(w) = 1/w - 1/(eʷ - 1)`.
pub fn cc_weight(w: f64) -> f64 {
    if w.abs() < 1e-4 {
        0.5 - w / 12.0 + w * w * w / 720.0
    } else {
        1.0 / w - 1.0 / w.exp_m1()
    }
}

/// Bernoulli function `w / (eʷ - 1)`.
pub fn bernoulli(w: f64) -> f64 {
    if w.abs() < 1e-4 {
        1.0 - 0.5 * w + w * w / 12.0
    } else {
        w / w.exp_m1()
    }
}

/// Face drift `D` between `v_m` and `v_{m+1}` at position `x`.
pub fn face_drift(params: &ModelParams, x: f64, v_face: f64) -> f64 {
    params.potential_slope_1d(x) - params.equilibrium_drift_1d(v_face)
}

/// Precomputed face coefficients. The face flux is
/// `F = (B(-w) f_{m+1} - B(w) f_m) / dv`, which equals the Chang–Cooper
/// flux `D((1-δ) f_{m+1} + δ f_m) + (f_{m+1} - f_m)/dv` with `w = dv D`.
#[derive(Debug, Clone)]
pub struct VelocityOperator {
    grid: PhaseGrid,
    // B(-w)/dv² and B(w)/dv² per (column, interior face).
    up: Vec<f64>,
    down: Vec<f64>,
    max_drift: f64,
}

impl VelocityOperator {
    pub fn new(grid: PhaseGrid, params: &ModelParams) -> Self {
        Self::build(grid, params, None)
    }

    /// Every column uses the drift at `x = frozen_x`.
    pub fn frozen(grid: PhaseGrid, params: &ModelParams, frozen_x: f64) -> Self {
        Self::build(grid, params, Some(frozen_x))
    }

    fn build(grid: PhaseGrid, params: &ModelParams, frozen_x: Option<f64>) -> Self {
        let faces = grid.nv - 1;
        let dv = grid.dv();
        let inv = 1.0 / (dv * dv);
        let mut up = Vec::with_capacity(grid.nx * faces);
        let mut down = Vec::with_capacity(grid.nx * faces);
        let mut max_drift = 0.0f64;
        for n in 0..grid.nx {
            let x = frozen_x.unwrap_or_else(|| grid.x(n));
            for m in 0..faces {
                let d = face_drift(params, x, grid.v_face(m));
                max_drift = max_drift.max(d.abs());
                let w = dv * d;
                let b = bernoulli(w);
                up.push((w + b) * inv);
                down.push(b * inv);
            }
        }
        Self { grid, up, down, max_drift }
    }

    /// Largest `|D|` over the faces in use.
    pub fn max_drift(&self) -> f64 {
        self.max_drift
    }

    /// Writes `∂ᵥ(∂ᵥf + D f)` in flux form into `out`.
    pub fn rhs(&self, f: &[f64], out: &mut [f64]) {
        let nv = self.grid.nv;
        let faces = nv - 1;
        for n in 0..self.grid.nx {
            let col = &f[n * nv..(n + 1) * nv];
            let up = &self.up[n * faces..(n + 1) * faces];
            let down = &self.down[n * faces..(n + 1) * faces];
            let o = &mut out[n * nv..(n + 1) * nv];
            let mut below = 0.0;
            for m in 0..faces {
                let above = up[m] * col[m + 1] - down[m] * col[m];
                o[m] = above - below;
                below = above;
            }
            o[faces] = -below;
        }
    }

    /// Per-column discrete equilibrium with `g_{m+1}/g_m = e^{-w}`, each
    /// column normalised to unit mass.
    pub fn discrete_equilibrium(&self) -> Vec<f64> {
        let nv = self.grid.nv;
        let faces = nv - 1;
        let dv = self.grid.dv();
        let mut g = vec![0.0; self.grid.len()];
        for n in 0..self.grid.nx {
            let col = &mut g[n * nv..(n + 1) * nv];
            // Accumulate log-ratios, then shift by the maximum so nothing
            // under- or overflows.
            let mut log = vec![0.0; nv];
            for m in 0..faces {
                let ratio = self.down[n * faces + m] / self.up[n * faces + m];
                log[m + 1] = log[m] + ratio.ln();
            }
            let top = log.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for m in 0..nv {
                col[m] = (log[m] - top).exp();
            }
            let mass: f64 = col.iter().sum::<f64>() * dv;
            for c in col.iter_mut() {
                *c /= mass;
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::grid::build_grid;

    #[test]
    fn weight_values() {
        assert_eq!(cc_weight(0.0), 0.5);
        assert!((cc_weight(1.0) - 0.418023).abs() < 1e-6);
        assert!((cc_weight(-1.0) - (1.0 - cc_weight(1.0))).abs() < 1e-15);
        // Series and closed form agree where they meet.
        let w: f64 = 1.0001e-4;
        let closed = 1.0 / w - 1.0 / w.exp_m1();
        assert!((closed - cc_weight(0.99999e-4)).abs() < 1e-8);
    }

    #[test]
    fn bernoulli_reflection() {
        for w in [-30.0, -1.0, -1e-5, 0.0, 2e-5, 0.3, 12.0] {
            let lhs = bernoulli(-w);
            assert!((lhs - (w + bernoulli(w))).abs() < 1e-12 * (1.0 + lhs.abs()), "{w}");
        }
    }

    #[test]
    fn columns_conserve_mass() {
        let p = ModelParams::exp(1.5, 0.5).unwrap();
        let g = build_grid(5.0, 6.0, 8, 12).unwrap();
        let op = VelocityOperator::new(g, &p);
        let f: Vec<f64> = (0..g.len()).map(|i| 1.0 + ((i * 31) % 17) as f64).collect();
        let mut out = vec![0.0; g.len()];
        op.rhs(&f, &mut out);
        for n in 0..g.nx {
            let col = &out[n * g.nv..(n + 1) * g.nv];
            let s: f64 = col.iter().sum();
            let scale: f64 = col.iter().map(|c| c.abs()).sum();
            assert!(s.abs() < 1e-14 * scale, "{s}");
        }
    }

    #[test]
    fn equilibrium_is_stationary() {
        let p = ModelParams::poly(2.0, 2.0).unwrap();
        let g = build_grid(5.0, 6.0, 8, 24).unwrap();
        let op = VelocityOperator::new(g, &p);
        let eq = op.discrete_equilibrium();
        let mut out = vec![0.0; g.len()];
        op.rhs(&eq, &mut out);
        let peak = eq.iter().cloned().fold(0.0, f64::max);
        assert!(out.iter().all(|r| r.abs() < 1e-13 * peak / (g.dv() * g.dv())));
    }
}
