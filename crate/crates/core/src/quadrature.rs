//! Globally adaptive Gauss–Kronrod (G7/K15) quadrature.
//!
//! Used for equilibrium normalisation constants and for the velocity
//! integrals behind the tail asymptotics. Semi-infinite integrals are mapped
//! onto `[0, 1)` with `v = a + t / (1 - t)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances and work limit for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_panels: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-14, rel: 1e-12, max_panels: 4000 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Integrates `f` over `[a, b]`, bisecting the panel with the largest error
/// estimate until the total estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Like [`integrate`] but starts from the panels delimited by `breaks`
/// (sorted, at least two entries).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Result<Integral> {
    if breaks.len() < 2 {
        return Err(Error::param("quadrature needs at least two break points"));
    }
    let mut heap = BinaryHeap::new();
    let mut value = 0.0;
    let mut error = 0.0;
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (v, e) = kronrod15(&f, w[0], w[1]);
        evaluations += 15;
        value += v;
        error += e;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e });
    }
    while error > tol.abs.max(tol.rel * value.abs()) {
        if heap.len() >= tol.max_panels {
            return Err(Error::Quadrature { error, evaluations });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel no longer splittable in floating point.
            return Err(Error::Quadrature { error, evaluations });
        }
        let (v1, e1) = kronrod15(&f, worst.a, mid);
        let (v2, e2) = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift accumulated by the incremental updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Integral { value, error, evaluations })
}

/// Integrates `f` over `[a, ∞)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: Tolerance) -> Result<Integral> {
    let mapped = |t: f64| {
        let s = 1.0 - t;
        let y = f(a + t / s) / (s * s);
        if y.is_finite() {
            y
        } else {
            0.0
        }
    };
    // Geometric breaks towards t = 1 resolve slowly decaying tails.
    let mut breaks = vec![0.0];
    let mut t = 0.5;
    for _ in 0..24 {
        breaks.push(t);
        t = 0.5 * (t + 1.0);
    }
    breaks.push(1.0);
    integrate_with_breaks(mapped, &breaks, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x, -1.0, 3.0, Tolerance::default()).unwrap();
        assert!((r.value - 12.0).abs() < 1e-13);
    }

    #[test]
    fn gaussian_half_line() {
        let r = integrate_to_infinity(|x| (-x * x / 2.0).exp(), 0.0, Tolerance::default()).unwrap();
        let exact = (std::f64::consts::PI / 2.0).sqrt();
        assert!((r.value - exact).abs() < 1e-12, "{}", r.value);
    }

    #[test]
    fn algebraic_tail() {
        // ∫_0^∞ (1+x²)^{-1} = π/2
        let r = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, Tolerance::default()).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn panel_budget_exhaustion_is_an_error() {
        let tol = Tolerance { abs: 1e-300, rel: 0.0, max_panels: 8 };
        let r = integrate(|x| x.abs().sqrt(), -1.0, 1.0, tol);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
