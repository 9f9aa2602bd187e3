//! Closed-form model quantities: confining potential, local equilibria and
//! their drifts, the energy, the Lyapunov functional `H` with its weights
//! `m = Φ(H)`, and the dual operator `L*` applied analytically.
//!
//! Everything here is a pure function of its arguments. Formulas are written
//! for general dimension `d`; the solver only uses `d = 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, Tolerance};

/// Analytic tail mass neglected when truncating the normalisation integral.
const NORM_TAIL_BOUND: f64 = 1e-12;

/// Japanese bracket `⟨z⟩ = √(1 + |z|²)`.
pub fn jbracket(z: &[f64]) -> f64 {
    (1.0 + dot(z, z)).sqrt()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

/// Shape of the local (velocity) equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Equilibrium {
    /// `M ∝ exp(-⟨v⟩^β / β)`
    Exp { beta: f64 },
    /// `M ∝ ⟨v⟩^{-d-γ}`
    Poly { gamma: f64 },
}

/// Confinement and equilibrium parameters, with the equilibrium
/// normalisation constant (`c_β` or `d_γ`) computed at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    equilibrium: Equilibrium,
    dim: usize,
    norm_const: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, equilibrium: Equilibrium, dim: usize) -> Result<Self> {
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::param(format!("alpha must exceed 1 (got {alpha})")));
        }
        match equilibrium {
            Equilibrium::Exp { beta } if !(beta > 0.0) || !beta.is_finite() => {
                return Err(Error::param(format!("beta must be positive (got {beta})")));
            }
            Equilibrium::Poly { gamma } if !(gamma > 1.0) || !gamma.is_finite() => {
                return Err(Error::param(format!("gamma must exceed 1 (got {gamma})")));
            }
            _ => {}
        }
        if dim == 0 {
            return Err(Error::param("dimension must be positive"));
        }
        let norm_const = normalisation_constant(equilibrium, dim)?;
        Ok(Self { alpha, equilibrium, dim, norm_const })
    }

    /// One-dimensional model with a stretched-exponential equilibrium.
    pub fn exp(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, Equilibrium::Exp { beta }, 1)
    }

    /// One-dimensional model with a polynomial equilibrium.
    pub fn poly(alpha: f64, gamma: f64) -> Result<Self> {
        Self::new(alpha, Equilibrium::Poly { gamma }, 1)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn equilibrium(&self) -> Equilibrium {
        self.equilibrium
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `c_β` or `d_γ`.
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// `β` for the exponential family, `None` otherwise.
    pub fn beta(&self) -> Option<f64> {
        match self.equilibrium {
            Equilibrium::Exp { beta } => Some(beta),
            Equilibrium::Poly { .. } => None,
        }
    }

    /// `V(x) = ⟨x⟩^α / α`.
    pub fn potential(&self, x: &[f64]) -> f64 {
        jbracket(x).powf(self.alpha) / self.alpha
    }

    /// `∇V(x) = ⟨x⟩^{α-2} x`.
    pub fn grad_potential(&self, x: &[f64]) -> Vec<f64> {
        let s = jbracket(x).powf(self.alpha - 2.0);
        x.iter().map(|xi| s * xi).collect()
    }

    /// `V'(x)` for scalar `x`.
    #[inline]
    pub fn potential_slope_1d(&self, x: f64) -> f64 {
        (1.0 + x * x).powf(0.5 * (self.alpha - 2.0)) * x
    }

    /// Normalised equilibrium density `M(v)`.
    pub fn equilibrium_density(&self, v: &[f64]) -> f64 {
        unnormalised_equilibrium(self.equilibrium, self.dim, jbracket(v)) / self.norm_const
    }

    /// Scalar factor `s(v)` such that `∇M/M = s(v) v`.
    #[inline]
    fn drift_factor(&self, v_sq: f64) -> f64 {
        let w_sq = 1.0 + v_sq;
        match self.equilibrium {
            Equilibrium::Exp { beta } => -w_sq.powf(0.5 * (beta - 2.0)),
            Equilibrium::Poly { gamma } => -(self.dim as f64 + gamma) / w_sq,
        }
    }

    /// `∇M/M`.
    pub fn equilibrium_drift(&self, v: &[f64]) -> Vec<f64> {
        let s = self.drift_factor(dot(v, v));
        v.iter().map(|vi| s * vi).collect()
    }

    /// `M'(v)/M(v)` for scalar `v`.
    #[inline]
    pub fn equilibrium_drift_1d(&self, v: f64) -> f64 {
        self.drift_factor(v * v) * v
    }

    /// `E(x, v) = |v|²/2 + V(x)`.
    pub fn energy(&self, p: &PointEval) -> f64 {
        0.5 * dot(&p.v, &p.v) + self.potential(&p.x)
    }

    #[inline]
    pub fn energy_1d(&self, x: f64, v: f64) -> f64 {
        0.5 * v * v + (1.0 + x * x).powf(0.5 * self.alpha) / self.alpha
    }
}

fn unnormalised_equilibrium(eq: Equilibrium, dim: usize, bracket: f64) -> f64 {
    match eq {
        Equilibrium::Exp { beta } => (-bracket.powf(beta) / beta).exp(),
        Equilibrium::Poly { gamma } => bracket.powf(-(dim as f64) - gamma),
    }
}

/// `Γ(d/2)` for positive integer `d`.
fn gamma_half(d: usize) -> f64 {
    let (mut g, mut s) = if d.is_multiple_of(2) { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = d as f64 / 2.0;
    while s < target {
        g *= s;
        s += 1.0;
    }
    g
}

/// Surface area of the unit sphere in `R^d` (2 for `d = 1`).
fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Upper bound on `|S^{d-1}| ∫_R^∞ r^{d-1} M̃(r) dr` for the unnormalised
/// equilibrium `M̃`, using `⟨r⟩ ≥ r`.
fn radial_tail_bound(eq: Equilibrium, dim: usize, radius: f64) -> f64 {
    let d = dim as f64;
    let area = sphere_area(dim);
    match eq {
        Equilibrium::Poly { gamma } => area * radius.powf(-gamma) / gamma,
        Equilibrium::Exp { beta } => {
            // Substituting u = r^β/β turns the tail into β^{s-1} Γ(s, x)
            // with s = d/β and x = R^β/β.
            let s = d / beta;
            let x = radius.powf(beta) / beta;
            let log_gamma_upper = if s <= 1.0 {
                (s - 1.0) * x.ln() - x
            } else if x > 2.0 * (s - 1.0) {
                std::f64::consts::LN_2 + (s - 1.0) * x.ln() - x
            } else {
                return f64::INFINITY;
            };
            area * ((s - 1.0) * beta.ln() + log_gamma_upper).exp()
        }
    }
}

fn normalisation_constant(eq: Equilibrium, dim: usize) -> Result<f64> {
    let mut radius = 1.0;
    while radial_tail_bound(eq, dim, radius) >= NORM_TAIL_BOUND {
        radius *= 2.0;
        if radius > 1e15 {
            return Err(Error::param("equilibrium tail bound does not decay"));
        }
    }
    let mut breaks = vec![0.0];
    let mut r = 1.0;
    while r < radius {
        breaks.push(r);
        r *= 2.0;
    }
    breaks.push(radius);
    let d = dim as f64;
    let radial = |r: f64| {
        let bracket = (1.0 + r * r).sqrt();
        unnormalised_equilibrium(eq, dim, bracket) * r.powf(d - 1.0)
    };
    let tol = Tolerance { abs: 1e-15, rel: 1e-13, max_panels: 8000 };
    let integral = quadrature::integrate_with_breaks(radial, &breaks, tol)?;
    Ok(sphere_area(dim) * integral.value)
}

/// A phase-space point `(x, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointEval {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl PointEval {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() || x.is_empty() {
            return Err(Error::param("x and v must have the same positive length"));
        }
        if x.iter().chain(&v).any(|c| !c.is_finite()) {
            return Err(Error::param("point components must be finite"));
        }
        Ok(Self { x, v })
    }

    pub fn one_d(x: f64, v: f64) -> Self {
        Self { x: vec![x], v: vec![v] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

/// How the Lyapunov weight is built from `H`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum WeightMode {
    /// `m = exp(δ H^{θ/2})`, `φ(m) = m (ln m)^{-(1-θ)/θ}`.
    Exp { theta: f64, delta: f64 },
    /// `m = H^{k/ℓ}`, `φ(m) = m^{1-1/k}`.
    Poly { k: f64 },
}

/// Parameters of `H = E^ℓ + ε ⟨x⟩^A ⟨v⟩^{-B} (x·v)` and of the weight built
/// on top of it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpec {
    pub ell: f64,
    pub eps: f64,
    pub a_exp: f64,
    pub b_exp: f64,
    #[serde(flatten)]
    pub mode: WeightMode,
}

impl LyapunovSpec {
    /// Checks the ranges of every field and the equivalence condition
    /// `(A+1)_+/α + (1-B)/2 ≤ ℓ`.
    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.ell > 1.0) {
            return Err(Error::param(format!("ell must exceed 1 (got {})", self.ell)));
        }
        if !(self.eps >= 0.0) || !self.eps.is_finite() {
            return Err(Error::param(format!("eps must be nonnegative (got {})", self.eps)));
        }
        if !self.a_exp.is_finite() {
            return Err(Error::param("A must be finite"));
        }
        if !(self.b_exp > 0.0 && self.b_exp < 1.0) {
            return Err(Error::param(format!("B must lie in (0, 1) (got {})", self.b_exp)));
        }
        let lhs = (self.a_exp + 1.0).max(0.0) / params.alpha() + 0.5 * (1.0 - self.b_exp);
        if lhs > self.ell {
            return Err(Error::param(format!("(A+1)_+/alpha + (1-B)/2 = {lhs} exceeds ell = {}", self.ell)));
        }
        match self.mode {
            WeightMode::Exp { theta, delta } => {
                if !(theta > 0.0 && theta <= 1.0) {
                    return Err(Error::param(format!("theta must lie in (0, 1] (got {theta})")));
                }
                if !(delta > 0.0) || !delta.is_finite() {
                    return Err(Error::param(format!("delta must be positive (got {delta})")));
                }
            }
            WeightMode::Poly { k } => {
                if !(k > 1.0) {
                    return Err(Error::param(format!("k must exceed 1 (got {k})")));
                }
                if k > self.ell {
                    return Err(Error::param(format!("k = {k} exceeds ell = {}", self.ell)));
                }
            }
        }
        Ok(())
    }
}

/// Which function `L*` is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LstarTarget {
    /// `E^ℓ`
    EnergyPower,
    /// `⟨x⟩^A ⟨v⟩^{-B} (x·v)` (without the `ε`)
    CrossTerm,
    /// `H`
    FullH,
    /// `m = Φ(H)`
    WeightM,
}

/// `L*m`, `φ(m)` and `H` at one point, with the weight-dependent parts
/// divided by `m` so nothing overflows when `m` is huge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSample {
    pub h: f64,
    /// `ln m`
    pub log_m: f64,
    /// `L*m / m`
    pub lstar_over_m: f64,
    /// `φ(m) / m`
    pub phi_over_m: f64,
}

impl DriftSample {
    /// `(-L*m - φ(m)) / m`; same sign as the absolute margin.
    pub fn relative_margin(&self) -> f64 {
        -self.lstar_over_m - self.phi_over_m
    }

    pub fn weight(&self) -> f64 {
        self.log_m.exp()
    }

    /// `-L*m - φ(m)`; infinite only where `m` itself overflows.
    pub fn margin(&self) -> f64 {
        let rel = self.relative_margin();
        if rel == 0.0 {
            0.0
        } else {
            rel * self.weight()
        }
    }

    /// `L*m + φ(m)`.
    pub fn excess(&self) -> f64 {
        -self.margin()
    }
}

/// A validated `(ModelParams, LyapunovSpec)` pair with the closed-form
/// expressions for `H`, `∇_v H` and `L*` applied to each building block.
#[derive(Debug, Clone, Copy)]
pub struct Lyapunov<'a> {
    params: &'a ModelParams,
    spec: LyapunovSpec,
}

impl<'a> Lyapunov<'a> {
    pub fn new(params: &'a ModelParams, spec: &LyapunovSpec) -> Result<Self> {
        spec.validate(params)?;
        Ok(Self { params, spec: *spec })
    }

    pub fn params(&self) -> &ModelParams {
        self.params
    }

    pub fn spec(&self) -> &LyapunovSpec {
        &self.spec
    }

    pub fn energy_power(&self, p: &PointEval) -> f64 {
        self.params.energy(p).powf(self.spec.ell)
    }

    pub fn cross_term(&self, p: &PointEval) -> f64 {
        let bx = jbracket(&p.x);
        let bv = jbracket(&p.v);
        bx.powf(self.spec.a_exp) * bv.powf(-self.spec.b_exp) * dot(&p.x, &p.v)
    }

    /// `H = E^ℓ + ε ⟨x⟩^A ⟨v⟩^{-B} (x·v)`.
    pub fn h(&self, p: &PointEval) -> f64 {
        self.energy_power(p) + self.spec.eps * self.cross_term(p)
    }

    /// `∇_v H = ℓE^{ℓ-1} v + ε ⟨x⟩^A (⟨v⟩^{-B} x - B (x·v) ⟨v⟩^{-B-2} v)`.
    pub fn grad_v_h(&self, p: &PointEval) -> Vec<f64> {
        let LyapunovSpec { ell, eps, a_exp, b_exp, .. } = self.spec;
        let e = self.params.energy(p);
        let bx_a = jbracket(&p.x).powf(a_exp);
        let bv_sq = 1.0 + dot(&p.v, &p.v);
        let bv_b = bv_sq.powf(-0.5 * b_exp);
        let s = dot(&p.x, &p.v);
        let pow = ell * e.powf(ell - 1.0);
        p.x.iter()
            .zip(&p.v)
            .map(|(xi, vi)| pow * vi + eps * bx_a * (bv_b * xi - b_exp * s * bv_b / bv_sq * vi))
            .collect()
    }

    /// `L*(E^ℓ) = ℓE^{ℓ-1} [(ℓ-1)|v|²/E + d + v·∇M/M]`.
    pub fn lstar_energy_power(&self, p: &PointEval) -> f64 {
        let ell = self.spec.ell;
        let e = self.params.energy(p);
        let v_sq = dot(&p.v, &p.v);
        let v_drift = self.params.drift_factor(v_sq) * v_sq;
        let d = self.params.dim as f64;
        ell * e.powf(ell - 1.0) * ((ell - 1.0) * v_sq / e + d + v_drift)
    }

    /// `L*` of the cross term `⟨x⟩^A ⟨v⟩^{-B} (x·v)`.
    pub fn lstar_cross_term(&self, p: &PointEval) -> f64 {
        let a = self.spec.a_exp;
        let b = self.spec.b_exp;
        let d = self.params.dim as f64;
        let x_sq = dot(&p.x, &p.x);
        let v_sq = dot(&p.v, &p.v);
        let s = dot(&p.x, &p.v);
        let bx_sq = 1.0 + x_sq;
        let bv_sq = 1.0 + v_sq;
        let prefactor = bx_sq.powf(0.5 * a) * bv_sq.powf(-0.5 * b);
        let grad_v_pot = bx_sq.powf(0.5 * (self.params.alpha - 2.0));
        let drift = self.params.drift_factor(v_sq);
        // (x - B (x·v) v/⟨v⟩²) · (drift v)
        let drift_term = drift * (s - b * s * v_sq / bv_sq);
        let bracket = v_sq + a * s * s / bx_sq
            - grad_v_pot * (x_sq - b * s * s / bv_sq)
            - b * s * ((d + 2.0) / bv_sq - (b + 2.0) * v_sq / (bv_sq * bv_sq))
            + drift_term;
        prefactor * bracket
    }

    /// `L*H = L*(E^ℓ) + ε L*(cross term)`.
    pub fn lstar_h(&self, p: &PointEval) -> f64 {
        self.lstar_energy_power(p) + self.spec.eps * self.lstar_cross_term(p)
    }

    /// `L*m` through `L*Φ(H) = Φ'(H) L*H + Φ''(H) |∇_v H|²`.
    pub fn drift_sample(&self, p: &PointEval) -> DriftSample {
        let h = self.h(p);
        let lh = self.lstar_h(p);
        let g = self.grad_v_h(p);
        let g_sq = dot(&g, &g);
        let ell = self.spec.ell;
        match self.spec.mode {
            WeightMode::Exp { theta, delta } => {
                let c = 0.5 * delta * theta;
                let h_half = h.powf(0.5 * theta);
                let log_m = delta * h_half;
                let d1 = c * h_half / h;
                let d2 = c * c * h_half * h_half / (h * h) + c * (0.5 * theta - 1.0) * h_half / (h * h);
                let phi_over_m = if theta == 1.0 { 1.0 } else { log_m.powf(-(1.0 - theta) / theta) };
                DriftSample { h, log_m, lstar_over_m: d1 * lh + d2 * g_sq, phi_over_m }
            }
            WeightMode::Poly { k } => {
                let r = k / ell;
                let d1 = r / h;
                let d2 = r * (r - 1.0) / (h * h);
                DriftSample { h, log_m: r * h.ln(), lstar_over_m: d1 * lh + d2 * g_sq, phi_over_m: h.powf(-1.0 / ell) }
            }
        }
    }

    /// `m = Φ(H)`.
    pub fn weight(&self, p: &PointEval) -> f64 {
        weight_from_h(self.h(p), &self.spec)
    }

    pub fn lstar(&self, p: &PointEval, target: LstarTarget) -> f64 {
        match target {
            LstarTarget::EnergyPower => self.lstar_energy_power(p),
            LstarTarget::CrossTerm => self.lstar_cross_term(p),
            LstarTarget::FullH => self.lstar_h(p),
            LstarTarget::WeightM => {
                let s = self.drift_sample(p);
                s.lstar_over_m * s.weight()
            }
        }
    }

    /// The function `L*` is applied to for `target`.
    pub fn target_value(&self, p: &PointEval, target: LstarTarget) -> f64 {
        match target {
            LstarTarget::EnergyPower => self.energy_power(p),
            LstarTarget::CrossTerm => self.cross_term(p),
            LstarTarget::FullH => self.h(p),
            LstarTarget::WeightM => self.weight(p),
        }
    }
}

/// `Φ(H)` for the weight mode of `spec`.
pub fn weight_from_h(h: f64, spec: &LyapunovSpec) -> f64 {
    match spec.mode {
        WeightMode::Exp { theta, delta } => (delta * h.powf(0.5 * theta)).exp(),
        WeightMode::Poly { k } => h.powf(k / spec.ell),
    }
}

pub fn lyapunov_h(p: &PointEval, params: &ModelParams, spec: &LyapunovSpec) -> Result<f64> {
    Ok(Lyapunov::new(params, spec)?.h(p))
}

pub fn grad_v_h(p: &PointEval, params: &ModelParams, spec: &LyapunovSpec) -> Result<Vec<f64>> {
    Ok(Lyapunov::new(params, spec)?.grad_v_h(p))
}

pub fn apply_lstar_exact(p: &PointEval, params: &ModelParams, spec: &LyapunovSpec, target: LstarTarget) -> Result<f64> {
    Ok(Lyapunov::new(params, spec)?.lstar(p, target))
}

/// The concave rate function `φ` of the drift condition.
///
/// For the exponential weight `φ(1)` is taken as 0 (the literal formula
/// diverges as `ln m → 0` when `θ < 1`).
pub fn phi(mval: f64, spec: &LyapunovSpec) -> Result<f64> {
    if !(mval >= 1.0) {
        return Err(Error::param(format!("weights take values in [1, ∞) (got {mval})")));
    }
    Ok(match spec.mode {
        WeightMode::Exp { theta, .. } => {
            if theta == 1.0 {
                mval
            } else if mval == 1.0 {
                0.0
            } else {
                mval * mval.ln().powf(-(1.0 - theta) / theta)
            }
        }
        WeightMode::Poly { k } => mval.powf(1.0 - 1.0 / k),
    })
}

/// Decay profile `Θ(t)`: `exp(-λ t^θ)` for the exponential weight,
/// `(1 + t)^{-k}` for the polynomial one (`lam` is unused there).
pub fn theta_decay(t: f64, spec: &LyapunovSpec, lam: f64) -> f64 {
    match spec.mode {
        WeightMode::Exp { theta, .. } => (-lam * t.powf(theta)).exp(),
        WeightMode::Poly { k } => (1.0 + t).powf(-k),
    }
}

/// `C = 2√π α^{β/4} / √(βδα)`.
pub fn asymptotic_constant(alpha: f64, beta: f64, delta: f64) -> f64 {
    2.0 * PI.sqrt() * alpha.powf(beta / 4.0) / (beta * delta * alpha).sqrt()
}

/// Large-`|x|` form of `∫ exp(-δ E(x,v)^{β/2}) dv` in one dimension:
/// `C |x|^{(α/2)(1-β/2)} exp(-δ (⟨x⟩^α/α)^{β/2})`.
pub fn asymptotic_density(x: f64, alpha: f64, beta: f64, delta: f64) -> f64 {
    let ax = x.abs();
    let pot = (1.0 + x * x).powf(0.5 * alpha) / alpha;
    asymptotic_constant(alpha, beta, delta)
        * ax.powf(0.5 * alpha * (1.0 - 0.5 * beta))
        * (-delta * pot.powf(0.5 * beta)).exp()
}

/// `asymptotic_density` times the first Laplace correction
/// `1 + 3(2-β)/(8β λ)`, `λ = δ (⟨x⟩^α/α)^{β/2}`. The leading form alone is
/// off by roughly `1/λ`, which decays slowly when `β` is small.
pub fn asymptotic_density_corrected(x: f64, alpha: f64, beta: f64, delta: f64) -> f64 {
    let pot = (1.0 + x * x).powf(0.5 * alpha) / alpha;
    let lambda = delta * pot.powf(0.5 * beta);
    asymptotic_density(x, alpha, beta, delta) * (1.0 + 3.0 * (2.0 - beta) / (8.0 * beta * lambda))
}

/// `∫_R exp(-δ E(x,v)^{β/2}) dv` by adaptive quadrature (one dimension).
pub fn profile_density(x: f64, alpha: f64, beta: f64, delta: f64) -> Result<f64> {
    let pot = (1.0 + x * x).powf(0.5 * alpha) / alpha;
    // Factor out the value at v = 0 so the integrand is O(1) for any x.
    let peak = delta * pot.powf(0.5 * beta);
    let integrand = |v: f64| (peak - delta * (0.5 * v * v + pot).powf(0.5 * beta)).exp();
    let half = quadrature::integrate_to_infinity(integrand, 0.0, Tolerance::default())?;
    Ok(2.0 * half.value * (-peak).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec_exp(ell: f64, eps: f64, a: f64, b: f64) -> LyapunovSpec {
        LyapunovSpec { ell, eps, a_exp: a, b_exp: b, mode: WeightMode::Exp { theta: 0.5, delta: 0.1 } }
    }

    #[test]
    fn jbracket_values() {
        assert_eq!(jbracket(&[0.0]), 1.0);
        assert_relative_eq!(jbracket(&[3.0]), 10f64.sqrt(), max_relative = 1e-15);
        assert_eq!(jbracket(&[-3.0]), jbracket(&[3.0]));
    }

    #[test]
    fn potential_values() {
        let m = ModelParams::exp(1.5, 0.5).unwrap();
        assert_relative_eq!(m.potential(&[0.0]), 1.0 / 1.5, max_relative = 1e-15);
        assert_relative_eq!(m.grad_potential(&[1.0])[0], 2f64.powf(-0.25), max_relative = 1e-14);
        let m2 = ModelParams::exp(2.0, 2.0).unwrap();
        assert_relative_eq!(m2.potential(&[2.0]), 2.5, max_relative = 1e-15);
        assert_relative_eq!(m2.grad_potential(&[2.0])[0], 2.0, max_relative = 1e-15);
    }

    #[test]
    fn gaussian_normalisation_matches_closed_form() {
        let m = ModelParams::exp(2.0, 2.0).unwrap();
        let closed = (2.0 * PI).sqrt() * (-0.5f64).exp();
        assert_relative_eq!(m.norm_const(), closed, max_relative = 1e-11);
        assert_relative_eq!(m.norm_const(), 1.52035, max_relative = 1e-5);
    }

    #[test]
    fn cauchy_normalisation_is_pi() {
        // γ = 1 is outside the admissible model range, so go through the
        // normalisation routine directly; arctan gives exactly π.
        let c = normalisation_constant(Equilibrium::Poly { gamma: 1.0 }, 1).unwrap();
        assert_relative_eq!(c, PI, max_relative = 1e-10);
    }

    #[test]
    fn gamma_below_one_rejected() {
        assert!(ModelParams::poly(2.0, 1.0).is_err());
        assert!(ModelParams::exp(0.9, 0.5).is_err());
        assert!(ModelParams::exp(1.5, 0.0).is_err());
    }

    #[test]
    fn higher_dimensional_gaussian_normalisation() {
        // d = 3, β = 2: ∫ exp(-(1+|v|²)/2) = (2π)^{3/2} e^{-1/2}
        let m = ModelParams::new(2.0, Equilibrium::Exp { beta: 2.0 }, 3).unwrap();
        let closed = (2.0 * PI).powf(1.5) * (-0.5f64).exp();
        assert_relative_eq!(m.norm_const(), closed, max_relative = 1e-11);
    }

    #[test]
    fn drift_values() {
        let g = ModelParams::exp(2.0, 2.0).unwrap();
        assert_relative_eq!(g.equilibrium_drift(&[3.0])[0], -3.0, max_relative = 1e-15);
        let s = ModelParams::exp(2.0, 0.5).unwrap();
        assert_relative_eq!(s.equilibrium_drift(&[1.0])[0], -(2f64.powf(-0.75)), max_relative = 1e-14);
        let cauchy = ModelParams { alpha: 2.0, equilibrium: Equilibrium::Poly { gamma: 1.0 }, dim: 1, norm_const: PI };
        assert_relative_eq!(cauchy.equilibrium_drift(&[1.0])[0], -1.0, max_relative = 1e-15);
        assert_relative_eq!(cauchy.equilibrium_density(&[0.0]), 1.0 / PI, max_relative = 1e-15);
    }

    #[test]
    fn energy_values() {
        let m = ModelParams::exp(2.0, 1.0).unwrap();
        assert_relative_eq!(m.energy(&PointEval::one_d(0.0, 0.0)), 0.5);
        assert_relative_eq!(m.energy(&PointEval::one_d(1.0, 2.0)), 3.0);
        assert_eq!(m.energy(&PointEval::one_d(-1.0, -2.0)), m.energy(&PointEval::one_d(1.0, 2.0)));
    }

    #[test]
    fn h_examples() {
        let m = ModelParams::exp(2.0, 1.0).unwrap();
        let l = Lyapunov::new(&m, &spec_exp(2.0, 0.3, 0.1, 0.5)).unwrap();
        assert_relative_eq!(l.h(&PointEval::one_d(0.0, 0.0)), 0.25, max_relative = 1e-15);

        let flat = Lyapunov::new(&m, &spec_exp(2.0, 0.0, 0.1, 0.5)).unwrap();
        let p = PointEval::one_d(1.3, -0.7);
        assert_eq!(flat.h(&p), m.energy(&p).powi(2));

        let m15 = ModelParams::exp(1.5, 0.5).unwrap();
        let l = Lyapunov::new(&m15, &spec_exp(2.0, 1e-3, 0.05, 0.95)).unwrap();
        let p = PointEval::one_d(1.0, 1.0);
        let e = m15.energy(&p);
        let expected = e * e + 1e-3 * 2f64.powf(0.05 / 2.0) * 2f64.powf(-0.95 / 2.0);
        assert_relative_eq!(l.h(&p), expected, max_relative = 1e-15);
        let composed = e * e + 1e-3 * jbracket(&[1.0]).powf(0.05) / jbracket(&[1.0]).powf(0.95);
        assert_relative_eq!(l.h(&p), composed, max_relative = 1e-15);
    }

    #[test]
    fn grad_v_h_examples() {
        let m = ModelParams::exp(2.0, 2.0).unwrap();
        let l = Lyapunov::new(&m, &spec_exp(2.0, 0.2, 0.1, 0.5)).unwrap();
        assert_eq!(l.grad_v_h(&PointEval::one_d(0.0, 0.0)), vec![0.0]);
        let flat = Lyapunov::new(&m, &spec_exp(2.0, 0.0, 0.1, 0.5)).unwrap();
        assert_relative_eq!(flat.grad_v_h(&PointEval::one_d(0.0, 1.0))[0], 2.0, max_relative = 1e-15);
    }

    #[test]
    fn lstar_energy_power_examples() {
        let m = ModelParams::exp(2.0, 2.0).unwrap();
        let l = Lyapunov::new(&m, &spec_exp(2.0, 0.0, 0.0, 0.5)).unwrap();
        assert_relative_eq!(l.lstar_energy_power(&PointEval::one_d(0.0, 1.0)), 2.0, max_relative = 1e-14);
        let p = PointEval::one_d(3.0, 0.0);
        let e = m.energy(&p);
        assert_relative_eq!(l.lstar_energy_power(&p), 2.0 * e, max_relative = 1e-14);
        assert_eq!(l.lstar_h(&p), l.lstar_energy_power(&p));
    }

    #[test]
    fn equivalence_condition_enforced() {
        let m = ModelParams::exp(1.5, 0.5).unwrap();
        // (A+1)/α + (1-B)/2 = 3/1.5 + 0.25 > 2
        assert!(Lyapunov::new(&m, &spec_exp(2.0, 0.1, 2.0, 0.5)).is_err());
        let poly = LyapunovSpec { mode: WeightMode::Poly { k: 2.5 }, ..spec_exp(2.0, 0.1, 0.0, 0.5) };
        assert!(poly.validate(&m).is_err());
    }

    #[test]
    fn phi_examples() {
        let s1 = LyapunovSpec { mode: WeightMode::Exp { theta: 1.0, delta: 0.1 }, ..spec_exp(2.0, 0.0, 0.0, 0.5) };
        assert_eq!(phi(7.5, &s1).unwrap(), 7.5);
        let s05 = spec_exp(2.0, 0.0, 0.0, 0.5);
        assert_relative_eq!(phi(std::f64::consts::E, &s05).unwrap(), std::f64::consts::E, max_relative = 1e-12);
        assert_eq!(phi(1.0, &s05).unwrap(), 0.0);
        let sp = LyapunovSpec { mode: WeightMode::Poly { k: 2.0 }, ..s05 };
        assert_relative_eq!(phi(4.0, &sp).unwrap(), 2.0, max_relative = 1e-15);
        assert!(phi(0.5, &sp).is_err());
    }

    #[test]
    fn phi_nondecreasing_past_e() {
        // m (ln m)^{-p} increases once ln m ≥ p = (1-θ)/θ, i.e. from e for θ = 1/2.
        for (theta, start) in [(0.5, 1.0f64), (0.25, 3.0), (1.0, 0.0)] {
            let s = LyapunovSpec { mode: WeightMode::Exp { theta, delta: 1.0 }, ..spec_exp(2.0, 0.0, 0.0, 0.5) };
            let mut prev = 0.0;
            for i in 0..200 {
                let m = start.exp().max(std::f64::consts::E) * (1.0 + 0.37 * i as f64);
                let v = phi(m, &s).unwrap();
                assert!(v >= prev, "theta {theta} m {m}");
                prev = v;
            }
        }
    }

    #[test]
    fn theta_decay_examples() {
        let s = spec_exp(2.0, 0.0, 0.0, 0.5);
        assert_relative_eq!(theta_decay(4.0, &s, 1.0), (-2.0f64).exp(), max_relative = 1e-15);
        assert_eq!(theta_decay(0.0, &s, 3.0), 1.0);
        let sp = LyapunovSpec { mode: WeightMode::Poly { k: 2.0 }, ..s };
        assert_relative_eq!(theta_decay(1.0, &sp, 1.0), 0.25, max_relative = 1e-15);
    }

    #[test]
    fn asymptotic_constant_value() {
        assert_relative_eq!(asymptotic_constant(1.5, 0.5, 1.15), 4.0154, max_relative = 2e-5);
        let exponent = 0.5 * 1.0 * (1.0 - 0.5 * 1.0);
        assert_eq!(exponent, 0.25);
    }
}
