//! Numerical certification of Lyapunov drift conditions.
//!
//! Two independent pieces live here: a finite-difference discretisation of
//! the dual operator `L*` (the oracle for the closed forms in
//! [`crate::model`]), and a grid scan that checks
//! `L*m ≤ C 1_{B_R} - φ(m)` on a box in `(x, v)` and reports admissible
//! `(C, R)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriftSample, LstarTarget, Lyapunov, LyapunovSpec, ModelParams, PointEval, WeightMode};

/// Contributions of the four terms of `L*F = v·∇ₓF − ∇V·∇ᵥF + ΔᵥF + (∇M/M)·∇ᵥF`
/// as computed by centred differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdTerms {
    pub transport_x: f64,
    pub transport_v: f64,
    pub diffusion: f64,
    pub drift: f64,
}

impl FdTerms {
    pub fn total(&self) -> f64 {
        self.transport_x + self.transport_v + self.diffusion + self.drift
    }

    /// Sum of the magnitudes of the individual terms; the natural scale
    /// for judging cancellation in [`FdTerms::total`].
    pub fn magnitude(&self) -> f64 {
        self.transport_x.abs() + self.transport_v.abs() + self.diffusion.abs() + self.drift.abs()
    }

    fn combine(coarse: &FdTerms, fine: &FdTerms, ratio: f64) -> FdTerms {
        let r = |c: f64, f: f64| (ratio * f - c) / (ratio - 1.0);
        FdTerms {
            transport_x: r(coarse.transport_x, fine.transport_x),
            transport_v: r(coarse.transport_v, fine.transport_v),
            diffusion: r(coarse.diffusion, fine.diffusion),
            drift: r(coarse.drift, fine.drift),
        }
    }
}

/// Centred-difference terms of `L*F` at `p` with step `h` in every
/// coordinate.
pub fn lstar_fd_terms<F>(f: F, p: &PointEval, params: &ModelParams, h: f64) -> Result<FdTerms>
where
    F: Fn(&PointEval) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::param(format!("finite-difference step must be positive (got {h})")));
    }
    let eval = |q: &PointEval| {
        let y = f(q);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::param(format!("non-finite function value at x = {:?}, v = {:?}", q.x, q.v)))
        }
    };
    let f0 = eval(p)?;
    let grad_pot = params.grad_potential(&p.x);
    let drift = params.equilibrium_drift(&p.v);
    let mut terms = FdTerms { transport_x: 0.0, transport_v: 0.0, diffusion: 0.0, drift: 0.0 };
    let mut q = p.clone();
    for i in 0..p.dim() {
        q.x[i] = p.x[i] + h;
        let xp = eval(&q)?;
        q.x[i] = p.x[i] - h;
        let xm = eval(&q)?;
        q.x[i] = p.x[i];
        let dfx = (xp - xm) / (2.0 * h);

        q.v[i] = p.v[i] + h;
        let vp = eval(&q)?;
        q.v[i] = p.v[i] - h;
        let vm = eval(&q)?;
        q.v[i] = p.v[i];
        let dfv = (vp - vm) / (2.0 * h);
        let d2fv = (vp - 2.0 * f0 + vm) / (h * h);

        terms.transport_x += p.v[i] * dfx;
        terms.transport_v -= grad_pot[i] * dfv;
        terms.diffusion += d2fv;
        terms.drift += drift[i] * dfv;
    }
    Ok(terms)
}

/// Second-order centred-difference approximation of `L*F(p)`.
pub fn apply_lstar_fd<F>(f: F, p: &PointEval, params: &ModelParams, h: f64) -> Result<f64>
where
    F: Fn(&PointEval) -> f64,
{
    Ok(lstar_fd_terms(f, p, params, h)?.total())
}

/// Base step for [`lstar_fd_richardson`]; balances the O(h⁶) truncation of
/// the extrapolated tableau against rounding in the second difference.
pub const RICHARDSON_STEP: f64 = 8e-3;

/// Richardson extrapolation of centred differences from steps `h`, `h/2`
/// and `h/4`, with each step scaled by the local size of the coordinate
/// (`h⟨x⟩` in x, `h⟨v⟩` in v) so roundoff stays proportionate far from the
/// origin.
pub fn lstar_fd_richardson<F>(f: F, p: &PointEval, params: &ModelParams, h: f64) -> Result<FdTerms>
where
    F: Fn(&PointEval) -> f64,
{
    // Rescale coordinates so a uniform step in the scaled variables is a
    // relative step in the original ones; the chain-rule factors are
    // undone below.
    let sx: Vec<f64> = p.x.iter().map(|c| (1.0 + c * c).sqrt()).collect();
    let sv: Vec<f64> = p.v.iter().map(|c| (1.0 + c * c).sqrt()).collect();
    let terms_at = |step: f64| -> Result<FdTerms> {
        let mut terms = FdTerms { transport_x: 0.0, transport_v: 0.0, diffusion: 0.0, drift: 0.0 };
        let grad_pot = params.grad_potential(&p.x);
        let drift = params.equilibrium_drift(&p.v);
        let f0 = f(p);
        let mut q = p.clone();
        for i in 0..p.dim() {
            let hx = step * sx[i];
            let hv = step * sv[i];
            let at = |q: &mut PointEval, dx: f64, dv: f64| {
                q.x[i] = p.x[i] + dx;
                q.v[i] = p.v[i] + dv;
                let y = f(q);
                q.x[i] = p.x[i];
                q.v[i] = p.v[i];
                y
            };
            let xp = at(&mut q, hx, 0.0);
            let xm = at(&mut q, -hx, 0.0);
            let vp = at(&mut q, 0.0, hv);
            let vm = at(&mut q, 0.0, -hv);
            let dfx = (xp - xm) / (2.0 * hx);
            let dfv = (vp - vm) / (2.0 * hv);
            let d2fv = (vp - 2.0 * f0 + vm) / (hv * hv);
            terms.transport_x += p.v[i] * dfx;
            terms.transport_v -= grad_pot[i] * dfv;
            terms.diffusion += d2fv;
            terms.drift += drift[i] * dfv;
        }
        let all = [terms.transport_x, terms.transport_v, terms.diffusion, terms.drift];
        if all.iter().any(|t| !t.is_finite()) {
            return Err(Error::param(format!("non-finite difference quotient at x = {:?}, v = {:?}", p.x, p.v)));
        }
        Ok(terms)
    };
    if !(h > 0.0) {
        return Err(Error::param(format!("finite-difference step must be positive (got {h})")));
    }
    // Two rounds of the tableau (h, h/2, h/4) cancel the h² and h⁴ error
    // terms, which allows a step large enough to keep the rounding error of
    // the second difference small.
    let d0 = terms_at(h)?;
    let d1 = terms_at(0.5 * h)?;
    let d2 = terms_at(0.25 * h)?;
    let r0 = FdTerms::combine(&d0, &d1, 4.0);
    let r1 = FdTerms::combine(&d1, &d2, 4.0);
    Ok(FdTerms::combine(&r0, &r1, 16.0))
}

/// Sampling of the certification box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub x_half_width: f64,
    pub v_half_width: f64,
    pub samples_per_axis: usize,
    /// Candidate radii for the ball `B_R`; order is irrelevant.
    pub radii: Vec<f64>,
    pub fd_step: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            x_half_width: 50.0,
            v_half_width: 50.0,
            samples_per_axis: 256,
            radii: vec![1.0, 2.0, 3.0, 5.0, 8.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0],
            fd_step: 1e-4,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples_per_axis < 16 {
            return Err(Error::param(format!("samples_per_axis must be at least 16 (got {})", self.samples_per_axis)));
        }
        if self.radii.is_empty() || self.radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
            return Err(Error::param("candidate radii must be a nonempty list of positive numbers"));
        }
        let r_max = self.radii.iter().cloned().fold(0.0, f64::max);
        if !(self.x_half_width > r_max && self.v_half_width > r_max) {
            return Err(Error::param(format!(
                "scan box ({}, {}) must exceed the largest candidate radius {r_max}",
                self.x_half_width, self.v_half_width
            )));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::param("fd_step must be positive"));
        }
        Ok(())
    }

    /// Tensor grid on the box with both coordinate axes added explicitly.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let axis = |half: f64| {
            let n = self.samples_per_axis;
            let mut pts: Vec<f64> = (0..n).map(|i| -half + 2.0 * half * i as f64 / (n - 1) as f64).collect();
            if !pts.contains(&0.0) {
                let pos = pts.partition_point(|&c| c < 0.0);
                pts.insert(pos, 0.0);
            }
            pts
        };
        let xs = axis(self.x_half_width);
        let vs = axis(self.v_half_width);
        let mut out = Vec::with_capacity(xs.len() * vs.len());
        for &x in &xs {
            for &v in &vs {
                out.push((x, v));
            }
        }
        out
    }
}

/// Outcome of [`scan_drift_inequality`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub passed: bool,
    pub chosen_r: f64,
    pub chosen_c: f64,
    /// Minimum of `-L*m - φ(m)` over scan points outside `B_R`.
    pub min_margin_outside: f64,
    /// Same minimum taken on `(-L*m - φ(m)) / m`.
    pub min_relative_margin_outside: f64,
    pub worst_point: PointEval,
    pub spec_echo: LyapunovSpec,
    pub samples: usize,
    /// Relative gap between the closed-form `L*m` and a centred difference
    /// with step `fd_step` at the worst point, when `m` is representable there.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_check_rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CertificateReport {
    /// One-line pass/fail summary.
    pub fn summary(&self) -> String {
        format!(
            "{} R={} C={:.6e} min_margin={:.6e} worst=(x={}, v={})",
            if self.passed { "PASS" } else { "FAIL" },
            self.chosen_r,
            self.chosen_c,
            self.min_margin_outside,
            self.worst_point.x[0],
            self.worst_point.v[0],
        )
    }
}

struct Sample {
    x: f64,
    v: f64,
    radius: f64,
    drift: DriftSample,
}

fn sample_box(lyap: &Lyapunov<'_>, points: &[(f64, f64)]) -> Vec<Sample> {
    let mut p = PointEval::one_d(0.0, 0.0);
    points
        .iter()
        .map(|&(x, v)| {
            p.x[0] = x;
            p.v[0] = v;
            Sample { x, v, radius: x.hypot(v), drift: lyap.drift_sample(&p) }
        })
        .collect()
}

/// Checks `L*m ≤ C 1_{B_R} − φ(m)` on the scan grid, returning the smallest
/// candidate radius with a nonnegative margin everywhere outside the ball
/// and `C` set to the largest `L*m + φ(m)` observed inside it.
pub fn scan_drift_inequality(params: &ModelParams, spec: &LyapunovSpec, cfg: &ScanConfig) -> Result<CertificateReport> {
    cfg.validate()?;
    if params.dim() != 1 {
        return Err(Error::param("the drift scan samples a one-dimensional phase space"));
    }
    let lyap = Lyapunov::new(params, spec)?;
    let samples = sample_box(&lyap, &cfg.points());
    let mut report = certify(&samples, spec, cfg);
    report.fd_check_rel_error = fd_check(&lyap, &report.worst_point, cfg.fd_step);
    Ok(report)
}

fn fd_check(lyap: &Lyapunov<'_>, p: &PointEval, h: f64) -> Option<f64> {
    let exact = lyap.lstar(p, LstarTarget::WeightM);
    let fd = apply_lstar_fd(|q| lyap.weight(q), p, lyap.params(), h).ok()?;
    exact.is_finite().then(|| (fd - exact).abs() / exact.abs().max(f64::MIN_POSITIVE))
}

fn certify(samples: &[Sample], spec: &LyapunovSpec, cfg: &ScanConfig) -> CertificateReport {
    let mut radii = cfg.radii.clone();
    radii.sort_by(f64::total_cmp);
    let r_max = *radii.last().expect("validated nonempty");

    let bad_h = samples.iter().find(|s| !(s.drift.h > 0.0) || !s.drift.relative_margin().is_finite());
    if let Some(s) = bad_h {
        return CertificateReport {
            passed: false,
            chosen_r: r_max,
            chosen_c: f64::INFINITY,
            min_margin_outside: f64::NEG_INFINITY,
            min_relative_margin_outside: f64::NEG_INFINITY,
            worst_point: PointEval::one_d(s.x, s.v),
            spec_echo: *spec,
            samples: samples.len(),
            fd_check_rel_error: None,
            note: Some(format!("H = {} is not positive (or L*m is not finite) here", s.drift.h)),
        };
    }

    let outcome = |r: f64| {
        let mut min_margin = f64::INFINITY;
        let mut min_rel = f64::INFINITY;
        let mut worst: Option<&Sample> = None;
        let mut c = 0.0f64;
        for s in samples {
            if s.radius > r {
                let m = s.drift.margin();
                let rel = s.drift.relative_margin();
                let replace = match worst {
                    None => true,
                    Some(_) => m < min_margin || (m == min_margin && rel < min_rel),
                };
                if replace {
                    worst = Some(s);
                }
                min_margin = min_margin.min(m);
                min_rel = min_rel.min(rel);
            } else {
                c = c.max(s.drift.excess());
            }
        }
        (min_margin, min_rel, worst, c)
    };

    for &r in &radii {
        let (min_margin, min_rel, worst, c) = outcome(r);
        if min_rel >= 0.0 {
            let worst = worst.map(|s| PointEval::one_d(s.x, s.v)).unwrap_or_else(|| PointEval::one_d(0.0, 0.0));
            return CertificateReport {
                passed: true,
                chosen_r: r,
                chosen_c: c,
                min_margin_outside: min_margin,
                min_relative_margin_outside: min_rel,
                worst_point: worst,
                spec_echo: *spec,
                samples: samples.len(),
                fd_check_rel_error: None,
                note: None,
            };
        }
    }
    let (min_margin, min_rel, worst, c) = outcome(r_max);
    let worst = worst.expect("box extends past every radius");
    CertificateReport {
        passed: false,
        chosen_r: r_max,
        chosen_c: c,
        min_margin_outside: min_margin,
        min_relative_margin_outside: min_rel,
        worst_point: PointEval::one_d(worst.x, worst.v),
        spec_echo: *spec,
        samples: samples.len(),
        fd_check_rel_error: None,
        note: Some(format!("no candidate radius passes; largest tried R = {r_max}")),
    }
}

/// Measured `min` and `max` of `H / E^ℓ` over the scan grid.
pub fn equivalence_constants(params: &ModelParams, spec: &LyapunovSpec, cfg: &ScanConfig) -> Result<(f64, f64)> {
    cfg.validate()?;
    let lyap = Lyapunov::new(params, spec)?;
    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    let mut p = PointEval::one_d(0.0, 0.0);
    for (x, v) in cfg.points() {
        p.x[0] = x;
        p.v[0] = v;
        let ratio = lyap.h(&p) / lyap.energy_power(&p);
        c1 = c1.min(ratio);
        c2 = c2.max(ratio);
    }
    if !(c1 > 0.0) {
        return Err(Error::param(format!("H / E^ell reaches {c1} on the scan box; H is not equivalent to E^ell")));
    }
    Ok((c1, c2))
}

/// Spec for `H = E² + ε⟨x⟩^{αa}⟨v⟩^{-(1-b)} x·v` with `m = exp(δH^{θ/2})`.
pub fn exp_weight_spec(alpha: f64, a: f64, b: f64, eps: f64, theta: f64, delta: f64) -> LyapunovSpec {
    LyapunovSpec { ell: 2.0, eps, a_exp: alpha * a, b_exp: 1.0 - b, mode: WeightMode::Exp { theta, delta } }
}

/// Spec for `H = E^ℓ + ε⟨x⟩^{α(ℓ-2+a)}⟨v⟩^{-(1-b)} x·v` with `m = H^{k/ℓ}`.
pub fn poly_weight_spec(alpha: f64, ell: f64, a: f64, b: f64, eps: f64, k: f64) -> LyapunovSpec {
    LyapunovSpec { ell, eps, a_exp: alpha * (ell - 2.0 + a), b_exp: 1.0 - b, mode: WeightMode::Poly { k } }
}

/// Candidate values for the parameter search in [`search_admissible`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub eps: Vec<f64>,
    pub a_exp: Vec<f64>,
    pub b_exp: Vec<f64>,
    /// Only used for exponential weights.
    pub delta: Vec<f64>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self {
            eps: vec![0.1, 0.3, 1.0],
            a_exp: vec![-0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0, 1.25],
            b_exp: vec![0.5, 0.75, 0.95],
            delta: vec![0.01, 0.03, 0.1, 0.3, 1.0, 2.0],
        }
    }
}

/// Walks the grid in the order `eps`, `a_exp`, `b_exp`, `delta` and returns
/// the first spec (built from `template`, whose `ell`, `θ` or `k` are kept)
/// whose scan passes. Specs failing validation are skipped.
pub fn search_admissible(
    params: &ModelParams,
    template: &LyapunovSpec,
    grid: &SearchGrid,
    cfg: &ScanConfig,
) -> Result<Option<CertificateReport>> {
    cfg.validate()?;
    let points = cfg.points();
    let deltas: Vec<Option<f64>> = match template.mode {
        WeightMode::Exp { .. } => grid.delta.iter().map(|d| Some(*d)).collect(),
        WeightMode::Poly { .. } => vec![None],
    };
    for &eps in &grid.eps {
        for &a_exp in &grid.a_exp {
            for &b_exp in &grid.b_exp {
                for delta in &deltas {
                    let mode = match (template.mode, delta) {
                        (WeightMode::Exp { theta, .. }, Some(delta)) => WeightMode::Exp { theta, delta: *delta },
                        (m, _) => m,
                    };
                    let spec = LyapunovSpec { eps, a_exp, b_exp, mode, ..*template };
                    let Ok(lyap) = Lyapunov::new(params, &spec) else { continue };
                    let report = certify(&sample_box(&lyap, &points), &spec, cfg);
                    if report.passed {
                        let mut report = report;
                        report.fd_check_rel_error = fd_check(&lyap, &report.worst_point, cfg.fd_step);
                        return Ok(Some(report));
                    }
                }
            }
        }
    }
    Ok(None)
}
