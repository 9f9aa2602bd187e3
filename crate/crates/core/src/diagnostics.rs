//! Observables computed from solver fields and time series, plus CSV
//! writers for them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    asymptotic_density, asymptotic_density_corrected, jbracket, Equilibrium, Lyapunov, ModelParams, PointEval,
};
use crate::solver::{Field, PhaseGrid};

/// Scalar observables of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub time: f64,
    pub mass: f64,
    pub l1_distance_to_reference: Option<f64>,
    pub weighted_l1: Option<f64>,
    pub weight_id: Option<String>,
    pub min_value: f64,
    pub max_value: f64,
}

/// `ρₙ = Σₘ f[n, m] dv`.
pub fn density(field: &Field) -> Vec<f64> {
    let dv = field.grid.dv();
    (0..field.grid.nx).map(|n| field.column(n).iter().sum::<f64>() * dv).collect()
}

/// `Σₙ ρₙ dx`, summed in the same order as [`density`].
pub fn mass(field: &Field) -> f64 {
    let dx = field.grid.dx();
    density(field).iter().map(|r| r * dx).sum()
}

/// `Σ |f - g| w dx dv`, with `w ≡ 1` when no weight is given.
pub fn l1_distance(f: &Field, g: &Field, weight: Option<&[f64]>) -> Result<f64> {
    f.check_grid(g)?;
    let area = f.grid.cell_area();
    let sum = match weight {
        None => f.values.iter().zip(&g.values).map(|(a, b)| (a - b).abs()).sum::<f64>(),
        Some(w) => {
            if w.len() != f.values.len() {
                return Err(Error::GridMismatch(format!(
                    "weight has {} entries for {} cells",
                    w.len(),
                    f.values.len()
                )));
            }
            f.values.iter().zip(&g.values).zip(w).map(|((a, b), w)| (a - b).abs() * w).sum::<f64>()
        }
    };
    Ok(sum * area)
}

/// The Lyapunov weight `m` sampled at cell centres.
pub fn weight_field(grid: &PhaseGrid, lyap: &Lyapunov<'_>) -> Vec<f64> {
    let mut p = PointEval::one_d(0.0, 0.0);
    let mut out = Vec::with_capacity(grid.len());
    for n in 0..grid.nx {
        p.x[0] = grid.x(n);
        for m in 0..grid.nv {
            p.v[0] = grid.v(m);
            out.push(lyap.weight(&p));
        }
    }
    out
}

pub fn record(
    step: u64,
    field: &Field,
    reference: Option<&Field>,
    weight: Option<(&str, &[f64])>,
) -> Result<DiagnosticsRecord> {
    let l1_distance_to_reference = reference.map(|r| l1_distance(field, r, None)).transpose()?;
    let weighted_l1 = match (reference, weight) {
        (Some(r), Some((_, w))) => Some(l1_distance(field, r, Some(w))?),
        _ => None,
    };
    Ok(DiagnosticsRecord {
        step,
        time: field.time,
        mass: mass(field),
        l1_distance_to_reference,
        weighted_l1,
        weight_id: weight.filter(|_| reference.is_some()).map(|(id, _)| id.to_string()),
        min_value: field.min(),
        max_value: field.max(),
    })
}

/// `exp(-δ E^{β/2})` at cell centres, optionally rescaled to unit mass.
pub fn reference_profile(grid: &PhaseGrid, params: &ModelParams, delta: f64, normalise: bool) -> Result<Field> {
    let Equilibrium::Exp { beta } = params.equilibrium() else {
        return Err(Error::param("the reference profile needs an exponential equilibrium"));
    };
    if !(delta >= 0.0) {
        return Err(Error::param(format!("delta must be nonnegative (got {delta})")));
    }
    let mut f = Field::from_fn(*grid, |x, v| (-delta * params.energy_1d(x, v).powf(0.5 * beta)).exp());
    if normalise {
        let total = mass(&f);
        f.values.iter_mut().for_each(|v| *v /= total);
    }
    Ok(f)
}

/// Number of uniform energy bins used by [`energy_scatter`].
pub const ENERGY_BINS: usize = 64;

/// Cells below this fraction of the maximum are left out of the
/// dispersion statistic.
pub const OCCUPIED_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyScatter {
    /// `(E(xₙ, vₘ), f[n, m])`, one per cell.
    pub pairs: Vec<(f64, f64)>,
    /// Root-mean-square deviation of `ln f` from its bin mean, over the
    /// occupied cells (`f > OCCUPIED_FLOOR · max f`), with the bins spanning
    /// the occupied energy range. Zero for a field that is a function of
    /// energy alone, up to the variation inside one bin.
    pub dispersion: f64,
    pub occupied: usize,
}

pub fn energy_scatter(field: &Field, params: &ModelParams) -> EnergyScatter {
    let g = &field.grid;
    let mut pairs = Vec::with_capacity(g.len());
    for n in 0..g.nx {
        for m in 0..g.nv {
            pairs.push((params.energy_1d(g.x(n), g.v(m)), field.get(n, m)));
        }
    }
    let floor = OCCUPIED_FLOOR * field.max();
    let occupied: Vec<(f64, f64)> =
        pairs.iter().filter(|p| p.1 > floor && p.1 > 0.0).map(|&(e, f)| (e, f.ln())).collect();
    if occupied.is_empty() {
        return EnergyScatter { pairs, dispersion: 0.0, occupied: 0 };
    }
    let (lo, hi) = occupied.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let width = (hi - lo) / ENERGY_BINS as f64;
    let bin = |e: f64| {
        if width > 0.0 {
            (((e - lo) / width) as usize).min(ENERGY_BINS - 1)
        } else {
            0
        }
    };
    let mut sum = [0.0; ENERGY_BINS];
    let mut count = [0usize; ENERGY_BINS];
    for &(e, y) in &occupied {
        let b = bin(e);
        sum[b] += y;
        count[b] += 1;
    }
    let spread: f64 = occupied
        .iter()
        .map(|&(e, y)| {
            let b = bin(e);
            let d = y - sum[b] / count[b] as f64;
            d * d
        })
        .sum();
    EnergyScatter { dispersion: (spread / occupied.len() as f64).sqrt(), occupied: occupied.len(), pairs }
}

/// Largest relative deviation above which a window is not considered to
/// be in the asymptotic regime.
pub const ASYMPTOTIC_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailComparison {
    /// `max |ρ / ρ_asym - 1|` over the window.
    pub max_rel_deviation: f64,
    /// Same against `asymptotic_density_corrected`.
    pub max_rel_deviation_corrected: f64,
    /// `-slope` of `log ρ` against `s = (⟨x⟩^α/α)^{β/2}`.
    pub slope_delta: f64,
    /// RMS residual of that regression, in log units.
    pub slope_residual_rms: f64,
    /// `δ` fitted after removing the known algebraic prefactor
    /// `|x|^{(α/2)(1-β/2)}` from `ρ`.
    pub fitted_delta: f64,
    pub samples: usize,
    pub asymptotic_regime: bool,
}

/// Least-squares line `y ≈ a + b t`; returns `(a, b, rms residual)`.
pub fn linear_fit(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = t.len();
    if n < 2 || y.len() != n {
        return Err(Error::Fit(format!("need at least two paired samples (got {n})")));
    }
    let tm = t.iter().sum::<f64>() / n as f64;
    let ym = y.iter().sum::<f64>() / n as f64;
    let stt: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    let sty: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    if !(stt > 0.0) {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let b = sty / stt;
    let a = ym - b * tm;
    let rss: f64 = t.iter().zip(y).map(|(a_, y_)| (y_ - a - b * a_).powi(2)).sum();
    Ok((a, b, (rss / n as f64).sqrt()))
}

pub fn tail_comparison(
    xs: &[f64],
    rho: &[f64],
    alpha: f64,
    beta: f64,
    delta: f64,
    window: (f64, f64),
) -> Result<TailComparison> {
    if xs.len() != rho.len() {
        return Err(Error::param("positions and densities differ in length"));
    }
    let (lo, hi) = window;
    if !(lo < hi) || xs.is_empty() {
        return Err(Error::param(format!("empty window [{lo}, {hi}]")));
    }
    let x_min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo.abs().min(hi.abs()) == 0.0 || lo * hi < 0.0 {
        return Err(Error::param("the window must not contain x = 0"));
    }
    if lo < x_min - 1e-12 * x_min.abs() || hi > x_max + 1e-12 * x_max.abs() {
        return Err(Error::param(format!("window [{lo}, {hi}] leaves the sampled range [{x_min}, {x_max}]")));
    }
    let mut s = Vec::new();
    let mut log_rho = Vec::new();
    let mut log_corrected = Vec::new();
    let mut max_dev = 0.0f64;
    let mut max_dev_corr = 0.0f64;
    let prefactor = 0.5 * alpha * (1.0 - 0.5 * beta);
    for (&x, &r) in xs.iter().zip(rho) {
        if x < lo || x > hi {
            continue;
        }
        if !(r > 0.0) {
            return Err(Error::param(format!("density {r} at x = {x} is not positive")));
        }
        max_dev = max_dev.max((r / asymptotic_density(x, alpha, beta, delta) - 1.0).abs());
        max_dev_corr = max_dev_corr.max((r / asymptotic_density_corrected(x, alpha, beta, delta) - 1.0).abs());
        s.push((jbracket(&[x]).powf(alpha) / alpha).powf(0.5 * beta));
        log_rho.push(r.ln());
        log_corrected.push(r.ln() - prefactor * x.abs().ln());
    }
    let (_, slope, rms) = linear_fit(&s, &log_rho)?;
    let (_, corrected, _) = linear_fit(&s, &log_corrected)?;
    Ok(TailComparison {
        max_rel_deviation: max_dev,
        max_rel_deviation_corrected: max_dev_corr,
        slope_delta: -slope,
        slope_residual_rms: rms,
        fitted_delta: -corrected,
        samples: s.len(),
        asymptotic_regime: max_dev_corr <= ASYMPTOTIC_TOLERANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RateMode {
    /// Fit `log d` against `t^θ`.
    ExpTheta { theta: f64 },
    /// Fit `log d` against `log(1 + t)`.
    PolyK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub mode: RateMode,
    /// `λ` for `ExpTheta`, `k` for `PolyK`.
    pub fitted: f64,
    pub intercept: f64,
    pub window: (f64, f64),
    pub residual_rms: f64,
    pub samples: usize,
}

/// Minimum number of samples left after burn-in.
pub const MIN_FIT_SAMPLES: usize = 8;

/// Fits the decay law to `(t, distance)` after discarding the first
/// `burn_fraction` of the time span.
pub fn rate_fit(series: &[(f64, f64)], mode: RateMode, burn_fraction: f64) -> Result<RateFit> {
    if series.is_empty() {
        return Err(Error::Fit("empty series".into()));
    }
    if !(0.0..1.0).contains(&burn_fraction) {
        return Err(Error::Fit(format!("burn fraction must lie in [0, 1) (got {burn_fraction})")));
    }
    if let Some(&(t, d)) = series.iter().find(|(_, d)| !(*d > 0.0)) {
        return Err(Error::Fit(format!("distance {d} at t = {t} is not positive")));
    }
    let t0 = series.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let t1 = series.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let t_burn = t0 + burn_fraction * (t1 - t0);
    let kept: Vec<&(f64, f64)> = series.iter().filter(|p| p.0 >= t_burn).collect();
    if kept.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!("{} samples after burn-in; at least {MIN_FIT_SAMPLES} are needed", kept.len())));
    }
    let abscissa = |t: f64| match mode {
        RateMode::ExpTheta { theta } => t.powf(theta),
        RateMode::PolyK => t.ln_1p(),
    };
    let ts: Vec<f64> = kept.iter().map(|p| abscissa(p.0)).collect();
    let ys: Vec<f64> = kept.iter().map(|p| p.1.ln()).collect();
    let (a, b, rms) = linear_fit(&ts, &ys)?;
    let lo = kept.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    Ok(RateFit { mode, fitted: -b, intercept: a, window: (lo, t1), residual_rms: rms, samples: kept.len() })
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}

pub fn write_records_csv(mut w: impl Write, records: &[DiagnosticsRecord]) -> Result<()> {
    writeln!(w, "step,time,mass,l1_distance_to_reference,weighted_l1,weight_id,min_value,max_value")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.step,
            real(r.time),
            real(r.mass),
            opt(r.l1_distance_to_reference),
            opt(r.weighted_l1),
            r.weight_id.as_deref().unwrap_or(""),
            real(r.min_value),
            real(r.max_value)
        )?;
    }
    Ok(())
}

pub fn write_density_csv(mut w: impl Write, xs: &[f64], rho: &[f64]) -> Result<()> {
    writeln!(w, "x,rho")?;
    for (x, r) in xs.iter().zip(rho) {
        writeln!(w, "{},{}", real(*x), real(*r))?;
    }
    Ok(())
}

pub fn write_scatter_csv(mut w: impl Write, scatter: &EnergyScatter) -> Result<()> {
    writeln!(w, "energy,f")?;
    for (e, f) in &scatter.pairs {
        writeln!(w, "{},{}", real(*e), real(*f))?;
    }
    Ok(())
}

/// Field values as `x,v,f` rows.
pub fn write_field_csv(mut w: impl Write, field: &Field) -> Result<()> {
    writeln!(w, "x,v,f")?;
    let g = &field.grid;
    for n in 0..g.nx {
        for m in 0..g.nv {
            writeln!(w, "{},{},{}", real(g.x(n)), real(g.v(m)), real(field.get(n, m)))?;
        }
    }
    Ok(())
}

/// Key-value summary of a fit.
pub fn write_fit_summary(mut w: impl Write, fit: &RateFit) -> Result<()> {
    match fit.mode {
        RateMode::ExpTheta { theta } => {
            writeln!(w, "mode = exp-theta")?;
            writeln!(w, "theta = {}", real(theta))?;
            writeln!(w, "lambda = {}", real(fit.fitted))?;
        }
        RateMode::PolyK => {
            writeln!(w, "mode = poly-k")?;
            writeln!(w, "k = {}", real(fit.fitted))?;
        }
    }
    writeln!(w, "intercept = {}", real(fit.intercept))?;
    writeln!(w, "t_lo = {}", real(fit.window.0))?;
    writeln!(w, "t_hi = {}", real(fit.window.1))?;
    writeln!(w, "residual_rms = {}", real(fit.residual_rms))?;
    writeln!(w, "samples = {}", fit.samples)?;
    Ok(())
}
