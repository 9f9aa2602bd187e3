use crate::error::{Error, Result};
use crate::solver::field::Field;
use crate::solver::stepper::Stepper;

/// Stopping rule for [`steady_state_reference`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    pub dt: f64,
    /// Threshold on `‖f(t+Δ) - f(t)‖₁ / Δ`.
    pub tol_rate: f64,
    /// Steps per measurement window `Δ`.
    pub window_steps: u64,
    pub max_steps: u64,
}

impl SteadyOptions {
    pub fn new(dt: f64) -> Self {
        Self { dt, tol_rate: 1e-8, window_steps: 200, max_steps: 2_000_000 }
    }
}

/// Outcome of a converged [`steady_state_reference`] run.
#[derive(Debug, Clone)]
pub struct SteadyState {
    pub field: Field,
    pub steps: u64,
    pub rate: f64,
}

/// Integrates until the windowed L¹ change rate falls below the tolerance.
pub fn steady_state_reference(stepper: &mut Stepper, mut field: Field, opts: &SteadyOptions) -> Result<SteadyState> {
    if opts.window_steps == 0 || !(opts.tol_rate > 0.0) {
        return Err(Error::param("window_steps and tol_rate must be positive"));
    }
    let area = field.grid.cell_area();
    let window = opts.window_steps as f64 * opts.dt;
    let mut previous = field.values.clone();
    let mut steps = 0;
    let mut rate = f64::INFINITY;
    while steps < opts.max_steps {
        for _ in 0..opts.window_steps {
            stepper.step(&mut field, opts.dt)?;
        }
        steps += opts.window_steps;
        if !field.is_finite() {
            return Err(Error::NonFinite { step: steps, time: field.time });
        }
        let change: f64 = field.values.iter().zip(&previous).map(|(a, b)| (a - b).abs()).sum::<f64>() * area;
        rate = change / window;
        if rate < opts.tol_rate {
            return Ok(SteadyState { field, steps, rate });
        }
        previous.copy_from_slice(&field.values);
    }
    Err(Error::SteadyStateNotReached { steps, rate })
}
