use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver::field::Field;
use crate::solver::grid::PhaseGrid;
use crate::solver::transport::{TransportOperator, XBoundary};
use crate::solver::velocity::VelocityOperator;

/// Which parts of the operator a [`Stepper`] advances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Splitting {
    #[default]
    Full,
    TransportOnly,
    VelocityOnly,
}

/// Stable step bound `safety · min(dx/v_max, dv²/2, dv/max|D|)`.
pub fn cfl_timestep(grid: &PhaseGrid, params: &ModelParams, cfl_safety: f64) -> f64 {
    let op = VelocityOperator::new(*grid, params);
    cfl_bound(grid, op.max_drift(), cfl_safety)
}

fn cfl_bound(grid: &PhaseGrid, max_drift: f64, cfl_safety: f64) -> f64 {
    let dv = grid.dv();
    let advective = grid.dx() / grid.v_max;
    let diffusive = 0.5 * dv * dv;
    let drift = if max_drift > 0.0 { dv / max_drift } else { f64::INFINITY };
    cfl_safety * advective.min(diffusive).min(drift)
}

/// Strang-split explicit integrator: transport over `dt/2`, velocity over
/// `dt`, transport over `dt/2`, each substep by Heun's method.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: PhaseGrid,
    transport: TransportOperator,
    velocity: VelocityOperator,
    splitting: Splitting,
    bound: f64,
    k1: Vec<f64>,
    k2: Vec<f64>,
    stage: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: PhaseGrid, params: &ModelParams) -> Result<Self> {
        Self::with_options(grid, params, XBoundary::Specular, Splitting::Full, None)
    }

    /// `frozen_x` evaluates the velocity drift at that position in every
    /// column.
    pub fn with_options(
        grid: PhaseGrid,
        params: &ModelParams,
        boundary: XBoundary,
        splitting: Splitting,
        frozen_x: Option<f64>,
    ) -> Result<Self> {
        if params.dim() != 1 {
            return Err(Error::param(format!("the solver is one-dimensional (dim = {})", params.dim())));
        }
        let velocity = match frozen_x {
            Some(x) => VelocityOperator::frozen(grid, params, x),
            None => VelocityOperator::new(grid, params),
        };
        let bound = cfl_bound(&grid, velocity.max_drift(), 1.0);
        Ok(Self {
            grid,
            transport: TransportOperator::new(grid, boundary),
            velocity,
            splitting,
            bound,
            k1: vec![0.0; grid.len()],
            k2: vec![0.0; grid.len()],
            stage: vec![0.0; grid.len()],
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    /// Step bound at unit safety factor.
    pub fn cfl_bound(&self) -> f64 {
        self.bound
    }

    pub fn velocity_operator(&self) -> &VelocityOperator {
        &self.velocity
    }

    pub fn transport_rhs(&mut self, f: &[f64], out: &mut [f64]) {
        self.transport.rhs(f, out);
    }

    pub fn velocity_rhs(&self, f: &[f64], out: &mut [f64]) {
        self.velocity.rhs(f, out);
    }

    /// Advances `field` by `dt`.
    pub fn step(&mut self, field: &mut Field, dt: f64) -> Result<()> {
        if !(dt >= 0.0) || dt > self.bound {
            return Err(Error::CflViolation { dt, bound: self.bound });
        }
        if field.grid != self.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", field.grid, self.grid)));
        }
        if dt == 0.0 {
            return Ok(());
        }
        match self.splitting {
            Splitting::Full => {
                self.heun(&mut field.values, 0.5 * dt, true);
                self.heun(&mut field.values, dt, false);
                self.heun(&mut field.values, 0.5 * dt, true);
            }
            Splitting::TransportOnly => self.heun(&mut field.values, dt, true),
            Splitting::VelocityOnly => self.heun(&mut field.values, dt, false),
        }
        field.time += dt;
        Ok(())
    }

    fn heun(&mut self, f: &mut [f64], dt: f64, transport: bool) {
        let Self { transport: tr, velocity, k1, k2, stage, .. } = self;
        let mut rhs = |input: &[f64], out: &mut [f64]| {
            if transport {
                tr.rhs(input, out)
            } else {
                velocity.rhs(input, out)
            }
        };
        rhs(f, k1);
        for ((s, &a), &k) in stage.iter_mut().zip(f.iter()).zip(k1.iter()) {
            *s = a + dt * k;
        }
        rhs(stage, k2);
        for ((a, &s), &k) in f.iter_mut().zip(stage.iter()).zip(k2.iter()) {
            *a = 0.5 * (*a + s + dt * k);
        }
    }
}

/// One Strang step of the full operator with specular walls.
pub fn strang_step(field: &Field, params: &ModelParams, dt: f64) -> Result<Field> {
    let mut stepper = Stepper::new(field.grid, params)?;
    let mut out = field.clone();
    stepper.step(&mut out, dt)?;
    Ok(out)
}
