use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::solver::field::Field;
use crate::solver::grid::PhaseGrid;
use crate::solver::stepper::Stepper;

/// Time-loop settings. `dt` is an upper bound: the loop uses
/// `t_final / ceil(t_final / dt)` so the last step lands on `t_final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub t_final: f64,
    pub dt: f64,
    pub snapshot_cadence: u64,
    pub diagnostics_cadence: u64,
}

impl RunSettings {
    pub fn steps(&self) -> u64 {
        if self.t_final <= 0.0 {
            return 0;
        }
        let ratio = self.t_final / self.dt;
        let rounded = ratio.round();
        // Absorb representation error in t_final / dt.
        if (ratio - rounded).abs() <= 1e-9 * rounded {
            rounded as u64
        } else {
            ratio.ceil() as u64
        }
    }

    pub fn effective_dt(&self) -> f64 {
        match self.steps() {
            0 => self.dt,
            n => self.t_final / n as f64,
        }
    }

    pub fn time_at(&self, step: u64) -> f64 {
        if step == self.steps() {
            self.t_final
        } else {
            step as f64 * self.effective_dt()
        }
    }
}

/// Receives fields during [`run`]. Step 0 and the final step are always
/// reported to both hooks.
pub trait Observer {
    fn on_snapshot(&mut self, _step: u64, _field: &Field) -> Result<()> {
        Ok(())
    }

    fn on_diagnostics(&mut self, _step: u64, _field: &Field) -> Result<()> {
        Ok(())
    }

    /// Called with the last finite field before a non-finite abort.
    fn on_abort(&mut self, _step: u64, _last_good: &Field) -> Result<()> {
        Ok(())
    }
}

impl Observer for () {}

/// Where the loop starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Start {
    pub step: u64,
}

/// Advances `field` (at step `start.step`) to `settings.t_final`.
pub fn run(
    stepper: &mut Stepper,
    settings: &RunSettings,
    mut field: Field,
    start: Start,
    observer: &mut dyn Observer,
) -> Result<Field> {
    if settings.snapshot_cadence == 0 || settings.diagnostics_cadence == 0 {
        return Err(Error::param("cadences must be positive"));
    }
    let total = settings.steps();
    let dt = settings.effective_dt();
    if start.step > total {
        return Err(Error::param(format!("start step {} is past the final step {total}", start.step)));
    }
    field.time = settings.time_at(start.step);
    if start.step == 0 {
        observer.on_snapshot(0, &field)?;
        observer.on_diagnostics(0, &field)?;
    }
    let mut last_good = field.clone();
    for step in start.step + 1..=total {
        last_good.values.copy_from_slice(&field.values);
        last_good.time = field.time;
        stepper.step(&mut field, dt)?;
        field.time = settings.time_at(step);
        if !field.is_finite() {
            observer.on_abort(step - 1, &last_good)?;
            return Err(Error::NonFinite { step, time: field.time });
        }
        let last = step == total;
        if last || step % settings.snapshot_cadence == 0 {
            observer.on_snapshot(step, &field)?;
        }
        if last || step % settings.diagnostics_cadence == 0 {
            observer.on_diagnostics(step, &field)?;
        }
    }
    Ok(field)
}

const MAGIC: &[u8; 8] = b"KFPCKPT1";
const HEADER_LEN: usize = 8 + 8 * 7;

/// A field with the step index it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub field: Field,
    pub step: u64,
    pub dt: f64,
}

/// Header (magic, Nx, Nv, L, v_max, step, dt, time) followed by the values
/// as little-endian f64, x outer and v inner.
pub fn write_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    let f = &checkpoint.field;
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * f.values.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(f.grid.nx as u64).to_le_bytes());
    buf.extend_from_slice(&(f.grid.nv as u64).to_le_bytes());
    buf.extend_from_slice(&f.grid.l.to_le_bytes());
    buf.extend_from_slice(&f.grid.v_max.to_le_bytes());
    buf.extend_from_slice(&checkpoint.step.to_le_bytes());
    buf.extend_from_slice(&checkpoint.dt.to_le_bytes());
    buf.extend_from_slice(&f.time.to_le_bytes());
    for v in &f.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = fs::File::create(path)?;
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bad = |reason: &str| Error::Checkpoint { path: path.to_path_buf(), reason: reason.to_string() };
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(bad("missing header"));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 + 8 * i..16 + 8 * i].try_into().expect("8 bytes") };
    let nx = u64::from_le_bytes(word(0)) as usize;
    let nv = u64::from_le_bytes(word(1)) as usize;
    let l = f64::from_le_bytes(word(2));
    let v_max = f64::from_le_bytes(word(3));
    let step = u64::from_le_bytes(word(4));
    let dt = f64::from_le_bytes(word(5));
    let time = f64::from_le_bytes(word(6));
    let grid = crate::solver::grid::build_grid(l, v_max, nx, nv).map_err(|e| bad(&e.to_string()))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != 8 * grid.len() {
        return Err(bad(&format!("expected {} values, found {} bytes", grid.len(), body.len())));
    }
    let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(Checkpoint { field: Field { grid, values, time }, step, dt })
}

/// Checks that a checkpoint fits the grid and step size of a run.
pub fn check_resumable(checkpoint: &Checkpoint, grid: &PhaseGrid, settings: &RunSettings) -> Result<()> {
    if checkpoint.field.grid != *grid {
        return Err(Error::GridMismatch(format!(
            "checkpoint grid {:?} differs from configured grid {:?}",
            checkpoint.field.grid, grid
        )));
    }
    if checkpoint.dt.to_bits() != settings.effective_dt().to_bits() {
        return Err(Error::param(format!(
            "checkpoint step size {} differs from the run's {}",
            checkpoint.dt,
            settings.effective_dt()
        )));
    }
    Ok(())
}
