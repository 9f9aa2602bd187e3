// Relaxes a coarse grid to its numerical steady state and compares the
// energy-profile dispersion with that of the initial datum.

use kfp::diagnostics::{energy_scatter, mass};
use kfp::model::ModelParams;
use kfp::solver::{
    build_grid, cfl_timestep, default_initial_condition, steady_state_reference, SteadyOptions, Stepper,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = build_grid(12.0, 12.0, 32, 32)?;
    let model = ModelParams::exp(1.5, 0.5)?;
    let mut stepper = Stepper::new(grid, &model)?;
    let f0 = default_initial_condition(&grid);
    let opts = SteadyOptions { tol_rate: 1e-7, ..SteadyOptions::new(cfl_timestep(&grid, &model, 0.5)) };
    let steady = steady_state_reference(&mut stepper, f0.clone(), &opts)?;
    println!("steady after {} steps (t = {:.2}), rate {:.2e}", steady.steps, steady.field.time, steady.rate);
    println!("mass {:.12} -> {:.12}", mass(&f0), mass(&steady.field));
    let before = energy_scatter(&f0, &model).dispersion;
    let after = energy_scatter(&steady.field, &model).dispersion;
    println!("energy dispersion {before:.3} -> {after:.4}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
