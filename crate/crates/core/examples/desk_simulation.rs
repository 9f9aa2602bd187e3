// A short run from the default initial datum, printing mass, extrema and
// distance to the energy profile.

use kfp::diagnostics::{l1_distance, mass, reference_profile};
use kfp::model::ModelParams;
use kfp::solver::{build_grid, cfl_timestep, default_initial_condition, Stepper};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = build_grid(50.0, 50.0, 64, 64)?;
    let model = ModelParams::exp(1.5, 0.5)?;
    let dt = cfl_timestep(&grid, &model, 0.5);
    let mut stepper = Stepper::new(grid, &model)?;
    let mut f = default_initial_condition(&grid);
    let reference = reference_profile(&grid, &model, 1.15, true)?;
    let m0 = mass(&f);
    println!("dt = {dt:.3e}, initial mass = {m0:.12}");
    for block in 1..=5 {
        for _ in 0..400 {
            stepper.step(&mut f, dt)?;
        }
        println!(
            "step {:>5}  t = {:.3}  mass drift = {:+.2e}  min = {:.2e}  |f - profile| = {:.4}",
            400 * block,
            f.time,
            mass(&f) / m0 - 1.0,
            f.min(),
            l1_distance(&f, &reference, None)? / m0,
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
