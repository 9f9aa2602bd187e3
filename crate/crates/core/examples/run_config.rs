// Builds a run from a TOML configuration, as the `kfp` binary does.

use kfp::config::parse_config;
use kfp::solver::{default_initial_condition, run, Start, Stepper};

const CONFIG: &str = r#"
[model]
alpha = 1.5
kind = "exp"
beta = 0.5

[grid]
L = 20.0
v_max = 20.0
Nx = 32
Nv = 32

[time]
t_final = 2.0
dt = "auto"
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let config = parse_config(CONFIG)?;
    let params = config.model_params()?;
    let grid = config.phase_grid()?;
    let settings = config.run_settings()?;
    println!("{} steps of {:.4e}", settings.steps(), settings.effective_dt());
    let mut stepper = Stepper::new(grid, &params)?;
    let f = run(&mut stepper, &settings, default_initial_condition(&grid), Start::default(), &mut ())?;
    println!("t = {}  max f = {:.6}", f.time, f.max());

    match parse_config("[model]\nalpha = 0.9\nkind = \"exp\"\nbeta = 0.5\n[grid]\nNx = 3\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => println!("unexpectedly accepted"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
