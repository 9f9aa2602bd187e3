// Scans the drift inequality for an exponential weight, then searches a
// coarse parameter grid for a polynomial one.

use kfp::lyapunov::{exp_weight_spec, scan_drift_inequality, search_admissible, ScanConfig, SearchGrid};
use kfp::model::{LyapunovSpec, ModelParams, WeightMode};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScanConfig { samples_per_axis: 129, ..ScanConfig::default() };

    let model = ModelParams::exp(1.5, 0.5)?;
    let spec = exp_weight_spec(1.5, 0.5, 0.5, 0.3, 0.25, 2.0);
    let report = scan_drift_inequality(&model, &spec, &cfg)?;
    println!("exp weight:  {}", report.summary());

    let degenerate = LyapunovSpec { eps: 0.0, ..spec };
    println!("no cross term: {}", scan_drift_inequality(&model, &degenerate, &cfg)?.summary());

    let model = ModelParams::poly(2.0, 2.0)?;
    let template = LyapunovSpec { ell: 1.75, eps: 0.0, a_exp: 0.0, b_exp: 0.5, mode: WeightMode::Poly { k: 1.5 } };
    match search_admissible(&model, &template, &SearchGrid::default(), &cfg)? {
        Some(r) => println!(
            "poly weight: {} with eps={} A={} B={}",
            r.summary(),
            r.spec_echo.eps,
            r.spec_echo.a_exp,
            r.spec_echo.b_exp
        ),
        None => println!("poly weight: nothing on the grid passes"),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
