// Closed-form model quantities at a few points.

use kfp::model::{jbracket, LstarTarget, Lyapunov, LyapunovSpec, ModelParams, PointEval, WeightMode};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let model = ModelParams::exp(1.5, 0.5)?;
    println!("<3> = {:.8}", jbracket(&[3.0]));
    println!("V(0) = {:.6}, V'(1) = {:.6}", model.potential(&[0.0]), model.grad_potential(&[1.0])[0]);
    println!("M(0) = {:.6}, drift(1) = {:.6}", model.equilibrium_density(&[0.0]), model.equilibrium_drift(&[1.0])[0]);

    let spec =
        LyapunovSpec { ell: 2.0, eps: 0.3, a_exp: 0.75, b_exp: 0.5, mode: WeightMode::Exp { theta: 0.25, delta: 2.0 } };
    let lyap = Lyapunov::new(&model, &spec)?;
    for (x, v) in [(0.0, 0.0), (1.0, 1.0), (10.0, -3.0)] {
        let p = PointEval::one_d(x, v);
        println!(
            "(x, v) = ({x}, {v}): E = {:.4}  H = {:.4}  L*H = {:.4}  L*m/m = {:.4}",
            model.energy(&p),
            lyap.h(&p),
            lyap.lstar(&p, LstarTarget::FullH),
            lyap.lstar(&p, LstarTarget::WeightM) / lyap.weight(&p),
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
