// Spatial density of `exp(-δ E^{β/2})` by quadrature against its
// large-|x| forms.

use kfp::model::{asymptotic_constant, asymptotic_density, asymptotic_density_corrected, profile_density};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (alpha, beta, delta) = (1.5, 0.5, 1.15);
    println!("C = {:.4}", asymptotic_constant(alpha, beta, delta));
    println!("{:>8} {:>14} {:>10} {:>10}", "x", "quadrature", "leading", "corrected");
    for x in [20.0, 50.0, 200.0, 380.0, 1e3, 1e4] {
        let q = profile_density(x, alpha, beta, delta)?;
        let lead = asymptotic_density(x, alpha, beta, delta) / q - 1.0;
        let corr = asymptotic_density_corrected(x, alpha, beta, delta) / q - 1.0;
        println!("{x:>8} {q:>14.6e} {:>9.2}% {:>9.2}%", 100.0 * lead, 100.0 * corr);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
