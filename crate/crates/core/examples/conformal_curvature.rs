//! A conformally flat W1 chart: closed Lie forms, the curvature of the
//! complex connections and the scalar-curvature relations.

use norden::manifold::{
    curvature_parameter_independence, field_f_theta, prime_curvature, tau_checks,
    validate_conformal_kaehler, verify_w1_theorems, Chart,
};
use norden::{component_norm, Error};

fn main() -> norden::Result<()> {
    let chart = Chart::builtin("conformal4").expect("built-in chart");
    println!("{}", validate_conformal_kaehler(&chart)?.to_text());

    let x = chart.probe_points()[0].clone();
    let field = field_f_theta(&chart, &x)?;
    println!("θ = {:?}", field.theta.data());
    println!(
        "‖dθ‖ = {:e}, ‖dθ*‖ = {:e}",
        component_norm(&field.d_theta),
        component_norm(&field.d_theta_star)
    );

    println!("{}", verify_w1_theorems(&chart, &x, 0.3, -0.2)?.to_text());
    let c = prime_curvature(&chart, &x, 0.3, -0.2)?;
    println!("τ′ = {:.6}, τ′* = {:.6}", c.tau, c.tau_star);
    let spread = curvature_parameter_independence(&chart, &x, (0.0, 0.0), (0.7, -0.4))?;
    println!("R′ for two parameter pairs differs by {spread:e}");

    println!("{}", tau_checks(&chart, &x, 0.0, 0.0)?.to_text());
    let flat = Chart::builtin("flat4").expect("built-in chart");
    match tau_checks(&flat, &flat.probe_points()[0], 0.0, 0.0) {
        Err(Error::Precondition(msg)) => println!("flat chart: {msg}"),
        other => println!("flat chart: {other:?}"),
    }
    Ok(())
}
