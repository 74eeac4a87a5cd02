//! The four-parameter family of almost complex connections at one point:
//! `∇′J = 0`, the metric derivatives, torsion and the distinguished members.

use norden::component_norm;
use norden::connections::{
    almost_complex_residual, general_point, metric_derivatives, special_residuals, torsion_tensor,
    ConnectionParams,
};
use norden::pointwise::trial_rng;

fn main() -> norden::Result<()> {
    let pt = general_point(&mut trial_rng(3, 0), 6)?;
    let members = [
        ("random", ConnectionParams::new(0.4, -0.3, 0.1, 0.7)),
        ("natural", ConnectionParams::new(0.4, -0.3, -0.4, 0.3)),
        ("canonical", ConnectionParams::CANONICAL),
        ("3-form", ConnectionParams::THREE_FORM),
        ("yano", ConnectionParams::YANO),
    ];
    println!(
        "{:10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "member", "∇′J", "‖T‖", "natural", "canonical", "3-form", "symmetric"
    );
    for (name, params) in members {
        let s = special_residuals(&pt, params)?;
        println!(
            "{name:10} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e} {:>10.2e}",
            almost_complex_residual(&pt, params)?,
            component_norm(&torsion_tensor(&pt, params)?),
            s.natural,
            s.canonical,
            s.three_form,
            s.symmetric,
        );
    }
    let m = metric_derivatives(&pt, ConnectionParams::new(0.2, 0.1, 0.3, -0.5))?;
    println!("∇′g direct vs Ñ form: {:e}", m.lemma_residual());
    Ok(())
}
