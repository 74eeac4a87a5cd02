//! Random Norden points, their Lie forms and Nijenhuis tensors, and the
//! W-class decomposition of the structure tensor.

use norden::pointwise::{
    classify, generate_in_class, lie_forms, nijenhuis_pair, random_point, ClassProjectors, FClass,
    NordenPoint,
};
use norden::{component_norm, tolerance};

fn main() -> norden::Result<()> {
    let pt = random_point(7, 4)?;
    println!("invariants: {:?}", pt.invariant_residuals());
    let forms = lie_forms(&pt)?;
    println!("θ  = {:?}", forms.theta.data());
    println!("θ* = {:?}", forms.theta_star.data());
    let (n, n_tilde) = nijenhuis_pair(&pt)?;
    println!(
        "‖N‖ = {:.4}, ‖Ñ‖ = {:.4}",
        component_norm(&n),
        component_norm(&n_tilde)
    );

    let c = classify(&pt, tolerance::CLASSIFICATION)?;
    println!("F lies in {} with components {:?}", c.label(), c.components);

    let proj = ClassProjectors::new(&pt)?;
    for class in [FClass::W1, FClass::W2, FClass::W3] {
        println!("rank {:6} = {}", class.name(), proj.rank(class));
    }
    println!(
        "‖P1 + P2 + P3 − P_sym‖∞ = {:e}",
        proj.decomposition_residual()
    );

    for class in FClass::ALL {
        let generated = generate_in_class(class, 11, 6)?;
        let label = classify(&generated, tolerance::CLASSIFICATION)?.label();
        println!("generated in {:6} → classified as {label}", class.name());
    }
    println!("{}", serde_json::to_string(&NordenPoint::standard(2))?);
    Ok(())
}
