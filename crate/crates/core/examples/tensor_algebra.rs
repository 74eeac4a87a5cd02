//! Index gymnastics on the standard Norden pair: raising and lowering with an
//! indefinite metric, inserting `J` into a slot, and contraction.

use norden::pointwise::NordenPoint;
use norden::tensor::{args::*, contract, raise_lower};
use norden::{component_norm, Slot, Tensor};

fn main() -> norden::Result<()> {
    let pt = NordenPoint::standard(2);
    let (g, j) = (pt.g(), pt.j());

    let v = Tensor::vector(&[1.0, 2.0, 3.0, 4.0]);
    let v_flat = raise_lower(&v, 0, g, Slot::Down)?;
    println!("v = {:?}, v♭ = {:?}", v.data(), v_flat.data());
    println!(
        "g(v, v) = {}",
        v_flat.dot(&v.clone().with_valence(vec![Slot::Down]))
    );

    // g(JX, JY) = −g(X, Y) and g̃(X, Y) = g(X, JY) is symmetric.
    let twisted = g.twist(0, j).twist(1, j);
    println!("‖g(J·,J·) + g‖ = {:e}", component_norm(&(&twisted + g)));
    let g_tilde = pt.g_tilde();
    println!(
        "‖g̃ − g̃ᵀ‖ = {:e}",
        g_tilde.max_abs_diff(&g_tilde.permute(&[1, 0]))
    );

    // Trace of J: contract its two slots through the identity.
    let trace = contract(j, &Tensor::identity(4), &[(0, 1), (1, 0)])?;
    println!("tr J = {}", trace.data()[0]);

    // Argument specs evaluate slot permutations with J inserted.
    let f = Tensor::from_fn(4, vec![Slot::Down; 3], |i| {
        (i[0] + 2 * i[1] + 3 * i[2]) as f64
    });
    let swapped = f.at(j, &[X, JZ, Y]);
    println!("F(X,JZ,Y) at (0,1,2) = {}", swapped.get(&[0, 1, 2]));
    Ok(())
}
