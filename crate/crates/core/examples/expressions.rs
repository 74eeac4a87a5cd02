//! Parsing, evaluating and differentiating chart expressions.

use norden::expr::parse;

fn main() -> norden::Result<()> {
    let e = parse("exp(2*(x1^2 - x3^2)) * sin(x2) / x4", 4)?;
    let x = [0.3, -0.2, 0.5, 1.5];
    println!("e        = {e}");
    println!("e(x)     = {}", e.evaluate(&x)?);
    for var in 0..4 {
        let d = e.differentiate(var);
        println!("∂e/∂x{}  = {}  →  {:.12}", var + 1, d, d.evaluate(&x)?);
    }

    // `^` binds tighter than unary minus.
    println!("-x1^2 at x1 = 3: {}", parse("-x1^2", 1)?.evaluate(&[3.0])?);

    for bad in ["x1 +", "y1", "x5", "ln(x1"] {
        match parse(bad, 4) {
            Ok(_) => println!("{bad:8} parsed"),
            Err(err) => println!("{bad:8} → {err}"),
        }
    }
    match parse("ln(x1)", 1)?.evaluate(&[-1.0]) {
        Ok(v) => println!("ln(-1) = {v}"),
        Err(err) => println!("ln(-1) → {err}"),
    }
    Ok(())
}
