use super::{Expr, Func};

impl Expr {
    /// Exact symbolic partial derivative with respect to `Var(var)`.
    pub fn differentiate(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(i) => Expr::Const(if *i == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => Expr::sum(a.differentiate(var), b.differentiate(var)),
            Expr::Sub(a, b) => Expr::difference(a.differentiate(var), b.differentiate(var)),
            Expr::Mul(a, b) => Expr::sum(
                Expr::product(a.differentiate(var), (**b).clone()),
                Expr::product((**a).clone(), b.differentiate(var)),
            ),
            Expr::Div(a, b) => {
                let num = Expr::difference(
                    Expr::product(a.differentiate(var), (**b).clone()),
                    Expr::product((**a).clone(), b.differentiate(var)),
                );
                Expr::quotient(num, Expr::power((**b).clone(), 2))
            }
            Expr::Pow(a, n) => Expr::product(
                Expr::product(Expr::Const(*n as f64), Expr::power((**a).clone(), n - 1)),
                a.differentiate(var),
            ),
            Expr::Neg(a) => Expr::negate(a.differentiate(var)),
            Expr::Func(f, a) => {
                let inner = a.differentiate(var);
                if inner.is_zero() {
                    return Expr::Const(0.0);
                }
                let outer = match f {
                    Func::Sin => Expr::apply(Func::Cos, (**a).clone()),
                    Func::Cos => Expr::negate(Expr::apply(Func::Sin, (**a).clone())),
                    Func::Exp => self.clone(),
                    Func::Ln => return Expr::quotient(inner, (**a).clone()),
                };
                Expr::product(outer, inner)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse;

    #[test]
    fn polynomial_and_constant() {
        let e = parse("x1^2 - x2^2", 2).unwrap();
        let d = e.differentiate(0);
        for x in [-1.5, 0.0, 0.3, 2.0] {
            assert_eq!(d.evaluate(&[x, 0.7]).unwrap(), 2.0 * x);
        }
        assert!(parse("4.5", 2).unwrap().differentiate(0).is_zero());
        assert!(parse("x2^3", 2).unwrap().differentiate(0).is_zero());
    }

    #[test]
    fn elementary_functions() {
        let cases: [(&str, fn(f64) -> f64); 6] = [
            ("sin(x1)", |x: f64| x.cos()),
            ("cos(x1)", |x: f64| -x.sin()),
            ("exp(3*x1)", |x: f64| 3.0 * (3.0 * x).exp()),
            ("ln(x1)", |x: f64| 1.0 / x),
            ("1/x1", |x: f64| -1.0 / (x * x)),
            ("x1^-2", |x: f64| -2.0 / (x * x * x)),
        ];
        for (text, exact) in cases {
            let d = parse(text, 1).unwrap().differentiate(0);
            for x in [0.4, 1.1, 2.5] {
                let got = d.evaluate(&[x]).unwrap();
                assert!((got - exact(x)).abs() < 1e-13, "{text} at {x}: {got}");
            }
        }
    }
}
