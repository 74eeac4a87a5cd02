//! First-order forward-mode values: a number together with its gradient in
//! the chart coordinates.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

/// Largest chart dimension supported by [`Jet`].
pub const MAX_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: [f64; MAX_DIM],
}

impl Jet {
    pub const ZERO: Jet = Jet {
        value: 0.0,
        grad: [0.0; MAX_DIM],
    };

    pub fn constant(value: f64) -> Self {
        Jet {
            value,
            ..Self::ZERO
        }
    }

    pub fn new(value: f64, grad: &[f64]) -> Self {
        let mut g = [0.0; MAX_DIM];
        g[..grad.len()].copy_from_slice(grad);
        Jet { value, grad: g }
    }

    pub fn scale(self, c: f64) -> Self {
        let mut out = self;
        out.value *= c;
        out.grad.iter_mut().for_each(|v| *v *= c);
        out
    }

    pub fn d(&self, var: usize) -> f64 {
        self.grad[var]
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self += rhs;
        self
    }
}

impl AddAssign for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(rhs.grad) {
            *a += b;
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self -= rhs;
        self
    }
}

impl SubAssign for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(rhs.grad) {
            *a -= b;
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let mut grad = [0.0; MAX_DIM];
        for (k, g) in grad.iter_mut().enumerate() {
            *g = self.grad[k] * rhs.value + self.value * rhs.grad[k];
        }
        Jet {
            value: self.value * rhs.value,
            grad,
        }
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

impl std::iter::Sum for Jet {
    fn sum<I: Iterator<Item = Jet>>(iter: I) -> Jet {
        iter.fold(Jet::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Jet::new(2.0, &[1.0, 0.0]);
        let y = Jet::new(3.0, &[0.0, 1.0]);
        let f = x * x * y - 2.0 * y;
        assert_eq!(f.value, 6.0);
        assert_eq!(f.d(0), 12.0);
        assert_eq!(f.d(1), 2.0);
    }
}
