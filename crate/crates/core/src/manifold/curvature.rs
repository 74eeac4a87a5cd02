use nalgebra::DMatrix;

use crate::tensor::{component_norm, Slot, Tensor};

/// `ψ1(S)(X,Y,Z,W) = g(Y,Z)S(X,W) − g(X,Z)S(Y,W) + g(X,W)S(Y,Z) − g(Y,W)S(X,Z)`
pub fn psi1(s: &Tensor, g: &Tensor) -> Tensor {
    Tensor::from_fn(g.dim(), vec![Slot::Down; 4], |i| {
        let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
        g.get(&[y, z]) * s.get(&[x, w]) - g.get(&[x, z]) * s.get(&[y, w])
            + g.get(&[x, w]) * s.get(&[y, z])
            - g.get(&[y, w]) * s.get(&[x, z])
    })
}

/// `ψ2(S)(X,Y,Z,W) = g(Y,JZ)S(X,JW) − g(X,JZ)S(Y,JW) + g(X,JW)S(Y,JZ) − g(Y,JW)S(X,JZ)`
pub fn psi2(s: &Tensor, g: &Tensor, j: &Tensor) -> Tensor {
    psi1(&s.twist(1, j), &g.twist(1, j))
}

/// The tensors `ψ1(S)`, `ψ2(S)` and `π1 = ½ψ1(g)`, `π2 = ½ψ2(g)`,
/// `π3 = −ψ1(g̃)`.
#[derive(Clone, Debug)]
pub struct PsiPi {
    pub psi1: Tensor,
    pub psi2: Tensor,
    pub pi1: Tensor,
    pub pi2: Tensor,
    pub pi3: Tensor,
}

pub fn psi_pi_tensors(s: &Tensor, g: &Tensor, j: &Tensor) -> PsiPi {
    PsiPi {
        psi1: psi1(s, g),
        psi2: psi2(s, g, j),
        pi1: psi1(g, g).scale(0.5),
        pi2: psi2(g, g, j).scale(0.5),
        pi3: -&psi1(&g.twist(1, j), g),
    }
}

/// Largest of the residuals of `L(X,Y,Z,W) = −L(Y,X,Z,W) = −L(X,Y,W,Z)` and
/// the first Bianchi identity.
pub fn curvature_like_residual(l: &Tensor) -> f64 {
    let a = component_norm(&(l + &l.permute(&[1, 0, 2, 3])));
    let b = component_norm(&(l + &l.permute(&[0, 1, 3, 2])));
    // L(Y,Z,X,W) at (x,y,z,w) reads slot order (1,2,0,3).
    let bianchi = &(l + &l.permute(&[1, 2, 0, 3])) + &l.permute(&[2, 0, 1, 3]);
    a.max(b).max(component_norm(&bianchi))
}

/// `‖L(X,Y,JZ,JW) + L(X,Y,Z,W)‖`
pub fn kaehler_residual(l: &Tensor, j: &Tensor) -> f64 {
    component_norm(&(&l.twist(2, j).twist(3, j) + l))
}

/// Ricci tensor `ρ(y,z) = g^{ij} L(e_i, y, z, e_j)` and the scalar
/// curvatures `τ = g^{ij} ρ_ij`, `τ* = g^{ij} ρ(e_i, J e_j)`.
pub fn ricci_and_scalars(l: &Tensor, g_inv: &DMatrix<f64>, j: &DMatrix<f64>) -> (Tensor, f64, f64) {
    let d = l.dim();
    let rho = Tensor::from_fn(d, vec![Slot::Down; 2], |ix| {
        let mut acc = 0.0;
        for a in 0..d {
            for b in 0..d {
                acc += g_inv[(a, b)] * l.get(&[a, ix[0], ix[1], b]);
            }
        }
        acc
    });
    let mut tau = 0.0;
    let mut tau_star = 0.0;
    for a in 0..d {
        for b in 0..d {
            tau += g_inv[(a, b)] * rho.get(&[a, b]);
            for c in 0..d {
                tau_star += g_inv[(a, b)] * rho.get(&[a, c]) * j[(c, b)];
            }
        }
    }
    (rho, tau, tau_star)
}
