//! Tangent-space snapshots `(g, J, F)` and the machinery built on them: Lie
//! forms, `∇J`, the Nijenhuis tensor and its associated tensor, and the
//! W-classes.

mod classes;
mod frame;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{
    args::*, check_complex_structure, check_dim, f_symmetry_residual, inverse, metric_matrix,
    project_f_symmetries, raise_lower, Slot, Tensor,
};
use crate::tolerance;

pub use classes::{
    class_projector, classify, generate_in_class, generate_in_class_with, generate_where,
    w1_structure, BasicClass, ClassProjectors, ClassificationResult, FClass,
};
pub use frame::adapted_frame;

/// Deterministic generator for trial `trial` of a run seeded with `seed`.
///
/// Every trial owns an independent ChaCha stream, so results do not depend on
/// the order in which trials are executed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A tangent space with Norden metric `g`, almost complex structure `J` and
/// structure tensor `F(X,Y,Z) = g((∇_X J)Y, Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointJson", into = "PointJson")]
pub struct NordenPoint {
    g: Tensor,
    j: Tensor,
    f: Tensor,
    g_inv: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct PointJson {
    dim: usize,
    g: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<f64>,
    #[serde(rename = "F")]
    f: Vec<f64>,
}

impl TryFrom<PointJson> for NordenPoint {
    type Error = Error;

    fn try_from(p: PointJson) -> Result<Self> {
        NordenPoint::new(
            Tensor::new(p.dim, vec![Slot::Down; 2], p.g)?,
            Tensor::new(p.dim, vec![Slot::Up, Slot::Down], p.j)?,
            Tensor::new(p.dim, vec![Slot::Down; 3], p.f)?,
        )
    }
}

impl From<NordenPoint> for PointJson {
    fn from(p: NordenPoint) -> Self {
        PointJson {
            dim: p.dim(),
            g: p.g.into_data(),
            j: p.j.into_data(),
            f: p.f.into_data(),
        }
    }
}

/// Residuals of the defining conditions of a [`NordenPoint`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct InvariantResiduals {
    pub j_squared: f64,
    pub norden: f64,
    pub g_symmetry: f64,
    pub f_symmetry: f64,
    /// Number of positive eigenvalues of `g`; must equal `n`.
    pub positive_eigenvalues: usize,
}

impl InvariantResiduals {
    pub fn max_residual(&self) -> f64 {
        self.j_squared
            .max(self.norden)
            .max(self.g_symmetry)
            .max(self.f_symmetry)
    }
}

/// The standard pair: `J0 ∂x_i = ∂y_i`, `J0 ∂y_i = −∂x_i`, `g0 = diag(I_n, −I_n)`.
pub fn standard_pair(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = 2 * n;
    let g0 = DMatrix::from_fn(d, d, |i, j| match (i == j, i < n) {
        (true, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    });
    let j0 = DMatrix::from_fn(d, d, |a, b| {
        if b < n && a == b + n {
            1.0
        } else if a < n && b == a + n {
            -1.0
        } else {
            0.0
        }
    });
    (g0, j0)
}

impl NordenPoint {
    /// Validates the structural invariants and builds the point.
    pub fn new(g: Tensor, j: Tensor, f: Tensor) -> Result<Self> {
        let dim = g.dim();
        check_dim(dim)?;
        if j.dim() != dim || f.dim() != dim {
            return Err(Error::Structural("g, J and F dimensions differ".into()));
        }
        if f.rank() != 3 || !f.is_covariant() {
            return Err(Error::Structural("F must be a (0,3) tensor".into()));
        }
        let gm = metric_matrix(&g)?;
        check_complex_structure(&j)?;
        let g_inv = inverse(&gm)?;
        let point = Self { g, j, f, g_inv };
        let r = point.invariant_residuals();
        let gscale = gm.amax().max(1.0);
        let jscale = point.j.max_abs().max(1.0);
        if r.norden > tolerance::STRUCTURAL * gscale * jscale * jscale {
            return Err(Error::Structural(format!(
                "g(JX,JY) ≠ −g(X,Y) (residual {:e})",
                r.norden
            )));
        }
        if r.positive_eigenvalues != dim / 2 {
            return Err(Error::Structural(format!(
                "metric signature is not neutral ({} positive eigenvalues in dimension {dim})",
                r.positive_eigenvalues
            )));
        }
        let fscale = point.f.max_abs().max(1.0) * jscale * jscale;
        if r.f_symmetry > tolerance::STRUCTURAL * fscale {
            return Err(Error::Structural(format!(
                "F violates F(X,Y,Z) = F(X,Z,Y) = F(X,JY,JZ) (residual {:e})",
                r.f_symmetry
            )));
        }
        Ok(point)
    }

    /// The flat standard pair with `F = 0`.
    pub fn standard(n: usize) -> Self {
        let (g0, j0) = standard_pair(n);
        Self::from_matrices(&g0, &j0, Tensor::zeros(2 * n, vec![Slot::Down; 3]))
            .expect("standard pair is valid")
    }

    fn from_matrices(g: &DMatrix<f64>, j: &DMatrix<f64>, f: Tensor) -> Result<Self> {
        Self::new(
            Tensor::from_matrix(g, [Slot::Down, Slot::Down]),
            Tensor::from_matrix(j, [Slot::Up, Slot::Down]),
            f,
        )
    }

    /// Pushes the standard pair forward by `frame`: `J = P J0 P⁻¹`,
    /// `g = P⁻ᵀ g0 P⁻¹`.
    pub fn from_frame(frame: &DMatrix<f64>, f: Tensor) -> Result<Self> {
        let d = frame.nrows();
        check_dim(d)?;
        let (g0, j0) = standard_pair(d / 2);
        let p_inv = frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("frame is singular".into()))?;
        let g = p_inv.transpose() * g0 * &p_inv;
        let g = (&g + g.transpose()) * 0.5;
        let j = frame * j0 * p_inv;
        Self::from_matrices(&g, &j, f)
    }

    /// Same `(g, J)` with a different structure tensor.
    pub fn with_f(&self, f: Tensor) -> Result<Self> {
        Self::new(self.g.clone(), self.j.clone(), f)
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Half the dimension.
    pub fn n(&self) -> usize {
        self.dim() / 2
    }

    pub fn g(&self) -> &Tensor {
        &self.g
    }

    pub fn j(&self) -> &Tensor {
        &self.j
    }

    pub fn f(&self) -> &Tensor {
        &self.f
    }

    pub fn g_inverse(&self) -> &DMatrix<f64> {
        &self.g_inv
    }

    /// The associated metric `g̃(X,Y) = g(X,JY)`.
    pub fn g_tilde(&self) -> Tensor {
        self.g.twist(1, &self.j)
    }

    pub fn invariant_residuals(&self) -> InvariantResiduals {
        let d = self.dim();
        let gm = self.g.to_matrix();
        let jm = self.j.to_matrix();
        let j_squared = (&jm * &jm + DMatrix::<f64>::identity(d, d)).amax();
        let norden = (jm.transpose() * &gm * &jm + &gm).amax();
        let g_symmetry = (&gm - gm.transpose()).amax();
        let eig = nalgebra::SymmetricEigen::new((&gm + gm.transpose()) * 0.5);
        let positive_eigenvalues = eig.eigenvalues.iter().filter(|v| **v > 0.0).count();
        InvariantResiduals {
            j_squared,
            norden,
            g_symmetry,
            f_symmetry: f_symmetry_residual(&self.f, &self.j),
            positive_eigenvalues,
        }
    }
}

/// `I + 0.3·U(−1,1)` entrywise, redrawn while the condition number exceeds 100.
fn random_frame(rng: &mut ChaCha8Rng, dim: usize) -> Result<DMatrix<f64>> {
    for _ in 0..100 {
        let p = DMatrix::from_fn(dim, dim, |i, j| {
            let noise = 0.3 * rng.gen_range(-1.0..1.0);
            if i == j {
                1.0 + noise
            } else {
                noise
            }
        });
        let sv = p.singular_values();
        let (max, min) = (sv.max(), sv.min());
        if min > 0.0 && max / min <= tolerance::MAX_FRAME_CONDITION {
            return Ok(p);
        }
    }
    Err(Error::Generation(
        "no frame with condition number ≤ 100 after 100 draws".into(),
    ))
}

/// Random point driven by an explicit generator.
pub fn random_point_with(rng: &mut ChaCha8Rng, dim: usize) -> Result<NordenPoint> {
    check_dim(dim)?;
    if dim < 4 {
        return Err(Error::Structural(format!(
            "random points need dimension ≥ 4, got {dim}"
        )));
    }
    let frame = random_frame(rng, dim)?;
    let base = NordenPoint::from_frame(&frame, Tensor::zeros(dim, vec![Slot::Down; 3]))?;
    let raw = Tensor::from_fn(dim, vec![Slot::Down; 3], |_| rng.gen_range(-1.0..1.0));
    base.with_f(project_f_symmetries(&raw, base.j())?)
}

/// A random point: the standard pair pushed forward by a random frame with
/// condition number at most 100, and a random `F` with the required
/// symmetries.
pub fn random_point(seed: u64, dim: usize) -> Result<NordenPoint> {
    random_point_with(&mut trial_rng(seed, 0), dim)
}

/// The Lie 1-forms and the Lie vector of a point.
#[derive(Clone, Debug)]
pub struct LieForms {
    /// `θ(z) = g^{ij} F(e_i, e_j, z)`
    pub theta: Tensor,
    /// `θ* = θ ∘ J`
    pub theta_star: Tensor,
    /// `Ω` with `g(z, Ω) = θ(z)`
    pub omega: Tensor,
}

pub fn lie_forms(pt: &NordenPoint) -> Result<LieForms> {
    let d = pt.dim();
    let gi = pt.g_inverse();
    let f = pt.f();
    let theta = Tensor::from_fn(d, vec![Slot::Down], |z| {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += gi[(i, j)] * f.get(&[i, j, z[0]]);
            }
        }
        acc
    });
    let theta_star = theta.twist(0, pt.j());
    let omega = raise_lower(&theta, 0, pt.g(), Slot::Up)?;
    Ok(LieForms {
        theta,
        theta_star,
        omega,
    })
}

/// `(∇_X J)Y` as a tensor with valence `[Down, Down, Up]`.
pub fn nabla_j(pt: &NordenPoint) -> Result<Tensor> {
    raise_lower(pt.f(), 2, pt.g(), Slot::Up)
}

/// The Nijenhuis tensor `N` and its associated tensor `Ñ`, both lowered to
/// `(0,3)` with `g` in the last slot.
pub fn nijenhuis_pair(pt: &NordenPoint) -> Result<(Tensor, Tensor)> {
    let a = nabla_j(pt)?;
    let j = pt.j();
    // (∇_X J)JY and (∇_{JX} J)Y, with the output slot left untouched.
    let a_jy = a.twist(1, j);
    let a_jx = a.twist(0, j);
    let a_y_jx = a_jy.permute(&[1, 0, 2]);
    let a_jy_x = a_jx.permute(&[1, 0, 2]);
    let n = &(&a_jy - &a_y_jx) + &(&a_jx - &a_jy_x);
    let n_tilde = &(&a_jy + &a_y_jx) + &(&a_jx + &a_jy_x);
    Ok((
        raise_lower(&n, 2, pt.g(), Slot::Down)?,
        raise_lower(&n_tilde, 2, pt.g(), Slot::Down)?,
    ))
}

/// `F(X,Y,Z) + F(Y,Z,X) + F(Z,X,Y)`, which vanishes exactly on W3.
pub fn cyclic_sum(f: &Tensor, j: &Tensor) -> Tensor {
    &(&f.at(j, &[X, Y, Z]) + &f.at(j, &[Y, Z, X])) + &f.at(j, &[Z, X, Y])
}

/// `F(X,Y,JZ) + F(Y,Z,JX) + F(Z,X,JY)`, which vanishes exactly on W1⊕W2.
pub fn cyclic_sum_twisted(f: &Tensor, j: &Tensor) -> Tensor {
    &(&f.at(j, &[X, Y, JZ]) + &f.at(j, &[Y, Z, JX])) + &f.at(j, &[Z, X, JY])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::component_norm;

    #[test]
    fn random_points_satisfy_invariants() {
        for seed in 0..20 {
            for dim in [4, 6] {
                let pt = random_point(seed, dim).unwrap();
                let r = pt.invariant_residuals();
                assert!(r.max_residual() < 1e-10, "seed {seed}: {r:?}");
                assert_eq!(r.positive_eigenvalues, dim / 2);
            }
        }
    }

    #[test]
    fn identity_frame_gives_standard_pair() {
        let pt = NordenPoint::from_frame(
            &DMatrix::identity(4, 4),
            Tensor::zeros(4, vec![Slot::Down; 3]),
        )
        .unwrap();
        assert_eq!(pt, NordenPoint::standard(2));
        let (g0, j0) = standard_pair(2);
        assert_eq!(pt.g().to_matrix(), g0);
        assert_eq!(pt.j().to_matrix(), j0);
    }

    #[test]
    fn random_point_is_deterministic() {
        let a = random_point(42, 6).unwrap();
        let b = random_point(42, 6).unwrap();
        assert_eq!(a.f().data(), b.f().data());
        assert_eq!(a.g().data(), b.g().data());
        assert_ne!(random_point(43, 6).unwrap().f().data(), a.f().data());
    }

    #[test]
    fn rejects_odd_or_small_dimensions() {
        assert!(random_point(1, 3).is_err());
        assert!(random_point(1, 2).is_err());
    }

    #[test]
    fn rejects_incompatible_metric() {
        let pt = NordenPoint::standard(2);
        let g = Tensor::from_matrix(&DMatrix::identity(4, 4), [Slot::Down, Slot::Down]);
        assert!(NordenPoint::new(g, pt.j().clone(), pt.f().clone()).is_err());
    }

    #[test]
    fn zero_f_gives_zero_forms_and_tensors() {
        let pt = NordenPoint::standard(3);
        let forms = lie_forms(&pt).unwrap();
        assert_eq!(component_norm(&forms.theta), 0.0);
        assert_eq!(component_norm(&forms.theta_star), 0.0);
        assert_eq!(component_norm(&forms.omega), 0.0);
        assert_eq!(component_norm(&nabla_j(&pt).unwrap()), 0.0);
        let (n, nt) = nijenhuis_pair(&pt).unwrap();
        assert_eq!(component_norm(&n) + component_norm(&nt), 0.0);
    }

    #[test]
    fn lie_vector_represents_theta() {
        let pt = random_point(7, 4).unwrap();
        let forms = lie_forms(&pt).unwrap();
        let mut rng = trial_rng(7, 1);
        for _ in 0..20 {
            let z: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let gm = pt.g().to_matrix();
            let mut g_z_omega = 0.0;
            let mut theta_z = 0.0;
            for a in 0..4 {
                theta_z += forms.theta.get(&[a]) * z[a];
                for b in 0..4 {
                    g_z_omega += z[a] * gm[(a, b)] * forms.omega.get(&[b]);
                }
            }
            assert!((g_z_omega - theta_z).abs() < 1e-10);
        }
        let jm = pt.j().to_matrix();
        for z in 0..4 {
            let composed: f64 = (0..4).map(|a| forms.theta.get(&[a]) * jm[(a, z)]).sum();
            assert_eq!(forms.theta_star.get(&[z]), composed);
        }
    }

    #[test]
    fn nabla_j_lowers_back_to_f() {
        let pt = random_point(3, 4).unwrap();
        let a = nabla_j(&pt).unwrap();
        let gm = pt.g().to_matrix();
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    let lowered: f64 = (0..4).map(|k| a.get(&[x, y, k]) * gm[(k, z)]).sum();
                    assert!((lowered - pt.f().get(&[x, y, z])).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn nijenhuis_symmetries() {
        for seed in 0..5 {
            let pt = random_point(seed, 6).unwrap();
            let (n, nt) = nijenhuis_pair(&pt).unwrap();
            assert!(component_norm(&(&n + &n.permute(&[1, 0, 2]))) < 1e-12);
            assert!(component_norm(&(&nt - &nt.permute(&[1, 0, 2]))) < 1e-12);
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let pt = random_point(5, 4).unwrap();
        let text = serde_json::to_string(&pt).unwrap();
        assert!(text.starts_with("{\"dim\":4,\"g\":["));
        let back: NordenPoint = serde_json::from_str(&text).unwrap();
        assert_eq!(back, pt);
    }

    #[test]
    fn json_with_broken_invariants_is_rejected() {
        let pt = random_point(5, 4).unwrap();
        let mut value = serde_json::to_value(&pt).unwrap();
        value["F"][1] = serde_json::json!(123.0);
        assert!(serde_json::from_value::<NordenPoint>(value).is_err());
    }
}
