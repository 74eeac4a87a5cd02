//! The four-parameter family of almost complex connections `∇′ = ∇ + Q`,
//! their torsion, and the natural, canonical, 3-form and symmetric members.

mod table1;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointwise::{nabla_j, nijenhuis_pair, random_point_with, NordenPoint};
use crate::tensor::{args::*, component_norm, raise_lower, Slot, Tensor};
use crate::tolerance;

pub use table1::{table1_matrix, ConnectionType, Table1, Table1Cell, Table1Column};

/// `(t1, t2, t3, t4)`. On W1⊕W2 only `p = t1 + t3`, `q = t2 + t4` matter;
/// on W3 only `s = t1 − t3`, `t = t2 − t4`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConnectionParams {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl ConnectionParams {
    pub const fn new(t1: f64, t2: f64, t3: f64, t4: f64) -> Self {
        Self { t1, t2, t3, t4 }
    }

    /// The member `(p, q, 0, 0)`.
    pub const fn from_pq(p: f64, q: f64) -> Self {
        Self::new(p, q, 0.0, 0.0)
    }

    pub const CANONICAL: Self = Self::new(0.0, 0.125, 0.0, -0.125);
    pub const THREE_FORM: Self = Self::new(0.0, 0.0, 0.0, 0.25);
    pub const YANO: Self = Self::new(0.0, 0.25, 0.0, 0.0);

    pub fn as_array(&self) -> [f64; 4] {
        [self.t1, self.t2, self.t3, self.t4]
    }

    pub fn from_array([t1, t2, t3, t4]: [f64; 4]) -> Self {
        Self::new(t1, t2, t3, t4)
    }

    pub fn p(&self) -> f64 {
        self.t1 + self.t3
    }

    pub fn q(&self) -> f64 {
        self.t2 + self.t4
    }

    pub fn s(&self) -> f64 {
        self.t1 - self.t3
    }

    pub fn t(&self) -> f64 {
        self.t2 - self.t4
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }

    /// `t1 = −t3` and `t2 = −t4`.
    pub fn is_natural(&self) -> bool {
        self.p() == 0.0 && self.q() == 0.0
    }

    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        Self::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
    }
}

impl std::fmt::Display for ConnectionParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.t1, self.t2, self.t3, self.t4)
    }
}

/// Axis values of the parameter grid: five equally spaced points on
/// `[−1, 1]` plus `±1/8` and `±1/4`.
pub const GRID_VALUES: [f64; 9] = [-1.0, -0.5, 0.0, 0.5, 1.0, 0.125, -0.125, 0.25, -0.25];

/// The full `9⁴` parameter grid.
pub fn parameter_grid() -> Vec<ConnectionParams> {
    let mut out = Vec::with_capacity(GRID_VALUES.len().pow(4));
    for &t1 in &GRID_VALUES {
        for &t2 in &GRID_VALUES {
            for &t3 in &GRID_VALUES {
                for &t4 in &GRID_VALUES {
                    out.push(ConnectionParams::new(t1, t2, t3, t4));
                }
            }
        }
    }
    out
}

/// `Q(X,Y,Z) = g(∇′_X Y − ∇_X Y, Z)`.
pub fn difference_tensor(pt: &NordenPoint, params: ConnectionParams) -> Tensor {
    let (f, j) = (pt.f(), pt.j());
    let ConnectionParams { t1, t2, t3, t4 } = params;
    let mut q = f.at(j, &[X, JY, Z]).scale(0.5);
    let terms = [
        (t1, &f.at(j, &[Y, X, Z]) + &f.at(j, &[JY, JX, Z])),
        (t2, &f.at(j, &[Y, JX, Z]) - &f.at(j, &[JY, X, Z])),
        (t3, (&f.at(j, &[Z, X, Y]) + &f.at(j, &[JZ, JX, Y]))),
        (t4, (&f.at(j, &[Z, JX, Y]) - &f.at(j, &[JZ, X, Y]))),
    ];
    for (t, term) in terms {
        if t != 0.0 {
            q = q.axpy(t, &term);
        }
    }
    q
}

/// `(∇′_X J)Y = (∇_X J)Y + Q(X,JY)♯ − J Q(X,Y)♯` for an arbitrary
/// difference tensor `q`, valence `[Down, Down, Up]`.
pub fn almost_complex_defect(pt: &NordenPoint, q: &Tensor) -> Result<Tensor> {
    let q_sharp = raise_lower(q, 2, pt.g(), Slot::Up)?;
    let a = nabla_j(pt)?;
    Ok(&(&a + &q_sharp.twist(1, pt.j())) - &q_sharp.twist(2, pt.j()))
}

/// Component norm of `∇′J`.
pub fn almost_complex_residual(pt: &NordenPoint, params: ConnectionParams) -> Result<f64> {
    Ok(component_norm(&almost_complex_defect(
        pt,
        &difference_tensor(pt, params),
    )?))
}

/// `T(X,Y,Z) = Q(X,Y,Z) − Q(Y,X,Z)`.
pub fn torsion_from_difference(q: &Tensor) -> Tensor {
    q - &q.permute(&[1, 0, 2])
}

/// Torsion written directly in terms of `F`.
pub fn torsion_closed_form(pt: &NordenPoint, params: ConnectionParams) -> Tensor {
    let (f, j) = (pt.f(), pt.j());
    let ConnectionParams { t1, t2, t3, t4 } = params;
    let a = &(&f.at(j, &[Y, X, Z]) - &f.at(j, &[X, Y, Z]))
        + &(&f.at(j, &[JY, JX, Z]) - &f.at(j, &[JX, JY, Z]));
    let b = &f.at(j, &[X, JY, Z]) - &f.at(j, &[Y, JX, Z]);
    let c = &f.at(j, &[JX, Y, Z]) - &f.at(j, &[JY, X, Z]);
    a.scale(t1)
        .axpy(0.5 - t2, &b)
        .axpy(t2, &c)
        .axpy(2.0 * t3, &f.at(j, &[JZ, JX, Y]))
        .axpy(2.0 * t4, &f.at(j, &[Z, JX, Y]))
}

fn consistency(check: &str, residual: f64, scale: f64) -> Result<()> {
    let tolerance = tolerance::STRUCTURAL * scale.max(1.0);
    if residual > tolerance {
        return Err(Error::Consistency {
            check: check.into(),
            residual,
            tolerance,
        });
    }
    Ok(())
}

fn param_scale(params: ConnectionParams) -> f64 {
    1.0 + params.as_array().iter().map(|v| v.abs()).sum::<f64>()
}

/// The torsion tensor, cross-checked between the closed form and the
/// antisymmetrized difference tensor.
pub fn torsion_tensor(pt: &NordenPoint, params: ConnectionParams) -> Result<Tensor> {
    let closed = torsion_closed_form(pt, params);
    let direct = torsion_from_difference(&difference_tensor(pt, params));
    consistency(
        "torsion closed form",
        component_norm(&(&closed - &direct)),
        component_norm(pt.f()) * param_scale(params),
    )?;
    Ok(closed)
}

#[derive(Clone, Debug)]
pub struct MetricDerivatives {
    /// `(∇′_X g)(Y,Z) = −Q(X,Y,Z) − Q(X,Z,Y)`
    pub nabla_g: Tensor,
    /// `(∇′_X g̃)(Y,Z) = F(X,Z,Y) − Q(X,Y,JZ) − Q(X,Z,JY)`
    pub nabla_g_tilde: Tensor,
    /// The same two tensors written through `Ñ`.
    pub nabla_g_from_n: Tensor,
    pub nabla_g_tilde_from_n: Tensor,
}

impl MetricDerivatives {
    /// Largest disagreement between the direct and the `Ñ` forms.
    pub fn lemma_residual(&self) -> f64 {
        component_norm(&(&self.nabla_g - &self.nabla_g_from_n)).max(component_norm(
            &(&self.nabla_g_tilde - &self.nabla_g_tilde_from_n),
        ))
    }

    /// `‖∇′g‖ + ‖∇′g̃‖`, zero exactly for natural connections.
    pub fn natural_residual(&self) -> f64 {
        component_norm(&self.nabla_g) + component_norm(&self.nabla_g_tilde)
    }
}

fn direct_metric_derivatives(pt: &NordenPoint, q: &Tensor) -> (Tensor, Tensor) {
    let j = pt.j();
    let nabla_g = -&(q + &q.at(j, &[X, Z, Y]));
    let nabla_g_tilde =
        &(&pt.f().at(j, &[X, Z, Y]) - &q.at(j, &[X, Y, JZ])) - &q.at(j, &[X, Z, JY]);
    (nabla_g, nabla_g_tilde)
}

pub fn metric_derivatives(pt: &NordenPoint, params: ConnectionParams) -> Result<MetricDerivatives> {
    let (nabla_g, nabla_g_tilde) = direct_metric_derivatives(pt, &difference_tensor(pt, params));
    let (_, n_tilde) = nijenhuis_pair(pt)?;
    let j = pt.j();
    let a = n_tilde.at(j, &[Y, Z, X]);
    let b = n_tilde.at(j, &[Y, Z, JX]);
    let (p, q) = (params.p(), params.q());
    Ok(MetricDerivatives {
        nabla_g,
        nabla_g_tilde,
        nabla_g_from_n: a.scale(q).axpy(-p, &b),
        nabla_g_tilde_from_n: a.scale(-p).axpy(-q, &b),
    })
}

/// `T(X,Y,Z) + T(Y,Z,X) − T(JX,Y,JZ) − T(Y,JZ,JX)`
pub fn canonical_defect(t: &Tensor, j: &Tensor) -> Tensor {
    &(&(t + &t.at(j, &[Y, Z, X])) - &t.at(j, &[JX, Y, JZ])) - &t.at(j, &[Y, JZ, JX])
}

/// `T(X,Y,Z) + T(X,Z,Y)`
pub fn three_form_defect(t: &Tensor) -> Tensor {
    t + &t.permute(&[0, 2, 1])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpecialResiduals {
    pub natural: f64,
    pub canonical: f64,
    pub three_form: f64,
    pub symmetric: f64,
}

/// Residuals of the four special connection types at `params`, after
/// checking `T(X,Y,Z) − T(JX,JY,Z) = ½N(X,Y,Z)`.
pub fn special_residuals(pt: &NordenPoint, params: ConnectionParams) -> Result<SpecialResiduals> {
    let j = pt.j();
    let t = torsion_tensor(pt, params)?;
    let (n, _) = nijenhuis_pair(pt)?;
    let t_condition = &(&t - &t.at(j, &[JX, JY, Z])) - &n.scale(0.5);
    consistency(
        "torsion J-condition",
        component_norm(&t_condition),
        component_norm(pt.f()) * param_scale(params),
    )?;
    let md = metric_derivatives(pt, params)?;
    Ok(SpecialResiduals {
        natural: md.natural_residual(),
        canonical: component_norm(&canonical_defect(&t, j)),
        three_form: component_norm(&three_form_defect(&t)),
        symmetric: component_norm(&t),
    })
}

/// A residual built from tensors that depend affinely on the parameters.
///
/// Every residual tensor of this module is affine in `(t1, .., t4)`, so it is
/// determined by its values at the origin and the four unit parameters.
/// Sweeps over large grids evaluate the affine combination instead of
/// recomputing the tensors.
pub struct AffineResidual {
    parts: Vec<(Tensor, [Tensor; 4])>,
}

impl AffineResidual {
    fn build(parts: usize, f: impl Fn(ConnectionParams) -> Vec<Tensor>) -> Self {
        let base = f(ConnectionParams::default());
        let units: Vec<Vec<Tensor>> = (0..4)
            .map(|k| {
                let mut a = [0.0; 4];
                a[k] = 1.0;
                f(ConnectionParams::from_array(a))
            })
            .collect();
        let parts = (0..parts)
            .map(|i| {
                let coeffs = std::array::from_fn(|k| &units[k][i] - &base[i]);
                (base[i].clone(), coeffs)
            })
            .collect();
        Self { parts }
    }

    /// Sum of the component norms of the parts at `params`.
    pub fn residual(&self, params: ConnectionParams) -> f64 {
        let t = params.as_array();
        self.parts
            .iter()
            .map(|(base, coeffs)| {
                let mut acc = base.clone();
                for k in 0..4 {
                    if t[k] != 0.0 {
                        acc = acc.axpy(t[k], &coeffs[k]);
                    }
                }
                component_norm(&acc)
            })
            .sum()
    }

    pub fn natural(pt: &NordenPoint) -> Self {
        Self::build(2, |params| {
            let (a, b) = direct_metric_derivatives(pt, &difference_tensor(pt, params));
            vec![a, b]
        })
    }

    pub fn canonical(pt: &NordenPoint) -> Self {
        Self::build(1, |params| {
            let t = torsion_from_difference(&difference_tensor(pt, params));
            vec![canonical_defect(&t, pt.j())]
        })
    }

    pub fn three_form(pt: &NordenPoint) -> Self {
        Self::build(1, |params| {
            vec![three_form_defect(&torsion_from_difference(
                &difference_tensor(pt, params),
            ))]
        })
    }

    pub fn symmetric(pt: &NordenPoint) -> Self {
        Self::build(1, |params| {
            vec![torsion_from_difference(&difference_tensor(pt, params))]
        })
    }
}

/// A random point (all classes mixed) whose `N` and `Ñ` both have component
/// norm above the nondegeneracy bound.
pub fn general_point(rng: &mut ChaCha8Rng, dim: usize) -> Result<NordenPoint> {
    for _ in 0..100 {
        let pt = random_point_with(rng, dim)?;
        let (n, nt) = nijenhuis_pair(&pt)?;
        if component_norm(&n) > tolerance::NONDEGENERATE
            && component_norm(&nt) > tolerance::NONDEGENERATE
        {
            return Ok(pt);
        }
    }
    Err(Error::Generation(
        "no point with non-degenerate N and Ñ after 100 draws".into(),
    ))
}
