use nalgebra::DMatrix;

use super::chart::Chart;
use super::jet::Jet;
use crate::error::{Error, Result};
use crate::pointwise::{classify, BasicClass, NordenPoint};
use crate::tensor::{Slot, Tensor};
use crate::tolerance;

/// Levi-Civita data of a chart at one point, every quantity carried with
/// its first derivatives.
///
/// Index conventions: `gamma[(i·d + j)·d + k] = Γ^k_ij` with
/// `∇_{∂i} ∂j = Γ^k_ij ∂k`; `f[(i·d + j)·d + m] = F(∂i, ∂j, ∂m)`.
pub struct LocalGeometry {
    dim: usize,
    x: Vec<f64>,
    g: Vec<Jet>,
    g_inv: Vec<Jet>,
    j: DMatrix<f64>,
    gamma: Vec<Jet>,
    f: Vec<Jet>,
    theta: Vec<Jet>,
    theta_star: Vec<Jet>,
    omega: Vec<Jet>,
}

fn values(jets: &[Jet]) -> Vec<f64> {
    jets.iter().map(|j| j.value).collect()
}

impl LocalGeometry {
    pub fn new(chart: &Chart, x: &[f64]) -> Result<Self> {
        let d = chart.dim();
        let g = chart.metric_jets(x)?;
        let dg = chart.metric_derivative_jets(x)?;
        let gm = DMatrix::from_row_slice(d, d, &values(&g));
        let inv = gm
            .clone()
            .try_inverse()
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Numeric(format!("metric is singular at {x:?}")))?;
        // ∂(g⁻¹) = −g⁻¹ (∂g) g⁻¹
        let mut g_inv = vec![Jet::ZERO; d * d];
        for a in 0..d {
            for b in 0..d {
                let mut jet = Jet::constant(inv[(a, b)]);
                for l in 0..d {
                    let mut acc = 0.0;
                    for c in 0..d {
                        for e in 0..d {
                            acc -= inv[(a, c)] * g[c * d + e].grad[l] * inv[(e, b)];
                        }
                    }
                    jet.grad[l] = acc;
                }
                g_inv[a * d + b] = jet;
            }
        }
        let dg_at = |l: usize, i: usize, k: usize| dg[(l * d + i) * d + k];
        let mut gamma = vec![Jet::ZERO; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut acc = Jet::ZERO;
                    for l in 0..d {
                        let bracket = dg_at(i, j, l) + dg_at(j, i, l) - dg_at(l, i, j);
                        acc += g_inv[k * d + l] * bracket;
                    }
                    gamma[(i * d + j) * d + k] = acc.scale(0.5);
                }
            }
        }
        let jm = chart.j().clone();
        // (∇_i J)^k_j = Γ^k_il J^l_j − J^k_l Γ^l_ij
        let mut a = vec![Jet::ZERO; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let mut acc = Jet::ZERO;
                    for l in 0..d {
                        acc += gamma[(i * d + l) * d + k].scale(jm[(l, j)]);
                        acc -= gamma[(i * d + j) * d + l].scale(jm[(k, l)]);
                    }
                    a[(i * d + j) * d + k] = acc;
                }
            }
        }
        let mut f = vec![Jet::ZERO; d * d * d];
        for i in 0..d {
            for j in 0..d {
                for m in 0..d {
                    f[(i * d + j) * d + m] =
                        (0..d).map(|k| a[(i * d + j) * d + k] * g[k * d + m]).sum();
                }
            }
        }
        let theta: Vec<Jet> = (0..d)
            .map(|z| {
                let mut acc = Jet::ZERO;
                for i in 0..d {
                    for j in 0..d {
                        acc += g_inv[i * d + j] * f[(i * d + j) * d + z];
                    }
                }
                acc
            })
            .collect();
        let theta_star = (0..d)
            .map(|z| (0..d).map(|b| theta[b].scale(jm[(b, z)])).sum())
            .collect();
        let omega = (0..d)
            .map(|k| (0..d).map(|l| g_inv[k * d + l] * theta[l]).sum())
            .collect();
        Ok(Self {
            dim: d,
            x: x.to_vec(),
            g,
            g_inv,
            j: jm,
            gamma,
            f,
            theta,
            theta_star,
            omega,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.x
    }

    pub fn metric(&self) -> Tensor {
        Tensor::new(self.dim, vec![Slot::Down; 2], values(&self.g)).expect("shape")
    }

    pub fn metric_inverse(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim, self.dim, &values(&self.g_inv))
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn j_tensor(&self) -> Tensor {
        Tensor::from_matrix(&self.j, [Slot::Up, Slot::Down])
    }

    /// `Γ^k_ij` as a tensor with valence `[Down, Down, Up]`.
    pub fn christoffel(&self) -> Tensor {
        Tensor::new(
            self.dim,
            vec![Slot::Down, Slot::Down, Slot::Up],
            values(&self.gamma),
        )
        .expect("shape")
    }

    pub fn f(&self) -> Tensor {
        Tensor::new(self.dim, vec![Slot::Down; 3], values(&self.f)).expect("shape")
    }

    pub fn theta(&self) -> Tensor {
        Tensor::covector(&values(&self.theta))
    }

    pub fn theta_star(&self) -> Tensor {
        Tensor::covector(&values(&self.theta_star))
    }

    pub fn omega(&self) -> Tensor {
        Tensor::vector(&values(&self.omega))
    }

    /// The point `(g, J, F)`; fails if `F` computed from the chart violates
    /// the structure-tensor symmetries.
    pub fn point(&self) -> Result<NordenPoint> {
        NordenPoint::new(self.metric(), self.j_tensor(), self.f())
    }

    fn exterior(&self, form: &[Jet]) -> Tensor {
        Tensor::from_fn(self.dim, vec![Slot::Down; 2], |i| {
            form[i[1]].d(i[0]) - form[i[0]].d(i[1])
        })
    }

    /// `dθ(∂i, ∂j) = ∂_i θ_j − ∂_j θ_i`.
    pub fn d_theta(&self) -> Tensor {
        self.exterior(&self.theta)
    }

    pub fn d_theta_star(&self) -> Tensor {
        self.exterior(&self.theta_star)
    }

    /// `(∇_i θ)_b = ∂_i θ_b − Γ^m_ib θ_m`.
    pub fn nabla_theta(&self) -> Tensor {
        let d = self.dim;
        Tensor::from_fn(d, vec![Slot::Down; 2], |ix| {
            let (i, b) = (ix[0], ix[1]);
            self.theta[b].d(i)
                - (0..d)
                    .map(|m| self.gamma[(i * d + b) * d + m].value * self.theta[m].value)
                    .sum::<f64>()
        })
    }

    /// Connection coefficients `Γ + Q` of the complex connection with
    /// parameters `(p, q)` on a W1 point.
    pub(crate) fn prime_gamma(&self, p: f64, q: f64) -> Vec<Jet> {
        let d = self.dim;
        let n = (d / 2) as f64;
        let jm = &self.j;
        let g_tilde = |i: usize, j: usize| -> Jet {
            (0..d).map(|a| self.g[i * d + a].scale(jm[(a, j)])).sum()
        };
        let j_omega: Vec<Jet> = (0..d)
            .map(|k| (0..d).map(|b| self.omega[b].scale(jm[(k, b)])).sum())
            .collect();
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let mut out = self.gamma.clone();
        for i in 0..d {
            for j in 0..d {
                let gt = g_tilde(i, j);
                for k in 0..d {
                    let (th, ths) = (self.theta[j], self.theta_star[j]);
                    let first = gt * self.omega[k] - self.g[i * d + j] * j_omega[k]
                        + ths.scale(delta(i, k))
                        - th.scale(jm[(k, i)]);
                    let (th_i, ths_i) = (self.theta[i], self.theta_star[i]);
                    let second = th_i.scale(delta(j, k)) + ths_i.scale(jm[(k, j)]);
                    let third = ths_i.scale(delta(j, k)) - th_i.scale(jm[(k, j)]);
                    out[(i * d + j) * d + k] +=
                        first.scale(1.0 / (4.0 * n)) + second.scale(p / n) + third.scale(q / n);
                }
            }
        }
        out
    }

    /// Curvature `R(∂i, ∂j, ∂k, ∂w)` of the connection with coefficients
    /// `gamma`, lowered with `g`:
    /// `R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`.
    pub(crate) fn curvature_of(&self, gamma: &[Jet]) -> Tensor {
        let d = self.dim;
        let gam = |a: usize, b: usize, c: usize| gamma[(a * d + b) * d + c];
        let mut upper = vec![0.0; d * d * d * d];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut v = gam(j, k, l).d(i) - gam(i, k, l).d(j);
                        for m in 0..d {
                            v += gam(i, m, l).value * gam(j, k, m).value
                                - gam(j, m, l).value * gam(i, k, m).value;
                        }
                        upper[((i * d + j) * d + k) * d + l] = v;
                    }
                }
            }
        }
        Tensor::from_fn(d, vec![Slot::Down; 4], |ix| {
            let base = ((ix[0] * d + ix[1]) * d + ix[2]) * d;
            (0..d)
                .map(|l| upper[base + l] * self.g[l * d + ix[3]].value)
                .sum()
        })
    }

    pub fn levi_civita_curvature(&self) -> Tensor {
        self.curvature_of(&self.gamma)
    }

    /// `(∇′_l h)_ij = ∂_l h_ij − Γ′^m_li h_mj − Γ′^m_lj h_im` for `h = g`
    /// (`twisted = false`) or `h = g̃`.
    pub(crate) fn metric_derivative(&self, gamma: &[Jet], twisted: bool) -> Tensor {
        let d = self.dim;
        let h = |i: usize, j: usize| -> Jet {
            if twisted {
                (0..d)
                    .map(|a| self.g[i * d + a].scale(self.j[(a, j)]))
                    .sum()
            } else {
                self.g[i * d + j]
            }
        };
        Tensor::from_fn(d, vec![Slot::Down; 3], |ix| {
            let (l, i, j) = (ix[0], ix[1], ix[2]);
            let mut v = h(i, j).d(l);
            for m in 0..d {
                v -= gamma[(l * d + i) * d + m].value * h(m, j).value;
                v -= gamma[(l * d + j) * d + m].value * h(i, m).value;
            }
            v
        })
    }

    /// Requires `F` at this point to lie in W1 (W0 included).
    pub(crate) fn require_w1(&self) -> Result<NordenPoint> {
        let pt = self.point()?;
        let c = classify(&pt, tolerance::CLASSIFICATION)?;
        if !c.classes.iter().all(|k| *k == BasicClass::W1) {
            return Err(Error::Precondition(format!(
                "F at {:?} is in {}, not in W1",
                self.x,
                c.label()
            )));
        }
        Ok(pt)
    }
}
