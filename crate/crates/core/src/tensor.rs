//! Dense small-tensor algebra over a `2n`-dimensional real vector space.
//!
//! Components are stored row-major in multi-index order. A `(1,1)` tensor such
//! as `J` is stored with its upper slot first, so `J[a][b] = J^a_b` and
//! `(JX)^a = J^a_b X^b`. Mixed tensors produced by this crate put their input
//! (covariant) slots first and their output (contravariant) slot last, e.g.
//! `(∇_X J)Y` has valence `[Down, Down, Up]`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Variance of one tensor slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    Up,
    Down,
}

use Slot::{Down, Up};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dim: usize,
    valence: Vec<Slot>,
    data: Vec<f64>,
}

/// One argument of a covariant slot: which free variable feeds it and whether
/// `J` is applied first. `Tensor::at` uses these to spell formulas such as
/// `F(JZ, X, Y)` directly.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arg {
    pub var: usize,
    pub twisted: bool,
}

pub mod args {
    use super::Arg;

    pub const X: Arg = Arg {
        var: 0,
        twisted: false,
    };
    pub const Y: Arg = Arg {
        var: 1,
        twisted: false,
    };
    pub const Z: Arg = Arg {
        var: 2,
        twisted: false,
    };
    pub const W: Arg = Arg {
        var: 3,
        twisted: false,
    };
    pub const JX: Arg = Arg {
        var: 0,
        twisted: true,
    };
    pub const JY: Arg = Arg {
        var: 1,
        twisted: true,
    };
    pub const JZ: Arg = Arg {
        var: 2,
        twisted: true,
    };
    pub const JW: Arg = Arg {
        var: 3,
        twisted: true,
    };
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 || dim % 2 != 0 {
        return Err(Error::Structural(format!(
            "dimension must be even and at least 2, got {dim}"
        )));
    }
    Ok(())
}

impl Tensor {
    pub fn new(dim: usize, valence: Vec<Slot>, data: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        let expected = dim.pow(valence.len() as u32);
        if data.len() != expected {
            return Err(Error::Structural(format!(
                "expected {expected} components for rank {} in dimension {dim}, got {}",
                valence.len(),
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("component {i} is not finite")));
        }
        Ok(Self { dim, valence, data })
    }

    pub fn zeros(dim: usize, valence: Vec<Slot>) -> Self {
        let len = dim.pow(valence.len() as u32);
        Self {
            dim,
            valence,
            data: vec![0.0; len],
        }
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(dim: usize, valence: Vec<Slot>, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let rank = valence.len();
        let len = dim.pow(rank as u32);
        let mut data = Vec::with_capacity(len);
        let mut idx = vec![0usize; rank];
        for _ in 0..len {
            data.push(f(&idx));
            increment(&mut idx, dim);
        }
        Self { dim, valence, data }
    }

    /// The identity endomorphism as a `(1,1)` tensor.
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(
            dim,
            vec![Up, Down],
            |i| if i[0] == i[1] { 1.0 } else { 0.0 },
        )
    }

    pub fn covector(values: &[f64]) -> Self {
        Self {
            dim: values.len(),
            valence: vec![Down],
            data: values.to_vec(),
        }
    }

    pub fn vector(values: &[f64]) -> Self {
        Self {
            dim: values.len(),
            valence: vec![Up],
            data: values.to_vec(),
        }
    }

    pub fn from_matrix(m: &DMatrix<f64>, valence: [Slot; 2]) -> Self {
        let dim = m.nrows();
        Self::from_fn(dim, valence.to_vec(), |i| m[(i[0], i[1])])
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2, "to_matrix needs a rank-2 tensor");
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.valence.len()
    }

    pub fn valence(&self) -> &[Slot] {
        &self.valence
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: f64) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    pub fn is_covariant(&self) -> bool {
        self.valence.iter().all(|s| *s == Down)
    }

    /// Same components, new valence label. Used when a caller has already
    /// applied the metric by other means.
    pub fn with_valence(mut self, valence: Vec<Slot>) -> Self {
        assert_eq!(valence.len(), self.rank());
        self.valence = valence;
        self
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dim: self.dim,
            valence: self.valence.clone(),
            data: self.data.iter().map(|v| f(*v)).collect(),
        }
    }

    /// `self + factor * other`.
    pub fn axpy(&self, factor: f64, other: &Tensor) -> Self {
        self.assert_same_shape(other);
        Self {
            dim: self.dim,
            valence: self.valence.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + factor * b)
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor) -> f64 {
        self.assert_same_shape(other);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Euclidean inner product of raw components.
    pub fn dot(&self, other: &Tensor) -> f64 {
        self.assert_same_shape(other);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    fn assert_same_shape(&self, other: &Tensor) {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        assert_eq!(self.valence, other.valence, "valence mismatch");
    }

    /// Reorders slots: slot `s` of the result is slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.rank());
        let valence = perm.iter().map(|&p| self.valence[p]).collect();
        let mut src = vec![0usize; self.rank()];
        Self::from_fn(self.dim, valence, |idx| {
            for (s, &p) in perm.iter().enumerate() {
                src[p] = idx[s];
            }
            self.get(&src)
        })
    }

    /// Applies `J` at one slot. For a covariant slot the argument is replaced
    /// by `J` of the argument; for a contravariant slot `J` acts on the output.
    pub fn twist(&self, slot: usize, j: &Tensor) -> Self {
        let d = self.dim;
        let jm = j.data();
        let mut out = Tensor::zeros(d, self.valence.clone());
        let stride = d.pow((self.rank() - 1 - slot) as u32);
        let block = stride * d;
        for base in (0..self.data.len()).step_by(block) {
            for inner in 0..stride {
                for b in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        let coeff = match self.valence[slot] {
                            Down => jm[a * d + b],
                            Up => jm[b * d + a],
                        };
                        acc += coeff * self.data[base + a * stride + inner];
                    }
                    out.data[base + b * stride + inner] = acc;
                }
            }
        }
        out
    }

    /// Evaluates a covariant tensor at permuted and `J`-twisted arguments.
    ///
    /// `f.at(j, &[JZ, X, Y])` is the tensor `(x, y, z) ↦ F(Jz, x, y)`. The
    /// result has one slot per variable, `0..=max var`.
    pub fn at(&self, j: &Tensor, spec: &[Arg]) -> Self {
        assert_eq!(spec.len(), self.rank());
        let mut twisted = self.clone();
        for (slot, a) in spec.iter().enumerate() {
            if a.twisted {
                twisted = twisted.twist(slot, j);
            }
        }
        let nvars = spec.iter().map(|a| a.var).max().map_or(0, |m| m + 1);
        let mut src = vec![0usize; self.rank()];
        Self::from_fn(self.dim, vec![Down; nvars], |idx| {
            for (slot, a) in spec.iter().enumerate() {
                src[slot] = idx[a.var];
            }
            twisted.get(&src)
        })
    }
}

fn increment(idx: &mut [usize], dim: usize) {
    for slot in (0..idx.len()).rev() {
        idx[slot] += 1;
        if idx[slot] < dim {
            return;
        }
        idx[slot] = 0;
    }
}

impl Add for &Tensor {
    type Output = Tensor;
    fn add(self, rhs: &Tensor) -> Tensor {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &Tensor {
    type Output = Tensor;
    fn sub(self, rhs: &Tensor) -> Tensor {
        self.axpy(-1.0, rhs)
    }
}

impl Neg for &Tensor {
    type Output = Tensor;
    fn neg(self) -> Tensor {
        self.scale(-1.0)
    }
}

impl Mul<&Tensor> for f64 {
    type Output = Tensor;
    fn mul(self, rhs: &Tensor) -> Tensor {
        rhs.scale(self)
    }
}

/// Contracts slot `pairs[k].0` of `a` with slot `pairs[k].1` of `b`.
///
/// The result carries the free slots of `a` followed by those of `b`, in
/// their original order.
pub fn contract(a: &Tensor, b: &Tensor, slot_pairs: &[(usize, usize)]) -> Result<Tensor> {
    if a.dim != b.dim {
        return Err(Error::Structural(format!(
            "cannot contract dimension {} with dimension {}",
            a.dim, b.dim
        )));
    }
    for &(sa, sb) in slot_pairs {
        if sa >= a.rank() || sb >= b.rank() {
            return Err(Error::Structural(format!(
                "slot pair ({sa}, {sb}) out of range for ranks {} and {}",
                a.rank(),
                b.rank()
            )));
        }
        if a.valence[sa] == b.valence[sb] {
            return Err(Error::Structural(format!(
                "slots ({sa}, {sb}) have the same variance and cannot be contracted"
            )));
        }
    }
    let free_a: Vec<usize> = (0..a.rank())
        .filter(|s| !slot_pairs.iter().any(|p| p.0 == *s))
        .collect();
    let free_b: Vec<usize> = (0..b.rank())
        .filter(|s| !slot_pairs.iter().any(|p| p.1 == *s))
        .collect();
    let valence: Vec<Slot> = free_a
        .iter()
        .map(|&s| a.valence[s])
        .chain(free_b.iter().map(|&s| b.valence[s]))
        .collect();
    let d = a.dim;
    let n_sum = d.pow(slot_pairs.len() as u32);
    let mut ia = vec![0usize; a.rank()];
    let mut ib = vec![0usize; b.rank()];
    let mut summed = vec![0usize; slot_pairs.len()];
    Ok(Tensor::from_fn(d, valence, |idx| {
        for (k, &s) in free_a.iter().enumerate() {
            ia[s] = idx[k];
        }
        for (k, &s) in free_b.iter().enumerate() {
            ib[s] = idx[free_a.len() + k];
        }
        summed.iter_mut().for_each(|v| *v = 0);
        let mut acc = 0.0;
        for _ in 0..n_sum {
            for (k, &(sa, sb)) in slot_pairs.iter().enumerate() {
                ia[sa] = summed[k];
                ib[sb] = summed[k];
            }
            acc += a.get(&ia) * b.get(&ib);
            increment(&mut summed, d);
        }
        acc
    }))
}

pub(crate) fn metric_matrix(g: &Tensor) -> Result<DMatrix<f64>> {
    if g.rank() != 2 || !g.is_covariant() {
        return Err(Error::Structural("metric must be a (0,2) tensor".into()));
    }
    let m = g.to_matrix();
    let asym = (&m - m.transpose()).amax();
    if asym > crate::tolerance::STRUCTURAL * m.amax().max(1.0) {
        return Err(Error::Structural(format!(
            "metric is not symmetric (asymmetry {asym:e})"
        )));
    }
    Ok(m)
}

pub(crate) fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .filter(|inv| inv.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::Numeric("metric is singular".into()))
}

/// Raises or lowers one slot with the metric `g`; the slot keeps its position.
pub fn raise_lower(t: &Tensor, slot: usize, g: &Tensor, direction: Slot) -> Result<Tensor> {
    if slot >= t.rank() {
        return Err(Error::Structural(format!("slot {slot} out of range")));
    }
    if g.dim != t.dim {
        return Err(Error::Structural("metric dimension mismatch".into()));
    }
    if t.valence[slot] == direction {
        return Err(Error::Structural(format!(
            "slot {slot} is already {direction:?}"
        )));
    }
    let gm = metric_matrix(g)?;
    let m = match direction {
        Up => inverse(&gm)?,
        Down => gm,
    };
    Ok(apply_to_slot(t, slot, &m, direction))
}

/// `out[.. k ..] = Σ_l m[k][l] t[.. l ..]`, relabelling the slot.
pub(crate) fn apply_to_slot(t: &Tensor, slot: usize, m: &DMatrix<f64>, new: Slot) -> Tensor {
    let d = t.dim;
    let mut valence = t.valence.clone();
    valence[slot] = new;
    let mut out = Tensor::zeros(d, valence);
    let stride = d.pow((t.rank() - 1 - slot) as u32);
    let block = stride * d;
    for base in (0..t.data.len()).step_by(block) {
        for inner in 0..stride {
            for k in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += m[(k, l)] * t.data[base + l * stride + inner];
                }
                out.data[base + k * stride + inner] = acc;
            }
        }
    }
    out
}

/// Root-sum-square of the raw components in the working basis.
pub fn component_norm(t: &Tensor) -> f64 {
    t.data.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn check_complex_structure(j: &Tensor) -> Result<DMatrix<f64>> {
    if j.valence != [Up, Down] {
        return Err(Error::Structural("J must be a (1,1) tensor".into()));
    }
    let jm = j.to_matrix();
    let d = j.dim;
    let residual = (&jm * &jm + DMatrix::<f64>::identity(d, d)).amax();
    let scale = jm.amax().powi(2).max(1.0);
    if residual > crate::tolerance::STRUCTURAL * scale {
        return Err(Error::Structural(format!(
            "J² ≠ −I (residual {residual:e})"
        )));
    }
    Ok(jm)
}

/// Averages a `(0,3)` tensor over the group generated by swapping the last
/// two slots and by `a(X, Y, Z) ↦ a(X, JY, JZ)`.
///
/// The result satisfies `F(X,Y,Z) = F(X,Z,Y) = F(X,JY,JZ)`.
pub fn project_f_symmetries(a: &Tensor, j: &Tensor) -> Result<Tensor> {
    if a.rank() != 3 || !a.is_covariant() {
        return Err(Error::Structural("expected a (0,3) tensor".into()));
    }
    if j.dim != a.dim {
        return Err(Error::Structural("J dimension mismatch".into()));
    }
    check_complex_structure(j)?;
    let twisted = a.twist(1, j).twist(2, j);
    let sum = &(a + &a.permute(&[0, 2, 1])) + &(&twisted + &twisted.permute(&[0, 2, 1]));
    Ok(sum.scale(0.25))
}

/// Residuals of the two symmetries enforced by [`project_f_symmetries`].
pub fn f_symmetry_residual(f: &Tensor, j: &Tensor) -> f64 {
    let swap = component_norm(&(f - &f.permute(&[0, 2, 1])));
    let twist = component_norm(&(f - &f.twist(1, j).twist(2, j)));
    swap.max(twist)
}

#[cfg(test)]
mod tests {
    use super::args::*;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(dim: usize, valence: Vec<Slot>, rng: &mut ChaCha8Rng) -> Tensor {
        Tensor::from_fn(dim, valence, |_| rng.gen_range(-1.0..1.0))
    }

    fn standard_j(dim: usize) -> Tensor {
        let n = dim / 2;
        Tensor::from_fn(dim, vec![Up, Down], |i| {
            if i[0] == i[1] + n && i[1] < n {
                1.0
            } else if i[1] == i[0] + n && i[0] < n {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Tensor::new(3, vec![Down], vec![0.0; 3]).is_err());
        assert!(Tensor::new(4, vec![Down, Down], vec![0.0; 15]).is_err());
        assert!(Tensor::new(4, vec![Down], vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn identity_contraction_returns_vector() {
        let v = Tensor::vector(&[1.0, -2.0, 3.0, 0.5]);
        let out = contract(&Tensor::identity(4), &v, &[(1, 0)]).unwrap();
        assert_eq!(out.data(), v.data());
        assert_eq!(out.valence(), &[Up]);
    }

    #[test]
    fn contraction_rejects_same_variance() {
        let a = Tensor::zeros(4, vec![Down, Down]);
        let err = contract(&a, &a, &[(0, 0)]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
        let b = Tensor::zeros(6, vec![Up]);
        assert!(contract(&a, &b, &[(0, 0)]).is_err());
    }

    #[test]
    fn metric_trace_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random(4, vec![Down; 3], &mut rng);
        let ginv = random(4, vec![Up, Up], &mut rng);
        let traced = contract(&ginv, &f, &[(0, 0), (1, 1)]).unwrap();
        for k in 0..4 {
            let mut expected = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    expected += ginv.get(&[i, j]) * f.get(&[i, j, k]);
                }
            }
            assert!((traced.get(&[k]) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_metric_contracts_to_identity() {
        let g = Tensor::from_matrix(
            &DMatrix::from_row_slice(
                4,
                4,
                &[
                    2.0, 0.3, 0.0, 0.1, 0.3, -1.0, 0.2, 0.0, 0.0, 0.2, 1.5, 0.4, 0.1, 0.0, 0.4,
                    -0.7,
                ],
            ),
            [Down, Down],
        );
        let ginv = Tensor::from_matrix(&inverse(&g.to_matrix()).unwrap(), [Up, Up]);
        let id = contract(&ginv, &g, &[(1, 0)]).unwrap();
        assert!(id.max_abs_diff(&Tensor::identity(4)) < 1e-12);
    }

    #[test]
    fn raise_matches_linear_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let gm = &m + m.transpose() + DMatrix::from_diagonal_element(4, 4, 3.0);
        let g = Tensor::from_matrix(&gm, [Down, Down]);
        let w = Tensor::covector(&[0.3, -1.2, 0.7, 2.0]);
        let raised = raise_lower(&w, 0, &g, Up).unwrap();
        let solved = gm
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(w.data()))
            .unwrap();
        for k in 0..4 {
            assert!((raised.get(&[k]) - solved[k]).abs() < 1e-12);
        }
        let back = raise_lower(&raised, 0, &g, Down).unwrap();
        assert!(back.max_abs_diff(&w) < 1e-12);
    }

    #[test]
    fn raising_with_singular_metric_fails() {
        let g = Tensor::zeros(4, vec![Down, Down]);
        let t = Tensor::covector(&[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(raise_lower(&t, 0, &g, Up), Err(Error::Numeric(_))));
    }

    #[test]
    fn raising_zero_stays_zero() {
        let g = Tensor::from_matrix(
            &DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, -1.0, -1.0])),
            [Down, Down],
        );
        let f = Tensor::zeros(4, vec![Down; 3]);
        let a = raise_lower(&f, 2, &g, Up).unwrap();
        assert_eq!(component_norm(&a), 0.0);
        assert_eq!(a.valence(), &[Down, Down, Up]);
    }

    #[test]
    fn component_norm_basics() {
        assert_eq!(component_norm(&Tensor::zeros(4, vec![Down; 2])), 0.0);
        let mut t = Tensor::zeros(4, vec![Down; 3]);
        t.set(&[1, 2, 3], 3.0);
        assert_eq!(component_norm(&t), 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = random(4, vec![Down; 3], &mut rng);
        let mut sum = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    sum += r.get(&[i, j, k]).powi(2);
                }
            }
        }
        assert!((component_norm(&r) - sum.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn at_spells_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random(4, vec![Down; 3], &mut rng);
        let j = standard_j(4);
        let jm = j.to_matrix();
        // F(JZ, X, Y) by explicit loops.
        let got = f.at(&j, &[JZ, X, Y]);
        for x in 0..4 {
            for y in 0..4 {
                for z in 0..4 {
                    let mut e = 0.0;
                    for a in 0..4 {
                        e += jm[(a, z)] * f.get(&[a, x, y]);
                    }
                    assert!((got.get(&[x, y, z]) - e).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn projection_fixes_symmetric_input_and_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let j = standard_j(4);
        let a = random(4, vec![Down; 3], &mut rng);
        let p = project_f_symmetries(&a, &j).unwrap();
        assert!(f_symmetry_residual(&p, &j) < 1e-12);
        let pp = project_f_symmetries(&p, &j).unwrap();
        assert!(pp.max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn projection_rejects_non_complex_structure() {
        let a = Tensor::zeros(4, vec![Down; 3]);
        assert!(project_f_symmetries(&a, &Tensor::identity(4)).is_err());
    }

    #[test]
    fn projection_is_orthogonal_for_orthogonal_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let j = standard_j(6);
        let a = random(6, vec![Down; 3], &mut rng);
        let b = random(6, vec![Down; 3], &mut rng);
        let pa = project_f_symmetries(&a, &j).unwrap();
        let pb = project_f_symmetries(&b, &j).unwrap();
        assert!(pa.dot(&(&b - &pb)).abs() < 1e-10);
    }
}
