//! The basic classes W1, W2, W3 of structure tensors and their projectors.
//!
//! Projectors are built once per dimension in the standard frame as null
//! spaces of the defining linear conditions, then transported to a point
//! through its adapted frame. The decomposition is orthogonal for the inner
//! product of components in the adapted frame, which is the inner product
//! used for component norms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    adapted_frame, cyclic_sum, cyclic_sum_twisted, random_point_with, standard_pair, trial_rng,
    NordenPoint,
};
use crate::error::{Error, Result};
use crate::tensor::{apply_to_slot, check_dim, component_norm, Slot, Tensor};
use crate::tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BasicClass {
    W1,
    W2,
    W3,
}

impl BasicClass {
    pub const ALL: [BasicClass; 3] = [BasicClass::W1, BasicClass::W2, BasicClass::W3];
}

impl fmt::Display for BasicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BasicClass::W1 => "W1",
            BasicClass::W2 => "W2",
            BasicClass::W3 => "W3",
        })
    }
}

/// Classes that can be generated and projected onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FClass {
    W0,
    W1,
    W2,
    W3,
    #[serde(rename = "W1⊕W2")]
    W1W2,
}

impl FClass {
    pub const ALL: [FClass; 5] = [FClass::W0, FClass::W1, FClass::W2, FClass::W3, FClass::W1W2];

    pub fn name(self) -> &'static str {
        match self {
            FClass::W0 => "W0",
            FClass::W1 => "W1",
            FClass::W2 => "W2",
            FClass::W3 => "W3",
            FClass::W1W2 => "W1⊕W2",
        }
    }

    fn basic(self) -> &'static [BasicClass] {
        match self {
            FClass::W0 => &[],
            FClass::W1 => &[BasicClass::W1],
            FClass::W2 => &[BasicClass::W2],
            FClass::W3 => &[BasicClass::W3],
            FClass::W1W2 => &[BasicClass::W1, BasicClass::W2],
        }
    }
}

impl fmt::Display for FClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "W0" => FClass::W0,
            "W1" => FClass::W1,
            "W2" => FClass::W2,
            "W3" => FClass::W3,
            "W1⊕W2" | "W1+W2" | "W12" => FClass::W1W2,
            _ => return Err(Error::Config(format!("unknown class `{s}`"))),
        })
    }
}

/// `(1/2n)[g(X,Y)θ(Z) + g(X,JY)θ(JZ) + g(X,Z)θ(Y) + g(X,JZ)θ(JY)]`, the
/// structure tensor of class W1 with Lie form `θ`.
pub fn w1_structure(g: &Tensor, j: &Tensor, theta: &Tensor) -> Tensor {
    let d = g.dim();
    let n = (d / 2) as f64;
    let g_tilde = g.twist(1, j);
    let theta_star = theta.twist(0, j);
    let outer = |a: &Tensor, b: &Tensor| {
        Tensor::from_fn(d, vec![Slot::Down; 3], |i| a.get(&i[..2]) * b.get(&i[2..]))
    };
    let first = &outer(g, theta) + &outer(&g_tilde, &theta_star);
    (&first + &first.permute(&[0, 2, 1])).scale(1.0 / (2.0 * n))
}

fn theta_of(f: &Tensor, g_inv: &DMatrix<f64>) -> Tensor {
    let d = f.dim();
    Tensor::from_fn(d, vec![Slot::Down], |z| {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += g_inv[(i, j)] * f.get(&[i, j, z[0]]);
            }
        }
        acc
    })
}

/// Matrix of a linear map on `(0,3)` tensors, columns indexed by unit tensors.
fn operator_matrix(dim: usize, op: impl Fn(&Tensor) -> Vec<Tensor>) -> DMatrix<f64> {
    let size = dim.pow(3);
    let mut columns = Vec::with_capacity(size);
    for k in 0..size {
        let mut e = Tensor::zeros(dim, vec![Slot::Down; 3]);
        e.data_mut()[k] = 1.0;
        let image: Vec<f64> = op(&e).into_iter().flat_map(Tensor::into_data).collect();
        columns.push(image);
    }
    let rows = columns[0].len();
    DMatrix::from_fn(rows, size, |r, c| columns[c][r])
}

/// Orthonormal basis of the null space of `a`.
fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = a.ncols();
    let a = if a.nrows() < cols {
        a.clone().resize_vertically(cols, 0.0)
    } else {
        a.clone()
    };
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let sv = svd.singular_values;
    let cutoff = tolerance::NULL_SPACE * sv.max().max(f64::MIN_POSITIVE);
    let null: Vec<usize> = (0..cols).filter(|&i| sv[i] <= cutoff).collect();
    DMatrix::from_fn(cols, null.len(), |r, c| v_t[(null[c], r)])
}

/// Class bases in the standard frame, shared by every point of one dimension.
struct StandardBases {
    sym: DMatrix<f64>,
    classes: HashMap<FClass, DMatrix<f64>>,
}

impl StandardBases {
    fn build(dim: usize) -> Result<Self> {
        let n = dim / 2;
        let (g0m, j0m) = standard_pair(n);
        let g0 = Tensor::from_matrix(&g0m, [Slot::Down, Slot::Down]);
        let j0 = Tensor::from_matrix(&j0m, [Slot::Up, Slot::Down]);
        let g0_inv = g0m.clone();

        let sym_ops = operator_matrix(dim, |f| {
            vec![
                f - &f.permute(&[0, 2, 1]),
                f - &f.twist(1, &j0).twist(2, &j0),
            ]
        });
        let sym = null_space(&sym_ops);

        let restricted = |op: &dyn Fn(&Tensor) -> Vec<Tensor>| {
            let a = operator_matrix(dim, op);
            &sym * null_space(&(a * &sym))
        };
        let w1 = restricted(&|f| {
            let theta = theta_of(f, &g0_inv);
            vec![f - &w1_structure(&g0, &j0, &theta)]
        });
        let w2 = restricted(&|f| vec![cyclic_sum_twisted(f, &j0), theta_of(f, &g0_inv)]);
        let w3 = restricted(&|f| vec![cyclic_sum(f, &j0)]);
        let w12 = restricted(&|f| vec![cyclic_sum_twisted(f, &j0)]);

        if w1.ncols() != dim {
            return Err(Error::Structural(format!(
                "W1 has dimension {} in dimension {dim}, expected {dim}",
                w1.ncols()
            )));
        }
        let total = w1.ncols() + w2.ncols() + w3.ncols();
        if total != sym.ncols() || w12.ncols() != w1.ncols() + w2.ncols() {
            return Err(Error::Structural(format!(
                "class dimensions {} + {} + {} do not decompose {} (W1⊕W2 has {})",
                w1.ncols(),
                w2.ncols(),
                w3.ncols(),
                sym.ncols(),
                w12.ncols()
            )));
        }
        let overlap = (w1.transpose() * &w2)
            .amax()
            .max((w1.transpose() * &w3).amax())
            .max((w2.transpose() * &w3).amax());
        if overlap > tolerance::PROJECTOR {
            return Err(Error::Structural(format!(
                "class subspaces are not orthogonal (overlap {overlap:e})"
            )));
        }
        // The W1 formula must land in W1 for every covector.
        let p1 = &w1 * w1.transpose();
        for k in 0..dim {
            let mut theta = Tensor::zeros(dim, vec![Slot::Down]);
            theta.data_mut()[k] = 1.0;
            let image =
                DMatrix::from_column_slice(dim.pow(3), 1, w1_structure(&g0, &j0, &theta).data());
            let miss = (&p1 * &image - &image).amax();
            if miss > tolerance::PROJECTOR {
                return Err(Error::Structural(format!(
                    "W1 formula leaves the W1 subspace (residual {miss:e})"
                )));
            }
        }
        let classes = HashMap::from([
            (FClass::W0, DMatrix::zeros(dim.pow(3), 0)),
            (FClass::W1, w1),
            (FClass::W2, w2),
            (FClass::W3, w3),
            (FClass::W1W2, w12),
        ]);
        Ok(Self { sym, classes })
    }

    fn get(dim: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<StandardBases>>>> = OnceLock::new();
        let mut cache = CACHE
            .get_or_init(Default::default)
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        if let Some(b) = cache.get(&dim) {
            return Ok(Arc::clone(b));
        }
        let built = Arc::new(Self::build(dim)?);
        cache.insert(dim, Arc::clone(&built));
        Ok(built)
    }
}

/// Class projectors at one point.
pub struct ClassProjectors {
    dim: usize,
    frame: DMatrix<f64>,
    frame_inv_t: DMatrix<f64>,
    bases: Arc<StandardBases>,
}

impl ClassProjectors {
    pub fn new(pt: &NordenPoint) -> Result<Self> {
        Self::from_structure(&pt.g().to_matrix(), &pt.j().to_matrix())
    }

    pub fn from_structure(g: &DMatrix<f64>, j: &DMatrix<f64>) -> Result<Self> {
        let dim = g.nrows();
        check_dim(dim)?;
        if dim < 4 {
            return Err(Error::Structural(format!(
                "class projectors need dimension ≥ 4, got {dim}"
            )));
        }
        let frame = adapted_frame(g, j)?;
        let frame_inv_t = frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Numeric("adapted frame is singular".into()))?
            .transpose();
        Ok(Self {
            dim,
            frame,
            frame_inv_t,
            bases: StandardBases::get(dim)?,
        })
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Dimension of the subspace of `class` inside the space of tensors with
    /// the structure-tensor symmetries.
    pub fn rank(&self, class: FClass) -> usize {
        self.bases.classes[&class].ncols()
    }

    pub fn symmetric_rank(&self) -> usize {
        self.bases.sym.ncols()
    }

    fn transform(&self, f: &Tensor, m: &DMatrix<f64>) -> Tensor {
        (0..3).fold(f.clone(), |t, slot| apply_to_slot(&t, slot, m, Slot::Down))
    }

    /// Components of `f` in the adapted frame.
    pub fn to_frame(&self, f: &Tensor) -> Tensor {
        self.transform(f, &self.frame.transpose())
    }

    pub fn from_frame(&self, f: &Tensor) -> Tensor {
        self.transform(f, &self.frame_inv_t)
    }

    /// Inner product of components in the adapted frame.
    pub fn frame_inner(&self, a: &Tensor, b: &Tensor) -> f64 {
        self.to_frame(a).dot(&self.to_frame(b))
    }

    pub fn frame_norm(&self, f: &Tensor) -> f64 {
        component_norm(&self.to_frame(f))
    }

    fn coefficients(&self, class: FClass, f: &Tensor) -> nalgebra::DVector<f64> {
        let u = &self.bases.classes[&class];
        let std = nalgebra::DVector::from_column_slice(self.to_frame(f).data());
        u.transpose() * std
    }

    fn project_onto(&self, u: &DMatrix<f64>, f: &Tensor) -> Tensor {
        let std = nalgebra::DVector::from_column_slice(self.to_frame(f).data());
        let image = u * (u.transpose() * std);
        let t = Tensor::new(self.dim, vec![Slot::Down; 3], image.as_slice().to_vec())
            .expect("shape matches");
        self.from_frame(&t)
    }

    pub fn project(&self, class: FClass, f: &Tensor) -> Tensor {
        self.project_onto(&self.bases.classes[&class], f)
    }

    /// Projection onto all tensors with the structure-tensor symmetries.
    pub fn project_symmetric(&self, f: &Tensor) -> Tensor {
        self.project_onto(&self.bases.sym, f)
    }

    /// Adapted-frame norm of the component of `f` in each basic class.
    pub fn component_norms(&self, f: &Tensor) -> BTreeMap<BasicClass, f64> {
        [
            (BasicClass::W1, FClass::W1),
            (BasicClass::W2, FClass::W2),
            (BasicClass::W3, FClass::W3),
        ]
        .into_iter()
        .map(|(b, c)| (b, self.coefficients(c, f).norm()))
        .collect()
    }

    /// The projector onto `class` as a matrix acting on the row-major
    /// components of `(0,3)` tensors in the working basis.
    pub fn matrix(&self, class: FClass) -> DMatrix<f64> {
        self.matrix_of(|e| self.project(class, e))
    }

    pub fn symmetric_matrix(&self) -> DMatrix<f64> {
        self.matrix_of(|e| self.project_symmetric(e))
    }

    fn matrix_of(&self, map: impl Fn(&Tensor) -> Tensor) -> DMatrix<f64> {
        let size = self.dim.pow(3);
        let mut out = DMatrix::zeros(size, size);
        for k in 0..size {
            let mut e = Tensor::zeros(self.dim, vec![Slot::Down; 3]);
            e.data_mut()[k] = 1.0;
            out.set_column(k, &nalgebra::DVector::from_column_slice(map(&e).data()));
        }
        out
    }

    /// `max |P1 + P2 + P3 − P_sym|` over matrix entries.
    pub fn decomposition_residual(&self) -> f64 {
        let sum = self.matrix(FClass::W1) + self.matrix(FClass::W2) + self.matrix(FClass::W3);
        (sum - self.symmetric_matrix()).amax()
    }
}

pub fn class_projector(pt: &NordenPoint, class: FClass) -> Result<DMatrix<f64>> {
    Ok(ClassProjectors::new(pt)?.matrix(class))
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationResult {
    pub norm: f64,
    pub components: BTreeMap<BasicClass, f64>,
    pub classes: Vec<BasicClass>,
    pub tolerance: f64,
}

impl ClassificationResult {
    /// `W0`, a basic class, or a direct sum such as `W1⊕W3`.
    pub fn label(&self) -> String {
        if self.classes.is_empty() {
            return "W0".into();
        }
        self.classes
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("⊕")
    }

    /// Whether the tensor lies in `class` (every non-zero component belongs
    /// to it).
    pub fn belongs_to(&self, class: FClass) -> bool {
        self.classes.iter().all(|c| class.basic().contains(c))
    }
}

/// Classifies `F` at a point by its components in W1, W2 and W3. A component
/// counts when its norm exceeds `tol` times the norm of `F`.
pub fn classify(pt: &NordenPoint, tol: f64) -> Result<ClassificationResult> {
    let proj = ClassProjectors::new(pt)?;
    let norm = proj.frame_norm(pt.f());
    let components = proj.component_norms(pt.f());
    let classes = if norm < tolerance::DEGENERATE_F {
        Vec::new()
    } else {
        components
            .iter()
            .filter(|(_, v)| **v > tol * norm)
            .map(|(c, _)| *c)
            .collect()
    };
    Ok(ClassificationResult {
        norm,
        components,
        classes,
        tolerance: tol,
    })
}

fn random_covector(rng: &mut ChaCha8Rng, dim: usize) -> Tensor {
    Tensor::from_fn(dim, vec![Slot::Down], |_| rng.gen_range(-1.0..1.0))
}

/// A random point whose structure tensor lies in `class`. Apart from W0, the
/// tensor has component norm at least 0.1.
pub fn generate_in_class_with(
    rng: &mut ChaCha8Rng,
    class: FClass,
    dim: usize,
) -> Result<NordenPoint> {
    for _ in 0..100 {
        let pt = random_point_with(rng, dim)?;
        let f = match class {
            FClass::W0 => Tensor::zeros(dim, vec![Slot::Down; 3]),
            FClass::W1 => w1_structure(pt.g(), pt.j(), &random_covector(rng, dim)),
            other => ClassProjectors::new(&pt)?.project(other, pt.f()),
        };
        if class != FClass::W0 && component_norm(&f) < tolerance::NONDEGENERATE {
            continue;
        }
        return pt.with_f(f);
    }
    Err(Error::Generation(format!(
        "no non-degenerate {class} tensor after 100 draws"
    )))
}

pub fn generate_in_class(class: FClass, seed: u64, dim: usize) -> Result<NordenPoint> {
    generate_in_class_with(&mut trial_rng(seed, 0), class, dim)
}

/// Draws points in `class` until `accept` holds, giving up after 100 draws.
pub fn generate_where(
    rng: &mut ChaCha8Rng,
    class: FClass,
    dim: usize,
    what: &str,
    mut accept: impl FnMut(&NordenPoint) -> Result<bool>,
) -> Result<NordenPoint> {
    for _ in 0..100 {
        let pt = generate_in_class_with(rng, class, dim)?;
        if accept(&pt)? {
            return Ok(pt);
        }
    }
    Err(Error::Generation(format!(
        "no {class} point with {what} after 100 draws"
    )))
}
