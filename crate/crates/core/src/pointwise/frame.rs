use nalgebra::{DMatrix, DVector};

use super::standard_pair;
use crate::error::{Error, Result};

/// `B(x, y) = g(x, y) − i g(x, Jy)` as `(re, im)`.
fn hermitian(g: &DMatrix<f64>, j: &DMatrix<f64>, x: &DVector<f64>, y: &DVector<f64>) -> (f64, f64) {
    let gy = g * y;
    let gjy = g * (j * y);
    (x.dot(&gy), -x.dot(&gjy))
}

/// `(a + ib)·v = a v + b Jv`.
fn complex_scale(j: &DMatrix<f64>, (a, b): (f64, f64), v: &DVector<f64>) -> DVector<f64> {
    v * a + (j * v) * b
}

fn complex_inv_sqrt((re, im): (f64, f64)) -> (f64, f64) {
    let r = re.hypot(im);
    let s_re = ((r + re) / 2.0).sqrt();
    let s_im = ((r - re) / 2.0).sqrt().copysign(im);
    let m = s_re * s_re + s_im * s_im;
    (s_re / m, -s_im / m)
}

/// A frame `Q = [f_1 .. f_n, Jf_1 .. Jf_n]` with `Qᵀ g Q = g0` and
/// `Q⁻¹ J Q = J0`.
///
/// The vectors `f_k` are an orthonormal basis for the complex bilinear form
/// `B`, obtained by Gram-Schmidt over the coordinate vectors (and their
/// pairwise sums when a coordinate vector is `B`-isotropic).
pub fn adapted_frame(g: &DMatrix<f64>, j: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = g.nrows();
    let n = d / 2;
    let mut frame: Vec<DVector<f64>> = Vec::with_capacity(n);
    let units: Vec<DVector<f64>> = (0..d)
        .map(|i| DVector::from_fn(d, |k, _| if k == i { 1.0 } else { 0.0 }))
        .collect();
    for _ in 0..n {
        let reduce = |c: &DVector<f64>| {
            let mut v = c.clone();
            for f in &frame {
                let coeff = hermitian(g, j, c, f);
                v -= complex_scale(j, coeff, f);
            }
            v
        };
        let reduced: Vec<DVector<f64>> = units.iter().map(reduce).collect();
        let mut candidates = reduced.clone();
        for a in 0..d {
            for b in a + 1..d {
                candidates.push(&reduced[a] + &reduced[b]);
            }
        }
        let score = |v: &DVector<f64>| {
            let (re, im) = hermitian(g, j, v, v);
            re.hypot(im) / v.norm_squared().max(f64::MIN_POSITIVE)
        };
        // First candidate with the best score, so coordinate vectors win ties.
        let mut best: Option<(&DVector<f64>, f64)> = None;
        for v in candidates.iter().filter(|v| v.norm() > 1e-12) {
            let s = score(v);
            if best.is_none_or(|(_, b)| s > b * (1.0 + 1e-12)) {
                best = Some((v, s));
            }
        }
        let (best, best_score) =
            best.ok_or_else(|| Error::Numeric("adapted frame: no candidate vector".into()))?;
        if best_score < 1e-8 {
            return Err(Error::Numeric(
                "adapted frame: remaining subspace is isotropic".into(),
            ));
        }
        let norm = hermitian(g, j, best, best);
        frame.push(complex_scale(j, complex_inv_sqrt(norm), best));
    }
    let mut q = DMatrix::zeros(d, d);
    for (k, f) in frame.iter().enumerate() {
        q.set_column(k, f);
        q.set_column(k + n, &(j * f));
    }
    let (g0, j0) = standard_pair(n);
    let scale = q.amax().max(1.0).powi(2) * g.amax().max(1.0);
    let metric = (q.transpose() * g * &q - g0).amax();
    let complex = (j * &q - &q * j0).amax();
    if metric > 1e-9 * scale || complex > 1e-9 * scale {
        return Err(Error::Numeric(format!(
            "adapted frame residuals too large ({metric:e}, {complex:e})"
        )));
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::{random_point, standard_pair};

    #[test]
    fn standard_pair_frame_is_identity() {
        let (g0, j0) = standard_pair(3);
        let q = adapted_frame(&g0, &j0).unwrap();
        assert!((q - DMatrix::<f64>::identity(6, 6)).amax() < 1e-14);
    }

    #[test]
    fn random_frames_are_adapted() {
        for seed in 0..30 {
            for dim in [4, 6, 8] {
                let pt = random_point(seed, dim).unwrap();
                let (g, j) = (pt.g().to_matrix(), pt.j().to_matrix());
                let q = adapted_frame(&g, &j).unwrap();
                let (g0, j0) = standard_pair(dim / 2);
                assert!((q.transpose() * &g * &q - g0).amax() < 1e-10);
                assert!((&j * &q - &q * j0).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn complex_inverse_square_root() {
        for z in [(4.0, 0.0), (-4.0, 0.0), (0.0, 2.0), (3.0, -4.0)] {
            let (a, b) = complex_inv_sqrt(z);
            // (a + ib)² z = 1
            let (s_re, s_im) = (a * a - b * b, 2.0 * a * b);
            let re = s_re * z.0 - s_im * z.1;
            let im = s_re * z.1 + s_im * z.0;
            assert!((re - 1.0).abs() < 1e-14 && im.abs() < 1e-14, "{z:?}");
        }
    }
}
