//! Independent re-derivations of quantities the library computes.

use nalgebra::DMatrix;
use norden::connections::{
    difference_tensor, metric_derivatives, special_residuals, torsion_closed_form,
    torsion_from_difference, ConnectionParams,
};
use norden::manifold::{
    christoffel, field_f_theta, levi_civita_curvature, Chart, ChartJson, LocalGeometry,
};
use norden::pointwise::{
    generate_in_class, nijenhuis_pair, random_point, trial_rng, w1_structure, FClass, NordenPoint,
};
use norden::{component_norm, Slot, Tensor};
use rand::Rng;

/// `Q` from the five-term definition, written with explicit index loops.
fn q_by_loops(pt: &NordenPoint, params: ConnectionParams) -> Tensor {
    let d = pt.dim();
    let (f, j) = (pt.f(), pt.j());
    // F with its slots optionally rotated by J: fj(a, ja, b, jb, c) etc.
    let f_at = |x: usize, jx: bool, y: usize, jy: bool, z: usize, jz: bool| -> f64 {
        let span = |v: usize, rotate: bool| -> Vec<(usize, f64)> {
            if rotate {
                (0..d).map(|a| (a, j.get(&[a, v]))).collect()
            } else {
                vec![(v, 1.0)]
            }
        };
        let mut acc = 0.0;
        for (a, ca) in span(x, jx) {
            for (b, cb) in span(y, jy) {
                for (c, cc) in span(z, jz) {
                    acc += ca * cb * cc * f.get(&[a, b, c]);
                }
            }
        }
        acc
    };
    let ConnectionParams { t1, t2, t3, t4 } = params;
    Tensor::from_fn(d, vec![Slot::Down; 3], |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        0.5 * f_at(x, false, y, true, z, false)
            + t1 * (f_at(y, false, x, false, z, false) + f_at(y, true, x, true, z, false))
            + t2 * (f_at(y, false, x, true, z, false) - f_at(y, true, x, false, z, false))
            + t3 * (f_at(z, false, x, false, y, false) + f_at(z, true, x, true, y, false))
            + t4 * (f_at(z, false, x, true, y, false) - f_at(z, true, x, false, y, false))
    })
}

/// `N(X,Y,Z)` and `Ñ(X,Y,Z)` by explicit loops over the `F` components.
fn nijenhuis_by_loops(pt: &NordenPoint) -> (Tensor, Tensor) {
    let d = pt.dim();
    let (f, j) = (pt.f(), pt.j());
    let jf = |slot: usize, idx: [usize; 3]| -> f64 {
        (0..d)
            .map(|a| {
                let mut k = idx;
                k[slot] = a;
                j.get(&[a, idx[slot]]) * f.get(&k)
            })
            .sum()
    };
    // N = F(X,JY,Z) − F(Y,JX,Z) + F(JX,Y,Z) − F(JY,X,Z)
    let n = Tensor::from_fn(d, vec![Slot::Down; 3], |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        jf(1, [x, y, z]) - jf(1, [y, x, z]) + jf(0, [x, y, z]) - jf(0, [y, x, z])
    });
    // Ñ = F(X,JY,Z) + F(Y,JX,Z) + F(JX,Y,Z) + F(JY,X,Z)
    let nt = Tensor::from_fn(d, vec![Slot::Down; 3], |i| {
        let (x, y, z) = (i[0], i[1], i[2]);
        jf(1, [x, y, z]) + jf(1, [y, x, z]) + jf(0, [x, y, z]) + jf(0, [y, x, z])
    });
    (n, nt)
}

#[test]
fn difference_tensor_matches_index_loops() {
    for (seed, dim) in [(1, 4), (2, 6), (3, 4)] {
        let pt = random_point(seed, dim).unwrap();
        let mut rng = trial_rng(seed, 99);
        for _ in 0..5 {
            let params = ConnectionParams::random(&mut rng);
            let lib = difference_tensor(&pt, params);
            assert!(lib.max_abs_diff(&q_by_loops(&pt, params)) < 1e-12);
        }
    }
}

#[test]
fn torsion_matches_antisymmetrized_loops() {
    let pt = random_point(4, 6).unwrap();
    let params = ConnectionParams::new(0.3, -0.7, 0.2, 0.9);
    let q = q_by_loops(&pt, params);
    let t = Tensor::from_fn(6, vec![Slot::Down; 3], |i| {
        q.get(&[i[0], i[1], i[2]]) - q.get(&[i[1], i[0], i[2]])
    });
    assert!(t.max_abs_diff(&torsion_closed_form(&pt, params)) < 1e-12);
    assert!(t.max_abs_diff(&torsion_from_difference(&difference_tensor(&pt, params))) < 1e-12);
}

#[test]
fn nijenhuis_tensors_match_loops() {
    for (seed, dim) in [(5, 4), (6, 6)] {
        let pt = random_point(seed, dim).unwrap();
        let (n, nt) = nijenhuis_pair(&pt).unwrap();
        let (n_ref, nt_ref) = nijenhuis_by_loops(&pt);
        assert!(n.max_abs_diff(&n_ref) < 1e-12);
        assert!(nt.max_abs_diff(&nt_ref) < 1e-12);
    }
}

#[test]
fn complex_classes_have_vanishing_n_and_w3_vanishing_n_tilde() {
    for seed in 0..10 {
        for dim in [4, 6] {
            let w12 = generate_in_class(FClass::W1W2, seed, dim).unwrap();
            assert!(component_norm(&nijenhuis_by_loops(&w12).0) < 1e-10);
            let w3 = generate_in_class(FClass::W3, seed, dim).unwrap();
            assert!(component_norm(&nijenhuis_by_loops(&w3).1) < 1e-10);
        }
    }
}

#[test]
fn bismut_analogue_on_w3_depends_only_on_s_and_t() {
    // Any member with s = 0, t = −1/4 acts on W3 as (0, 0, 0, 1/4).
    let mut rng = trial_rng(7, 0);
    for seed in 0..5 {
        let pt = generate_in_class(FClass::W3, seed, 6).unwrap();
        for _ in 0..4 {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let b: f64 = rng.gen_range(-1.0..1.0);
            let params = ConnectionParams::new(a, b, a, b + 0.25);
            let r = special_residuals(&pt, params).unwrap();
            assert!(r.natural < 1e-10, "natural {}", r.natural);
            assert!(r.three_form < 1e-10, "3-form {}", r.three_form);
        }
    }
}

#[test]
fn natural_family_members_preserve_both_metrics() {
    let pt = random_point(8, 4).unwrap();
    let md = metric_derivatives(&pt, ConnectionParams::new(0.4, -0.3, -0.4, 0.3)).unwrap();
    assert!(component_norm(&md.nabla_g) < 1e-12);
    assert!(component_norm(&md.nabla_g_tilde) < 1e-12);
}

/// A four-dimensional chart with constant `J` and a metric of the Norden
/// block form `[[A, B], [B, −A]]` whose entries vary in every coordinate.
fn generic_chart() -> Chart {
    let (a00, a01, a11) = ("1 + 0.2*x1^2", "0.1*x2*x3", "1 + 0.3*sin(x4)");
    let (b00, b01, b11) = ("0.2*x4", "0.1*x1*x2", "0.15*x3 + 0.1*cos(x1)");
    let neg = |s: &str| format!("-({s})");
    let json = ChartJson {
        name: "generic".into(),
        dim: 4,
        g: vec![
            vec![a00.into(), a01.into(), b00.into(), b01.into()],
            vec![a11.into(), b01.into(), b11.into()],
            vec![neg(a00), neg(a01)],
            vec![neg(a11)],
        ],
        j: vec![
            0.0, 0.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 1.0, 0.0, 0.0,
        ],
        domain: vec![[-0.5, 0.5]; 4],
        conformal_factor: None,
    };
    Chart::from_json(json).unwrap()
}

fn shifted(x: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += h;
    y
}

/// `∂_l g_ij` by fourth-order central differences of the evaluated metric.
fn metric_gradient_fd(chart: &Chart, x: &[f64]) -> Vec<DMatrix<f64>> {
    let h = 1e-3;
    (0..chart.dim())
        .map(|l| {
            let m = |s: f64| chart.metric(&shifted(x, l, s)).unwrap();
            (m(-2.0 * h) - m(2.0 * h) + (m(h) - m(-h)) * 8.0) / (12.0 * h)
        })
        .collect()
}

fn christoffel_fd(chart: &Chart, x: &[f64]) -> Tensor {
    let d = chart.dim();
    let dg = metric_gradient_fd(chart, x);
    let inv = chart.metric(x).unwrap().try_inverse().unwrap();
    Tensor::from_fn(d, vec![Slot::Down, Slot::Down, Slot::Up], |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        0.5 * (0..d)
            .map(|l| inv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
            .sum::<f64>()
    })
}

#[test]
fn christoffel_symbols_match_finite_differences() {
    let chart = generic_chart();
    for x in chart.probe_points() {
        let lib = christoffel(&chart, &x).unwrap();
        assert!(lib.max_abs_diff(&christoffel_fd(&chart, &x)) < 1e-9);
    }
}

#[test]
fn levi_civita_connection_is_metric() {
    let chart = generic_chart();
    let d = chart.dim();
    for x in chart.probe_points() {
        let gamma = christoffel(&chart, &x).unwrap();
        let g = chart.metric(&x).unwrap();
        let dg = metric_gradient_fd(&chart, &x);
        let mut worst: f64 = 0.0;
        for l in 0..d {
            for i in 0..d {
                for j in 0..d {
                    let mut v = dg[l][(i, j)];
                    for m in 0..d {
                        v -= gamma.get(&[l, i, m]) * g[(m, j)] + gamma.get(&[l, j, m]) * g[(i, m)];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }
}

/// `R(∂i,∂j,∂k,∂w) = g(∇_i∇_j ∂k − ∇_j∇_i ∂k, ∂w)` from finite differences of
/// the finite-difference Christoffel symbols.
fn curvature_fd(chart: &Chart, x: &[f64]) -> Tensor {
    let d = chart.dim();
    let h = 1e-3;
    let gamma = christoffel_fd(chart, x);
    let dgamma: Vec<Tensor> = (0..d)
        .map(|i| {
            let plus = christoffel_fd(chart, &shifted(x, i, h));
            let minus = christoffel_fd(chart, &shifted(x, i, -h));
            (&plus - &minus).scale(0.5 / h)
        })
        .collect();
    let g = chart.metric(x).unwrap();
    Tensor::from_fn(d, vec![Slot::Down; 4], |ix| {
        let (i, j, k, w) = (ix[0], ix[1], ix[2], ix[3]);
        (0..d)
            .map(|l| {
                let mut v = dgamma[i].get(&[j, k, l]) - dgamma[j].get(&[i, k, l]);
                for m in 0..d {
                    v += gamma.get(&[i, m, l]) * gamma.get(&[j, k, m])
                        - gamma.get(&[j, m, l]) * gamma.get(&[i, k, m]);
                }
                v * g[(l, w)]
            })
            .sum()
    })
}

#[test]
fn curvature_matches_finite_differences_and_pair_symmetry() {
    let chart = generic_chart();
    for x in chart.probe_points() {
        let r = levi_civita_curvature(&chart, &x).unwrap();
        let scale = component_norm(&r);
        assert!(scale > 1e-2);
        assert!(component_norm(&(&r - &curvature_fd(&chart, &x))) < 1e-5 * scale);
        assert!(r.max_abs_diff(&r.permute(&[2, 3, 0, 1])) < 1e-12 * scale.max(1.0));
    }
}

/// Conformal factor `u = x1² − x3²` of the built-in `conformal4` chart.
fn conformal_du(x: &[f64]) -> [f64; 4] {
    [2.0 * x[0], 0.0, -2.0 * x[2], 0.0]
}

const G0: [f64; 4] = [1.0, 1.0, -1.0, -1.0];

#[test]
fn conformal_christoffel_symbols_match_closed_form() {
    let chart = Chart::builtin("conformal4").unwrap();
    for x in chart.probe_points() {
        let du = conformal_du(&x);
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let oracle = Tensor::from_fn(4, vec![Slot::Down, Slot::Down, Slot::Up], |ix| {
            let (i, j, k) = (ix[0], ix[1], ix[2]);
            delta(k, i) * du[j] + delta(k, j) * du[i] - delta(i, j) * G0[i] * G0[k] * du[k]
        });
        assert!(christoffel(&chart, &x).unwrap().max_abs_diff(&oracle) < 1e-12);
    }
}

#[test]
fn conformal_curvature_matches_closed_form() {
    let chart = Chart::builtin("conformal4").unwrap();
    let hess = [2.0, 0.0, -2.0, 0.0];
    for x in chart.probe_points() {
        let du = conformal_du(&x);
        let u = x[0] * x[0] - x[2] * x[2];
        let du_sq: f64 = (0..4).map(|i| G0[i] * du[i] * du[i]).sum();
        let g0 = |a: usize, b: usize| if a == b { G0[a] } else { 0.0 };
        let s = |a: usize, b: usize| {
            let h = if a == b { hess[a] } else { 0.0 };
            h - du[a] * du[b] + 0.5 * du_sq * g0(a, b)
        };
        let oracle = Tensor::from_fn(4, vec![Slot::Down; 4], |ix| {
            let (a, b, c, e) = (ix[0], ix[1], ix[2], ix[3]);
            let psi =
                g0(b, c) * s(a, e) - g0(a, c) * s(b, e) + g0(a, e) * s(b, c) - g0(b, e) * s(a, c);
            -(2.0 * u).exp() * psi
        });
        let r = levi_civita_curvature(&chart, &x).unwrap();
        assert!(r.max_abs_diff(&oracle) < 1e-12 * component_norm(&oracle).max(1.0));
    }
}

#[test]
fn d_theta_matches_finite_differences() {
    let chart = generic_chart();
    let h = 1e-6;
    for x in chart.probe_points() {
        let field = field_f_theta(&chart, &x).unwrap();
        let grad: Vec<(Tensor, Tensor)> = (0..4)
            .map(|i| {
                let plus = field_f_theta(&chart, &shifted(&x, i, h)).unwrap();
                let minus = field_f_theta(&chart, &shifted(&x, i, -h)).unwrap();
                (
                    (&plus.theta - &minus.theta).scale(0.5 / h),
                    (&plus.theta_star - &minus.theta_star).scale(0.5 / h),
                )
            })
            .collect();
        let d_fd = |star: bool| {
            Tensor::from_fn(4, vec![Slot::Down; 2], |ix| {
                let (i, j) = (ix[0], ix[1]);
                let pick = |k: usize| if star { &grad[k].1 } else { &grad[k].0 };
                pick(i).get(&[j]) - pick(j).get(&[i])
            })
        };
        let scale = component_norm(&field.d_theta).max(1.0);
        assert!(component_norm(&field.d_theta) > 1e-3);
        assert!(field.d_theta.max_abs_diff(&d_fd(false)) < 1e-7 * scale);
        assert!(field.d_theta_star.max_abs_diff(&d_fd(true)) < 1e-7 * scale);
    }
}

#[test]
fn conformal_lie_form_matches_least_squares_fit() {
    // On a W1 point F is linear in θ; fit θ from F alone.
    for name in ["conformal4", "conformal6"] {
        let chart = Chart::builtin(name).unwrap();
        let d = chart.dim();
        for x in chart.probe_points() {
            let geom = LocalGeometry::new(&chart, &x).unwrap();
            let (g, j, f) = (geom.metric(), geom.j_tensor(), geom.f());
            let columns: Vec<Vec<f64>> = (0..d)
                .map(|k| {
                    let mut e = vec![0.0; d];
                    e[k] = 1.0;
                    w1_structure(&g, &j, &Tensor::covector(&e)).into_data()
                })
                .collect();
            let a = DMatrix::from_fn(d * d * d, d, |r, c| columns[c][r]);
            let b = DMatrix::from_column_slice(d * d * d, 1, f.data());
            let fit = a.clone().svd(true, true).solve(&b, 1e-12).unwrap();
            let residual = (&a * &fit - &b).norm();
            assert!(residual < 1e-10 * b.norm().max(1.0), "{residual}");
            let theta = geom.theta();
            for k in 0..d {
                assert!((fit[k] - theta.get(&[k])).abs() < 1e-10 * theta.max_abs().max(1.0));
            }
        }
    }
}
