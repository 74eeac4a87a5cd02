//! Coordinate charts with Norden metric: Levi-Civita data, the complex
//! connections of a W1 chart, their curvature and scalar curvatures.
//!
//! Metric entries are differentiated symbolically up to second order.
//! Quantities built from them (`g⁻¹`, `Γ`, `F`, `θ`, `Ω`, `Γ′`) carry their
//! first derivatives as [`Jet`]s, so curvature and `dθ` are exact up to
//! roundoff. Only the derivatives of the scalar curvatures use finite
//! differences.

mod chart;
mod curvature;
mod geometry;
mod jet;

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pointwise::{classify, NordenPoint};
use crate::report::{CheckResult, VerificationReport};
use crate::tensor::{component_norm, Slot, Tensor};
use crate::tolerance;

pub use chart::{Chart, ChartJson, BUILTIN_CHARTS};
pub use curvature::{
    curvature_like_residual, kaehler_residual, psi1, psi2, psi_pi_tensors, ricci_and_scalars, PsiPi,
};
pub use geometry::LocalGeometry;
pub use jet::{Jet, MAX_DIM};

/// `‖a − b‖ / max(1, ‖a‖, ‖b‖)`: absolute for small tensors, relative for
/// large ones.
pub fn scaled_difference(a: &Tensor, b: &Tensor) -> f64 {
    let scale = component_norm(a).max(component_norm(b)).max(1.0);
    component_norm(&(a - b)) / scale
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
pub fn relative_difference(a: &Tensor, b: &Tensor) -> f64 {
    let scale = component_norm(a).max(component_norm(b));
    if scale == 0.0 {
        return 0.0;
    }
    component_norm(&(a - b)) / scale
}

pub fn christoffel(chart: &Chart, x: &[f64]) -> Result<Tensor> {
    Ok(LocalGeometry::new(chart, x)?.christoffel())
}

/// `F`, the Lie forms and their exterior derivatives at one point.
#[derive(Clone, Debug)]
pub struct FieldData {
    pub point: NordenPoint,
    pub theta: Tensor,
    pub theta_star: Tensor,
    pub d_theta: Tensor,
    pub d_theta_star: Tensor,
}

pub fn field_f_theta(chart: &Chart, x: &[f64]) -> Result<FieldData> {
    let geom = LocalGeometry::new(chart, x)?;
    Ok(FieldData {
        point: geom.point()?,
        theta: geom.theta(),
        theta_star: geom.theta_star(),
        d_theta: geom.d_theta(),
        d_theta_star: geom.d_theta_star(),
    })
}

pub fn levi_civita_curvature(chart: &Chart, x: &[f64]) -> Result<Tensor> {
    Ok(LocalGeometry::new(chart, x)?.levi_civita_curvature())
}

/// `Γ′^k_ij` of the complex connection with parameters `(p, q)`, valence
/// `[Down, Down, Up]`. Requires `F` in W1 at `x`.
pub fn prime_connection_coeffs(chart: &Chart, x: &[f64], p: f64, q: f64) -> Result<Tensor> {
    let geom = LocalGeometry::new(chart, x)?;
    geom.require_w1()?;
    let gamma = geom.prime_gamma(p, q);
    Ok(Tensor::new(
        geom.dim(),
        vec![Slot::Down, Slot::Down, Slot::Up],
        gamma.iter().map(|j| j.value).collect(),
    )?)
}

/// `(∇′g, ∇′g̃)` of the complex connection `(p, q)`, computed from its
/// coefficients. Requires `F` in W1 at `x`.
pub fn prime_metric_derivatives(
    chart: &Chart,
    x: &[f64],
    p: f64,
    q: f64,
) -> Result<(Tensor, Tensor)> {
    let geom = LocalGeometry::new(chart, x)?;
    geom.require_w1()?;
    let gamma = geom.prime_gamma(p, q);
    Ok((
        geom.metric_derivative(&gamma, false),
        geom.metric_derivative(&gamma, true),
    ))
}

#[derive(Clone, Debug)]
pub struct PrimeCurvature {
    pub r_prime: Tensor,
    pub ricci: Tensor,
    pub tau: f64,
    pub tau_star: f64,
}

fn prime_curvature_of(geom: &LocalGeometry, p: f64, q: f64) -> PrimeCurvature {
    let r_prime = geom.curvature_of(&geom.prime_gamma(p, q));
    let (ricci, tau, tau_star) = ricci_and_scalars(&r_prime, &geom.metric_inverse(), geom.j());
    PrimeCurvature {
        r_prime,
        ricci,
        tau,
        tau_star,
    }
}

/// Curvature `R′` of the complex connection `(p, q)`, its Ricci tensor and
/// scalar curvatures `τ′`, `τ′*`. Requires `F` in W1 at `x`.
pub fn prime_curvature(chart: &Chart, x: &[f64], p: f64, q: f64) -> Result<PrimeCurvature> {
    let geom = LocalGeometry::new(chart, x)?;
    geom.require_w1()?;
    Ok(prime_curvature_of(&geom, p, q))
}

fn outer(a: &Tensor, b: &Tensor) -> Tensor {
    Tensor::from_fn(a.dim(), vec![Slot::Down; 2], |i| {
        a.get(&[i[0]]) * b.get(&[i[1]])
    })
}

/// `R − (1/4n){ψ1 + ψ2}(S) − (1/8n²)ψ1(P) − (θ(Ω)/16n²){3π1 + π2} + (θ(JΩ)/16n²)π3`
/// with `S(X,Y) = (∇_X θ)JY + (1/4n){θ(X)θ(Y) − θ(JX)θ(JY)}` and
/// `P(X,Y) = θ(X)θ(Y) + θ(JX)θ(JY)`.
pub fn structural_curvature(geom: &LocalGeometry) -> Tensor {
    let n = (geom.dim() / 2) as f64;
    let (g, j) = (geom.metric(), geom.j_tensor());
    let (theta, theta_star) = (geom.theta(), geom.theta_star());
    let tt = outer(&theta, &theta);
    let tsts = outer(&theta_star, &theta_star);
    let s = geom
        .nabla_theta()
        .twist(1, &j)
        .axpy(1.0 / (4.0 * n), &(&tt - &tsts));
    let p = &tt + &tsts;
    let pp = psi_pi_tensors(&s, &g, &j);
    let omega = geom.omega();
    let theta_omega = theta.dot(&omega.clone().with_valence(vec![Slot::Down]));
    let j_omega = omega.twist(0, &j);
    let theta_j_omega = theta.dot(&j_omega.with_valence(vec![Slot::Down]));
    let n2 = n * n;
    geom.levi_civita_curvature()
        .axpy(-1.0 / (4.0 * n), &(&pp.psi1 + &pp.psi2))
        .axpy(-1.0 / (8.0 * n2), &psi1(&p, &g))
        .axpy(
            -theta_omega / (16.0 * n2),
            &pp.pi1.scale(3.0).axpy(1.0, &pp.pi2),
        )
        .axpy(theta_j_omega / (16.0 * n2), &pp.pi3)
}

/// `∇′g` and `∇′g̃` of the `(p, q)` connection written through `θ`.
fn w1_metric_derivatives(geom: &LocalGeometry, p: f64, q: f64) -> (Tensor, Tensor) {
    let n = (geom.dim() / 2) as f64;
    let (g, j) = (geom.metric(), geom.j_tensor());
    let g_tilde = g.twist(1, &j);
    let (theta, theta_star) = (geom.theta(), geom.theta_star());
    let a = theta.scale(p).axpy(q, &theta_star);
    let b = theta_star.scale(p).axpy(-q, &theta);
    let tensor = |form: &Tensor, h: &Tensor| {
        Tensor::from_fn(geom.dim(), vec![Slot::Down; 3], |i| {
            form.get(&[i[0]]) * h.get(&[i[1], i[2]])
        })
    };
    let nabla_g = (&tensor(&a, &g) + &tensor(&b, &g_tilde)).scale(-2.0 / n);
    let nabla_g_tilde = (&tensor(&b, &g) - &tensor(&a, &g_tilde)).scale(2.0 / n);
    (nabla_g, nabla_g_tilde)
}

/// `T^k_ij` of the `(p, q)` connection written through `θ`, valence
/// `[Down, Down, Up]`.
fn w1_torsion(geom: &LocalGeometry, p: f64, q: f64) -> Tensor {
    let d = geom.dim();
    let n = (d / 2) as f64;
    let jm = geom.j();
    let (th, ths) = (geom.theta(), geom.theta_star());
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    Tensor::from_fn(d, vec![Slot::Down, Slot::Down, Slot::Up], |ix| {
        let (i, j, k) = (ix[0], ix[1], ix[2]);
        let (ti, tj, si, sj) = (th.get(&[i]), th.get(&[j]), ths.get(&[i]), ths.get(&[j]));
        (1.0 - 4.0 * q) / (4.0 * n)
            * (ti * jm[(k, j)] - tj * jm[(k, i)] - si * delta(j, k) + sj * delta(i, k))
            + p / n * (ti * delta(j, k) - tj * delta(i, k) + si * jm[(k, j)] - sj * jm[(k, i)])
    })
}

/// Agreement checks for a W1 chart at `x`: metric derivatives and torsion
/// of the `(p, q)` connection against their `θ` forms, the connection against
/// the general family, and `R′` against the structural formula.
pub fn verify_w1_theorems(chart: &Chart, x: &[f64], p: f64, q: f64) -> Result<VerificationReport> {
    let geom = LocalGeometry::new(chart, x)?;
    let pt = geom.require_w1()?;
    let gamma = geom.prime_gamma(p, q);
    let tol = tolerance::DERIVATIVE;
    let params = crate::connections::ConnectionParams::from_pq(p, q);
    let mut report = VerificationReport::new();
    let mut push = |name: &str, residual: f64| {
        report.push(
            CheckResult::below(name, residual, tol)
                .class("W1")
                .params(params)
                .note(format!("{} at {:?}", chart.name(), x)),
        );
    };

    let (ng, ngt) = w1_metric_derivatives(&geom, p, q);
    push(
        "w1 nabla g",
        scaled_difference(&geom.metric_derivative(&gamma, false), &ng),
    );
    push(
        "w1 nabla g~",
        scaled_difference(&geom.metric_derivative(&gamma, true), &ngt),
    );

    let d = geom.dim();
    let values: Vec<f64> = gamma.iter().map(|j| j.value).collect();
    let gamma_prime = Tensor::new(d, vec![Slot::Down, Slot::Down, Slot::Up], values)?;
    let torsion = &gamma_prime - &gamma_prime.permute(&[1, 0, 2]);
    push(
        "w1 torsion",
        scaled_difference(&torsion, &w1_torsion(&geom, p, q)),
    );

    let q_tensor = crate::tensor::raise_lower(
        &(&gamma_prime - &geom.christoffel()),
        2,
        &geom.metric(),
        Slot::Down,
    )?;
    let family = crate::connections::difference_tensor(&pt, params);
    push(
        "w1 connection vs family",
        scaled_difference(&q_tensor, &family),
    );

    let r_prime = geom.curvature_of(&gamma);
    let structural = structural_curvature(&geom);
    push(
        "curvature structural formula",
        relative_difference(&r_prime, &structural),
    );
    let scale = component_norm(&r_prime).max(f64::MIN_POSITIVE);
    push(
        "curvature kaehler identity",
        kaehler_residual(&r_prime, &geom.j_tensor()) / scale,
    );
    push(
        "curvature curvature-like",
        curvature_like_residual(&r_prime) / scale,
    );
    Ok(report)
}

/// Relative difference of the curvature tensors of two complex connections
/// `(p, q)` at `x`.
pub fn curvature_parameter_independence(
    chart: &Chart,
    x: &[f64],
    first: (f64, f64),
    second: (f64, f64),
) -> Result<f64> {
    let geom = LocalGeometry::new(chart, x)?;
    geom.require_w1()?;
    let a = geom.curvature_of(&geom.prime_gamma(first.0, first.1));
    let b = geom.curvature_of(&geom.prime_gamma(second.0, second.1));
    Ok(relative_difference(&a, &b))
}

/// `τ′`, `τ′*` at `x` for the `(p, q)` connection.
pub fn scalar_curvatures(chart: &Chart, x: &[f64], p: f64, q: f64) -> Result<(f64, f64)> {
    let c = prime_curvature(chart, x, p, q)?;
    Ok((c.tau, c.tau_star))
}

/// Gradients of `τ′` and `τ′*` by central differences with steps `h` and
/// `h/2`, combined by Richardson extrapolation.
pub fn scalar_curvature_gradients(
    chart: &Chart,
    x: &[f64],
    p: f64,
    q: f64,
    h: f64,
) -> Result<(Tensor, Tensor)> {
    let d = chart.dim();
    let mut dtau = vec![0.0; d];
    let mut dtau_star = vec![0.0; d];
    for i in 0..d {
        let central = |step: f64| -> Result<(f64, f64)> {
            let mut plus = x.to_vec();
            let mut minus = x.to_vec();
            plus[i] += step;
            minus[i] -= step;
            let (a, b) = scalar_curvatures(chart, &plus, p, q)?;
            let (c, e) = scalar_curvatures(chart, &minus, p, q)?;
            Ok(((a - c) / (2.0 * step), (b - e) / (2.0 * step)))
        };
        let (coarse, fine) = (central(h)?, central(h / 2.0)?);
        dtau[i] = (4.0 * fine.0 - coarse.0) / 3.0;
        dtau_star[i] = (4.0 * fine.1 - coarse.1) / 3.0;
    }
    Ok((Tensor::covector(&dtau), Tensor::covector(&dtau_star)))
}

pub const SCALAR_STEP: f64 = 1e-4;

/// Checks of the differential relations between `τ′`, `τ′*` and the Lie
/// forms: the two relations for `dτ′` and `dτ′*`, the Cauchy-Riemann
/// condition `dτ′* ∘ J = −dτ′`, the recovery of `θ` and `θ*` from `τ′`, `τ′*`,
/// and `d(τ′² + τ′*²) = −(1/n)(τ′² + τ′*²)θ*`.
pub fn tau_checks(chart: &Chart, x: &[f64], p: f64, q: f64) -> Result<VerificationReport> {
    let geom = LocalGeometry::new(chart, x)?;
    geom.require_w1()?;
    let c = prime_curvature_of(&geom, p, q);
    let (tau, tau_star) = (c.tau, c.tau_star);
    let modulus = tau * tau + tau_star * tau_star;
    if !(modulus > 1e-6) {
        return Err(Error::Precondition(format!(
            "τ′² + τ′*² = {modulus:e} at probe point {x:?} of chart `{}`",
            chart.name()
        )));
    }
    let n = (chart.dim() / 2) as f64;
    let (dtau, dtau_star) = scalar_curvature_gradients(chart, x, p, q, SCALAR_STEP)?;
    let (theta, theta_star) = (geom.theta(), geom.theta_star());
    let j = geom.j_tensor();

    let tol = tolerance::SCALAR_CURVATURE;
    let params = crate::connections::ConnectionParams::from_pq(p, q);
    let mut report = VerificationReport::new();
    let mut push = |name: &str, residual: f64| {
        report.push(
            CheckResult::below(name, residual, tol)
                .class("W1")
                .params(params)
                .note(format!("{} at {:?}", chart.name(), x)),
        );
    };

    let rhs_tau = theta
        .scale(tau_star)
        .axpy(-tau, &theta_star)
        .scale(1.0 / (2.0 * n));
    let rhs_tau_star = theta
        .scale(tau)
        .axpy(tau_star, &theta_star)
        .scale(-1.0 / (2.0 * n));
    push("dtau' relation", relative_difference(&dtau, &rhs_tau));
    push(
        "dtau'* relation",
        relative_difference(&dtau_star, &rhs_tau_star),
    );

    let dtau_star_j = dtau_star.twist(0, &j);
    push(
        "cauchy-riemann",
        relative_difference(&dtau_star_j, &(-&dtau)),
    );

    let theta_rec = dtau
        .scale(tau_star)
        .axpy(-tau, &dtau_star)
        .scale(2.0 * n / modulus);
    let theta_star_rec = dtau
        .scale(tau)
        .axpy(tau_star, &dtau_star)
        .scale(-2.0 * n / modulus);
    push(
        "lie form theta recovery",
        relative_difference(&theta, &theta_rec),
    );
    push(
        "lie form theta* recovery",
        relative_difference(&theta_star, &theta_star_rec),
    );

    let d_modulus = dtau.scale(2.0 * tau).axpy(2.0 * tau_star, &dtau_star);
    push(
        "modulus relation",
        relative_difference(&d_modulus, &theta_star.scale(-modulus / n)),
    );
    Ok(report)
}

/// Checks that a chart is W1 with closed Lie forms at every probe point.
pub fn validate_conformal_kaehler(chart: &Chart) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    for x in chart.probe_points() {
        let field = field_f_theta(chart, &x)?;
        let c = classify(&field.point, tolerance::CLASSIFICATION)?;
        let where_ = format!("{} at {:?}", chart.name(), x);
        let is_w1 = c.label() == "W1";
        report.push(
            CheckResult::below("conformal chart class", if is_w1 { 0.0 } else { 1.0 }, 0.5)
                .class(c.label())
                .note(where_.clone()),
        );
        report.push(
            CheckResult::below(
                "conformal chart d theta",
                component_norm(&field.d_theta),
                tolerance::CLOSED_FORM,
            )
            .note(where_.clone()),
        );
        report.push(
            CheckResult::below(
                "conformal chart d theta*",
                component_norm(&field.d_theta_star),
                tolerance::CLOSED_FORM,
            )
            .note(where_),
        );
    }
    Ok(report)
}

/// Checks that `Γ`, `F` and `R` vanish at every probe point.
pub fn flat_checks(chart: &Chart) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    for x in chart.probe_points() {
        let geom = LocalGeometry::new(chart, &x)?;
        let where_ = format!("{} at {:?}", chart.name(), x);
        for (name, t) in [
            ("flat christoffel", geom.christoffel()),
            ("flat F", geom.f()),
            ("flat curvature", geom.levi_civita_curvature()),
        ] {
            report.push(
                CheckResult::below(name, component_norm(&t), tolerance::FLAT)
                    .class("W0")
                    .note(where_.clone()),
            );
        }
    }
    Ok(report)
}

/// Curvature data and named residuals at one point.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    pub chart: String,
    pub point: Vec<f64>,
    pub p: f64,
    pub q: f64,
    pub class: String,
    /// Row-major components of `R(∂i, ∂j, ∂k, ∂w)`.
    pub r: Vec<f64>,
    pub r_prime: Vec<f64>,
    pub ricci: Vec<f64>,
    pub tau: f64,
    pub tau_star: f64,
    pub residuals: BTreeMap<String, f64>,
    pub checks: VerificationReport,
}

pub fn curvature_report(chart: &Chart, x: &[f64], p: f64, q: f64) -> Result<CurvatureReport> {
    let geom = LocalGeometry::new(chart, x)?;
    let pt = geom.point()?;
    let class = classify(&pt, tolerance::CLASSIFICATION)?.label();
    let c = prime_curvature(chart, x, p, q)?;
    let mut checks = verify_w1_theorems(chart, x, p, q)?;
    match tau_checks(chart, x, p, q) {
        Ok(r) => checks.extend(r),
        Err(Error::Precondition(msg)) => {
            checks.push(CheckResult::error("tau precondition", msg).class("W1"))
        }
        Err(e) => return Err(e),
    }
    let residuals = checks
        .checks
        .iter()
        .map(|c| (c.check.clone(), c.residual))
        .collect();
    Ok(CurvatureReport {
        chart: chart.name().into(),
        point: x.to_vec(),
        p,
        q,
        class,
        r: geom.levi_civita_curvature().into_data(),
        r_prime: c.r_prime.into_data(),
        ricci: c.ricci.into_data(),
        tau: c.tau,
        tau_star: c.tau_star,
        residuals,
        checks,
    })
}
