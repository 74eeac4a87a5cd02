//! The full verification run: every pointwise, connection and chart check,
//! repeated over seeded trials and dimensions and folded into one report.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::connections::{
    almost_complex_residual, general_point, metric_derivatives, parameter_grid, table1_matrix,
    AffineResidual, ConnectionParams, GRID_VALUES,
};
use crate::error::{Error, Result};
use crate::manifold::{
    curvature_parameter_independence, flat_checks, prime_connection_coeffs,
    prime_metric_derivatives, tau_checks, validate_conformal_kaehler, verify_w1_theorems, Chart,
    LocalGeometry,
};
use crate::pointwise::{
    classify, generate_in_class_with, random_point_with, trial_rng, ClassProjectors, FClass,
    NordenPoint,
};
use crate::report::{Bound, CheckResult, VerificationReport};
use crate::tensor::component_norm;
use crate::tolerance::{self, Tolerances};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Section {
    Pointwise,
    AlmostComplex,
    Lemma,
    Characterizations,
    Table1,
    Charts,
    W1,
}

impl Section {
    /// Execution order.
    pub const ALL: [Section; 7] = [
        Section::Pointwise,
        Section::AlmostComplex,
        Section::Lemma,
        Section::Characterizations,
        Section::Table1,
        Section::Charts,
        Section::W1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Section::Pointwise => "pointwise",
            Section::AlmostComplex => "almost-complex",
            Section::Lemma => "lemma",
            Section::Characterizations => "characterizations",
            Section::Table1 => "table1",
            Section::Charts => "charts",
            Section::W1 => "w1",
        }
    }
}

impl FromStr for Section {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Section::ALL
            .into_iter()
            .find(|sec| sec.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Section::ALL.iter().map(|s| s.name()).collect();
                Error::Config(format!(
                    "unknown section `{s}`, expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub dims: Vec<usize>,
    pub trials: usize,
    pub tolerances: Tolerances,
    /// Built-in chart names or paths to chart JSON files.
    pub charts: Vec<String>,
    pub sections: Vec<Section>,
    pub out: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            dims: vec![4, 6],
            trials: 20,
            tolerances: Tolerances::default(),
            charts: vec![
                "flat4".into(),
                "flat6".into(),
                "conformal4".into(),
                "conformal6".into(),
            ],
            sections: Section::ALL.to_vec(),
            out: None,
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(Error::Config("at least one dimension is required".into()));
        }
        if let Some(d) = self.dims.iter().find(|d| **d < 4 || **d % 2 != 0) {
            return Err(Error::Config(format!(
                "dimensions must be even and at least 4, got {d}"
            )));
        }
        let t = self.tolerances;
        if !(t.structural > 0.0 && t.derivative > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("suite config: {e}")))
    }

    /// Loads every chart, failing on the first that cannot be read.
    pub fn load_charts(&self) -> Result<Vec<Chart>> {
        self.charts.iter().map(|c| Chart::resolve(c)).collect()
    }
}

/// Residual statistics of one aggregated check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckStatistics {
    pub check: String,
    pub class: Option<String>,
    pub count: usize,
    pub failures: usize,
    pub max: f64,
    pub median: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    /// One entry per check name and class; the residual is the worst over
    /// all trials.
    pub report: VerificationReport,
    pub statistics: Vec<CheckStatistics>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.report.all_pass()
    }

    pub fn to_json(&self) -> String {
        self.report.to_json()
    }

    pub fn to_text(&self) -> String {
        let mut out = self.report.to_text();
        let width = self
            .statistics
            .iter()
            .map(|s| s.check.len())
            .max()
            .unwrap_or(5)
            .max(5);
        let _ = writeln!(
            out,
            "\n{:<width$}  {:>6}  {:>10}  {:>10}",
            "check", "samples", "max", "median"
        );
        for s in &self.statistics {
            let _ = writeln!(
                out,
                "{:<width$}  {:>6}  {:>10.3e}  {:>10.3e}",
                s.check, s.count, s.max, s.median
            );
        }
        out
    }
}

fn stream(section: Section, dim: usize, trial: usize) -> u64 {
    ((section as u64) << 48) | ((dim as u64) << 32) | trial as u64
}

fn tag(check: CheckResult, dim: usize) -> CheckResult {
    let check_name = format!("{} (dim {dim})", check.check);
    CheckResult {
        check: check_name,
        ..check
    }
}

/// Runs `trial` for every dimension and trial index in parallel, keeping the
/// results in (dimension, trial) order.
fn per_trial(
    config: &SuiteConfig,
    section: Section,
    trial: impl Fn(&mut ChaCha8Rng, usize) -> Result<Vec<CheckResult>> + Sync,
) -> Vec<CheckResult> {
    let jobs: Vec<(usize, usize)> = config
        .dims
        .iter()
        .flat_map(|&d| (0..config.trials).map(move |k| (d, k)))
        .collect();
    jobs.par_iter()
        .map(|&(d, k)| {
            let mut rng = trial_rng(config.seed, stream(section, d, k));
            let checks = trial(&mut rng, d).unwrap_or_else(|e| {
                vec![CheckResult::error(
                    format!("{}/trial", section.name()),
                    e.to_string(),
                )]
            });
            checks
                .into_iter()
                .map(|c| tag(c.seed(config.seed), d))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn pass_fail(check: &str, ok: bool) -> CheckResult {
    CheckResult::below(check, if ok { 0.0 } else { 1.0 }, 0.5)
}

fn pointwise_trial(rng: &mut ChaCha8Rng, dim: usize, tol: &Tolerances) -> Result<Vec<CheckResult>> {
    let pt = random_point_with(rng, dim)?;
    let inv = pt.invariant_residuals();
    let mut out = vec![
        CheckResult::below("pointwise/invariants", inv.max_residual(), tol.structural),
        pass_fail("pointwise/signature", inv.positive_eigenvalues == dim / 2),
    ];
    let text = serde_json::to_string(&pt)?;
    let back: NordenPoint = serde_json::from_str(&text)?;
    let drift = back
        .g()
        .max_abs_diff(pt.g())
        .max(back.f().max_abs_diff(pt.f()));
    out.push(CheckResult::below(
        "pointwise/json round trip",
        drift,
        tol.structural,
    ));
    out.push(CheckResult::below(
        "pointwise/projector decomposition",
        ClassProjectors::new(&pt)?.decomposition_residual(),
        tolerance::PROJECTOR,
    ));
    for class in FClass::ALL {
        let generated = generate_in_class_with(rng, class, dim)?;
        let label = classify(&generated, tolerance::CLASSIFICATION)?.label();
        out.push(
            pass_fail(
                &format!("pointwise/class round trip {}", class.name()),
                label == class.name(),
            )
            .class(class.name())
            .note(format!("classified as {label}")),
        );
    }
    Ok(out)
}

/// Parameters with `|p| + |q| > 0.01`.
fn non_natural(rng: &mut ChaCha8Rng) -> ConnectionParams {
    loop {
        let params = ConnectionParams::random(rng);
        if params.p().abs() + params.q().abs() > 0.01 {
            return params;
        }
    }
}

/// Smallest residual over the grid members accepted by `keep`.
fn grid_min(
    residual: &AffineResidual,
    grid: &[ConnectionParams],
    keep: impl Fn(&ConnectionParams) -> bool,
) -> (f64, ConnectionParams) {
    grid.iter()
        .filter(|p| keep(p))
        .map(|p| (residual.residual(*p), *p))
        .fold((f64::INFINITY, ConnectionParams::default()), |a, b| {
            if b.0 < a.0 {
                b
            } else {
                a
            }
        })
}

fn characterization_trial(
    rng: &mut ChaCha8Rng,
    dim: usize,
    tol: &Tolerances,
    grid: &[ConnectionParams],
) -> Result<Vec<CheckResult>> {
    let sep = tolerance::SEPARATION;
    let mut out = Vec::new();
    let pt = general_point(rng, dim)?;

    let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let natural = ConnectionParams::new(a, b, -a, -b);
    let r = metric_derivatives(&pt, natural)?.natural_residual();
    out.push(CheckResult::below("natural/t1=-t3, t2=-t4", r, tol.structural).params(natural));
    let other = non_natural(rng);
    let r = metric_derivatives(&pt, other)?.natural_residual();
    out.push(CheckResult::above("natural/p or q nonzero", r, sep).params(other));

    let canonical = AffineResidual::canonical(&pt);
    let target = ConnectionParams::CANONICAL;
    out.push(
        CheckResult::below(
            "canonical/(0,1/8,0,-1/8)",
            canonical.residual(target),
            tol.structural,
        )
        .params(target),
    );
    let mut natural_grid = Vec::new();
    for &t1 in &GRID_VALUES {
        for &t2 in &GRID_VALUES {
            natural_grid.push(ConnectionParams::new(t1, t2, -t1, -t2));
        }
    }
    let (min, at) = grid_min(&canonical, &natural_grid, |p| *p != target);
    out.push(CheckResult::above("canonical/other natural grid members", min, sep).params(at));

    let three_form = AffineResidual::three_form(&pt);
    let target = ConnectionParams::THREE_FORM;
    out.push(
        CheckResult::below(
            "3-form/(0,0,0,1/4)",
            three_form.residual(target),
            tol.structural,
        )
        .params(target),
    );
    let (min, at) = grid_min(&three_form, grid, |p| *p != target);
    out.push(CheckResult::above("3-form/other grid members", min, sep).params(at));

    let (min, at) = grid_min(&AffineResidual::symmetric(&pt), grid, |_| true);
    out.push(CheckResult::above("symmetric/grid on N nondegenerate", min, sep).params(at));
    let complex = generate_in_class_with(rng, FClass::W1W2, dim)?;
    let yano = ConnectionParams::YANO;
    out.push(
        CheckResult::below(
            "symmetric/yano on W1⊕W2",
            AffineResidual::symmetric(&complex).residual(yano),
            tol.structural,
        )
        .class("W1⊕W2")
        .params(yano),
    );
    Ok(out)
}

fn chart_kind(chart: &Chart) -> Result<bool> {
    // Flat when F vanishes at every probe point.
    for x in chart.probe_points() {
        let geom = LocalGeometry::new(chart, &x)?;
        if component_norm(&geom.f()) > tolerance::DEGENERATE_F {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(p, q)` pairs used on W1 charts: the natural pair, a fixed pair, the
/// symmetric pair and one random pair.
fn w1_pairs(rng: &mut ChaCha8Rng) -> [(f64, f64); 4] {
    [
        (0.0, 0.0),
        (0.3, -0.2),
        (0.0, 0.25),
        (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ]
}

fn w1_chart_checks(chart: &Chart, seed: u64, tol: &Tolerances) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let probes = chart.probe_points();
    let per_point: Vec<Result<VerificationReport>> = probes
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rng = trial_rng(seed, stream(Section::W1, chart.dim(), i));
            let pairs = w1_pairs(&mut rng);
            let mut r = VerificationReport::new();
            for (p, q) in pairs {
                r.extend(verify_w1_theorems(chart, x, p, q)?);
            }
            let where_ = format!("{} at {:?}", chart.name(), x);
            let (nabla_g, _) = prime_metric_derivatives(chart, x, 0.0, 0.0)?;
            r.push(
                CheckResult::below(
                    "w1 natural at p=q=0",
                    component_norm(&nabla_g),
                    tol.structural,
                )
                .class("W1")
                .params(ConnectionParams::from_pq(0.0, 0.0))
                .note(where_.clone()),
            );
            let gamma = prime_connection_coeffs(chart, x, 0.0, 0.25)?;
            let torsion = &gamma - &gamma.permute(&[1, 0, 2]);
            r.push(
                CheckResult::below(
                    "w1 symmetric at p=0, q=1/4",
                    component_norm(&torsion),
                    tolerance::CLOSED_FORM,
                )
                .class("W1")
                .params(ConnectionParams::from_pq(0.0, 0.25))
                .note(where_.clone()),
            );
            let independence = curvature_parameter_independence(chart, x, pairs[1], pairs[3])?;
            r.push(
                CheckResult::below(
                    "curvature parameter independence",
                    independence,
                    tol.derivative,
                )
                .class("W1")
                .note(format!(
                    "{where_}, (p,q) = {:?} and {:?}",
                    pairs[1], pairs[3]
                )),
            );
            for (p, q) in [pairs[0], pairs[1]] {
                match tau_checks(chart, x, p, q) {
                    Ok(t) => r.extend(t),
                    Err(Error::Precondition(msg)) => r.push(
                        CheckResult::error("tau precondition", msg)
                            .class("W1")
                            .params(ConnectionParams::from_pq(p, q)),
                    ),
                    Err(e) => return Err(e),
                }
            }
            Ok(r)
        })
        .collect();
    for r in per_point {
        report.extend(r?);
    }
    Ok(report)
}

fn chart_sections(
    config: &SuiteConfig,
    charts: &[Chart],
    run_validation: bool,
    run_w1: bool,
) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for chart in charts {
        let label = |c: CheckResult| {
            let name = format!("{} [{}]", c.check, chart.name());
            CheckResult { check: name, ..c }.seed(config.seed)
        };
        let flat = match chart_kind(chart) {
            Ok(flat) => flat,
            Err(e) => {
                out.push(label(CheckResult::error("charts/load", e.to_string())));
                continue;
            }
        };
        let validation = if flat {
            flat_checks(chart)
        } else {
            validate_conformal_kaehler(chart)
        };
        let validated = match validation {
            Ok(report) => {
                let ok = report.all_pass();
                if run_validation {
                    out.extend(
                        report
                            .checks
                            .into_iter()
                            .map(|c| label(prefix("charts", c))),
                    );
                }
                ok
            }
            Err(e) => {
                if run_validation {
                    out.push(label(CheckResult::error(
                        "charts/validation",
                        e.to_string(),
                    )));
                }
                false
            }
        };
        if !run_w1 || flat {
            continue;
        }
        if !validated {
            out.push(label(CheckResult::error(
                "w1/chart rejected",
                "chart failed validation; the W1 theorem checks were skipped",
            )));
            continue;
        }
        match w1_chart_checks(chart, config.seed, &config.tolerances) {
            Ok(report) => out.extend(report.checks.into_iter().map(|c| label(prefix("w1", c)))),
            Err(e) => out.push(label(CheckResult::error("w1/error", e.to_string()))),
        }
    }
    out
}

fn prefix(section: &str, c: CheckResult) -> CheckResult {
    let name = format!("{section}/{}", c.check);
    CheckResult { check: name, ..c }
}

/// Folds results with the same check name and class into one entry holding
/// the worst residual, in order of first appearance.
pub fn aggregate(checks: Vec<CheckResult>) -> SuiteReport {
    let mut order: Vec<(String, Option<String>)> = Vec::new();
    let mut groups: HashMap<(String, Option<String>), Vec<CheckResult>> = HashMap::new();
    for c in checks {
        let key = (c.check.clone(), c.class.clone());
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(c);
    }
    let mut report = VerificationReport::new();
    let mut statistics = Vec::new();
    for key in order {
        let group = groups.remove(&key).expect("key recorded");
        let worse = |a: &CheckResult, b: &CheckResult| -> bool {
            if b.residual.is_nan() {
                return !a.residual.is_nan();
            }
            match b.bound {
                Bound::Upper => b.residual > a.residual,
                Bound::Lower => b.residual < a.residual,
            }
        };
        let mut worst = &group[0];
        for c in &group[1..] {
            if worse(worst, c) {
                worst = c;
            }
        }
        let failures = group.iter().filter(|c| !c.pass).count();
        let mut residuals: Vec<f64> = group.iter().map(|c| c.residual).collect();
        residuals.sort_by(|a, b| a.total_cmp(b));
        let median = if residuals.len() % 2 == 1 {
            residuals[residuals.len() / 2]
        } else {
            let m = residuals.len() / 2;
            0.5 * (residuals[m - 1] + residuals[m])
        };
        let max = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        statistics.push(CheckStatistics {
            check: key.0,
            class: key.1,
            count: group.len(),
            failures,
            max,
            median,
        });
        let mut entry = worst.clone();
        entry.pass = failures == 0;
        if group.len() > 1 {
            let summary = format!(
                "{} samples, {failures} failed, median {median:.3e}",
                group.len()
            );
            entry.note = Some(match &entry.note {
                Some(n) => format!("{summary}; worst: {n}"),
                None => summary,
            });
        }
        report.push(entry);
    }
    SuiteReport { report, statistics }
}

/// Runs the selected sections in their fixed order.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let has = |s: Section| config.sections.contains(&s);
    let charts = if has(Section::Charts) || has(Section::W1) {
        config.load_charts()?
    } else {
        Vec::new()
    };
    let tol = config.tolerances;
    let mut checks = Vec::new();
    if has(Section::Pointwise) {
        checks.extend(per_trial(config, Section::Pointwise, |rng, d| {
            pointwise_trial(rng, d, &tol)
        }));
    }
    if has(Section::AlmostComplex) {
        checks.extend(per_trial(config, Section::AlmostComplex, |rng, d| {
            let pt = random_point_with(rng, d)?;
            let params = ConnectionParams::random(rng);
            let r = almost_complex_residual(&pt, params)?;
            Ok(vec![CheckResult::below(
                "almost-complex/nabla' J",
                r,
                tol.structural,
            )
            .params(params)])
        }));
    }
    if has(Section::Lemma) {
        checks.extend(per_trial(config, Section::Lemma, |rng, d| {
            let pt = random_point_with(rng, d)?;
            let params = ConnectionParams::random(rng);
            let r = metric_derivatives(&pt, params)?.lemma_residual();
            Ok(vec![CheckResult::below(
                "lemma/nabla' g via N~",
                r,
                tol.structural,
            )
            .params(params)])
        }));
    }
    if has(Section::Characterizations) {
        let grid = parameter_grid();
        checks.extend(per_trial(config, Section::Characterizations, |rng, d| {
            characterization_trial(rng, d, &tol, &grid).map(|v| {
                v.into_iter()
                    .map(|c| prefix("characterizations", c))
                    .collect()
            })
        }));
    }
    if has(Section::Table1) {
        let tables: Vec<Vec<CheckResult>> = config
            .dims
            .par_iter()
            .map(|&d| match table1_matrix(config.seed, d) {
                Ok(t) => t
                    .to_report()
                    .checks
                    .into_iter()
                    .map(|c| tag(c, d))
                    .collect(),
                Err(e) => vec![tag(CheckResult::error("table1/error", e.to_string()), d)],
            })
            .collect();
        checks.extend(tables.into_iter().flatten());
    }
    checks.extend(chart_sections(
        config,
        &charts,
        has(Section::Charts),
        has(Section::W1),
    ));
    Ok(aggregate(checks))
}
