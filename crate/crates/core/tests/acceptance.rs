//! Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use norden::connections::{
    almost_complex_residual, general_point, metric_derivatives, table1_matrix, AffineResidual,
    ConnectionParams, GRID_VALUES,
};
use norden::manifold::{
    curvature_parameter_independence, flat_checks, tau_checks, validate_conformal_kaehler,
    verify_w1_theorems, Chart,
};
use norden::pointwise::{
    classify, generate_in_class_with, nijenhuis_pair, random_point_with, trial_rng,
    ClassProjectors, FClass,
};
use norden::{component_norm, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const DIMS: [usize; 2] = [4, 6];

const IDENTITY: f64 = 1e-10;
const SEPARATION: f64 = 1e-3;
const NONEXISTENCE: f64 = 1e-6;
const NONDEGENERATE: f64 = 0.1;
const DECOMPOSITION: f64 = 1e-8;
const FLAT: f64 = 1e-12;
const CLOSED: f64 = 1e-8;
const CURVATURE: f64 = 1e-6;
const TAU: f64 = 1e-5;
const CLASSIFICATION: f64 = 1e-8;

/// Worst value seen and whether every sample met its bound.
struct Tally {
    worst_upper: f64,
    worst_lower: f64,
    samples: usize,
    failures: usize,
}

impl Tally {
    fn new() -> Self {
        Self {
            worst_upper: 0.0,
            worst_lower: f64::INFINITY,
            samples: 0,
            failures: 0,
        }
    }

    fn below(&mut self, residual: f64, tol: f64) {
        self.samples += 1;
        if !(residual < tol) {
            self.failures += 1;
        }
        if residual.is_nan() || residual > self.worst_upper {
            self.worst_upper = residual;
        }
    }

    fn above(&mut self, residual: f64, tol: f64) {
        self.samples += 1;
        if !(residual > tol) {
            self.failures += 1;
        }
        if residual.is_nan() || residual < self.worst_lower {
            self.worst_lower = residual;
        }
    }

    fn flag(&mut self, ok: bool) {
        self.below(if ok { 0.0 } else { 1.0 }, 0.5);
    }

    fn summary(&self) -> String {
        let mut s = format!("{} samples, {} failed", self.samples, self.failures);
        if self.worst_upper > 0.0 || self.worst_upper.is_nan() {
            s += &format!(", max residual {:.2e}", self.worst_upper);
        }
        if self.worst_lower.is_finite() || self.worst_lower.is_nan() {
            s += &format!(", min separation {:.2e}", self.worst_lower);
        }
        s
    }

    fn pass(&self) -> bool {
        self.samples > 0 && self.failures == 0
    }
}

fn rng(criterion: u64, dim: usize, trial: usize) -> ChaCha8Rng {
    trial_rng(
        SEED,
        (criterion << 48) | ((dim as u64) << 32) | trial as u64,
    )
}

fn random_params(rng: &mut ChaCha8Rng) -> ConnectionParams {
    ConnectionParams::random(rng)
}

fn non_natural(rng: &mut ChaCha8Rng) -> ConnectionParams {
    loop {
        let p = ConnectionParams::random(rng);
        if p.p().abs() + p.q().abs() > 0.01 {
            return p;
        }
    }
}

fn min_over(residual: &AffineResidual, grid: &[ConnectionParams]) -> f64 {
    grid.iter()
        .map(|p| residual.residual(*p))
        .fold(f64::INFINITY, f64::min)
}

fn full_grid() -> Vec<ConnectionParams> {
    let mut out = Vec::new();
    for &a in &GRID_VALUES {
        for &b in &GRID_VALUES {
            for &c in &GRID_VALUES {
                for &d in &GRID_VALUES {
                    out.push(ConnectionParams::new(a, b, c, d));
                }
            }
        }
    }
    out
}

fn almost_complex() -> Result<Tally> {
    let mut t = Tally::new();
    for d in DIMS {
        for k in 0..200 {
            let mut r = rng(1, d, k);
            let pt = random_point_with(&mut r, d)?;
            let params = random_params(&mut r);
            t.below(almost_complex_residual(&pt, params)?, IDENTITY);
        }
    }
    Ok(t)
}

fn lemma() -> Result<Tally> {
    let mut t = Tally::new();
    for d in DIMS {
        for k in 0..100 {
            let mut r = rng(2, d, k);
            let pt = random_point_with(&mut r, d)?;
            let params = random_params(&mut r);
            t.below(metric_derivatives(&pt, params)?.lemma_residual(), IDENTITY);
        }
    }
    Ok(t)
}

fn naturality() -> Result<Tally> {
    let mut t = Tally::new();
    for d in DIMS {
        for k in 0..50 {
            let mut r = rng(3, d, k);
            let pt = random_point_with(&mut r, d)?;
            let (a, b) = (r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            let natural = ConnectionParams::new(a, b, -a, -b);
            t.below(
                metric_derivatives(&pt, natural)?.natural_residual(),
                IDENTITY,
            );
        }
        for k in 0..50 {
            let mut r = rng(3, d, 1000 + k);
            let pt = loop {
                let pt = random_point_with(&mut r, d)?;
                if component_norm(&nijenhuis_pair(&pt)?.1) > NONDEGENERATE {
                    break pt;
                }
            };
            let params = non_natural(&mut r);
            t.above(
                metric_derivatives(&pt, params)?.natural_residual(),
                SEPARATION,
            );
        }
    }
    Ok(t)
}

fn canonical() -> Result<Tally> {
    let mut natural_grid = Vec::new();
    for &a in &GRID_VALUES {
        for &b in &GRID_VALUES {
            natural_grid.push(ConnectionParams::new(a, b, -a, -b));
        }
    }
    let target = ConnectionParams::CANONICAL;
    let others: Vec<_> = natural_grid.into_iter().filter(|p| *p != target).collect();
    let mut t = Tally::new();
    for d in DIMS {
        for k in 0..20 {
            let pt = general_point(&mut rng(4, d, k), d)?;
            let res = AffineResidual::canonical(&pt);
            t.below(res.residual(target), IDENTITY);
            t.above(min_over(&res, &others), SEPARATION);
        }
    }
    Ok(t)
}

fn three_form(grid: &[ConnectionParams]) -> Result<Tally> {
    let target = ConnectionParams::THREE_FORM;
    let others: Vec<_> = grid.iter().copied().filter(|p| *p != target).collect();
    let mut t = Tally::new();
    for d in DIMS {
        for k in 0..20 {
            let pt = general_point(&mut rng(5, d, k), d)?;
            let res = AffineResidual::three_form(&pt);
            t.below(res.residual(target), IDENTITY);
            t.above(min_over(&res, &others), SEPARATION);
        }
    }
    Ok(t)
}

fn symmetric(grid: &[ConnectionParams]) -> Result<Tally> {
    let mut t = Tally::new();
    for d in DIMS {
        for k in 0..20 {
            let mut r = rng(6, d, k);
            let complex = generate_in_class_with(&mut r, FClass::W1W2, d)?;
            t.below(
                AffineResidual::symmetric(&complex).residual(ConnectionParams::YANO),
                IDENTITY,
            );
            let pt = general_point(&mut r, d)?;
            t.above(min_over(&AffineResidual::symmetric(&pt), grid), SEPARATION);
        }
    }
    Ok(t)
}

fn connection_table() -> Result<Tally> {
    let mut t = Tally::new();
    for d in DIMS {
        let table = table1_matrix(SEED, d)?;
        assert_eq!(table.cells.len(), 15);
        for cell in &table.cells {
            if cell.condition == "∄" {
                t.above(cell.residual, NONEXISTENCE);
            } else {
                t.below(cell.residual, IDENTITY);
            }
        }
    }
    Ok(t)
}

fn class_round_trip() -> Result<Tally> {
    let mut t = Tally::new();
    for d in DIMS {
        for (c, class) in FClass::ALL.into_iter().enumerate() {
            for k in 0..100 {
                let mut r = rng(8, d, c * 1000 + k);
                let pt = generate_in_class_with(&mut r, class, d)?;
                t.flag(classify(&pt, CLASSIFICATION)?.label() == class.name());
            }
        }
        for k in 0..100 {
            let pt = random_point_with(&mut rng(8, d, 10_000 + k), d)?;
            t.below(
                ClassProjectors::new(&pt)?.decomposition_residual(),
                DECOMPOSITION,
            );
        }
    }
    Ok(t)
}

fn flat_chart() -> Result<Tally> {
    let mut t = Tally::new();
    for name in ["flat4", "flat6"] {
        let chart = Chart::builtin(name).expect("built-in");
        for c in flat_checks(&chart)?.checks {
            t.below(c.residual, FLAT);
        }
    }
    Ok(t)
}

fn conformal_charts() -> Vec<Chart> {
    ["conformal4", "conformal6"]
        .map(|n| Chart::builtin(n).expect("built-in"))
        .to_vec()
}

fn conformal_validation() -> Result<Tally> {
    let mut t = Tally::new();
    for chart in conformal_charts() {
        for c in validate_conformal_kaehler(&chart)?.checks {
            if c.check == "conformal chart class" {
                t.flag(c.pass);
            } else {
                t.below(c.residual, CLOSED);
            }
        }
    }
    Ok(t)
}

const PAIRS: [(f64, f64); 3] = [(0.0, 0.0), (0.3, -0.2), (-0.7, 0.45)];

fn curvature_theorem() -> Result<Tally> {
    let mut t = Tally::new();
    for chart in conformal_charts() {
        for x in chart.probe_points() {
            for (p, q) in PAIRS {
                let report = verify_w1_theorems(&chart, &x, p, q)?;
                for name in ["curvature structural formula", "curvature kaehler identity"] {
                    let c = report.get(name).expect("check present");
                    t.below(c.residual, CURVATURE);
                }
            }
            t.below(
                curvature_parameter_independence(&chart, &x, PAIRS[1], PAIRS[2])?,
                CURVATURE,
            );
        }
    }
    Ok(t)
}

fn scalar_curvature_relations() -> Result<Tally> {
    let mut t = Tally::new();
    for chart in conformal_charts() {
        for x in chart.probe_points() {
            for (p, q) in PAIRS {
                for c in tau_checks(&chart, &x, p, q)?.checks {
                    t.below(c.residual, TAU);
                }
            }
        }
    }
    Ok(t)
}

fn main() {
    let grid = full_grid();
    let criteria: Vec<(&str, Result<Tally>)> = vec![
        ("nabla' J = 0 for every family member", almost_complex()),
        ("nabla' g and nabla' g~ through N~", lemma()),
        ("naturality iff t1 = -t3, t2 = -t4", naturality()),
        ("canonical exactly at (0, 1/8, 0, -1/8)", canonical()),
        (
            "totally skew torsion exactly at (0, 0, 0, 1/4)",
            three_form(&grid),
        ),
        ("symmetric only for Yano on W1+W2", symmetric(&grid)),
        ("connection table, 15 cells", connection_table()),
        (
            "W-class round trip and projector decomposition",
            class_round_trip(),
        ),
        ("flat chart: Gamma, F, R vanish", flat_chart()),
        ("conformal Kaehler chart validation", conformal_validation()),
        (
            "R' structure, Kaehler identity, parameter independence",
            curvature_theorem(),
        ),
        (
            "scalar curvature relations and Lie form recovery",
            scalar_curvature_relations(),
        ),
    ];
    let mut all = true;
    for (i, (title, outcome)) in criteria.into_iter().enumerate() {
        let (pass, detail) = match outcome {
            Ok(t) => (t.pass(), t.summary()),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!(
            "{} {:>2} {title}: {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1
        );
    }
    if !all {
        std::process::exit(1);
    }
}
