use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use norden::connections::{
    almost_complex_residual, general_point, metric_derivatives, special_residuals, table1_matrix,
    torsion_tensor, ConnectionParams,
};
use norden::manifold::{curvature_report, Chart, CurvatureReport};
use norden::pointwise::{
    classify, generate_in_class_with, nijenhuis_pair, trial_rng, FClass, NordenPoint,
};
use norden::report::{CheckResult, VerificationReport};
use norden::suite::{run_suite, Section, SuiteConfig};
use norden::{component_norm, tolerance, Error, Result};

#[derive(Parser)]
#[command(
    name = "norden",
    version,
    about = "Numerical checks for almost complex manifolds with Norden metric"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a point from JSON, or round-trip random points through every class.
    Classify {
        #[arg(long)]
        point: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Check one connection of the family on random or given points.
    Connections {
        #[arg(long)]
        point: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Reproduce the connection-type table.
    Table1 {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        dim: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Curvature of the complex connections on a W1 chart.
    Curvature {
        /// Built-in chart name or path to a chart JSON file.
        #[arg(long)]
        chart: String,
        #[command(flatten)]
        params: ParamArgs,
        /// Coordinates of one point; defaults to the chart's probe points.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        at: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run every check.
    Suite {
        /// Suite configuration JSON; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        dim: Option<Vec<usize>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        chart: Option<Vec<String>>,
        /// Sections to run, comma separated.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
}

#[derive(Args)]
struct ParamArgs {
    /// t1,t2,t3,t4
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "pq"
    )]
    params: Option<Vec<f64>>,
    /// p,q
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pq: Option<Vec<f64>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

impl ParamArgs {
    fn connection(&self) -> Result<ConnectionParams> {
        match (&self.params, &self.pq) {
            (Some(t), None) => {
                let t: [f64; 4] = t.as_slice().try_into().map_err(|_| {
                    Error::Config(format!("--params needs 4 values, got {}", t.len()))
                })?;
                Ok(ConnectionParams::from_array(t))
            }
            (None, Some(pq)) => match pq.as_slice() {
                [p, q] => Ok(ConnectionParams::from_pq(*p, *q)),
                _ => Err(Error::Config(format!(
                    "--pq needs 2 values, got {}",
                    pq.len()
                ))),
            },
            (None, None) => Ok(ConnectionParams::default()),
            (Some(_), Some(_)) => Err(Error::Config("give either --params or --pq".into())),
        }
        .and_then(|p| {
            if p.is_finite() {
                Ok(p)
            } else {
                Err(Error::Config("connection parameters must be finite".into()))
            }
        })
    }

    fn pq(&self) -> Result<(f64, f64)> {
        let params = self.connection()?;
        if params.s() != params.p() || params.t() != params.q() {
            return Err(Error::Config(
                "curvature takes (p, q) only: use --pq or --params p,q,0,0".into(),
            ));
        }
        Ok((params.p(), params.q()))
    }
}

impl RunArgs {
    fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.dim < 4 || self.dim % 2 != 0 {
            return Err(Error::Config(format!(
                "dimension must be even and at least 4, got {}",
                self.dim
            )));
        }
        Ok(())
    }
}

fn read_point(path: &PathBuf) -> Result<NordenPoint> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn emit(
    output: &OutputArgs,
    json: impl FnOnce() -> String,
    text: impl FnOnce() -> String,
) -> Result<()> {
    let body = match output.format {
        Format::Json => json(),
        Format::Text => text(),
    };
    match &output.out {
        Some(path) => std::fs::write(path, body.as_bytes()).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            let mut written = stdout.write_all(body.as_bytes());
            if written.is_ok() && !body.ends_with('\n') {
                written = stdout.write_all(b"\n");
            }
            match written.and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::io("<stdout>", e))
                }
                _ => Ok(()),
            }
        }
    }
}

fn emit_report(output: &OutputArgs, report: &VerificationReport) -> Result<bool> {
    emit(output, || report.to_json(), || report.to_text())?;
    Ok(report.all_pass())
}

fn classify_point(pt: &NordenPoint) -> Result<VerificationReport> {
    let inv = pt.invariant_residuals();
    let c = classify(pt, tolerance::CLASSIFICATION)?;
    let mut report = VerificationReport::new();
    report.push(
        CheckResult::below("invariants", inv.max_residual(), tolerance::STRUCTURAL)
            .class(c.label()),
    );
    let components: Vec<String> = c
        .components
        .iter()
        .map(|(k, v)| format!("{k} {v:.3e}"))
        .collect();
    report.push(
        CheckResult::below("classification", 0.0, 0.5)
            .class(c.label())
            .note(format!("|F| {:.3e}; {}", c.norm, components.join(", "))),
    );
    Ok(report)
}

fn classify_round_trip(run: &RunArgs) -> Result<VerificationReport> {
    run.validate()?;
    let mut report = VerificationReport::new();
    for (i, class) in FClass::ALL.into_iter().enumerate() {
        for k in 0..run.trials {
            let mut rng = trial_rng(run.seed, ((i as u64) << 32) | k as u64);
            let pt = generate_in_class_with(&mut rng, class, run.dim)?;
            let label = classify(&pt, tolerance::CLASSIFICATION)?.label();
            let ok = label == class.name();
            report.push(
                CheckResult::below(
                    format!("class round trip {}", class.name()),
                    if ok { 0.0 } else { 1.0 },
                    0.5,
                )
                .class(class.name())
                .seed(run.seed)
                .note(format!("trial {k}: classified as {label}")),
            );
        }
    }
    Ok(report)
}

/// Checks that hold for every member of the family, plus the
/// characterizations that decide natural, canonical, 3-form and symmetric
/// members on points where `N` and `Ñ` are non-degenerate.
fn connection_checks(
    pt: &NordenPoint,
    params: ConnectionParams,
    seed: Option<u64>,
) -> Result<VerificationReport> {
    let tol = tolerance::STRUCTURAL;
    let sep = tolerance::SEPARATION;
    let mut report = VerificationReport::new();
    let mut push = |c: CheckResult| {
        let c = c.params(params);
        report.push(match seed {
            Some(s) => c.seed(s),
            None => c,
        });
    };
    push(CheckResult::below(
        "nabla' J",
        almost_complex_residual(pt, params)?,
        tol,
    ));
    push(CheckResult::below(
        "nabla' g via N~",
        metric_derivatives(pt, params)?.lemma_residual(),
        tol,
    ));
    torsion_tensor(pt, params)?;
    let (n, nt) = nijenhuis_pair(pt)?;
    if component_norm(&n) <= tolerance::NONDEGENERATE
        || component_norm(&nt) <= tolerance::NONDEGENERATE
    {
        return Ok(report);
    }
    let special = special_residuals(pt, params)?;
    if params.is_natural() {
        push(CheckResult::below("natural", special.natural, tol));
        if params == ConnectionParams::CANONICAL {
            push(CheckResult::below("canonical", special.canonical, tol));
        }
    } else if params.p().abs() + params.q().abs() > 0.01 {
        push(CheckResult::above("not natural", special.natural, sep));
    }
    if params == ConnectionParams::THREE_FORM {
        push(CheckResult::below("3-form", special.three_form, tol));
    }
    push(CheckResult::above("not symmetric", special.symmetric, sep));
    Ok(report)
}

fn connections(
    point: &Option<PathBuf>,
    params: &ParamArgs,
    run: &RunArgs,
) -> Result<VerificationReport> {
    let params = params.connection()?;
    if let Some(path) = point {
        return connection_checks(&read_point(path)?, params, None);
    }
    run.validate()?;
    let mut report = VerificationReport::new();
    for k in 0..run.trials {
        let pt = general_point(&mut trial_rng(run.seed, k as u64), run.dim)?;
        report.extend(connection_checks(&pt, params, Some(run.seed))?);
    }
    Ok(report)
}

#[derive(Serialize)]
struct CurvatureOutput<'a> {
    points: &'a [CurvatureReport],
}

fn curvature_text(reports: &[CurvatureReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!(
            "{} at {:?}, (p, q) = ({}, {}): F in {}, tau' = {:.6e}, tau'* = {:.6e}\n",
            r.chart, r.point, r.p, r.q, r.class, r.tau, r.tau_star
        ));
        out.push_str(&r.checks.to_text());
        out.push('\n');
    }
    out
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Classify { point, run, output } => {
            let report = match point {
                Some(path) => classify_point(&read_point(&path)?)?,
                None => classify_round_trip(&run)?,
            };
            emit_report(&output, &report)
        }
        Command::Connections {
            point,
            params,
            run,
            output,
        } => emit_report(&output, &connections(&point, &params, &run)?),
        Command::Table1 { seed, dim, output } => {
            if dim < 4 || dim % 2 != 0 {
                return Err(Error::Config(format!(
                    "dimension must be even and at least 4, got {dim}"
                )));
            }
            let table = table1_matrix(seed, dim)?;
            emit(&output, || table.to_report().to_json(), || table.to_text())?;
            Ok(table.all_pass())
        }
        Command::Curvature {
            chart,
            params,
            at,
            output,
        } => {
            let chart = Chart::resolve(&chart)?;
            let (p, q) = params.pq()?;
            let points = match at {
                Some(x) => vec![x],
                None => chart.probe_points(),
            };
            let reports = points
                .iter()
                .map(|x| curvature_report(&chart, x, p, q))
                .collect::<Result<Vec<_>>>()?;
            emit(
                &output,
                || {
                    serde_json::to_string_pretty(&CurvatureOutput { points: &reports })
                        .expect("curvature reports serialize")
                },
                || curvature_text(&reports),
            )?;
            Ok(reports.iter().all(|r| r.checks.all_pass()))
        }
        Command::Suite {
            config,
            seed,
            dim,
            trials,
            chart,
            only,
            output,
        } => {
            let mut cfg = match config {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                    SuiteConfig::from_json_str(&text)?
                }
                None => SuiteConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = dim {
                cfg.dims = d;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            if let Some(c) = chart {
                cfg.charts = c;
            }
            if let Some(sections) = only {
                cfg.sections = sections
                    .iter()
                    .map(|s| s.parse::<Section>())
                    .collect::<Result<_>>()?;
            }
            let output = OutputArgs {
                out: output.out.or_else(|| cfg.out.clone().map(PathBuf::from)),
                format: output.format,
            };
            let report = run_suite(&cfg)?;
            emit(&output, || report.to_json(), || report.to_text())?;
            Ok(report.all_pass())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
