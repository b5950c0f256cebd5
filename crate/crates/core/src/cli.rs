//! Command-line front end: PDF/CDF values over a point list or grid, written
//! as CSV or JSON.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Serialize;

use crate::driver::{evaluate_grid, InversionConfig, Precision};
use crate::extrapolation::ExtrapolationMethod;
use crate::models::{parse_spec, validate};
use crate::post_widder::PwTarget;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MODEL: i32 = 2;
pub const EXIT_UNCONVERGED: i32 = 3;

pub const CSV_HEADER: [&str; 7] = ["x", "value", "abs_err", "rel_err", "points_used", "converged", "clamped"];

/// Precision below which double arithmetic is abandoned.
const PROMOTE_BELOW: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Func {
    #[default]
    Pdf,
    Cdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Polynomial,
    Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

/// Density and distribution function of non-negative infinitely divisible
/// laws from their Laplace exponent.
#[derive(Debug, Parser)]
#[command(name = "postwidder", version)]
#[command(after_help = "Distribution specs:\n  \
    chi2:weights=1,0.5\n  inverse-gaussian\n  alpha-stable:alpha=0.5,c=1\n  \
    stable-mix:alphas=0.4,0.8;weights=0.3,0.7\n  uniform-mix\n  ou-poisson:eta=1\n  \
    ou-gamma:eta=1,kappa=1,theta=1\n\n\
    CSV columns: x,value,abs_err,rel_err,points_used,converged,clamped\n\n\
    Exit status: 0 all points converged, 1 bad arguments or spec, 2 model or\n\
    quadrature error, 3 some point did not converge.")]
struct Args {
    /// Distribution spec, e.g. `alpha-stable:alpha=0.5,c=1`.
    #[arg(long)]
    dist: String,
    #[arg(long, value_enum, default_value_t = Func::Pdf)]
    func: Func,
    #[arg(long, value_enum, default_value_t = MethodArg::Polynomial)]
    method: MethodArg,
    /// Relative error tolerance; below 1e-10 extended precision is used.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Defaults to double.
    #[arg(long, value_enum)]
    precision: Option<PrecisionArg>,
    /// Comma-separated evaluation points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["x_min", "x_max", "steps"])]
    x: Vec<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "x_max")]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "x_min")]
    x_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = Spacing::Linear)]
    spacing: Spacing,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    output: OutputFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output_path: Option<PathBuf>,
    /// Number of Post-Widder indices k = 10, 20, ... (default 8 in double, 20 in extended).
    #[arg(long)]
    max_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Points {
    List(Vec<f64>),
    Grid {
        x_min: f64,
        x_max: f64,
        steps: usize,
        spacing: Spacing,
    },
}

impl Points {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Points::List(ref xs) => xs.clone(),
            Points::Grid { x_min, steps: 1, .. } => vec![x_min],
            Points::Grid {
                x_min,
                x_max,
                steps,
                spacing,
            } => {
                let last = (steps - 1) as f64;
                (0..steps)
                    .map(|i| {
                        let t = i as f64 / last;
                        match spacing {
                            Spacing::Linear => x_min + (x_max - x_min) * t,
                            Spacing::Log => (x_min.ln() + (x_max.ln() - x_min.ln()) * t).exp(),
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliRequest {
    pub dist_spec: String,
    pub func: Func,
    pub method: ExtrapolationMethod,
    pub tol: f64,
    pub precision: Precision,
    pub points: Points,
    pub output: OutputFormat,
    pub output_path: Option<PathBuf>,
    pub max_points: Option<usize>,
    /// Printed to standard error before evaluation.
    pub warnings: Vec<String>,
}

impl CliRequest {
    fn from_args(a: Args) -> Result<Self, String> {
        if !(a.tol > 0.0 && a.tol.is_finite()) {
            return Err(format!("--tol must be positive, got {}", a.tol));
        }
        let points = match (a.x_min, a.x_max) {
            (Some(x_min), Some(x_max)) => {
                if !(x_min > 0.0 && x_min.is_finite()) {
                    return Err(format!("--x-min must be positive, got {x_min}"));
                }
                if a.steps == 0 {
                    return Err("--steps must be at least 1".into());
                }
                if !(x_max.is_finite() && (x_max > x_min || a.steps == 1 && x_max >= x_min)) {
                    return Err(format!("--x-max must exceed --x-min, got {x_max}"));
                }
                Points::Grid {
                    x_min,
                    x_max,
                    steps: a.steps,
                    spacing: a.spacing,
                }
            }
            _ if a.x.is_empty() => return Err("give either --x or --x-min/--x-max".into()),
            _ => {
                if let Some(bad) = a.x.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
                    return Err(format!("evaluation points must be positive, got {bad}"));
                }
                Points::List(a.x)
            }
        };
        let mut warnings = Vec::new();
        let precision = match a.precision {
            Some(PrecisionArg::Extended) => Precision::Extended,
            Some(PrecisionArg::Double) => {
                if a.tol < PROMOTE_BELOW {
                    warnings.push(format!("tolerance {:e} is unlikely to be met in double precision", a.tol));
                }
                Precision::Double
            }
            None if a.tol < PROMOTE_BELOW => {
                warnings.push(format!("tolerance {:e} below {PROMOTE_BELOW:e}: using extended precision", a.tol));
                Precision::Extended
            }
            None => Precision::Double,
        };
        Ok(CliRequest {
            dist_spec: a.dist,
            func: a.func,
            method: match a.method {
                MethodArg::Polynomial => ExtrapolationMethod::Polynomial,
                MethodArg::Rational => ExtrapolationMethod::Rational,
            },
            tol: a.tol,
            precision,
            points,
            output: a.output,
            output_path: a.output_path,
            max_points: a.max_points,
            warnings,
        })
    }

    pub fn config(&self) -> InversionConfig {
        let cfg = InversionConfig::new(self.precision)
            .with_tolerance(self.tol)
            .with_method(self.method)
            .with_target(match self.func {
                Func::Pdf => PwTarget::Pdf,
                Func::Cdf => PwTarget::Cdf,
            });
        match self.max_points {
            Some(n) => cfg.with_max_points(n),
            None => cfg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub x: f64,
    pub value: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    pub points_used: usize,
    pub converged: bool,
    pub clamped: bool,
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(records: &[Record], out: impl Write) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            sci(r.x),
            sci(r.value),
            sci(r.abs_err),
            sci(r.rel_err),
            r.points_used.to_string(),
            r.converged.to_string(),
            r.clamped.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct JsonRecord {
    x: Option<f64>,
    value: Option<f64>,
    abs_err: Option<f64>,
    rel_err: Option<f64>,
    points_used: usize,
    converged: bool,
    clamped: bool,
}

/// Non-finite numbers become `null`.
pub fn write_json(records: &[Record], mut out: impl Write) -> std::io::Result<()> {
    let num = |v: f64| v.is_finite().then_some(v);
    let rows: Vec<JsonRecord> = records
        .iter()
        .map(|r| JsonRecord {
            x: num(r.x),
            value: num(r.value),
            abs_err: num(r.abs_err),
            rel_err: num(r.rel_err),
            points_used: r.points_used,
            converged: r.converged,
            clamped: r.clamped,
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &rows)?;
    writeln!(out)
}

/// Evaluates a request. Records are sorted by `x`; points that failed are
/// reported on `err` and left out.
pub fn run(request: &CliRequest, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    for w in &request.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let model = match parse_spec(&request.dist_spec) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let model = match validate(model) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_MODEL;
        }
    };
    let cfg = request.config();
    if let Err(e) = cfg.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    let mut xs = request.points.values();
    xs.sort_by(f64::total_cmp);
    let mut records = Vec::with_capacity(xs.len());
    let mut failed = false;
    for (x, r) in xs.iter().zip(evaluate_grid(&model, &xs, &cfg)) {
        match r {
            Ok(r) => records.push(Record {
                x: r.x,
                value: r.value,
                abs_err: r.abs_error_estimate,
                rel_err: r.rel_error_estimate,
                points_used: r.points_used,
                converged: r.converged,
                clamped: r.clamped,
            }),
            Err(e) => {
                failed = true;
                let _ = writeln!(err, "error at x = {x}: {e}");
            }
        }
    }
    let written = match &request.output_path {
        Some(path) => std::fs::File::create(path)
            .map_err(|e| e.to_string())
            .and_then(|f| emit(request.output, &records, std::io::BufWriter::new(f))),
        None => emit(request.output, &records, &mut *out),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return EXIT_USAGE;
    }
    if failed {
        EXIT_MODEL
    } else if records.iter().all(|r| r.converged) {
        EXIT_OK
    } else {
        let n = records.iter().filter(|r| !r.converged).count();
        let _ = writeln!(err, "warning: {n} of {} points did not reach the tolerance", records.len());
        EXIT_UNCONVERGED
    }
}

fn emit(format: OutputFormat, records: &[Record], out: impl Write) -> Result<(), String> {
    match format {
        OutputFormat::Csv => write_csv(records, out).map_err(|e| e.to_string()),
        OutputFormat::Json => write_json(records, out).map_err(|e| e.to_string()),
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn main_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match CliRequest::from_args(args) {
        Ok(req) => run(&req, out, err),
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}
