//! Command-line front end. `run` is the whole program; `main` only wires up stdio.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::hyper::{Branch, EvaluationReport, HyperConfig, HyperError, Hypergeometric};
use crate::oracles::{self, JacobiParams, OracleError};
use crate::rootsys::{Family, Multiplicities, Orbit, RootSystem, RootSystemError, SystemConfig};
use crate::series::{gamma_coefficients, hc_series};
use crate::transform::{HypergeometricTransform, SampledFunction, TransformConfig, TransformError};
use crate::cfunc::{CFunctionError, CValue};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    RootSystem(#[from] RootSystemError),
    #[error(transparent)]
    Hyper(#[from] HyperError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    CFunction(#[from] CFunctionError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("self-test failed: {0}")]
    SelfTest(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::RootSystem(_) => "root_system",
            CliError::Hyper(HyperError::NearWall { .. }) => "near_wall",
            CliError::Hyper(_) => "evaluation",
            CliError::Transform(TransformError::OutsideTube(_)) => "unbounded_lambda",
            CliError::Transform(_) => "transform",
            CliError::Oracle(_) => "oracle",
            CliError::CFunction(_) => "cfunc",
            CliError::Io { .. } => "io",
            CliError::Input(_) => "input",
            CliError::SelfTest(_) => "selftest",
        }
    }
}

/// Comma-separated complex numbers such as `0.5,1-2i,3i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexList(pub Vec<Complex64>);

/// Comma-separated reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

/// Parses `a`, `bi`, `a+bi` or `a-bi` (with `i` or `j`).
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err("empty number".into());
    }
    let bad = || format!("cannot parse `{text}` as a complex number");
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

impl FromStr for ComplexList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',').map(parse_complex).collect::<Result<Vec<_>, _>>().map(ComplexList)
    }
}

impl FromStr for RealList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(|v| {
                let v = v.trim();
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| format!("cannot parse `{v}` as a real number"))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(RealList)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Forward,
    Inverse,
    Plancherel,
}

#[derive(Debug, Parser)]
#[command(name = "hypergeo", version, about = "Hypergeometric functions for root systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Root-system JSON, e.g. {"family":"BC","rank":1,"multiplicities":{"short":1.0,"double":0.5}}.
    #[arg(long)]
    system: PathBuf,
    /// Evaluator settings JSON (unknown keys rejected).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_level: Option<u32>,
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    integer_tol: Option<f64>,
    #[arg(long)]
    nodes_per_circle: Option<usize>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate phi_lambda at one point or a grid of points.
    #[command(group(clap::ArgGroup::new("points").required(true).args(["x", "grid"])))]
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: ComplexList,
        #[arg(long, allow_hyphen_values = true)]
        x: Option<RealList>,
        /// CSV file with one point per row.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Dump the series coefficients up to a level.
    SeriesCoeffs {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: ComplexList,
        #[arg(long, default_value_t = 8)]
        level: u32,
    },
    /// c-function value, Plancherel density and nearby singular hyperplanes.
    Cfunc {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: ComplexList,
        #[arg(long, default_value_t = 0.5)]
        radius: f64,
    },
    /// Boundedness and genericity of a spectral parameter.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: ComplexList,
    },
    /// Leading-term ratios along a ray for a real dominant parameter.
    Asymptotics {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: RealList,
        #[arg(long)]
        direction: RealList,
        #[arg(long)]
        t: Option<RealList>,
    },
    /// Forward or inverse transform of sampled data, or a Plancherel check.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Mode,
        /// CSV rows: chamber coordinates then Re, Im.
        #[arg(long)]
        input: PathBuf,
        /// Transform settings JSON (unknown keys rejected).
        #[arg(long)]
        transform_config: Option<PathBuf>,
        /// Forward mode: explicit spectral parameters instead of the i a* grid (repeatable).
        #[arg(long, allow_hyphen_values = true)]
        lambda: Vec<ComplexList>,
        /// Inverse mode: explicit points instead of a uniform grid (repeatable).
        #[arg(long, allow_hyphen_values = true)]
        x: Vec<RealList>,
        /// Points per axis of generated uniform grids.
        #[arg(long, default_value_t = 65)]
        points: usize,
    },
    /// Run the oracle agreement checks.
    Selftest {
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Runs the program on `args` (including the binary name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    configure_threads();
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
            let _ = writeln!(stderr, "{}", render(&body));
            2
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("HYPERGEO_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Eval { common, lambda, x, grid } => {
            let hyp = load(&common)?;
            let points = match (x, grid) {
                (Some(x), _) => vec![x.0],
                (None, Some(path)) => read_points(&path)?,
                (None, None) => unreachable!("clap enforces the group"),
            };
            let reports = hyp.phi_many(&lambda.0, &points)?;
            let single = points.len() == 1;
            match common.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let body = if single {
                        eval_json(&points[0], &reports[0])
                    } else {
                        let results: Vec<Value> = points.iter().zip(&reports).map(|(x, r)| eval_json(x, r)).collect();
                        json!({"lambda": cvec(&lambda.0), "results": results})
                    };
                    emit_json(&common.out, stdout, &body)
                }
                Format::Csv => {
                    let mut rows = Vec::new();
                    for (x, r) in points.iter().zip(&reports) {
                        let mut row: Vec<String> = x.iter().map(|v| fnum(*v)).collect();
                        row.extend([fnum(r.value.re), fnum(r.value.im), branch_name(r).into()]);
                        rows.push(row);
                    }
                    let mut header: Vec<String> = (1..=hyp.root_system().rank()).map(|k| format!("x{k}")).collect();
                    header.extend(["re".into(), "im".into(), "branch".into()]);
                    emit_csv(&common.out, stdout, &header, &rows)?;
                    let warnings: Vec<String> = reports.iter().flat_map(|r| r.warnings.clone()).collect();
                    report_warnings(stderr, &warnings);
                    Ok(())
                }
            }
        }
        Command::SeriesCoeffs { common, lambda, level } => {
            let hyp = load(&common)?;
            let rs = hyp.root_system();
            rs.check_dim(lambda.0.len())?;
            let table = gamma_coefficients(rs, &lambda.0, level, &hyp.config().series);
            let idx = &table.index;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let rows: Vec<Vec<String>> = (0..idx.len())
                        .map(|i| {
                            let mut row: Vec<String> = idx.point(i).iter().map(|n| n.to_string()).collect();
                            row.extend([fnum(table.values[i].re), fnum(table.values[i].im)]);
                            row
                        })
                        .collect();
                    let mut header: Vec<String> = (1..=rs.rank()).map(|k| format!("n{k}")).collect();
                    header.extend(["re".into(), "im".into()]);
                    emit_csv(&common.out, stdout, &header, &rows)?;
                    if table.singular {
                        report_warnings(stderr, &["a recursion denominator fell below the threshold".to_string()]);
                    }
                    Ok(())
                }
                Format::Json => {
                    let rows: Vec<Value> = (0..idx.len())
                        .map(|i| json!({"n": idx.point(i), "value": cnum(table.values[i])}))
                        .collect();
                    let body = json!({
                        "lambda": cvec(&lambda.0),
                        "level": level,
                        "singular": table.singular,
                        "coefficients": rows,
                    });
                    emit_json(&common.out, stdout, &body)
                }
            }
        }
        Command::Cfunc { common, lambda, radius } => {
            let hyp = load(&common)?;
            hyp.root_system().check_dim(lambda.0.len())?;
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(CliError::Input("radius must be positive".into()));
            }
            let ctx = hyp.c_function();
            let (value, pole) = match ctx.eval(&lambda.0) {
                CValue::Finite(v) => (cnum(v), Value::Null),
                CValue::Pole(p) => (
                    Value::Null,
                    json!({
                        "hyperplanes": p.hyperplanes.iter().map(hyperplane_json).collect::<Vec<_>>(),
                        "residue": p.residue.map(cnum).unwrap_or(Value::Null),
                    }),
                ),
            };
            let near: Vec<Value> = ctx.singular_hyperplanes_near(&lambda.0, radius).iter().map(hyperplane_json).collect();
            let body = json!({
                "lambda": cvec(&lambda.0),
                "c": value,
                "pole": pole,
                "c_inverse": cnum(ctx.inverse(&lambda.0)),
                "plancherel_density": num(ctx.plancherel_density(&lambda.0)),
                "nearby_hyperplanes": near,
            });
            emit_json(&common.out, stdout, &body)
        }
        Command::Classify { common, lambda } => {
            let hyp = load(&common)?;
            hyp.root_system().check_dim(lambda.0.len())?;
            let cert = hyp.is_bounded(&lambda.0);
            let class = hyp.classify(&lambda.0);
            let singular: Vec<Value> = class.singular.iter().map(|s| json!({"root": s.root, "level": s.level})).collect();
            let body = json!({
                "lambda": cvec(&lambda.0),
                "bounded": cert.bounded,
                "hull_coefficients": rvec(&cert.coefficients),
                "dominant": cvec(&class.dominant),
                "generic": class.generic,
                "near_singular": class.near_singular,
                "singular_roots": singular,
                "stabilizer_order": class.stabilizer.len(),
            });
            emit_json(&common.out, stdout, &body)
        }
        Command::Asymptotics { common, lambda, direction, t } => {
            let hyp = load(&common)?;
            let ts = t.map(|t| t.0).unwrap_or_else(|| (1..=12).map(f64::from).collect());
            if ts.iter().any(|v| !(*v > 0.0)) {
                return Err(CliError::Input("t values must be positive".into()));
            }
            let report = hyp.leading_asymptotic(&lambda.0, &direction.0, &ts)?;
            match common.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let rows: Vec<Vec<String>> = report
                        .ts
                        .iter()
                        .zip(&report.ratios)
                        .map(|(t, r)| vec![fnum(*t), fnum(*r), fnum(report.predicted_limit)])
                        .collect();
                    let header = ["t", "ratio", "predicted_limit"].map(String::from);
                    emit_csv(&common.out, stdout, &header, &rows)
                }
                Format::Json => {
                    let body = json!({
                        "lambda": rvec(&lambda.0),
                        "direction": rvec(&direction.0),
                        "t": rvec(&report.ts),
                        "ratio": rvec(&report.ratios),
                        "predicted_limit": num(report.predicted_limit),
                        "b0": num(report.b0),
                        "pi0_rho0": num(report.pi0_rho0),
                        "orbit_factor": num(report.orbit_factor),
                        "extrapolated": report.extrapolated.iter().map(|v| v.map(num).unwrap_or(Value::Null)).collect::<Vec<_>>(),
                        "correction_degree": report.correction_degree,
                    });
                    emit_json(&common.out, stdout, &body)
                }
            }
        }
        Command::Transform { common, mode, input, transform_config, lambda, x, points } => {
            let hyp = load(&common)?;
            let cfg: TransformConfig = match &transform_config {
                Some(path) => read_json(path)?,
                None => TransformConfig::default(),
            };
            run_transform(&hyp, cfg, &common, mode, &input, &lambda, &x, points, stdout, stderr)
        }
        Command::Selftest { format, out } => {
            let checks = selftest()?;
            let passed = checks.iter().all(|c| c.passed);
            match format {
                Some(Format::Json) => {
                    let list: Vec<Value> = checks
                        .iter()
                        .map(|c| json!({"name": c.name, "max_error": num(c.max_error), "tolerance": num(c.tolerance), "passed": c.passed}))
                        .collect();
                    emit_json(&out, stdout, &json!({"passed": passed, "checks": list}))?;
                }
                Some(Format::Csv) => {
                    let rows: Vec<Vec<String>> = checks
                        .iter()
                        .map(|c| vec![c.name.to_string(), fnum(c.max_error), fnum(c.tolerance), c.passed.to_string()])
                        .collect();
                    emit_csv(&out, stdout, &["check", "max_error", "tolerance", "passed"].map(String::from), &rows)?;
                }
                None => {
                    let mut text = String::new();
                    for c in &checks {
                        let _ = writeln!(
                            text,
                            "{:<34} {:>10.3e} {:>10.1e}  {}",
                            c.name,
                            c.max_error,
                            c.tolerance,
                            if c.passed { "PASS" } else { "FAIL" }
                        );
                    }
                    write_target(&out, stdout, text.as_bytes())?;
                }
            }
            if passed {
                Ok(())
            } else {
                let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
                Err(CliError::SelfTest(failed.join(", ")))
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_transform(
    hyp: &Hypergeometric,
    cfg: TransformConfig,
    common: &Common,
    mode: Mode,
    input: &Path,
    lambdas: &[ComplexList],
    xs: &[RealList],
    points: usize,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let rs = hyp.root_system();
    let tr = HypergeometricTransform::new(hyp, cfg)?;
    let rank = rs.rank();
    let sampled = read_sampled(input, rank)?;
    if points < 3 {
        return Err(CliError::Input("points must be at least 3".into()));
    }
    let constant = |tr: &HypergeometricTransform| -> Result<(f64, bool), CliError> {
        Ok(match cfg.plancherel_constant {
            Some(k) => (k, false),
            None => (tr.calibrate()?, true),
        })
    };
    let format = common.format.unwrap_or(if mode == Mode::Plancherel { Format::Json } else { Format::Csv });
    match mode {
        Mode::Forward => {
            let (coords, lams): (Vec<Vec<f64>>, Vec<Vec<Complex64>>) = if lambdas.is_empty() {
                let axes = tr.uniform_axes(cfg.spectral_radius, points);
                let coords = SampledFunction { axes, values: Vec::new(), axis_weights: None }.coordinates();
                let lams = coords
                    .iter()
                    .map(|s| tr.chamber_to_space(s).iter().map(|t| Complex64::new(0.0, *t)).collect())
                    .collect();
                (coords, lams)
            } else {
                let lams: Vec<Vec<Complex64>> = lambdas.iter().map(|l| l.0.clone()).collect();
                let coords = lams.iter().map(|l| l.iter().flat_map(|c| [c.re, c.im]).collect()).collect();
                (coords, lams)
            };
            let report = tr.forward_sampled(&sampled, &lams)?;
            let mut warnings = report.warnings.clone();
            warnings.push(format!("truncation tail estimate {:.3e}", report.truncation_tail));
            match format {
                Format::Csv => {
                    let header = if lambdas.is_empty() {
                        coordinate_header("tau", rank)
                    } else {
                        (1..=rank).flat_map(|k| [format!("lambda{k}_re"), format!("lambda{k}_im")]).chain(value_header()).collect()
                    };
                    emit_csv(&common.out, stdout, &header, &value_rows(&coords, &report.values))?;
                    report_warnings(stderr, &warnings);
                    Ok(())
                }
                Format::Json => {
                    let values: Vec<Value> = lams
                        .iter()
                        .zip(&report.values)
                        .map(|(l, v)| json!({"lambda": cvec(l), "value": cnum(*v)}))
                        .collect();
                    let body = json!({
                        "mode": "forward",
                        "values": values,
                        "truncation_tail": num(report.truncation_tail),
                        "strip_bound": num(report.strip_bound),
                        "warnings": report.warnings,
                    });
                    emit_json(&common.out, stdout, &body)
                }
            }
        }
        Mode::Inverse => {
            let (k, calibrated) = constant(&tr)?;
            let tr = tr.with_constant(k)?;
            let beta_min = hyp.config().series.beta_min;
            let mut warnings = Vec::new();
            let (coords, space): (Vec<Vec<f64>>, Vec<Vec<f64>>) = if xs.is_empty() {
                let axes = tr.uniform_axes(cfg.space_radius, points);
                let all = SampledFunction { axes, values: Vec::new(), axis_weights: None }.coordinates();
                let mut coords = Vec::new();
                let mut space = Vec::new();
                let mut skipped = 0;
                for s in all {
                    let x = tr.chamber_to_space(&s);
                    let inside = crate::linalg::norm(&x) <= cfg.space_radius;
                    if inside && (rank == 1 || rs.beta(&x) >= beta_min) {
                        coords.push(s);
                        space.push(x);
                    } else if inside {
                        skipped += 1;
                    }
                }
                if skipped > 0 {
                    warnings.push(format!("{skipped} grid points closer than beta_min to a wall were skipped"));
                }
                (coords, space)
            } else {
                let space: Vec<Vec<f64>> = xs.iter().map(|x| x.0.clone()).collect();
                for x in &space {
                    rs.check_dim(x.len())?;
                }
                let coords = space
                    .iter()
                    .map(|x| (0..rank).map(|j| rs.simple_root(j).eval(x)).collect())
                    .collect();
                (coords, space)
            };
            let report = tr.inverse(&sampled, &space)?;
            if calibrated {
                warnings.push(format!("plancherel constant calibrated on the reference bump: {k:.6e}"));
            }
            match format {
                Format::Csv => {
                    emit_csv(&common.out, stdout, &coordinate_header("s", rank), &value_rows(&coords, &report.values))?;
                    report_warnings(stderr, &warnings);
                    Ok(())
                }
                Format::Json => {
                    let values: Vec<Value> = space
                        .iter()
                        .zip(&report.values)
                        .map(|(x, v)| json!({"x": rvec(x), "value": cnum(*v)}))
                        .collect();
                    let body = json!({
                        "mode": "inverse",
                        "values": values,
                        "spectral_tail": num(report.spectral_tail),
                        "plancherel_constant": num(k),
                        "calibrated": calibrated,
                        "warnings": warnings,
                    });
                    emit_json(&common.out, stdout, &body)
                }
            }
        }
        Mode::Plancherel => {
            let (k, calibrated) = constant(&tr)?;
            let tr = tr.with_constant(k)?;
            let report = tr.plancherel_sampled(&sampled)?;
            let body = json!({
                "mode": "plancherel",
                "lhs": num(report.lhs),
                "rhs": num(report.rhs),
                "ratio": num(report.ratio),
                "calibrated_ratio": report.calibrated_ratio.map(num).unwrap_or(Value::Null),
                "plancherel_constant": num(k),
                "calibrated": calibrated,
                "warnings": Vec::<String>::new(),
            });
            match format {
                Format::Json => emit_json(&common.out, stdout, &body),
                Format::Csv => {
                    let row = vec![
                        fnum(report.lhs),
                        fnum(report.rhs),
                        fnum(report.ratio),
                        fnum(report.calibrated_ratio.unwrap_or(f64::NAN)),
                    ];
                    emit_csv(&common.out, stdout, &["lhs", "rhs", "ratio", "calibrated_ratio"].map(String::from), &[row])
                }
            }
        }
    }
}

fn coordinate_header(prefix: &str, rank: usize) -> Vec<String> {
    (1..=rank).map(|k| format!("{prefix}{k}")).chain(value_header()).collect()
}

fn value_header() -> [String; 2] {
    ["re".into(), "im".into()]
}

fn value_rows(coords: &[Vec<f64>], values: &[Complex64]) -> Vec<Vec<String>> {
    coords
        .iter()
        .zip(values)
        .map(|(c, v)| c.iter().map(|x| fnum(*x)).chain([fnum(v.re), fnum(v.im)]).collect())
        .collect()
}

struct Check {
    name: &'static str,
    max_error: f64,
    tolerance: f64,
    passed: bool,
}

impl Check {
    fn new(name: &'static str, max_error: f64, tolerance: f64) -> Self {
        Self { name, max_error, tolerance, passed: max_error <= tolerance }
    }
}

fn system(family: Family, rank: usize, entries: &[(Orbit, f64)]) -> Result<RootSystem, CliError> {
    let mult = entries.iter().fold(Multiplicities::new(), |m, (o, v)| m.with(*o, *v));
    Ok(RootSystem::new(family, rank, mult)?)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn selftest() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let lambdas = [Complex64::new(0.3, 0.0), Complex64::new(1.7, -1.1), Complex64::new(0.45, 2.0)];
    let ts = [0.2, 0.8, 2.5];

    let mut first = 0.0f64;
    let mut second = 0.0f64;
    for (ma, m2a) in [(1.0, 0.0), (2.0, 0.0), (2.5, 0.7), (3.0, 1.0)] {
        let rs = system(Family::BC, 1, &[(Orbit::Short, ma), (Orbit::Double, m2a)])?;
        let hyp = Hypergeometric::new(rs.clone());
        let params = JacobiParams::new(ma, m2a);
        for lam in lambdas {
            for t in ts {
                let v = hyp.value(&[lam], &[t])?;
                first = first.max(rel(v, oracles::jacobi_phi_first(params, lam, t)?));
                if t > 0.5 {
                    let (s, _) = hc_series(&rs, &[lam], &[t], &hyp.config().series);
                    second = second.max(rel(s.value, oracles::jacobi_phi_second(params, lam, t)?));
                }
            }
        }
    }
    checks.push(Check::new("rank-one first kind", first, 1e-8));
    checks.push(Check::new("rank-one second kind", second, 1e-9));

    let a2 = system(Family::A, 2, &[(Orbit::Short, 2.0)])?;
    let hyp = Hypergeometric::new(a2.clone());
    let mut complex = 0.0f64;
    for lam in [
        vec![Complex64::new(0.3, 0.2), Complex64::new(-0.7, 1.0)],
        vec![Complex64::new(0.0, 0.0); 2],
        a2.rho_complex(),
    ] {
        for s in [[0.4, 0.7], [1.2, 0.5], [2.0, 2.0]] {
            let x = a2.from_chamber_coordinates(&s);
            complex = complex.max(rel(hyp.value(&lam, &x)?, oracles::complex_case_phi(&a2, &lam, &x)?));
        }
    }
    checks.push(Check::new("complex case A2", complex, 1e-7));

    let mut at_rho = 0.0f64;
    let systems = [
        system(Family::A, 1, &[(Orbit::Short, 1.0)])?,
        system(Family::BC, 1, &[(Orbit::Short, 1.5), (Orbit::Double, 0.5)])?,
        system(Family::A, 2, &[(Orbit::Short, 1.0)])?,
        system(Family::B, 2, &[(Orbit::Short, 1.0), (Orbit::Long, 2.0)])?,
    ];
    for rs in &systems {
        let hyp = Hypergeometric::new(rs.clone());
        let s: Vec<f64> = (0..rs.rank()).map(|j| 0.6 + 0.5 * j as f64).collect();
        let x = rs.from_chamber_coordinates(&s);
        at_rho = at_rho.max((hyp.value(&rs.rho_complex(), &x)? - 1.0).norm());
    }
    checks.push(Check::new("phi at rho equals one", at_rho, 1e-8));

    let mut hull_mismatch = 0.0;
    for rs in &systems {
        let hyp = Hypergeometric::new(rs.clone());
        let rho = rs.rho();
        for k in 0..60 {
            // Deterministic spread of points around the hull boundary.
            let scale = 0.5 + 1.0 * ((k as f64 * 0.618_033_988_75).fract());
            let angle = k as f64 * 2.399_963;
            let mu: Vec<f64> = (0..rs.rank())
                .map(|j| scale * rho[j] * (1.0 + 0.3 * (angle + j as f64).sin()))
                .collect();
            let lam: Vec<Complex64> = mu.iter().map(|v| Complex64::new(*v, 0.0)).collect();
            if hyp.is_bounded(&lam).bounded != oracles::hull_membership_bruteforce(rs, &mu) {
                hull_mismatch += 1.0;
            }
        }
    }
    checks.push(Check::new("hull membership agreement", hull_mismatch, 0.0));

    let mut c_rho = 0.0f64;
    for rs in &systems {
        let hyp = Hypergeometric::new(rs.clone());
        c_rho = c_rho.max((hyp.c_function().value(&rs.rho_complex())? - 1.0).norm());
    }
    checks.push(Check::new("c(rho) equals one", c_rho, 1e-12));
    Ok(checks)
}

fn load(common: &Common) -> Result<Hypergeometric, CliError> {
    let sys: SystemConfig = read_json(&common.system)?;
    let rs = sys.build()?;
    let mut cfg: HyperConfig = match &common.config {
        Some(path) => read_json(path)?,
        None => HyperConfig::default(),
    };
    if let Some(v) = common.max_level {
        cfg.series.max_level = v;
    }
    if let Some(v) = common.tail_tol {
        cfg.series.tail_tol = v;
    }
    if let Some(v) = common.beta_min {
        cfg.series.beta_min = v;
    }
    if let Some(v) = common.integer_tol {
        cfg.integer_tol = v;
        cfg.near_tol = cfg.near_tol.max(v);
    }
    if let Some(v) = common.nodes_per_circle {
        cfg.nodes_per_circle = v;
    }
    Ok(Hypergeometric::with_config(rs, cfg)?)
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.display().to_string(), message: e.to_string() }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_error(path, e))
}

fn csv_records(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| io_error(path, e))?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_error(path, e))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => out.push(v),
            // A non-numeric first row is a header.
            Err(_) if line == 0 => continue,
            Err(_) => return Err(io_error(path, format!("row {} is not numeric", line + 1))),
        }
    }
    Ok(out)
}

fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let points = csv_records(path)?;
    if points.is_empty() {
        return Err(io_error(path, "no points"));
    }
    Ok(points)
}

fn read_sampled(path: &Path, rank: usize) -> Result<SampledFunction, CliError> {
    let rows: Vec<(Vec<f64>, Complex64)> = csv_records(path)?
        .into_iter()
        .map(|r| match r.len() {
            n if n == rank + 2 => Ok((r[..rank].to_vec(), Complex64::new(r[rank], r[rank + 1]))),
            n if n == rank + 1 => Ok((r[..rank].to_vec(), Complex64::new(r[rank], 0.0))),
            n => Err(io_error(path, format!("rows need {} or {} columns, found {n}", rank + 1, rank + 2))),
        })
        .collect::<Result<_, _>>()?;
    Ok(SampledFunction::from_rows(rank, &rows)?)
}

fn branch_name(r: &EvaluationReport) -> &'static str {
    match r.branch {
        Branch::Generic => "generic",
        Branch::Regularized => "regularized",
        Branch::MeanValue => "mean_value",
        Branch::NearOrigin => "near_origin",
        Branch::Bracketed => "bracketed",
        Branch::Origin => "origin",
    }
}

fn eval_json(x: &[f64], r: &EvaluationReport) -> Value {
    json!({
        "x": rvec(x),
        "value": cnum(r.value),
        "branch": branch_name(r),
        "diagnostics": {
            "tail_bound": num(r.tail_bound),
            "nodes": r.nodes,
            "radius": num(r.radius),
            "max_integrand": num(r.max_integrand),
            "bracket": r.bracket.map(|(lo, hi)| json!([num(lo), num(hi)])).unwrap_or(Value::Null),
        },
        "warnings": r.warnings,
    })
}

fn hyperplane_json(h: &crate::cfunc::HyperplaneDescriptor) -> Value {
    json!({"root": h.root, "level": num(h.level), "kind": serde_json::to_value(h.kind).unwrap_or(Value::Null)})
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map(Value::Number).unwrap_or(Value::Null)
}

fn cnum(c: Complex64) -> Value {
    json!({"re": num(c.re), "im": num(c.im)})
}

fn cvec(v: &[Complex64]) -> Value {
    Value::Array(v.iter().map(|c| cnum(*c)).collect())
}

fn rvec(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| num(*x)).collect())
}

/// Floats with 17 significant digits.
fn fnum(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Pretty JSON with fixed-width float formatting and sorted keys.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    render_into(v, 0, &mut out);
    out
}

fn render_into(v: &Value, depth: usize, out: &mut String) {
    let pad = |d: usize| "  ".repeat(d);
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => out.push_str(&fnum(f)),
            _ => out.push_str(&n.to_string()),
        },
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                render_into(item, depth + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            let map: &Map<String, Value> = map;
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(key.clone()).to_string());
                out.push_str(": ");
                render_into(item, depth + 1, out);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn write_target(out: &Option<PathBuf>, stdout: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|e| io_error(path, e)),
        None => stdout.write_all(bytes).map_err(|e| io_error(Path::new("<stdout>"), e)),
    }
}

fn emit_json(out: &Option<PathBuf>, stdout: &mut dyn Write, body: &Value) -> Result<(), CliError> {
    let mut text = render(body);
    text.push('\n');
    write_target(out, stdout, text.as_bytes())
}

fn emit_csv(out: &Option<PathBuf>, stdout: &mut dyn Write, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| io_error(Path::new("<csv>"), e);
    writer.write_record(header).map_err(fail)?;
    for row in rows {
        writer.write_record(row).map_err(fail)?;
    }
    let bytes = writer.into_inner().map_err(|e| io_error(Path::new("<csv>"), e))?;
    write_target(out, stdout, &bytes)
}

fn report_warnings(stderr: &mut dyn Write, warnings: &[String]) {
    if !warnings.is_empty() {
        let _ = writeln!(stderr, "{}", render(&json!({"warnings": warnings})));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0.5").unwrap(), Complex64::new(0.5, 0.0));
        assert_eq!(parse_complex("1-2i").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("3i").unwrap(), Complex64::new(0.0, 3.0));
        assert_eq!(parse_complex("1e-3+2.5e+1i").unwrap(), Complex64::new(1e-3, 25.0));
        assert_eq!(parse_complex("-0.25 + 0.5 i").unwrap(), Complex64::new(-0.25, 0.5));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2").is_err());
    }

    #[test]
    fn float_rendering_has_seventeen_digits() {
        assert_eq!(fnum(0.1), "1.0000000000000001e-1");
        assert_eq!(render(&json!({"b": 1, "a": num(2.0)})), "{\n  \"a\": 2.0000000000000000e0,\n  \"b\": 1\n}");
    }
}
