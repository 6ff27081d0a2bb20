//! The `grasslin` command line.
//!
//! Exit status 0 on success, 2 on usage and input errors, 3 on numerical
//! errors. Every command builds one JSON document; `--format text` renders
//! the same document as indented `key value` lines.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use crate::bounds::{
    consistent_solution_bound, general_forward_bound, homogeneous_forward_bound,
    illcond_containment_bound, normalized_homogeneous_bound, rank_preserving_kernel_bound,
    tolerance_window, tolerance_window_from_data, tolerance_window_general,
    tsvd_exact_rank_bound, tsvd_perturbation_bound, underdetermined_minnorm_bound,
    wedin_kernel_bound, BoundInput, BoundValue, ToleranceWindow,
};
use crate::cases::{self, CaseStudy, CaseSystem};
use crate::dense::{spectral_norm, Matrix, Scalar, Vector};
use crate::error::{Error, Result};
use crate::grassmann::{
    affine_distance, exact_solution_set, grassmann_distance, set_distance, solution_distance,
    AffineSolution, SolutionSet, Subspace,
};
use crate::io::{format_scalar, parse_matrix_file, parse_vector_file, write_matrix_market};
use crate::montecarlo::{run_suite, Suite};
use crate::operator::{solve_operator, Block, StructuredElement};
use crate::rank::{numerical_kernel_with_guard, numerical_rank_with_guard, GUARD_MIN};
use crate::solver::{exact_rank, solve_general, Condition, GeneralSolution, SolveReport, SolverConfig};

pub const SCHEMA_VERSION: u32 = 1;
pub const GUARD_ENV: &str = "GRASSLIN_GUARD";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "grasslin",
    version,
    about = "Numerical rank, kernels and general numerical solutions of singular linear systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Numerical rank within θ
    Rank(RankArgs),
    /// Orthonormal basis of the numerical kernel
    Kernel(RankArgs),
    /// General numerical solution of A x = b within θ
    Solve(SolveArgs),
    /// Distance between two solution sets or kernels
    Dist(DistArgs),
    /// Tolerance windows, bound evaluation and Monte-Carlo bound checks
    Bound(BoundArgs),
    /// Run a built-in worked system
    Demo(DemoArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    theta: f64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long)]
    theta: f64,
    /// Kernel-constraint weight for the high-rank branch
    #[arg(long)]
    mu: Option<f64>,
    /// Also report the Tikhonov solution with this α
    #[arg(long)]
    alpha: Option<f64>,
    /// Use the high-rank branch when the kernel dimension is at most this
    #[arg(long)]
    branch_threshold: Option<usize>,
    /// Reference matrix; enables forward-error bound evaluation
    #[arg(long)]
    matrix2: Option<PathBuf>,
    /// Reference right-hand side
    #[arg(long, requires = "matrix2")]
    rhs2: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    rhs: Option<PathBuf>,
    #[arg(long)]
    matrix2: PathBuf,
    #[arg(long, requires = "rhs")]
    rhs2: Option<PathBuf>,
    /// Compare numerical solutions within θ instead of exact ones
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// `window`, `check`, `list`, or the name of a bound
    kind: String,
    /// Data matrix (window) or reference matrix (bound evaluation)
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Reference matrix (window) or perturbed matrix (bound evaluation)
    #[arg(long)]
    matrix2: Option<PathBuf>,
    #[arg(long)]
    rhs2: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    /// Data-error bound for `window`
    #[arg(long)]
    beta: Option<f64>,
    /// Rank hypothesis; the exact rank of the reference matrix by default
    #[arg(long)]
    rank: Option<usize>,
    /// Monte-Carlo suite for `check`; all suites when absent
    #[arg(long)]
    suite: Option<String>,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct DemoArgs {
    /// sylvester, bezout, division, regulator, macaulay or volterra
    case: String,
    /// Override the recommended θ
    #[arg(long)]
    theta: Option<f64>,
    /// Sylvester parameter
    #[arg(long, default_value_t = 0.6666)]
    t: f64,
    /// Volterra grid size
    #[arg(long, default_value_t = 128)]
    n: usize,
    /// Volterra kernel parameter
    #[arg(long, default_value_t = 4.0)]
    kappa: f64,
    /// Write the case's matrix and right-hand side into this directory
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::InconsistentRowLength { .. }
        | Error::Io(_)
        | Error::InvalidArgument(_)
        | Error::DimensionMismatch(_)
        | Error::ShapeMismatch(_)
        | Error::LengthMismatch { .. }
        | Error::NonFinite { .. } => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Guard band from `GRASSLIN_GUARD`, or the default.
pub fn guard_from_env() -> Result<f64> {
    match std::env::var(GUARD_ENV) {
        Ok(s) => {
            let g: f64 = s.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{GUARD_ENV}='{s}' is not a number"))
            })?;
            if g.is_finite() && g >= 0.0 {
                Ok(g)
            } else {
                Err(Error::InvalidArgument(format!("{GUARD_ENV} must be nonnegative, got {s}")))
            }
        }
        Err(_) => Ok(GUARD_MIN),
    }
}

/// Run the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let (format, result) = dispatch(cli.command);
    match result {
        Ok(doc) => {
            let written = match format {
                Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable")),
                Format::Text => write!(out, "{}", render_text(&doc)),
            };
            if written.is_err() {
                return EXIT_USAGE;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.name());
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> (Format, Result<Value>) {
    match cmd {
        Command::Rank(a) => (a.format, cmd_rank(&a)),
        Command::Kernel(a) => (a.format, cmd_kernel(&a)),
        Command::Solve(a) => (a.format, cmd_solve(&a)),
        Command::Dist(a) => (a.format, cmd_dist(&a)),
        Command::Bound(a) => (a.format, cmd_bound(&a)),
        Command::Demo(a) => (a.format, cmd_demo(&a)),
    }
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("infinite")
    } else {
        json!("-infinite")
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

fn scalar_value(z: Scalar) -> Value {
    if z.im == 0.0 {
        num(z.re)
    } else {
        json!(format_scalar(z))
    }
}

pub fn vector_value(v: &Vector) -> Value {
    Value::Array(v.iter().map(|&z| scalar_value(z)).collect())
}

/// Columns of `a`, one array each.
pub fn columns_value(a: &Matrix) -> Value {
    Value::Array((0..a.cols()).map(|j| vector_value(&a.column(j))).collect())
}

/// Rows of `a`, one array each.
fn rows_value(a: &Matrix) -> Value {
    Value::Array(
        (0..a.rows())
            .map(|i| Value::Array((0..a.cols()).map(|j| scalar_value(a.col(j)[i])).collect()))
            .collect(),
    )
}

fn element_value(e: &StructuredElement) -> Value {
    Value::Array(
        e.parts()
            .iter()
            .map(|p| {
                let value = match p {
                    Block::Vector(v) => vector_value(v),
                    Block::Matrix(m) => rows_value(m),
                    Block::Poly(c) => vector_value(&Vector::from_vec(c.clone())),
                };
                json!({ "space": p.descriptor().to_string(), "value": value })
            })
            .collect(),
    )
}

fn condition_value(c: Condition) -> Value {
    match c {
        Condition::Finite(k) => num(k),
        Condition::Infinite => json!("infinite"),
    }
}

fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema_version".into(), json!(SCHEMA_VERSION));
    m.insert("command".into(), json!(command));
    m
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn report_fields(doc: &mut Map<String, Value>, r: &SolveReport) {
    doc.insert("rows".into(), json!(r.rows));
    doc.insert("cols".into(), json!(r.cols));
    doc.insert("theta".into(), num(r.theta));
    doc.insert("rank".into(), json!(r.rank));
    doc.insert("sensitivity".into(), opt_num(r.sensitivity));
    doc.insert("classic_condition".into(), condition_value(r.classic_condition));
    doc.insert("backward_error".into(), num(r.backward_error));
    doc.insert("residual".into(), opt_num(r.residual));
    doc.insert("branch".into(), r.branch.map(|b| json!(b.name())).unwrap_or(Value::Null));
    doc.insert("mu".into(), opt_num(r.mu));
    doc.insert("xi".into(), opt_num(r.xi));
    doc.insert("sigma".into(), Value::Array(r.sigma.iter().map(|&s| num(s)).collect()));
}

fn solution_fields(doc: &mut Map<String, Value>, sol: &GeneralSolution) {
    doc.insert("dimension".into(), json!(sol.dimension()));
    match sol.affine() {
        Some(s) => {
            doc.insert("anchor".into(), vector_value(s.anchor()));
            doc.insert("kernel".into(), columns_value(s.kernel().basis()));
        }
        None => {
            doc.insert("anchor".into(), Value::Null);
            doc.insert("kernel".into(), Value::Null);
        }
    }
    if let Some(t) = &sol.tikhonov {
        doc.insert("tikhonov".into(), vector_value(t));
    }
}

fn cmd_rank(a: &RankArgs) -> Result<Value> {
    let guard = guard_from_env()?;
    let m = parse_matrix_file(&a.matrix)?;
    let d = numerical_rank_with_guard(&m, a.theta, guard)?;
    let mut doc = header("rank");
    doc.insert("rank".into(), json!(d.rank));
    doc.insert("matrix".into(), json!(path_str(&a.matrix)));
    doc.insert("rows".into(), json!(m.rows()));
    doc.insert("cols".into(), json!(m.cols()));
    doc.insert("theta".into(), num(a.theta));
    doc.insert("sigma_r".into(), opt_num(d.sigma_r));
    doc.insert("sigma_r_plus_1".into(), num(d.sigma_r_plus_1));
    doc.insert("guard_margin".into(), num(d.guard));
    Ok(Value::Object(doc))
}

fn cmd_kernel(a: &RankArgs) -> Result<Value> {
    let guard = guard_from_env()?;
    let m = parse_matrix_file(&a.matrix)?;
    let d = numerical_rank_with_guard(&m, a.theta, guard)?;
    let k = numerical_kernel_with_guard(&m, a.theta, guard)?;
    let mut doc = header("kernel");
    doc.insert("dimension".into(), json!(k.dim()));
    doc.insert("matrix".into(), json!(path_str(&a.matrix)));
    doc.insert("theta".into(), num(a.theta));
    doc.insert("rank".into(), json!(d.rank));
    doc.insert("basis".into(), columns_value(k.basis()));
    Ok(Value::Object(doc))
}

fn solver_config(theta: f64, mu: Option<f64>, alpha: Option<f64>, threshold: Option<usize>) -> Result<SolverConfig> {
    let mut cfg = SolverConfig::new(theta).with_guard(guard_from_env()?);
    if let Some(mu) = mu {
        cfg = cfg.with_mu(mu);
    }
    if let Some(alpha) = alpha {
        cfg = cfg.with_tikhonov(alpha);
    }
    if let Some(t) = threshold {
        cfg = cfg.with_branch_threshold(t);
    }
    Ok(cfg)
}

fn bound_value(b: &BoundValue) -> Value {
    json!({
        "value": opt_num(b.value),
        "hypotheses_met": b.hypotheses_met,
        "first_order": b.first_order,
        "hypotheses": b.hypothesis_report.iter().map(|h| json!({
            "condition": h.condition,
            "satisfied": h.satisfied,
        })).collect::<Vec<_>>(),
    })
}

type Evaluator = fn(&BoundInput) -> Result<BoundValue>;

const EVALUATORS: [(&str, Evaluator); 10] = [
    ("wedin_kernel_bound", wedin_kernel_bound),
    ("rank_preserving_kernel_bound", rank_preserving_kernel_bound),
    ("consistent_solution_bound", consistent_solution_bound),
    ("underdetermined_minnorm_bound", underdetermined_minnorm_bound),
    ("homogeneous_forward_bound", homogeneous_forward_bound),
    ("normalized_homogeneous_bound", normalized_homogeneous_bound),
    ("general_forward_bound", general_forward_bound),
    ("illcond_containment_bound", illcond_containment_bound),
    ("tsvd_perturbation_bound", tsvd_perturbation_bound),
    ("tsvd_exact_rank_bound", tsvd_exact_rank_bound),
];

fn evaluator(name: &str) -> Option<Evaluator> {
    EVALUATORS.iter().find(|(n, _)| *n == name).map(|(_, f)| *f)
}

fn evaluator_names() -> Vec<&'static str> {
    let mut names: Vec<&str> = EVALUATORS.iter().map(|(n, _)| *n).collect();
    names.sort_unstable();
    names
}

fn evaluate_all(input: &BoundInput, names: &[&str]) -> Value {
    let mut out = Map::new();
    for name in names {
        let f = evaluator(name).expect("known evaluator");
        let v = match f(input) {
            Ok(b) => bound_value(&b),
            Err(e) => json!({ "error": e.name(), "message": e.to_string() }),
        };
        out.insert((*name).to_string(), v);
    }
    Value::Object(out)
}

fn rhs_pair(a: &Matrix, b: &Vector, a2: &Matrix, b2: &Vector) -> Result<()> {
    if a.shape() != a2.shape() || b.len() != b2.len() {
        return Err(Error::DimensionMismatch(format!(
            "systems of shape {}x{} and {}x{} are not comparable",
            a.rows(),
            a.cols(),
            a2.rows(),
            a2.cols()
        )));
    }
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<Value> {
    let m = parse_matrix_file(&a.matrix)?;
    let b = parse_vector_file(&a.rhs)?;
    let cfg = solver_config(a.theta, a.mu, a.alpha, a.branch_threshold)?;
    let sol = solve_general(&m, &b, &cfg)?;
    let mut doc = header("solve");
    doc.insert("matrix".into(), json!(path_str(&a.matrix)));
    doc.insert("rhs".into(), json!(path_str(&a.rhs)));
    report_fields(&mut doc, &sol.report);
    solution_fields(&mut doc, &sol);

    if let Some(p) = &a.matrix2 {
        // The solved data are (Ã, b̃); the reference system is (A, b).
        let reference = parse_matrix_file(p)?;
        let b_ref = match &a.rhs2 {
            Some(p2) => parse_vector_file(p2)?,
            None => b.clone(),
        };
        rhs_pair(&reference, &b_ref, &m, &b)?;
        let r = exact_rank(&reference)?;
        let input = BoundInput::new(reference.clone(), m.sub(&reference), r)
            .with_rhs(b_ref.clone(), b.sub(&b_ref))
            .with_theta(a.theta);
        let mut bounds = Map::new();
        bounds.insert("reference_matrix".into(), json!(path_str(p)));
        bounds.insert("reference_rank".into(), json!(r));
        bounds.insert("delta_a".into(), num(spectral_norm(&input.da)?));
        bounds.insert("delta_b".into(), num(input.db.as_ref().map(|d| d.norm()).unwrap_or(0.0)));
        let actual = match (exact_solution_set(&reference, &b_ref), sol.affine()) {
            (Ok((exact, _)), Some(s)) if exact.dim() == s.dim() => num(affine_distance(s, &exact)?),
            _ => Value::Null,
        };
        bounds.insert("actual_distance".into(), actual);
        bounds.insert(
            "evaluations".into(),
            evaluate_all(
                &input,
                &[
                    "wedin_kernel_bound",
                    "general_forward_bound",
                    "illcond_containment_bound",
                    "tsvd_perturbation_bound",
                ],
            ),
        );
        doc.insert("bounds".into(), Value::Object(bounds));
    }
    Ok(Value::Object(doc))
}

fn cmd_dist(a: &DistArgs) -> Result<Value> {
    let m1 = parse_matrix_file(&a.matrix)?;
    let m2 = parse_matrix_file(&a.matrix2)?;
    let mut doc = header("dist");
    let guard = guard_from_env()?;
    match (&a.rhs, &a.rhs2, a.theta) {
        (Some(r1), Some(r2), Some(theta)) => {
            let b1 = parse_vector_file(r1)?;
            let b2 = parse_vector_file(r2)?;
            let s1 = solve_general(&m1, &b1, &SolverConfig::new(theta).with_guard(guard))?;
            let s2 = solve_general(&m2, &b2, &SolverConfig::new(theta).with_guard(guard))?;
            doc.insert("kind".into(), json!("numerical_solution"));
            doc.insert("distance".into(), num(set_distance(&s1.set, &s2.set)?));
            doc.insert("dimensions".into(), json!([s1.dimension(), s2.dimension()]));
        }
        (Some(r1), Some(r2), None) => {
            let b1 = parse_vector_file(r1)?;
            let b2 = parse_vector_file(r2)?;
            doc.insert("kind".into(), json!("exact_solution"));
            doc.insert("distance".into(), num(solution_distance(&m1, &b1, &m2, &b2)?));
        }
        (_, None, Some(theta)) => {
            let k1 = numerical_kernel_with_guard(&m1, theta, guard)?;
            let k2 = numerical_kernel_with_guard(&m2, theta, guard)?;
            doc.insert("kind".into(), json!("numerical_kernel"));
            doc.insert("distance".into(), num(grassmann_distance(&k1, &k2)?));
            doc.insert("dimensions".into(), json!([k1.dim(), k2.dim()]));
        }
        (_, None, None) => {
            let k1 = exact_kernel(&m1)?;
            let k2 = exact_kernel(&m2)?;
            doc.insert("kind".into(), json!("exact_kernel"));
            doc.insert("distance".into(), num(grassmann_distance(&k1, &k2)?));
            doc.insert("dimensions".into(), json!([k1.dim(), k2.dim()]));
        }
        (None, Some(_), _) => unreachable!("clap requires --rhs with --rhs2"),
    }
    Ok(Value::Object(doc))
}

fn exact_kernel(a: &Matrix) -> Result<Subspace> {
    let (s, _) = exact_solution_set(a, &Vector::zeros(a.rows()))?;
    Ok(s.kernel().clone())
}

fn window_value(w: &ToleranceWindow, theta: Option<f64>) -> Value {
    let mut m = Map::new();
    m.insert("rank".into(), json!(w.rank));
    m.insert("lower".into(), num(w.mu));
    m.insert("upper".into(), num(w.eta));
    if let Some(o) = w.omega {
        m.insert("omega".into(), num(o));
    }
    if let Some(t) = theta {
        m.insert("contains_theta".into(), json!(w.contains(t)));
    }
    Value::Object(m)
}

fn window_or_error(w: Result<ToleranceWindow>, theta: Option<f64>) -> Result<Value> {
    match w {
        Ok(w) => Ok(window_value(&w, theta)),
        Err(e @ Error::EmptyWindow { .. }) => Ok(json!({ "empty": true, "message": e.to_string() })),
        Err(e) => Err(e),
    }
}

fn require<'a>(p: &'a Option<PathBuf>, flag: &str, what: &str) -> Result<&'a PathBuf> {
    p.as_ref()
        .ok_or_else(|| Error::InvalidArgument(format!("{what} needs --{flag}")))
}

fn cmd_bound(a: &BoundArgs) -> Result<Value> {
    match a.kind.as_str() {
        "window" => bound_window(a),
        "check" => bound_check(a),
        "list" => {
            let mut doc = header("bound list");
            doc.insert("bounds".into(), json!(evaluator_names()));
            doc.insert(
                "suites".into(),
                json!(Suite::ALL.iter().map(|s| s.name()).collect::<Vec<_>>()),
            );
            Ok(Value::Object(doc))
        }
        name => bound_eval(a, name),
    }
}

fn bound_window(a: &BoundArgs) -> Result<Value> {
    let data = parse_matrix_file(require(&a.matrix, "matrix", "bound window")?)?;
    let mut doc = header("bound window");
    let beta = match (&a.matrix2, a.beta) {
        (_, Some(beta)) => beta,
        (Some(p), None) => spectral_norm(&data.sub(&parse_matrix_file(p)?))?,
        (None, None) => {
            return Err(Error::InvalidArgument(
                "bound window needs --beta or a reference --matrix2".into(),
            ))
        }
    };
    doc.insert("beta".into(), num(beta));
    doc.insert("window".into(), window_or_error(tolerance_window(&data, beta), a.theta)?);
    doc.insert(
        "conservative_window".into(),
        window_or_error(tolerance_window_from_data(&data, beta), a.theta)?,
    );
    if let Some(p) = &a.matrix2 {
        let reference = parse_matrix_file(p)?;
        let da = spectral_norm(&data.sub(&reference))?;
        doc.insert("reference_window".into(), window_or_error(tolerance_window(&reference, da), a.theta)?);
    }
    if let Some(r) = &a.rhs {
        let b = parse_vector_file(r)?;
        doc.insert(
            "nonhomogeneous_window".into(),
            window_or_error(tolerance_window_general(&data, &b, beta), a.theta)?,
        );
    }
    Ok(Value::Object(doc))
}

fn bound_check(a: &BoundArgs) -> Result<Value> {
    let suites: Vec<Suite> = match &a.suite {
        Some(name) => vec![Suite::from_name(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{name}'")))?],
        None => Suite::ALL.to_vec(),
    };
    if a.trials == 0 {
        return Err(Error::InvalidArgument("--trials must be positive".into()));
    }
    let mut doc = header("bound check");
    doc.insert("seed".into(), json!(a.seed));
    doc.insert("trials".into(), json!(a.trials));
    let mut all_passed = true;
    let mut rows = Map::new();
    for s in suites {
        let r = run_suite(s, a.trials, a.seed)?;
        all_passed &= r.passed();
        rows.insert(
            s.name().into(),
            json!({
                "passed": r.passed(),
                "checked": r.checked,
                "discarded": r.discarded,
                "violations": r.violations,
                "max_ratio": num(r.max_ratio),
                "mean_ratio": num(r.mean_ratio),
                "first_order": r.first_order,
            }),
        );
    }
    doc.insert("passed".into(), json!(all_passed));
    doc.insert("suites".into(), Value::Object(rows));
    Ok(Value::Object(doc))
}

fn bound_eval(a: &BoundArgs, name: &str) -> Result<Value> {
    if evaluator(name).is_none() {
        return Err(Error::InvalidArgument(format!(
            "unknown bound '{name}' (try `bound list`)"
        )));
    }
    let reference = parse_matrix_file(require(&a.matrix, "matrix", name)?)?;
    let data = parse_matrix_file(require(&a.matrix2, "matrix2", name)?)?;
    if reference.shape() != data.shape() {
        return Err(Error::DimensionMismatch("--matrix and --matrix2 differ in shape".into()));
    }
    let r = match a.rank {
        Some(r) => r,
        None => exact_rank(&reference)?,
    };
    let mut input = BoundInput::new(reference.clone(), data.sub(&reference), r);
    if let Some(p) = &a.rhs {
        let b = parse_vector_file(p)?;
        let b2 = match &a.rhs2 {
            Some(p2) => parse_vector_file(p2)?,
            None => b.clone(),
        };
        rhs_pair(&reference, &b, &data, &b2)?;
        input = input.with_rhs(b.clone(), b2.sub(&b));
    }
    if let Some(t) = a.theta {
        input = input.with_theta(t);
    }
    let mut doc = header("bound");
    doc.insert("bound".into(), json!(name));
    doc.insert("rank".into(), json!(r));
    let f = evaluator(name).expect("checked above");
    let v = f(&input)?;
    if let Value::Object(m) = bound_value(&v) {
        doc.extend(m);
    }
    Ok(Value::Object(doc))
}

fn export_case(case: &CaseStudy, dir: &Path) -> Result<Value> {
    let (a, b) = case.matrix_system()?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let pa = dir.join(format!("{}_A.mtx", case.name));
    let pb = dir.join(format!("{}_b.vec", case.name));
    for (p, m) in [(&pa, &a), (&pb, &b.to_column())] {
        std::fs::write(p, write_matrix_market(m)).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(json!([path_str(&pa), path_str(&pb)]))
}

fn expected_value(case: &CaseStudy) -> Value {
    let mut m = Map::new();
    for e in &case.expected {
        m.insert(
            e.quantity.into(),
            json!({ "value": num(e.value), "provenance": format!("{:?}", e.provenance).to_lowercase() }),
        );
    }
    Value::Object(m)
}

fn cmd_demo(a: &DemoArgs) -> Result<Value> {
    let case = match a.case.as_str() {
        "sylvester" => cases::sylvester_case(a.t),
        "volterra" => cases::volterra_case(a.kappa, a.n)?,
        other => cases::build(other)?,
    };
    let theta = a.theta.unwrap_or(case.theta);
    let cfg = solver_config(theta, None, None, None)?;
    let mut doc = header("demo");
    doc.insert("case".into(), json!(case.name));
    if let Some(dir) = &a.export {
        doc.insert("exported".into(), export_case(&case, dir)?);
    }

    let sol = match &case.system {
        CaseSystem::Operator { op, rhs } => {
            let s = solve_operator(op, rhs, &cfg)?;
            if let Some(anchor) = &s.anchor {
                doc.insert("anchor_blocks".into(), element_value(anchor));
            }
            doc.insert(
                "kernel_blocks".into(),
                Value::Array(s.kernel.iter().map(element_value).collect()),
            );
            s.solution
        }
        CaseSystem::Matrix { a: m, b } => solve_general(m, b, &cfg)?,
    };
    report_fields(&mut doc, &sol.report);
    solution_fields(&mut doc, &sol);
    doc.insert("expected".into(), expected_value(&case));
    doc.insert("checks".into(), demo_checks(&case, &sol, a)?);
    Ok(Value::Object(doc))
}

fn demo_checks(case: &CaseStudy, sol: &GeneralSolution, a: &DemoArgs) -> Result<Value> {
    let mut m = Map::new();
    let affine: Option<&AffineSolution> = sol.affine();
    match case.name {
        "sylvester" => {
            if let Some(s) = affine {
                let exact = cases::sylvester_exact_solution()?;
                if s.dim() == exact.dim() {
                    m.insert("distance_to_exact_set".into(), num(affine_distance(s, &exact)?));
                }
                let printed = Vector::from_real(&cases::SYLVESTER_ANCHOR);
                m.insert("anchor_deviation_from_printed".into(), num(max_abs_diff(s.anchor(), &printed)));
            }
        }
        "bezout" => {
            if let Some(s) = affine {
                let printed = Vector::from_real(&cases::BEZOUT_ANCHOR);
                m.insert("anchor_deviation_from_printed".into(), num(max_abs_diff(s.anchor(), &printed)));
            }
        }
        "regulator" => {
            if let Some(s) = affine {
                let exact = Vector::from_real(&cases::REGULATOR_ANCHOR);
                m.insert("anchor_deviation_from_exact".into(), num(max_abs_diff(s.anchor(), &exact)));
            }
            m.insert("rank_deficiency".into(), json!(sol.report.cols - sol.report.rank));
        }
        "macaulay" => {
            if let Some(s) = affine {
                let printed = cases::macaulay_printed_kernel()?;
                if printed.dim() == s.dim() {
                    m.insert("distance_to_printed_kernel".into(), num(grassmann_distance(s.kernel(), &printed)?));
                }
            }
        }
        "division" => {
            let t = cases::division_table()?;
            m.insert("kernel_direction".into(), vector_value(&t.kernel));
            m.insert("error_bound".into(), num(cases::DIVISION_ERROR_BOUND));
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "solution": r.label,
                        "x": vector_value(&r.x),
                        "single_vector_error": num(r.single_vector_error),
                        "t": num(r.t),
                        "nearest_point_error": num(r.error),
                        "within_bound": r.error <= cases::DIVISION_ERROR_BOUND,
                    })
                })
                .collect();
            m.insert("particular_solutions".into(), Value::Array(rows));
        }
        "volterra" => {
            m.insert("n".into(), json!(a.n));
            m.insert("kappa".into(), num(a.kappa));
            m.insert("quadrature_underflow".into(), json!(case.quadrature_underflow));
            if let Some(s) = affine {
                m.insert("constant_solution_error".into(), num(cases::volterra_constant_error(s)?));
                let basis = s.kernel().basis();
                let weight: Vec<f64> = (0..basis.rows())
                    .map(|i| (0..basis.cols()).map(|j| basis.col(j)[i].norm_sqr()).sum())
                    .collect();
                if let Some(k) = (0..weight.len()).max_by(|&i, &j| weight[i].total_cmp(&weight[j])) {
                    m.insert("kernel_peak_index".into(), json!(k));
                }
            }
        }
        _ => {}
    }
    if matches!(sol.set, SolutionSet::Empty) {
        m.insert("empty".into(), json!(true));
    }
    Ok(Value::Object(m))
}

fn max_abs_diff(x: &Vector, y: &Vector) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    x.iter().zip(y.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn text_scalar(v: &Value) -> String {
    match v {
        Value::Null => "none".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn render_into(out: &mut String, key: &str, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            out.push_str(&format!("{pad}{key}\n"));
            for (k, x) in m {
                render_into(out, k, x, indent + 1);
            }
        }
        Value::Array(items) if items.iter().all(is_scalar) => {
            let body: Vec<String> = items.iter().map(text_scalar).collect();
            out.push_str(&format!("{pad}{key} {}\n", body.join(" ")).replace(&format!("{key} \n"), &format!("{key}\n")));
        }
        Value::Array(items) => {
            out.push_str(&format!("{pad}{key}\n"));
            for (k, x) in items.iter().enumerate() {
                render_into(out, &format!("[{k}]"), x, indent + 1);
            }
        }
        scalar => out.push_str(&format!("{pad}{key} {}\n", text_scalar(scalar))),
    }
}

/// `key value` lines; nested objects and arrays are indented.
pub fn render_text(doc: &Value) -> String {
    let mut out = String::new();
    match doc {
        Value::Object(m) => {
            for (k, v) in m {
                if k == "schema_version" || k == "command" {
                    continue;
                }
                render_into(&mut out, k, v, 0);
            }
        }
        other => render_into(&mut out, "value", other, 0),
    }
    out
}
