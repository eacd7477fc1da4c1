//! `hardy` — two-sided estimates of the optimal constant in weighted
//! Hardy-type inequalities, exact model-case constants, figure-style sweeps
//! and a verification suite.
//!
//! Exit codes: 0 success, 2 usage/validation, 3 numeric failure,
//! 4 verification failure.

mod job;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hardy::bounds::{two_sided, BoundaryKind, BoundsReport, HardySetup};
use hardy::catalog::density_by_name;
use hardy::exact::{self, Delta1Reading};
use hardy::measure::{measures_from_elliptic, EllipticCoefficients, Interval, WeightedMeasure};
use hardy::special::Exponents;
use hardy::verify::{self, VerifyOptions};
use job::JobFile;

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VERIFY: u8 = 4;

/// The density grammar: float literals, the variable `x`, `+ - * / ^`
/// (with `^` binding tighter than unary minus), parentheses, and the calls
/// `exp log sin cos sqrt abs pow`. Example: `exp(-x^2/2)`.
const DENSITY_HELP: &str = "catalog name (lebesgue | power:ALPHA | gauss) or an expression in x, \
e.g. 'exp(-x^2/2)' (grammar: floats, x, + - * / ^, exp log sin cos sqrt abs pow)";

#[derive(Parser)]
#[command(
    name = "hardy",
    about = "Two-sided estimates, exact constants and oracles for weighted Hardy-type inequalities",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the isoperimetric constants and certified bounds of A.
    Bounds(BoundsArgs),
    /// Closed-form constants of the Lebesgue model case and the improvement chain.
    Exact(ExactArgs),
    /// Sweep the chain over a parameter range and write the CSV dataset.
    Sweep(SweepArgs),
    /// Run the cross-module invariant suite on the built-in catalog.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoundaryArg {
    Ergodic,
    DirichletLeft,
    DirichletRight,
    DirichletBoth,
}

impl From<BoundaryArg> for BoundaryKind {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Ergodic => BoundaryKind::Ergodic,
            BoundaryArg::DirichletLeft => BoundaryKind::DirichletLeft,
            BoundaryArg::DirichletRight => BoundaryKind::DirichletRight,
            BoundaryArg::DirichletBoth => BoundaryKind::DirichletBoth,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ReadingArg {
    A,
    B,
}

impl From<ReadingArg> for Delta1Reading {
    fn from(r: ReadingArg) -> Self {
        match r {
            ReadingArg::A => Delta1Reading::A,
            ReadingArg::B => Delta1Reading::B,
        }
    }
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Interval as `left,right`; `-inf`/`inf` for unbounded endpoints.
    #[arg(long, allow_hyphen_values = true)]
    interval: Option<String>,
    /// Density of mu; see --help for the grammar.
    #[arg(long, help = DENSITY_HELP, allow_hyphen_values = true)]
    mu: Option<String>,
    /// Density of nu.
    #[arg(long, help = DENSITY_HELP, allow_hyphen_values = true)]
    nu: Option<String>,
    /// Elliptic diffusion coefficient a(x) > 0 (defines mu and nu together).
    #[arg(long = "a", value_name = "EXPR", allow_hyphen_values = true)]
    a_coef: Option<String>,
    /// Elliptic drift coefficient b(x).
    #[arg(long = "b", value_name = "EXPR", allow_hyphen_values = true)]
    b_coef: Option<String>,
    /// Reference point for C(x) = int_theta^x b/a.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, value_enum)]
    boundary: Option<BoundaryArg>,
    /// Append the report as a CSV row (with header) to this path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    job: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "delta1-reading", value_enum)]
    delta1_reading: Option<ReadingArg>,
    #[arg(long)]
    job: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep the diagonal p = q over --p-range.
    #[arg(long)]
    diagonal: bool,
    /// Diagonal range as `start,end`.
    #[arg(long = "p-range")]
    p_range: Option<String>,
    /// Fixed p for an offset sweep over r = q - p.
    #[arg(long)]
    p: Option<f64>,
    /// Offset range as `start,end`.
    #[arg(long = "r-range")]
    r_range: Option<String>,
    #[arg(long)]
    step: Option<f64>,
    #[arg(long = "delta1-reading", value_enum)]
    delta1_reading: Option<ReadingArg>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    job: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run the subset completing in well under 30 seconds.
    #[arg(long)]
    quick: bool,
    /// Oracle mesh size override.
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Oracle tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    job: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bounds(args) => run_bounds(args),
        Command::Exact(args) => run_exact(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError { code: EXIT_USAGE, message: msg.into() }
}

fn numeric(msg: impl std::fmt::Display) -> CliError {
    CliError { code: EXIT_NUMERIC, message: msg.to_string() }
}

/// Format with 12 significant digits; scientific notation keeps rows
/// byte-stable across magnitudes.
fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{:.11e}", x)
    } else if x.is_infinite() && x > 0.0 {
        "inf".to_string()
    } else if x.is_infinite() {
        "-inf".to_string()
    } else {
        "nan".to_string()
    }
}

fn load_job(path: &Option<PathBuf>) -> Result<JobFile, CliError> {
    match path {
        Some(p) => JobFile::load(p).map_err(usage),
        None => Ok(JobFile::empty()),
    }
}

fn parse_endpoint(s: &str) -> Result<f64, CliError> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        v => v
            .parse::<f64>()
            .map_err(|_| usage(format!("bad interval endpoint '{}'", v))),
    }
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| usage(format!("{} must be 'start,end', got '{}'", what, s)))?;
    Ok((parse_endpoint(a)?, parse_endpoint(b)?))
}

fn run_bounds(args: BoundsArgs) -> Result<ExitCode, CliError> {
    let jf = load_job(&args.job)?;
    jf.check_command("bounds").map_err(usage)?;
    let p = args
        .p
        .or(jf.parse::<f64>("p").map_err(usage)?)
        .ok_or_else(|| usage("--p is required"))?;
    let q = args
        .q
        .or(jf.parse::<f64>("q").map_err(usage)?)
        .ok_or_else(|| usage("--q is required"))?;
    let interval_text = args
        .interval
        .or(jf.get("interval").map(String::from))
        .ok_or_else(|| usage("--interval is required"))?;
    let (left, right) = parse_pair(&interval_text, "--interval")?;
    let interval = Interval::new(left, right).map_err(|e| usage(e.to_string()))?;
    let boundary: BoundaryKind = match args.boundary {
        Some(b) => b.into(),
        None => match jf.get("boundary") {
            Some("ergodic") => BoundaryKind::Ergodic,
            Some("dirichlet-left") => BoundaryKind::DirichletLeft,
            Some("dirichlet-right") => BoundaryKind::DirichletRight,
            Some("dirichlet-both") => BoundaryKind::DirichletBoth,
            Some(other) => return Err(usage(format!("job file: unknown boundary '{}'", other))),
            None => return Err(usage("--boundary is required")),
        },
    };
    let exponents = Exponents::new(p, q).map_err(|e| usage(e.to_string()))?;

    let mu_src = args.mu.or(jf.get("mu").map(String::from));
    let nu_src = args.nu.or(jf.get("nu").map(String::from));
    let a_src = args.a_coef.or(jf.get("a").map(String::from));
    let b_src = args.b_coef.or(jf.get("b").map(String::from));
    let theta = args.theta.or(jf.parse::<f64>("theta").map_err(usage)?);

    let (mu, nu) = match (&mu_src, &nu_src, &a_src, &b_src) {
        (Some(mu), Some(nu), None, None) => {
            let mu = WeightedMeasure::new(interval, density_by_name(mu).map_err(usage)?)
                .map_err(numeric)?;
            let nu = WeightedMeasure::new(interval, density_by_name(nu).map_err(usage)?)
                .map_err(numeric)?;
            (mu, nu)
        }
        (None, None, Some(a), Some(b)) => {
            let theta = theta.ok_or_else(|| usage("--theta is required with --a/--b"))?;
            let coef = EllipticCoefficients {
                a: hardy::expr::parse(a).map_err(|e| usage(e.to_string()))?,
                b: hardy::expr::parse(b).map_err(|e| usage(e.to_string()))?,
                theta,
            };
            let (mu, nu, _hat) = measures_from_elliptic(&coef, interval).map_err(numeric)?;
            (mu, nu)
        }
        _ => {
            return Err(usage(
                "exactly one measure source: either --mu and --nu, or --a, --b and --theta",
            ))
        }
    };

    let setup = HardySetup::new(mu, nu, exponents, boundary).map_err(numeric)?;
    let report = two_sided(&setup).map_err(numeric)?;
    print_report(&report);
    if let Some(path) = &args.out.clone().or(jf.get("out").map(PathBuf::from)) {
        write_report_csv(path, &report).map_err(numeric)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn opt_sup1(v: &Option<hardy::bounds::Sup1>) -> (String, String) {
    match v {
        Some(s) => (fmt12(s.value), fmt12(s.at)),
        None => (String::new(), String::new()),
    }
}

fn print_report(r: &BoundsReport) {
    println!("boundary: {}", r.boundary);
    println!("p: {}", r.p);
    println!("q: {}", r.q);
    if let Some(b) = &r.b_plus {
        println!("b_plus: {} at y = {}", fmt12(b.value), fmt12(b.at));
    }
    if let Some(b) = &r.b_minus {
        println!("b_minus: {} at x = {}", fmt12(b.value), fmt12(b.at));
    }
    if let Some(b) = &r.b_star {
        println!(
            "b_star: {} at (x, y) = ({}, {})",
            fmt12(b.value),
            fmt12(b.at.0),
            fmt12(b.at.1)
        );
    }
    if let Some(b) = &r.b_substar {
        println!(
            "b_substar: {} at (x, y) = ({}, {})",
            fmt12(b.value),
            fmt12(b.at.0),
            fmt12(b.at.1)
        );
    }
    if let Some(k) = r.kappa {
        println!("kappa: {}", fmt12(k));
    }
    if let Some(k) = r.kappa0 {
        println!("kappa0: {}", fmt12(k));
    }
    match r.lower {
        Some(l) => println!("lower_A: {}", fmt12(l)),
        None => println!("lower_A: none"),
    }
    match r.upper {
        Some(u) => println!("upper_A: {}", fmt12(u)),
        None => println!("upper_A: none"),
    }
    if let Some(f) = r.factor {
        println!("factor: {}", fmt12(f));
    }
    if let Some(note) = &r.gap_note {
        println!("note: {}", note);
    }
    if r.non_concave_flag {
        println!("warning: refinement seeds disagreed (possible multimodal objective)");
    }
}

fn write_report_csv(path: &Path, r: &BoundsReport) -> Result<(), String> {
    let mut out = String::new();
    out.push_str("boundary,p,q,b_plus,b_minus,b_star,b_substar,kappa,kappa0,lower_A,upper_A,factor\n");
    let (bp, _) = opt_sup1(&r.b_plus);
    let (bm, _) = opt_sup1(&r.b_minus);
    let bs = r.b_star.as_ref().map(|s| fmt12(s.value)).unwrap_or_default();
    let bss = r.b_substar.as_ref().map(|s| fmt12(s.value)).unwrap_or_default();
    let row = [
        r.boundary.as_str().to_string(),
        fmt12(r.p),
        fmt12(r.q),
        bp,
        bm,
        bs,
        bss,
        r.kappa.map(fmt12).unwrap_or_default(),
        r.kappa0.map(fmt12).unwrap_or_default(),
        r.lower.map(fmt12).unwrap_or_default(),
        r.upper.map(fmt12).unwrap_or_default(),
        r.factor.map(fmt12).unwrap_or_default(),
    ];
    out.push_str(&row.join(","));
    out.push('\n');
    std::fs::write(path, out).map_err(|e| format!("cannot write {}: {}", path.display(), e))
}

fn run_exact(args: ExactArgs) -> Result<ExitCode, CliError> {
    let jf = load_job(&args.job)?;
    jf.check_command("exact").map_err(usage)?;
    let p = args
        .p
        .or(jf.parse::<f64>("p").map_err(usage)?)
        .ok_or_else(|| usage("--p is required"))?;
    let q = args
        .q
        .or(jf.parse::<f64>("q").map_err(usage)?)
        .ok_or_else(|| usage("--q is required"))?;
    let reading: Delta1Reading = args
        .delta1_reading
        .map(Into::into)
        .or(match jf.get("delta1-reading") {
            Some("A") => Some(Delta1Reading::A),
            Some("B") => Some(Delta1Reading::B),
            _ => None,
        })
        .unwrap_or_default();
    let chain = exact::improvement_chain(p, q, reading).map_err(numeric)?;
    println!("p: {}  q: {}  delta1 reading: {}  gamma*: {}", p, q, reading.as_str(), fmt12(chain.gamma_star));
    println!("B,delta1_bar,A,A_star,delta1,kB");
    let vals: Vec<String> = chain.values().iter().map(|&v| fmt12(v)).collect();
    println!("{}", vals.join(","));
    for v in &chain.violations {
        println!("warning: ordering violation: {}", v);
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(args: SweepArgs) -> Result<ExitCode, CliError> {
    let jf = load_job(&args.job)?;
    jf.check_command("sweep").map_err(usage)?;
    let diagonal = args.diagonal || jf.get("diagonal") == Some("true");
    let step = args
        .step
        .or(jf.parse::<f64>("step").map_err(usage)?)
        .ok_or_else(|| usage("--step is required"))?;
    if !(step > 0.0) {
        return Err(usage("--step must be positive"));
    }
    let reading: Delta1Reading = args
        .delta1_reading
        .map(Into::into)
        .or(match jf.get("delta1-reading") {
            Some("A") => Some(Delta1Reading::A),
            Some("B") => Some(Delta1Reading::B),
            _ => None,
        })
        .unwrap_or_default();
    let out = args
        .out
        .or(jf.get("out").map(PathBuf::from))
        .ok_or_else(|| usage("--out is required"))?;

    let rows = if diagonal {
        let range = args
            .p_range
            .or(jf.get("p-range").map(String::from))
            .ok_or_else(|| usage("--p-range is required with --diagonal"))?;
        let (start, end) = parse_pair(&range, "--p-range")?;
        if !(start > 1.0 && end > start) {
            return Err(usage("--p-range must satisfy 1 < start < end"));
        }
        exact::sweep_diagonal(start, end, step, reading).map_err(numeric)?
    } else {
        let p = args
            .p
            .or(jf.parse::<f64>("p").map_err(usage)?)
            .ok_or_else(|| usage("--p is required (or use --diagonal)"))?;
        let range = args
            .r_range
            .or(jf.get("r-range").map(String::from))
            .ok_or_else(|| usage("--r-range is required"))?;
        let (start, end) = parse_pair(&range, "--r-range")?;
        if !(start >= 0.0 && end > start) {
            return Err(usage("--r-range must satisfy 0 <= start < end"));
        }
        exact::sweep_offset(p, start, end, step, reading).map_err(numeric)?
    };

    // hard checks at emission: finite values, row-wise ordering for q >= p
    let mut csv = String::from("p,q,B,delta1_bar,A,A_star,delta1,kB\n");
    for row in &rows {
        if row.values().iter().any(|v| !v.is_finite()) {
            return Err(numeric(format!(
                "non-finite chain value at p = {}, q = {}",
                row.p, row.q
            )));
        }
        if row.q >= row.p && !row.is_ordered() {
            return Err(numeric(format!(
                "chain ordering violated at p = {}, q = {}: {}",
                row.p,
                row.q,
                row.violations.join("; ")
            )));
        }
        let mut fields = vec![fmt12(row.p), fmt12(row.q)];
        fields.extend(row.values().iter().map(|&v| fmt12(v)));
        csv.push_str(&fields.join(","));
        csv.push('\n');
    }
    std::fs::write(&out, csv)
        .map_err(|e| numeric(format!("cannot write {}: {}", out.display(), e)))?;
    println!("wrote {} rows to {}", rows.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, CliError> {
    let jf = load_job(&args.job)?;
    jf.check_command("verify").map_err(usage)?;
    let opts = VerifyOptions {
        quick: args.quick || jf.get("quick") == Some("true"),
        grid_n: args.grid_n.or(jf.parse::<usize>("grid-n").map_err(usage)?),
        tol: args.tol.or(jf.parse::<f64>("tol").map_err(usage)?),
    };
    let outcomes = verify::run(opts);
    let mut hard_failure = false;
    let mut stdout = std::io::stdout().lock();
    for o in &outcomes {
        let status = match (o.hard, o.passed) {
            (_, true) => "PASS",
            (true, false) => "FAIL",
            (false, false) => "WARN",
        };
        let _ = writeln!(stdout, "{:4}  {}: {}", status, o.name, o.detail);
        if o.hard && !o.passed {
            hard_failure = true;
        }
    }
    drop(stdout);
    if hard_failure {
        return Err(CliError { code: EXIT_VERIFY, message: "verification failed".into() });
    }
    Ok(ExitCode::SUCCESS)
}
