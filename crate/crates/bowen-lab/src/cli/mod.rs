//! Command-line front end: `pressure`, `dim`, `expand`, `orderfit`, `verify`, `list-systems`.

pub mod report;
pub mod schema;
pub mod suites;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::bowen::{
    closed_form_sk_ifs1, dimension_sweep, displayed_s1_ifs1, displayed_s2_ifs1, expansion_at_root,
    expansion_coeffs_numeric, fractional_order_ifs1, log_grid, remainder_order_fit, BowenSolution, OracleOptions,
    System,
};
use crate::error::Error;

pub use report::{Row, RunReport};

/// Set when CSV or JSON goes to stdout; human-readable text then moves to stderr.
static HUMAN_TO_STDERR: AtomicBool = AtomicBool::new(false);

/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($t:tt)*) => {{
        if HUMAN_TO_STDERR.load(Ordering::Relaxed) {
            let _ = writeln!(std::io::stderr(), $($t)*);
        } else {
            let _ = writeln!(std::io::stdout(), $($t)*);
        }
    }};
}

macro_rules! esay {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stderr(), $($t)*);
    }};
}
pub use schema::{SchemaError, SystemDescription};
pub use suites::{run_suite, Suite, SuiteReport};

#[derive(Debug, Parser)]
#[command(name = "bowen-lab", version, about = "Pressure, Bowen roots and dimension expansions for perturbed shift spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// System description JSON file.
    #[arg(long, value_name = "FILE", conflicts_with = "registry")]
    pub system: Option<PathBuf>,
    /// Registry system name (see `list-systems`); linear_ifs1 when neither is given.
    #[arg(long, value_name = "NAME")]
    pub registry: Option<String>,
    /// Parameter `a` of linear_ifs1 / continued-fraction systems.
    #[arg(long, value_name = "REAL")]
    pub a: Option<f64>,
    /// Truncation: `auto` or a fixed number of edges.
    #[arg(long, value_name = "N|auto")]
    pub trunc: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write result rows as CSV (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// Write the full report as JSON (`-` for stdout).
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EpsArgs {
    #[arg(long, value_name = "REAL", conflicts_with = "eps_grid")]
    pub eps: Option<f64>,
    /// Log-spaced grid `LO:HI:COUNT`.
    #[arg(long, value_name = "LO:HI:COUNT")]
    pub eps_grid: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Topological pressure P(s log|g| + log psi) at ε.
    Pressure {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, value_name = "REAL", allow_negative_numbers = true)]
        s: f64,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Bowen root (Hausdorff dimension) at ε.
    Dim {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Coefficients s_1..s_n by recursion, cross-checked against the numeric oracle.
    Expand {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, value_name = "N", default_value_t = 2)]
        order: usize,
        /// Also tabulate remainders over this grid.
        #[arg(long, value_name = "LO:HI:COUNT")]
        eps_grid: Option<String>,
        /// Skip the numeric oracle.
        #[arg(long)]
        no_oracle: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Fit the order of the remainder s(ε) − s(0) − Σ s_k ε^k.
    Orderfit {
        #[command(flatten)]
        sys: SystemArgs,
        #[arg(long, value_name = "N", default_value_t = 1)]
        order: usize,
        #[arg(long, value_name = "LO:HI:COUNT", default_value = "1e-5:1e-1:16")]
        eps_grid: String,
        /// Leave out the largest grid points from the fit.
        #[arg(long, value_name = "K", default_value_t = 0)]
        drop_largest: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run an invariant suite.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long, value_name = "INT", default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Registry systems and their parameters.
    ListSystems {
        #[command(flatten)]
        out: OutputArgs,
    },
}

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_PRESSURE_INFINITE: i32 = 3;
pub const EXIT_ADMISSIBILITY: i32 = 4;
pub const EXIT_NOT_REGULAR: i32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError {
            code: EXIT_SCHEMA,
            message: e.0,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::PressureInfinite(_) => EXIT_PRESSURE_INFINITE,
            Error::AdmissibilityViolated { .. } => EXIT_ADMISSIBILITY,
            Error::NotStronglyRegular(_) => EXIT_NOT_REGULAR,
            Error::OutOfRangeEpsilon { .. }
            | Error::UnknownVertex(_)
            | Error::DuplicateEdgeId(_)
            | Error::DuplicateVertex(_)
            | Error::EmptyVertexSet => EXIT_SCHEMA,
            _ => EXIT_FAILURE,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Caps the global rayon pool at `BOWEN_LAB_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("BOWEN_LAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // a pool may already exist when embedded; keep it
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parse `LO:HI:COUNT` into a log-spaced ascending grid.
pub fn parse_eps_grid(spec: &str) -> Result<Vec<f64>, SchemaError> {
    let bad = || SchemaError(format!("--eps-grid expects LO:HI:COUNT with 0 < LO < HI and COUNT >= 2, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, count] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite() && count >= 2) {
        return Err(bad());
    }
    Ok(log_grid(lo, hi, count))
}

/// Resolved system plus the `a` of linear_ifs1 when the closed forms apply.
pub struct Resolved {
    pub system: System,
    pub ifs1_a: Option<f64>,
}

pub fn resolve_system(args: &SystemArgs) -> CliResult<Resolved> {
    let (mut system, ifs1_a) = match (&args.system, &args.registry) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| SchemaError(format!("cannot read {}: {e}", path.display())))?;
            let desc = schema::parse_description(&text)?;
            let a = match desc.weight {
                schema::WeightSection::LinearIfs1 { a } => Some(args.a.unwrap_or(a)),
                _ => None,
            };
            (desc.to_system(args.a)?, a)
        }
        (None, reg) => {
            let name = reg.as_deref().unwrap_or("linear_ifs1");
            let a = (name == "linear_ifs1").then(|| args.a.unwrap_or(10.0));
            (schema::registry(name, args.a)?, a)
        }
    };
    if let Some(a) = ifs1_a {
        if !(a > 1.0) {
            return Err(SchemaError(format!("linear_ifs1 needs a > 1, got {a}")).into());
        }
    }
    if let Some(t) = &args.trunc {
        system = system.with_truncation(schema::parse_truncation(t)?);
    }
    Ok(Resolved { system, ifs1_a })
}

fn eps_values(args: &EpsArgs) -> CliResult<Vec<f64>> {
    Ok(match (&args.eps_grid, args.eps) {
        (Some(g), _) => parse_eps_grid(g)?,
        (None, Some(e)) => vec![e],
        (None, None) => vec![0.0],
    })
}

/// `|s* − s_true|` estimate from the pressure residual, tail bound and slope.
fn root_uncertainty(sys: &System, sol: &BowenSolution, eps: f64) -> f64 {
    let h = 1e-6;
    let slope = match (sys.pressure(sol.s_star + h, eps), sys.pressure(sol.s_star - h, eps)) {
        (Ok(a), Ok(b)) => (a.value - b.value) / (2.0 * h),
        _ => return f64::NAN,
    };
    let tail = sys.pressure(sol.s_star, eps).map(|p| p.tail_bound).unwrap_or(f64::NAN);
    (sol.residual + tail) / slope.abs() + 4.0 * f64::EPSILON * sol.s_star.abs()
}

fn cmd_pressure(r: &mut RunReport, sys: &SystemArgs, s: f64, eps: &EpsArgs) -> CliResult<()> {
    let res = resolve_system(sys)?;
    let name = res.system.name().to_string();
    r.param("system", &name);
    r.param("s", s);
    for e in eps_values(eps)? {
        let p = res.system.pressure(s, e)?;
        say!("{name}  s={s}  eps={e}  P={:.15e}  trunc={}  tail<={:.3e}", p.value, p.truncation, p.tail_bound);
        r.results.push(Row::new(&name, Some(e), Some(p.truncation), "pressure", p.value, p.tail_bound));
    }
    Ok(())
}

fn cmd_dim(r: &mut RunReport, sys: &SystemArgs, eps: &EpsArgs) -> CliResult<()> {
    let res = resolve_system(sys)?;
    let name = res.system.name().to_string();
    r.param("system", &name);
    let grid = eps_values(eps)?;
    let sols = dimension_sweep(&res.system, &grid)?;
    let mut details = Vec::new();
    for (e, sol) in grid.iter().zip(&sols) {
        let unc = root_uncertainty(&res.system, sol, *e);
        say!(
            "{name}  eps={e}  s*={:.15}  ±{unc:.1e}  trunc={}  residual={:.1e}  iterations={}",
            sol.s_star, sol.truncation, sol.residual, sol.iterations
        );
        r.results.push(Row::new(&name, Some(*e), Some(sol.truncation), "dimension", sol.s_star, unc));
        details.push(json!({"eps": e, "solution": sol}));
    }
    r.details = json!({ "solutions": details });
    r.note("residual_tolerance", 1e-12);
    Ok(())
}

fn agreement_tol(c: f64, u1: f64, u2: f64) -> f64 {
    1e-5 * c.abs().max(1e-2) + u1 + u2
}

fn cmd_expand(r: &mut RunReport, sys: &SystemArgs, order: usize, grid: Option<&str>, no_oracle: bool) -> CliResult<()> {
    let res = resolve_system(sys)?;
    let name = res.system.name().to_string();
    r.param("system", &name);
    r.param("order", order);
    let mut rep = expansion_at_root(&res.system, order)?;
    let trunc = Some(rep.truncation);
    r.note("threshold_pn", rep.threshold_pn);
    r.note("method", rep.method);
    r.results.push(Row::new(&name, Some(0.0), trunc, "s0", rep.s0, 1e-12));
    say!("{name}  order={order}  s0={:.15}  p(n)={:.6}", rep.s0, rep.threshold_pn);

    let oracle = if no_oracle {
        None
    } else {
        match expansion_coeffs_numeric(&res.system, order, &OracleOptions::default()) {
            Ok(o) => Some(o),
            Err(e) => {
                r.note("oracle_error", e.to_string());
                say!("oracle unavailable: {e}");
                None
            }
        }
    };
    let mut table = Vec::new();
    say!("{:>3}  {:>24} {:>9}  {:>24} {:>9}  agree", "k", "recursion", "±", "oracle", "±");
    for k in 1..=order {
        let (c, u) = (rep.coeffs[k - 1], rep.uncertainties[k - 1]);
        r.results.push(Row::new(&name, Some(0.0), trunc, format!("s{k}"), c, u));
        let mut entry = json!({"k": k, "recursion": c, "recursion_uncertainty": u});
        let mut line = format!("{k:>3}  {c:>24.15e} {u:>9.1e}");
        if let Some(o) = &oracle {
            let (oc, ou) = (o.coeffs[k - 1], o.uncertainties[k - 1]);
            let tol = agreement_tol(oc, u, ou);
            let agree = (c - oc).abs() <= tol;
            r.results.push(Row::new(&name, Some(0.0), trunc, format!("s{k}_oracle"), oc, ou));
            entry["oracle"] = json!(oc);
            entry["oracle_uncertainty"] = json!(ou);
            entry["agreement_tolerance"] = json!(tol);
            entry["agree"] = json!(agree);
            line += &format!("  {oc:>24.15e} {ou:>9.1e}  {}", if agree { "yes" } else { "NO" });
        }
        if let Some(a) = res.ifs1_a {
            if let Ok(cf) = closed_form_sk_ifs1(k, a) {
                r.results.push(Row::new(&name, Some(0.0), trunc, format!("s{k}_closed_form"), cf, 1e-15 * cf.abs()));
                entry["closed_form"] = json!(cf);
            }
            let displayed = match k {
                1 => Some(displayed_s1_ifs1(a)),
                2 => Some(displayed_s2_ifs1(a)),
                _ => None,
            };
            if let Some(d) = displayed {
                let reference = oracle.as_ref().map(|o| o.coeffs[k - 1]).unwrap_or(c);
                let agree = (d - reference).abs() <= agreement_tol(reference, u, 0.0);
                r.results.push(Row::new(&name, Some(0.0), trunc, format!("s{k}_displayed"), d, 0.0));
                entry["displayed"] = json!(d);
                entry["displayed_agrees"] = json!(agree);
                if !agree {
                    line += &format!("  (displayed formula gives {d:.10e})");
                }
            }
        }
        say!("{line}");
        table.push(entry);
    }

    let mut remainders = Vec::new();
    if let Some(g) = grid {
        let grid = parse_eps_grid(g)?;
        rep.attach_remainders(&res.system, &grid)?;
        for &(e, rem) in &rep.remainder_samples {
            r.results.push(Row::new(&name, Some(e), trunc, "remainder", rem, 1e-12));
            remainders.push(json!({"eps": e, "remainder": rem}));
            say!("eps={e:.4e}  remainder={rem:.6e}");
        }
    }
    r.details = json!({"coefficients": table, "remainders": remainders});
    Ok(())
}

fn cmd_orderfit(r: &mut RunReport, sys: &SystemArgs, order: usize, grid: &str, drop: usize) -> CliResult<()> {
    let res = resolve_system(sys)?;
    let name = res.system.name().to_string();
    r.param("system", &name);
    r.param("order", order);
    r.param("drop_largest", drop);
    let grid = parse_eps_grid(grid)?;
    let rep = expansion_at_root(&res.system, order)?;
    let trunc = Some(rep.truncation);
    let sols = dimension_sweep(&res.system, &grid)?;
    let mut eps = Vec::new();
    let mut rem = Vec::new();
    for (e, sol) in grid.iter().zip(&sols) {
        let rr = sol.s_star - rep.partial_sum(*e);
        let unc = root_uncertainty(&res.system, sol, *e);
        r.results.push(Row::new(&name, Some(*e), Some(sol.truncation), "remainder", rr, unc));
        eps.push(*e);
        rem.push(rr);
    }
    let keep = eps.len().saturating_sub(drop);
    let fit = remainder_order_fit(&eps[..keep], &rem[..keep])?;
    let model = serde_json::to_value(fit.model).unwrap_or_default();
    say!(
        "{name}  order={order}  fitted exponent={:.6} ±{:.1e}  model={}  R^2={:.8}",
        fit.exponent,
        fit.uncertainty,
        model.as_str().unwrap_or_default(),
        fit.goodness
    );
    r.results.push(Row::new(&name, None, trunc, "fitted_exponent", fit.exponent, fit.uncertainty));
    let mut details = json!({"fit": fit, "coefficients": rep.coeffs, "s0": rep.s0});
    if let Some(a) = res.ifs1_a.filter(|a| *a > 1.0 && *a < 5.0) {
        let fo = fractional_order_ifs1(a)?;
        say!(
            "expected exponent {:.6} (integer coefficients k={}{})",
            fo.exponent,
            fo.k,
            if fo.boundary { ", power·log boundary" } else { "" }
        );
        r.results.push(Row::new(&name, None, trunc, "expected_exponent", fo.exponent, 0.0));
        details["expected"] = json!(fo);
    }
    r.details = details;
    Ok(())
}

fn cmd_verify(r: &mut RunReport, suite: Suite, seed: u64) -> CliResult<()> {
    r.param("suite", suite);
    r.param("seed", seed);
    let rep = run_suite(suite, seed)?;
    for p in &rep.properties {
        say!(
            "{} {}: {}/{} (worst {:.3e}, tolerance {:.1e})",
            if p.ok() { "PASS" } else { "FAIL" },
            p.name,
            p.passed,
            p.total,
            p.worst,
            p.tolerance
        );
        r.results.push(Row::new(suite.name(), p.eps, p.trunc, p.name.clone(), p.worst, p.tolerance));
    }
    r.details = serde_json::to_value(&rep).unwrap_or_default();
    if !rep.all_pass() {
        return Err(CliError {
            code: EXIT_FAILURE,
            message: format!("suite {} has failing properties", suite.name()),
        });
    }
    Ok(())
}

fn cmd_list(r: &mut RunReport) {
    let mut list = Vec::new();
    for (name, params, summary) in schema::REGISTRY {
        say!("{name:<14} {params:<16} {summary}");
        list.push(json!({"name": name, "parameters": params, "summary": summary}));
    }
    r.details = json!({ "systems": list });
}

fn write_target(path: &PathBuf, bytes: &[u8]) -> std::io::Result<()> {
    if path.as_os_str() == "-" {
        std::io::stdout().write_all(bytes)
    } else {
        fs::write(path, bytes)
    }
}

/// Run a parsed command; returns the report with its exit code set.
pub fn execute(cli: &Cli, echo: Vec<String>) -> RunReport {
    let mut r = RunReport::new(echo);
    let outcome = match &cli.command {
        Command::Pressure { sys, s, eps, .. } => cmd_pressure(&mut r, sys, *s, eps),
        Command::Dim { sys, eps, .. } => cmd_dim(&mut r, sys, eps),
        Command::Expand {
            sys,
            order,
            eps_grid,
            no_oracle,
            ..
        } => cmd_expand(&mut r, sys, *order, eps_grid.as_deref(), *no_oracle),
        Command::Orderfit {
            sys,
            order,
            eps_grid,
            drop_largest,
            ..
        } => cmd_orderfit(&mut r, sys, *order, eps_grid, *drop_largest),
        Command::Verify { suite, seed, .. } => cmd_verify(&mut r, *suite, *seed),
        Command::ListSystems { .. } => {
            cmd_list(&mut r);
            Ok(())
        }
    };
    if let Err(e) = outcome {
        esay!("error: {}", e.message);
        r.fail(e.code, &e.message);
    }
    r.sort_rows();
    r
}

fn output_args(cli: &Cli) -> &OutputArgs {
    match &cli.command {
        Command::Pressure { out, .. }
        | Command::Dim { out, .. }
        | Command::Expand { out, .. }
        | Command::Orderfit { out, .. }
        | Command::Verify { out, .. }
        | Command::ListSystems { out } => out,
    }
}

/// Full CLI entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_SCHEMA } else { 0 };
        }
    };
    configure_threads();
    let echo = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let out = output_args(&cli);
    let dash = |p: &Option<PathBuf>| p.as_deref().is_some_and(|p| p == Path::new("-"));
    HUMAN_TO_STDERR.store(dash(&out.csv) || dash(&out.json), Ordering::Relaxed);
    let mut report = execute(&cli, echo);
    if let Some(p) = &out.csv {
        let mut buf = Vec::new();
        let written = report.write_csv(&mut buf).map_err(|e| e.to_string()).and_then(|_| write_target(p, &buf).map_err(|e| e.to_string()));
        if let Err(e) = written {
            esay!("error: cannot write CSV to {}: {e}", p.display());
            report.fail(EXIT_FAILURE, "CSV output failed");
        }
    }
    if let Some(p) = &out.json {
        if let Err(e) = write_target(p, report.to_json().as_bytes()) {
            esay!("error: cannot write JSON to {}: {e}", p.display());
            report.fail(EXIT_FAILURE, "JSON output failed");
        }
    }
    report.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_grid_parsing() {
        let g = parse_eps_grid("1e-4:1e-1:4").unwrap();
        assert_eq!(g.len(), 4);
        assert!((g[3] - 0.1).abs() < 1e-15);
        assert!(parse_eps_grid("0:1:4").is_err());
        assert!(parse_eps_grid("1e-3:1e-2").is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::PressureInfinite(0.0)).code, 3);
        assert_eq!(CliError::from(Error::AdmissibilityViolated { s0: 0.4, n: 3, p_n: 0.47 }).code, 4);
        assert_eq!(CliError::from(Error::NotStronglyRegular("x".into())).code, 5);
        assert_eq!(CliError::from(SchemaError("x".into())).code, 2);
    }

    #[test]
    fn default_system_is_linear_ifs1() {
        let args = SystemArgs {
            system: None,
            registry: None,
            a: Some(6.0),
            trunc: None,
        };
        let r = resolve_system(&args).unwrap();
        assert_eq!(r.ifs1_a, Some(6.0));
        assert_eq!(r.system.name(), "linear_ifs1(a=6)");
    }
}
