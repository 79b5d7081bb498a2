//! One PASS/FAIL line per acceptance criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are expected to print FAIL; the test errors if one
//! of them starts passing, or if any other criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use bowen_lab::bowen::{
    closed_form_sk_ifs1, dimension, displayed_s1_ifs1, displayed_s2_ifs1, expansion_at_root, expansion_coeffs_numeric,
    fractional_order_ifs1, log_grid, OracleOptions, RemainderModel, System,
};
use bowen_lab::cli::{run_suite, Suite, SuiteReport};
use bowen_lab::transfer::collocation::ChebyshevGrid;
use bowen_lab::transfer::{assemble_gauss_collocation, leading_eigenpair, CollocationOptions, PowerOptions};
use bowen_lab::weights::{ConformalMapFamily, DigitSet};
use bowen_lab::Error;

/// The first-order bound `L(1,s)` on the intermediate point fails for s < 1/2.
const KNOWN_FAILURES: &[usize] = &[8];

type Check = (usize, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(label: &str, elapsed: Duration, limit: f64) -> (bool, String) {
    let secs = elapsed.as_secs_f64();
    (secs < limit, format!("{label} {secs:.2}s < {limit}s"))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn c1_unperturbed_dimension() -> Outcome {
    let exact = 2f64.ln() / 5f64.ln();
    let mut ok = true;
    let mut parts = vec![];
    for a in ["3", "10", "50"] {
        let t = Instant::now();
        let out = Command::new(env!("CARGO_BIN_EXE_bowen-lab"))
            .args(["dim", "--a", a, "--eps", "0", "--csv", "-"])
            .output()
            .unwrap();
        let (fast, time) = within("runtime", t.elapsed(), 1.0);
        let text = String::from_utf8(out.stdout).unwrap();
        let v: f64 = text.lines().nth(1).and_then(|l| l.split(',').nth(4)).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN);
        let err = (v - exact).abs();
        ok &= out.status.success() && err < 1e-10 && fast;
        parts.push(format!("a={a}: |s-log2/log5|={err:.1e} {time}"));
    }
    outcome(ok, parts.join("; "))
}

fn c2_first_coefficient() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = vec![];
    for a in [6.0, 10.0, 50.0] {
        let sys = System::linear_ifs1(a);
        let rec = expansion_at_root(&sys, 1).unwrap().coeffs[0];
        let cf = closed_form_sk_ifs1(1, a).unwrap();
        let disp = displayed_s1_ifs1(a);
        let orc = expansion_coeffs_numeric(&sys, 1, &OracleOptions::default()).unwrap().coeffs[0];
        let pair = rel(rec, cf).max(rel(rec, disp)).max(rel(cf, disp));
        let o = rel(rec, orc);
        ok &= pair < 1e-6 && o < 1e-5;
        parts.push(format!("a={a}: s1={rec:.12e} pairwise {pair:.1e} oracle {o:.1e}"));
    }
    let (fast, time) = within("runtime", t.elapsed(), 10.0);
    outcome(ok && fast, format!("{}; {time}", parts.join("; ")))
}

fn c3_second_coefficient() -> Outcome {
    let t = Instant::now();
    let sys = System::linear_ifs1(10.0);
    let rec = expansion_at_root(&sys, 2).unwrap().coeffs[1];
    let cf = closed_form_sk_ifs1(2, 10.0).unwrap();
    let orc = expansion_coeffs_numeric(&sys, 2, &OracleOptions::default()).unwrap().coeffs[1];
    let disp = displayed_s2_ifs1(10.0);
    let (fast, time) = within("runtime", t.elapsed(), 30.0);
    let ok = rel(rec, cf) < 1e-6 && rel(rec, orc) < 1e-4 && rel(cf, orc) < 1e-4 && fast;
    outcome(
        ok,
        format!(
            "recursion {rec:.12e}, closed form {cf:.12e}, oracle {orc:.12e}; printed formula {disp:.12e} disagrees (oracle authoritative); {time}"
        ),
    )
}

fn c4_fractional_order() -> Outcome {
    // (a, smallest ε, largest samples dropped)
    let cases = [(3.0, 1e-5, 0usize), (4.0, 2e-4, 2), (2.5, 1e-5, 0)];
    let mut ok = true;
    let mut parts = vec![];
    for (a, lo, drop) in cases {
        let t = Instant::now();
        let expected = fractional_order_ifs1(a).unwrap();
        let sys = System::linear_ifs1(a);
        let mut rep = expansion_at_root(&sys, expected.k).unwrap();
        rep.attach_remainders(&sys, &log_grid(lo, 1e-1, 16)).unwrap();
        rep.fit_remainder(drop).unwrap();
        let (fast, time) = within("", t.elapsed(), 60.0);
        let fitted = rep.fitted_order.unwrap();
        let model = rep.fitted_model.unwrap();
        let good = if expected.boundary {
            model == RemainderModel::PowerLog
        } else {
            let tol = if a == 3.0 { 0.05 } else { 0.1 };
            (fitted - expected.exponent).abs() <= tol
        };
        ok &= good && fast;
        parts.push(format!(
            "a={a} k={}: fitted {fitted:.4} ({model:?}) vs {:.4}{time}",
            expected.k, expected.exponent
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c5_expansion_failure() -> Outcome {
    let sys = System::linear_ifs1(3.0);
    let k = fractional_order_ifs1(3.0).unwrap().k;
    let mut rep = expansion_at_root(&sys, k).unwrap();
    rep.attach_remainders(&sys, &log_grid(1e-5, 1e-1, 16)).unwrap();
    // |s̃_k(ε)|/ε = |remainder| / ε^{k+1}; the grid tail runs towards ε = 0
    let mut scaled = rep.scaled_remainders(k as i32 + 1);
    scaled.sort_by(|x, y| y.0.total_cmp(&x.0));
    let tail: Vec<f64> = scaled[scaled.len() - 4..].iter().map(|p| p.1).collect();
    let ok = tail.windows(2).all(|w| w[1] > w[0]);
    let shown: Vec<String> = tail.iter().map(|v| format!("{v:.4e}")).collect();
    outcome(ok, format!("k={k}, |s~|/eps over the 4 smallest eps: {}", shown.join(" < ")))
}

fn c6_ifs2_admissibility() -> Outcome {
    let sys = System::linear_ifs2();
    let p: Vec<f64> = (1..=3).map(|n| sys.threshold(n).unwrap()).collect();
    let exact = (1.0 - 3f64.ln() / 5f64.ln()) / 2.0;
    let linear = p.iter().enumerate().all(|(i, v)| (v - (i + 1) as f64 * exact).abs() < 1e-6);
    let near_quoted = (p[0] - 0.158614).abs() < 1e-4;
    let s0 = 2f64.ln() / 5f64.ln();
    let order = 2.0 * 2f64.ln() / (5f64.ln() - 3f64.ln());
    let admissible = s0 > p[1]
        && s0 <= p[2]
        && matches!(expansion_at_root(&sys, 3), Err(Error::AdmissibilityViolated { .. }));
    let rec = expansion_at_root(&sys, 2).unwrap();
    let orc = expansion_coeffs_numeric(&sys, 2, &OracleOptions::default()).unwrap();
    let agree = (0..2).all(|i| (rec.coeffs[i] - orc.coeffs[i]).abs() < 1e-5);
    outcome(
        linear && near_quoted && admissible && agree,
        format!(
            "p(n)/n = {:.7} (quoted 0.158614), p(2)={:.6} < s0={s0:.6} <= p(3)={:.6}, remainder order {order:.3}; s1 {:.10} vs {:.10}, s2 {:.10} vs {:.10}",
            p[0], p[1], p[2], rec.coeffs[0], orc.coeffs[0], rec.coeffs[1], orc.coeffs[1]
        ),
    )
}

fn suite_line(r: &SuiteReport) -> String {
    r.properties
        .iter()
        .map(|p| format!("{} {}/{} worst {:.3e}", p.name, p.passed, p.total, p.worst))
        .collect::<Vec<_>>()
        .join("; ")
}

fn timed_suite(suite: Suite, limit: Option<f64>, names: &[&str]) -> Outcome {
    let t = Instant::now();
    let r = run_suite(suite, 42).unwrap();
    let (fast, time) = within("runtime", t.elapsed(), limit.unwrap_or(f64::INFINITY));
    let pass = names
        .iter()
        .all(|n| r.get(n).is_some_and(|p| p.passed == p.total && p.total > 0));
    let time = if limit.is_some() { format!("; {time}") } else { String::new() };
    outcome(pass && (fast || limit.is_none()), format!("{}{time}", suite_line(&r)))
}

fn c7_appendix_b() -> Outcome {
    timed_suite(
        Suite::AppendixB,
        Some(10.0),
        &["eigenvalue_remainder_slope", "nu1_finite_difference"],
    )
}

fn c8_appendix_c() -> Outcome {
    timed_suite(Suite::AppendixC, Some(5.0), &["alpha_lower_bound", "identity_residual"])
}

fn c9_gibbs() -> Outcome {
    timed_suite(
        Suite::Gibbs,
        None,
        &["product_ratio_deviation", "markov_constant_within_closed_form", "markov_gibbs_constant"],
    )
}

fn c10_continued_fractions() -> Outcome {
    let opts = CollocationOptions { nodes: 32, truncation: 10_000, ..CollocationOptions::default() };
    let gauss = ConformalMapFamily::continued_fraction(DigitSet::From(1), 1.0);
    let op = assemble_gauss_collocation(&gauss, 1.0, 0.0, &opts).unwrap();
    let pair = leading_eigenpair(&op.matrix, &PowerOptions::default()).unwrap();
    let lam = (pair.value - 1.0).abs();
    let grid = ChebyshevGrid::new(opts.nodes);
    let hmax = grid.nodes.iter().zip(pair.vector.iter()).map(|(x, v)| (v - 1.0 / (1.0 + x)).abs()).fold(0.0, f64::max);

    let root = |m: usize| {
        let sys = System::continued_fraction(DigitSet::Finite(vec![1, 2]), 1.0)
            .with_collocation(CollocationOptions { nodes: m, ..CollocationOptions::default() });
        dimension(&sys, 0.0).unwrap().s_star
    };
    let stable = (root(32) - root(64)).abs();

    let sys = System::continued_fraction(DigitSet::Finite((2..=20).collect()), 1.0);
    let s1 = expansion_at_root(&sys, 1).unwrap().coeffs[0];
    let h = 1e-4;
    let d = |e: f64| dimension(&sys, e).unwrap().s_star;
    let fd = (-3.0 * d(0.0) + 4.0 * d(h) - d(2.0 * h)) / (2.0 * h);
    let deriv = (s1 - fd).abs();
    outcome(
        lam < 1e-8 && hmax < 1e-7 && stable < 1e-6 && deriv < 1e-4,
        format!(
            "Gauss |lambda-1|={lam:.1e}, max|h-1/(1+x)|={hmax:.1e}; E={{1,2}} m->2m change {stable:.1e}; E={{2..20}} s1={s1:.8} vs fd {fd:.8} ({deriv:.1e})"
        ),
    )
}

fn c11_pressure_shape() -> Outcome {
    let r = run_suite(Suite::PressureShape, 42).unwrap();
    let n = r.properties.len();
    let failed: Vec<&str> = r.properties.iter().filter(|p| p.passed < p.total).map(|p| p.name.as_str()).collect();
    outcome(
        r.all_pass() && n > 0,
        format!("{} curves checked for decrease and convexity; failing: {failed:?}", n / 2),
    )
}

#[test]
fn acceptance() {
    let criteria: Vec<Check> = vec![
        (1, "unperturbed dimension", c1_unperturbed_dimension),
        (2, "first coefficient", c2_first_coefficient),
        (3, "second coefficient", c3_second_coefficient),
        (4, "fractional remainder order", c4_fractional_order),
        (5, "expansion failure", c5_expansion_failure),
        (6, "IFS(2) admissibility", c6_ifs2_admissibility),
        (7, "eigenvalue perturbation suite", c7_appendix_b),
        (8, "binomial remainder suite", c8_appendix_c),
        (9, "Gibbs property", c9_gibbs),
        (10, "continued fractions", c10_continued_fractions),
        (11, "pressure shape", c11_pressure_shape),
    ];
    let mut unexpected = vec![];
    for (id, name, check) in criteria {
        let o = check();
        let known = KNOWN_FAILURES.contains(&id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (expected FAIL)",
        };
        println!("{tag} criterion {id} {name}: {}", o.detail);
        if o.pass == known {
            unexpected.push(id);
        }
    }
    assert!(unexpected.is_empty(), "criteria with unexpected outcome: {unexpected:?}");
}
