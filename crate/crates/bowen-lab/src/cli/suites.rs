//! Randomized and deterministic invariant suites behind `verify`.

use clap::ValueEnum;
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::binom_bound::{first_order_bound_corrected, solve_alpha, threshold_m};
use crate::bowen::{dimension, System};
use crate::dd::Dd;
use crate::eigen_perturb::{b_coeffs_multinomial, eigen_expansion, nu_expansion, OperatorFamily};
use crate::error::Result;
use crate::graph_shift::DirectedMultigraph;
use crate::series_comb::{
    a_coeffs, binom_real, compositions, g_kp, series_power, series_power_display, EdgeJet, SeriesCoefficients,
};
use crate::transfer::{assemble_edge_matrix, edge_matrix_from_values, gibbs_check, rpf_triplet_of, PressureCurve};
use crate::weights::{PerturbedWeightFamily, PsiFamily};

use super::schema::registry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Suite {
    #[value(name = "appendixB")]
    #[serde(rename = "appendixB")]
    AppendixB,
    #[value(name = "appendixC")]
    #[serde(rename = "appendixC")]
    AppendixC,
    #[value(name = "gibbs")]
    #[serde(rename = "gibbs")]
    Gibbs,
    #[value(name = "combinatorics")]
    #[serde(rename = "combinatorics")]
    Combinatorics,
    #[value(name = "pressure-shape")]
    #[serde(rename = "pressure-shape")]
    PressureShape,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::AppendixB => "appendixB",
            Suite::AppendixC => "appendixC",
            Suite::Gibbs => "gibbs",
            Suite::Combinatorics => "combinatorics",
            Suite::PressureShape => "pressure-shape",
        }
    }
}

/// Outcome of one property over all its samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    /// Worst measured value over the samples, in the property's own units.
    pub worst: f64,
    /// Pass threshold for `worst`.
    pub tolerance: f64,
    pub eps: Option<f64>,
    pub trunc: Option<usize>,
}

impl PropertyResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total && self.total > 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.properties.iter().all(PropertyResult::ok)
    }

    pub fn get(&self, name: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.name == name)
    }
}

/// Accumulates pass counts; `worst` is a max (`upper`) or a min (lower bound).
struct Tally {
    p: PropertyResult,
    upper: bool,
}

impl Tally {
    fn at_most(name: &str, tol: f64) -> Self {
        Tally {
            p: PropertyResult {
                name: name.into(),
                passed: 0,
                total: 0,
                worst: f64::NEG_INFINITY,
                tolerance: tol,
                eps: None,
                trunc: None,
            },
            upper: true,
        }
    }

    fn at_least(name: &str, tol: f64) -> Self {
        let mut t = Tally::at_most(name, tol);
        t.upper = false;
        t.p.worst = f64::INFINITY;
        t
    }

    fn record(&mut self, v: f64) {
        self.p.total += 1;
        let pass = if self.upper { v <= self.p.tolerance } else { v >= self.p.tolerance };
        if pass {
            self.p.passed += 1;
        }
        if v.is_nan() {
            self.p.worst = f64::NAN;
        } else if self.upper {
            self.p.worst = self.p.worst.max(v);
        } else {
            self.p.worst = self.p.worst.min(v);
        }
    }

    /// Record a sample that could not be evaluated.
    fn record_failure(&mut self) {
        self.p.total += 1;
        self.p.worst = f64::NAN;
    }

    fn flag(&mut self, ok: bool, v: f64) {
        self.p.total += 1;
        if ok {
            self.p.passed += 1;
        }
        self.p.worst = if self.upper { self.p.worst.max(v) } else { self.p.worst.min(v) };
    }

    fn with(mut self, eps: Option<f64>, trunc: Option<usize>) -> Self {
        self.p.eps = eps;
        self.p.trunc = trunc;
        self
    }

    fn done(self) -> PropertyResult {
        self.p
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let properties = match suite {
        Suite::AppendixB => appendix_b(seed)?,
        Suite::AppendixC => appendix_c(seed),
        Suite::Gibbs => gibbs(seed)?,
        Suite::Combinatorics => combinatorics(seed),
        Suite::PressureShape => pressure_shape()?,
    };
    Ok(SuiteReport { suite, seed, properties })
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(lo..hi))
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// `λ(ε)` as a double-double Rayleigh quotient `νᵀL(ε)h / νᵀh` on the f64 eigenvectors.
fn rayleigh_dd(fam: &OperatorFamily, eps: f64) -> Result<Dd> {
    let t = rpf_triplet_of(&fam.at(eps))?;
    let n = fam.dim();
    let coeffs: Vec<DMatrix<f64>> = (0..=fam.order()).map(|k| fam.coeff(k)).collect();
    let (mut num, mut den) = (Dd::ZERO, Dd::ZERO);
    for i in 0..n {
        for j in 0..n {
            let mut m = Dd::ZERO;
            let mut p = Dd::ONE;
            for c in &coeffs {
                m = m + p.mul_f64(c[(i, j)]);
                p = p.mul_f64(eps);
            }
            num = num + m.mul_f64(t.nu[i]).mul_f64(t.h[j]);
        }
        den = den + Dd::new(t.nu[i]).mul_f64(t.h[i]);
    }
    Ok(num / den)
}

/// Random positive 6×6 cubic families: eigenvalue remainder order and `ν₁`.
fn appendix_b(seed: u64) -> Result<Vec<PropertyResult>> {
    const FAMILIES: usize = 20;
    const DIM: usize = 6;
    const ORDER: usize = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = crate::bowen::log_grid(1e-3, 1e-1, 9);
    let mut slope = Tally::at_least("eigenvalue_remainder_slope", 3.9);
    let mut nu1 = Tally::at_most("nu1_finite_difference", 1e-7);
    let mut lam1 = Tally::at_most("lambda1_finite_difference", 1e-7);
    let one = DVector::from_element(DIM, 1.0);
    for _ in 0..FAMILIES {
        let base = random_matrix(&mut rng, DIM, 0.1, 1.0);
        // Taylor coefficients decaying like 10^{-k}: analytic well beyond the sampled window
        let orders: Vec<DMatrix<f64>> = (1..=ORDER)
            .map(|k| random_matrix(&mut rng, DIM, 0.0, 1.0) / 10f64.powi(k as i32))
            .collect();
        let fam = OperatorFamily::new(base, orders)?;
        let exp = eigen_expansion(&fam, ORDER)?;
        let nus = nu_expansion(&exp, &one)?;

        let lam0 = rayleigh_dd(&fam, 0.0)?;
        let mut rem = Vec::with_capacity(grid.len());
        for &e in &grid {
            let tail = exp.lambda_coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * e);
            rem.push((rayleigh_dd(&fam, e)? - lam0 - Dd::new(tail)).to_f64());
        }
        slope.record(loglog_slope(&grid, &rem));

        let d = 1e-4;
        let plus = rpf_triplet_of(&fam.at(d))?;
        let minus = rpf_triplet_of(&fam.at(-d))?;
        let fd = (&plus.nu - &minus.nu) / (2.0 * d);
        nu1.record((nus.nu_coeffs[1].transpose() - fd).amax());
        lam1.record(((plus.lambda - minus.lambda) / (2.0 * d) - exp.lambda_coeffs[0]).abs());
    }
    Ok(vec![slope.done(), nu1.done(), lam1.done()])
}

/// Random certificates below the threshold `M(n,s)`.
fn appendix_c(seed: u64) -> Vec<PropertyResult> {
    const COUNT: usize = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound = Tally::at_least("alpha_lower_bound", 0.0);
    let mut resid = Tally::at_most("identity_residual", 1e-12);
    for _ in 0..COUNT {
        let n = rng.random_range(1..=4usize);
        let s = rng.random_range(0.05..0.95);
        let x = 10f64.powf(rng.random_range(-2.0..2.0));
        let t = threshold_m(n, s) * rng.random_range(1e-3..=1.0);
        match solve_alpha(n, s, t * x, x) {
            Ok(c) => {
                bound.flag(c.threshold_ok && c.holds(), c.alpha - c.bound);
                resid.record(c.residual);
            }
            Err(_) => {
                bound.record_failure();
                resid.record_failure();
            }
        }
    }
    let mut corrected = Tally::at_least("alpha_lower_bound_first_order_corrected", 0.0);
    for _ in 0..COUNT / 4 {
        let s = rng.random_range(0.05..0.95);
        let m = first_order_bound_corrected(s);
        let x = 10f64.powf(rng.random_range(-2.0..2.0));
        match solve_alpha(1, s, m * rng.random_range(1e-3..=1.0) * x, x) {
            Ok(c) => corrected.record(c.alpha - m),
            Err(_) => corrected.record_failure(),
        }
    }
    vec![bound.done(), resid.done(), corrected.done()]
}

/// Cylinder ratios for product measures and for random Markov potentials.
fn gibbs(seed: u64) -> Result<Vec<PropertyResult>> {
    const DEPTH: usize = 6;
    const EDGES: usize = 8;
    let mut product = Tally::at_most("product_ratio_deviation", 1e-12).with(None, Some(EDGES));
    for eps in [0.0, 0.05] {
        let sys = System::linear_ifs1(10.0);
        let s = dimension(&sys, eps)?.s_star;
        let graph = DirectedMultigraph::full_shift(EDGES);
        let fam = PerturbedWeightFamily::linear_ifs1(10.0);
        let op = assemble_edge_matrix(&graph, &fam, &PsiFamily::default(), s, eps, f64::INFINITY)?;
        let t = rpf_triplet_of(&op.matrix)?;
        let logw: Vec<f64> = (0..EDGES).map(|e| op.matrix[(0, e)].ln()).collect();
        let b = gibbs_check(&t, &graph, &logw, DEPTH)?;
        product.record((b.c_max - 1.0).abs().max((b.c_min - 1.0).abs()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut markov = Tally::at_most("markov_constant_within_closed_form", 1e-12);
    let mut constant = Tally::at_most("markov_gibbs_constant", 1e6);
    let graph = DirectedMultigraph::new(["a", "b"], [("aa", "a", "a"), ("ab", "a", "b"), ("ba", "b", "a"), ("bb", "b", "b")])?;
    for _ in 0..5 {
        let w: Vec<f64> = (0..graph.n_edges()).map(|_| rng.random_range(0.05..0.6)).collect();
        let m = edge_matrix_from_values(&graph, &w);
        let t = rpf_triplet_of(&m)?;
        let logw: Vec<f64> = w.iter().map(|v| v.ln()).collect();
        let b = gibbs_check(&t, &graph, &logw, DEPTH)?;
        // ratio of a cylinder is h(first edge) · Σ ν over successors of the last edge
        let succ: Vec<f64> = (0..graph.n_edges())
            .map(|e| (0..graph.n_edges()).filter(|&f| graph.incidence(e, f)).map(|f| t.nu[f]).sum())
            .collect();
        let hi = t.h.max() * succ.iter().cloned().fold(f64::MIN, f64::max);
        let lo = t.h.min() * succ.iter().cloned().fold(f64::MAX, f64::min);
        markov.record(((b.c_max - hi) / hi).max((lo - b.c_min) / lo).max(0.0));
        constant.record(b.constant());
    }
    Ok(vec![product.done(), markov.done(), constant.done()])
}

fn partitions(k: usize, l: usize) -> u64 {
    let mut p = vec![vec![0u64; l + 1]; k + 1];
    p[0][0] = 1;
    for kk in 1..=k {
        for ll in 1..=l.min(kk) {
            p[kk][ll] = p[kk - 1][ll - 1] + if kk >= ll { p[kk - ll][ll] } else { 0 };
        }
    }
    p[k][l]
}

/// Taylor coefficients of `a(ε)^p` by the J.C.P. Miller recurrence.
fn miller_power(a: &[f64], p: f64, n: usize) -> Vec<f64> {
    let mut b = vec![a[0].powf(p)];
    for k in 1..=n {
        let acc: f64 = (1..=k)
            .map(|j| ((p + 1.0) * j as f64 - k as f64) * a.get(j).copied().unwrap_or(0.0) * b[k - j])
            .sum();
        b.push(acc / (k as f64 * a[0]));
    }
    b
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn combinatorics(seed: u64) -> Vec<PropertyResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut counts = Tally::at_most("composition_counts", 0.0);
    for k in 1..=12 {
        for l in 1..=k {
            counts.record((compositions(k, l).tuples.len() as f64 - partitions(k, l) as f64).abs());
        }
    }

    let mut power = Tally::at_most("weight_power_coefficients", 1e-12);
    for _ in 0..200 {
        let g0 = rng.random_range(0.1..1.0);
        let gk: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0) * g0).collect();
        let p = rng.random_range(0.2..2.0);
        let jet = EdgeJet::new(g0, gk.clone());
        let mut a = vec![g0];
        a.extend(gk);
        let want = miller_power(&a, p, 4);
        let worst = (0..=4).map(|k| rel(g_kp(&jet, p, k), want[k])).fold(0.0, f64::max);
        power.record(worst);
    }

    let mut binom = Tally::at_most("binomial_shift_identity", 1e-12);
    for _ in 0..200 {
        let l = rng.random_range(0..=6usize);
        let s = rng.random_range(0.0..1.0);
        let p = s + rng.random_range(-0.5..0.5);
        let sum: f64 = (0..=l).map(|j| a_coeffs(l, j, s) * (p - s).powi(j as i32)).sum();
        binom.record(rel(sum, binom_real(p, l)));
    }

    let mut recip = Tally::at_most("reciprocal_multinomial", 1e-12);
    for _ in 0..200 {
        let mut c = vec![rng.random_range(0.5..2.0)];
        c.extend((0..5).map(|_| rng.random_range(-1.0..1.0)));
        let b = b_coeffs_multinomial(&c);
        let prod = SeriesCoefficients::new(c).mul_trunc(&SeriesCoefficients::new(b), 5);
        let worst = (0..=5)
            .map(|k| (prod.get(k) - if k == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        recip.record(worst);
    }

    let mut display = Tally::at_most("display_power_factorial", 1e-12);
    for _ in 0..100 {
        let mut c = vec![0.0];
        c.extend((0..6).map(|_| rng.random_range(-1.0..1.0)));
        let s = SeriesCoefficients::new(c);
        for k in 2..=4usize {
            let fact = (1..=k).product::<usize>() as f64;
            let pow = series_power(&s, k, 7);
            // the display form skips the top coefficient, so compare where it is absent
            for i in k..=6 {
                display.record(rel(series_power_display(&s, k, i) * fact, pow.get(i)));
            }
        }
    }
    vec![counts.done(), power.done(), binom.done(), recip.done(), display.done()]
}

/// Registry systems sampled for the pressure-shape suite.
pub fn shape_systems() -> Vec<System> {
    let mut v: Vec<System> = [2.5, 3.0, 4.0, 10.0].iter().map(|&a| System::linear_ifs1(a)).collect();
    for name in ["linear_ifs2", "cont_frac", "cont_frac_12", "gauss", "finite_markov"] {
        v.push(registry(name, None).expect("registry name"));
    }
    v
}

fn pressure_shape() -> Result<Vec<PropertyResult>> {
    const SLACK: f64 = 1e-9;
    let mut out = Vec::new();
    for sys in shape_systems() {
        let pl = sys.abscissa()?;
        let lo = if pl.is_finite() { pl + 0.1 } else { 0.0 };
        let grid: Vec<f64> = (0..=10).map(|i| lo + 0.1 * i as f64).collect();
        for eps in [0.0, 0.05] {
            let trunc = sys.pressure(lo, eps)?.truncation;
            let curve = PressureCurve::sample(&grid, trunc, |s| sys.pressure(s, eps).map(|p| p.value))?;
            let tag = format!("{}@eps={eps}", sys.name());
            let mut dec = Tally::at_most(&format!("decreasing:{tag}"), 0.0).with(Some(eps), Some(trunc));
            // largest increment between neighbouring samples; negative when decreasing
            let flattest = curve.samples.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::MIN, f64::max);
            dec.flag(curve.is_strictly_decreasing(), flattest);
            let mut cvx = Tally::at_most(&format!("convex:{tag}"), SLACK).with(Some(eps), Some(trunc));
            cvx.record((-curve.convexity_defect()).max(0.0));
            out.push(dec.done());
            out.push(cvx.done());
        }
    }
    Ok(out)
}
