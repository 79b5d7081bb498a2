//! Perturbed depth-1 weight families `g(ε,e)`, `ψ(ε,e)` and continued-fraction maps.
//!
//! Edge arguments are 1-based ordinals into the (possibly countable) alphabet.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::series_comb::EdgeJet;

/// Per-edge coefficient rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Constant(f64),
    /// `scale · ratio^{-e}`
    Geometric { scale: f64, ratio: f64 },
    /// `scale · e^{-exponent}`
    Power { scale: f64, exponent: f64 },
    /// Values for ordinals `1..=len`; zero past the table.
    Table(Vec<f64>),
}

impl Profile {
    pub fn at(&self, e: usize) -> f64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Geometric { scale, ratio } => scale * ratio.powf(-(e as f64)),
            Profile::Power { scale, exponent } => scale * (e as f64).powf(-exponent),
            Profile::Table(v) => v.get(e - 1).copied().unwrap_or(0.0),
        }
    }

    /// `(ln|value|, sign)` without forming the value, so tiny weights do not underflow.
    pub fn ln_abs_at(&self, e: usize) -> (f64, f64) {
        let sgn = |x: f64| if x < 0.0 { -1.0 } else { 1.0 };
        match self {
            Profile::Constant(c) => (c.abs().ln(), sgn(*c)),
            Profile::Geometric { scale, ratio } => (scale.abs().ln() - e as f64 * ratio.ln(), sgn(*scale)),
            Profile::Power { scale, exponent } => (scale.abs().ln() - exponent * (e as f64).ln(), sgn(*scale)),
            Profile::Table(_) => {
                let v = self.at(e);
                (v.abs().ln(), sgn(v))
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Constant(c) => *c == 0.0,
            Profile::Geometric { scale, .. } | Profile::Power { scale, .. } => *scale == 0.0,
            Profile::Table(v) => v.iter().all(|x| *x == 0.0),
        }
    }
}

pub type RemainderHook = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    Finite(usize),
    Countable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    TabulatedDepth1,
    GeometricDepth1,
    Conformal1d,
}

/// `g(ε,e) = g(e) + Σ_k g_k(e) ε^k + g̃_n(ε,e) ε^n`.
#[derive(Clone)]
pub struct PerturbedWeightFamily {
    pub name: String,
    pub base: Profile,
    pub coeffs: Vec<Profile>,
    pub remainder: Option<RemainderHook>,
    pub alphabet: Alphabet,
    pub eps_max: f64,
}

impl fmt::Debug for PerturbedWeightFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbedWeightFamily")
            .field("name", &self.name)
            .field("base", &self.base)
            .field("coeffs", &self.coeffs)
            .field("remainder", &self.remainder.is_some())
            .field("alphabet", &self.alphabet)
            .field("eps_max", &self.eps_max)
            .finish()
    }
}

impl PerturbedWeightFamily {
    pub fn new(name: impl Into<String>, base: Profile, coeffs: Vec<Profile>, alphabet: Alphabet) -> Self {
        PerturbedWeightFamily {
            name: name.into(),
            base,
            coeffs,
            remainder: None,
            alphabet,
            eps_max: 1.0,
        }
    }

    pub fn with_remainder(mut self, hook: RemainderHook) -> Self {
        self.remainder = Some(hook);
        self
    }

    pub fn with_eps_max(mut self, eps_max: f64) -> Self {
        self.eps_max = eps_max;
        self
    }

    /// `1/5^e + ε/a^e` on the countable full shift.
    pub fn linear_ifs1(a: f64) -> Self {
        PerturbedWeightFamily::new(
            format!("linear_ifs1(a={a})"),
            Profile::Geometric { scale: 1.0, ratio: 5.0 },
            vec![Profile::Geometric { scale: 1.0, ratio: a }],
            Alphabet::Countable,
        )
    }

    /// `1/5^e + ε/4^e + ε²/3^e` on the countable full shift.
    pub fn linear_ifs2() -> Self {
        PerturbedWeightFamily::new(
            "linear_ifs2",
            Profile::Geometric { scale: 1.0, ratio: 5.0 },
            vec![
                Profile::Geometric { scale: 1.0, ratio: 4.0 },
                Profile::Geometric { scale: 1.0, ratio: 3.0 },
            ],
            Alphabet::Countable,
        )
    }

    pub fn kind(&self) -> FamilyKind {
        let geo = |p: &Profile| matches!(p, Profile::Geometric { .. });
        if geo(&self.base) && self.coeffs.iter().all(|c| geo(c) || c.is_zero()) {
            FamilyKind::GeometricDepth1
        } else {
            FamilyKind::TabulatedDepth1
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn base_value(&self, e: usize) -> f64 {
        self.base.at(e)
    }

    pub fn coeff_value(&self, k: usize, e: usize) -> f64 {
        if k == 0 {
            self.base.at(e)
        } else {
            self.coeffs.get(k - 1).map_or(0.0, |p| p.at(e))
        }
    }

    pub fn jet(&self, e: usize) -> EdgeJet {
        EdgeJet::new(self.base.at(e), self.coeffs.iter().map(|c| c.at(e)).collect())
    }

    /// `ln|g(e)|` and the ratios `g_k(e)/g(e)`, k = 1..n.
    pub fn scaled_jet(&self, e: usize) -> (f64, Vec<f64>) {
        let (lg, sg) = self.base.ln_abs_at(e);
        let ratios = self
            .coeffs
            .iter()
            .map(|c| {
                if c.is_zero() {
                    return 0.0;
                }
                let (lc, sc) = c.ln_abs_at(e);
                sc * sg * (lc - lg).exp()
            })
            .collect();
        (lg, ratios)
    }

    fn check_eps(&self, eps: f64) -> Result<()> {
        if !(0.0..=self.eps_max).contains(&eps) {
            return Err(Error::OutOfRangeEpsilon { eps, max: self.eps_max });
        }
        Ok(())
    }

    pub fn eval_weight(&self, e: usize, eps: f64) -> Result<f64> {
        self.check_eps(eps)?;
        let mut v = self.jet(e).eval(eps);
        if let Some(hook) = &self.remainder {
            v += hook(eps, e) * eps.powi(self.order() as i32);
        }
        Ok(v)
    }

    /// Number of edges available without truncation, if finite.
    pub fn alphabet_size(&self) -> Option<usize> {
        match self.alphabet {
            Alphabet::Finite(n) => Some(n),
            Alphabet::Countable => None,
        }
    }
}

/// `ψ(ε,e) = ψ(e) + Σ_k ψ_k(e) ε^k + ψ̃_n(ε,e) ε^n`; identically 1 by default.
#[derive(Clone)]
pub struct PsiFamily {
    pub base: Profile,
    pub coeffs: Vec<Profile>,
    pub remainder: Option<RemainderHook>,
}

impl fmt::Debug for PsiFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PsiFamily")
            .field("base", &self.base)
            .field("coeffs", &self.coeffs)
            .field("remainder", &self.remainder.is_some())
            .finish()
    }
}

impl Default for PsiFamily {
    fn default() -> Self {
        PsiFamily {
            base: Profile::Constant(1.0),
            coeffs: Vec::new(),
            remainder: None,
        }
    }
}

impl PsiFamily {
    pub fn new(base: Profile, coeffs: Vec<Profile>) -> Self {
        PsiFamily {
            base,
            coeffs,
            remainder: None,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.base == Profile::Constant(1.0)
            && self.coeffs.iter().all(Profile::is_zero)
            && self.remainder.is_none()
    }

    pub fn jet(&self, e: usize) -> EdgeJet {
        EdgeJet::new(self.base.at(e), self.coeffs.iter().map(|c| c.at(e)).collect())
    }

    pub fn eval(&self, e: usize, eps: f64) -> f64 {
        let mut v = self.jet(e).eval(eps);
        if let Some(hook) = &self.remainder {
            v += hook(eps, e) * eps.powi(self.coeffs.len() as i32);
        }
        v
    }
}

/// Estimate `Σ_{e>n} term(e)` by summing until terms are negligible and
/// closing with a geometric or power-law tail.
pub fn tail_sum<F: Fn(usize) -> f64>(term: F, n: usize) -> f64 {
    const CAP: usize = 1 << 22;
    let mut total = 0.0;
    let mut e = n + 1;
    let mut prev = term(e);
    total += prev;
    loop {
        e += 1;
        let t = term(e);
        if !t.is_finite() {
            return f64::INFINITY;
        }
        total += t;
        if t == 0.0 {
            return total;
        }
        let ratio = t / prev;
        if ratio < 0.9 && t < 1e-20 * total.max(1e-300) {
            return total + t * ratio / (1.0 - ratio);
        }
        if e >= n + 64 && (e & (e - 1)) == 0 || e >= CAP {
            // power-law closure from the log-log slope over the last doubling
            let half = term(e / 2);
            let beta = (half / t).ln() / 2f64.ln();
            if e >= CAP || (beta > 1.0 && t * e as f64 / (beta - 1.0) < 1e-20 * total) {
                if beta <= 1.0 {
                    return f64::INFINITY;
                }
                return total + t * e as f64 / (beta - 1.0);
            }
        }
        prev = t;
    }
}

/// Weighted tail `Σ_{e>n} |g(ε,e)|^s ψ(ε,e)` for a countable family; zero for a finite one.
pub fn weight_tail(fam: &PerturbedWeightFamily, psi: &PsiFamily, s: f64, eps: f64, n: usize) -> f64 {
    match fam.alphabet {
        Alphabet::Finite(m) if n >= m => 0.0,
        Alphabet::Finite(m) => (n + 1..=m)
            .map(|e| fam.eval_weight(e, eps).unwrap_or(f64::NAN).abs().powf(s) * psi.eval(e, eps))
            .sum(),
        Alphabet::Countable => tail_sum(
            |e| fam.eval_weight(e, eps).unwrap_or(f64::NAN).abs().powf(s) * psi.eval(e, eps),
            n,
        ),
    }
}

/// Smallest truncation whose tail at `s_min` is below `tol` (searched by doubling then bisection).
pub fn auto_truncation(
    fam: &PerturbedWeightFamily,
    psi: &PsiFamily,
    s_min: f64,
    eps: f64,
    tol: f64,
) -> Result<usize> {
    if let Some(m) = fam.alphabet_size() {
        return Ok(m);
    }
    let tail = |n| weight_tail(fam, psi, s_min, eps, n);
    let mut hi = 8usize;
    while tail(hi) >= tol {
        hi *= 2;
        if hi > 1 << 20 {
            return Err(Error::TailBoundExceeded {
                tail: tail(hi),
                tol,
                trunc: hi,
            });
        }
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if tail(mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    pub t: Vec<f64>,
    pub t_tilde: f64,
    /// Largest slope change across truncation levels (zero for closed forms).
    pub drift: f64,
    pub closed_form: bool,
}

fn geometric_ratio(p: &Profile) -> Option<f64> {
    match p {
        Profile::Geometric { ratio, .. } => Some(*ratio),
        Profile::Constant(_) => Some(1.0),
        _ => None,
    }
}

fn fitted_slope(num: impl Fn(usize) -> f64, den: impl Fn(usize) -> f64, lo: usize, hi: usize) -> f64 {
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter_map(|e| {
            let (y, x) = (num(e).abs(), den(e).abs());
            (y > 0.0 && x > 0.0).then(|| (x.ln(), y.ln()))
        })
        .collect();
    if pts.len() < 2 {
        return 1.0;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return 1.0;
    }
    sxy / sxx
}

/// Largest `t_k ≤ 1` with `sup_e |g_k(e)|/|g(e)|^{t_k} < ∞`, and the same for the remainder.
pub fn estimate_exponents(fam: &PerturbedWeightFamily, levels: &[usize]) -> Result<ExponentEstimate> {
    const DRIFT_TOL: f64 = 1e-2;
    if fam.alphabet_size().is_some() {
        return Ok(ExponentEstimate {
            t: vec![1.0; fam.order()],
            t_tilde: 1.0,
            drift: 0.0,
            closed_form: true,
        });
    }
    let fit = |num: &dyn Fn(usize) -> f64| -> Result<(f64, f64)> {
        let mut ts = Vec::new();
        for &n in levels {
            let n = n.max(4);
            ts.push(fitted_slope(num, |e| fam.base_value(e), n / 2, n).min(1.0));
        }
        let max = ts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
        let drift = max - min;
        if drift > DRIFT_TOL {
            return Err(Error::ExponentUnstable { drift });
        }
        Ok((*ts.last().unwrap_or(&1.0), drift))
    };

    let mut drift = 0.0f64;
    let mut closed_form = true;
    let mut t = Vec::new();
    for c in &fam.coeffs {
        if c.is_zero() {
            t.push(1.0);
            continue;
        }
        match (geometric_ratio(&fam.base), geometric_ratio(c)) {
            (Some(r0), Some(rk)) if r0 > 1.0 => t.push((rk.ln() / r0.ln()).min(1.0)),
            _ => {
                closed_form = false;
                let (tk, d) = fit(&|e| c.at(e))?;
                drift = drift.max(d);
                t.push(tk);
            }
        }
    }
    let t_tilde = match &fam.remainder {
        None => 1.0,
        Some(hook) => {
            closed_form = false;
            let hook = hook.clone();
            let eps = 1e-3f64.min(fam.eps_max);
            let (tt, d) = fit(&move |e| hook(eps, e))?;
            drift = drift.max(d);
            tt
        }
    };
    Ok(ExponentEstimate {
        t,
        t_tilde,
        drift,
        closed_form,
    })
}

/// `inf{p ≥ 0 : Σ_e |g(e)|^p ψ(e) < ∞}`.
pub fn abscissa_p(fam: &PerturbedWeightFamily, psi: &PsiFamily) -> Result<f64> {
    if fam.alphabet_size().is_some() {
        return Ok(0.0);
    }
    if let Profile::Geometric { ratio: r0, .. } = fam.base {
        if r0 > 1.0 {
            match &psi.base {
                Profile::Constant(_) | Profile::Power { .. } => return Ok(0.0),
                Profile::Geometric { ratio: q, .. } => return Ok((-q.ln() / r0.ln()).max(0.0)),
                Profile::Table(_) => {}
            }
        }
    }
    // decay exponents over doublings: |g(2N)|/|g(N)| ≈ 2^{-D_g}
    let rate = |f: &dyn Fn(usize) -> f64, n: usize| -(f(2 * n).abs() / f(n).abs()).ln() / 2f64.ln();
    let mut est = Vec::new();
    for n in [64usize, 256, 1024, 4096, 16384] {
        let dg = rate(&|e| fam.base_value(e), n);
        let dpsi = rate(&|e| psi.base.at(e), n);
        if !(dg > 0.0) || !dg.is_finite() || !dpsi.is_finite() {
            return Err(Error::AbscissaUndetermined(format!(
                "weights do not decay at truncation {n}"
            )));
        }
        est.push(((1.0 - dpsi) / dg).max(0.0));
    }
    let last = est[est.len() - 1];
    let prev = est[est.len() - 2];
    if last == 0.0 || last <= 0.5 * prev {
        // geometric-type decay drives the estimate to zero
        return Ok(0.0);
    }
    if (last - prev).abs() > 1e-3 * last.max(1e-3) {
        return Err(Error::AbscissaUndetermined(format!(
            "estimates {prev} and {last} across the last two truncations disagree"
        )));
    }
    Ok(last)
}

/// `p̲/t̃` for n = 0, else the max of `p̲ + n(1−t_k)/k`, `p̲/t_k`, `p̲ + 1 − t̃` and `p̲/t̃`.
///
/// `k` runs over `1..=n` and over every supplied exponent; missing ones count as 1.
pub fn threshold_p_n(n: usize, t: &[f64], t_tilde: f64, p_lower: f64) -> f64 {
    if n == 0 {
        return p_lower / t_tilde;
    }
    let mut best = (p_lower + 1.0 - t_tilde).max(p_lower / t_tilde);
    for k in 1..=n.max(t.len()) {
        let tk = t.get(k - 1).copied().unwrap_or(1.0);
        best = best
            .max(p_lower + n as f64 * (1.0 - tk) / k as f64)
            .max(p_lower / tk);
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionStatus {
    Pass,
    Fail,
    Vacuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionEntry {
    pub name: String,
    pub status: ConditionStatus,
    pub measured: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
    pub exponents: Option<ExponentEstimate>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.status != ConditionStatus::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

fn entry(name: &str, status: ConditionStatus, measured: Option<f64>, note: impl Into<String>) -> ConditionEntry {
    ConditionEntry {
        name: name.into(),
        status,
        measured,
        note: note.into(),
    }
}

/// Running supremum over truncations `n/4, n/2, n`; bounded when the last step grows by at most 1%.
fn running_sup(f: impl Fn(usize) -> f64, n: usize) -> (f64, bool) {
    let sup_to = |m: usize| (1..=m).map(&f).fold(0.0f64, f64::max);
    let (a, b) = (sup_to((n / 2).max(1)), sup_to(n));
    (b, b.is_finite() && b <= 1.01 * a.max(f64::MIN_POSITIVE))
}

pub fn check_conditions(fam: &PerturbedWeightFamily, psi: &PsiFamily, n: usize) -> ConditionReport {
    use ConditionStatus::*;
    let n = fam.alphabet_size().map_or(n, |m| m.min(n)).max(1);
    let mut entries = Vec::new();

    let sup_g = (1..=n).map(|e| fam.base_value(e).abs()).fold(0.0f64, f64::max);
    let nonzero = (1..=n).all(|e| fam.base_value(e) != 0.0);
    entries.push(entry(
        "g.2",
        if sup_g < 1.0 && nonzero { Pass } else { Fail },
        Some(sup_g),
        "sup |g| over the truncation",
    ));
    entries.push(entry("g.3", Vacuous, None, "depth-1 weights are constant on 1-cylinders"));

    let levels = [n / 4, n / 2, n].map(|m| m.max(4));
    let exps = estimate_exponents(fam, &levels);
    match &exps {
        Ok(est) => {
            for (k, tk) in est.t.iter().enumerate() {
                let name = format!("g.4[{}]", k + 1);
                if *tk <= 0.0 {
                    entries.push(entry(&name, Fail, Some(*tk), "no exponent in (0,1] bounds the ratio"));
                    continue;
                }
                let (sup, bounded) = running_sup(
                    |e| fam.coeff_value(k + 1, e).abs() / fam.base_value(e).abs().powf(*tk),
                    n,
                );
                entries.push(entry(
                    &name,
                    if bounded { Pass } else { Fail },
                    Some(sup),
                    format!("sup |g_k|/|g|^t with t = {tk}"),
                ));
            }
        }
        Err(err) => entries.push(entry("g.4", Fail, None, err.to_string())),
    }

    match &fam.remainder {
        None => entries.push(entry("g.5", Vacuous, None, "no remainder term")),
        Some(hook) => {
            let tt = exps.as_ref().map_or(1.0, |e| e.t_tilde);
            let grid = [1e-1, 1e-2, 1e-3, 1e-4];
            let c: Vec<f64> = grid
                .iter()
                .map(|&eps| {
                    (1..=n)
                        .map(|e| hook(eps, e).abs() / fam.base_value(e).abs().powf(tt))
                        .fold(0.0f64, f64::max)
                })
                .collect();
            let decreasing = c.windows(2).all(|w| w[1] <= w[0]);
            let rate = if c[0] > 0.0 && c[3] > 0.0 {
                (c[0] / c[3]).ln() / (grid[0] / grid[3]).ln()
            } else {
                f64::INFINITY
            };
            entries.push(entry(
                "g.5",
                if decreasing { Pass } else { Fail },
                Some(rate),
                "measured log-log decay rate of the remainder constant c(ε)",
            ));
        }
    }

    let min_psi = (1..=n).map(|e| psi.base.at(e)).fold(f64::INFINITY, f64::min);
    entries.push(entry(
        "psi.2",
        if min_psi > 0.0 { Pass } else { Fail },
        Some(min_psi),
        "min ψ over the truncation",
    ));
    entries.push(entry("psi.3", Vacuous, None, "depth-1 potentials are constant on 1-cylinders"));
    let mut psi_ok = true;
    let mut psi_sup = 0.0f64;
    for c in &psi.coeffs {
        let (sup, bounded) = running_sup(|e| c.at(e).abs() / psi.base.at(e), n);
        psi_ok &= bounded;
        psi_sup = psi_sup.max(sup);
    }
    entries.push(entry(
        "psi.4",
        if psi.coeffs.is_empty() {
            Vacuous
        } else if psi_ok {
            Pass
        } else {
            Fail
        },
        (!psi.coeffs.is_empty()).then_some(psi_sup),
        "sup |ψ_k|/ψ",
    ));
    ConditionReport {
        entries,
        exponents: exps.ok(),
    }
}

/// Digit set of a continued-fraction system.
#[derive(Debug, Clone, PartialEq)]
pub enum DigitSet {
    Finite(Vec<u64>),
    /// Every integer `≥ start`.
    From(u64),
}

/// Perturbed continued-fraction maps `T_e(ε,x) = 1/(e + x + aε)` on [0,1].
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMapFamily {
    pub digits: DigitSet,
    pub a: f64,
    pub eps_max: f64,
}

impl ConformalMapFamily {
    pub fn continued_fraction(digits: DigitSet, a: f64) -> Self {
        ConformalMapFamily {
            digits,
            a,
            eps_max: 1.0,
        }
    }

    pub fn kind(&self) -> FamilyKind {
        FamilyKind::Conformal1d
    }

    pub fn min_digit(&self) -> u64 {
        match &self.digits {
            DigitSet::Finite(v) => *v.iter().min().expect("digit set is nonempty"),
            DigitSet::From(s) => *s,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.digits, DigitSet::Finite(_))
    }

    pub fn map(&self, e: u64, eps: f64, x: f64) -> f64 {
        1.0 / (e as f64 + x + self.a * eps)
    }

    /// `|∂_x T_e(ε,x)| = (e + x + aε)^{-2}`
    pub fn derivative(&self, e: u64, eps: f64, x: f64) -> f64 {
        (e as f64 + x + self.a * eps).powi(-2)
    }

    /// `sup_e sup_x |∂_x T_e|` and the same for two-fold compositions.
    pub fn contraction_ratios(&self, eps: f64) -> (f64, f64) {
        let e = self.min_digit();
        let one = self.derivative(e, eps, 0.0);
        // |(T_e ∘ T_f)'(x)| is maximised at x = 0 for the smallest digits
        let inner = self.map(e, eps, 0.0);
        let two = self.derivative(e, eps, inner) * self.derivative(e, eps, 0.0);
        (one, two)
    }

    /// `inf{p ≥ 0 : Σ_e |T_e'|^p < ∞}`: 1/2 for infinite digit sets, 0 otherwise.
    pub fn abscissa(&self) -> f64 {
        if self.is_finite() {
            0.0
        } else {
            0.5
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ifs1_weight_and_zero_eps() {
        let f = PerturbedWeightFamily::linear_ifs1(10.0);
        let w = f.eval_weight(3, 0.2).unwrap();
        assert!((w - (5f64.powi(-3) + 0.2 * 10f64.powi(-3))).abs() < 1e-18);
        assert_eq!(f.eval_weight(3, 0.0).unwrap(), f.base_value(3));
    }

    #[test]
    fn ifs2_weight_at_first_edge() {
        let f = PerturbedWeightFamily::linear_ifs2();
        let w = f.eval_weight(1, 0.1).unwrap();
        assert!((w - (0.2 + 0.025 + 0.01 / 3.0)).abs() < 1e-16);
        assert!((w - 0.228_333_333_333_333_3).abs() < 1e-15);
    }

    #[test]
    fn eps_out_of_range() {
        let f = PerturbedWeightFamily::linear_ifs1(10.0).with_eps_max(0.5);
        assert!(matches!(f.eval_weight(1, 0.6), Err(Error::OutOfRangeEpsilon { .. })));
        assert!(matches!(f.eval_weight(1, -0.1), Err(Error::OutOfRangeEpsilon { .. })));
    }

    #[test]
    fn closed_form_exponents() {
        let est = estimate_exponents(&PerturbedWeightFamily::linear_ifs1(3.0), &[8, 16]).unwrap();
        assert!((est.t[0] - 3f64.ln() / 5f64.ln()).abs() < 1e-15);
        let est = estimate_exponents(&PerturbedWeightFamily::linear_ifs1(10.0), &[8, 16]).unwrap();
        assert_eq!(est.t[0], 1.0);
        let est = estimate_exponents(&PerturbedWeightFamily::linear_ifs2(), &[8, 16]).unwrap();
        assert!((est.t[0] - 4f64.ln() / 5f64.ln()).abs() < 1e-15);
        assert!((est.t[1] - 3f64.ln() / 5f64.ln()).abs() < 1e-15);
        assert_eq!(est.t_tilde, 1.0);
    }

    #[test]
    fn constant_coefficient_exponent_is_one() {
        let base = Profile::Power { scale: 0.5, exponent: 2.0 };
        let f = PerturbedWeightFamily::new("c", base.clone(), vec![base], Alphabet::Countable);
        let est = estimate_exponents(&f, &[64, 128, 256]).unwrap();
        assert!((est.t[0] - 1.0).abs() < 1e-12);
        assert!(!est.closed_form);
    }

    #[test]
    fn fitted_power_exponent() {
        let f = PerturbedWeightFamily::new(
            "p",
            Profile::Power { scale: 0.5, exponent: 2.0 },
            vec![Profile::Power { scale: 1.0, exponent: 1.5 }],
            Alphabet::Countable,
        );
        let est = estimate_exponents(&f, &[64, 128, 256]).unwrap();
        assert!((est.t[0] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn abscissa_examples() {
        let psi = PsiFamily::default();
        assert_eq!(abscissa_p(&PerturbedWeightFamily::linear_ifs1(10.0), &psi).unwrap(), 0.0);
        let harmonic = PerturbedWeightFamily::new(
            "h",
            Profile::Power { scale: 1.0, exponent: 2.0 },
            vec![],
            Alphabet::Countable,
        );
        assert!((abscissa_p(&harmonic, &psi).unwrap() - 0.5).abs() < 1e-9);
        let finite = PerturbedWeightFamily::new(
            "f",
            Profile::Table(vec![0.3, 0.4]),
            vec![],
            Alphabet::Finite(2),
        );
        assert_eq!(abscissa_p(&finite, &psi).unwrap(), 0.0);
    }

    #[test]
    fn threshold_examples() {
        let t = [4f64.ln() / 5f64.ln(), 3f64.ln() / 5f64.ln()];
        let unit = (1.0 - 3f64.ln() / 5f64.ln()) / 2.0;
        for n in 1..6 {
            assert!((threshold_p_n(n, &t, 1.0, 0.0) - n as f64 * unit).abs() < 1e-15);
        }
        assert!((threshold_p_n(1, &t[..1], 1.0, 0.0) - (1.0 - t[0])).abs() < 1e-15);
        for n in 0..4 {
            assert_eq!(threshold_p_n(n, &[1.0], 1.0, 0.0), 0.0);
        }
        assert!((threshold_p_n(0, &[], 0.6, 0.3) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn conditions_ifs1_pass() {
        let r = check_conditions(&PerturbedWeightFamily::linear_ifs1(10.0), &PsiFamily::default(), 40);
        assert!(r.all_pass());
        assert_eq!(r.get("g.3").unwrap().status, ConditionStatus::Vacuous);
    }

    #[test]
    fn conditions_unbounded_coefficient_fails() {
        let f = PerturbedWeightFamily::new(
            "bad",
            Profile::Geometric { scale: 1.0, ratio: 2.0 },
            vec![Profile::Constant(1.0)],
            Alphabet::Countable,
        );
        let r = check_conditions(&f, &PsiFamily::default(), 40);
        assert_eq!(r.get("g.4[1]").unwrap().status, ConditionStatus::Fail);
    }

    #[test]
    fn tail_of_geometric_series() {
        let t = tail_sum(|e| 0.5f64.powi(e as i32), 10);
        assert!((t - 0.5f64.powi(10)).abs() < 1e-18);
        let t = tail_sum(|e| (e as f64).powi(-3), 100);
        // Σ_{e>100} e^{-3} ≈ 1/(2·100.5²)
        assert!((t - 4.950_249e-5).abs() < 1e-8);
    }

    #[test]
    fn auto_truncation_ifs1() {
        let f = PerturbedWeightFamily::linear_ifs1(10.0);
        let n = auto_truncation(&f, &PsiFamily::default(), 0.4, 0.0, 1e-14).unwrap();
        let tail = weight_tail(&f, &PsiFamily::default(), 0.4, 0.0, n);
        assert!(tail < 1e-14 && weight_tail(&f, &PsiFamily::default(), 0.4, 0.0, n - 1) >= 1e-14);
    }

    #[test]
    fn continued_fraction_contraction() {
        let cf = ConformalMapFamily::continued_fraction(DigitSet::Finite(vec![2, 3]), 1.0);
        let (one, two) = cf.contraction_ratios(0.0);
        assert!((one - 0.25).abs() < 1e-16 && two < one);
        let gauss = ConformalMapFamily::continued_fraction(DigitSet::From(1), 1.0);
        let (one, two) = gauss.contraction_ratios(0.0);
        assert_eq!(one, 1.0);
        assert!(two < 1.0);
        assert_eq!(gauss.abscissa(), 0.5);
    }
}
