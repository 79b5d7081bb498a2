//! Bowen-equation roots and their asymptotic expansion in ε.

mod ifs;
mod operators;
mod oracle;
mod orderfit;
mod recursion;
mod system;

pub use ifs::{
    closed_form_sk_ifs1, displayed_s1_ifs1, displayed_s2_ifs1, fractional_order_ifs1, FractionalOrder,
};
pub use operators::{assemble_perturbation_operators, PerturbationOperatorSet};
pub use oracle::{expansion_coeffs_numeric, richardson_coefficients, OracleOptions};
pub use orderfit::{log_grid, remainder_order_fit, OrderFit, RemainderModel};
pub use recursion::{
    expansion_at_root, expansion_coeffs_recursion, staged_coefficients, ExpansionMethod, ExpansionReport,
};
pub use system::{ContinuedFractionSystem, Depth1System, GraphSpec, PressureValue, System, TruncationPolicy};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BowenSolution {
    pub s_star: f64,
    pub p0: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// `|P(s*) − p0|`
    pub residual: f64,
    pub truncation: usize,
}

const RESIDUAL_TOL: f64 = 1e-12;
const EXPANSIONS: usize = 60;

/// Root of `P(s) = p0` by Illinois-modified regula falsi on an auto-expanded bracket.
pub fn solve_bowen(system: &System, eps: f64, p0: f64, hint: Option<(f64, f64)>) -> Result<BowenSolution> {
    let pl = system.abscissa()?;
    let f = |s: f64| system.pressure(s, eps).map(|p| p.value - p0);
    let (mut lo, mut hi) = match hint {
        Some((lo, hi)) => {
            if lo <= pl {
                return Err(Error::PressureInfinite(lo));
            }
            (lo, hi.max(lo + 1e-3))
        }
        None if pl.is_finite() => (pl + 0.5, pl + 1.5),
        None => (0.0, 1.0),
    };

    let mut steps = 0;
    let mut f_lo = loop {
        match f(lo) {
            Ok(v) if v > 0.0 => break v,
            Ok(_) | Err(Error::TailBoundExceeded { .. }) | Err(Error::PressureInfinite(_)) => {}
            Err(e) => return Err(e),
        }
        steps += 1;
        if steps > EXPANSIONS {
            return Err(Error::BracketNotFound(steps));
        }
        if pl.is_finite() {
            lo = pl + (lo - pl) / 2.0;
        } else {
            lo -= (hi - lo).max(1.0) * 2f64.powi(steps as i32);
        }
    };
    let mut f_hi = loop {
        let v = f(hi)?;
        if v < 0.0 {
            break v;
        }
        steps += 1;
        if steps > EXPANSIONS {
            return Err(Error::BracketNotFound(steps));
        }
        hi += (hi - lo).max(1.0) * 2f64.powi(steps as i32);
    };

    let bracket = (lo, hi);
    let mut iters = 0;
    let mut side = 0i8;
    let (mut best, mut f_best) = if f_lo.abs() < f_hi.abs() { (lo, f_lo) } else { (hi, f_hi) };
    while iters < 200 {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) || f_best == 0.0 {
            break;
        }
        iters += 1;
        let mut x = hi - f_hi * (hi - lo) / (f_hi - f_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x)?;
        if fx.abs() < f_best.abs() {
            best = x;
            f_best = fx;
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        // fall back to bisection when the bracket stops shrinking
        if hi - lo > 0.5 * width && iters % 4 == 0 {
            let m = 0.5 * (lo + hi);
            let fm = f(m)?;
            iters += 1;
            if fm.abs() < f_best.abs() {
                best = m;
                f_best = fm;
            }
            if fm > 0.0 {
                lo = m;
                f_lo = fm;
            } else {
                hi = m;
                f_hi = fm;
            }
            side = 0;
        }
    }
    let residual = f_best.abs();
    if residual > RESIDUAL_TOL {
        return Err(Error::Invalid(format!(
            "Bowen root residual {residual:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )));
    }
    let truncation = system.pressure(best, eps)?.truncation;
    Ok(BowenSolution {
        s_star: best,
        p0,
        bracket,
        iterations: iters,
        residual,
        truncation,
    })
}

/// Hausdorff dimension of the limit set at ε via Bowen's formula.
pub fn dimension(system: &System, eps: f64) -> Result<BowenSolution> {
    let pl = system.abscissa()?;
    let probes: Vec<f64> = if pl.is_finite() {
        [0.5, 0.25, 0.1, 0.05, 0.02, 0.01].iter().map(|d| pl + d).collect()
    } else {
        vec![0.0]
    };
    let mut found = None;
    for &s in &probes {
        match system.pressure(s, eps) {
            Ok(p) if p.value > 0.0 && p.value.is_finite() => {
                found = Some(s);
                break;
            }
            Ok(_) | Err(Error::TailBoundExceeded { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    let lo = found.ok_or_else(|| {
        Error::NotStronglyRegular(format!(
            "pressure is not positive at any probe in {:.3}..{:.3}",
            probes[probes.len() - 1],
            probes[0]
        ))
    })?;
    solve_bowen(system, eps, 0.0, Some((lo, lo + 1.0)))
}

/// Dimensions over an ε grid, computed in parallel and returned in grid order.
pub fn dimension_sweep(system: &System, grid: &[f64]) -> Result<Vec<BowenSolution>> {
    grid.par_iter().map(|&e| dimension(system, e)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::DigitSet;

    #[test]
    fn ifs1_unperturbed_dimension() {
        let sol = dimension(&System::linear_ifs1(10.0), 0.0).unwrap();
        assert!((sol.s_star - 2f64.ln() / 5f64.ln()).abs() < 1e-14);
        assert!(sol.residual <= 1e-12);
        assert!(sol.bracket.0 < sol.s_star && sol.s_star < sol.bracket.1);
    }

    #[test]
    fn two_equal_maps() {
        let w = 0.3f64;
        let sol = dimension(&System::finite_full_shift(&[w, w]), 0.0).unwrap();
        assert!((sol.s_star - 2f64.ln() / (1.0 / w).ln()).abs() < 1e-14);
    }

    #[test]
    fn single_map_is_not_regular() {
        let e = dimension(&System::finite_full_shift(&[0.3]), 0.0).unwrap_err();
        assert!(matches!(e, Error::NotStronglyRegular(_)));
    }

    #[test]
    fn pressure_level_other_than_zero() {
        let sys = System::finite_full_shift(&[0.5, 0.25]);
        let sol = solve_bowen(&sys, 0.0, 0.3, None).unwrap();
        let p = sys.pressure(sol.s_star, 0.0).unwrap().value;
        assert!((p - 0.3).abs() < 1e-13);
    }

    #[test]
    fn hint_below_abscissa() {
        let e = solve_bowen(&System::linear_ifs1(10.0), 0.0, 0.0, Some((0.0, 1.0))).unwrap_err();
        assert!(matches!(e, Error::PressureInfinite(_)));
    }

    #[test]
    fn two_digit_continued_fraction() {
        let sol = dimension(&System::continued_fraction(DigitSet::Finite(vec![1, 2]), 1.0), 0.0).unwrap();
        assert!((sol.s_star - 0.531_280_506).abs() < 1e-8);
    }

    #[test]
    fn continued_fraction_dimension_decreases() {
        let sys = System::continued_fraction(DigitSet::Finite((2..=20).collect()), 1.0);
        let d0 = dimension(&sys, 0.0).unwrap().s_star;
        let d1 = dimension(&sys, 0.01).unwrap().s_star;
        assert!(d1 < d0);
    }
}
