//! Staged recursion for `s₁..sₙ`.

use serde::Serialize;

use super::operators::{assemble_perturbation_operators, PerturbationOperatorSet};
use super::orderfit::{remainder_order_fit, RemainderModel};
use super::system::System;
use super::{dimension, dimension_sweep};
use crate::eigen_perturb::{eigen_expansion_with, nu_expansion};
use crate::error::{Error, Result};
use crate::transfer::rpf_triplet_of;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpansionMethod {
    Recursion,
    NumericOracle,
    ClosedForm,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    pub system: String,
    pub order: usize,
    pub s0: f64,
    /// `s₁..sₙ`
    pub coeffs: Vec<f64>,
    pub uncertainties: Vec<f64>,
    pub method: ExpansionMethod,
    /// `(ε, s(ε) − s0 − Σ s_k εᵏ)`
    pub remainder_samples: Vec<(f64, f64)>,
    pub fitted_order: Option<f64>,
    pub fitted_model: Option<RemainderModel>,
    pub threshold_pn: f64,
    pub admissible: bool,
    pub truncation: usize,
}

impl ExpansionReport {
    pub fn partial_sum(&self, eps: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| (acc + c) * eps) + self.s0
    }

    /// Solve the Bowen equation over `grid` and record remainders against the partial sum.
    pub fn attach_remainders(&mut self, system: &System, grid: &[f64]) -> Result<()> {
        let sols = dimension_sweep(system, grid)?;
        let mut samples: Vec<(f64, f64)> = grid
            .iter()
            .zip(&sols)
            .map(|(&e, sol)| (e, sol.s_star - self.partial_sum(e)))
            .collect();
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.remainder_samples = samples;
        Ok(())
    }

    /// Fit the remainder order, dropping the `drop_largest` largest-ε samples.
    pub fn fit_remainder(&mut self, drop_largest: usize) -> Result<()> {
        let keep = self.remainder_samples.len().saturating_sub(drop_largest);
        let (eps, res): (Vec<f64>, Vec<f64>) = self.remainder_samples[..keep].iter().copied().unzip();
        let fit = remainder_order_fit(&eps, &res)?;
        self.fitted_order = Some(fit.exponent);
        self.fitted_model = Some(fit.model);
        Ok(())
    }

    /// `|remainder| / ε^power` from the smallest ε upwards.
    pub fn scaled_remainders(&self, power: i32) -> Vec<(f64, f64)> {
        self.remainder_samples
            .iter()
            .map(|&(e, r)| (e, r.abs() / e.powi(power)))
            .collect()
    }
}

/// Staged coefficients from an operator set: at stage k the family through `L_{k−1}`
/// provides `ν₀..ν_{k−1}`, then `s_k = −[Σ ν_i(Z01 h) s_{k−i} + Σ ν_i(N_{k−i} h)] / ν(Z01 h)`.
///
/// Returns the coefficients and the denominator `ν(h log|g|)`.
pub fn staged_coefficients(ops: &PerturbationOperatorSet) -> Result<(Vec<f64>, f64)> {
    if ops.order == 0 {
        return Ok((vec![], f64::NAN));
    }
    let t = rpf_triplet_of(ops.z(0, 0))?;
    let z01h = ops.z(0, 1) * &t.h;
    let denom = t.nu.dot(&z01h);
    if (denom / t.lambda).abs() < 1e-10 {
        return Err(Error::DenominatorNearZero(denom / t.lambda));
    }
    let mut s: Vec<f64> = Vec::with_capacity(ops.order);
    for k in 1..=ops.order {
        let fam = ops.operator_family(&s);
        let exp = eigen_expansion_with(&fam, k - 1, t.lambda, &t.h, &t.nu)?;
        let nu = nu_expansion(&exp, &ops.one)?;
        let mut num = 0.0;
        for i in 1..k {
            num += (&nu.nu_coeffs[i] * &z01h)[(0, 0)] * s[k - i - 1];
        }
        for i in 0..k {
            num += (&nu.nu_coeffs[i] * (ops.n_u(k - i, &s) * &t.h))[(0, 0)];
        }
        let d0 = (&nu.nu_coeffs[0] * &z01h)[(0, 0)];
        s.push(-num / d0);
    }
    Ok((s, denom / t.lambda))
}

/// `s₁..sₙ` by the staged recursion at the unperturbed root `s0`.
pub fn expansion_coeffs_recursion(system: &System, s0: f64, n: usize) -> Result<ExpansionReport> {
    let p_n = system.threshold(n)?;
    let ops = assemble_perturbation_operators(system, s0, n)?;
    let (coeffs, denom) = staged_coefficients(&ops)?;
    let unc = coeffs
        .iter()
        .map(|c| (ops.tail_bound + 1e-13) * (1.0 + c.abs()) / denom.abs())
        .collect();
    Ok(ExpansionReport {
        system: system.name().to_string(),
        order: n,
        s0,
        coeffs,
        uncertainties: unc,
        method: ExpansionMethod::Recursion,
        remainder_samples: vec![],
        fitted_order: None,
        fitted_model: None,
        threshold_pn: p_n,
        admissible: true,
        truncation: ops.truncation,
    })
}

/// [`expansion_coeffs_recursion`] after solving for `s0`.
pub fn expansion_at_root(system: &System, n: usize) -> Result<ExpansionReport> {
    let s0 = dimension(system, 0.0)?.s_star;
    expansion_coeffs_recursion(system, s0, n)
}
