//! Remainder-order detection by log-log least squares.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RemainderModel {
    /// `C ε^γ`
    PurePower,
    /// `C ε^γ |log ε|`
    PowerLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderFit {
    pub exponent: f64,
    pub model: RemainderModel,
    /// Coefficient of determination of the selected fit.
    pub goodness: f64,
    /// Largest exponent change when refitting each half of the grid.
    pub uncertainty: f64,
    pub ssr_power: f64,
    pub ssr_power_log: f64,
}

const UNDERFLOW: f64 = 1e-13;

/// `count` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Slope, intercept and residual sum of squares.
fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    (slope, icpt, ssr)
}

/// Fit `log|r|` against `log ε`, choosing between pure power and power·log by residual.
pub fn remainder_order_fit(eps: &[f64], residuals: &[f64]) -> Result<OrderFit> {
    if eps.len() != residuals.len() || eps.len() < 6 {
        return Err(Error::Invalid("order fit needs at least 6 matching samples".into()));
    }
    if let Some(r) = residuals.iter().find(|r| !(r.abs() >= UNDERFLOW)) {
        return Err(Error::ResidualUnderflow(r.abs()));
    }
    if eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Invalid("order fit needs 0 < ε < 1".into()));
    }
    let x: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = residuals.iter().map(|r| r.abs().ln()).collect();
    let ylog: Vec<f64> = y.iter().zip(&x).map(|(y, x)| y - (-x).ln()).collect();
    let (p_pow, _, ssr_pow) = line_fit(&x, &y);
    let (p_log, _, ssr_log) = line_fit(&x, &ylog);
    let (model, exponent, yy, ssr) = if ssr_log < ssr_pow {
        (RemainderModel::PowerLog, p_log, &ylog, ssr_log)
    } else {
        (RemainderModel::PurePower, p_pow, &y, ssr_pow)
    };
    let my = yy.iter().sum::<f64>() / yy.len() as f64;
    let sst: f64 = yy.iter().map(|v| (v - my).powi(2)).sum();
    let half = x.len() / 2;
    let (a, _, _) = line_fit(&x[..half], &yy[..half]);
    let (b, _, _) = line_fit(&x[half..], &yy[half..]);
    Ok(OrderFit {
        exponent,
        model,
        goodness: if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 },
        uncertainty: (a - exponent).abs().max((b - exponent).abs()),
        ssr_power: ssr_pow,
        ssr_power_log: ssr_log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_power() {
        let g = log_grid(1e-5, 1e-1, 16);
        let r: Vec<f64> = g.iter().map(|e| 3.0 * e.powf(1.5)).collect();
        let f = remainder_order_fit(&g, &r).unwrap();
        assert!((f.exponent - 1.5).abs() < 0.01);
        assert_eq!(f.model, RemainderModel::PurePower);
    }

    #[test]
    fn synthetic_power_log() {
        let g = log_grid(1e-5, 1e-1, 16);
        let r: Vec<f64> = g.iter().map(|e| -0.7 * e * e.ln()).collect();
        let f = remainder_order_fit(&g, &r).unwrap();
        assert_eq!(f.model, RemainderModel::PowerLog);
        assert!((f.exponent - 1.0).abs() < 1e-12);
    }

    #[test]
    fn underflow() {
        let g = log_grid(1e-5, 1e-1, 12);
        let r: Vec<f64> = g.iter().map(|e| e.powi(4)).collect();
        assert!(matches!(remainder_order_fit(&g, &r), Err(Error::ResidualUnderflow(_))));
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-5, 1e-1, 16);
        assert!((g[0] - 1e-5).abs() < 1e-20 && (g[15] - 1e-1).abs() < 1e-16);
    }
}
