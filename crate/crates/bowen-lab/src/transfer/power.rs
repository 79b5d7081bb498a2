//! Power iteration for the leading eigenpair of a matrix with a positive
//! dominant eigenvalue.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Relative residual `‖Av − λv‖∞ / (λ‖v‖∞)` to stop at.
    pub tol: f64,
    /// Residual accepted once progress stalls.
    pub accept: f64,
    pub max_iter: usize,
    /// Iterations before switching to the shifted matrix `A + σI`.
    pub plain_iter: usize,
}

impl Default for PowerOptions {
    fn default() -> Self {
        PowerOptions {
            tol: 2e-15,
            accept: 1e-13,
            max_iter: 200_000,
            plain_iter: 2_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: f64,
    /// Normalized to unit max-norm with a positive largest entry.
    pub vector: DVector<f64>,
    pub iterations: usize,
    pub residual: f64,
}

fn normalize(v: &mut DVector<f64>) -> f64 {
    let (imax, _) = v
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
    let scale = v[imax];
    if scale != 0.0 {
        *v /= scale;
    }
    scale
}

fn iterate(a: &DMatrix<f64>, shift: f64, opts: &PowerOptions, budget: usize) -> (Eigenpair, bool) {
    let n = a.nrows();
    let mut v = DVector::from_element(n, 1.0);
    let mut w = DVector::zeros(n);
    let mut best = f64::INFINITY;
    let mut since_best = 0usize;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iters = 0;
    while iters < budget {
        iters += 1;
        a.mul_to(&v, &mut w);
        if shift != 0.0 {
            w.axpy(shift, &v, 1.0);
        }
        let (imax, _) = v
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc });
        lambda = w[imax] / v[imax];
        let mut r = 0.0f64;
        for i in 0..n {
            r = r.max((w[i] - lambda * v[i]).abs());
        }
        residual = r / (lambda.abs() * v.amax()).max(f64::MIN_POSITIVE);
        std::mem::swap(&mut v, &mut w);
        normalize(&mut v);
        if residual <= opts.tol {
            break;
        }
        if residual < best * 0.999 {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 200 && best <= opts.accept {
                break;
            }
        }
    }
    let ok = residual <= opts.accept || best <= opts.accept;
    (
        Eigenpair {
            value: lambda - shift,
            vector: v,
            iterations: iters,
            residual: residual.min(best),
        },
        ok,
    )
}

/// Leading eigenpair by power iteration; falls back to a shifted iteration when
/// the plain one oscillates (periodic irreducible matrices).
pub fn leading_eigenpair(a: &DMatrix<f64>, opts: &PowerOptions) -> Result<Eigenpair> {
    assert!(a.is_square(), "matrix must be square");
    if a.nrows() == 1 {
        return Ok(Eigenpair {
            value: a[(0, 0)],
            vector: DVector::from_element(1, 1.0),
            iterations: 0,
            residual: 0.0,
        });
    }
    let (pair, ok) = iterate(a, 0.0, opts, opts.plain_iter.min(opts.max_iter));
    if ok && pair.value > 0.0 {
        return Ok(pair);
    }
    let sigma = a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    let (pair2, ok2) = iterate(a, sigma, opts, opts.max_iter);
    if ok2 {
        return Ok(pair2);
    }
    Err(Error::PowerIterationStalled {
        iters: pair.iterations + pair2.iterations,
        spread: pair2.residual,
    })
}

/// Spectral radius estimate from the growth rate of `‖Bᵏx‖`.
pub fn growth_rate(b: &DMatrix<f64>, steps: usize) -> f64 {
    let n = b.nrows();
    let mut x = DVector::from_fn(n, |i, _| {
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        s / (i as f64 + 1.0).sqrt() + 0.1 * ((i * 7 + 3) % 11) as f64
    });
    let mut log_norm = 0.0;
    let burn = steps / 2;
    let mut log_at_burn = 0.0;
    for k in 1..=steps {
        x = b * x;
        let nrm = x.amax();
        if nrm == 0.0 || !nrm.is_finite() {
            return 0.0;
        }
        log_norm += nrm.ln();
        x /= nrm;
        if k == burn {
            log_at_burn = log_norm;
        }
    }
    ((log_norm - log_at_burn) / (steps - burn) as f64).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.5]));
        let p = leading_eigenpair(&a, &PowerOptions::default()).unwrap();
        assert!((p.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn periodic_two_cycle() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.12, 0.0]);
        let p = leading_eigenpair(&a, &PowerOptions::default()).unwrap();
        assert!((p.value - 0.036f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn growth_rate_of_diagonal() {
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, -0.25]));
        assert!((growth_rate(&b, 200) - 0.5).abs() < 1e-10);
    }
}
