//! Expansion of the leading eigenvalue and eigenfunctional of
//! `L(ε) = L + L₁ε + … + Lₙεⁿ + L̃ₙ(ε)εⁿ` in finite dimension.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::transfer::rpf_triplet_of;

pub type MatrixRemainder = Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone)]
pub struct OperatorFamily {
    pub base: DMatrix<f64>,
    /// `L₁..Lₙ`
    pub orders: Vec<DMatrix<f64>>,
    pub remainder: Option<MatrixRemainder>,
}

impl fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("base", &self.base)
            .field("orders", &self.orders)
            .field("remainder", &self.remainder.is_some())
            .finish()
    }
}

impl OperatorFamily {
    pub fn new(base: DMatrix<f64>, orders: Vec<DMatrix<f64>>) -> Result<Self> {
        if !base.is_square() || orders.iter().any(|m| m.shape() != base.shape()) {
            return Err(Error::Invalid("operator family matrices must share a square shape".into()));
        }
        Ok(OperatorFamily {
            base,
            orders,
            remainder: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    pub fn order(&self) -> usize {
        self.orders.len()
    }

    /// `L_k`, zero past the declared order.
    pub fn coeff(&self, k: usize) -> DMatrix<f64> {
        if k == 0 {
            self.base.clone()
        } else {
            self.orders
                .get(k - 1)
                .cloned()
                .unwrap_or_else(|| DMatrix::zeros(self.dim(), self.dim()))
        }
    }

    pub fn at(&self, eps: f64) -> DMatrix<f64> {
        let mut m = self.base.clone();
        let mut pow = 1.0;
        for l in &self.orders {
            pow *= eps;
            m += l * pow;
        }
        if let Some(r) = &self.remainder {
            m += r(eps) * pow;
        }
        m
    }
}

/// `S = (R − λI)^{-1}(I − P)` with `P = hνᵀ` and `R = L − λP`.
pub fn reduced_resolvent(
    l: &DMatrix<f64>,
    lambda: f64,
    h: &DVector<f64>,
    nu: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    let p = h * nu.transpose();
    let id = DMatrix::<f64>::identity(n, n);
    let shifted = l - &p * lambda - &id * lambda;
    let lu = shifted.clone().lu();
    let rhs = &id - &p;
    let mut s = lu.solve(&rhs).ok_or(Error::SingularShift)?;
    if !s.iter().all(|x| x.is_finite()) {
        return Err(Error::SingularShift);
    }
    // one step of iterative refinement when the residual is large
    let resid = &rhs - &shifted * &s;
    if resid.amax() > 1e-11 * s.amax().max(1.0) {
        if let Some(ds) = lu.solve(&resid) {
            s += ds;
        }
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct EigenExpansion {
    pub lambda0: f64,
    pub h: DVector<f64>,
    /// κ₀ = ν with `ν(h) = 1`.
    pub nu: DVector<f64>,
    /// `λ₁..λₙ`
    pub lambda_coeffs: Vec<f64>,
    /// `κ₁..κₙ` as row vectors.
    pub kappa_coeffs: Vec<RowDVector<f64>>,
    pub resolvent: DMatrix<f64>,
}

impl EigenExpansion {
    /// `κ_k` with `κ₀ = ν`.
    pub fn kappa(&self, k: usize) -> RowDVector<f64> {
        if k == 0 {
            self.nu.transpose()
        } else {
            self.kappa_coeffs[k - 1].clone()
        }
    }

    /// `λ + λ₁ε + … + λₙεⁿ`
    pub fn lambda_partial_sum(&self, eps: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.lambda_coeffs.iter().rev() {
            acc = (acc + c) * eps;
        }
        acc + self.lambda0
    }
}

/// Joint recursion for `λ_k = Σ_j κ_{k−j}(L_j h)` and `κ_k = Σ_j κ_{k−j}(λ_j I − L_j)S`.
pub fn eigen_expansion_with(
    fam: &OperatorFamily,
    n: usize,
    lambda: f64,
    h: &DVector<f64>,
    nu: &DVector<f64>,
) -> Result<EigenExpansion> {
    let dim = fam.dim();
    let s = reduced_resolvent(&fam.base, lambda, h, nu)?;
    let coeffs: Vec<DMatrix<f64>> = (1..=n).map(|j| fam.coeff(j)).collect();
    let lh: Vec<DVector<f64>> = coeffs.iter().map(|m| m * h).collect();
    let mut kappa: Vec<RowDVector<f64>> = vec![nu.transpose()];
    let mut lam = Vec::with_capacity(n);
    for k in 1..=n {
        let lk: f64 = (1..=k).map(|j| (&kappa[k - j] * &lh[j - 1])[(0, 0)]).sum();
        lam.push(lk);
        let mut row = RowDVector::zeros(dim);
        for j in 1..=k {
            let mut m = -&coeffs[j - 1];
            for i in 0..dim {
                m[(i, i)] += lam[j - 1];
            }
            row += &kappa[k - j] * m;
        }
        kappa.push(row * &s);
    }
    Ok(EigenExpansion {
        lambda0: lambda,
        h: h.clone(),
        nu: nu.clone(),
        lambda_coeffs: lam,
        kappa_coeffs: kappa.split_off(1),
        resolvent: s,
    })
}

/// [`eigen_expansion_with`] using the base operator's RPF triplet.
pub fn eigen_expansion(fam: &OperatorFamily, n: usize) -> Result<EigenExpansion> {
    let t = rpf_triplet_of(&fam.base)?;
    eigen_expansion_with(fam, n, t.lambda, &t.h, &t.nu)
}

#[derive(Debug, Clone)]
pub struct NuExpansion {
    /// `ν₀..νₙ` with `ν(ε,1) = 1`.
    pub nu_coeffs: Vec<RowDVector<f64>>,
    /// `b₀..bₙ`, coefficients of `1/κ(ε,1)`.
    pub b: Vec<f64>,
}

/// `ν_k = Σ_{i+j=k} b_j κ_i` with `b(ε) = 1/Σ_k κ_k(1)εᵏ`.
pub fn nu_expansion(exp: &EigenExpansion, one: &DVector<f64>) -> Result<NuExpansion> {
    let n = exp.kappa_coeffs.len();
    let c: Vec<f64> = (0..=n).map(|k| (exp.kappa(k) * one)[(0, 0)]).collect();
    if c[0].abs() < 1e-300 {
        return Err(Error::ZeroMassNormalization);
    }
    let mut b = vec![1.0 / c[0]];
    for j in 1..=n {
        let acc: f64 = (1..=j).map(|i| c[i] * b[j - i]).sum();
        b.push(-acc / c[0]);
    }
    let nu_coeffs = (0..=n)
        .map(|k| {
            let mut row = RowDVector::zeros(one.len());
            for j in 0..=k {
                row += exp.kappa(k - j) * b[j];
            }
            row
        })
        .collect();
    Ok(NuExpansion { nu_coeffs, b })
}

/// `b_j` from the multinomial display, for cross-checking [`nu_expansion`]:
/// `b_j = Σ_{l=1}^{j} (−1)^l / c₀^{l+1} Σ l!/(i₁!…i_j!) c₁^{i₁}…c_j^{i_j}`.
pub fn b_coeffs_multinomial(c: &[f64]) -> Vec<f64> {
    use crate::series_comb::compositions;
    let fact = |n: usize| (1..=n).fold(1.0, |a, k| a * k as f64);
    let mut b = vec![1.0 / c[0]];
    for j in 1..c.len() {
        let mut total = 0.0;
        for l in 1..=j {
            let mut inner = 0.0;
            for t in compositions(j, l).tuples {
                let mut term = fact(l);
                for (m, &i) in t.iter().enumerate() {
                    term *= c[m + 1].powi(i as i32) / fact(i);
                }
                inner += term;
            }
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * inner / c[0].powi(l as i32 + 1);
        }
        b.push(total);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_family() -> OperatorFamily {
        OperatorFamily::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0])),
            vec![DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])],
        )
        .unwrap()
    }

    #[test]
    fn diagonal_resolvent() {
        let l = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let e1 = DVector::from_vec(vec![1.0, 0.0]);
        let s = reduced_resolvent(&l, 2.0, &e1, &e1).unwrap();
        assert!((s - DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, -1.0]))).amax() < 1e-15);
    }

    #[test]
    fn scalar_resolvent_is_zero() {
        let one = DVector::from_element(1, 1.0);
        let s = reduced_resolvent(&DMatrix::from_element(1, 1, 3.0), 3.0, &one, &one).unwrap();
        assert_eq!(s[(0, 0)], 0.0);
    }

    #[test]
    fn scalar_family() {
        let fam = OperatorFamily::new(DMatrix::from_element(1, 1, 2.0), vec![DMatrix::from_element(1, 1, 3.0)]).unwrap();
        let exp = eigen_expansion(&fam, 1).unwrap();
        assert!((exp.lambda_coeffs[0] - 3.0).abs() < 1e-15);
        let nu = nu_expansion(&exp, &DVector::from_element(1, 1.0)).unwrap();
        assert!(nu.nu_coeffs[1].amax() < 1e-15);
    }

    #[test]
    fn symmetric_two_by_two() {
        let exp = eigen_expansion(&diag_family(), 2).unwrap();
        assert!(exp.lambda_coeffs[0].abs() < 1e-14);
        assert!((exp.lambda_coeffs[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn unperturbed_family_has_constant_functional() {
        let fam = OperatorFamily::new(
            DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.3, 0.4]),
            vec![DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)],
        )
        .unwrap();
        let exp = eigen_expansion(&fam, 2).unwrap();
        let nu = nu_expansion(&exp, &DVector::from_element(2, 1.0)).unwrap();
        assert!(nu.nu_coeffs[1].amax() == 0.0 && nu.nu_coeffs[2].amax() == 0.0);
    }

    #[test]
    fn multinomial_b_matches_reciprocal() {
        let c = [0.7, -0.3, 0.25, 0.1, -0.05];
        let b = b_coeffs_multinomial(&c);
        // product of series must be 1
        for k in 0..c.len() {
            let v: f64 = (0..=k).map(|i| c[i] * b[k - i]).sum();
            assert!((v - if k == 0 { 1.0 } else { 0.0 }).abs() < 1e-14);
        }
    }
}
