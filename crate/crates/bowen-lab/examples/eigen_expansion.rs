//! Perturbation series of the leading eigenvalue of a polynomial matrix family.

use bowen_lab::eigen_perturb::{eigen_expansion, nu_expansion, OperatorFamily};
use bowen_lab::transfer::leading_eigenpair;
use bowen_lab::transfer::PowerOptions;
use nalgebra::{DMatrix, DVector};

fn main() -> bowen_lab::Result<()> {
    let base = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.3, 0.4, 0.2, 0.1, 0.3, 0.6]);
    let l1 = DMatrix::from_row_slice(3, 3, &[0.1, 0.0, 0.05, 0.0, 0.2, 0.0, 0.05, 0.0, 0.1]);
    let l2 = DMatrix::from_element(3, 3, 0.02);
    let fam = OperatorFamily::new(base.clone(), vec![l1.clone(), l2.clone()])?;
    let exp = eigen_expansion(&fam, 3)?;
    println!("lambda0 = {:.15}", exp.lambda0);
    for (k, c) in exp.lambda_coeffs.iter().enumerate() {
        println!("lambda{} = {c:+.15}", k + 1);
    }
    let nu = nu_expansion(&exp, &DVector::from_element(3, 1.0))?;
    println!("nu0 = {:.6}", nu.nu_coeffs[0]);
    println!("nu1 = {:.6}", nu.nu_coeffs[1]);

    for eps in [1e-1, 3e-2, 1e-2, 3e-3] {
        let m = &base + &l1 * eps + &l2 * (eps * eps);
        let exact = leading_eigenpair(&m, &PowerOptions::default())?.value;
        println!("eps={eps:.0e}  |lambda - series| = {:.3e}", (exact - exp.lambda_partial_sum(eps)).abs());
    }
    Ok(())
}
