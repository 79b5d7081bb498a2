//! Coefficients of s(eps) for the linear IFS by recursion, closed form, and root sweeps.

use bowen_lab::bowen::{
    closed_form_sk_ifs1, displayed_s1_ifs1, displayed_s2_ifs1, expansion_at_root, expansion_coeffs_numeric,
    OracleOptions, System,
};

fn main() -> bowen_lab::Result<()> {
    for a in [6.0, 10.0, 50.0] {
        let sys = System::linear_ifs1(a);
        let rec = expansion_at_root(&sys, 2)?;
        let num = expansion_coeffs_numeric(&sys, 2, &OracleOptions::default())?;
        println!("a = {a}");
        println!("  s0                 {:.15}", rec.s0);
        for k in 1..=2 {
            println!(
                "  s{k}  recursion {:+.15e}  closed form {:+.15e}  sweep {:+.15e} (+/- {:.1e})",
                rec.coeffs[k - 1],
                closed_form_sk_ifs1(k, a)?,
                num.coeffs[k - 1],
                num.uncertainties[k - 1]
            );
        }
        println!("  printed s1 {:+.15e}  printed s2 {:+.15e}", displayed_s1_ifs1(a), displayed_s2_ifs1(a));
    }

    let sys = System::linear_ifs2();
    let rec = expansion_at_root(&sys, 2)?;
    println!("{}: threshold p(2) = {:.6}, s1 = {:.12}, s2 = {:.12}", sys.name(), sys.threshold(2)?, rec.coeffs[0], rec.coeffs[1]);
    Ok(())
}
