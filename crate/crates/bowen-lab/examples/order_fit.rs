//! Fractional remainder order of the truncated expansion for 1 < a < 5.

use bowen_lab::bowen::{expansion_at_root, fractional_order_ifs1, log_grid, System};

fn main() -> bowen_lab::Result<()> {
    for (a, lo, drop) in [(3.0, 1e-5, 0), (4.0, 2e-4, 2), (2.5, 1e-5, 0)] {
        let expected = fractional_order_ifs1(a)?;
        let sys = System::linear_ifs1(a);
        let mut rep = expansion_at_root(&sys, expected.k)?;
        rep.attach_remainders(&sys, &log_grid(lo, 1e-1, 16))?;
        rep.fit_remainder(drop)?;
        println!(
            "a = {a}: order {} remainder, expected exponent {:.6}{}, fitted {:.6} ({:?})",
            expected.k,
            expected.exponent,
            if expected.boundary { " with log" } else { "" },
            rep.fitted_order.unwrap_or(f64::NAN),
            rep.fitted_model
        );
    }
    Ok(())
}
