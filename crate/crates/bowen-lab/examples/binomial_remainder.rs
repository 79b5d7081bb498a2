//! The intermediate point of the binomial Taylor remainder against its lower bounds.

use bowen_lab::binom_bound::{bound_l, first_order_bound_corrected, solve_alpha, threshold_m};

fn main() -> bowen_lab::Result<()> {
    for n in 1..=4 {
        for s in [0.2, 0.5, 0.8] {
            let m = threshold_m(n, s);
            let c = solve_alpha(n, s, 0.5 * m, 1.0)?;
            println!(
                "n={n} s={s}  M={m:.4e}  L={:.4e}  alpha={:.6}  bound={:.6}  holds={}  residual={:.1e}",
                bound_l(n, s),
                c.alpha,
                c.bound,
                c.holds(),
                c.residual
            );
        }
    }
    let s = 0.2;
    let c = solve_alpha(1, s, 1e-12, 1.0)?;
    println!("n=1 s={s} a/x=1e-12: alpha={:.6} < L={:.6}", c.alpha, bound_l(1, s));
    println!("corrected first-order bound {:.6}", first_order_bound_corrected(s));
    Ok(())
}
