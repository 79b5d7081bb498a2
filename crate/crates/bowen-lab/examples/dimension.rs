//! Bowen roots across the built-in systems.

use bowen_lab::bowen::dimension;
use bowen_lab::cli::schema::{registry, REGISTRY};

fn main() -> bowen_lab::Result<()> {
    println!("log 2 / log 5 = {:.15}", 2f64.ln() / 5f64.ln());
    for (name, _, _) in REGISTRY {
        let sys = registry(name, None).expect("registry entry");
        for eps in [0.0, 0.01, 0.05] {
            let sol = dimension(&sys, eps)?;
            println!(
                "{:<28} eps={eps:<5} s*={:.15}  residual={:.1e}  trunc={}",
                sys.name(),
                sol.s_star,
                sol.residual,
                sol.truncation
            );
        }
    }
    Ok(())
}
