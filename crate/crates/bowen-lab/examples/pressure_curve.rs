//! Sample the pressure of a few systems on an `s` grid.

use bowen_lab::bowen::System;
use bowen_lab::cli::schema::finite_markov;

fn main() -> bowen_lab::Result<()> {
    let systems = [System::linear_ifs1(10.0), System::linear_ifs2(), finite_markov()];
    for sys in &systems {
        println!("{}  abscissa = {}", sys.name(), sys.abscissa()?);
        for i in 0..8 {
            let s = 0.1 + 0.15 * i as f64;
            for eps in [0.0, 0.05] {
                match sys.pressure(s, eps) {
                    Ok(p) => println!("  s={s:.2} eps={eps:.2}  P={:+.12}  trunc={}", p.value, p.truncation),
                    Err(e) => println!("  s={s:.2} eps={eps:.2}  {e}"),
                }
            }
        }
    }
    Ok(())
}
