//! Continued-fraction transfer operators by Chebyshev collocation.

use bowen_lab::bowen::{dimension, System};
use bowen_lab::transfer::collocation::ChebyshevGrid;
use bowen_lab::transfer::{assemble_gauss_collocation, leading_eigenpair, CollocationOptions, PowerOptions};
use bowen_lab::weights::{ConformalMapFamily, DigitSet};

fn main() -> bowen_lab::Result<()> {
    let opts = CollocationOptions::default();
    let gauss = ConformalMapFamily::continued_fraction(DigitSet::From(1), 1.0);
    let op = assemble_gauss_collocation(&gauss, 1.0, 0.0, &opts)?;
    let pair = leading_eigenpair(&op.matrix, &PowerOptions::default())?;
    println!("Gauss map, s = 1: lambda = {:.15}", pair.value);
    let grid = ChebyshevGrid::new(opts.nodes);
    let worst = grid
        .nodes
        .iter()
        .zip(pair.vector.iter())
        .map(|(x, v)| (v - 1.0 / (1.0 + x)).abs())
        .fold(0.0, f64::max);
    println!("max |h(x) - 1/(1+x)| at nodes = {worst:.2e}");

    for digits in [DigitSet::Finite(vec![1, 2]), DigitSet::Finite((2..=20).collect())] {
        let sys = System::continued_fraction(digits, 1.0);
        for eps in [0.0, 0.02] {
            println!("{}  eps={eps}  dim = {:.12}", sys.name(), dimension(&sys, eps)?.s_star);
        }
    }
    Ok(())
}
