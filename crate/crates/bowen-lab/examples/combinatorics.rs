//! Composition sums and series powers behind the expansion coefficients.

use bowen_lab::series_comb::{binom_real, compositions, g_kp, series_power, EdgeJet, SeriesCoefficients};

fn main() {
    for k in 1..=5 {
        let counts: Vec<usize> = (1..=k).map(|l| compositions(k, l).tuples.len()).collect();
        println!("k={k}: tuples per length {counts:?}");
    }
    let g = EdgeJet::new(0.2, vec![0.1, 0.01]);
    let p = 0.43;
    let direct: Vec<f64> = (0..=3).map(|k| g_kp(&g, p, k)).collect();
    println!("|g|^p coefficients {direct:?}");
    let pow = series_power(&SeriesCoefficients::new(vec![1.0, 0.5, 0.25]), 3, 4);
    println!("(1 + e/2 + e^2/4)^3 = {:?}", pow.coeffs);
    println!("binom(0.43, 3) = {:.15}", binom_real(p, 3));
}
