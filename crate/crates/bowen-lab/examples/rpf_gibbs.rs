//! RPF triplet of a depth-1 potential on a two-vertex graph, and its Gibbs constant.

use bowen_lab::graph_shift::DirectedMultigraph;
use bowen_lab::transfer::{edge_matrix_from_values, gibbs_check, rpf_triplet_of, vertex_reduce};

fn main() -> bowen_lab::Result<()> {
    let graph = DirectedMultigraph::new(
        ["a", "b"],
        [("aa", "a", "a"), ("ab", "a", "b"), ("ba", "b", "a"), ("bb", "b", "b"), ("bb2", "b", "b")],
    )?;
    let w = [0.30, 0.40, 0.35, 0.20, 0.25];
    let edge = edge_matrix_from_values(&graph, &w);
    let t = rpf_triplet_of(&edge)?;
    println!("lambda = {:.15}   P = {:.15}", t.lambda, t.lambda.ln());
    println!("h  = {:.6}", t.h.transpose());
    println!("nu = {:.6}", t.nu.transpose());
    println!("nu(h) = {:.3e} off 1, residuals {:.1e} / {:.1e}", (t.nu.dot(&t.h) - 1.0).abs(), t.residual_right, t.residual_left);

    let vertex = vertex_reduce(&graph, &w);
    let tv = rpf_triplet_of(&vertex)?;
    println!("vertex-reduced lambda = {:.15}", tv.lambda);

    let logw: Vec<f64> = w.iter().map(|v| v.ln()).collect();
    for depth in 1..=6 {
        let b = gibbs_check(&t, &graph, &logw, depth)?;
        println!("depth {depth}: {} cylinders, ratios in [{:.6}, {:.6}], c = {:.6}", b.cylinders, b.c_min, b.c_max, b.constant());
    }
    Ok(())
}
