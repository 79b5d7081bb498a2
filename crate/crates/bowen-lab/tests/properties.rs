use bowen_lab::binom_bound::solve_alpha;
use bowen_lab::bowen::{dimension, System};
use bowen_lab::graph_shift::DirectedMultigraph;
use bowen_lab::series_comb::{compositions, series_power, SeriesCoefficients};
use bowen_lab::transfer::{edge_matrix_from_values, rpf_triplet_of, vertex_reduce};
use proptest::prelude::*;

fn two_vertex() -> DirectedMultigraph {
    DirectedMultigraph::new(
        ["a", "b"],
        [("aa", "a", "a"), ("ab", "a", "b"), ("ba", "b", "a"), ("bb", "b", "b")],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rpf_triplet_normalization(w in prop::collection::vec(0.01f64..0.9, 4)) {
        let g = two_vertex();
        let t = rpf_triplet_of(&edge_matrix_from_values(&g, &w)).unwrap();
        prop_assert!((t.nu.sum() - 1.0).abs() < 1e-12);
        prop_assert!((t.nu.dot(&t.h) - 1.0).abs() < 1e-12);
        prop_assert!(t.h.iter().all(|x| *x > 0.0) && t.nu.iter().all(|x| *x > 0.0));
    }

    #[test]
    fn vertex_reduction_keeps_eigenvalue(w in prop::collection::vec(0.01f64..0.9, 4)) {
        let g = two_vertex();
        let edge = rpf_triplet_of(&edge_matrix_from_values(&g, &w)).unwrap().lambda;
        let vert = rpf_triplet_of(&vertex_reduce(&g, &w)).unwrap().lambda;
        prop_assert!((edge - vert).abs() < 1e-12 * edge);
    }

    #[test]
    fn edge_relabeling_keeps_pressure(w in prop::collection::vec(0.01f64..0.9, 4), seed in 0usize..24) {
        let g = two_vertex();
        let mut perm: Vec<usize> = (0..4).collect();
        let mut k = seed;
        for i in (1..4).rev() {
            perm.swap(i, k % (i + 1));
            k /= i + 1;
        }
        let g2 = g.permute_edges(&perm);
        let w2: Vec<f64> = perm.iter().map(|&i| w[i]).collect();
        let a = rpf_triplet_of(&edge_matrix_from_values(&g, &w)).unwrap().lambda;
        let b = rpf_triplet_of(&edge_matrix_from_values(&g2, &w2)).unwrap().lambda;
        prop_assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn pressure_decreases_in_s(s in 0.05f64..1.5, ds in 0.01f64..0.5, eps in 0.0f64..0.1) {
        let sys = System::linear_ifs1(10.0);
        let p1 = sys.pressure(s, eps).unwrap().value;
        let p2 = sys.pressure(s + ds, eps).unwrap().value;
        prop_assert!(p2 < p1);
    }

    #[test]
    fn finite_full_shift_root(w in prop::collection::vec(0.05f64..0.6, 2..6)) {
        let sys = System::finite_full_shift(&w);
        let s = dimension(&sys, 0.0).unwrap().s_star;
        let moran: f64 = w.iter().map(|x| x.powf(s)).sum();
        prop_assert!((moran - 1.0).abs() < 1e-11);
    }

    #[test]
    fn binomial_identity_residual(n in 1usize..5, s in 0.05f64..0.95, lx in -2.0f64..2.0, t in 0.01f64..1.0) {
        let x = 10f64.powf(lx);
        let c = solve_alpha(n, s, t * x, x).unwrap();
        prop_assert!((0.0..=1.0).contains(&c.alpha));
        prop_assert!(c.residual <= 1e-12);
    }

    #[test]
    fn series_power_matches_repeated_product(c in prop::collection::vec(-1.0f64..1.0, 3), k in 1usize..5) {
        let s = SeriesCoefficients::new(vec![1.0, c[0], c[1], c[2]]);
        let p = series_power(&s, k, 3);
        let mut acc = SeriesCoefficients::new(vec![1.0, 0.0, 0.0, 0.0]);
        for _ in 0..k {
            acc = acc.mul_trunc(&s, 3);
        }
        for i in 0..=3 {
            prop_assert!((p.coeffs[i] - acc.coeffs[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn composition_tuples_satisfy_constraints() {
    for k in 1..=8 {
        for l in 1..=k {
            for t in compositions(k, l).tuples {
                assert_eq!(t.iter().sum::<usize>(), l);
                assert_eq!(t.iter().enumerate().map(|(i, j)| (i + 1) * j).sum::<usize>(), k);
            }
        }
    }
}
