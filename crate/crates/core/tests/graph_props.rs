mod common;

use common::{jacobi_eigenvalues, random_points};
use gssl_core::graph::{
    build_affinity, heuristic_sigma, knn_neighbors, laplacians, smoothness, squared_distance,
};
use gssl_core::Mat;
use proptest::prelude::*;

fn brute_force_knn(x: &Mat, k: usize) -> Vec<Vec<usize>> {
    let n = x.rows();
    (0..n)
        .map(|i| {
            let mut d: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let s: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                    (s, j)
                })
                .collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            d.iter().take(k).map(|&(_, j)| j).collect()
        })
        .collect()
}

fn grid_points(n: usize, d: usize, seed: u64) -> Mat {
    // Integer coordinates force plenty of distance ties.
    let mut rng = common::Rng::new(seed);
    let data = (0..n * d).map(|_| rng.below(4) as f64).collect();
    Mat::from_vec(n, d, data).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn knn_matches_exhaustive_sort(n in 3usize..120, d in 1usize..4, k_frac in 0.0f64..1.0, seed: u64, ties: bool) {
        let x = if ties { grid_points(n, d, seed) } else { random_points(n, d, seed) };
        let k = 1 + ((n - 2) as f64 * k_frac) as usize;
        prop_assert_eq!(knn_neighbors(&x, k).unwrap(), brute_force_knn(&x, k));
    }

    #[test]
    fn affinity_invariants(n in 4usize..80, d in 1usize..4, k in 1usize..6, sigma in 0.2f64..5.0, seed: u64) {
        let x = random_points(n, d, seed);
        let k = k.min(n - 1);
        let nb = knn_neighbors(&x, k).unwrap();
        let g = build_affinity(&x, &nb, sigma).unwrap();
        let w = g.w.to_dense();
        for i in 0..n {
            prop_assert_eq!(w[(i, i)], 0.0);
            for j in 0..n {
                prop_assert!(w[(i, j)] >= 0.0);
                prop_assert_eq!(w[(i, j)], w[(j, i)]);
                let linked = nb[i].contains(&j) || nb[j].contains(&i);
                if linked {
                    let expect = (-squared_distance(x.row(i), x.row(j)) / (2.0 * sigma * sigma)).exp();
                    prop_assert!((w[(i, j)] - expect).abs() <= 1e-15);
                } else {
                    prop_assert_eq!(w[(i, j)], 0.0);
                }
            }
            prop_assert!(g.degree[i] > 0.0);
        }
        let lp = laplacians(&g).unwrap();
        for s in lp.combinatorial.row_sums() {
            prop_assert!(s.abs() < 1e-12);
        }
        prop_assert!(lp.normalized.is_symmetric());
        prop_assert!(lp.similarity.is_symmetric());
    }

    #[test]
    fn laplacian_spectrum_bounds(n in 3usize..40, k in 1usize..5, seed: u64) {
        let x = random_points(n, 2, seed);
        let k = k.min(n - 1);
        let g = build_affinity(&x, &knn_neighbors(&x, k).unwrap(), 1.0).unwrap();
        let lp = laplacians(&g).unwrap();
        let ln = jacobi_eigenvalues(&lp.normalized.to_dense());
        prop_assert!(ln[0].abs() < 1e-8, "smallest {}", ln[0]);
        prop_assert!(ln[n - 1] <= 2.0 + 1e-8, "largest {}", ln[n - 1]);
        let s = jacobi_eigenvalues(&lp.similarity.to_dense());
        prop_assert!(s[0] >= -1.0 - 1e-8 && s[n - 1] <= 1.0 + 1e-8);
        let lc = jacobi_eigenvalues(&lp.combinatorial.to_dense());
        prop_assert!(lc[0] > -1e-8);
    }

    #[test]
    fn smoothness_is_pairwise_sum(n in 3usize..50, c in 1usize..4, seed: u64) {
        let x = random_points(n, 2, seed);
        let g = build_affinity(&x, &knn_neighbors(&x, 2.min(n - 1)).unwrap(), 0.7).unwrap();
        let lp = laplacians(&g).unwrap();
        let f = random_points(n, c, seed.wrapping_add(1));
        let w = g.w.to_dense();
        let mut pairwise = 0.0;
        for col in 0..c {
            for i in 0..n {
                for j in 0..n {
                    let d = f[(i, col)] - f[(j, col)];
                    pairwise += w[(i, j)] * d * d;
                }
            }
        }
        pairwise *= 0.5 * 0.5;
        let q = smoothness(&lp.combinatorial, &f).unwrap();
        prop_assert!((q - pairwise).abs() <= 1e-10 * pairwise.abs().max(1.0), "{q} vs {pairwise}");
    }
}

#[test]
fn heuristic_sigma_matches_brute_force() {
    let x = random_points(60, 3, 9);
    let nb = brute_force_knn(&x, 10);
    let mean: f64 = (0..60)
        .map(|i| squared_distance(x.row(i), x.row(nb[i][9])).sqrt())
        .sum::<f64>()
        / 60.0;
    assert!((heuristic_sigma(&x, 10).unwrap() - mean / 3.0).abs() < 1e-12);
}
