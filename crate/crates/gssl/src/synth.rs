//! Generated datasets for tests and demonstrations.

use gssl_core::graph::Dataset;
use gssl_core::Mat;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::stream;

/// `n` points split as evenly as possible over `c` isotropic Gaussians in
/// `d ≥ c` dimensions with unit variance. Center `k` lies on axis `k`, so
/// every pair of centers is `separation` apart.
pub fn gaussian_blobs(n: usize, c: usize, d: usize, separation: f64, seed: u64) -> Dataset {
    assert!(c >= 1 && d >= c, "need at least one dimension per center");
    let mut rng = stream(seed, 7);
    let centers: Vec<Vec<f64>> = (0..c)
        .map(|k| {
            let mut v = vec![0.0; d];
            v[k] = separation / std::f64::consts::SQRT_2;
            v
        })
        .collect();
    let mut x = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let k = i % c;
        labels.push(k);
        for &m in &centers[k] {
            let z: f64 = StandardNormal.sample(&mut rng);
            x.push(m + z);
        }
    }
    Dataset::new(Mat::from_vec(n, d, x).expect("shape"), Some(labels)).expect("finite blobs")
}

/// Two interleaved spirals with `per_class` points each.
pub fn two_spirals(per_class: usize, turns: f64, noise: f64, seed: u64) -> Dataset {
    let mut rng = stream(seed, 7);
    let mut x = Vec::with_capacity(4 * per_class);
    let mut labels = Vec::with_capacity(2 * per_class);
    for class in 0..2 {
        for i in 0..per_class {
            let t = 0.25 + (i as f64 / per_class as f64) * turns;
            let angle = 2.0 * std::f64::consts::PI * t + class as f64 * std::f64::consts::PI;
            let r = t;
            let nx: f64 = StandardNormal.sample(&mut rng);
            let ny: f64 = StandardNormal.sample(&mut rng);
            x.push(r * angle.cos() + noise * nx);
            x.push(r * angle.sin() + noise * ny);
            labels.push(class);
        }
    }
    Dataset::new(Mat::from_vec(2 * per_class, 2, x).expect("shape"), Some(labels))
        .expect("finite spirals")
}
