#![allow(dead_code)]

use gssl_core::graph::{build_affinity, knn_neighbors, laplacians, AffinityGraph, LaplacianPair};
use gssl_core::{CsrMatrix, Mat};

/// Small deterministic generator for fixtures.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed ^ 0x5851_f42d_4c95_7f2d)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.uniform() * n as f64) as usize % n
    }
}

/// Random weighted graph: a ring (so nothing is isolated) plus edges drawn
/// with probability `density`.
pub fn random_graph(n: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut rng = Rng::new(seed);
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        if i != j {
            let v = 0.1 + rng.uniform();
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.uniform() < density {
                let v = 0.1 + rng.uniform();
                w[(i, j)] = v;
                w[(j, i)] = v;
            }
        }
    }
    CsrMatrix::from_dense(&w)
}

pub fn graph_from_w(w: CsrMatrix) -> AffinityGraph {
    let degree = w.row_sums();
    AffinityGraph {
        w,
        degree,
        sigma: 1.0,
        k: 0,
    }
}

pub fn random_laplacians(n: usize, density: f64, seed: u64) -> LaplacianPair {
    laplacians(&graph_from_w(random_graph(n, density, seed))).unwrap()
}

pub fn random_points(n: usize, d: usize, seed: u64) -> Mat {
    let mut rng = Rng::new(seed);
    let data = (0..n * d).map(|_| 4.0 * rng.uniform() - 2.0).collect();
    Mat::from_vec(n, d, data).unwrap()
}

pub fn knn_laplacians(x: &Mat, k: usize, sigma: f64) -> LaplacianPair {
    let nb = knn_neighbors(x, k).unwrap();
    laplacians(&build_affinity(x, &nb, sigma).unwrap()).unwrap()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn dense_inverse(a: &Mat) -> Mat {
    let n = a.rows();
    let mut m = a.clone();
    let mut inv = Mat::identity(n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| m[(r, col)].abs().total_cmp(&m[(s, col)].abs()))
            .unwrap();
        for j in 0..n {
            let (a1, a2) = (m[(col, j)], m[(piv, j)]);
            m.row_mut(col)[j] = a2;
            m.row_mut(piv)[j] = a1;
            let (b1, b2) = (inv[(col, j)], inv[(piv, j)]);
            inv.row_mut(col)[j] = b2;
            inv.row_mut(piv)[j] = b1;
        }
        let d = m[(col, col)];
        for j in 0..n {
            m.row_mut(col)[j] /= d;
            inv.row_mut(col)[j] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[(r, col)];
                if f != 0.0 {
                    for j in 0..n {
                        let mv = m[(col, j)];
                        let iv = inv[(col, j)];
                        m.row_mut(r)[j] -= f * mv;
                        inv.row_mut(r)[j] -= f * iv;
                    }
                }
            }
        }
    }
    inv
}

/// `β (I − αS)^{-1}` by explicit inversion.
pub fn propagation_oracle(s: &CsrMatrix, alpha: f64) -> Mat {
    let n = s.rows();
    let mut a = Mat::identity(n);
    for i in 0..n {
        for (j, v) in s.row(i) {
            a.row_mut(i)[j] -= alpha * v;
        }
    }
    let mut p = dense_inverse(&a);
    p.scale(1.0 - alpha);
    p
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
        }
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m.row_mut(k)[p] = c * mkp - s * mkq;
                    m.row_mut(k)[q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m.row_mut(p)[k] = c * mpk - s * mqk;
                    m.row_mut(q)[k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// One-hot labels cycling through the classes.
pub fn cyclic_labels(l: usize, c: usize, seed: u64) -> Mat {
    let mut rng = Rng::new(seed);
    let labels: Vec<Option<usize>> = (0..l)
        .map(|i| Some(if i < c { i } else { rng.below(c) }))
        .collect();
    Mat::one_hot(&labels, c).unwrap()
}

/// `l` distinct indices in `[0, n)`, ascending.
pub fn pick_labeled(n: usize, l: usize, seed: u64) -> Vec<usize> {
    let mut rng = Rng::new(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..l {
        let j = i + rng.below(n - i);
        idx.swap(i, j);
    }
    let mut out = idx[..l].to_vec();
    out.sort_unstable();
    out
}

/// Dense `H` through explicit inversion, the reference for the fast paths.
pub fn dense_loo(p_ll: &Mat, y_l: &Mat, remove_diag: bool, eps: f64) -> Mat {
    let l = p_ll.rows();
    let c = y_l.cols();
    let mut h = Mat::zeros(l, c);
    for i in 0..l {
        for j in 0..l {
            if remove_diag && i == j {
                continue;
            }
            for k in 0..c {
                h.row_mut(i)[k] += p_ll[(i, j)] * y_l[(j, k)];
            }
        }
        let s: f64 = h.row(i).iter().sum::<f64>() + eps;
        for v in h.row_mut(i) {
            *v /= s;
        }
    }
    h
}
