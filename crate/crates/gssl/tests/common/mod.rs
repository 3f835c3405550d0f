#![allow(dead_code)]

use gssl_core::{CsrMatrix, Mat};

/// Splitmix generator for fixtures, independent of the crate's sampler.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed ^ 0x2545_f491_4f6c_dd1d)
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

/// Ring plus random chords, weights in `[0.1, 1.1)`.
pub fn random_w(n: usize, density: f64, seed: u64) -> CsrMatrix {
    let mut rng = Rng::new(seed);
    let mut w = Mat::zeros(n, n);
    for i in 0..n {
        let j = (i + 1) % n;
        let v = 0.1 + rng.uniform();
        w[(i, j)] = v;
        w[(j, i)] = v;
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

/// `D^{-1/2} W D^{-1/2}` computed densely.
pub fn dense_similarity(w: &CsrMatrix) -> Mat {
    let wd = w.to_dense();
    let n = wd.rows();
    let d: Vec<f64> = (0..n).map(|i| wd.row(i).iter().sum()).collect();
    let mut s = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = wd[(i, j)] / (d[i] * d[j]).sqrt();
        }
    }
    s
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
            let t = m[(col, j)];
            m[(col, j)] = m[(piv, j)];
            m[(piv, j)] = t;
            let t = inv[(col, j)];
            inv[(col, j)] = inv[(piv, j)];
            inv[(piv, j)] = t;
        }
        let d = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= d;
            inv[(col, j)] /= d;
        }
        for r in 0..n {
            let f = m[(r, col)];
            if r != col && f != 0.0 {
                for j in 0..n {
                    m[(r, j)] -= f * m[(col, j)];
                    inv[(r, j)] -= f * inv[(col, j)];
                }
            }
        }
    }
    inv
}

/// `(1 − α) (I − αS)^{-1}`.
pub fn propagation_oracle(s: &Mat, alpha: f64) -> Mat {
    let n = s.rows();
    let mut a = Mat::identity(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= alpha * s[(i, j)];
        }
    }
    let mut p = dense_inverse(&a);
    p.scale(1.0 - alpha);
    p
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &Mat) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
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
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * kp - s * kq;
                    m[(k, q)] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * pk - s * qk;
                    m[(q, k)] = s * pk + c * qk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
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

/// One-hot rows; the first `c` rows cover every class.
pub fn random_onehot(l: usize, c: usize, seed: u64) -> Mat {
    let mut rng = Rng::new(seed);
    let mut y = Mat::zeros(l, c);
    for i in 0..l {
        let k = if i < c { i } else { rng.below(c) };
        y[(i, k)] = 1.0;
    }
    y
}

/// Row-normalized LOO matrix by explicit loops.
pub fn dense_loo(p_ll: &Mat, y_l: &Mat, remove_diag: bool, eps: f64) -> Mat {
    let (l, c) = (p_ll.rows(), y_l.cols());
    let mut h = Mat::zeros(l, c);
    for i in 0..l {
        for j in 0..l {
            if remove_diag && i == j {
                continue;
            }
            for k in 0..c {
                h[(i, k)] += p_ll[(i, j)] * y_l[(j, k)];
            }
        }
        let s: f64 = h.row(i).iter().sum::<f64>() + eps;
        for v in h.row_mut(i) {
            *v /= s;
        }
    }
    h
}

/// `[mse, xent, mae]`, each averaged over rows.
pub fn reference_losses(h: &Mat, y: &Mat) -> [f64; 3] {
    let l = h.rows() as f64;
    let (mut mse, mut xent, mut mae) = (0.0, 0.0, 0.0);
    for (a, b) in h.as_slice().iter().zip(y.as_slice()) {
        mse += (a - b) * (a - b);
        mae += (a - b).abs();
        if *b == 1.0 {
            xent -= a.max(1e-15).ln();
        }
    }
    [mse / l, xent / l, mae / l]
}

/// First-maximum argmax accuracy of `h` against one-hot `y`.
pub fn reference_accuracy(h: &Mat, y: &Mat) -> f64 {
    let first_max = |r: &[f64]| {
        let mut best = 0;
        for (j, &v) in r.iter().enumerate() {
            if v > r[best] {
                best = j;
            }
        }
        best
    };
    let hits = (0..h.rows())
        .filter(|&i| first_max(h.row(i)) == first_max(y.row(i)))
        .count();
    hits as f64 / h.rows() as f64
}

/// Central difference of a scalar function.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, theta: &[f64], h: f64) -> Vec<f64> {
    (0..theta.len())
        .map(|i| {
            let mut a = theta.to_vec();
            let mut b = theta.to_vec();
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

/// Max over coordinates of `|g − n| / max(1, |n|)`.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / n.abs().max(1.0))
        .fold(0.0, f64::max)
}
