//! Dense factorizations and symmetric eigensolvers.
//!
//! * Cholesky solve for the SPD systems `(I − αS) F = βY`.
//! * Householder tridiagonalization followed by implicit QL (the classic
//!   EISPACK `tred2`/`tql2` pair) for dense symmetric eigenproblems.
//! * Lanczos with full reorthogonalization for the smallest eigenpairs of a
//!   large sparse operator.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::Mat;

/// Solves `A X = B` for symmetric positive definite `A`.
pub fn cholesky_solve(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "cholesky_solve (square)",
            expected: n,
            found: a.cols(),
        });
    }
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "cholesky_solve (rhs)",
            expected: n,
            found: b.rows(),
        });
    }

    // Lower factor, row-major.
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > f64::EPSILON * a[(j, j)].abs().max(1.0)) {
            return Err(Error::Singular {
                pivot: j,
                value: diag,
            });
        }
        let ljj = libm::sqrt(diag);
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                s -= ri[k] * rj[k];
            }
            l[(i, j)] = s / ljj;
        }
    }

    let c = b.cols();
    let mut x = b.clone();
    // Forward: L z = b.
    for i in 0..n {
        for k in 0..i {
            let lik = l[(i, k)];
            if lik != 0.0 {
                for col in 0..c {
                    let v = x[(k, col)];
                    x[(i, col)] -= lik * v;
                }
            }
        }
        let lii = l[(i, i)];
        for v in x.row_mut(i) {
            *v /= lii;
        }
    }
    // Backward: Lᵀ x = z.
    for i in (0..n).rev() {
        for k in i + 1..n {
            let lki = l[(k, i)];
            if lki != 0.0 {
                for col in 0..c {
                    let v = x[(k, col)];
                    x[(i, col)] -= lki * v;
                }
            }
        }
        let lii = l[(i, i)];
        for v in x.row_mut(i) {
            *v /= lii;
        }
    }
    Ok(x)
}

/// Ascending eigenvalues and the matching orthonormal eigenvectors.
///
/// `vectors` is `n × n` with eigenvector `k` stored in column `k`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

/// Full eigendecomposition of a dense symmetric matrix.
pub fn symmetric_eigen(a: &Mat) -> Result<SymmetricEigen> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "symmetric_eigen",
            expected: n,
            found: a.cols(),
        });
    }
    if n == 0 {
        return Ok(SymmetricEigen {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    // tql2 rotates pairs of eigenvector columns; work on rows for locality.
    let mut vt = v.transpose();
    tql2(&mut d, &mut e, &mut vt)?;
    Ok(SymmetricEigen {
        values: d,
        vectors: vt.transpose(),
    })
}

/// Eigenpairs of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off.len() == diag.len() - 1`).
///
/// The returned matrix holds eigenvector `k` in row `k`.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Mat)> {
    let n = diag.len();
    debug_assert!(n == 0 || off.len() + 1 == n);
    let mut d = diag.to_vec();
    // tql2 expects the sub-diagonal in e[1..n].
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut rows = Mat::identity(n);
    tql2(&mut d, &mut e, &mut rows)?;
    Ok((d, rows))
}

/// Householder reduction to tridiagonal form (EISPACK `tred2`).
fn tred2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on a tridiagonal matrix (EISPACK `tql2`), sorted ascending.
///
/// `rows` holds the accumulated transform with eigenvector `k` in row `k`.
fn tql2(d: &mut [f64], e: &mut [f64], rows: &mut Mat) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_iter = 60 * n.max(1);
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let mut iterations = 0usize;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iter {
                    return Err(Error::EigenNotConverged {
                        max_residual: e[l].abs(),
                        residuals: vec![e[l].abs()],
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_rows(rows, i, c, s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Selection sort keeps the pairing with eigenvector rows.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d.swap(i, k);
            swap_rows(rows, i, k);
        }
    }
    Ok(())
}

#[inline]
fn rotate_rows(rows: &mut Mat, i: usize, c: f64, s: f64) {
    let n = rows.cols();
    let data = rows.as_mut_slice();
    let (lo, hi) = data.split_at_mut((i + 1) * n);
    let ri = &mut lo[i * n..];
    let ri1 = &mut hi[..n];
    for (a, b) in ri.iter_mut().zip(ri1.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

fn swap_rows(m: &mut Mat, i: usize, k: usize) {
    let n = m.cols();
    let (a, b) = (i.min(k), i.max(k));
    let data = m.as_mut_slice();
    let (lo, hi) = data.split_at_mut(b * n);
    lo[a * n..(a + 1) * n].swap_with_slice(&mut hi[..n]);
}

/// Settings for [`lanczos_smallest`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual threshold `‖A u − θ u‖₂` every returned pair must meet.
    pub tol: f64,
    /// Initial Krylov dimension; `None` picks `max(2p + 20, 60)`.
    pub initial_dim: Option<usize>,
    /// Largest Krylov dimension tried before giving up; `None` means `n`.
    pub max_dim: Option<usize>,
    /// Seed for the start vector.
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            initial_dim: None,
            max_dim: None,
            seed: 0x5eed_1a2c_20b5_0001,
        }
    }
}

/// The `p` smallest eigenpairs of the symmetric operator `apply` on `R^n`.
///
/// Runs Lanczos with full (twice-applied) Gram–Schmidt reorthogonalization.
/// When a Krylov space of dimension `m` does not yield `p` pairs under the
/// residual tolerance, it restarts from the same start vector with `2m`.
/// Invariant subspaces are continued with a fresh orthogonal start so that
/// repeated eigenvalues (disconnected graphs) are found.
///
/// Returns ascending eigenvalues and an `n × p` matrix of column eigenvectors.
pub fn lanczos_smallest<F>(
    n: usize,
    mut apply: F,
    p: usize,
    opts: &LanczosOptions,
) -> Result<(Vec<f64>, Mat)>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(alloc::format!(
            "eigenpair count {p} must be in 1..={n}"
        )));
    }
    let max_dim = opts.max_dim.unwrap_or(n).min(n).max(p);
    let mut dim = opts
        .initial_dim
        .unwrap_or_else(|| (2 * p + 20).max(60))
        .clamp(p, max_dim);

    loop {
        let (values, vectors, residuals) = lanczos_pass(n, &mut apply, p, dim, opts.seed);
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        if max_residual <= opts.tol {
            return Ok((values, vectors));
        }
        if dim >= max_dim {
            return Err(Error::EigenNotConverged {
                max_residual,
                residuals,
            });
        }
        dim = (dim * 2).min(max_dim);
    }
}

fn lanczos_pass<F>(n: usize, apply: &mut F, p: usize, dim: usize, seed: u64) -> (Vec<f64>, Mat, Vec<f64>)
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut rng = SplitMix64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(dim);
    let mut alphas = Vec::with_capacity(dim);
    let mut betas: Vec<f64> = Vec::with_capacity(dim);

    let mut q = random_unit(n, &mut rng, &basis);
    let mut w = vec![0.0; n];
    while basis.len() < dim {
        apply(&q, &mut w);
        let a = dot(&q, &w);
        basis.push(q);
        alphas.push(a);
        // Full reorthogonalization against every stored vector, twice.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        if basis.len() == dim {
            break;
        }
        let beta = norm(&w);
        let scale = alphas.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1.0);
        if beta <= 1e-12 * scale {
            // Invariant subspace: continue from a new direction.
            betas.push(0.0);
            q = random_unit(n, &mut rng, &basis);
        } else {
            betas.push(beta);
            q = w.iter().map(|v| v / beta).collect();
        }
    }

    let m = basis.len();
    let (theta, s_rows) =
        tridiagonal_eigen(&alphas, &betas[..m - 1]).expect("tridiagonal QL converges");
    let mut vectors = Mat::zeros(n, p);
    let mut residuals = Vec::with_capacity(p);
    let mut y = vec![0.0; n];
    let mut ay = vec![0.0; n];
    for k in 0..p {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, b) in basis.iter().enumerate() {
            axpy(s_rows[(k, j)], b, &mut y);
        }
        let nrm = norm(&y);
        y.iter_mut().for_each(|v| *v /= nrm);
        apply(&y, &mut ay);
        let mut r2 = 0.0;
        for i in 0..n {
            let d = ay[i] - theta[k] * y[i];
            r2 += d * d;
            vectors[(i, k)] = y[i];
        }
        residuals.push(libm::sqrt(r2));
    }
    (theta[..p].to_vec(), vectors, residuals)
}

fn random_unit(n: usize, rng: &mut SplitMix64, against: &[Vec<f64>]) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
        for _ in 0..2 {
            for b in against {
                let c = dot(b, &v);
                axpy(-c, b, &mut v);
            }
        }
        let nrm = norm(&v);
        if nrm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nrm);
            return v;
        }
    }
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn norm(v: &[f64]) -> f64 {
    libm::sqrt(dot(v, v))
}
