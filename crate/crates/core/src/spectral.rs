//! Spectral form of the propagation matrix.
//!
//! With `L_n = U Λ Uᵀ`, the propagation matrix is
//! `P = β U Λ̃ Uᵀ` where `Λ̃_kk = 1 / ((1 − α) + α Λ_kk)`. Restricting `U` to
//! labeled rows gives `P_LL Y_L = β U_L Λ̃ (U_Lᵀ Y_L)` and
//! `P_ii = β Σ_k U_ik² Λ̃_kk`, both `O(plc)` once `U_Lᵀ Y_L` is stored.
//! Truncating to the `p` smoothest eigenfunctions gives the approximate form.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lgc::{check_alpha, validate_labeled};
use crate::linalg::{lanczos_smallest, symmetric_eigen, LanczosOptions};
use crate::matrix::{CsrMatrix, Mat};

/// Largest `n` decomposed densely by [`eigenbasis`].
pub const DENSE_EIGEN_LIMIT: usize = 3000;

/// Default number of eigenfunctions kept.
pub const DEFAULT_P: usize = 300;

/// Tolerance used when checking eigenvalues lie in `[0, 2]`.
const SPECTRUM_SLACK: f64 = 1e-8;

/// The `p` smoothest eigenpairs of `L_n`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis {
    /// `n × p`, orthonormal columns.
    pub u: Mat,
    pub lambda: Vec<f64>,
}

impl SpectralBasis {
    pub fn n(&self) -> usize {
        self.u.rows()
    }

    pub fn p(&self) -> usize {
        self.lambda.len()
    }

    /// Keeps the first `p` pairs.
    pub fn truncate(&self, p: usize) -> SpectralBasis {
        let p = p.min(self.p());
        let n = self.n();
        let mut u = Mat::zeros(n, p);
        for i in 0..n {
            u.row_mut(i).copy_from_slice(&self.u.row(i)[..p]);
        }
        SpectralBasis {
            u,
            lambda: self.lambda[..p].to_vec(),
        }
    }

    /// `max |UᵀU − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let utu = self.u.transpose().matmul(&self.u).expect("square product");
        utu.max_abs_diff(&Mat::identity(self.p()))
    }

    /// `‖L u_k − λ_k u_k‖₂` per column.
    pub fn residual_norms(&self, ln: &CsrMatrix) -> Vec<f64> {
        let n = self.n();
        let mut lu = alloc::vec![0.0; n];
        (0..self.p())
            .map(|k| {
                let uk = self.u.column(k);
                ln.mul_vec(&uk, &mut lu);
                libm::sqrt(
                    lu.iter()
                        .zip(&uk)
                        .map(|(a, b)| {
                            let d = a - self.lambda[k] * b;
                            d * d
                        })
                        .sum(),
                )
            })
            .collect()
    }
}

/// Eigensolver selection for [`eigenbasis_with`].
#[derive(Debug, Clone, Copy)]
pub enum EigenSolver {
    /// Dense for `n ≤ DENSE_EIGEN_LIMIT`, Lanczos otherwise.
    Auto,
    Dense,
    Lanczos(LanczosOptions),
}

/// The `p` smallest eigenpairs of `L_n`.
pub fn eigenbasis(ln: &CsrMatrix, p: usize) -> Result<SpectralBasis> {
    eigenbasis_with(ln, p, EigenSolver::Auto)
}

pub fn eigenbasis_with(ln: &CsrMatrix, p: usize, solver: EigenSolver) -> Result<SpectralBasis> {
    let n = ln.rows();
    if ln.cols() != n {
        return Err(Error::DimensionMismatch {
            context: "eigenbasis (square)",
            expected: n,
            found: ln.cols(),
        });
    }
    if p == 0 || p > n {
        return Err(Error::InvalidParameter(format!(
            "eigenfunction count p = {p} must be in 1..={n}"
        )));
    }
    let solver = match solver {
        EigenSolver::Auto if n <= DENSE_EIGEN_LIMIT => EigenSolver::Dense,
        EigenSolver::Auto => EigenSolver::Lanczos(LanczosOptions::default()),
        other => other,
    };
    let (lambda, mut u) = match solver {
        EigenSolver::Dense => {
            let eig = symmetric_eigen(&ln.to_dense())?;
            let basis = SpectralBasis {
                u: eig.vectors,
                lambda: eig.values,
            }
            .truncate(p);
            (basis.lambda, basis.u)
        }
        EigenSolver::Lanczos(opts) => {
            lanczos_smallest(n, |x, y| ln.mul_vec(x, y), p, &opts)?
        }
        EigenSolver::Auto => unreachable!(),
    };
    fix_signs(&mut u);
    Ok(SpectralBasis { u, lambda })
}

/// Flips each column so its first component above `1e-10` in magnitude is
/// positive.
fn fix_signs(u: &mut Mat) {
    for k in 0..u.cols() {
        let first = (0..u.rows()).map(|i| u[(i, k)]).find(|v| v.abs() > 1e-10);
        if matches!(first, Some(v) if v < 0.0) {
            for i in 0..u.rows() {
                u[(i, k)] = -u[(i, k)];
            }
        }
    }
}

/// Eigenvalues of `(I − αS)^{-1}` paired with the eigenvalues of `L_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformedSpectrum {
    pub values: Vec<f64>,
    pub alpha: f64,
}

impl TransformedSpectrum {
    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }
}

/// `λ̃ = 1 / ((1 − α) + αλ)` elementwise.
pub fn transform_eigenvalues(lambda: &[f64], alpha: f64) -> Result<TransformedSpectrum> {
    check_alpha(alpha)?;
    if let Some(&bad) = lambda
        .iter()
        .find(|&&l| !(l >= -SPECTRUM_SLACK && l <= 2.0 + SPECTRUM_SLACK))
    {
        return Err(Error::InvalidData(format!(
            "normalized Laplacian eigenvalue {bad} outside [0, 2]"
        )));
    }
    Ok(TransformedSpectrum {
        values: lambda
            .iter()
            .map(|&l| 1.0 / ((1.0 - alpha) + alpha * l))
            .collect(),
        alpha,
    })
}

/// Basis rows of the labeled vertices and the stored product `U_Lᵀ Y_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBasis {
    /// `l × p`.
    pub u_l: Mat,
    /// `p × c`.
    pub c: Mat,
    /// Eigenvalues of `L_n` for the kept columns.
    pub lambda: Vec<f64>,
}

impl LabeledBasis {
    pub fn l(&self) -> usize {
        self.u_l.rows()
    }

    pub fn p(&self) -> usize {
        self.u_l.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.c.cols()
    }
}

pub fn restrict_to_labeled(
    basis: &SpectralBasis,
    labeled: &[usize],
    y_l: &Mat,
) -> Result<LabeledBasis> {
    validate_labeled(labeled, basis.n())?;
    if y_l.rows() != labeled.len() {
        return Err(Error::DimensionMismatch {
            context: "restrict_to_labeled label rows",
            expected: labeled.len(),
            found: y_l.rows(),
        });
    }
    let u_l = basis.u.select_rows(labeled);
    let c = u_l.transpose().matmul(y_l)?;
    Ok(LabeledBasis {
        u_l,
        c,
        lambda: basis.lambda.clone(),
    })
}

fn check_spectrum_len(lb: &LabeledBasis, t: &TransformedSpectrum) -> Result<()> {
    if t.values.len() != lb.p() {
        return Err(Error::DimensionMismatch {
            context: "transformed spectrum length",
            expected: lb.p(),
            found: t.values.len(),
        });
    }
    Ok(())
}

/// `P_LL · Y_L ≈ β U_L Λ̃ C`, an `l × c` matrix.
pub fn spectral_propagation_product(lb: &LabeledBasis, t: &TransformedSpectrum) -> Result<Mat> {
    check_spectrum_len(lb, t)?;
    Ok(product_with_count(lb, &t.values, t.beta(), &mut 0))
}

/// `β U_L diag(weights) C`, counting multiply-adds into `madds`.
pub(crate) fn product_with_count(lb: &LabeledBasis, weights: &[f64], beta: f64, madds: &mut u64) -> Mat {
    let (l, p, c) = (lb.l(), lb.p(), lb.n_classes());
    let mut out = Mat::zeros(l, c);
    for i in 0..l {
        let ui = lb.u_l.row(i);
        let oi = out.row_mut(i);
        for k in 0..p {
            let a = ui[k] * weights[k];
            for (o, &ck) in oi.iter_mut().zip(lb.c.row(k)) {
                *o += a * ck;
            }
        }
        for o in oi.iter_mut() {
            *o *= beta;
        }
    }
    *madds += (l * p * (c + 1)) as u64;
    out
}

/// `P_ii ≈ β Σ_k U_L[i,k]² λ̃_k` for each labeled row.
pub fn spectral_diagonal(lb: &LabeledBasis, t: &TransformedSpectrum) -> Result<Vec<f64>> {
    check_spectrum_len(lb, t)?;
    Ok(diagonal_with_count(lb, &t.values, t.beta(), &mut 0))
}

pub(crate) fn diagonal_with_count(
    lb: &LabeledBasis,
    weights: &[f64],
    beta: f64,
    madds: &mut u64,
) -> Vec<f64> {
    *madds += (lb.l() * lb.p() * 2) as u64;
    (0..lb.l())
        .map(|i| {
            beta * lb
                .u_l
                .row(i)
                .iter()
                .zip(weights)
                .map(|(u, w)| u * u * w)
                .sum::<f64>()
        })
        .collect()
}
