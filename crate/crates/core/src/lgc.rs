//! Local and Global Consistency diffusion.
//!
//! The classifier is `F = β (I − αS)^{-1} Y` with `β = 1 − α`, reached by the
//! fixed point `F(t+1) = αS F(t) + βY` from `F(0) = Y`. A dense Cholesky
//! solve of the same system is kept as the reference for every iterative path.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;
use crate::matrix::{CsrMatrix, Mat};

/// Default size cap for the dense closed form.
pub const DEFAULT_DENSE_CAP: usize = 5000;

/// Iteration count used for every diffusion unless configured otherwise.
pub const DEFAULT_T_MAX: usize = 1000;

/// Diffusion rate and iteration budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    pub alpha: f64,
    pub t_max: usize,
    /// Stop early once successive iterates differ by less than this in
    /// max-norm. Off by default.
    pub early_exit: Option<f64>,
}

impl DiffusionParams {
    pub fn new(alpha: f64, t_max: usize) -> Result<Self> {
        check_alpha(alpha)?;
        if t_max == 0 {
            return Err(Error::InvalidParameter(
                "iteration cap t_max must be at least 1".into(),
            ));
        }
        Ok(Self {
            alpha,
            t_max,
            early_exit: None,
        })
    }

    pub fn with_early_exit(mut self, tol: f64) -> Self {
        self.early_exit = Some(tol);
        self
    }

    /// `1 − α`.
    pub fn beta(&self) -> f64 {
        1.0 - self.alpha
    }

    /// Label-fitting weight `μ = 1/α − 1`.
    pub fn mu(&self) -> f64 {
        1.0 / self.alpha - 1.0
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.alpha, self.t_max).map(|_| ())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "diffusion rate alpha must lie in (0, 1), got {alpha}"
        )));
    }
    Ok(())
}

fn check_square(s: &CsrMatrix, y_rows: usize) -> Result<()> {
    if s.rows() != s.cols() {
        return Err(Error::DimensionMismatch {
            context: "similarity matrix (square)",
            expected: s.rows(),
            found: s.cols(),
        });
    }
    if y_rows != s.rows() {
        return Err(Error::DimensionMismatch {
            context: "label matrix rows",
            expected: s.rows(),
            found: y_rows,
        });
    }
    Ok(())
}

/// Runs the fixed-point diffusion on every column of `y`.
pub fn lgc_iterate(s: &CsrMatrix, y: &Mat, params: &DiffusionParams) -> Result<Mat> {
    params.validate()?;
    check_square(s, y.rows())?;
    let (alpha, beta) = (params.alpha, params.beta());
    let c = y.cols();
    let mut f = y.clone();
    let mut next = Mat::zeros(y.rows(), c);
    for _ in 0..params.t_max {
        for i in 0..s.rows() {
            let out = next.row_mut(i);
            out.iter_mut().for_each(|v| *v = 0.0);
            for (j, w) in s.row(i) {
                for (o, &fj) in out.iter_mut().zip(f.row(j)) {
                    *o += w * fj;
                }
            }
            for (o, &yi) in out.iter_mut().zip(y.row(i)) {
                *o = alpha * *o + beta * yi;
            }
        }
        let delta = params.early_exit.map(|_| f.max_abs_diff(&next));
        core::mem::swap(&mut f, &mut next);
        if let (Some(tol), Some(delta)) = (params.early_exit, delta) {
            if delta < tol {
                break;
            }
        }
    }
    Ok(f)
}

/// Diffuses a single column; the scalar kernel matches [`lgc_iterate`].
pub fn diffuse_column(s: &CsrMatrix, y: &[f64], params: &DiffusionParams) -> Result<Vec<f64>> {
    params.validate()?;
    check_square(s, y.len())?;
    let (alpha, beta) = (params.alpha, params.beta());
    let mut f = y.to_vec();
    let mut next = vec![0.0; y.len()];
    for _ in 0..params.t_max {
        for (i, out) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, w) in s.row(i) {
                acc += w * f[j];
            }
            *out = alpha * acc + beta * y[i];
        }
        let delta = params.early_exit.map(|_| {
            f.iter()
                .zip(&next)
                .fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()))
        });
        core::mem::swap(&mut f, &mut next);
        if let (Some(tol), Some(delta)) = (params.early_exit, delta) {
            if delta < tol {
                break;
            }
        }
    }
    Ok(f)
}

/// Dense solve of `(I − αS) F = βY` with the default size cap.
pub fn lgc_closed_form(s: &CsrMatrix, y: &Mat, alpha: f64) -> Result<Mat> {
    lgc_closed_form_capped(s, y, alpha, DEFAULT_DENSE_CAP)
}

pub fn lgc_closed_form_capped(s: &CsrMatrix, y: &Mat, alpha: f64, cap: usize) -> Result<Mat> {
    check_alpha(alpha)?;
    check_square(s, y.rows())?;
    let n = s.rows();
    if n > cap {
        return Err(Error::InvalidParameter(format!(
            "dense closed form limited to n <= {cap}, got {n}"
        )));
    }
    let mut a = Mat::identity(n);
    for i in 0..n {
        for (j, w) in s.row(i) {
            a[(i, j)] -= alpha * w;
        }
    }
    let mut rhs = y.clone();
    rhs.scale(1.0 - alpha);
    cholesky_solve(&a, &rhs)
}

/// Dense `P = β (I − αS)^{-1}`, for oracles on small graphs.
pub fn propagation_matrix_dense(s: &CsrMatrix, alpha: f64) -> Result<Mat> {
    lgc_closed_form(s, &Mat::identity(s.rows()), alpha)
}

/// Checks labeled indices are nonempty, in range and distinct.
pub fn validate_labeled(labeled: &[usize], n: usize) -> Result<()> {
    if labeled.is_empty() {
        return Err(Error::InvalidParameter("labeled set is empty".into()));
    }
    let mut seen = vec![false; n];
    for &i in labeled {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        if seen[i] {
            return Err(Error::DuplicateIndex { index: i });
        }
        seen[i] = true;
    }
    Ok(())
}

/// Labeled block `P_LL` of the propagation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationSubmatrix {
    /// `l × l`, rows and columns ordered as the labeled index list.
    pub p_ll: Mat,
    pub alpha: f64,
    pub t_max: usize,
}

/// Column `col` of `P_LL`: diffuses the indicator of `labeled[col]` and reads
/// it back on the labeled rows.
pub fn propagation_column(
    s: &CsrMatrix,
    labeled: &[usize],
    col: usize,
    params: &DiffusionParams,
) -> Result<Vec<f64>> {
    let mut e = vec![0.0; s.rows()];
    e[labeled[col]] = 1.0;
    let f = diffuse_column(s, &e, params)?;
    Ok(labeled.iter().map(|&i| f[i]).collect())
}

/// Assembles `P_LL` from columns produced by [`propagation_column`].
pub fn assemble_submatrix(columns: Vec<Vec<f64>>, params: &DiffusionParams) -> PropagationSubmatrix {
    let l = columns.len();
    let mut p_ll = Mat::zeros(l, l);
    for (b, col) in columns.into_iter().enumerate() {
        for (a, v) in col.into_iter().enumerate() {
            p_ll[(a, b)] = v;
        }
    }
    PropagationSubmatrix {
        p_ll,
        alpha: params.alpha,
        t_max: params.t_max,
    }
}

/// `P_LL` by diffusing one indicator column per labeled vertex, never
/// materializing the `n × n` propagation matrix.
pub fn propagation_submatrix(
    s: &CsrMatrix,
    labeled: &[usize],
    params: &DiffusionParams,
) -> Result<PropagationSubmatrix> {
    params.validate()?;
    validate_labeled(labeled, s.rows())?;
    let columns = (0..labeled.len())
        .map(|b| propagation_column(s, labeled, b, params))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_submatrix(columns, params))
}

/// Row-wise argmax class, ties to the lower class.
pub fn predict(f: &Mat) -> Vec<usize> {
    (0..f.rows()).map(|i| f.row_argmax(i)).collect()
}
