//! Leave-one-out classification of the labeled set.
//!
//! Removing the diagonal of `P_LL` drops each label's influence on its own
//! prediction, so `H = rownorm((P_LL − diag P_LL) Ω Y_L)` is the label set
//! classified as if each label had been held out.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::{argmax, Mat};

/// Default stabilization constant added to row sums.
pub const DEFAULT_EPSILON: f64 = 1e-9;

/// Probabilities below this are clamped before taking logs.
pub const XENT_CLAMP: f64 = 1e-15;

/// Surrogate loss family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    Mse,
    Xent,
    Mae,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Mse, LossKind::Xent, LossKind::Mae];

    pub fn as_str(&self) -> &'static str {
        match self {
            LossKind::Mse => "mse",
            LossKind::Xent => "xent",
            LossKind::Mae => "mae",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" => Ok(LossKind::Mse),
            "xent" | "cross-entropy" | "crossentropy" => Ok(LossKind::Xent),
            "mae" => Ok(LossKind::Mae),
            other => Err(Error::InvalidParameter(format!("unknown loss '{other}'"))),
        }
    }
}

/// `P̃ = P − diag(P)`.
pub fn remove_diagonal(p: &Mat) -> Result<Mat> {
    if p.rows() != p.cols() {
        return Err(Error::DimensionMismatch {
            context: "remove_diagonal (square)",
            expected: p.rows(),
            found: p.cols(),
        });
    }
    let mut out = p.clone();
    for i in 0..p.rows() {
        out[(i, i)] = 0.0;
    }
    Ok(out)
}

/// Row-normalized matrix together with the rows that summed to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RowNormalized {
    pub h: Mat,
    /// Rows whose sum was zero; they stay zero instead of summing to one.
    pub zero_rows: Vec<usize>,
}

/// Divides row `i` by `Σ_j M_ij + ε`. Entries must be nonnegative.
pub fn row_normalize(m: &Mat, epsilon: f64) -> Result<RowNormalized> {
    if !(epsilon >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be nonnegative, got {epsilon}"
        )));
    }
    let mut h = m.clone();
    let mut zero_rows = Vec::new();
    for i in 0..m.rows() {
        let row = h.row_mut(i);
        if let Some(j) = row.iter().position(|&v| !(v >= 0.0)) {
            return Err(Error::InvalidData(format!(
                "row {i}, column {j} is {} (must be nonnegative)",
                row[j]
            )));
        }
        let sum: f64 = row.iter().sum();
        if sum == 0.0 {
            if epsilon == 0.0 {
                return Err(Error::ZeroRow { row: i });
            }
            zero_rows.push(i);
        }
        let denom = sum + epsilon;
        for v in row.iter_mut() {
            *v /= denom;
        }
    }
    Ok(RowNormalized { h, zero_rows })
}

/// Leave-one-out classification of the labeled instances.
#[derive(Debug, Clone, PartialEq)]
pub struct LooMatrix {
    /// `l × c`.
    pub h: Mat,
    pub alpha: Option<f64>,
    pub normalized: bool,
    pub epsilon: f64,
    pub zero_rows: Vec<usize>,
}

impl LooMatrix {
    /// Normalizes a precomputed numerator.
    pub fn from_numerator(numerator: &Mat, epsilon: f64, alpha: Option<f64>) -> Result<Self> {
        let RowNormalized { h, zero_rows } = row_normalize(numerator, epsilon)?;
        Ok(Self {
            h,
            alpha,
            normalized: true,
            epsilon,
            zero_rows,
        })
    }
}

fn check_rows(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// Unnormalized `P̃ diag(ω) Y_L` where `p_tilde` already has a zero diagonal.
pub fn weighted_numerator(p_tilde: &Mat, omega: Option<&[f64]>, y_l: &Mat) -> Result<Mat> {
    let l = p_tilde.rows();
    check_rows("numerator (P̃ columns)", l, p_tilde.cols())?;
    check_rows("numerator (label rows)", l, y_l.rows())?;
    match omega {
        None => p_tilde.matmul(y_l),
        Some(w) => {
            check_rows("numerator (omega length)", l, w.len())?;
            let mut wy = y_l.clone();
            for (j, &wj) in w.iter().enumerate() {
                for v in wy.row_mut(j) {
                    *v *= wj;
                }
            }
            p_tilde.matmul(&wy)
        }
    }
}

/// `H = rownorm(P̃ Ω Y_L, ε)` from a labeled propagation block.
pub fn loo_matrix(p_ll: &Mat, y_l: &Mat, omega: Option<&[f64]>, epsilon: f64) -> Result<LooMatrix> {
    if let Some(w) = omega {
        if let Some(i) = w.iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "reliability weight {i} is {} (must be finite and nonnegative)",
                w[i]
            )));
        }
    }
    let numerator = weighted_numerator(&remove_diagonal(p_ll)?, omega, y_l)?;
    LooMatrix::from_numerator(&numerator, epsilon, None)
}

fn check_same_shape(h: &Mat, y: &Mat) -> Result<()> {
    if h.shape() != y.shape() {
        return Err(Error::DimensionMismatch {
            context: "loss inputs",
            expected: y.rows() * y.cols(),
            found: h.rows() * h.cols(),
        });
    }
    Ok(())
}

/// Mean-over-rows surrogate loss.
pub fn surrogate_loss(h: &Mat, y_l: &Mat, kind: LossKind) -> Result<f64> {
    check_same_shape(h, y_l)?;
    let l = h.rows().max(1) as f64;
    let pairs = h.as_slice().iter().zip(y_l.as_slice());
    let total: f64 = match kind {
        LossKind::Mse => pairs.map(|(a, b)| (a - b) * (a - b)).sum(),
        LossKind::Mae => pairs.map(|(a, b)| (a - b).abs()).sum(),
        LossKind::Xent => pairs
            .filter(|(_, &y)| y != 0.0)
            .map(|(&p, &y)| -y * libm::log(p.clamp(XENT_CLAMP, 1.0)))
            .sum(),
    };
    Ok(total / l)
}

/// `∂ loss / ∂ H`, matching [`surrogate_loss`].
pub fn loss_gradient(h: &Mat, y_l: &Mat, kind: LossKind) -> Result<Mat> {
    check_same_shape(h, y_l)?;
    let l = h.rows().max(1) as f64;
    let data = h
        .as_slice()
        .iter()
        .zip(y_l.as_slice())
        .map(|(&p, &y)| match kind {
            LossKind::Mse => 2.0 * (p - y) / l,
            LossKind::Mae => {
                let d = p - y;
                if d > 0.0 {
                    1.0 / l
                } else if d < 0.0 {
                    -1.0 / l
                } else {
                    0.0
                }
            }
            LossKind::Xent => {
                if y == 0.0 || !(p > XENT_CLAMP) || p > 1.0 {
                    0.0
                } else {
                    -y / (p * l)
                }
            }
        })
        .collect();
    Mat::from_vec(h.rows(), h.cols(), data)
}

/// Back-propagates `∂loss/∂H` through `H = N / (rowsum(N) + ε)`.
///
/// Returns `∂loss/∂N`.
pub fn normalization_backward(numerator: &Mat, h: &Mat, epsilon: f64, grad_h: &Mat) -> Mat {
    let mut out = Mat::zeros(h.rows(), h.cols());
    for i in 0..h.rows() {
        let denom: f64 = numerator.row(i).iter().sum::<f64>() + epsilon;
        let inner: f64 = grad_h
            .row(i)
            .iter()
            .zip(h.row(i))
            .map(|(g, p)| g * p)
            .sum();
        for (o, &g) in out.row_mut(i).iter_mut().zip(grad_h.row(i)) {
            *o = (g - inner) / denom;
        }
    }
    out
}

/// Fraction of rows whose argmax matches the label argmax (ties to the lower
/// class on both sides).
pub fn loo_accuracy(h: &Mat, y_l: &Mat) -> Result<f64> {
    check_same_shape(h, y_l)?;
    if h.rows() == 0 {
        return Ok(0.0);
    }
    let hits = (0..h.rows())
        .filter(|&i| argmax(h.row(i)) == argmax(y_l.row(i)))
        .count();
    Ok(hits as f64 / h.rows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn two_node_p() -> Mat {
        Mat::from_rows(&[[2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]]).unwrap()
    }

    #[test]
    fn remove_diagonal_examples() {
        let p = remove_diagonal(&two_node_p()).unwrap();
        assert_eq!(p, Mat::from_rows(&[[0.0, 1.0 / 3.0], [1.0 / 3.0, 0.0]]).unwrap());
        assert_eq!(remove_diagonal(&p).unwrap(), p);
        let d = Mat::from_rows(&[[4.0, 0.0], [0.0, 2.0]]).unwrap();
        assert_eq!(remove_diagonal(&d).unwrap(), Mat::zeros(2, 2));
        assert!(remove_diagonal(&Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn row_normalize_examples() {
        let m = Mat::from_rows(&[[1.0, 3.0]]).unwrap();
        assert_eq!(row_normalize(&m, 0.0).unwrap().h, Mat::from_rows(&[[0.25, 0.75]]).unwrap());

        let z = Mat::from_rows(&[[1.0, 1.0], [0.0, 0.0]]).unwrap();
        let out = row_normalize(&z, 1e-9).unwrap();
        assert_eq!(out.zero_rows, vec![1]);
        assert_eq!(out.h.row(1), &[0.0, 0.0]);
        assert_eq!(row_normalize(&z, 0.0).unwrap_err(), Error::ZeroRow { row: 1 });

        let p = Mat::from_rows(&[[0.2, 0.8], [0.5, 0.5]]).unwrap();
        assert!(row_normalize(&p, 0.0).unwrap().h.max_abs_diff(&p) < 1e-12);

        assert!(row_normalize(&Mat::from_rows(&[[-1.0, 2.0]]).unwrap(), 0.0).is_err());
    }

    #[test]
    fn loo_two_node() {
        let y = Mat::identity(2);
        let loo = loo_matrix(&two_node_p(), &y, None, 1e-9).unwrap();
        let anti = Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(loo.h.max_abs_diff(&anti) < 1e-8);
        assert_eq!(loo_accuracy(&loo.h, &y).unwrap(), 0.0);
    }

    #[test]
    fn loo_zero_and_scaled_omega() {
        let p = Mat::from_rows(&[[1.0, 0.3, 0.2], [0.3, 1.0, 0.4], [0.2, 0.4, 1.0]]).unwrap();
        let y = Mat::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        let zero = loo_matrix(&p, &y, Some(&[0.0; 3]), 1e-9).unwrap();
        assert_eq!(zero.h, Mat::zeros(3, 2));
        let ones = loo_matrix(&p, &y, Some(&[1.0; 3]), 0.0).unwrap();
        let none = loo_matrix(&p, &y, None, 0.0).unwrap();
        let scaled = loo_matrix(&p, &y, Some(&[3.5; 3]), 0.0).unwrap();
        assert_eq!(ones.h, none.h);
        assert!(scaled.h.max_abs_diff(&ones.h) < 1e-12);
        assert!(loo_matrix(&p, &y, Some(&[1.0, -1.0, 1.0]), 0.0).is_err());
    }

    #[test]
    fn losses_at_perfect_fit() {
        let y = Mat::identity(3);
        for kind in LossKind::ALL {
            assert_eq!(surrogate_loss(&y, &y, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn mse_antidiagonal() {
        let h = Mat::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(surrogate_loss(&h, &Mat::identity(2), LossKind::Mse).unwrap(), 2.0);
        assert_eq!(surrogate_loss(&h, &Mat::identity(2), LossKind::Mae).unwrap(), 2.0);
    }

    #[test]
    fn xent_uniform_predictor() {
        let h = Mat::from_rows(&[[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]]).unwrap();
        let y = Mat::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]]).unwrap();
        let v = surrogate_loss(&h, &y, LossKind::Xent).unwrap();
        assert!((v - libm::log(2.0)).abs() < 1e-15);
        // Clamped at zero probability.
        let h0 = Mat::from_rows(&[[0.0, 1.0]]).unwrap();
        let v0 = surrogate_loss(&h0, &Mat::from_rows(&[[1.0, 0.0]]).unwrap(), LossKind::Xent).unwrap();
        assert!((v0 + libm::log(XENT_CLAMP)).abs() < 1e-12);
    }

    #[test]
    fn loss_shape_mismatch() {
        assert!(surrogate_loss(&Mat::zeros(2, 2), &Mat::zeros(2, 3), LossKind::Mse).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let y = Mat::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(loo_accuracy(&y, &y).unwrap(), 1.0);
        // All-zero H predicts class 0 everywhere.
        assert_eq!(loo_accuracy(&Mat::zeros(4, 2), &y).unwrap(), 0.5);
    }

    #[test]
    fn loss_kind_parsing() {
        assert_eq!("XENT".parse::<LossKind>().unwrap(), LossKind::Xent);
        assert_eq!("mae".parse::<LossKind>().unwrap(), LossKind::Mae);
        assert!("hinge".parse::<LossKind>().is_err());
    }
}
