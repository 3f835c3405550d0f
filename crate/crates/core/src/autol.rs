//! Label reliability estimation.
//!
//! Fits a nonnegative weight `ω_j` per label so that the diagonal-free
//! leave-one-out classification `H = rownorm(P̃ diag(ω) Y_L)` best reproduces
//! the observed labels. Labels that disagree with the rest of the graph end
//! up with small weights; the argmax of the final `H` is the corrected label.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loo::{
    loss_gradient, normalization_backward, remove_diagonal, surrogate_loss, weighted_numerator,
    LooMatrix, LossKind, DEFAULT_EPSILON,
};
use crate::matrix::{argmax, Mat};
use crate::optim::{minimize, project_nonnegative, Objective, DEFAULT_ITERS, DEFAULT_LR};

/// Default diffusion rate for reliability fitting.
pub const DEFAULT_ALPHA: f64 = 0.9;

/// Default distrust factor relative to the median weight.
pub const DEFAULT_DISTRUST_THRESHOLD: f64 = 0.1;

/// Leave-one-out loss as a function of the reliability weights.
#[derive(Debug, Clone)]
pub struct ReliabilityObjective<'a> {
    /// Zero-diagonal labeled propagation block.
    pub p_tilde: &'a Mat,
    pub y_l: &'a Mat,
    pub kind: LossKind,
    pub epsilon: f64,
}

impl<'a> ReliabilityObjective<'a> {
    pub fn new(p_tilde: &'a Mat, y_l: &'a Mat, kind: LossKind, epsilon: f64) -> Self {
        Self {
            p_tilde,
            y_l,
            kind,
            epsilon,
        }
    }

    fn forward(&self, omega: &[f64]) -> Result<(Mat, Mat)> {
        let numerator = weighted_numerator(self.p_tilde, Some(omega), self.y_l)?;
        let mut h = numerator.clone();
        for i in 0..h.rows() {
            let denom: f64 = numerator.row(i).iter().sum::<f64>() + self.epsilon;
            if denom == 0.0 {
                return Err(Error::ZeroRow { row: i });
            }
            for v in h.row_mut(i) {
                *v /= denom;
            }
        }
        Ok((numerator, h))
    }
}

impl Objective for ReliabilityObjective<'_> {
    fn value(&self, omega: &[f64]) -> Result<f64> {
        let (_, h) = self.forward(omega)?;
        surrogate_loss(&h, self.y_l, self.kind)
    }

    fn gradient(&self, omega: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(omega)?.1)
    }

    fn value_and_gradient(&self, omega: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (numerator, h) = self.forward(omega)?;
        let loss = surrogate_loss(&h, self.y_l, self.kind)?;
        let g_h = loss_gradient(&h, self.y_l, self.kind)?;
        let g_n = normalization_backward(&numerator, &h, self.epsilon, &g_h);
        // ∂N_ik/∂ω_j = P̃_ij Y_jk, so ∂loss/∂ω_j = Σ_k (P̃ᵀ G_N)_jk Y_jk.
        let back = self.p_tilde.transpose().matmul(&g_n)?;
        let grad = (0..omega.len())
            .map(|j| {
                back.row(j)
                    .iter()
                    .zip(self.y_l.row(j))
                    .map(|(a, y)| a * y)
                    .sum()
            })
            .collect();
        Ok((loss, grad))
    }
}

/// `LOSS(rownorm(P̃ diag(ω) Y_L), Y_L)`.
pub fn autol_objective(
    p_tilde: &Mat,
    omega: &[f64],
    y_l: &Mat,
    kind: LossKind,
    epsilon: f64,
) -> Result<f64> {
    ReliabilityObjective::new(p_tilde, y_l, kind, epsilon).value(omega)
}

/// Analytic gradient of [`autol_objective`] with respect to `ω`.
pub fn autol_gradient(
    p_tilde: &Mat,
    omega: &[f64],
    y_l: &Mat,
    kind: LossKind,
    epsilon: f64,
) -> Result<Vec<f64>> {
    ReliabilityObjective::new(p_tilde, y_l, kind, epsilon).gradient(omega)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutolConfig {
    pub kind: LossKind,
    pub iters: usize,
    pub lr: f64,
    pub epsilon: f64,
    /// Labels with `ω_i < threshold · median(ω)` are reported as distrusted.
    pub distrust_threshold: f64,
}

impl Default for AutolConfig {
    fn default() -> Self {
        Self {
            kind: LossKind::Xent,
            iters: DEFAULT_ITERS,
            lr: DEFAULT_LR,
            epsilon: DEFAULT_EPSILON,
            distrust_threshold: DEFAULT_DISTRUST_THRESHOLD,
        }
    }
}

/// Outcome of a reliability fit.
#[derive(Debug, Clone, PartialEq)]
pub struct AutolResult {
    pub omega: Vec<f64>,
    pub loss_trace: Vec<f64>,
    pub h_final: LooMatrix,
    /// Argmax class of each row of `h_final`.
    pub corrected_labels: Vec<usize>,
    /// Positions (into the labeled list) of distrusted labels, ascending.
    pub distrusted: Vec<usize>,
    /// Set when the final loss exceeds the initial loss.
    pub diverged: bool,
}

impl AutolResult {
    pub fn initial_loss(&self) -> f64 {
        self.loss_trace[0]
    }

    pub fn final_loss(&self) -> f64 {
        *self.loss_trace.last().expect("trace is never empty")
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    }
}

/// Fits `ω` from all-ones with projected Adam.
pub fn autol_run(p_ll: &Mat, y_l: &Mat, config: &AutolConfig) -> Result<AutolResult> {
    let l = p_ll.rows();
    if y_l.rows() != l {
        return Err(Error::DimensionMismatch {
            context: "autol label rows",
            expected: l,
            found: y_l.rows(),
        });
    }
    if !(config.lr >= 0.0) || !(config.distrust_threshold >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "learning rate ({}) and distrust threshold ({}) must be nonnegative",
            config.lr, config.distrust_threshold
        )));
    }
    let p_tilde = remove_diagonal(p_ll)?;
    let objective = ReliabilityObjective::new(&p_tilde, y_l, config.kind, config.epsilon);
    let fit = minimize(
        &objective,
        vec![1.0; l],
        config.iters,
        config.lr,
        Some(&project_nonnegative),
    )?;
    let omega = fit.theta;
    let (numerator, _) = objective.forward(&omega)?;
    let h_final = LooMatrix::from_numerator(&numerator, config.epsilon, None)?;
    let corrected_labels = (0..l).map(|i| argmax(h_final.h.row(i))).collect();
    let cut = config.distrust_threshold * median(&omega);
    let distrusted = (0..l).filter(|&i| omega[i] < cut).collect();
    let diverged = fit.trace.last() > fit.trace.first();
    Ok(AutolResult {
        omega,
        loss_trace: fit.trace,
        h_final,
        corrected_labels,
        distrusted,
        diverged,
    })
}

/// Full label matrix with labeled rows replaced by the corrected one-hot
/// labels and every other row zeroed.
pub fn apply_correction(result: &AutolResult, y_full: &Mat, labeled: &[usize]) -> Result<Mat> {
    if labeled.len() != result.corrected_labels.len() {
        return Err(Error::DimensionMismatch {
            context: "apply_correction labeled count",
            expected: result.corrected_labels.len(),
            found: labeled.len(),
        });
    }
    let c = y_full.cols();
    let mut y = Mat::zeros(y_full.rows(), c);
    for (&i, &class) in labeled.iter().zip(&result.corrected_labels) {
        if i >= y.rows() {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: y.rows(),
            });
        }
        if class >= c {
            return Err(Error::IndexOutOfRange { index: class, len: c });
        }
        y[(i, class)] = 1.0;
    }
    Ok(y)
}
