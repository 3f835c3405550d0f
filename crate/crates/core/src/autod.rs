//! Diffusion-rate selection by leave-one-out error.
//!
//! The rate is reparameterized as `α = 2^(−1/x)` for `x ≥ 1`. For every `x`
//! the labeled leave-one-out numerator is rebuilt from the stored spectral
//! basis in `O(plc)`:
//!
//! ```text
//! N = β U_L Λ̃ (U_Lᵀ Y_L) − β diag(Σ_k U_ik² λ̃_k) Y_L
//! ```
//!
//! where the second term (the self-influence) is dropped when the diagonal is
//! kept. Entries made negative by truncating the basis are clamped to zero
//! before row normalization.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::loo::{
    loo_accuracy, loss_gradient, normalization_backward, surrogate_loss, LooMatrix, LossKind,
};
use crate::matrix::Mat;
use crate::optim::{minimize, Objective};
use crate::spectral::{
    diagonal_with_count, product_with_count, restrict_to_labeled, transform_eigenvalues,
    LabeledBasis, SpectralBasis,
};

/// `α = 2^(−1/x)`.
pub fn x_to_alpha(x: f64) -> Result<f64> {
    if !(x >= 1.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "rate coordinate x must be finite and >= 1, got {x}"
        )));
    }
    Ok(libm::exp2(-1.0 / x))
}

/// `dα/dx = α ln 2 / x²`.
fn dalpha_dx(x: f64, alpha: f64) -> f64 {
    alpha * core::f64::consts::LN_2 / (x * x)
}

/// `x ∈ {1, 1.5, …, 20}`.
pub fn default_grid() -> Vec<f64> {
    (0..39).map(|i| 1.0 + 0.5 * i as f64).collect()
}

/// Labeled-set leave-one-out evaluation from a spectral basis.
#[derive(Debug, Clone, Copy)]
pub struct SpectralLoo<'a> {
    pub basis: &'a LabeledBasis,
    pub y_l: &'a Mat,
    pub remove_diag: bool,
    pub epsilon: f64,
}

/// Numerator before clamping and its derivative in `α`.
struct RawNumerator {
    value: Mat,
    d_alpha: Option<Mat>,
}

impl<'a> SpectralLoo<'a> {
    pub fn new(basis: &'a LabeledBasis, y_l: &'a Mat, remove_diag: bool, epsilon: f64) -> Result<Self> {
        if y_l.rows() != basis.l() || y_l.cols() != basis.n_classes() {
            return Err(Error::DimensionMismatch {
                context: "spectral leave-one-out labels",
                expected: basis.l() * basis.n_classes(),
                found: y_l.rows() * y_l.cols(),
            });
        }
        Ok(Self {
            basis,
            y_l,
            remove_diag,
            epsilon,
        })
    }

    fn raw_numerator(&self, alpha: f64, with_derivative: bool, madds: &mut u64) -> Result<RawNumerator> {
        let t = transform_eigenvalues(&self.basis.lambda, alpha)?;
        let beta = t.beta();
        let mut value = product_with_count(self.basis, &t.values, beta, madds);
        if self.remove_diag {
            let diag = diagonal_with_count(self.basis, &t.values, beta, madds);
            subtract_self_influence(&mut value, &diag, self.y_l);
        }
        let d_alpha = if with_derivative {
            // dλ̃/dα = (1 − λ) λ̃².
            let dt: Vec<f64> = self
                .basis
                .lambda
                .iter()
                .zip(&t.values)
                .map(|(l, lt)| (1.0 - l) * lt * lt)
                .collect();
            let mut d = product_with_count(self.basis, &dt, beta, madds);
            if self.remove_diag {
                let dd = diagonal_with_count(self.basis, &dt, beta, madds);
                subtract_self_influence(&mut d, &dd, self.y_l);
            }
            // d(βA)/dα = −A + β dA/dα, with A = value / β.
            for (dv, v) in d.as_mut_slice().iter_mut().zip(value.as_slice()) {
                *dv -= v / beta;
            }
            Some(d)
        } else {
            None
        };
        Ok(RawNumerator { value, d_alpha })
    }

    /// Clamped numerator at `α`, counting multiply-adds.
    pub fn numerator(&self, alpha: f64, madds: &mut u64) -> Result<Mat> {
        let mut n = self.raw_numerator(alpha, false, madds)?.value;
        clamp_nonnegative(&mut n);
        Ok(n)
    }

    pub fn loo_matrix(&self, alpha: f64) -> Result<LooMatrix> {
        let n = self.numerator(alpha, &mut 0)?;
        LooMatrix::from_numerator(&n, self.epsilon, Some(alpha))
    }

    /// Every recorded quantity at grid coordinate `x`.
    pub fn evaluate_point(&self, x: f64) -> Result<AlphaPoint> {
        let alpha = x_to_alpha(x)?;
        let mut madds = 0;
        let n = self.numerator(alpha, &mut madds)?;
        let loo = LooMatrix::from_numerator(&n, self.epsilon, Some(alpha))?;
        Ok(AlphaPoint {
            x,
            alpha,
            mse: surrogate_loss(&loo.h, self.y_l, LossKind::Mse)?,
            xent: surrogate_loss(&loo.h, self.y_l, LossKind::Xent)?,
            mae: surrogate_loss(&loo.h, self.y_l, LossKind::Mae)?,
            labeled_acc: loo_accuracy(&loo.h, self.y_l)?,
            unlabeled_acc: None,
            madds,
        })
    }

    /// Loss and `d loss / dα`.
    pub fn loss_and_alpha_derivative(&self, alpha: f64, kind: LossKind) -> Result<(f64, f64)> {
        let raw = self.raw_numerator(alpha, true, &mut 0)?;
        let mut n = raw.value.clone();
        clamp_nonnegative(&mut n);
        let loo = LooMatrix::from_numerator(&n, self.epsilon, Some(alpha))?;
        let loss = surrogate_loss(&loo.h, self.y_l, kind)?;
        let g_h = loss_gradient(&loo.h, self.y_l, kind)?;
        let g_n = normalization_backward(&n, &loo.h, self.epsilon, &g_h);
        let d_alpha = raw.d_alpha.expect("derivative requested");
        let deriv = g_n
            .as_slice()
            .iter()
            .zip(d_alpha.as_slice())
            .zip(raw.value.as_slice())
            .filter(|(_, &v)| v > 0.0)
            .map(|((g, d), _)| g * d)
            .sum();
        Ok((loss, deriv))
    }
}

fn subtract_self_influence(numerator: &mut Mat, diag: &[f64], y_l: &Mat) {
    for (i, &d) in diag.iter().enumerate() {
        let yi = y_l.row(i);
        for (v, &y) in numerator.row_mut(i).iter_mut().zip(yi) {
            *v -= d * y;
        }
    }
}

fn clamp_nonnegative(m: &mut Mat) {
    for v in m.as_mut_slice() {
        if !(*v > 0.0) {
            *v = 0.0;
        }
    }
}

/// One grid point of a rate sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaPoint {
    pub x: f64,
    pub alpha: f64,
    pub mse: f64,
    pub xent: f64,
    pub mae: f64,
    pub labeled_acc: f64,
    pub unlabeled_acc: Option<f64>,
    /// Multiply-adds spent rebuilding the numerator at this point.
    pub madds: u64,
}

impl AlphaPoint {
    pub fn loss(&self, kind: LossKind) -> f64 {
        match kind {
            LossKind::Mse => self.mse,
            LossKind::Xent => self.xent,
            LossKind::Mae => self.mae,
        }
    }
}

/// Leave-one-out losses and accuracy across a grid of rates.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCurve {
    pub points: Vec<AlphaPoint>,
    pub remove_diag: bool,
}

/// Checks a sweep grid: nonempty, every `x ≥ 1`, strictly ascending.
pub fn validate_grid(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::InvalidParameter("rate grid is empty".into()));
    }
    for w in xs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidParameter(format!(
                "rate grid must be strictly ascending ({} then {})",
                w[0], w[1]
            )));
        }
    }
    x_to_alpha(xs[0]).map(|_| ())
}

/// Sweeps `xs` on an already restricted basis.
pub fn sweep_labeled(
    basis: &LabeledBasis,
    y_l: &Mat,
    xs: &[f64],
    remove_diag: bool,
    epsilon: f64,
) -> Result<AlphaCurve> {
    validate_grid(xs)?;
    let loo = SpectralLoo::new(basis, y_l, remove_diag, epsilon)?;
    let points = xs
        .iter()
        .map(|&x| loo.evaluate_point(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(AlphaCurve {
        points,
        remove_diag,
    })
}

/// Restricts `basis` to `labeled` and sweeps `xs`.
pub fn autod_sweep(
    basis: &SpectralBasis,
    labeled: &[usize],
    y_l: &Mat,
    xs: &[f64],
    remove_diag: bool,
    epsilon: f64,
) -> Result<AlphaCurve> {
    let lb = restrict_to_labeled(basis, labeled, y_l)?;
    sweep_labeled(&lb, y_l, xs, remove_diag, epsilon)
}

/// What a sweep is scored by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionCriterion {
    /// Highest labeled leave-one-out accuracy.
    LabeledAccuracy,
    /// Lowest surrogate loss.
    MinLoss(LossKind),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutodSelection {
    pub alpha: f64,
    pub x: f64,
    pub criterion: SelectionCriterion,
    /// Grid position, when selected from a sweep.
    pub index: Option<usize>,
}

/// Best point of `curve`; ties go to the smaller rate.
pub fn autod_select(curve: &AlphaCurve, criterion: SelectionCriterion) -> Result<AutodSelection> {
    let score = |p: &AlphaPoint| match criterion {
        SelectionCriterion::LabeledAccuracy => p.labeled_acc,
        SelectionCriterion::MinLoss(kind) => -p.loss(kind),
    };
    let mut best: Option<usize> = None;
    for (i, p) in curve.points.iter().enumerate() {
        match best {
            Some(b) if !(score(p) > score(&curve.points[b])) => {}
            _ => best = Some(i),
        }
    }
    let i = best.ok_or_else(|| Error::InvalidParameter("cannot select from an empty curve".into()))?;
    let p = &curve.points[i];
    Ok(AutodSelection {
        alpha: p.alpha,
        x: p.x,
        criterion,
        index: Some(i),
    })
}

/// Leave-one-out loss as a function of the one-element vector `[x]`.
#[derive(Debug, Clone, Copy)]
pub struct RateObjective<'a> {
    pub loo: SpectralLoo<'a>,
    pub kind: LossKind,
}

impl Objective for RateObjective<'_> {
    fn value(&self, theta: &[f64]) -> Result<f64> {
        let alpha = x_to_alpha(theta[0])?;
        let n = self.loo.numerator(alpha, &mut 0)?;
        let loo = LooMatrix::from_numerator(&n, self.loo.epsilon, Some(alpha))?;
        surrogate_loss(&loo.h, self.loo.y_l, self.kind)
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value_and_gradient(theta)?.1)
    }

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let x = theta[0];
        let alpha = x_to_alpha(x)?;
        let (loss, d_alpha) = self.loo.loss_and_alpha_derivative(alpha, self.kind)?;
        Ok((loss, vec![d_alpha * dalpha_dx(x, alpha)]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutodDescentConfig {
    pub kind: LossKind,
    pub x0: f64,
    pub iters: usize,
    pub lr: f64,
    pub remove_diag: bool,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutodDescent {
    pub selection: AutodSelection,
    pub loss_trace: Vec<f64>,
}

fn project_x(theta: &mut [f64]) {
    if !(theta[0] >= 1.0) {
        theta[0] = 1.0;
    }
}

/// Adam descent on `x`, kept at `x ≥ 1`.
pub fn autod_gradient(basis: &LabeledBasis, y_l: &Mat, config: &AutodDescentConfig) -> Result<AutodDescent> {
    x_to_alpha(config.x0)?;
    let loo = SpectralLoo::new(basis, y_l, config.remove_diag, config.epsilon)?;
    let objective = RateObjective {
        loo,
        kind: config.kind,
    };
    let fit = minimize(&objective, vec![config.x0], config.iters, config.lr, Some(&project_x))?;
    let x = fit.theta[0];
    Ok(AutodDescent {
        selection: AutodSelection {
            alpha: x_to_alpha(x)?,
            x,
            criterion: SelectionCriterion::MinLoss(config.kind),
            index: None,
        },
        loss_trace: fit.trace,
    })
}
