//! Adam, projected minimization and central-difference gradient checks.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Differentiable scalar objective.
pub trait Objective {
    fn value(&self, theta: &[f64]) -> Result<f64>;

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>>;

    fn value_and_gradient(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(theta)?, self.gradient(theta)?))
    }
}

/// Adapts a pair of closures into an [`Objective`].
pub struct FnObjective<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<F, G> Objective for FnObjective<F, G>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    fn value(&self, theta: &[f64]) -> Result<f64> {
        Ok((self.value)(theta))
    }

    fn gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        Ok((self.gradient)(theta))
    }
}

pub const DEFAULT_LR: f64 = 0.7;
pub const DEFAULT_ITERS: usize = 5000;

/// Bias-corrected Adam state.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub theta: Vec<f64>,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(theta: Vec<f64>, lr: f64) -> Self {
        let d = theta.len();
        Self {
            theta,
            m: vec![0.0; d],
            v: vec![0.0; d],
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    /// One update with gradient `grad`.
    pub fn step(&mut self, grad: &[f64]) -> Result<()> {
        if grad.len() != self.theta.len() {
            return Err(Error::DimensionMismatch {
                context: "adam gradient",
                expected: self.theta.len(),
                found: grad.len(),
            });
        }
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient {
                step: self.step + 1,
            });
        }
        self.step += 1;
        let t = self.step as f64;
        let bc1 = 1.0 - libm::pow(self.beta1, t);
        let bc2 = 1.0 - libm::pow(self.beta2, t);
        for (((theta, m), v), &g) in self
            .theta
            .iter_mut()
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
            .zip(grad)
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *theta -= self.lr * m_hat / (libm::sqrt(v_hat) + self.eps);
        }
        Ok(())
    }
}

/// Final parameters and the loss before every step plus the final loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimized {
    pub theta: Vec<f64>,
    /// `iters + 1` values: `trace[t]` is the loss at the parameters after `t` steps.
    pub trace: Vec<f64>,
}

/// Runs `iters` Adam steps, applying `project` after each one.
pub fn minimize<O: Objective + ?Sized>(
    objective: &O,
    theta0: Vec<f64>,
    iters: usize,
    lr: f64,
    project: Option<&dyn Fn(&mut [f64])>,
) -> Result<Minimized> {
    let mut state = AdamState::new(theta0, lr);
    if let Some(p) = project {
        p(&mut state.theta);
    }
    let mut trace = Vec::with_capacity(iters + 1);
    for it in 0..iters {
        let (loss, grad) = objective.value_and_gradient(&state.theta)?;
        if !loss.is_finite() {
            trace.push(loss);
            return Err(Error::NonFiniteLoss {
                iteration: it,
                trace,
            });
        }
        trace.push(loss);
        state.step(&grad)?;
        if let Some(p) = project {
            p(&mut state.theta);
        }
    }
    let last = objective.value(&state.theta)?;
    trace.push(last);
    if !last.is_finite() {
        return Err(Error::NonFiniteLoss {
            iteration: iters,
            trace,
        });
    }
    Ok(Minimized {
        theta: state.theta,
        trace,
    })
}

/// Clamps every coordinate to be nonnegative.
pub fn project_nonnegative(theta: &mut [f64]) {
    for t in theta {
        if *t < 0.0 {
            *t = 0.0;
        }
    }
}

/// Largest `|numeric − analytic| / max(1, |analytic|)` over coordinates, with
/// central differences of step `h`.
pub fn check_gradient<O: Objective + ?Sized>(objective: &O, theta: &[f64], h: f64) -> Result<f64> {
    let analytic = objective.gradient(theta)?;
    let mut probe = theta.to_vec();
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        let up = objective.value(&probe)?;
        probe[i] = theta[i] - h;
        let down = objective.value(&probe)?;
        probe[i] = theta[i];
        let numeric = (up - down) / (2.0 * h);
        let err = (numeric - analytic[i]).abs() / analytic[i].abs().max(1.0);
        worst = worst.max(err);
    }
    Ok(worst)
}
