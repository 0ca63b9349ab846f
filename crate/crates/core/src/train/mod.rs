//! Deterministic first-order trainers for the continuous subproblems.
//!
//! Every trainer is full-batch (no sampling), tracks the best evaluated
//! iterate of its objective, and returns scores recomputed in closed form
//! from the returned model, so the selection step and the objective report
//! always see the same numbers. Warm starts are plain initial iterates.

mod blackbox;
mod kernel;
mod logreg;
mod multisvm;
mod svm;

pub use blackbox::{blackbox_scores, ChildScorer, LogisticScorer, ScorerEndpoint, ScorerRequest, ScorerResponse};
pub use kernel::{fit_kernel_svm, KernelModel};
pub use logreg::{fit_logloss_weighted, fit_logreg_weighted, logistic_gradient, logistic_objective};
pub use multisvm::fit_multisvm_weighted;
pub use svm::{fit_hinge_weighted, fit_svm_weighted, hinge_dual_gap, hinge_objective};

use crate::scalar::Scalar;

/// Step-size schedule of the subgradient trainers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// `base / sqrt(k)`.
    InverseSqrt,
    /// `base / (lambda * k)` when `lambda > 0`, `base / k` otherwise.
    InverseLinear,
}

/// Kernel of the kernelized trainer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel<T> {
    Linear,
    Rbf { gamma: T },
    Polynomial { degree: u32, coef: T },
}

impl<T: Scalar> Kernel<T> {
    pub fn eval(&self, a: &[T], b: &[T]) -> T {
        match *self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let mut d2 = T::zero();
                for (x, y) in a.iter().zip(b) {
                    let d = *x - *y;
                    d2 += d * d;
                }
                (-gamma * d2).exp()
            }
            Kernel::Polynomial { degree, coef } => (dot(a, b) + coef).powi(degree as i32),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        match *self {
            Kernel::Rbf { gamma } if !(gamma > T::zero()) => {
                Err(crate::Error::InvalidInput("RBF gamma must be > 0".into()))
            }
            Kernel::Polynomial { degree, .. } if degree == 0 => {
                Err(crate::Error::InvalidInput("polynomial degree must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Budget and schedule of a trainer run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig<T> {
    pub iterations: usize,
    pub schedule: Schedule,
    pub base_rate: T,
    /// Also evaluate the averaged iterate and return it if better.
    pub averaging: bool,
    /// Consumed by callers that randomize initial iterates; the trainers
    /// themselves are deterministic.
    pub seed: u64,
    pub kernel: Kernel<T>,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            iterations: 1000,
            schedule: Schedule::InverseSqrt,
            base_rate: T::one(),
            averaging: false,
            seed: 0,
            kernel: Kernel::Linear,
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    /// Default configuration with the schedule matched to the
    /// regularization: strongly convex problems use the inverse-linear
    /// rate, unregularized ones the inverse-sqrt rate.
    pub fn default_for(lambda: T) -> Self {
        let mut cfg = Self::default();
        if lambda > T::zero() {
            cfg.schedule = Schedule::InverseLinear;
        }
        cfg
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.iterations == 0 {
            return Err(crate::Error::InvalidInput("iterations must be positive".into()));
        }
        if !(self.base_rate > T::zero()) {
            return Err(crate::Error::InvalidInput("base rate must be > 0".into()));
        }
        self.kernel.validate()
    }

    /// Same configuration with the iteration budget scaled up.
    pub fn scaled_budget(mut self, factor: usize) -> Self {
        self.iterations = self.iterations.saturating_mul(factor);
        self
    }

    pub(crate) fn step(&self, lambda: T, k: usize) -> T {
        let k_t = T::from_count(k);
        match self.schedule {
            Schedule::InverseSqrt => self.base_rate / k_t.sqrt(),
            Schedule::InverseLinear => {
                if lambda > T::zero() {
                    self.base_rate / (lambda * k_t)
                } else {
                    self.base_rate / k_t
                }
            }
        }
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += *x * *y;
    }
    acc
}

pub(crate) fn axpy<T: Scalar>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * *xi;
    }
}
