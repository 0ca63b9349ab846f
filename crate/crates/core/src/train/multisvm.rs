//! Multiclass pairwise-margin hinge trainer.

use crate::data::{Dataset, OneHotSelection};
use crate::error::{Error, Result};
use crate::model::{multiclass_margins, HyperParams, MulticlassModel, ScoreMatrix};
use crate::scalar::Scalar;
use crate::train::{axpy, TrainConfig};

/// `(1/N) sum_i sum_{j != y_i} (1 - z_ij) max(0, 1 - (f_{y_i} - f_j))
///  + lambda sum_j |w_j|^2`.
pub fn multiclass_objective<T: Scalar>(
    data: &Dataset<T>,
    z: &OneHotSelection,
    lambda: T,
    model: &MulticlassModel<T>,
) -> T {
    let n_t = T::from_count(data.len());
    let k = model.k();
    let mut acc = lambda * model.norm_sq();
    for i in 0..data.len() {
        let x = data.row(i);
        let yi = data.labels()[i] as usize;
        let fy = model.decision(yi - 1, x);
        for j in 1..=k {
            if j == yi || z.indicator(i, j) {
                continue;
            }
            let m = T::one() - (fy - model.decision(j - 1, x));
            if m > T::zero() {
                acc += m / n_t;
            }
        }
    }
    acc
}

/// Subgradient descent on the pairwise hinge with excluded pairs given by
/// the one-hot selection; returns tight pairwise margins on all points.
pub fn fit_multisvm_weighted<T: Scalar>(
    data: &Dataset<T>,
    z: &OneHotSelection,
    h: &HyperParams<T>,
    cfg: &TrainConfig<T>,
    init: Option<&MulticlassModel<T>>,
) -> Result<(MulticlassModel<T>, ScoreMatrix<T>)> {
    cfg.validate()?;
    if z.len() != data.len() {
        return Err(Error::DimensionMismatch("one selection row per point required".into()));
    }
    if !data.has_indexed_labels() {
        return Err(Error::InvalidInput("multiclass training needs labels in 1..=K".into()));
    }
    let k = data.class_count();
    if z.k() != k {
        return Err(Error::DimensionMismatch(format!(
            "selection has {} classes, data has {k}",
            z.k()
        )));
    }
    let n_features = data.n_features();
    let mut current = match init {
        Some(m) if m.k() == k && m.w.iter().all(|w| w.len() == n_features) => m.clone(),
        Some(_) => return Err(Error::DimensionMismatch("warm-start shape mismatch".into())),
        None => MulticlassModel::zeros(k, n_features),
    };
    let mut best = current.clone();
    let mut best_obj = multiclass_objective(data, z, h.lambda, &current);
    let n_t = T::from_count(data.len());
    let two = T::from_f64_lossy(2.0);
    let mut grad_w = vec![vec![T::zero(); n_features]; k];
    let mut grad_b = vec![T::zero(); k];
    for step_idx in 1..=cfg.iterations {
        for g in grad_w.iter_mut() {
            for v in g.iter_mut() {
                *v = T::zero();
            }
        }
        for g in grad_b.iter_mut() {
            *g = T::zero();
        }
        for i in 0..data.len() {
            let x = data.row(i);
            let yi = data.labels()[i] as usize;
            let fy = current.decision(yi - 1, x);
            for j in 1..=k {
                if j == yi || z.indicator(i, j) {
                    continue;
                }
                if T::one() - (fy - current.decision(j - 1, x)) > T::zero() {
                    let scale = T::one() / n_t;
                    axpy(-scale, x, &mut grad_w[yi - 1]);
                    grad_b[yi - 1] -= scale;
                    axpy(scale, x, &mut grad_w[j - 1]);
                    grad_b[j - 1] += scale;
                }
            }
        }
        for j in 0..k {
            axpy(two * h.lambda, &current.w[j], &mut grad_w[j]);
        }
        let eta = cfg.step(h.lambda, step_idx);
        for j in 0..k {
            axpy(-eta, &grad_w[j], &mut current.w[j]);
            current.b[j] -= eta * grad_b[j];
        }
        let obj = multiclass_objective(data, z, h.lambda, &current);
        if obj < best_obj {
            best_obj = obj;
            best = current.clone();
        }
    }
    let scores = multiclass_margins(&best, data)?;
    Ok((best, scores))
}
