//! Weighted linear hinge trainer by full-batch subgradient descent.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{margins, HyperParams, LinearModel, Scores};
use crate::scalar::Scalar;
use crate::train::{axpy, TrainConfig};

/// `sum_i weights[i] * max(0, 1 - y_i (w . x_i + b)) + lambda * |w|^2`.
pub fn hinge_objective<T: Scalar>(data: &Dataset<T>, weights: &[T], lambda: T, model: &LinearModel<T>) -> T {
    let mut acc = lambda * model.norm_sq();
    for i in 0..data.len() {
        let wi = weights[i];
        if wi == T::zero() {
            continue;
        }
        let y = T::from_f64_lossy(data.labels()[i] as f64);
        let m = T::one() - y * model.decision(data.row(i));
        if m > T::zero() {
            acc += wi * m;
        }
    }
    acc
}

/// Minimizes the weighted hinge objective; returns the best evaluated
/// iterate. Points with zero weight do not influence training.
pub fn fit_hinge_weighted<T: Scalar>(
    data: &Dataset<T>,
    weights: &[T],
    lambda: T,
    cfg: &TrainConfig<T>,
    init: Option<&LinearModel<T>>,
) -> Result<LinearModel<T>> {
    cfg.validate()?;
    if weights.len() != data.len() {
        return Err(Error::DimensionMismatch("one weight per point required".into()));
    }
    if !data.has_signed_labels() {
        return Err(Error::InvalidInput("hinge training needs signed binary labels".into()));
    }
    if weights.iter().all(|&w| w == T::zero()) {
        return Err(Error::EmptySelection);
    }
    if weights.iter().any(|&w| w < T::zero() || !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    let n_features = data.n_features();
    let mut current = match init {
        Some(m) if m.w.len() == n_features => m.clone(),
        Some(_) => return Err(Error::DimensionMismatch("warm-start width != feature width".into())),
        None => LinearModel::zeros(n_features),
    };
    let mut best = current.clone();
    let mut best_obj = hinge_objective(data, weights, lambda, &current);

    let mut avg_w = vec![T::zero(); n_features];
    let mut avg_b = T::zero();

    let mut grad_w = vec![T::zero(); n_features];
    let two = T::from_f64_lossy(2.0);
    for k in 1..=cfg.iterations {
        for g in grad_w.iter_mut() {
            *g = T::zero();
        }
        let mut grad_b = T::zero();
        for i in 0..data.len() {
            let wi = weights[i];
            if wi == T::zero() {
                continue;
            }
            let y = T::from_f64_lossy(data.labels()[i] as f64);
            if T::one() - y * current.decision(data.row(i)) > T::zero() {
                axpy(-wi * y, data.row(i), &mut grad_w);
                grad_b -= wi * y;
            }
        }
        axpy(two * lambda, &current.w, &mut grad_w);
        let eta = cfg.step(lambda, k);
        axpy(-eta, &grad_w, &mut current.w);
        current.b -= eta * grad_b;

        let obj = hinge_objective(data, weights, lambda, &current);
        if obj < best_obj {
            best_obj = obj;
            best = current.clone();
        }
        if cfg.averaging {
            let k_t = T::from_count(k);
            for (a, c) in avg_w.iter_mut().zip(&current.w) {
                *a += (*c - *a) / k_t;
            }
            avg_b += (current.b - avg_b) / k_t;
        }
    }
    if cfg.averaging {
        let averaged = LinearModel { w: avg_w, b: avg_b };
        if hinge_objective(data, weights, lambda, &averaged) < best_obj {
            best = averaged;
        }
    }
    Ok(best)
}

/// Fits the hinge objective restricted to the selected points, weighted
/// `1/N`, and returns the model together with tight margins on all points.
pub fn fit_svm_weighted<T: Scalar>(
    data: &Dataset<T>,
    z: &[bool],
    h: &HyperParams<T>,
    cfg: &TrainConfig<T>,
    init: Option<&LinearModel<T>>,
) -> Result<(LinearModel<T>, Scores<T>)> {
    if z.len() != data.len() {
        return Err(Error::DimensionMismatch("one indicator per point required".into()));
    }
    if !z.iter().any(|&b| b) {
        return Err(Error::EmptySelection);
    }
    let inv_n = T::one() / T::from_count(data.len());
    let weights: Vec<T> = z.iter().map(|&b| if b { inv_n } else { T::zero() }).collect();
    let model = fit_hinge_weighted(data, &weights, h.lambda, cfg, init)?;
    let scores = margins(&model, data)?;
    Ok((model, scores))
}

/// Certified suboptimality bound for a hinge solution: the gap between the
/// primal objective and a dual lower bound constructed from the active set.
///
/// The free intercept is handled by bounding the optimal intercept from the
/// objective value at zero; one-class weight patterns fall back to the
/// trivial lower bound zero. Requires `lambda > 0` for a finite bound.
pub fn hinge_dual_gap<T: Scalar>(data: &Dataset<T>, weights: &[T], lambda: T, model: &LinearModel<T>) -> T {
    let primal = hinge_objective(data, weights, lambda, model);
    if !(lambda > T::zero()) {
        // Objective is nonnegative, so zero is still a valid lower bound.
        return primal;
    }
    let mut alpha_sum = T::zero();
    let mut v = vec![T::zero(); data.n_features()];
    let mut alpha_y = T::zero();
    let mut total_weight = T::zero();
    let mut min_weight_pos = T::infinity();
    let mut min_weight_neg = T::infinity();
    for i in 0..data.len() {
        let wi = weights[i];
        if wi == T::zero() {
            continue;
        }
        total_weight += wi;
        let y = T::from_f64_lossy(data.labels()[i] as f64);
        if data.labels()[i] == 1 {
            min_weight_pos = min_weight_pos.min(wi);
        } else {
            min_weight_neg = min_weight_neg.min(wi);
        }
        if T::one() - y * model.decision(data.row(i)) > T::zero() {
            alpha_sum += wi;
            axpy(wi * y, data.row(i), &mut v);
            alpha_y += wi * y;
        }
    }
    let lower = if min_weight_pos.is_finite() && min_weight_neg.is_finite() {
        // Both classes carry weight: the optimal intercept is bounded.
        let norm_bound = (total_weight / lambda).sqrt();
        let max_x = data.max_row_norm();
        let min_w = min_weight_pos.min(min_weight_neg);
        let b_bound = total_weight / min_w - T::one() + norm_bound * max_x;
        let vq: T = v.iter().map(|&x| x * x).sum();
        let four = T::from_f64_lossy(4.0);
        alpha_sum - vq / (four * lambda) - b_bound * alpha_y.abs()
    } else {
        T::zero()
    };
    let lower = lower.max(T::zero());
    (primal - lower).max(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::train::Schedule;

    fn separable() -> Dataset<f64> {
        Dataset::binary(
            vec![2.0, 0.0, -2.0, 0.0],
            2,
            vec![1, -1],
            vec![1, -1],
        )
        .unwrap()
    }

    #[test]
    fn separable_pair_reaches_zero_hinge() {
        let data = separable();
        let h = HyperParams::new(1.0, 0.0, 0.0);
        let cfg = TrainConfig { iterations: 3000, ..TrainConfig::default() };
        let (model, scores) = fit_svm_weighted(&data, &[true, true], &h, &cfg, None).unwrap();
        let hinge: f64 = scores.values.iter().sum::<f64>() / 2.0;
        assert!(hinge < 1e-3, "hinge {hinge}");
        assert!(model.is_finite());
    }

    #[test]
    fn huge_lambda_crushes_weights() {
        let data = separable();
        let h = HyperParams::new(1.0, 1e6, 0.0);
        let cfg = TrainConfig { schedule: Schedule::InverseLinear, ..TrainConfig::default() };
        let (model, _) = fit_svm_weighted(&data, &[true, true], &h, &cfg, None).unwrap();
        assert!(model.norm_sq().sqrt() <= 1e-2);
    }

    #[test]
    fn empty_selection_is_rejected() {
        let data = separable();
        let h = HyperParams::new(1.0, 0.0, 0.0);
        let cfg = TrainConfig::default();
        assert!(matches!(
            fit_svm_weighted(&data, &[false, false], &h, &cfg, None),
            Err(Error::EmptySelection)
        ));
    }

    #[test]
    fn longer_budget_changes_objective_little() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 40;
        let feats: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<i32> = (0..n).map(|i| if feats[2 * i] + feats[2 * i + 1] > 0.0 { 1 } else { -1 }).collect();
        let groups: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let data = Dataset::binary(feats, 2, labels, groups).unwrap();
        let h = HyperParams::new(1.0, 0.1, 0.0);
        let z = vec![true; n];
        let weights: Vec<f64> = vec![1.0 / n as f64; n];
        let cfg = TrainConfig { schedule: Schedule::InverseLinear, iterations: 2000, ..TrainConfig::default() };
        let (short_model, _) = fit_svm_weighted(&data, &z, &h, &cfg, None).unwrap();
        let long_cfg = cfg.scaled_budget(100);
        let (long_model, _) = fit_svm_weighted(&data, &z, &h, &long_cfg, None).unwrap();
        let short_obj = hinge_objective(&data, &weights, h.lambda, &short_model);
        let long_obj = hinge_objective(&data, &weights, h.lambda, &long_model);
        assert!(short_obj <= long_obj * 1.01 + 1e-9, "short {short_obj} vs long {long_obj}");
    }

    #[test]
    fn dual_gap_bounds_shrink_with_budget() {
        let data = separable();
        let weights = vec![0.5, 0.5];
        let lambda = 0.5;
        let cfg = TrainConfig { schedule: Schedule::InverseLinear, iterations: 200, ..TrainConfig::default() };
        let rough = fit_hinge_weighted(&data, &weights, lambda, &cfg, None).unwrap();
        let fine = fit_hinge_weighted(&data, &weights, lambda, &cfg.scaled_budget(100), None).unwrap();
        let g_rough = hinge_dual_gap(&data, &weights, lambda, &rough);
        let g_fine = hinge_dual_gap(&data, &weights, lambda, &fine);
        assert!(g_fine <= g_rough + 1e-12);
        // The gap really bounds the distance to the fine solution.
        let p_rough = hinge_objective(&data, &weights, lambda, &rough);
        let p_fine = hinge_objective(&data, &weights, lambda, &fine);
        assert!(p_rough - p_fine <= g_rough + 1e-9);
    }
}
