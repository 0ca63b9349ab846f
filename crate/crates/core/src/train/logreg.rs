//! Weighted logistic regression by monotone full-batch gradient descent.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{log_likelihood_scores, sigmoid, HyperParams, LinearModel, Scores, PROB_FLOOR};
use crate::scalar::Scalar;
use crate::train::{axpy, TrainConfig};

/// `sum_i weights[i] * (-loglik_i) + lambda * |w|^2` with the per-point
/// log-likelihood of the true label, probability-clamped.
pub fn logistic_objective<T: Scalar>(data: &Dataset<T>, weights: &[T], lambda: T, model: &LinearModel<T>) -> T {
    let floor = T::from_f64_lossy(PROB_FLOOR);
    let ceil = T::one() - floor;
    let mut acc = lambda * model.norm_sq();
    for i in 0..data.len() {
        let wi = weights[i];
        if wi == T::zero() {
            continue;
        }
        let p = sigmoid(model.decision(data.row(i)));
        let q = if data.labels()[i] == 1 { p } else { T::one() - p };
        acc -= wi * q.max(floor).min(ceil).ln();
    }
    acc
}

/// Gradient of [`logistic_objective`] (ignoring the measure-zero clamped
/// region): residual form `p_i - y01_i` per point.
pub fn logistic_gradient<T: Scalar>(
    data: &Dataset<T>,
    weights: &[T],
    lambda: T,
    model: &LinearModel<T>,
) -> (Vec<T>, T) {
    let mut grad_w = vec![T::zero(); data.n_features()];
    let mut grad_b = T::zero();
    for i in 0..data.len() {
        let wi = weights[i];
        if wi == T::zero() {
            continue;
        }
        let p = sigmoid(model.decision(data.row(i)));
        let y01 = if data.labels()[i] == 1 { T::one() } else { T::zero() };
        let r = wi * (p - y01);
        axpy(r, data.row(i), &mut grad_w);
        grad_b += r;
    }
    let two = T::from_f64_lossy(2.0);
    axpy(two * lambda, &model.w, &mut grad_w);
    (grad_w, grad_b)
}

/// Gradient descent with multiplicative step adaptation: a step that fails
/// to decrease the objective is retried at half length, so the recorded
/// objective sequence is non-increasing by construction.
pub fn fit_logloss_weighted<T: Scalar>(
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
        return Err(Error::InvalidInput("logistic training needs signed binary labels".into()));
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
    let mut obj = logistic_objective(data, weights, lambda, &current);
    let half = T::from_f64_lossy(0.5);
    let grow = T::from_f64_lossy(1.2);
    let mut scale = cfg.base_rate;
    for _ in 0..cfg.iterations {
        let (grad_w, grad_b) = logistic_gradient(data, weights, lambda, &current);
        let mut accepted = false;
        for _ in 0..48 {
            let mut candidate = current.clone();
            axpy(-scale, &grad_w, &mut candidate.w);
            candidate.b -= scale * grad_b;
            let cand_obj = logistic_objective(data, weights, lambda, &candidate);
            if cand_obj <= obj {
                current = candidate;
                obj = cand_obj;
                scale *= grow;
                accepted = true;
                break;
            }
            scale *= half;
        }
        if !accepted {
            break; // no decrease possible at any representable step
        }
    }
    Ok(current)
}

/// Fits the logistic log-loss restricted to the selected points, weighted
/// `1/N`, and returns the model with log-likelihood scores on all points.
pub fn fit_logreg_weighted<T: Scalar>(
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
    let model = fit_logloss_weighted(data, &weights, h.lambda, cfg, init)?;
    let scores = log_likelihood_scores(&model, data)?;
    Ok((model, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_point_saturates_unregularized() {
        let data = Dataset::binary(vec![1.0, -1.0], 1, vec![1, -1], vec![1, -1]).unwrap();
        let h = HyperParams::new(0.5f64.ln(), 0.0, 0.0);
        let cfg = TrainConfig { iterations: 2000, ..TrainConfig::default() };
        let (model, scores) = fit_logreg_weighted(&data, &[true, false], &h, &cfg, None).unwrap();
        let p = sigmoid(model.decision(data.row(0)));
        assert!(p >= 0.99, "probability {p}");
        assert_eq!(scores.values.len(), 2);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 30;
        let feats: Vec<f64> = (0..n * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<i32> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let groups: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let data = Dataset::binary(feats, 3, labels, groups).unwrap();
        let lambda = 1.0 / n as f64;
        let weights = vec![1.0 / n as f64; n];
        let step = 1e-6;
        for _ in 0..10 {
            let model = LinearModel {
                w: (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect(),
                b: rng.gen_range(-0.5..0.5),
            };
            let (grad_w, grad_b) = logistic_gradient(&data, &weights, lambda, &model);
            for d in 0..3 {
                let mut lo = model.clone();
                let mut hi = model.clone();
                lo.w[d] -= step;
                hi.w[d] += step;
                let fd = (logistic_objective(&data, &weights, lambda, &hi)
                    - logistic_objective(&data, &weights, lambda, &lo))
                    / (2.0 * step);
                let denom = grad_w[d].abs().max(1e-8);
                assert!(
                    (grad_w[d] - fd).abs() / denom <= 1e-5,
                    "coordinate {d}: analytic {} vs fd {fd}",
                    grad_w[d]
                );
            }
            let mut lo = model.clone();
            let mut hi = model.clone();
            lo.b -= step;
            hi.b += step;
            let fd = (logistic_objective(&data, &weights, lambda, &hi)
                - logistic_objective(&data, &weights, lambda, &lo))
                / (2.0 * step);
            assert!((grad_b - fd).abs() / grad_b.abs().max(1e-8) <= 1e-5);
        }
    }

    #[test]
    fn doubling_lambda_never_grows_the_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 24;
        let feats: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<i32> = (0..n).map(|i| if feats[2 * i] > 0.1 { 1 } else { -1 }).collect();
        let groups: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let data = Dataset::binary(feats, 2, labels, groups).unwrap();
        let z = vec![true; n];
        let cfg = TrainConfig::default();
        let mut prev_norm = f64::INFINITY;
        for lambda in [0.01, 0.02, 0.04, 0.08] {
            let h = HyperParams::new(0.0, lambda, 0.0);
            let (model, _) = fit_logreg_weighted(&data, &z, &h, &cfg, None).unwrap();
            let norm = model.norm_sq().sqrt();
            assert!(norm <= prev_norm + 1e-9, "lambda {lambda}: {norm} > {prev_norm}");
            prev_norm = norm;
        }
    }

    #[test]
    fn objective_is_monotone_under_warm_restarts() {
        let data = Dataset::binary(vec![1.0, 0.5, -1.0, -0.5], 2, vec![1, -1], vec![1, -1]).unwrap();
        let weights = vec![0.5, 0.5];
        let cfg = TrainConfig { iterations: 50, ..TrainConfig::default() };
        let mut model = LinearModel::zeros(2);
        let mut prev = logistic_objective(&data, &weights, 0.05, &model);
        for _ in 0..8 {
            model = fit_logloss_weighted(&data, &weights, 0.05, &cfg, Some(&model)).unwrap();
            let obj = logistic_objective(&data, &weights, 0.05, &model);
            assert!(obj <= prev + 1e-12);
            prev = obj;
        }
    }
}
