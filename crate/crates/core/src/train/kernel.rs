//! Kernelized hinge trainer over a support-coefficient expansion.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{ScoreDirection, Scores};
use crate::scalar::Scalar;
use crate::train::{Kernel, TrainConfig};

/// Decision function `f(x) = sum_s coeff_s k(x_s, x) + b` over stored
/// support rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelModel<T> {
    pub kernel: Kernel<T>,
    support_x: Vec<T>,
    n_features: usize,
    pub coeff: Vec<T>,
    pub b: T,
}

impl<T: Scalar> KernelModel<T> {
    pub fn empty(kernel: Kernel<T>, n_features: usize) -> Self {
        Self { kernel, support_x: Vec::new(), n_features, coeff: Vec::new(), b: T::zero() }
    }

    pub fn support_len(&self) -> usize {
        self.coeff.len()
    }

    fn support_row(&self, s: usize) -> &[T] {
        &self.support_x[s * self.n_features..(s + 1) * self.n_features]
    }

    pub fn decision(&self, x: &[T]) -> T {
        let mut acc = self.b;
        for s in 0..self.coeff.len() {
            acc += self.coeff[s] * self.kernel.eval(self.support_row(s), x);
        }
        acc
    }

    /// Tight hinge margins of this model on a dataset.
    pub fn margins(&self, data: &Dataset<T>) -> Result<Scores<T>> {
        if data.n_features() != self.n_features {
            return Err(Error::DimensionMismatch("feature width mismatch".into()));
        }
        let values = (0..data.len())
            .map(|i| {
                let y = T::from_f64_lossy(data.labels()[i] as f64);
                let m = T::one() - y * self.decision(data.row(i));
                if m > T::zero() {
                    m
                } else {
                    T::zero()
                }
            })
            .collect();
        Scores::new(values, ScoreDirection::CorrectWhenAtMost)
    }
}

/// Trains the kernel machine on the positively weighted points by
/// functional subgradient descent on `sum_i w_i max(0, 1 - y_i f(x_i))`,
/// warm-started from `init` (whose expansion is kept frozen underneath the
/// new coefficients). Returns margins on all points.
pub fn fit_kernel_svm<T: Scalar>(
    data: &Dataset<T>,
    weights: &[T],
    cfg: &TrainConfig<T>,
    init: Option<&KernelModel<T>>,
) -> Result<(KernelModel<T>, Scores<T>)> {
    cfg.validate()?;
    if weights.len() != data.len() {
        return Err(Error::DimensionMismatch("one weight per point required".into()));
    }
    if weights.iter().any(|&w| w < T::zero() || !w.is_finite()) {
        return Err(Error::InvalidInput("weights must be finite and nonnegative".into()));
    }
    if !data.has_signed_labels() {
        return Err(Error::InvalidInput("kernel training needs signed binary labels".into()));
    }
    let active: Vec<usize> = (0..data.len()).filter(|&i| weights[i] > T::zero()).collect();
    if active.is_empty() {
        return Err(Error::EmptySelection);
    }
    let has_pos = active.iter().any(|&i| data.labels()[i] == 1);
    let has_neg = active.iter().any(|&i| data.labels()[i] == -1);
    if !has_pos || !has_neg {
        return Err(Error::OneClassSelection);
    }
    if let Some(m) = init {
        if m.n_features != data.n_features() {
            return Err(Error::DimensionMismatch("warm-start width != feature width".into()));
        }
        if m.kernel != cfg.kernel {
            return Err(Error::InvalidInput("warm-start kernel differs from configured kernel".into()));
        }
    }

    let m = active.len();
    let mut gram = vec![T::zero(); m * m];
    for a in 0..m {
        for b in a..m {
            let v = cfg.kernel.eval(data.row(active[a]), data.row(active[b]));
            gram[a * m + b] = v;
            gram[b * m + a] = v;
        }
    }
    let y: Vec<T> = active.iter().map(|&i| T::from_f64_lossy(data.labels()[i] as f64)).collect();
    let w: Vec<T> = active.iter().map(|&i| weights[i]).collect();

    let base = match init {
        Some(model) => model.clone(),
        None => KernelModel::empty(cfg.kernel, data.n_features()),
    };
    // Current decision values on the active points; deltas live on top of
    // the frozen base expansion.
    let mut values: Vec<T> = active.iter().map(|&i| base.decision(data.row(i))).collect();
    let mut delta = vec![T::zero(); m];
    let mut bias = base.b;

    let subset_loss = |values: &[T]| -> T {
        let mut acc = T::zero();
        for s in 0..m {
            let margin = T::one() - y[s] * values[s];
            if margin > T::zero() {
                acc += w[s] * margin;
            }
        }
        acc
    };
    let mut best_delta = delta.clone();
    let mut best_bias = bias;
    let mut best_loss = subset_loss(&values);
    let mut violators: Vec<usize> = Vec::with_capacity(m);
    for k in 1..=cfg.iterations {
        violators.clear();
        for s in 0..m {
            if y[s] * values[s] < T::one() {
                violators.push(s);
            }
        }
        if violators.is_empty() {
            break;
        }
        let eta = cfg.step(T::zero(), k);
        let mut bias_step = T::zero();
        for &v in &violators {
            let push = eta * w[v] * y[v];
            delta[v] += push;
            bias_step += push;
        }
        for s in 0..m {
            let mut acc = bias_step;
            for &v in &violators {
                acc += eta * w[v] * y[v] * gram[s * m + v];
            }
            values[s] += acc;
        }
        bias += bias_step;
        let loss = subset_loss(&values);
        if loss < best_loss {
            best_loss = loss;
            best_delta.copy_from_slice(&delta);
            best_bias = bias;
        }
    }

    let mut support_x = base.support_x.clone();
    let mut coeff = base.coeff.clone();
    for (s, &i) in active.iter().enumerate() {
        if best_delta[s] != T::zero() {
            support_x.extend_from_slice(data.row(i));
            coeff.push(best_delta[s]);
        }
    }
    let model = KernelModel { kernel: cfg.kernel, support_x, n_features: data.n_features(), coeff, b: best_bias };
    let scores = model.margins(data)?;
    Ok((model, scores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HyperParams;
    use crate::train::fit_svm_weighted;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rbf_separates_xor() {
        let data = Dataset::binary(
            vec![0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0],
            2,
            vec![1, 1, -1, -1],
            vec![1, -1, 1, -1],
        )
        .unwrap();
        let cfg = TrainConfig { kernel: Kernel::Rbf { gamma: 2.0 }, iterations: 3000, ..TrainConfig::default() };
        let weights = vec![0.25; 4];
        let (model, _) = fit_kernel_svm(&data, &weights, &cfg, None).unwrap();
        for i in 0..4 {
            let pred = if model.decision(data.row(i)) >= 0.0 { 1 } else { -1 };
            assert_eq!(pred, data.labels()[i], "point {i}");
        }
    }

    #[test]
    fn linear_kernel_tracks_linear_trainer() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 20;
        let feats: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<i32> = (0..n).map(|i| if feats[2 * i] + 0.3 * feats[2 * i + 1] > 0.0 { 1 } else { -1 }).collect();
        let groups: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let data = Dataset::binary(feats, 2, labels, groups).unwrap();
        let cfg = TrainConfig { iterations: 500, ..TrainConfig::default() };
        let weights = vec![1.0 / n as f64; n];
        let (kmodel, _) = fit_kernel_svm(&data, &weights, &cfg, None).unwrap();
        let h = HyperParams::new(1.0, 0.0, 0.0);
        let (lmodel, _) = fit_svm_weighted(&data, &vec![true; n], &h, &cfg, None).unwrap();
        for i in 0..n {
            let dk = kmodel.decision(data.row(i));
            let dl = lmodel.decision(data.row(i));
            assert!((dk - dl).abs() < 1e-2, "point {i}: kernel {dk} vs linear {dl}");
        }
    }

    #[test]
    fn degree_one_polynomial_equals_linear_kernel() {
        let data = Dataset::binary(
            vec![1.0, 0.2, -0.4, 0.9, 0.7, -0.7, -1.0, 0.1],
            2,
            vec![1, -1, 1, -1],
            vec![1, -1, 1, -1],
        )
        .unwrap();
        let weights = vec![0.25; 4];
        let lin = TrainConfig { iterations: 400, ..TrainConfig::default() };
        let poly = TrainConfig { kernel: Kernel::Polynomial { degree: 1, coef: 0.0 }, iterations: 400, ..TrainConfig::default() };
        let (m_lin, _) = fit_kernel_svm(&data, &weights, &lin, None).unwrap();
        let (m_poly, _) = fit_kernel_svm(&data, &weights, &poly, None).unwrap();
        for i in 0..4 {
            let a: f64 = m_lin.decision(data.row(i));
            let b: f64 = m_poly.decision(data.row(i));
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn one_class_subset_is_a_distinct_error() {
        let data = Dataset::binary(vec![1.0, 2.0, 3.0, 4.0], 1, vec![1, 1, -1, -1], vec![1, -1, 1, -1]).unwrap();
        let cfg = TrainConfig::default();
        let weights = vec![0.5, 0.5, 0.0, 0.0];
        assert!(matches!(
            fit_kernel_svm(&data, &weights, &cfg, None),
            Err(Error::OneClassSelection)
        ));
    }
}
