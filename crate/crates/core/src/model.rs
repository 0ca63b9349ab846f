//! Classifier parameters, outcome scores, and the closed-form score maps.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Probabilities are clamped into `[PROB_FLOOR, 1 - PROB_FLOOR]` before
/// taking logarithms.
pub const PROB_FLOOR: f64 = 1e-12;

/// Penalty and threshold parameters shared by every model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams<T> {
    /// Correctness threshold on the outcome scores. Positive for
    /// margin-based models; may be nonpositive for log-likelihood scores
    /// and lies in `(0, 1]` for probability scores.
    pub t: T,
    /// Regularization weight, `>= 0`.
    pub lambda: T,
    /// Fairness penalty, `>= 0`.
    pub rho: T,
    /// Stopping tolerance of the iterative refining loop, `> 0`.
    pub delta: T,
    /// Iteration cap of the iterative refining loop.
    pub max_iter: usize,
}

impl<T: Scalar> HyperParams<T> {
    pub fn new(t: T, lambda: T, rho: T) -> Self {
        Self { t, lambda, rho, delta: T::from_f64_lossy(1e-8), max_iter: 50 }
    }

    pub fn with_stopping(mut self, delta: T, max_iter: usize) -> Self {
        self.delta = delta;
        self.max_iter = max_iter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() {
            return Err(Error::InvalidInput("threshold t must be finite".into()));
        }
        if !(self.lambda >= T::zero()) {
            return Err(Error::InvalidInput("lambda must be >= 0".into()));
        }
        if !(self.rho >= T::zero()) {
            return Err(Error::InvalidInput("rho must be >= 0".into()));
        }
        if !(self.delta > T::zero()) {
            return Err(Error::InvalidInput("delta must be > 0".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Linear classifier `x -> w . x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T> {
    pub w: Vec<T>,
    pub b: T,
}

impl<T: Scalar> LinearModel<T> {
    pub fn zeros(n_features: usize) -> Self {
        Self { w: vec![T::zero(); n_features], b: T::zero() }
    }

    pub fn decision(&self, x: &[T]) -> T {
        debug_assert_eq!(x.len(), self.w.len());
        let mut acc = self.b;
        for (wi, xi) in self.w.iter().zip(x) {
            acc = acc + *wi * *xi;
        }
        acc
    }

    pub fn norm_sq(&self) -> T {
        self.w.iter().map(|&v| v * v).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.w.iter().all(|v| v.is_finite())
    }
}

/// One linear scorer per class; prediction is the argmax.
#[derive(Debug, Clone, PartialEq)]
pub struct MulticlassModel<T> {
    /// `w[j]` scores class `j + 1`.
    pub w: Vec<Vec<T>>,
    pub b: Vec<T>,
}

impl<T: Scalar> MulticlassModel<T> {
    pub fn zeros(k: usize, n_features: usize) -> Self {
        Self { w: vec![vec![T::zero(); n_features]; k], b: vec![T::zero(); k] }
    }

    pub fn k(&self) -> usize {
        self.b.len()
    }

    /// Decision value of class `j` (0-based) on `x`.
    pub fn decision(&self, j: usize, x: &[T]) -> T {
        let mut acc = self.b[j];
        for (wi, xi) in self.w[j].iter().zip(x) {
            acc = acc + *wi * *xi;
        }
        acc
    }

    pub fn norm_sq(&self) -> T {
        self.w.iter().flat_map(|row| row.iter()).map(|&v| v * v).sum()
    }
}

/// Whether a score counts as correct when it is at most or at least the
/// threshold: hinge margins shrink with confidence, likelihoods and
/// probabilities grow with it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreDirection {
    CorrectWhenAtMost,
    CorrectWhenAtLeast,
}

/// Per-point classification outcome values for a binary model.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores<T> {
    pub values: Vec<T>,
    pub direction: ScoreDirection,
}

impl<T: Scalar> Scores<T> {
    pub fn new(values: Vec<T>, direction: ScoreDirection) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("scores must be finite".into()));
        }
        Ok(Self { values, direction })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Correctness indicator of point `i` at threshold `t`.
    pub fn is_correct(&self, i: usize, t: T) -> bool {
        match self.direction {
            ScoreDirection::CorrectWhenAtMost => self.values[i] <= t,
            ScoreDirection::CorrectWhenAtLeast => self.values[i] >= t,
        }
    }

    /// Per-point signed unit cost of selecting the point, `(u - t) / denom`
    /// oriented so that selecting a correct point is rewarded.
    pub fn unit_cost(&self, i: usize, t: T, denom: T) -> T {
        match self.direction {
            ScoreDirection::CorrectWhenAtMost => (self.values[i] - t) / denom,
            ScoreDirection::CorrectWhenAtLeast => (t - self.values[i]) / denom,
        }
    }
}

/// N x K outcome scores for a multiclass model, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMatrix<T> {
    values: Vec<T>,
    k: usize,
}

impl<T: Scalar> ScoreMatrix<T> {
    pub fn new(values: Vec<T>, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput("score matrix needs K >= 2".into()));
        }
        if values.len() % k != 0 {
            return Err(Error::DimensionMismatch(format!(
                "{} scores not divisible by K = {k}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("scores must be finite".into()));
        }
        Ok(Self { values, k })
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.k
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Score of point `i` against 1-based label `j`.
    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.k + (j - 1)]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.k..(i + 1) * self.k]
    }
}

/// Binary prediction: `+1` when the decision value is nonnegative.
pub fn predict<T: Scalar>(model: &LinearModel<T>, data: &Dataset<T>) -> Result<Vec<i32>> {
    if model.w.len() != data.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} weights, data has {} features",
            model.w.len(),
            data.n_features()
        )));
    }
    Ok((0..data.len())
        .map(|i| if model.decision(data.row(i)) >= T::zero() { 1 } else { -1 })
        .collect())
}

/// Multiclass prediction: argmax of the class scores, ties to the smallest
/// label.
pub fn predict_multiclass<T: Scalar>(model: &MulticlassModel<T>, data: &Dataset<T>) -> Result<Vec<i32>> {
    if model.w.iter().any(|w| w.len() != data.n_features()) {
        return Err(Error::DimensionMismatch("weight width != feature width".into()));
    }
    if model.k() != data.class_count() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} classes, data has {}",
            model.k(),
            data.class_count()
        )));
    }
    let mut out = Vec::with_capacity(data.len());
    for i in 0..data.len() {
        let x = data.row(i);
        let mut best = 0usize;
        let mut best_val = model.decision(0, x);
        for j in 1..model.k() {
            let v = model.decision(j, x);
            if v > best_val {
                best_val = v;
                best = j;
            }
        }
        out.push((best + 1) as i32);
    }
    Ok(out)
}

/// Tight hinge violation margins `u_i = max(0, 1 - y_i (w . x_i + b))`.
pub fn margins<T: Scalar>(model: &LinearModel<T>, data: &Dataset<T>) -> Result<Scores<T>> {
    if model.w.len() != data.n_features() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} weights, data has {} features",
            model.w.len(),
            data.n_features()
        )));
    }
    if !data.has_signed_labels() {
        return Err(Error::InvalidInput("margins need signed binary labels".into()));
    }
    let values = (0..data.len())
        .map(|i| {
            let y = T::from_f64_lossy(data.labels()[i] as f64);
            let m = T::one() - y * model.decision(data.row(i));
            if m > T::zero() {
                m
            } else {
                T::zero()
            }
        })
        .collect();
    Scores::new(values, ScoreDirection::CorrectWhenAtMost)
}

/// Log-likelihood scores of the logistic model: the log of the probability
/// assigned to the true label, clamped away from zero.
pub fn log_likelihood_scores<T: Scalar>(model: &LinearModel<T>, data: &Dataset<T>) -> Result<Scores<T>> {
    if model.w.len() != data.n_features() {
        return Err(Error::DimensionMismatch("weight width != feature width".into()));
    }
    if !data.has_signed_labels() {
        return Err(Error::InvalidInput("logistic scores need signed binary labels".into()));
    }
    let floor = T::from_f64_lossy(PROB_FLOOR);
    let ceil = T::one() - floor;
    let values = (0..data.len())
        .map(|i| {
            let p = sigmoid(model.decision(data.row(i)));
            let q = if data.labels()[i] == 1 { p } else { T::one() - p };
            q.max(floor).min(ceil).ln()
        })
        .collect();
    Scores::new(values, ScoreDirection::CorrectWhenAtLeast)
}

/// Pairwise multiclass margins `u_ij = max(0, 1 - (f_{y_i}(x) - f_j(x)))`
/// for every class `j`; the entry at `j = y_i` is the constant one.
pub fn multiclass_margins<T: Scalar>(model: &MulticlassModel<T>, data: &Dataset<T>) -> Result<ScoreMatrix<T>> {
    if model.k() != data.class_count() {
        return Err(Error::DimensionMismatch("class count mismatch".into()));
    }
    if !data.has_indexed_labels() {
        return Err(Error::InvalidInput("multiclass margins need labels in 1..=K".into()));
    }
    let k = model.k();
    let mut values = Vec::with_capacity(data.len() * k);
    for i in 0..data.len() {
        let x = data.row(i);
        let yi = data.labels()[i] as usize - 1;
        let fy = model.decision(yi, x);
        for j in 0..k {
            let m = T::one() - (fy - model.decision(j, x));
            values.push(if m > T::zero() { m } else { T::zero() });
        }
    }
    ScoreMatrix::new(values, k)
}

pub fn sigmoid<T: Scalar>(a: T) -> T {
    T::one() / (T::one() + (-a).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset<f64> {
        Dataset::binary(
            vec![2.0, 0.0, -5.0, 0.0],
            2,
            vec![1, -1],
            vec![1, -1],
        )
        .unwrap()
    }

    #[test]
    fn predict_sign_rule() {
        let data = toy();
        let m = LinearModel { w: vec![1.0, 0.0], b: 0.0 };
        assert_eq!(predict(&m, &data).unwrap(), vec![1, -1]);
        // Boundary maps to +1.
        let m = LinearModel::zeros(2);
        assert_eq!(predict(&m, &data).unwrap(), vec![1, 1]);
    }

    #[test]
    fn predict_is_scale_invariant() {
        let data = toy();
        let m = LinearModel { w: vec![0.3, -0.7], b: 0.2 };
        let scaled = LinearModel { w: vec![0.3 * 17.0, -0.7 * 17.0], b: 0.2 * 17.0 };
        assert_eq!(predict(&m, &data).unwrap(), predict(&scaled, &data).unwrap());
    }

    #[test]
    fn predict_rejects_dimension_mismatch() {
        let data = toy();
        let m = LinearModel { w: vec![1.0], b: 0.0 };
        assert!(predict(&m, &data).is_err());
    }

    #[test]
    fn multiclass_argmax_breaks_ties_low() {
        let data = Dataset::new(
            vec![1.0, 1.0],
            1,
            vec![1, 2],
            vec![1, -1],
            3,
        )
        .unwrap();
        // Class scores on x = 1: (0.1, 0.9, 0.9) -> label 2.
        let m = MulticlassModel { w: vec![vec![0.0], vec![0.0], vec![0.0]], b: vec![0.1, 0.9, 0.9] };
        assert_eq!(predict_multiclass(&m, &data).unwrap(), vec![2, 2]);
    }

    #[test]
    fn margin_values() {
        let m = LinearModel::<f64> { w: vec![1.0, 0.0], b: 0.0 };
        let d = Dataset::binary(vec![3.0, 0.0, 0.5, 0.0], 2, vec![1, 1], vec![1, -1]).unwrap();
        let s = margins(&m, &d).unwrap();
        assert_eq!(s.values[0], 0.0); // margin 3 >= 1
        assert!((s.values[1] - 0.5).abs() < 1e-15); // 1 - 0.5

        let d = Dataset::binary(vec![1.0, 0.0, 1.0, 0.0], 2, vec![-1, 1], vec![1, -1]).unwrap();
        let s = margins(&m, &d).unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-15); // 1 - (-1)
    }

    #[test]
    fn margins_zero_exactly_when_margin_at_least_one() {
        let m = LinearModel { w: vec![2.0], b: -0.5 };
        let d = Dataset::binary(vec![0.75, 0.2, 3.0, -1.0], 1, vec![1, -1, 1, -1], vec![1, -1, 1, -1]).unwrap();
        let s = margins(&m, &d).unwrap();
        for i in 0..d.len() {
            let y = d.labels()[i] as f64;
            let functional = y * m.decision(d.row(i));
            assert!(s.values[i] >= 0.0);
            assert_eq!(s.values[i] == 0.0, functional >= 1.0);
        }
    }

    #[test]
    fn zero_model_log_likelihood_is_log_half() {
        let d = toy();
        let m = LinearModel::zeros(2);
        let s = log_likelihood_scores(&m, &d).unwrap();
        for v in &s.values {
            assert!((v - 0.5f64.ln()).abs() < 1e-12);
        }
        assert_eq!(s.direction, ScoreDirection::CorrectWhenAtLeast);
    }
}
