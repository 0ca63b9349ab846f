//! Exact evaluation of the fairness and score functions over correctness
//! indicators.
//!
//! Every measure depends on `z` only through the per-subset counts of ones,
//! is symmetric under swapping the protected groups, and lies in `[0, 1]`.

use crate::data::{FairnessKind, FairnessSpec, OneHotSelection};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn count_ones(z: &[bool], subset: &[usize]) -> usize {
    subset.iter().filter(|&&i| z[i]).count()
}

fn check_len(z: &[bool], spec: &FairnessSpec) -> Result<()> {
    if z.len() != spec.n_points() {
        return Err(Error::DimensionMismatch(format!(
            "selection of length {} for {} points",
            z.len(),
            spec.n_points()
        )));
    }
    Ok(())
}

/// Absolute difference of the groups' correct-classification rates.
pub fn omr<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Result<T> {
    check_len(z, spec)?;
    if spec.d_plus.is_empty() || spec.d_minus.is_empty() {
        return Err(Error::EmptyGroup("protected group"));
    }
    let rp = T::from_count(count_ones(z, &spec.d_plus)) / T::from_count(spec.d_plus.len());
    let rm = T::from_count(count_ones(z, &spec.d_minus)) / T::from_count(spec.d_minus.len());
    Ok((rp - rm).abs())
}

/// OMR restricted to the true-negative-label points of each group.
pub fn fpr<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Result<T> {
    check_len(z, spec)?;
    if spec.d_pm.is_empty() || spec.d_mm.is_empty() {
        return Err(Error::EmptyGroup("negative-label subset of a group"));
    }
    let rp = T::from_count(count_ones(z, &spec.d_pm)) / T::from_count(spec.d_pm.len());
    let rm = T::from_count(count_ones(z, &spec.d_mm)) / T::from_count(spec.d_mm.len());
    Ok((rp - rm).abs())
}

/// Equal opportunity: OMR restricted to the true-positive-label points.
pub fn eo<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Result<T> {
    check_len(z, spec)?;
    if spec.d_pp.is_empty() || spec.d_mp.is_empty() {
        return Err(Error::EmptyGroup("positive-label subset of a group"));
    }
    let rp = T::from_count(count_ones(z, &spec.d_pp)) / T::from_count(spec.d_pp.len());
    let rm = T::from_count(count_ones(z, &spec.d_mp)) / T::from_count(spec.d_mp.len());
    Ok((rp - rm).abs())
}

/// Absolute difference of the groups' positive-prediction rates. A positive
/// point predicts positive when classified correctly; a negative point
/// predicts positive when misclassified.
pub fn dp<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Result<T> {
    check_len(z, spec)?;
    if spec.d_plus.is_empty() || spec.d_minus.is_empty() {
        return Err(Error::EmptyGroup("protected group"));
    }
    let pos_plus = count_ones(z, &spec.d_pp) + (spec.d_pm.len() - count_ones(z, &spec.d_pm));
    let pos_minus = count_ones(z, &spec.d_mp) + (spec.d_mm.len() - count_ones(z, &spec.d_mm));
    let rp = T::from_count(pos_plus) / T::from_count(spec.d_plus.len());
    let rm = T::from_count(pos_minus) / T::from_count(spec.d_minus.len());
    Ok((rp - rm).abs())
}

/// One minus the F1 score in closed form:
/// `sum(1 - z) / (N + sum_{positives} z - sum_{negatives} z)`.
pub fn f1_complement<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Result<T> {
    check_len(z, spec)?;
    if spec.n_plus.is_empty() {
        return Err(Error::EmptyGroup("positive-label points (F1 undefined)"));
    }
    let n = spec.n_points();
    let unselected = n - count_ones(z, &spec.n_plus) - count_ones(z, &spec.n_minus);
    let denom = n + count_ones(z, &spec.n_plus) - count_ones(z, &spec.n_minus);
    Ok(T::from_count(unselected) / T::from_count(denom))
}

/// Reference definition of `1 - F1` from the confusion matrix induced by
/// `z` (correct positives are true positives, misclassified negatives are
/// false positives, misclassified positives are false negatives):
/// `1 - 2TP / (2TP + FP + FN)`, computed in its single-ratio form
/// `(FP + FN) / (2TP + FP + FN)` so the integer arithmetic stays exact.
pub fn f1_complement_confusion<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Result<T> {
    check_len(z, spec)?;
    if spec.n_plus.is_empty() {
        return Err(Error::EmptyGroup("positive-label points (F1 undefined)"));
    }
    let tp = count_ones(z, &spec.n_plus);
    let fn_ = spec.n_plus.len() - tp;
    let fp = spec.n_minus.len() - count_ones(z, &spec.n_minus);
    Ok(T::from_count(fp + fn_) / T::from_count(2 * tp + fp + fn_))
}

/// OMR applied to the diagonal indicators `z[i][y_i]` of a one-hot
/// multiclass selection.
pub fn omr_multiclass<T: Scalar>(z: &OneHotSelection, labels: &[i32], spec: &FairnessSpec) -> Result<T> {
    if z.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} selection rows for {} labels",
            z.len(),
            labels.len()
        )));
    }
    let diag = z.diagonal(labels);
    omr(&diag, spec)
}

/// Evaluates the measure named by `spec.kind` (binary selections).
pub fn evaluate<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Result<T> {
    match spec.kind {
        FairnessKind::Omr => omr(z, spec),
        FairnessKind::Fpr => fpr(z, spec),
        FairnessKind::Eo => eo(z, spec),
        FairnessKind::Dp => dp(z, spec),
        FairnessKind::F1Complement => f1_complement(z, spec),
    }
}
