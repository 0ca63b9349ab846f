//! Datasets, protected-group index partitions, and selection indicators.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A classification dataset with one binary sensitive attribute.
///
/// Labels are `{-1, +1}` for binary problems and `1..=K` for multiclass;
/// groups are always `{-1, +1}`. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    features: Vec<T>,
    n_features: usize,
    labels: Vec<i32>,
    groups: Vec<i8>,
    class_count: usize,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a binary dataset (labels in `{-1, +1}`, `class_count = 2`).
    pub fn binary(features: Vec<T>, n_features: usize, labels: Vec<i32>, groups: Vec<i8>) -> Result<Self> {
        Self::new(features, n_features, labels, groups, 2)
    }

    /// Builds a dataset with `class_count` classes. Binary datasets use
    /// labels `{-1, +1}`; multiclass datasets use labels `1..=class_count`.
    pub fn new(
        features: Vec<T>,
        n_features: usize,
        labels: Vec<i32>,
        groups: Vec<i8>,
        class_count: usize,
    ) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!("need at least 2 points, got {n}")));
        }
        if n_features == 0 {
            return Err(Error::InvalidInput("need at least 1 feature".into()));
        }
        if features.len() != n * n_features {
            return Err(Error::DimensionMismatch(format!(
                "feature buffer holds {} values, expected {} x {}",
                features.len(),
                n,
                n_features
            )));
        }
        if groups.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} groups for {} points",
                groups.len(),
                n
            )));
        }
        if class_count < 2 {
            return Err(Error::InvalidInput("class_count must be at least 2".into()));
        }
        for (i, &y) in labels.iter().enumerate() {
            // Two-class data may use either the signed convention {-1, +1}
            // or the indexed convention {1, 2}.
            let ok = if class_count == 2 {
                y == -1 || y == 1 || y == 2
            } else {
                y >= 1 && y as usize <= class_count
            };
            if !ok {
                return Err(Error::InvalidInput(format!("label {y} out of range at point {i}")));
            }
        }
        if groups.iter().any(|&g| g != -1 && g != 1) {
            return Err(Error::InvalidInput("groups must be -1 or +1".into()));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("features must be finite".into()));
        }
        Ok(Self { features, n_features, labels, groups, class_count })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires N >= 2
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn is_binary(&self) -> bool {
        self.class_count == 2
    }

    /// Labels follow the signed convention `{-1, +1}`.
    pub fn has_signed_labels(&self) -> bool {
        self.labels.iter().all(|&y| y == -1 || y == 1)
    }

    /// Labels follow the indexed convention `1..=K`.
    pub fn has_indexed_labels(&self) -> bool {
        self.labels.iter().all(|&y| y >= 1 && y as usize <= self.class_count)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn labels(&self) -> &[i32] {
        &self.labels
    }

    pub fn groups(&self) -> &[i8] {
        &self.groups
    }

    pub fn features(&self) -> &[T] {
        &self.features
    }

    /// Largest Euclidean row norm, used by the big-M constant.
    pub fn max_row_norm(&self) -> T {
        let mut best = T::zero();
        for i in 0..self.len() {
            let s: T = self.row(i).iter().map(|&v| v * v).sum();
            let norm = s.sqrt();
            if norm > best {
                best = norm;
            }
        }
        best
    }

    /// New dataset containing the given rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        let mut groups = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidInput(format!("row index {i} out of range")));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
            groups.push(self.groups[i]);
        }
        Self::new(features, self.n_features, labels, groups, self.class_count)
    }
}

/// Which statistical measure a [`FairnessSpec`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FairnessKind {
    /// Absolute difference of the groups' misclassification rates.
    Omr,
    /// Restricted to true-negative-label points.
    Fpr,
    /// Equal opportunity: restricted to true-positive-label points.
    Eo,
    /// Absolute difference of positive-prediction rates.
    Dp,
    /// One minus the F1 score, for unbalanced data.
    F1Complement,
}

impl FairnessKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FairnessKind::Omr => "omr",
            FairnessKind::Fpr => "fpr",
            FairnessKind::Eo => "eo",
            FairnessKind::Dp => "dp",
            FairnessKind::F1Complement => "f1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "omr" => Ok(FairnessKind::Omr),
            "fpr" => Ok(FairnessKind::Fpr),
            "eo" => Ok(FairnessKind::Eo),
            "dp" => Ok(FairnessKind::Dp),
            "f1" => Ok(FairnessKind::F1Complement),
            _ => Err(Error::InvalidInput(format!("unknown fairness kind {s:?}"))),
        }
    }
}

/// Materialized index partitions a fairness measure needs.
///
/// Built once per `(labels, groups)` pair; the selection algorithms and
/// measure evaluations index into these sorted lists instead of rescanning
/// the dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessSpec {
    pub kind: FairnessKind,
    /// Points with group +1 / group -1.
    pub d_plus: Vec<usize>,
    pub d_minus: Vec<usize>,
    /// Group/label cells: `d_pm` is group +1 with label -1, etc.
    pub d_pp: Vec<usize>,
    pub d_pm: Vec<usize>,
    pub d_mp: Vec<usize>,
    pub d_mm: Vec<usize>,
    /// Points with label +1 / label -1 (used by the F1 measure).
    pub n_plus: Vec<usize>,
    pub n_minus: Vec<usize>,
    n_points: usize,
}

impl FairnessSpec {
    /// Builds the partitions from per-point labels and groups.
    ///
    /// For multiclass data the label sign is irrelevant to OMR, which is the
    /// only supported multiclass measure; pass the labels as-is (any label
    /// is treated as "positive" only for the binary-specific subsets).
    pub fn build(kind: FairnessKind, labels: &[i32], groups: &[i8]) -> Result<Self> {
        if labels.len() != groups.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels vs {} groups",
                labels.len(),
                groups.len()
            )));
        }
        let n = labels.len();
        let mut spec = FairnessSpec {
            kind,
            d_plus: Vec::new(),
            d_minus: Vec::new(),
            d_pp: Vec::new(),
            d_pm: Vec::new(),
            d_mp: Vec::new(),
            d_mm: Vec::new(),
            n_plus: Vec::new(),
            n_minus: Vec::new(),
            n_points: n,
        };
        for i in 0..n {
            let pos = labels[i] == 1;
            if groups[i] == 1 {
                spec.d_plus.push(i);
                if pos {
                    spec.d_pp.push(i);
                } else {
                    spec.d_pm.push(i);
                }
            } else {
                spec.d_minus.push(i);
                if pos {
                    spec.d_mp.push(i);
                } else {
                    spec.d_mm.push(i);
                }
            }
            if pos {
                spec.n_plus.push(i);
            } else {
                spec.n_minus.push(i);
            }
        }
        spec.check_nonempty()?;
        Ok(spec)
    }

    fn check_nonempty(&self) -> Result<()> {
        match self.kind {
            FairnessKind::Omr => {
                if self.d_plus.is_empty() {
                    return Err(Error::EmptyGroup("group +1"));
                }
                if self.d_minus.is_empty() {
                    return Err(Error::EmptyGroup("group -1"));
                }
            }
            FairnessKind::Fpr => {
                if self.d_pm.is_empty() {
                    return Err(Error::EmptyGroup("group +1 with label -1"));
                }
                if self.d_mm.is_empty() {
                    return Err(Error::EmptyGroup("group -1 with label -1"));
                }
            }
            FairnessKind::Eo => {
                if self.d_pp.is_empty() {
                    return Err(Error::EmptyGroup("group +1 with label +1"));
                }
                if self.d_mp.is_empty() {
                    return Err(Error::EmptyGroup("group -1 with label +1"));
                }
            }
            FairnessKind::Dp => {
                if self.d_plus.is_empty() {
                    return Err(Error::EmptyGroup("group +1"));
                }
                if self.d_minus.is_empty() {
                    return Err(Error::EmptyGroup("group -1"));
                }
            }
            FairnessKind::F1Complement => {
                if self.n_plus.is_empty() {
                    return Err(Error::EmptyGroup("positive-label points"));
                }
            }
        }
        Ok(())
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }
}

/// One-hot label assignment for multiclass selection: row `i` is hot at
/// `hot[i]` (a label in `1..=k`), so each row sums to exactly one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneHotSelection {
    hot: Vec<usize>,
    k: usize,
}

impl OneHotSelection {
    pub fn new(hot: Vec<usize>, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidInput("one-hot selection needs K >= 2".into()));
        }
        if let Some(&bad) = hot.iter().find(|&&j| j < 1 || j > k) {
            return Err(Error::InvalidInput(format!("hot label {bad} outside 1..={k}")));
        }
        Ok(Self { hot, k })
    }

    pub fn len(&self) -> usize {
        self.hot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hot.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Hot label (1-based) of row `i`.
    pub fn hot(&self, i: usize) -> usize {
        self.hot[i]
    }

    pub fn hots(&self) -> &[usize] {
        &self.hot
    }

    /// Indicator `z[i][j]` for a 1-based label `j`.
    pub fn indicator(&self, i: usize, label: usize) -> bool {
        self.hot[i] == label
    }

    /// Binary vector of the diagonal indicators `z[i][y_i]`.
    pub fn diagonal(&self, labels: &[i32]) -> Vec<bool> {
        self.hot
            .iter()
            .zip(labels)
            .map(|(&h, &y)| h as i32 == y)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_rejects_bad_shapes() {
        let r = Dataset::<f64>::binary(vec![1.0, 2.0], 2, vec![1], vec![1]);
        assert!(r.is_err(), "single point must be rejected");
        let r = Dataset::<f64>::binary(vec![1.0, 2.0, 3.0], 2, vec![1, -1], vec![1, -1]);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
        let r = Dataset::<f64>::binary(vec![1.0, f64::NAN], 1, vec![1, -1], vec![1, -1]);
        assert!(r.is_err(), "NaN features rejected");
        let r = Dataset::<f64>::binary(vec![1.0, 2.0], 1, vec![1, 3], vec![1, -1]);
        assert!(r.is_err(), "label out of range");
    }

    #[test]
    fn spec_partitions_are_consistent() {
        let labels = vec![1, 1, -1, -1, 1, -1];
        let groups = vec![1, -1, 1, -1, 1, 1];
        let spec = FairnessSpec::build(FairnessKind::Omr, &labels, &groups).unwrap();
        assert_eq!(spec.d_plus, vec![0, 2, 4, 5]);
        assert_eq!(spec.d_minus, vec![1, 3]);
        assert_eq!(spec.d_pp, vec![0, 4]);
        assert_eq!(spec.d_pm, vec![2, 5]);
        assert_eq!(spec.d_mp, vec![1]);
        assert_eq!(spec.d_mm, vec![3]);
        // D+ and D- partition [N].
        let mut all: Vec<usize> = spec.d_plus.iter().chain(&spec.d_minus).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..6).collect::<Vec<_>>());
        // Signed cells refine the group split.
        assert_eq!(spec.d_pp.len() + spec.d_pm.len(), spec.d_plus.len());
        assert_eq!(spec.d_mp.len() + spec.d_mm.len(), spec.d_minus.len());
    }

    #[test]
    fn spec_rejects_empty_groups() {
        let labels = vec![1, -1];
        let groups = vec![1, 1];
        assert!(matches!(
            FairnessSpec::build(FairnessKind::Omr, &labels, &groups),
            Err(Error::EmptyGroup(_))
        ));
        // FPR needs negative-label points in both groups.
        let labels = vec![1, -1];
        let groups = vec![1, -1];
        assert!(FairnessSpec::build(FairnessKind::Fpr, &labels, &groups).is_err());
        // F1 needs at least one positive.
        let labels = vec![-1, -1];
        assert!(FairnessSpec::build(FairnessKind::F1Complement, &labels, &groups).is_err());
    }

    #[test]
    fn one_hot_rows_sum_to_one_by_construction() {
        let z = OneHotSelection::new(vec![1, 2, 3, 1], 3).unwrap();
        for i in 0..z.len() {
            let total: usize = (1..=3).map(|j| z.indicator(i, j) as usize).sum();
            assert_eq!(total, 1);
        }
        assert!(OneHotSelection::new(vec![0, 1], 3).is_err());
        assert!(OneHotSelection::new(vec![4, 1], 3).is_err());
    }
}
