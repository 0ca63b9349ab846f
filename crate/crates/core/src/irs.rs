//! Iterative refining: alternate exact selection with classifier refits
//! until the joint objective stops improving.
//!
//! Each refit is warm-started from the previous iterate and every trainer
//! returns its best evaluated iterate, so the recorded objective sequence
//! is non-increasing whenever the inner steps honor that contract;
//! violations are recorded in the trace rather than hidden.

use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::data::{Dataset, FairnessKind, FairnessSpec, OneHotSelection};
use crate::error::{Error, Result};
use crate::fairness;
use crate::model::{
    log_likelihood_scores, margins, predict, predict_multiclass, HyperParams, LinearModel,
    MulticlassModel, ScoreMatrix, Scores,
};
use crate::scalar::Scalar;
use crate::subselect::{self, SelectionOutcome};
use crate::train::{
    blackbox_scores, fit_hinge_weighted, fit_kernel_svm, fit_logloss_weighted,
    fit_multisvm_weighted, KernelModel, ScorerEndpoint, TrainConfig,
};

/// Slack used when checking monotonicity of the objective trace.
pub const MONOTONE_TOL: f64 = 1e-9;

/// One recorded refining iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrsIteration<T> {
    pub kappa: usize,
    pub objective: T,
    pub accuracy: T,
    pub fairness: T,
    pub selected: usize,
    pub millis: u64,
    /// Objective rose by more than the tolerance over the previous record.
    pub violation: bool,
}

#[derive(Serialize)]
struct TraceRecord {
    kappa: usize,
    objective: f64,
    accuracy: f64,
    fairness: f64,
    selected: usize,
    millis: u64,
    violation: bool,
}

/// Objective trace of one refining run.
#[derive(Debug, Clone, PartialEq)]
pub struct IrsTrace<T> {
    pub iterations: Vec<IrsIteration<T>>,
    /// The run stopped because the selection became untrainable.
    pub degenerate_stop: bool,
}

impl<T> Default for IrsTrace<T> {
    fn default() -> Self {
        Self { iterations: Vec::new(), degenerate_stop: false }
    }
}

impl<T: Scalar> IrsTrace<T> {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// Count of recorded objective increases beyond `tol`.
    pub fn monotone_violations(&self, tol: T) -> usize {
        self.iterations
            .windows(2)
            .filter(|w| w[1].objective > w[0].objective + tol)
            .count()
    }

    /// One JSON record per iteration, newline-delimited.
    pub fn to_jsonl(&self) -> String {
        self.iterations
            .iter()
            .map(|it| {
                serde_json::to_string(&TraceRecord {
                    kappa: it.kappa,
                    objective: it.objective.to_f64().unwrap_or(f64::NAN),
                    accuracy: it.accuracy.to_f64().unwrap_or(f64::NAN),
                    fairness: it.fairness.to_f64().unwrap_or(f64::NAN),
                    selected: it.selected,
                    millis: it.millis,
                    violation: it.violation,
                })
                .expect("trace record serializes")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }
}

/// Binary classifier families the driver can refit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryModelKind {
    Svm,
    Logistic,
    Kernel,
}

/// A fitted binary model of whichever family the run used.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedBinary<T> {
    Linear(LinearModel<T>),
    Kernel(KernelModel<T>),
}

impl<T: Scalar> FittedBinary<T> {
    pub fn as_linear(&self) -> Option<&LinearModel<T>> {
        match self {
            FittedBinary::Linear(m) => Some(m),
            FittedBinary::Kernel(_) => None,
        }
    }

    pub fn as_kernel(&self) -> Option<&KernelModel<T>> {
        match self {
            FittedBinary::Kernel(m) => Some(m),
            FittedBinary::Linear(_) => None,
        }
    }

    fn reg_norm_sq(&self) -> T {
        match self {
            FittedBinary::Linear(m) => m.norm_sq(),
            // The kernel formulation carries no parameter regularizer.
            FittedBinary::Kernel(_) => T::zero(),
        }
    }
}

/// Result of a binary refining run: the best-objective iterate.
#[derive(Debug, Clone)]
pub struct IrsOutcome<T> {
    pub model: FittedBinary<T>,
    pub selection: Vec<bool>,
    pub scores: Scores<T>,
    pub objective: T,
    pub trace: IrsTrace<T>,
}

/// Result of a multiclass refining run.
#[derive(Debug, Clone)]
pub struct IrsMulticlassOutcome<T> {
    pub model: MulticlassModel<T>,
    pub selection: OneHotSelection,
    pub scores: ScoreMatrix<T>,
    pub objective: T,
    pub trace: IrsTrace<T>,
}

/// Result of a black-box refining run (no in-process model).
#[derive(Debug, Clone)]
pub struct IrsBlackboxOutcome<T> {
    pub selection: Vec<bool>,
    pub scores: Scores<T>,
    pub objective: T,
    pub trace: IrsTrace<T>,
}

/// Per-point objective weights of a selection: `1/N` for the group
/// measures, class-size weights for the F1 objective.
pub fn selection_weights<T: Scalar>(z: &[bool], spec: &FairnessSpec) -> Vec<T> {
    let mut weights = vec![T::zero(); z.len()];
    match spec.kind {
        FairnessKind::F1Complement => {
            let wp = T::one() / T::from_count(spec.n_plus.len());
            for &i in &spec.n_plus {
                if z[i] {
                    weights[i] = wp;
                }
            }
            if !spec.n_minus.is_empty() {
                let wm = T::one() / T::from_count(spec.n_minus.len());
                for &i in &spec.n_minus {
                    if z[i] {
                        weights[i] = wm;
                    }
                }
            }
        }
        _ => {
            let w = T::one() / T::from_count(z.len());
            for (wi, &zi) in weights.iter_mut().zip(z) {
                if zi {
                    *wi = w;
                }
            }
        }
    }
    weights
}

fn refit_binary<T: Scalar>(
    kind: BinaryModelKind,
    data: &Dataset<T>,
    weights: &[T],
    h: &HyperParams<T>,
    cfg: &TrainConfig<T>,
    prev: Option<&FittedBinary<T>>,
) -> Result<(FittedBinary<T>, Scores<T>)> {
    match kind {
        BinaryModelKind::Svm => {
            let init = prev.and_then(FittedBinary::as_linear);
            let model = fit_hinge_weighted(data, weights, h.lambda, cfg, init)?;
            let scores = margins(&model, data)?;
            Ok((FittedBinary::Linear(model), scores))
        }
        BinaryModelKind::Logistic => {
            let init = prev.and_then(FittedBinary::as_linear);
            let model = fit_logloss_weighted(data, weights, h.lambda, cfg, init)?;
            let scores = log_likelihood_scores(&model, data)?;
            Ok((FittedBinary::Linear(model), scores))
        }
        BinaryModelKind::Kernel => {
            let init = prev.and_then(FittedBinary::as_kernel);
            let (model, scores) = fit_kernel_svm(data, weights, cfg, init)?;
            Ok((FittedBinary::Kernel(model), scores))
        }
    }
}

/// Small seeded start for the vanilla fit so multi-start runs differ.
fn seeded_start<T: Scalar>(n_features: usize, seed: u64) -> LinearModel<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = T::from_f64_lossy(1e-2);
    let w = (0..n_features)
        .map(|_| scale * T::from_f64_lossy(rng.sample::<f64, _>(StandardNormal)))
        .collect();
    let b = scale * T::from_f64_lossy(rng.sample::<f64, _>(StandardNormal));
    LinearModel { w, b }
}

fn binary_accuracy<T: Scalar>(kind: BinaryModelKind, model: &FittedBinary<T>, data: &Dataset<T>) -> Result<T> {
    let correct = match (kind, model) {
        (BinaryModelKind::Kernel, FittedBinary::Kernel(m)) => (0..data.len())
            .filter(|&i| {
                let pred = if m.decision(data.row(i)) >= T::zero() { 1 } else { -1 };
                pred == data.labels()[i]
            })
            .count(),
        (_, FittedBinary::Linear(m)) => {
            let preds = predict(m, data)?;
            preds.iter().zip(data.labels()).filter(|(p, y)| p == y).count()
        }
        _ => return Err(Error::InvalidInput("model/kind mismatch".into())),
    };
    Ok(T::from_count(correct) / T::from_count(data.len()))
}

/// Runs the refining loop for a binary classifier family.
///
/// Starts from vanilla training on all data (or from `init` when given),
/// thresholds the initial scores into a selection, then alternates the
/// exact selection step with a warm-started refit. Stops when the
/// objective improves by at most `h.delta`, at `h.max_iter`, or when the
/// selection becomes untrainable (flagged in the trace). Returns the
/// iterate with the smallest recorded objective.
pub fn irs_fit<T: Scalar>(
    kind: BinaryModelKind,
    data: &Dataset<T>,
    h: &HyperParams<T>,
    spec: &FairnessSpec,
    cfg: &TrainConfig<T>,
    init: Option<&FittedBinary<T>>,
) -> Result<IrsOutcome<T>> {
    h.validate()?;
    cfg.validate()?;
    if spec.n_points() != data.len() {
        return Err(Error::DimensionMismatch("spec built for a different dataset".into()));
    }
    let started = Instant::now();
    let all = vec![true; data.len()];
    let (mut model, mut scores) = match init {
        Some(m) => {
            let scores = match (kind, m) {
                (BinaryModelKind::Svm, FittedBinary::Linear(lm)) => margins(lm, data)?,
                (BinaryModelKind::Logistic, FittedBinary::Linear(lm)) => log_likelihood_scores(lm, data)?,
                (BinaryModelKind::Kernel, FittedBinary::Kernel(km)) => km.margins(data)?,
                _ => return Err(Error::InvalidInput("warm start does not match model kind".into())),
            };
            (m.clone(), scores)
        }
        None => {
            let weights = selection_weights(&all, spec);
            let start = FittedBinary::Linear(seeded_start(data.n_features(), cfg.seed));
            let prev = match kind {
                BinaryModelKind::Kernel => None,
                _ => Some(&start),
            };
            refit_binary(kind, data, &weights, h, cfg, prev)?
        }
    };

    let mut z: Vec<bool> = (0..data.len()).map(|i| scores.is_correct(i, h.t)).collect();
    let mut trace = IrsTrace::default();
    let record = |trace: &mut IrsTrace<T>,
                      kappa: usize,
                      objective: T,
                      accuracy: T,
                      fair: T,
                      selected: usize| {
        let violation = trace
            .iterations
            .last()
            .map_or(false, |prev| objective > prev.objective + T::from_f64_lossy(MONOTONE_TOL));
        trace.iterations.push(IrsIteration {
            kappa,
            objective,
            accuracy,
            fairness: fair,
            selected,
            millis: started.elapsed().as_millis() as u64,
            violation,
        });
    };

    let objective_of = |scores: &Scores<T>, z: &[bool], model: &FittedBinary<T>| -> Result<T> {
        Ok(subselect::selection_value(scores, z, spec, h)? + h.lambda * model.reg_norm_sq())
    };

    let mut best_obj = objective_of(&scores, &z, &model)?;
    let mut best = (model.clone(), z.clone(), scores.clone());
    record(
        &mut trace,
        0,
        best_obj,
        binary_accuracy(kind, &model, data)?,
        fairness::evaluate(&z, spec)?,
        z.iter().filter(|&&b| b).count(),
    );

    let mut prev_obj = best_obj;
    for kappa in 1..=h.max_iter {
        let SelectionOutcome { z: z_next, .. } = subselect::select(&scores, spec, h)?;
        z = z_next;
        if !z.iter().any(|&b| b) {
            trace.degenerate_stop = true;
            break;
        }
        let weights = selection_weights(&z, spec);
        match refit_binary(kind, data, &weights, h, cfg, Some(&model)) {
            Ok((m, s)) => {
                model = m;
                scores = s;
            }
            Err(Error::OneClassSelection) | Err(Error::EmptySelection) => {
                trace.degenerate_stop = true;
                break;
            }
            Err(e) => return Err(e),
        }
        let obj = objective_of(&scores, &z, &model)?;
        record(
            &mut trace,
            kappa,
            obj,
            binary_accuracy(kind, &model, data)?,
            fairness::evaluate(&z, spec)?,
            z.iter().filter(|&&b| b).count(),
        );
        if obj < best_obj {
            best_obj = obj;
            best = (model.clone(), z.clone(), scores.clone());
        }
        if prev_obj - obj <= h.delta {
            break;
        }
        prev_obj = obj;
    }

    let (model, selection, scores) = best;
    Ok(IrsOutcome { model, selection, scores, objective: best_obj, trace })
}

/// Refining loop for the multiclass hinge model with the group measure.
pub fn irs_fit_multiclass<T: Scalar>(
    data: &Dataset<T>,
    h: &HyperParams<T>,
    spec: &FairnessSpec,
    cfg: &TrainConfig<T>,
    init: Option<&MulticlassModel<T>>,
) -> Result<IrsMulticlassOutcome<T>> {
    h.validate()?;
    cfg.validate()?;
    if spec.kind != FairnessKind::Omr {
        return Err(Error::InvalidInput(
            "multiclass refining supports the overall-misclassification measure".into(),
        ));
    }
    let started = Instant::now();
    let labels = data.labels().to_vec();
    let k = data.class_count();
    let all_correct = OneHotSelection::new(labels.iter().map(|&y| y as usize).collect(), k)?;
    let (mut model, mut scores) = match init {
        Some(m) => (m.clone(), crate::model::multiclass_margins(m, data)?),
        None => fit_multisvm_weighted(data, &all_correct, h, cfg, None)?,
    };
    let mut z = threshold_multiclass(&scores, &labels, h.t);
    let objective_of = |scores: &ScoreMatrix<T>, z: &OneHotSelection, model: &MulticlassModel<T>| -> Result<T> {
        Ok(subselect::multiclass_selection_value(scores, z, &labels, spec, h)? + h.lambda * model.norm_sq())
    };
    let accuracy_of = |model: &MulticlassModel<T>| -> Result<T> {
        let preds = predict_multiclass(model, data)?;
        let correct = preds.iter().zip(&labels).filter(|(p, y)| p == y).count();
        Ok(T::from_count(correct) / T::from_count(data.len()))
    };

    let mut trace = IrsTrace::default();
    let mut best_obj = objective_of(&scores, &z, &model)?;
    let mut best = (model.clone(), z.clone(), scores.clone());
    push_record(&mut trace, 0, best_obj, accuracy_of(&model)?, fairness::omr_multiclass(&z, &labels, spec)?, diag_count(&z, &labels), &started);

    let mut prev_obj = best_obj;
    for kappa in 1..=h.max_iter {
        let (z_next, _) = subselect::select_omr_multiclass(&scores, &labels, spec, h)?;
        z = z_next;
        let (m, s) = fit_multisvm_weighted(data, &z, h, cfg, Some(&model))?;
        model = m;
        scores = s;
        let obj = objective_of(&scores, &z, &model)?;
        push_record(&mut trace, kappa, obj, accuracy_of(&model)?, fairness::omr_multiclass(&z, &labels, spec)?, diag_count(&z, &labels), &started);
        if obj < best_obj {
            best_obj = obj;
            best = (model.clone(), z.clone(), scores.clone());
        }
        if prev_obj - obj <= h.delta {
            break;
        }
        prev_obj = obj;
    }
    let (model, selection, scores) = best;
    Ok(IrsMulticlassOutcome { model, selection, scores, objective: best_obj, trace })
}

/// Refining loop for a black-box scorer: selection happens in-process, the
/// endpoint retrains on the selected indices and scores all points.
pub fn irs_fit_blackbox<T: Scalar>(
    endpoint: &mut dyn ScorerEndpoint<T>,
    n_points: usize,
    h: &HyperParams<T>,
    spec: &FairnessSpec,
) -> Result<IrsBlackboxOutcome<T>> {
    h.validate()?;
    if spec.n_points() != n_points {
        return Err(Error::DimensionMismatch("spec built for a different dataset".into()));
    }
    let started = Instant::now();
    let all: Vec<usize> = (0..n_points).collect();
    let mut scores = blackbox_scores(endpoint, &all, n_points)?;
    let mut z: Vec<bool> = (0..n_points).map(|i| scores.is_correct(i, h.t)).collect();
    let half = T::from_f64_lossy(0.5);
    let accuracy_of = |scores: &Scores<T>| -> T {
        let confident = scores.values.iter().filter(|&&u| u >= half).count();
        T::from_count(confident) / T::from_count(n_points)
    };

    let mut trace = IrsTrace::default();
    let mut best_obj = subselect::selection_value(&scores, &z, spec, h)?;
    let mut best = (z.clone(), scores.clone());
    push_record(&mut trace, 0, best_obj, accuracy_of(&scores), fairness::evaluate(&z, spec)?, z.iter().filter(|&&b| b).count(), &started);

    let mut prev_obj = best_obj;
    for kappa in 1..=h.max_iter {
        let SelectionOutcome { z: z_next, .. } = subselect::select(&scores, spec, h)?;
        z = z_next;
        let selected: Vec<usize> = (0..n_points).filter(|&i| z[i]).collect();
        if selected.is_empty() {
            trace.degenerate_stop = true;
            break;
        }
        match blackbox_scores(endpoint, &selected, n_points) {
            Ok(s) => scores = s,
            Err(Error::EmptySelection) | Err(Error::OneClassSelection) => {
                trace.degenerate_stop = true;
                break;
            }
            Err(e) => return Err(e),
        }
        let obj = subselect::selection_value(&scores, &z, spec, h)?;
        push_record(&mut trace, kappa, obj, accuracy_of(&scores), fairness::evaluate(&z, spec)?, z.iter().filter(|&&b| b).count(), &started);
        if obj < best_obj {
            best_obj = obj;
            best = (z.clone(), scores.clone());
        }
        if prev_obj - obj <= h.delta {
            break;
        }
        prev_obj = obj;
    }
    let (selection, scores) = best;
    Ok(IrsBlackboxOutcome { selection, scores, objective: best_obj, trace })
}

fn push_record<T: Scalar>(
    trace: &mut IrsTrace<T>,
    kappa: usize,
    objective: T,
    accuracy: T,
    fair: T,
    selected: usize,
    started: &Instant,
) {
    let violation = trace
        .iterations
        .last()
        .map_or(false, |prev| objective > prev.objective + T::from_f64_lossy(MONOTONE_TOL));
    trace.iterations.push(IrsIteration {
        kappa,
        objective,
        accuracy,
        fairness: fair,
        selected,
        millis: started.elapsed().as_millis() as u64,
        violation,
    });
}

fn threshold_multiclass<T: Scalar>(scores: &ScoreMatrix<T>, labels: &[i32], t: T) -> OneHotSelection {
    let k = scores.k();
    let hot: Vec<usize> = (0..scores.len())
        .map(|i| {
            let yi = labels[i] as usize;
            // Correct when every pairwise violation is within the threshold.
            let worst = (1..=k)
                .filter(|&j| j != yi)
                .map(|j| scores.get(i, j))
                .fold(T::neg_infinity(), T::max);
            if worst <= t {
                yi
            } else {
                // Hot at the largest-margin wrong label, ties to smallest.
                let mut best_j = 0;
                let mut best_v = T::neg_infinity();
                for j in 1..=k {
                    if j != yi && scores.get(i, j) > best_v {
                        best_v = scores.get(i, j);
                        best_j = j;
                    }
                }
                best_j
            }
        })
        .collect();
    OneHotSelection::new(hot, k).expect("labels in range")
}

fn diag_count(z: &OneHotSelection, labels: &[i32]) -> usize {
    z.diagonal(labels).iter().filter(|&&b| b).count()
}

/// Number of points on which two selections disagree.
pub fn support_symmetric_difference(a: &[bool], b: &[bool]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch("selections differ in length".into()));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count())
}

/// Approximation-bound report: the refined objective must lie between the
/// exact optimum and the optimum plus `M_u / N` times the support
/// disagreement.
pub fn approximation_gap<T: Scalar>(
    h_hat: T,
    v_star: T,
    z_hat: &[bool],
    z_star: &[bool],
    m_u: T,
    n: usize,
) -> Result<(T, bool)> {
    let diff = support_symmetric_difference(z_hat, z_star)?;
    let bound = v_star + m_u / T::from_count(n) * T::from_count(diff);
    let tol = T::from_f64_lossy(MONOTONE_TOL);
    let holds = v_star - tol <= h_hat && h_hat <= bound + tol;
    Ok((bound, holds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_binary(seed: u64, n: usize) -> Dataset<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let feats: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let labels: Vec<i32> = (0..n)
                .map(|i| if feats[2 * i] + 0.5 * feats[2 * i + 1] + rng.gen_range(-0.3..0.3) > 0.0 { 1 } else { -1 })
                .collect();
            let groups: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            let mut cells = [0usize; 4];
            for i in 0..n {
                cells[(labels[i] == 1) as usize * 2 + (groups[i] == 1) as usize] += 1;
            }
            if cells.iter().all(|&c| c > 0) {
                return Dataset::binary(feats, 2, labels, groups).unwrap();
            }
        }
    }

    #[test]
    fn trace_is_monotone_for_svm() {
        for seed in 0..5 {
            let data = random_binary(seed, 40);
            let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
            let h = HyperParams::new(1.0, 0.05, 0.5).with_stopping(1e-7, 30);
            let cfg = TrainConfig { iterations: 300, seed, ..TrainConfig::default_for(0.05) };
            let out = irs_fit(BinaryModelKind::Svm, &data, &h, &spec, &cfg, None).unwrap();
            assert_eq!(out.trace.monotone_violations(1e-9), 0, "seed {seed}");
            assert!(out.trace.len() >= 1);
        }
    }

    #[test]
    fn rho_zero_first_selection_is_thresholding() {
        let data = random_binary(3, 30);
        let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(1.0, 0.1, 0.0).with_stopping(1e-7, 10);
        let cfg = TrainConfig { iterations: 200, ..TrainConfig::default_for(0.1) };
        let out = irs_fit(BinaryModelKind::Svm, &data, &h, &spec, &cfg, None).unwrap();
        // With no penalty the best selection is score thresholding.
        let want: Vec<bool> = (0..data.len()).map(|i| out.scores.values[i] - h.t < 0.0).collect();
        let got_value = subselect::selection_value(&out.scores, &out.selection, &spec, &h).unwrap();
        let want_value = subselect::selection_value(&out.scores, &want, &spec, &h).unwrap();
        assert!((got_value - want_value).abs() <= 1e-9);
    }

    #[test]
    fn reruns_are_bit_identical() {
        let data = random_binary(9, 36);
        let spec = FairnessSpec::build(FairnessKind::Eo, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(0.8, 0.02, 1.0).with_stopping(1e-7, 20);
        let cfg = TrainConfig { iterations: 150, seed: 42, ..TrainConfig::default_for(0.02) };
        let a = irs_fit(BinaryModelKind::Logistic, &data, &h, &spec, &cfg, None).unwrap();
        let b = irs_fit(BinaryModelKind::Logistic, &data, &h, &spec, &cfg, None).unwrap();
        assert_eq!(a.selection, b.selection);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
        let ta: Vec<f64> = a.trace.iterations.iter().map(|i| i.objective).collect();
        let tb: Vec<f64> = b.trace.iterations.iter().map(|i| i.objective).collect();
        assert_eq!(ta, tb);
    }

    #[test]
    fn warm_start_never_ends_worse_than_its_source() {
        let data = random_binary(5, 30);
        let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
        let cfg = TrainConfig { iterations: 200, ..TrainConfig::default_for(0.05) };
        let h_small = HyperParams::new(1.0, 0.05, 0.1).with_stopping(1e-7, 20);
        let first = irs_fit(BinaryModelKind::Svm, &data, &h_small, &spec, &cfg, None).unwrap();
        let h_big = HyperParams::new(1.0, 0.05, 1.0).with_stopping(1e-7, 20);
        let warm = irs_fit(BinaryModelKind::Svm, &data, &h_big, &spec, &cfg, Some(&first.model)).unwrap();
        // The warm start is recorded as iteration zero; the final result
        // cannot be worse than that starting point.
        assert!(warm.objective <= warm.trace.iterations[0].objective + 1e-9);
    }

    #[test]
    fn approximation_gap_reports() {
        let z = vec![true, false, true, false];
        let (bound, holds) = approximation_gap::<f64>(1.0, 1.0, &z, &z, 4.0, 4).unwrap();
        assert_eq!(bound, 1.0);
        assert!(holds);
        // Three of twelve points differ with M_u = 4: slack of exactly 1.
        let a = vec![true; 12];
        let mut b = vec![true; 12];
        b[0] = false;
        b[1] = false;
        b[2] = false;
        let (bound, holds) = approximation_gap::<f64>(1.5, 1.0, &a, &b, 4.0, 12).unwrap();
        assert!((bound - 2.0).abs() < 1e-12);
        assert!(holds);
        let (_, holds) = approximation_gap::<f64>(2.4, 1.0, &a, &b, 4.0, 12).unwrap();
        assert!(!holds, "objective above the bound must be flagged");
        assert!(approximation_gap::<f64>(1.0, 1.0, &a, &z, 4.0, 12).is_err());
    }

    #[test]
    fn multiclass_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 30;
        let feats: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<i32> = (0..n).map(|_| rng.gen_range(1..=3)).collect();
        let groups: Vec<i8> = (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let data = Dataset::new(feats, 2, labels, groups, 3).unwrap();
        let spec = FairnessSpec::build(FairnessKind::Omr, data.labels(), data.groups()).unwrap();
        let h = HyperParams::new(0.8, 0.05, 0.4).with_stopping(1e-7, 15);
        let cfg = TrainConfig { iterations: 200, ..TrainConfig::default_for(0.05) };
        let out = irs_fit_multiclass(&data, &h, &spec, &cfg, None).unwrap();
        assert_eq!(out.trace.monotone_violations(1e-9), 0);
    }
}
