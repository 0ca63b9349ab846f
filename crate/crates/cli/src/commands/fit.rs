//! `fairsel fit`: one refining run with train/test metrics.

use std::time::{Duration, Instant};

use serde_json::{json, Value};

use fairsel::data::FairnessSpec;
use fairsel::dataio::split;
use fairsel::irs::{irs_fit, irs_fit_blackbox, irs_fit_multiclass, BinaryModelKind, FittedBinary};
use fairsel::model::{predict, predict_multiclass};
use fairsel::train::ChildScorer;
use fairsel::Dataset;

use crate::common::{
    env_value, load_dataset, realized_metrics, to_indexed_binary, trace_metrics, trace_millis,
    write_result, RealizedMetrics,
};
use crate::config::{read_config, validate_fit, FitConfig, FitPlan, ModelKindName};
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg: FitConfig = read_config(&args.config)?;
    let plan = validate_fit(&cfg, args.seed, args.blackbox.is_some())?;
    if plan.model == ModelKindName::Blackbox && plan.split_ratio.is_some() {
        return Err(CliError::Config(vec![
            "blackbox runs score a fixed file; split_ratio is not supported".into(),
        ]));
    }
    let started = Instant::now();
    let data = load_dataset(&cfg.dataset, &cfg.schema)?;
    let (train_data, test_data) = match plan.split_ratio {
        Some(ratio) => {
            let s = split(&data, ratio, plan.seed)?;
            (data.subset(&s.train)?, Some(data.subset(&s.test)?))
        }
        None => (data, None),
    };
    let (metrics, millis) = run_plan(&plan, &train_data, test_data.as_ref(), args.blackbox.as_deref())?;
    let env = env_value(started.elapsed().as_millis(), &[("iter_millis", millis)]);
    write_result(&args.out, metrics, env)?;
    Ok(())
}

/// Runs one configured fit and returns (deterministic metrics, iteration
/// timings). Shared with the grid command.
pub fn run_plan(
    plan: &FitPlan,
    train_data: &Dataset,
    test_data: Option<&Dataset>,
    blackbox: Option<&str>,
) -> Result<(Value, Value), CliError> {
    run_plan_warm(plan, train_data, test_data, blackbox, None).map(|(m, t, _)| (m, t))
}

/// Like [`run_plan`] but threading a warm-start model through, for grid
/// slices.
pub fn run_plan_warm(
    plan: &FitPlan,
    train_data: &Dataset,
    test_data: Option<&Dataset>,
    blackbox: Option<&str>,
    warm: Option<&FittedBinary<f64>>,
) -> Result<(Value, Value, Option<FittedBinary<f64>>), CliError> {
    let kind_name = plan.model.as_str();
    match plan.model {
        ModelKindName::Svm | ModelKindName::Logreg | ModelKindName::Ksvm => {
            let spec = FairnessSpec::build(plan.fairness, train_data.labels(), train_data.groups())?;
            let kind = match plan.model {
                ModelKindName::Svm => BinaryModelKind::Svm,
                ModelKindName::Logreg => BinaryModelKind::Logistic,
                _ => BinaryModelKind::Kernel,
            };
            let out = irs_fit(kind, train_data, &plan.hyper, &spec, &plan.train, warm)?;
            let train_m = binary_realized(&out.model, train_data, plan)?;
            let test_m = match test_data {
                Some(td) => Some(binary_realized(&out.model, td, plan)?),
                None => None,
            };
            let metrics = metrics_doc(kind_name, plan, &train_m, test_m.as_ref(), out.objective, &out.trace, out.selection.iter().filter(|&&b| b).count());
            Ok((metrics, trace_millis(&out.trace), Some(out.model)))
        }
        ModelKindName::Multisvm => {
            let indexed = to_indexed_binary_if_needed(train_data)?;
            let spec = FairnessSpec::build(plan.fairness, indexed.labels(), indexed.groups())?;
            let out = irs_fit_multiclass(&indexed, &plan.hyper, &spec, &plan.train, None)?;
            let preds = predict_multiclass(&out.model, &indexed)?;
            let train_m = realized_metrics(&preds, indexed.labels(), indexed.groups(), plan.fairness)?;
            let test_m = match test_data {
                Some(td) => {
                    let td_indexed = to_indexed_binary_if_needed(td)?;
                    let preds = predict_multiclass(&out.model, &td_indexed)?;
                    Some(realized_metrics(&preds, td_indexed.labels(), td_indexed.groups(), plan.fairness)?)
                }
                None => None,
            };
            let selected = out.selection.diagonal(indexed.labels()).iter().filter(|&&b| b).count();
            let metrics = metrics_doc(kind_name, plan, &train_m, test_m.as_ref(), out.objective, &out.trace, selected);
            Ok((metrics, trace_millis(&out.trace), None))
        }
        ModelKindName::Blackbox => {
            let command = blackbox.ok_or_else(|| {
                CliError::Config(vec!["model \"blackbox\" needs --blackbox <command>".into()])
            })?;
            let mut endpoint = ChildScorer::spawn_shell(command, Duration::from_secs(120))?;
            let spec = FairnessSpec::build(plan.fairness, train_data.labels(), train_data.groups())?;
            let result = irs_fit_blackbox(&mut endpoint, train_data.len(), &plan.hyper, &spec);
            fairsel::train::ScorerEndpoint::<f64>::shutdown(&mut endpoint)?;
            let out = result?;
            // Realized correctness of a probability scorer: the correct
            // label is the more likely one.
            let z: Vec<bool> = out.scores.values.iter().map(|&q| q >= 0.5).collect();
            let correct = z.iter().filter(|&&b| b).count();
            let train_m = RealizedMetrics {
                accuracy: correct as f64 / train_data.len() as f64,
                fairness: fairsel::fairness::evaluate::<f64>(&z, &spec)?,
            };
            let selected = out.selection.iter().filter(|&&b| b).count();
            let metrics = metrics_doc(kind_name, plan, &train_m, None, out.objective, &out.trace, selected);
            Ok((metrics, trace_millis(&out.trace), None))
        }
    }
}

fn to_indexed_binary_if_needed(data: &Dataset) -> Result<Dataset, CliError> {
    if data.has_indexed_labels() {
        Ok(data.clone())
    } else {
        to_indexed_binary(data)
    }
}

fn binary_realized(model: &FittedBinary<f64>, data: &Dataset, plan: &crate::config::FitPlan) -> Result<RealizedMetrics, CliError> {
    let preds: Vec<i32> = match model {
        FittedBinary::Linear(m) => predict(m, data)?,
        FittedBinary::Kernel(m) => (0..data.len())
            .map(|i| if m.decision(data.row(i)) >= 0.0 { 1 } else { -1 })
            .collect(),
    };
    realized_metrics(&preds, data.labels(), data.groups(), plan.fairness)
}

fn metrics_doc(
    model: &str,
    plan: &crate::config::FitPlan,
    train_m: &RealizedMetrics,
    test_m: Option<&RealizedMetrics>,
    objective: f64,
    trace: &fairsel::IrsTrace,
    selected: usize,
) -> Value {
    let mut doc = json!({
        "model": model,
        "fairness": plan.fairness.as_str(),
        "t": plan.hyper.t,
        "lambda": plan.hyper.lambda,
        "rho": plan.hyper.rho,
        "seed": plan.seed,
        "objective": objective,
        "iterations": trace.len(),
        "selected": selected,
        "degenerate_stop": trace.degenerate_stop,
        "train_accuracy": train_m.accuracy,
        "train_fairness": train_m.fairness,
        "train_ratio": train_m.ratio(),
        "trace": trace_metrics(trace),
    });
    if let Some(tm) = test_m {
        doc["test_accuracy"] = json!(tm.accuracy);
        doc["test_fairness"] = json!(tm.fairness);
        doc["test_ratio"] = json!(tm.ratio());
    }
    doc
}
