//! Shared command plumbing: dataset loading, realized-correctness metrics,
//! and the result-document split between deterministic metrics and
//! environment facts.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use fairsel::data::{Dataset as GenericDataset, FairnessKind, FairnessSpec};
use fairsel::dataio::{load_csv, Schema};
use fairsel::{fairness, Dataset};

use crate::CliError;

pub fn load_dataset(dataset: &Path, schema: &Path) -> Result<Dataset, CliError> {
    let schema = Schema::from_path(schema)?;
    let (data, _) = load_csv::<f64>(dataset, &schema)?;
    Ok(data)
}

/// Converts signed binary labels to the indexed convention (1 = positive,
/// 2 = negative) for the multiclass pipeline.
pub fn to_indexed_binary(data: &Dataset) -> Result<Dataset, CliError> {
    let labels: Vec<i32> = data.labels().iter().map(|&y| if y == 1 { 1 } else { 2 }).collect();
    Ok(GenericDataset::new(
        data.features().to_vec(),
        data.n_features(),
        labels,
        data.groups().to_vec(),
        2,
    )?)
}

/// Accuracy and realized fairness of hard predictions on a point set: the
/// correctness indicators (prediction equals label) are plugged into the
/// same measure the training objective penalizes.
pub struct RealizedMetrics {
    pub accuracy: f64,
    pub fairness: f64,
}

impl RealizedMetrics {
    /// The accuracy-to-fairness trade-off ratio; unbounded when perfectly
    /// fair.
    pub fn ratio(&self) -> Option<f64> {
        if self.fairness > 0.0 {
            Some(self.accuracy / self.fairness)
        } else {
            None
        }
    }
}

pub fn realized_metrics(
    predictions: &[i32],
    labels: &[i32],
    groups: &[i8],
    kind: FairnessKind,
) -> Result<RealizedMetrics, CliError> {
    let z: Vec<bool> = predictions.iter().zip(labels).map(|(p, y)| p == y).collect();
    let correct = z.iter().filter(|&&b| b).count();
    let spec = FairnessSpec::build(kind, labels, groups)?;
    let fairness = fairness::evaluate::<f64>(&z, &spec)?;
    Ok(RealizedMetrics { accuracy: correct as f64 / labels.len() as f64, fairness })
}

/// Result document: `metrics` is deterministic for a fixed configuration
/// and seed; timings and versions live in `env`.
#[derive(Serialize)]
pub struct ResultDoc {
    pub metrics: Value,
    pub env: Value,
}

pub fn write_result(path: &Path, metrics: Value, env: Value) -> Result<(), CliError> {
    let doc = ResultDoc { metrics, env };
    let text = serde_json::to_string_pretty(&doc).expect("result serializes");
    std::fs::write(path, text)?;
    Ok(())
}

pub fn env_value(wall_ms: u128, extra: &[(&str, Value)]) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("wall_ms".into(), Value::from(wall_ms as u64));
    map.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
    for (k, v) in extra {
        map.insert((*k).into(), v.clone());
    }
    Value::Object(map)
}

/// Trace records without timing, for the deterministic metrics side.
pub fn trace_metrics(trace: &fairsel::IrsTrace) -> Value {
    Value::Array(
        trace
            .iterations
            .iter()
            .map(|it| {
                serde_json::json!({
                    "kappa": it.kappa,
                    "objective": it.objective,
                    "accuracy": it.accuracy,
                    "fairness": it.fairness,
                    "selected": it.selected,
                    "violation": it.violation,
                })
            })
            .collect(),
    )
}

pub fn trace_millis(trace: &fairsel::IrsTrace) -> Value {
    Value::Array(trace.iterations.iter().map(|it| Value::from(it.millis)).collect())
}
