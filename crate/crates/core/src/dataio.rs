//! Dataset ingestion, preprocessing, splits, and the synthetic generator.
//!
//! CSV files are RFC-4180 with a header row, UTF-8. The schema file is
//! JSON: `{label_col, positive_label, group_col, positive_group,
//! categorical_cols[]}` (an optional `classes` list switches the label
//! column to multiclass, mapping the listed values to labels `1..=K`).

use std::collections::BTreeMap;
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schema {
    pub label_col: String,
    #[serde(default)]
    pub positive_label: String,
    pub group_col: String,
    pub positive_group: String,
    #[serde(default)]
    pub categorical_cols: Vec<String>,
    /// When present, label values map to classes `1..=K` by position and
    /// `positive_label` is ignored.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<String>>,
}

impl Schema {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("schema parse: {e}")))
    }
}

/// Fitted preprocessing state: per-column min/max for numeric columns and
/// the observed level set of each categorical column. Applying the encoder
/// to a file with new categorical levels is an error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Encoder {
    pub schema: Schema,
    /// Numeric feature columns in header order.
    pub numeric_cols: Vec<String>,
    /// (min, max) per numeric column.
    pub ranges: Vec<(f64, f64)>,
    /// Sorted level lists per categorical column.
    pub levels: BTreeMap<String, Vec<String>>,
}

impl Encoder {
    /// Output feature names, fixing the column order: numeric columns in
    /// header order, then one-hot columns sorted by (column, level).
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = self.numeric_cols.clone();
        for col in &self.schema.categorical_cols {
            if let Some(levels) = self.levels.get(col) {
                for level in levels {
                    names.push(format!("{col}={level}"));
                }
            }
        }
        names
    }
}

struct RawTable {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(RawTable { headers, rows })
}

fn column_index(table: &RawTable, name: &str) -> Result<usize> {
    table
        .headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Loads a CSV under a schema: one-hot encodes the declared categoricals,
/// min-max normalizes numeric features into `[0, 1]` (constant columns map
/// to zero), and maps labels/groups by the schema rules. Returns the
/// dataset together with the fitted encoder.
pub fn load_csv<T: Scalar>(path: &Path, schema: &Schema) -> Result<(Dataset<T>, Encoder)> {
    let table = read_table(path)?;
    let encoder = fit_encoder(&table, schema)?;
    let data = apply_encoder(&table, &encoder)?;
    Ok((data, encoder))
}

/// Encodes a CSV with an already fitted encoder; unseen categorical levels
/// are rejected.
pub fn load_csv_with<T: Scalar>(path: &Path, encoder: &Encoder) -> Result<Dataset<T>> {
    let table = read_table(path)?;
    apply_encoder(&table, encoder)
}

fn fit_encoder(table: &RawTable, schema: &Schema) -> Result<Encoder> {
    let label_idx = column_index(table, &schema.label_col)?;
    let group_idx = column_index(table, &schema.group_col)?;
    let mut cat_idx = BTreeMap::new();
    for col in &schema.categorical_cols {
        cat_idx.insert(col.clone(), column_index(table, col)?);
    }
    let mut numeric_cols = Vec::new();
    let mut numeric_idx = Vec::new();
    for (idx, name) in table.headers.iter().enumerate() {
        if idx == label_idx || idx == group_idx || cat_idx.values().any(|&i| i == idx) {
            continue;
        }
        numeric_cols.push(name.clone());
        numeric_idx.push(idx);
    }
    let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); numeric_cols.len()];
    let mut levels: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for row in &table.rows {
        for (c, &idx) in numeric_idx.iter().enumerate() {
            let text = &row[idx];
            let v: f64 = text.trim().parse().map_err(|_| Error::NonNumericValue {
                column: numeric_cols[c].clone(),
                value: text.clone(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumericValue { column: numeric_cols[c].clone(), value: text.clone() });
            }
            ranges[c].0 = ranges[c].0.min(v);
            ranges[c].1 = ranges[c].1.max(v);
        }
        for (col, &idx) in &cat_idx {
            let entry = levels.entry(col.clone()).or_default();
            let value = row[idx].trim().to_string();
            if !entry.contains(&value) {
                entry.push(value);
            }
        }
    }
    for lv in levels.values_mut() {
        lv.sort();
    }
    Ok(Encoder { schema: schema.clone(), numeric_cols, ranges, levels })
}

fn apply_encoder<T: Scalar>(table: &RawTable, encoder: &Encoder) -> Result<Dataset<T>> {
    let schema = &encoder.schema;
    let label_idx = column_index(table, &schema.label_col)?;
    let group_idx = column_index(table, &schema.group_col)?;
    let mut numeric_idx = Vec::new();
    for name in &encoder.numeric_cols {
        numeric_idx.push(column_index(table, name)?);
    }
    let mut cat_idx = Vec::new();
    for col in &schema.categorical_cols {
        cat_idx.push((col.clone(), column_index(table, col)?));
    }
    let width = encoder.feature_names().len();
    let mut features: Vec<T> = Vec::with_capacity(table.rows.len() * width);
    let mut labels = Vec::with_capacity(table.rows.len());
    let mut groups = Vec::with_capacity(table.rows.len());
    let class_count = encoder.schema.classes.as_ref().map_or(2, Vec::len);
    for row in &table.rows {
        for (c, &idx) in numeric_idx.iter().enumerate() {
            let text = &row[idx];
            let v: f64 = text.trim().parse().map_err(|_| Error::NonNumericValue {
                column: encoder.numeric_cols[c].clone(),
                value: text.clone(),
            })?;
            let (lo, hi) = encoder.ranges[c];
            let scaled = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
            features.push(T::from_f64_lossy(scaled));
        }
        for (col, idx) in &cat_idx {
            let value = row[*idx].trim();
            let levels = encoder
                .levels
                .get(col)
                .ok_or_else(|| Error::MissingColumn(col.clone()))?;
            let hot = levels.iter().position(|l| l == value).ok_or_else(|| Error::UnseenCategory {
                column: col.clone(),
                value: value.to_string(),
            })?;
            for pos in 0..levels.len() {
                features.push(if pos == hot { T::one() } else { T::zero() });
            }
        }
        let label_text = row[label_idx].trim();
        let label = match &schema.classes {
            Some(classes) => {
                let pos = classes.iter().position(|c| c == label_text).ok_or_else(|| {
                    Error::UnseenCategory { column: schema.label_col.clone(), value: label_text.to_string() }
                })?;
                pos as i32 + 1
            }
            None => {
                if label_text == schema.positive_label {
                    1
                } else {
                    -1
                }
            }
        };
        labels.push(label);
        groups.push(if row[group_idx].trim() == schema.positive_group { 1 } else { -1 });
    }
    Dataset::new(features, width, labels, groups, class_count)
}

/// Writes a dataset back to CSV with feature columns `x0..`, a `y` column
/// (`1`/`-1` or `1..=K`), and a `g` column (`1`/`-1`).
pub fn write_dataset_csv<T: Scalar>(data: &Dataset<T>, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (0..data.n_features()).map(|d| format!("x{d}")).collect();
    header.push("y".into());
    header.push("g".into());
    writer.write_record(&header)?;
    for i in 0..data.len() {
        let mut row: Vec<String> = data
            .row(i)
            .iter()
            .map(|v| format!("{}", v.to_f64().unwrap()))
            .collect();
        row.push(data.labels()[i].to_string());
        row.push(data.groups()[i].to_string());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Schema matching [`write_dataset_csv`] output for binary datasets.
pub fn synthetic_schema() -> Schema {
    Schema {
        label_col: "y".into(),
        positive_label: "1".into(),
        group_col: "g".into(),
        positive_group: "1".into(),
        categorical_cols: Vec::new(),
        classes: None,
    }
}

/// Two-dimensional Gaussian benchmark: four (label, group) cells of 50
/// points each with means (3,4), (2,6), (7,5), (8,3) and common diagonal
/// covariance (4, 9).
pub fn synth_gaussian_2d<T: Scalar>(seed: u64) -> Dataset<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sx = Normal::new(0.0, 2.0f64).unwrap();
    let sy = Normal::new(0.0, 3.0f64).unwrap();
    let cells: [((f64, f64), i32, i8); 4] = [
        ((3.0, 4.0), 1, 1),
        ((2.0, 6.0), 1, -1),
        ((7.0, 5.0), -1, 1),
        ((8.0, 3.0), -1, -1),
    ];
    let mut features = Vec::with_capacity(200 * 2);
    let mut labels = Vec::with_capacity(200);
    let mut groups = Vec::with_capacity(200);
    for &((mx, my), y, g) in &cells {
        for _ in 0..50 {
            features.push(T::from_f64_lossy(mx + rng.sample(sx)));
            features.push(T::from_f64_lossy(my + rng.sample(sy)));
            labels.push(y);
            groups.push(g);
        }
    }
    Dataset::new(features, 2, labels, groups, 2).expect("generator produces a valid dataset")
}

/// Index split produced by [`split`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn cell_key<T: Scalar>(data: &Dataset<T>, i: usize) -> (i32, i8) {
    (data.labels()[i], data.groups()[i])
}

fn shuffled_cells<T: Scalar>(data: &Dataset<T>, seed: u64) -> Vec<Vec<usize>> {
    let mut cells: BTreeMap<(i32, i8), Vec<usize>> = BTreeMap::new();
    for i in 0..data.len() {
        cells.entry(cell_key(data, i)).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cells
        .into_values()
        .map(|mut members| {
            members.shuffle(&mut rng);
            members
        })
        .collect()
}

/// Train/test split stratified by (label, group) cell.
pub fn split<T: Scalar>(data: &Dataset<T>, ratio: f64, seed: u64) -> Result<Split> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput("split ratio must be in (0, 1)".into()));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for members in shuffled_cells(data, seed) {
        let take = (members.len() as f64 * ratio).round() as usize;
        let take = take.min(members.len());
        train.extend_from_slice(&members[..take]);
        test.extend_from_slice(&members[take..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// `k`-fold partition stratified by (label, group) cell; cells smaller
/// than `k` trigger a recorded warning and a label-only fallback.
pub fn kfold<T: Scalar>(data: &Dataset<T>, k: usize, seed: u64) -> Result<(Vec<Vec<usize>>, Vec<String>)> {
    if k < 2 || k > data.len() {
        return Err(Error::InvalidInput(format!("fold count {k} outside 2..=N", k = k)));
    }
    let mut warnings = Vec::new();
    let cells = shuffled_cells(data, seed);
    let use_label_only = cells.iter().any(|c| c.len() < k);
    let strata: Vec<Vec<usize>> = if use_label_only {
        warnings.push(format!(
            "a (label, group) cell holds fewer than {k} points; stratifying by label only"
        ));
        let mut by_label: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for i in 0..data.len() {
            by_label.entry(data.labels()[i]).or_default().push(i);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        by_label
            .into_values()
            .map(|mut members| {
                members.shuffle(&mut rng);
                members
            })
            .collect()
    } else {
        cells
    };
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for members in strata {
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for fold in folds.iter_mut() {
        fold.sort_unstable();
    }
    Ok((folds, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    fn demo_schema() -> Schema {
        Schema {
            label_col: "y".into(),
            positive_label: "yes".into(),
            group_col: "g".into(),
            positive_group: "a".into(),
            categorical_cols: vec!["color".into()],
            classes: None,
        }
    }

    #[test]
    fn one_hot_plus_numeric_width() {
        let file = write_temp("color,v,y,g\nred,1.0,yes,a\nblue,3.0,no,b\nred,2.0,yes,b\n");
        let (data, enc) = load_csv::<f64>(file.path(), &demo_schema()).unwrap();
        // Two levels one-hot plus one numeric column.
        assert_eq!(data.n_features(), 3);
        assert_eq!(enc.feature_names(), vec!["v", "color=blue", "color=red"]);
        assert_eq!(data.labels(), &[1, -1, 1]);
        assert_eq!(data.groups(), &[1, -1, -1]);
        // Min-max normalization of v: 1.0 -> 0, 3.0 -> 1, 2.0 -> 0.5.
        assert_eq!(data.row(0)[0], 0.0);
        assert_eq!(data.row(1)[0], 1.0);
        assert_eq!(data.row(2)[0], 0.5);
    }

    #[test]
    fn constant_numeric_column_maps_to_zero() {
        let file = write_temp("v,y,g\n7.5,yes,a\n7.5,no,b\n");
        let schema = Schema { categorical_cols: vec![], ..demo_schema() };
        let (data, _) = load_csv::<f64>(file.path(), &schema).unwrap();
        assert_eq!(data.row(0)[0], 0.0);
        assert_eq!(data.row(1)[0], 0.0);
    }

    #[test]
    fn distinct_ingestion_errors() {
        let schema = demo_schema();
        let missing = write_temp("v,y,g\n1.0,yes,a\n2.0,no,b\n");
        assert!(matches!(
            load_csv::<f64>(missing.path(), &schema),
            Err(Error::MissingColumn(_))
        ));
        let bad = write_temp("color,v,y,g\nred,oops,yes,a\nblue,2.0,no,b\n");
        assert!(matches!(
            load_csv::<f64>(bad.path(), &schema),
            Err(Error::NonNumericValue { .. })
        ));
        let train = write_temp("color,v,y,g\nred,1.0,yes,a\nblue,2.0,no,b\n");
        let (_, enc) = load_csv::<f64>(train.path(), &schema).unwrap();
        let unseen = write_temp("color,v,y,g\ngreen,1.5,yes,a\nred,1.0,no,b\n");
        assert!(matches!(
            load_csv_with::<f64>(unseen.path(), &enc),
            Err(Error::UnseenCategory { .. })
        ));
    }

    #[test]
    fn emitted_csv_reloads_to_the_same_matrix() {
        let data = synth_gaussian_2d::<f64>(11);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("synth.csv");
        write_dataset_csv(&data, &path).unwrap();
        let (loaded, _) = load_csv::<f64>(&path, &synthetic_schema()).unwrap();
        // Loading normalizes; writing the normalized data and reloading is
        // then a fixed point.
        let path2 = dir.path().join("norm.csv");
        write_dataset_csv(&loaded, &path2).unwrap();
        let (again, _) = load_csv::<f64>(&path2, &synthetic_schema()).unwrap();
        assert_eq!(loaded.features(), again.features());
        assert_eq!(loaded.labels(), again.labels());
    }

    #[test]
    fn generator_counts_means_and_determinism() {
        let data = synth_gaussian_2d::<f64>(7);
        assert_eq!(data.len(), 200);
        let mut counts = BTreeMap::new();
        for i in 0..200 {
            *counts.entry((data.labels()[i], data.groups()[i])).or_insert(0) += 1;
        }
        assert!(counts.values().all(|&c| c == 50));
        // Cell 1 mean within 3 sigma / sqrt(50) of (3, 4).
        let first_cell: Vec<usize> = (0..200)
            .filter(|&i| data.labels()[i] == 1 && data.groups()[i] == 1)
            .collect();
        let mean_x: f64 = first_cell.iter().map(|&i| data.row(i)[0]).sum::<f64>() / 50.0;
        let mean_y: f64 = first_cell.iter().map(|&i| data.row(i)[1]).sum::<f64>() / 50.0;
        assert!((mean_x - 3.0).abs() <= 3.0 * 2.0 / 50f64.sqrt());
        assert!((mean_y - 4.0).abs() <= 3.0 * 3.0 / 50f64.sqrt());
        let again = synth_gaussian_2d::<f64>(7);
        assert_eq!(data.features(), again.features());
    }

    #[test]
    fn stratified_split_and_folds() {
        let data = synth_gaussian_2d::<f64>(3);
        let s = split(&data, 0.7, 1).unwrap();
        assert_eq!(s.train.len(), 140);
        assert_eq!(s.test.len(), 60);
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());

        let (folds, warnings) = kfold(&data, 5, 1).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(folds.len(), 5);
        let mut union: Vec<usize> = folds.concat();
        union.sort_unstable();
        assert_eq!(union, (0..200).collect::<Vec<_>>());
        // Cell proportions preserved within one item.
        for fold in &folds {
            let mut counts = BTreeMap::new();
            for &i in fold {
                *counts.entry((data.labels()[i], data.groups()[i])).or_insert(0usize) += 1;
            }
            for &c in counts.values() {
                assert!((c as i64 - 10).abs() <= 1);
            }
        }
    }

    #[test]
    fn small_cell_falls_back_with_warning() {
        // Cell (1, 1) holds a single point.
        let data = Dataset::binary(
            vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            1,
            vec![1, 1, 1, -1, -1, -1, -1, 1, 1, -1],
            vec![1, -1, -1, 1, 1, -1, -1, -1, -1, 1],
        )
        .unwrap();
        let (folds, warnings) = kfold(&data, 3, 9).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(folds.iter().map(Vec::len).sum::<usize>(), 10);
    }

    #[test]
    fn leave_one_out_structure() {
        let data = Dataset::binary(
            vec![0.1, 0.2, 0.3, 0.4],
            1,
            vec![1, -1, 1, -1],
            vec![1, -1, -1, 1],
        )
        .unwrap();
        let (folds, _) = kfold(&data, 4, 0).unwrap();
        assert!(folds.iter().all(|f| f.len() == 1));
    }
}
