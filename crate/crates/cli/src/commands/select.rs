//! `fairsel select`: standalone selection solve from a scores file
//! (CSV `index,u,y,g`), printing wall time for complexity checks.

use std::time::Instant;

use serde_json::{json, Value};

use fairsel::data::{FairnessKind, FairnessSpec};
use fairsel::model::{ScoreDirection, Scores};
use fairsel::subselect;
use fairsel::HyperParams;

use crate::common::{env_value, write_result};
use crate::config::{read_config, SelectConfig};
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg: SelectConfig = read_config(&args.config)?;
    let mut errors = Vec::new();
    let kind = match FairnessKind::parse(&cfg.fairness) {
        Ok(k) => k,
        Err(_) => {
            errors.push(format!("unknown fairness {:?}", cfg.fairness));
            FairnessKind::Omr
        }
    };
    let direction = match cfg.direction.as_deref() {
        None | Some("at_most") => ScoreDirection::CorrectWhenAtMost,
        Some("at_least") => ScoreDirection::CorrectWhenAtLeast,
        Some(other) => {
            errors.push(format!("unknown direction {other:?} (at_most|at_least)"));
            ScoreDirection::CorrectWhenAtMost
        }
    };
    if !cfg.t.is_finite() {
        errors.push("t must be finite".into());
    }
    if !(cfg.rho >= 0.0) {
        errors.push("rho must be >= 0".into());
    }
    if !cfg.scores.exists() {
        errors.push(format!("scores file {} not found", cfg.scores.display()));
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }

    let started = Instant::now();
    let (values, labels, groups) = read_scores(&cfg.scores)?;
    let scores = Scores::new(values, direction)?;
    let spec = FairnessSpec::build(kind, &labels, &groups)?;
    let h = HyperParams::new(cfg.t, 0.0, cfg.rho);

    let solve_started = Instant::now();
    let outcome = subselect::select(&scores, &spec, &h)?;
    let solve_micros = solve_started.elapsed().as_micros();

    let n = scores.len();
    let selected = outcome.z.iter().filter(|&&b| b).count();
    println!(
        "selection solved: N = {n}, kind = {}, value = {:.9}, selected = {selected}, time = {:.3} ms",
        kind.as_str(),
        outcome.value,
        solve_micros as f64 / 1000.0
    );
    let metrics = json!({
        "n": n,
        "fairness": kind.as_str(),
        "t": cfg.t,
        "rho": cfg.rho,
        "value": outcome.value,
        "selected": selected,
        "z": Value::Array(outcome.z.iter().map(|&b| Value::from(b as u8)).collect()),
    });
    let env = env_value(
        started.elapsed().as_millis(),
        &[("select_micros", Value::from(solve_micros as u64))],
    );
    write_result(&args.out, metrics, env)?;
    Ok(())
}

fn read_scores(path: &std::path::Path) -> Result<(Vec<f64>, Vec<i32>, Vec<i8>), CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Tool(fairsel::Error::Data(e.to_string())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Tool(fairsel::Error::Data(e.to_string())))?
        .clone();
    let col = |name: &str| -> Result<usize, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Tool(fairsel::Error::MissingColumn(name.into())))
    };
    let (ci, cu, cy, cg) = (col("index")?, col("u")?, col("y")?, col("g")?);
    let mut rows: Vec<(usize, f64, i32, i8)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Tool(fairsel::Error::Data(e.to_string())))?;
        let parse_err = |column: &str, value: &str| {
            CliError::Tool(fairsel::Error::NonNumericValue { column: column.into(), value: value.into() })
        };
        let idx: usize = record[ci].trim().parse().map_err(|_| parse_err("index", &record[ci]))?;
        let u: f64 = record[cu].trim().parse().map_err(|_| parse_err("u", &record[cu]))?;
        let y: i32 = record[cy].trim().parse().map_err(|_| parse_err("y", &record[cy]))?;
        let g: i8 = record[cg].trim().parse().map_err(|_| parse_err("g", &record[cg]))?;
        rows.push((idx, u, y, g));
    }
    rows.sort_by_key(|r| r.0);
    for (pos, row) in rows.iter().enumerate() {
        if row.0 != pos {
            return Err(CliError::Tool(fairsel::Error::Data(format!(
                "score indices must be 0..N-1 without gaps; saw {} at position {pos}",
                row.0
            ))));
        }
    }
    Ok((
        rows.iter().map(|r| r.1).collect(),
        rows.iter().map(|r| r.2).collect(),
        rows.iter().map(|r| r.3).collect(),
    ))
}
