//! `fairsel grid`: Cartesian parameter sweep with warm starts along each
//! ascending-rho slice and optional k-fold cross-validation.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use fairsel::dataio::{kfold, split};
use fairsel::Dataset;

use crate::commands::fit::run_plan_warm;
use crate::config::{read_config, validate_fit, FitConfig, GridConfig, ModelKindName, TrainSection};
use crate::{CliError, RunArgs};

struct CellResult {
    cell: usize,
    t: f64,
    lambda: f64,
    rho: f64,
    fold: usize,
    train_accuracy: f64,
    train_fairness: f64,
    test_accuracy: Option<f64>,
    test_fairness: Option<f64>,
    ratio: Option<f64>,
    objective: f64,
    iterations: usize,
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg: GridConfig = read_config(&args.config)?;
    validate_grid(&cfg)?;
    if args.threads > 1 {
        // One global pool; later calls are no-ops, which is fine.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build_global();
    }
    let started = Instant::now();
    let data = crate::common::load_dataset(&cfg.dataset, &cfg.schema)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let warm_start = cfg.warm_start.unwrap_or(true);

    // Train/test pairs per fold.
    let fold_sets: Vec<(Dataset, Option<Dataset>)> = match cfg.folds {
        Some(k) => {
            let (folds, warnings) = kfold(&data, k, seed)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            let mut sets = Vec::with_capacity(k);
            for test_fold in &folds {
                let train: Vec<usize> = (0..data.len()).filter(|i| !test_fold.contains(i)).collect();
                sets.push((data.subset(&train)?, Some(data.subset(test_fold)?)));
            }
            sets
        }
        None => match cfg.split_ratio {
            Some(ratio) => {
                let s = split(&data, ratio, seed)?;
                vec![(data.subset(&s.train)?, Some(data.subset(&s.test)?))]
            }
            None => vec![(data.clone(), None)],
        },
    };

    // A slice is one (t, lambda, fold) triple swept over ascending rho with
    // warm starts; slices are independent and may run in parallel.
    let mut rho_sorted = cfg.rho.clone();
    rho_sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut slices = Vec::new();
    for (ti, &t) in cfg.t.iter().enumerate() {
        for (li, &lambda) in cfg.lambda.iter().enumerate() {
            for fold in 0..fold_sets.len() {
                slices.push((ti, li, fold, t, lambda));
            }
        }
    }
    let run_slice = |&(ti, li, fold, t, lambda): &(usize, usize, usize, f64, f64)| -> Result<Vec<CellResult>, CliError> {
        let (train_data, test_data) = &fold_sets[fold];
        let mut warm = None;
        let mut rows = Vec::with_capacity(rho_sorted.len());
        for (ri, &rho) in rho_sorted.iter().enumerate() {
            let fit_cfg = cell_config(&cfg, t, lambda, rho, seed);
            let plan = validate_fit(&fit_cfg, Some(seed), false)?;
            let (metrics, _, model) = run_plan_warm(&plan, train_data, test_data.as_ref(), None, warm.as_ref())?;
            if warm_start {
                warm = model;
            }
            let cell = (ti * cfg.lambda.len() + li) * rho_sorted.len() + ri;
            rows.push(CellResult {
                cell,
                t,
                lambda,
                rho,
                fold,
                train_accuracy: metrics["train_accuracy"].as_f64().unwrap_or(f64::NAN),
                train_fairness: metrics["train_fairness"].as_f64().unwrap_or(f64::NAN),
                test_accuracy: metrics["test_accuracy"].as_f64(),
                test_fairness: metrics["test_fairness"].as_f64(),
                ratio: chosen_ratio(&metrics),
                objective: metrics["objective"].as_f64().unwrap_or(f64::NAN),
                iterations: metrics["iterations"].as_u64().unwrap_or(0) as usize,
            });
        }
        Ok(rows)
    };
    let results: Vec<Result<Vec<CellResult>, CliError>> = if args.threads > 1 {
        slices.par_iter().map(run_slice).collect()
    } else {
        slices.iter().map(run_slice).collect()
    };
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    rows.sort_by_key(|r| (r.cell, r.fold));

    write_csv(&args.out, &rows)?;
    let summary = best_cell_summary(&rows, &cfg, &rho_sorted);
    println!(
        "{}",
        json!({
            "cells": cfg.t.len() * cfg.lambda.len() * rho_sorted.len(),
            "rows": rows.len(),
            "total_iterations": rows.iter().map(|r| r.iterations).sum::<usize>(),
            "wall_ms": started.elapsed().as_millis() as u64,
            "best": summary,
        })
    );
    Ok(())
}

fn chosen_ratio(metrics: &serde_json::Value) -> Option<f64> {
    metrics["test_ratio"].as_f64().or_else(|| metrics["train_ratio"].as_f64()).or_else(|| {
        // Null ratio means perfectly fair; rank it above everything.
        let f = metrics["test_fairness"].as_f64().or_else(|| metrics["train_fairness"].as_f64());
        match f {
            Some(f) if f == 0.0 => Some(f64::INFINITY),
            _ => None,
        }
    })
}

fn cell_config(cfg: &GridConfig, t: f64, lambda: f64, rho: f64, seed: u64) -> FitConfig {
    FitConfig {
        dataset: cfg.dataset.clone(),
        schema: cfg.schema.clone(),
        model: cfg.model.clone(),
        fairness: cfg.fairness.clone(),
        t,
        lambda,
        rho,
        delta: cfg.delta,
        max_iter: cfg.max_iter,
        seed: Some(seed),
        split_ratio: None,
        train: cfg.train.clone(),
    }
}

fn validate_grid(cfg: &GridConfig) -> Result<(), CliError> {
    let mut errors = Vec::new();
    if cfg.t.is_empty() {
        errors.push("t list must be nonempty".into());
    }
    if cfg.lambda.is_empty() {
        errors.push("lambda list must be nonempty".into());
    }
    if cfg.rho.is_empty() {
        errors.push("rho list must be nonempty".into());
    }
    match ModelKindName::parse(&cfg.model) {
        Some(ModelKindName::Blackbox) => {
            errors.push("grid sweeps do not support the blackbox model".into())
        }
        Some(_) => {}
        None => errors.push(format!("unknown model {:?}", cfg.model)),
    }
    if let Some(k) = cfg.folds {
        if k < 2 {
            errors.push("folds must be at least 2".into());
        }
        if cfg.split_ratio.is_some() {
            errors.push("folds and split_ratio are mutually exclusive".into());
        }
    }
    // Per-value checks reuse the single-fit validator on the first cell of
    // each list entry.
    let probe = TrainSection::default();
    let _ = probe;
    for &t in &cfg.t {
        if !t.is_finite() {
            errors.push(format!("t value {t} must be finite"));
        }
    }
    for &l in &cfg.lambda {
        if !(l >= 0.0) {
            errors.push(format!("lambda value {l} must be >= 0"));
        }
    }
    for &r in &cfg.rho {
        if !(r >= 0.0) {
            errors.push(format!("rho value {r} must be >= 0"));
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(errors))
    }
}

fn write_csv(path: &std::path::Path, rows: &[CellResult]) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)?;
    writeln!(
        file,
        "cell,t,lambda,rho,fold,train_acc,train_f,test_acc,test_f,ratio,objective,iterations"
    )?;
    for r in rows {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        let ratio = match r.ratio {
            Some(x) if x.is_infinite() => "inf".to_string(),
            Some(x) => x.to_string(),
            None => String::new(),
        };
        writeln!(
            file,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.cell,
            r.t,
            r.lambda,
            r.rho,
            r.fold,
            r.train_accuracy,
            r.train_fairness,
            opt(r.test_accuracy),
            opt(r.test_fairness),
            ratio,
            r.objective,
            r.iterations
        )?;
    }
    Ok(())
}

fn best_cell_summary(rows: &[CellResult], cfg: &GridConfig, rho_sorted: &[f64]) -> serde_json::Value {
    let cells = cfg.t.len() * cfg.lambda.len() * rho_sorted.len();
    let mut best: Option<(f64, f64, usize)> = None; // (ratio, accuracy, cell)
    for cell in 0..cells {
        let members: Vec<&CellResult> = rows.iter().filter(|r| r.cell == cell).collect();
        if members.is_empty() {
            continue;
        }
        let mean_ratio = members
            .iter()
            .map(|r| r.ratio.unwrap_or(f64::NEG_INFINITY))
            .sum::<f64>()
            / members.len() as f64;
        let mean_acc = members
            .iter()
            .map(|r| r.test_accuracy.unwrap_or(r.train_accuracy))
            .sum::<f64>()
            / members.len() as f64;
        let better = match best {
            None => true,
            Some((br, ba, _)) => mean_ratio > br || (mean_ratio == br && mean_acc > ba),
        };
        if better {
            best = Some((mean_ratio, mean_acc, cell));
        }
    }
    match best {
        Some((ratio, acc, cell)) => {
            let sample = rows.iter().find(|r| r.cell == cell).unwrap();
            json!({
                "cell": cell,
                "t": sample.t,
                "lambda": sample.lambda,
                "rho": sample.rho,
                "mean_ratio": if ratio.is_finite() { json!(ratio) } else { json!("inf") },
                "mean_accuracy": acc,
            })
        }
        None => json!(null),
    }
}
