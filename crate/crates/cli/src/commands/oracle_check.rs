//! `fairsel oracle-check`: refining runs versus the exhaustive oracle on
//! seeded random instances, reporting the approximation-bound verdicts.

use std::time::Instant;

use serde_json::{json, Value};

use fairsel::data::{Dataset as GenericDataset, FairnessKind, FairnessSpec};
use fairsel::irs::{irs_fit, support_symmetric_difference, BinaryModelKind};
use fairsel::micp::big_m;
use fairsel::oracle::{exact_solve_tiny, OracleModelKind};
use fairsel::{Dataset, HyperParams};

use crate::common::{env_value, write_result};
use crate::config::{read_config, OracleCheckConfig};
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg: OracleCheckConfig = read_config(&args.config)?;
    let mut errors = Vec::new();
    if cfg.n < 4 || cfg.n > 16 {
        errors.push("n must lie in 4..=16".into());
    }
    if cfg.seeds.is_empty() {
        errors.push("seeds list must be nonempty".into());
    }
    let model_kind = match cfg.model.as_str() {
        "svm" => OracleModelKind::SvmHinge,
        "logreg" => OracleModelKind::Logistic,
        other => {
            errors.push(format!("unknown model {other:?} (svm|logreg)"));
            OracleModelKind::SvmHinge
        }
    };
    let fairness = match FairnessKind::parse(&cfg.fairness) {
        Ok(k) => k,
        Err(_) => {
            errors.push(format!("unknown fairness {:?}", cfg.fairness));
            FairnessKind::Omr
        }
    };
    if !(cfg.lambda > 0.0) {
        errors.push("oracle checks need lambda > 0 (big-M must exist)".into());
    }
    if !(cfg.t > 0.0) && cfg.model == "svm" {
        errors.push("margin models need t > 0".into());
    }
    if !(cfg.rho >= 0.0) {
        errors.push("rho must be >= 0".into());
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }

    let started = Instant::now();
    let h = HyperParams::new(cfg.t, cfg.lambda, cfg.rho)
        .with_stopping(cfg.delta, cfg.max_iter.unwrap_or(50));
    let mut matches = 0usize;
    let mut details = Vec::new();
    for &seed in &cfg.seeds {
        let data = random_instance(seed, cfg.n);
        let spec = FairnessSpec::build(fairness, data.labels(), data.groups())?;
        let mut train_errors = Vec::new();
        let train = cfg.train.build(cfg.lambda, seed, &mut train_errors);
        if !train_errors.is_empty() {
            return Err(CliError::Config(train_errors));
        }
        let irs_kind = match model_kind {
            OracleModelKind::SvmHinge => BinaryModelKind::Svm,
            OracleModelKind::Logistic => BinaryModelKind::Logistic,
        };
        let refined = irs_fit(irs_kind, &data, &h, &spec, &train, None)?;
        let oracle = exact_solve_tiny(&data, &h, &spec, model_kind, &train)?;
        let m_u = big_m(&h, &data)?;
        let diff = support_symmetric_difference(&refined.selection, &oracle.z)?;
        let bound = oracle.value + m_u / cfg.n as f64 * diff as f64;
        let slack = oracle.residual + 1e-9;
        let holds = oracle.value - slack <= refined.objective && refined.objective <= bound + slack;
        if holds {
            matches += 1;
        }
        details.push(json!({
            "seed": seed,
            "irs_objective": refined.objective,
            "oracle_value": oracle.value,
            "oracle_residual": oracle.residual,
            "support_difference": diff,
            "bound": bound,
            "holds": holds,
        }));
    }
    println!("{matches}/{} match", cfg.seeds.len());
    let metrics = json!({
        "n": cfg.n,
        "model": cfg.model,
        "fairness": fairness.as_str(),
        "matches": matches,
        "total": cfg.seeds.len(),
        "details": Value::Array(details),
    });
    write_result(&args.out, metrics, env_value(started.elapsed().as_millis(), &[]))?;
    Ok(())
}

/// Random binary instance with every (label, group) cell nonempty.
pub fn random_instance(seed: u64, n: usize) -> Dataset {
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let feats: Vec<f64> = (0..n * 2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let labels: Vec<i32> = (0..n)
            .map(|i| {
                let margin = feats[2 * i] + 0.5 * feats[2 * i + 1] + rng.gen_range(-0.4..0.4);
                if margin > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        let groups: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let mut cells = [0usize; 4];
        for i in 0..n {
            cells[(labels[i] == 1) as usize * 2 + (groups[i] == 1) as usize] += 1;
        }
        if cells.iter().all(|&c| c > 0) {
            return GenericDataset::binary(feats, 2, labels, groups).unwrap();
        }
    }
}
