//! `fairsel export-micp`: build and serialize an exact model document.

use serde_json::json;

use fairsel::data::{FairnessKind, FairnessSpec};
use fairsel::micp::{build_gmsvmf, build_gsvm_f1, build_gsvmf};
use fairsel::HyperParams;

use crate::common::{load_dataset, to_indexed_binary};
use crate::config::{read_config, ExportConfig};
use crate::{CliError, RunArgs};

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let cfg: ExportConfig = read_config(&args.config)?;
    let mut errors = Vec::new();
    if !["gsvmf", "gmsvmf", "gsvm-f1"].contains(&cfg.builder.as_str()) {
        errors.push(format!("unknown builder {:?} (gsvmf|gmsvmf|gsvm-f1)", cfg.builder));
    }
    if !(cfg.t > 0.0) {
        errors.push("t must be > 0 for margin models".into());
    }
    if !(cfg.lambda >= 0.0) {
        errors.push("lambda must be >= 0".into());
    }
    if cfg.lambda == 0.0 && cfg.mu_override.is_none() {
        errors.push("lambda = 0 leaves the big-M undefined; set mu_override".into());
    }
    if !(cfg.rho >= 0.0) {
        errors.push("rho must be >= 0".into());
    }
    let fairness = match cfg.builder.as_str() {
        "gsvm-f1" => FairnessKind::F1Complement,
        "gmsvmf" => FairnessKind::Omr,
        _ => match cfg.fairness.as_deref() {
            None => FairnessKind::Omr,
            Some(name) => match FairnessKind::parse(name) {
                Ok(FairnessKind::F1Complement) => {
                    errors.push("the gsvmf builder covers omr|fpr|eo|dp; use gsvm-f1".into());
                    FairnessKind::Omr
                }
                Ok(k) => k,
                Err(_) => {
                    errors.push(format!("unknown fairness {name:?}"));
                    FairnessKind::Omr
                }
            },
        },
    };
    if !cfg.dataset.exists() {
        errors.push(format!("dataset file {} not found", cfg.dataset.display()));
    }
    if !cfg.schema.exists() {
        errors.push(format!("schema file {} not found", cfg.schema.display()));
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }

    let data = load_dataset(&cfg.dataset, &cfg.schema)?;
    let h = HyperParams::new(cfg.t, cfg.lambda, cfg.rho);
    let model = match cfg.builder.as_str() {
        "gsvmf" => {
            let spec = FairnessSpec::build(fairness, data.labels(), data.groups())?;
            build_gsvmf(&data, &h, &spec, cfg.mu_override)?
        }
        "gsvm-f1" => {
            let spec = FairnessSpec::build(fairness, data.labels(), data.groups())?;
            build_gsvm_f1(&data, &h, &spec, cfg.mu_override)?
        }
        _ => {
            let indexed = if data.has_indexed_labels() { data.clone() } else { to_indexed_binary(&data)? };
            let spec = FairnessSpec::build(fairness, indexed.labels(), indexed.groups())?;
            build_gmsvmf(&indexed, &h, &spec, cfg.mu_override)?
        }
    };
    std::fs::write(&args.out, model.to_json())?;
    if let Some(lp_path) = &cfg.lp_out {
        std::fs::write(lp_path, model.write_lp()?)?;
    }
    println!(
        "{}",
        json!({
            "builder": cfg.builder,
            "fairness": fairness.as_str(),
            "vars": model.vars.len(),
            "rows": model.linear.len(),
            "cones": model.rcones.len(),
            "out": args.out.display().to_string(),
        })
    );
    Ok(())
}
