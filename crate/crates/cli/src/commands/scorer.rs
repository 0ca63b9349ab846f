//! `fairsel scorer`: serve the line-delimited JSON scorer protocol on
//! standard input/output, backed by the in-process logistic trainer.

use std::io::{BufRead, Write};
use std::path::Path;

use fairsel::dataio::{load_csv, Schema};
use fairsel::train::{LogisticScorer, ScorerEndpoint, ScorerRequest, ScorerResponse};
use fairsel::TrainConfig;

use crate::CliError;

pub fn run(data_path: &Path, schema_path: &Path, lambda: f64, iterations: usize) -> Result<(), CliError> {
    let schema = Schema::from_path(schema_path)?;
    let (data, _) = load_csv::<f64>(data_path, &schema)?;
    let cfg = TrainConfig { iterations, ..TrainConfig::default_for(lambda) };
    let mut scorer = LogisticScorer::new(data, lambda, cfg);

    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let request: ScorerRequest = serde_json::from_str(&line)
            .map_err(|e| CliError::Tool(fairsel::Error::Protocol(format!("bad request: {e}"))))?;
        match request.cmd.as_str() {
            "quit" => break,
            "train_score" => {
                let selected = request.selected.unwrap_or_default();
                let all_n = request
                    .all_n
                    .ok_or_else(|| CliError::Tool(fairsel::Error::Protocol("missing all_n".into())))?;
                let scores = scorer.train_score(&selected, all_n)?;
                let response = ScorerResponse { scores };
                serde_json::to_writer(&mut out, &response)
                    .map_err(|e| CliError::Tool(fairsel::Error::Protocol(e.to_string())))?;
                out.write_all(b"\n")?;
                out.flush()?;
            }
            other => {
                return Err(CliError::Tool(fairsel::Error::Protocol(format!(
                    "unknown command {other:?}"
                ))));
            }
        }
    }
    Ok(())
}
