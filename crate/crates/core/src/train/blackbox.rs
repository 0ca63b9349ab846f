//! Black-box scorer protocol: line-delimited JSON over a child process's
//! standard input and output.
//!
//! Request:  `{"cmd":"train_score","selected":[<indices>],"all_n":N}`
//! Response: `{"scores":[u_1,...,u_N]}` with exactly `N` finite values in
//! `[0, 1]` (the probability of predicting each point's label correctly).
//! Shutdown: `{"cmd":"quit"}`. One request per line, responses in order,
//! UTF-8, numbers as JSON decimals.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{HyperParams, LinearModel, ScoreDirection, Scores};
use crate::scalar::Scalar;
use crate::train::{fit_logreg_weighted, TrainConfig};

#[derive(Debug, Serialize, Deserialize)]
pub struct ScorerRequest {
    pub cmd: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_n: Option<usize>,
}

impl ScorerRequest {
    pub fn train_score(selected: Vec<usize>, all_n: usize) -> Self {
        Self { cmd: "train_score".into(), selected: Some(selected), all_n: Some(all_n) }
    }

    pub fn quit() -> Self {
        Self { cmd: "quit".into(), selected: None, all_n: None }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScorerResponse {
    pub scores: Vec<f64>,
}

/// A trainable scorer: retrains on the selected indices and reports
/// correct-label probabilities for every point.
pub trait ScorerEndpoint<T: Scalar> {
    fn train_score(&mut self, selected: &[usize], all_n: usize) -> Result<Vec<T>>;

    fn shutdown(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Sends one training request through the endpoint and validates the
/// response: length `all_n`, every value finite and in `[0, 1]`.
pub fn blackbox_scores<T: Scalar>(
    endpoint: &mut dyn ScorerEndpoint<T>,
    selected: &[usize],
    all_n: usize,
) -> Result<Scores<T>> {
    if let Some(&bad) = selected.iter().find(|&&i| i >= all_n) {
        return Err(Error::InvalidInput(format!("selected index {bad} outside 0..{all_n}")));
    }
    let raw = endpoint.train_score(selected, all_n)?;
    if raw.len() != all_n {
        return Err(Error::Protocol(format!(
            "expected {all_n} scores, received {}",
            raw.len()
        )));
    }
    for &v in &raw {
        if !v.is_finite() {
            return Err(Error::Protocol("non-finite score in response".into()));
        }
        if v < T::zero() || v > T::one() {
            return Err(Error::ScoreOutOfRange(v.to_f64().unwrap_or(f64::NAN)));
        }
    }
    Scores::new(raw, ScoreDirection::CorrectWhenAtLeast)
}

/// Scorer running in a child process, one in-flight request at a time.
pub struct ChildScorer {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl ChildScorer {
    /// Spawns `sh -c <command>` with piped standard input/output.
    pub fn spawn_shell(command: &str, timeout: Duration) -> Result<Self> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Protocol(format!("failed to spawn scorer: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            let reader = BufReader::new(stdout);
            for line in reader.lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self { child, stdin: Some(stdin), lines: rx, timeout })
    }

    fn send_line(&mut self, line: &str) -> Result<()> {
        let stdin = self.stdin.as_mut().ok_or_else(|| Error::Protocol("scorer already shut down".into()))?;
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Protocol(format!("failed to write request: {e}")))
    }

    fn read_line(&mut self) -> Result<String> {
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => Ok(line),
            Ok(Err(e)) => Err(Error::Protocol(format!("failed to read response: {e}"))),
            Err(RecvTimeoutError::Timeout) => Err(Error::Timeout(self.timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                Err(Error::Protocol("scorer closed its output".into()))
            }
        }
    }
}

impl<T: Scalar> ScorerEndpoint<T> for ChildScorer {
    fn train_score(&mut self, selected: &[usize], all_n: usize) -> Result<Vec<T>> {
        let req = ScorerRequest::train_score(selected.to_vec(), all_n);
        let line = serde_json::to_string(&req).map_err(|e| Error::Protocol(e.to_string()))?;
        self.send_line(&line)?;
        let response = self.read_line()?;
        let parsed: ScorerResponse =
            serde_json::from_str(&response).map_err(|e| Error::Protocol(format!("bad response: {e}")))?;
        Ok(parsed.scores.into_iter().map(T::from_f64_lossy).collect())
    }

    fn shutdown(&mut self) -> Result<()> {
        if self.stdin.is_some() {
            let line = serde_json::to_string(&ScorerRequest::quit()).expect("static request");
            let _ = self.send_line(&line);
            self.stdin = None; // closes the pipe
        }
        let _ = self.child.wait();
        Ok(())
    }
}

impl Drop for ChildScorer {
    fn drop(&mut self) {
        if self.stdin.is_some() {
            let line = serde_json::to_string(&ScorerRequest::quit()).expect("static request");
            let _ = self.send_line(&line);
            self.stdin = None;
        }
        std::thread::sleep(Duration::from_millis(20));
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// In-process endpoint backed by the logistic trainer: retrains on the
/// selected points (warm-started from the previous call) and reports the
/// model's correct-label probabilities. The `scorer` CLI subcommand wraps
/// exactly this type behind the line protocol.
pub struct LogisticScorer<T: Scalar> {
    data: Dataset<T>,
    lambda: T,
    cfg: TrainConfig<T>,
    prev: Option<LinearModel<T>>,
}

impl<T: Scalar> LogisticScorer<T> {
    pub fn new(data: Dataset<T>, lambda: T, cfg: TrainConfig<T>) -> Self {
        Self { data, lambda, cfg, prev: None }
    }
}

impl<T: Scalar> ScorerEndpoint<T> for LogisticScorer<T> {
    fn train_score(&mut self, selected: &[usize], all_n: usize) -> Result<Vec<T>> {
        if all_n != self.data.len() {
            return Err(Error::Protocol(format!(
                "scorer holds {} points but request says {all_n}",
                self.data.len()
            )));
        }
        let mut z = vec![false; all_n];
        for &i in selected {
            if i >= all_n {
                return Err(Error::InvalidInput(format!("selected index {i} out of range")));
            }
            z[i] = true;
        }
        let h = HyperParams::new(T::zero(), self.lambda, T::zero());
        let (model, scores) = fit_logreg_weighted(&self.data, &z, &h, &self.cfg, self.prev.as_ref())?;
        self.prev = Some(model);
        Ok(scores.values.iter().map(|&u| u.exp()).collect())
    }
}
