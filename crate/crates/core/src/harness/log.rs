//! JSON-lines action logs: one header line, then one line per step.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::env::{Action, EnvConfig};
use crate::error::HarnessError;
use crate::tasks::{task_fingerprint, Task};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub task_id: String,
    pub episode: usize,
    pub seed: u64,
    /// SHA-256 over the canonical config and task documents.
    pub config_digest: String,
    pub agent: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRecord {
    pub step: u64,
    pub action: u8,
    pub dyaw: f64,
    pub dpitch: f64,
}

impl LogRecord {
    pub fn new(step: u64, a: &Action) -> Self {
        LogRecord { step, action: a.discrete.id(), dyaw: a.d_yaw, dpitch: a.d_pitch }
    }

    pub fn action(&self) -> Option<Action> {
        Action::new(self.action, self.dyaw, self.dpitch)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionLog {
    pub header: LogHeader,
    pub records: Vec<LogRecord>,
}

/// The config's seed is left out; the header records the episode seed.
pub fn run_digest(cfg: &EnvConfig, task: &Task) -> String {
    let unseeded = EnvConfig { seed: 0, ..cfg.clone() };
    let mut h = Sha256::new();
    h.update(unseeded.to_json().as_bytes());
    h.update(b"\n");
    h.update(task_fingerprint(task).as_bytes());
    hex::encode(h.finalize())
}

impl ActionLog {
    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str, path: &Path) -> Result<Self, HarnessError> {
        let corrupt = |message: String| HarnessError::CorruptLog { path: path.display().to_string(), message };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or_else(|| corrupt("empty log".into()))?;
        let header: LogHeader = serde_json::from_str(first).map_err(|e| corrupt(format!("header: {e}")))?;
        let mut records = Vec::new();
        for (n, line) in lines {
            let r: LogRecord = serde_json::from_str(line).map_err(|e| corrupt(format!("line {}: {e}", n + 1)))?;
            if r.step != records.len() as u64 {
                return Err(corrupt(format!("line {}: expected step {}, found {}", n + 1, records.len(), r.step)));
            }
            if r.action().is_none() {
                return Err(corrupt(format!("line {}: action id {} out of range", n + 1, r.action)));
            }
            records.push(r);
        }
        Ok(ActionLog { header, records })
    }

    /// File name used inside a log directory.
    pub fn file_name(&self) -> String {
        let safe: String =
            self.header.task_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
        format!("{safe}.ep{}.jsonl", self.header.episode)
    }
}

pub fn write_log(path: &Path, log: &ActionLog) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io { path: path.display().to_string(), source };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(log.to_jsonl().as_bytes()).map_err(io)
}

pub fn read_log(path: &Path) -> Result<ActionLog, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?;
    ActionLog::from_jsonl(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let log = ActionLog {
            header: LogHeader {
                task_id: "t/1".into(),
                episode: 2,
                seed: 9,
                config_digest: "ab".into(),
                agent: "random".into(),
            },
            records: (0..50)
                .map(|i| LogRecord { step: i, action: (i % 14) as u8, dyaw: 0.1 * i as f64 - 2.3, dpitch: 1.0 / 3.0 })
                .collect(),
        };
        let back = ActionLog::from_jsonl(&log.to_jsonl(), Path::new("x")).unwrap();
        assert_eq!(back, log);
        assert_eq!(log.file_name(), "t_1.ep2.jsonl");
    }

    #[test]
    fn rejects_gaps_and_bad_ids() {
        let h = r#"{"task_id":"a","episode":0,"seed":0,"config_digest":"d","agent":"x"}"#;
        let gap = format!("{h}\n{{\"step\":1,\"action\":0,\"dyaw\":0,\"dpitch\":0}}\n");
        assert!(ActionLog::from_jsonl(&gap, Path::new("x")).is_err());
        let bad = format!("{h}\n{{\"step\":0,\"action\":14,\"dyaw\":0,\"dpitch\":0}}\n");
        assert!(ActionLog::from_jsonl(&bad, Path::new("x")).is_err());
        assert!(ActionLog::from_jsonl("", Path::new("x")).is_err());
    }
}
