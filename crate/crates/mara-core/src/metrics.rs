//! Per-update training metrics and their CSV form.
//!
//! Layout: `update,timesteps,mean_ep_reward,entropy,policy_loss,value_loss,
//! clip_frac,approx_kl`. `mean_ep_reward` is `NaN` until the first episode
//! completes and is serialized literally as `NaN`.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub const METRICS_HEADER: &str =
    "update,timesteps,mean_ep_reward,entropy,policy_loss,value_loss,clip_frac,approx_kl";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    /// 1-based update index.
    pub update: usize,
    /// Environment steps consumed up to and including this update.
    pub timesteps: usize,
    /// Mean return of episodes completed during the most recent rollout
    /// window that finished any; `NaN` before the first completed episode.
    pub mean_ep_reward: f64,
    pub entropy: f64,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub clip_frac: f64,
    pub approx_kl: f64,
}

impl MetricsRow {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.update,
            self.timesteps,
            self.mean_ep_reward,
            self.entropy,
            self.policy_loss,
            self.value_loss,
            self.clip_frac,
            self.approx_kl
        )
    }
}

pub fn metrics_to_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.to_csv_row()).expect("writing to String cannot fail");
    }
    out
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    std::fs::write(path, metrics_to_csv(rows))?;
    Ok(())
}

pub fn metrics_from_csv(text: &str, path: &str) -> Result<Vec<MetricsRow>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty metrics file".into()))?;
    if header != METRICS_HEADER {
        return Err(err(1, format!("unrecognized metrics header '{header}'")));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(err(lineno, format!("expected 8 fields, found {}", fields.len())));
        }
        let uint = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|e| err(lineno, format!("bad integer '{s}': {e}")))
        };
        let float = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| err(lineno, format!("bad float '{s}': {e}")))
        };
        rows.push(MetricsRow {
            update: uint(fields[0])?,
            timesteps: uint(fields[1])?,
            mean_ep_reward: float(fields[2])?,
            entropy: float(fields[3])?,
            policy_loss: float(fields[4])?,
            value_loss: float(fields[5])?,
            clip_frac: float(fields[6])?,
            approx_kl: float(fields[7])?,
        });
    }
    Ok(rows)
}

pub fn read_metrics_csv(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = std::fs::read_to_string(path)?;
    metrics_from_csv(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows() -> Vec<MetricsRow> {
        vec![
            MetricsRow {
                update: 1,
                timesteps: 2048,
                mean_ep_reward: f64::NAN,
                entropy: 2.8378770664093453,
                policy_loss: -0.012,
                value_loss: 31.5,
                clip_frac: 0.0,
                approx_kl: 0.0004,
            },
            MetricsRow {
                update: 2,
                timesteps: 4096,
                mean_ep_reward: -173.25,
                entropy: 2.81,
                policy_loss: -0.02,
                value_loss: 12.25,
                clip_frac: 0.125,
                approx_kl: 0.011,
            },
        ]
    }

    #[test]
    fn round_trips_including_nan() {
        let text = metrics_to_csv(&rows());
        let parsed = metrics_from_csv(&text, "m.csv").unwrap();
        assert_eq!(parsed.len(), 2);
        assert!(parsed[0].mean_ep_reward.is_nan());
        assert_eq!(parsed[0].entropy, rows()[0].entropy);
        assert_eq!(parsed[1], rows()[1]);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("metrics.csv");
        write_metrics_csv(&path, &rows()).unwrap();
        let parsed = read_metrics_csv(&path).unwrap();
        assert_eq!(parsed[1], rows()[1]);
    }

    #[test]
    fn header_mismatch_is_a_parse_error() {
        assert!(matches!(
            metrics_from_csv("update,reward\n", "m.csv"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn bad_field_reports_its_line() {
        let mut text = metrics_to_csv(&rows());
        text.push_str("3,6144,abc,2.8,0,0,0,0\n");
        match metrics_from_csv(&text, "m.csv") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
