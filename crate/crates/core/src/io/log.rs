//! Per-step evaluation log.
//!
//! Line-delimited text, one record per evaluated connection:
//!
//! ```text
//! # step attempt target feasible reason cost committed
//! 2 0 0 1 - 1.2345678901234567e-7 1
//! 3 0 1 0 intersects-tree - 0
//! ```
//!
//! `target` is the arena id of the segment at evaluation time (not the CSV id).
//! `reason` and `cost` are `-` when not applicable.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{CcoError, Result};
use crate::growth::{EvaluationRecord, Infeasibility};
use crate::tree::SegmentId;

pub const LOG_HEADER: &str = "# step attempt target feasible reason cost committed";

pub fn format_log(records: &[EvaluationRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 48 + 64);
    out.push_str(LOG_HEADER);
    out.push('\n');
    for r in records {
        let reason = r.reason.map(Infeasibility::as_str).unwrap_or("-");
        let cost = r.cost.map(|c| format!("{c:.16e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            out,
            "{} {} {} {} {reason} {cost} {}",
            r.step,
            r.attempt,
            r.target.index(),
            u8::from(r.reason.is_none()),
            u8::from(r.committed)
        );
    }
    out
}

pub fn write_log(records: &[EvaluationRecord], path: &Path) -> Result<()> {
    std::fs::write(path, format_log(records)).map_err(|e| CcoError::io(path, e))
}

pub fn parse_log(text: &str) -> Result<Vec<EvaluationRecord>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let bad = || CcoError::Usage(format!("evaluation log line {}: malformed record `{line}`", i + 1));
        let f: Vec<&str> = line.split(' ').collect();
        if f.len() != 7 {
            return Err(bad());
        }
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let flag = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(bad()),
        };
        let feasible = flag(f[3])?;
        let reason = match f[4] {
            "-" => None,
            s => Some(Infeasibility::parse(s).ok_or_else(bad)?),
        };
        let cost = match f[5] {
            "-" => None,
            s => Some(s.parse::<f64>().map_err(|_| bad())?),
        };
        if feasible != reason.is_none() || feasible != cost.is_some() {
            return Err(bad());
        }
        out.push(EvaluationRecord {
            step: int(f[0])?,
            attempt: int(f[1])?,
            target: SegmentId(int(f[2])?),
            reason,
            cost,
            committed: flag(f[6])?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let records = vec![
            EvaluationRecord {
                step: 2,
                attempt: 0,
                target: SegmentId(0),
                reason: None,
                cost: Some(1.0 / 3.0),
                committed: true,
            },
            EvaluationRecord {
                step: 3,
                attempt: 1,
                target: SegmentId(2),
                reason: Some(Infeasibility::OutsideDomain),
                cost: None,
                committed: false,
            },
        ];
        let text = format_log(&records);
        assert_eq!(parse_log(&text).unwrap(), records);
        assert!(parse_log("1 0 0 1 outside-domain - 0\n").is_err());
    }
}
