//! CSV serialization for step-by-step trajectory logs.
//!
//! The layout is `step,q1..qn,ee_x,ee_y,ee_z,reward,done` with one header
//! row; `done` is written as `0`/`1`. Values round-trip through the shortest
//! representation that parses back to the same float.

use crate::env::TrajectoryRecord;
use crate::error::{Error, Result};
use crate::math::Vec3;
use std::fmt::Write as _;
use std::path::Path;

/// Header for an n-joint trajectory file.
pub fn trajectory_header(dof: usize) -> String {
    let mut h = String::from("step");
    for i in 1..=dof {
        write!(h, ",q{i}").expect("writing to String cannot fail");
    }
    h.push_str(",ee_x,ee_y,ee_z,reward,done");
    h
}

/// Render records to CSV text. All records must share one joint count.
pub fn trajectory_to_csv(records: &[TrajectoryRecord]) -> Result<String> {
    let dof = match records.first() {
        Some(r) => r.joint_positions.len(),
        None => return Err(Error::contract("cannot serialize an empty trajectory")),
    };
    let mut out = trajectory_header(dof);
    out.push('\n');
    for r in records {
        if r.joint_positions.len() != dof {
            return Err(Error::contract(format!(
                "record at step {} has {} joints, expected {dof}",
                r.step,
                r.joint_positions.len()
            )));
        }
        write!(out, "{}", r.step).expect("writing to String cannot fail");
        for q in &r.joint_positions {
            write!(out, ",{q}").expect("writing to String cannot fail");
        }
        writeln!(
            out,
            ",{},{},{},{},{}",
            r.ee_position.x,
            r.ee_position.y,
            r.ee_position.z,
            r.reward,
            u8::from(r.done)
        )
        .expect("writing to String cannot fail");
    }
    Ok(out)
}

pub fn write_trajectory_csv(path: &Path, records: &[TrajectoryRecord]) -> Result<()> {
    let text = trajectory_to_csv(records)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Parse CSV text produced by [`trajectory_to_csv`].
pub fn trajectory_from_csv(text: &str, path: &str) -> Result<Vec<TrajectoryRecord>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_string(),
        line,
        msg,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| err(1, "empty trajectory file".into()))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 7 || columns[0] != "step" || columns[columns.len() - 1] != "done" {
        return Err(err(1, format!("unrecognized trajectory header '{header}'")));
    }
    let dof = columns.len() - 6;
    if trajectory_header(dof) != header {
        return Err(err(1, format!("unrecognized trajectory header '{header}'")));
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != dof + 6 {
            return Err(err(
                lineno,
                format!("expected {} fields, found {}", dof + 6, fields.len()),
            ));
        }
        let step: usize = fields[0]
            .parse()
            .map_err(|e| err(lineno, format!("bad step index: {e}")))?;
        let mut floats = Vec::with_capacity(dof + 4);
        for f in &fields[1..dof + 5] {
            floats.push(
                f.parse::<f64>()
                    .map_err(|e| err(lineno, format!("bad float '{f}': {e}")))?,
            );
        }
        let done = match fields[dof + 5] {
            "0" => false,
            "1" => true,
            other => return Err(err(lineno, format!("bad done flag '{other}'"))),
        };
        records.push(TrajectoryRecord {
            step,
            joint_positions: floats[..dof].to_vec(),
            ee_position: Vec3::new(floats[dof], floats[dof + 1], floats[dof + 2]),
            reward: floats[dof + 3],
            done,
        });
    }
    Ok(records)
}

pub fn read_trajectory_csv(path: &Path) -> Result<Vec<TrajectoryRecord>> {
    let text = std::fs::read_to_string(path)?;
    trajectory_from_csv(&text, &path.display().to_string())
}
