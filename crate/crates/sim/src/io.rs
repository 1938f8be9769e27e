//! File formats: per-sample CSV logs, event logs, calibration tables and
//! JSON results.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use fockloop_core::{ActuatorCalibration, AtomState, Detection};
use serde::Serialize;

use crate::ensemble::DecisionFractions;
use crate::sweep::SweepPoint;
use crate::trajectory::{Row, TrajectoryLog};

pub fn trajectory_header(n_max: usize) -> String {
    let mut h = String::from(
        "t_ms,role,revoked,occupancy,true_outcomes,detected,n_true,n_mean_est,distance,target",
    );
    for n in 0..=n_max {
        write!(h, ",p{n}").unwrap();
    }
    h
}

fn outcomes(states: &[AtomState]) -> String {
    if states.is_empty() {
        return "-".into();
    }
    states.iter().map(|s| s.symbol()).collect()
}

fn detected(row: &Row) -> String {
    let seen: Vec<AtomState> = row
        .true_outcomes
        .iter()
        .zip(&row.detected)
        .filter(|(_, &d)| d)
        .map(|(&s, _)| s)
        .collect();
    Detection::from_states(&seen)
        .expect("at most two atoms per sample")
        .to_string()
}

pub fn write_trajectory_csv<W: Write>(log: &TrajectoryLog, mut w: W) -> io::Result<()> {
    writeln!(w, "{}", trajectory_header(log.n_max))?;
    let mut line = String::new();
    for r in &log.rows {
        line.clear();
        write!(
            line,
            "{:.4},{},{},{},{},{},{},{},{},{}",
            r.t_ms,
            r.role,
            u8::from(r.revoked),
            r.occupancy,
            outcomes(&r.true_outcomes),
            detected(r),
            r.n_true,
            r.n_mean_est,
            r.distance,
            r.target
        )
        .unwrap();
        for p in &r.p {
            write!(line, ",{p}").unwrap();
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn trajectory_csv(log: &TrajectoryLog) -> String {
    let mut buf = Vec::new();
    write_trajectory_csv(log, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii")
}

pub const EVENTS_HEADER: &str = "t_ms,event,sample,detail,expected_distance";

pub fn write_events_csv<W: Write>(log: &TrajectoryLog, mut w: W) -> io::Result<()> {
    writeln!(w, "{EVENTS_HEADER}")?;
    for e in &log.events {
        let kind = serde_json::to_value(e.kind).expect("enum");
        writeln!(
            w,
            "{:.4},{},{},{},{}",
            e.t_ms,
            kind.as_str().unwrap_or_default(),
            e.sample,
            e.detail,
            e.expected_distance
        )?;
    }
    Ok(())
}

pub fn write_fractions_csv<W: Write>(f: &DecisionFractions, mut w: W) -> io::Result<()> {
    writeln!(w, "bin_center,emitter,sensor,absorber,count")?;
    for i in 0..f.bin_centers.len() {
        writeln!(
            w,
            "{:.2},{},{},{},{}",
            f.bin_centers[i], f.emitter[i], f.sensor[i], f.absorber[i], f.counts[i]
        )?;
    }
    Ok(())
}

pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "rank,te_scale,tg_scale,n_sensors,n_controls,mean_steady_state_distance,mean_convergence_ms,converged_fraction"
    )?;
    for p in points {
        let conv = p.mean_convergence_ms.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.rank,
            p.te_scale,
            p.tg_scale,
            p.n_sensors,
            p.n_controls,
            p.mean_steady_state_distance,
            conv,
            p.converged_fraction
        )?;
    }
    Ok(())
}

/// Rows `n, contrast, phase_offset_rad`, readable by
/// [`ActuatorCalibration::parse_table`].
pub fn write_calibration_table<W: Write>(calib: &ActuatorCalibration, mut w: W) -> io::Result<()> {
    writeln!(w, "# n, contrast, phase_offset_rad")?;
    for n in 0..calib.len() {
        writeln!(
            w,
            "{}, {}, {}",
            n,
            calib.contrast(n),
            calib.phase_offset(n)
        )?;
    }
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    fs::write(path, text + "\n")
}

/// Writes `trajectory_{index}.csv` and `trajectory_{index}_events.csv`.
pub fn write_trajectory_files(dir: &Path, log: &TrajectoryLog) -> io::Result<()> {
    let i = log.summary.index;
    let rows = io::BufWriter::new(fs::File::create(dir.join(format!("trajectory_{i:04}.csv")))?);
    write_trajectory_csv(log, rows)?;
    let events = io::BufWriter::new(fs::File::create(
        dir.join(format!("trajectory_{i:04}_events.csv")),
    )?);
    write_events_csv(log, events)
}
