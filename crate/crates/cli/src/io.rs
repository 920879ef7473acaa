//! Trajectory CSV and invariant-report JSON.
//!
//! CSV columns are `t`, the phase coordinates (`q,p` for one degree of
//! freedom, `q1..qn,p1..pn` otherwise) and, for forms carrying a moment
//! matrix, its upper triangle `M11,M12,…` row by row. Numbers are written
//! with 17 significant digits so identical runs give identical files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use twosystem_core::integrate::InvariantSeries;
use twosystem_core::{InvariantReport, Mat, Trajectory, Vector};

use crate::error::CliError;

pub fn phase_labels(n: usize) -> Vec<String> {
    if n == 1 {
        return vec!["q".into(), "p".into()];
    }
    (1..=n).map(|i| format!("q{i}")).chain((1..=n).map(|i| format!("p{i}"))).collect()
}

pub fn moment_labels(d: usize) -> Vec<String> {
    (0..d).flat_map(|a| (a..d).map(move |b| format!("M{}{}", a + 1, b + 1))).collect()
}

pub fn header(n: usize, with_moment: bool) -> Vec<String> {
    let mut h = vec!["t".to_owned()];
    h.extend(phase_labels(n));
    if with_moment {
        h.extend(moment_labels(2 * n));
    }
    h
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_trajectory<W: Write>(out: W, n: usize, traj: &Trajectory) -> Result<(), CliError> {
    let with_moment = traj.form.has_moment();
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header(n, with_moment)).map_err(csv_err)?;
    let d = 2 * n;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![fmt(*t)];
        row.extend(s.x().iter().map(|v| fmt(*v)));
        if let Some(m) = s.moment().filter(|_| with_moment) {
            row.extend((0..d).flat_map(|a| (a..d).map(move |b| (a, b))).map(|(a, b)| fmt(m[(a, b)])));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_file(path: &Path, n: usize, traj: &Trajectory) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_trajectory(f, n, traj)
}

/// Rows of a trajectory CSV: times, phase points and (if present) moments.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryTable {
    pub times: Vec<f64>,
    pub xs: Vec<Vector>,
    pub moments: Option<Vec<Mat>>,
}

pub fn read_trajectory<R: Read>(input: R, n: usize) -> Result<TrajectoryTable, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let head: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let with_moment = if head == header(n, true) {
        true
    } else if head == header(n, false) {
        false
    } else {
        return Err(CliError::Config(format!("unexpected CSV header for n = {n}: {}", head.join(","))));
    };
    let d = 2 * n;
    let mut table = TrajectoryTable { times: Vec::new(), xs: Vec::new(), moments: with_moment.then(Vec::new) };
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let vals = rec
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::Config(format!("CSV row {}: {e}", line + 2)))?;
        if vals.len() != head.len() {
            return Err(CliError::Config(format!("CSV row {} has {} fields", line + 2, vals.len())));
        }
        table.times.push(vals[0]);
        table.xs.push(Vector::from_column_slice(&vals[1..=d]));
        if let Some(ms) = table.moments.as_mut() {
            let coords = twosystem_core::poisson::MomentCoordinates(vals[d + 1..].to_vec());
            ms.push(coords.to_matrix()?);
        }
    }
    Ok(table)
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub values: Vec<f64>,
    pub max_drift: f64,
}

pub fn report_json(report: &InvariantReport) -> BTreeMap<String, SeriesJson> {
    report
        .series
        .iter()
        .map(|s| (s.name.clone(), SeriesJson { values: s.values.clone(), max_drift: s.max_drift }))
        .collect()
}

pub fn report_from_json(map: BTreeMap<String, SeriesJson>) -> InvariantReport {
    InvariantReport {
        series: map
            .into_iter()
            .map(|(name, s)| InvariantSeries { name, values: s.values, max_drift: s.max_drift })
            .collect(),
    }
}

pub fn write_report<W: Write>(mut out: W, report: &InvariantReport) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, &report_json(report)).map_err(|e| CliError::Io(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn write_report_file(path: &Path, report: &InvariantReport) -> Result<(), CliError> {
    let f = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    write_report(f, report)
}
