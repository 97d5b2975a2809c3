//! Output formatting: lossless float printing, CSV writers, JSON emission.

use std::fs;
use std::path::Path;

use lie_riccati::{Trajectory, WnCoordinates};

use crate::CliError;

/// Print a float with 17 significant digits so that parsing the text
/// recovers the identical bit pattern.  Infinities print as `inf`/`-inf`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// The extended-real representation of a trajectory state: `inf` at poles.
pub fn fmt_point(s: &lie_riccati::ProjectivePoint) -> String {
    if s.is_infinite() {
        "inf".to_string()
    } else {
        fmt_f64(s.to_real_extended())
    }
}

/// Write one CSV file with the given header and rows.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let fail = |e: &dyn std::fmt::Display| {
        CliError::run(format!("cannot write `{}`: {e}", path.display()))
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| fail(&e))?;
    w.write_record(header).map_err(|e| fail(&e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| fail(&e))?;
    }
    w.flush().map_err(|e| fail(&e))
}

/// Rows `t,p,q,x_repr` for a trajectory CSV.
pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<String>> {
    traj.grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = traj.state(i);
            vec![fmt_f64(t), fmt_f64(s.p), fmt_f64(s.q), fmt_point(s)]
        })
        .collect()
}

/// Rows `t,c_L0,c_L1,c_L2` for a factorization-coordinate CSV.
pub fn coords_rows(coords: &WnCoordinates) -> Vec<Vec<String>> {
    coords
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let c = coords.sample(i);
            vec![fmt_f64(t), fmt_f64(c[0]), fmt_f64(c[1]), fmt_f64(c[2])]
        })
        .collect()
}

/// Serialize a JSON document (pretty, trailing newline, keys sorted by
/// serde_json's default map — deterministic for identical configs).
pub fn json_text(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("JSON serialization cannot fail");
    text.push('\n');
    text
}

/// Write a JSON document to a file.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    fs::write(path, json_text(value))
        .map_err(|e| CliError::run(format!("cannot write `{}`: {e}", path.display())))
}
