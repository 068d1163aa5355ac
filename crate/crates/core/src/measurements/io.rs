//! JSON measurement files: `{"dim": d, "measurements": [[effect, …], …]}`
//! with every effect a row-major array of `[re, im]` pairs.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use super::{CMatrix, MeasurementError, MeasurementSet};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetFile {
    dim: usize,
    measurements: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

/// Serialises with 17 significant digits, enough to round-trip every `f64`.
pub fn set_to_json(set: &MeasurementSet) -> String {
    let mut s = String::new();
    writeln!(s, "{{\n  \"dim\": {},\n  \"measurements\": [", set.dim()).unwrap();
    for (x, p) in set.povms().iter().enumerate() {
        s.push_str("    [\n");
        for (a, e) in p.effects().iter().enumerate() {
            s.push_str("      [\n");
            let m = e.matrix();
            for i in 0..m.nrows() {
                s.push_str("        [");
                for j in 0..m.ncols() {
                    let z = m[(i, j)];
                    let sep = if j + 1 < m.ncols() { ", " } else { "" };
                    write!(s, "[{:.16e}, {:.16e}]{sep}", z.re, z.im).unwrap();
                }
                s.push_str(if i + 1 < m.nrows() { "],\n" } else { "]\n" });
            }
            s.push_str(if a + 1 < p.outcomes() { "      ],\n" } else { "      ]\n" });
        }
        s.push_str(if x + 1 < set.len() { "    ],\n" } else { "    ]\n" });
    }
    s.push_str("  ]\n}\n");
    s
}

pub fn parse_set(text: &str) -> Result<MeasurementSet, MeasurementError> {
    let file: SetFile = serde_json::from_str(text).map_err(|e| MeasurementError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let d = file.dim;
    if d == 0 {
        return Err(MeasurementError::Dimension("dim must be positive".into()));
    }
    let mut measurements = Vec::with_capacity(file.measurements.len());
    for (x, effects) in file.measurements.into_iter().enumerate() {
        let mut mats = Vec::with_capacity(effects.len());
        for (a, rows) in effects.into_iter().enumerate() {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(MeasurementError::Dimension(format!(
                    "measurement {x}, effect {a} is not {d}×{d}"
                )));
            }
            mats.push(CMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])));
        }
        measurements.push(mats);
    }
    MeasurementSet::from_matrices(d, measurements)
}

pub fn load_set(path: impl AsRef<Path>) -> Result<MeasurementSet, MeasurementError> {
    parse_set(&std::fs::read_to_string(path)?)
}

pub fn save_set(set: &MeasurementSet, path: impl AsRef<Path>) -> Result<(), MeasurementError> {
    std::fs::write(path, set_to_json(set))?;
    Ok(())
}
