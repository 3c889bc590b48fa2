//! File formats: CSV matrix exchange, trajectories, spectra, indices, and
//! report tables.
//!
//! All CSVs are UTF-8, comma-separated, '.' decimal. Floats are written in
//! Rust's shortest round-trip form, so identical runs produce byte-identical
//! files. The matrix format is column-major with a one-line header
//! `# rows=<R> cols=<C>`: each subsequent line holds one matrix column.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::integrators::Trajectory;

fn fmt(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v}")
    }
}

/// Writes a matrix in the column-major exchange format.
pub fn write_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# rows={} cols={}\n", m.nrows(), m.ncols()));
    for j in 0..m.ncols() {
        let col: Vec<String> = (0..m.nrows()).map(|i| fmt(m[(i, j)])).collect();
        out.push_str(&col.join(","));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Reads a matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse {
        path: path.display().to_string(),
        detail: "empty file".into(),
    })?;
    let parse_dim = |token: &str, key: &str| -> Result<usize> {
        token
            .strip_prefix(&format!("{key}="))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                detail: format!("bad header token {token:?}"),
            })
    };
    let tokens: Vec<&str> = header.trim_start_matches('#').split_whitespace().collect();
    if tokens.len() != 2 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            detail: format!("bad header {header:?}"),
        });
    }
    let rows = parse_dim(tokens[0], "rows")?;
    let cols = parse_dim(tokens[1], "cols")?;
    let mut m = DMatrix::zeros(rows, cols);
    let mut j = 0;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        if j >= cols {
            return Err(Error::Parse {
                path: path.display().to_string(),
                detail: "more columns than the header declares".into(),
            });
        }
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != rows {
            return Err(Error::Parse {
                path: path.display().to_string(),
                detail: format!("column {j} has {} entries, expected {rows}", values.len()),
            });
        }
        for (i, v) in values.iter().enumerate() {
            m[(i, j)] = v.trim().parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                detail: format!("bad float {v:?}"),
            })?;
        }
        j += 1;
    }
    if j != cols {
        return Err(Error::Parse {
            path: path.display().to_string(),
            detail: format!("found {j} columns, expected {cols}"),
        });
    }
    Ok(m)
}

/// Trajectory CSV: header `t,q1..qn,p1..pn`, one row per record.
pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let dim = traj.dim();
    let n = dim / 2;
    let mut out = String::from("t");
    for i in 1..=n {
        out.push_str(&format!(",q{i}"));
    }
    for i in 1..=n {
        out.push_str(&format!(",p{i}"));
    }
    out.push('\n');
    for (t, s) in traj.times.iter().zip(traj.states.iter()) {
        out.push_str(&fmt(*t));
        for v in s.iter() {
            out.push(',');
            out.push_str(&fmt(*v));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Spectrum CSV: `index,sigma` with 1-based indices.
pub fn write_spectrum(path: &Path, values: &[f64]) -> Result<()> {
    let mut out = String::from("index,sigma\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt(*v)));
    }
    write_atomic(path, out.as_bytes())
}

/// Interpolation indices as a one-column CSV of 1-based indices.
pub fn write_indices(path: &Path, indices: &[usize]) -> Result<()> {
    let mut out = String::new();
    for i in indices {
        out.push_str(&format!("{}\n", i + 1));
    }
    write_atomic(path, out.as_bytes())
}

/// One diagnostics column pair (error and energy) for a labeled method.
pub struct DiagnosticsColumn {
    pub label: String,
    /// Instant error per record; shorter than the grid when truncated.
    pub errors: Vec<f64>,
    pub energies: Vec<f64>,
}

/// Diagnostics CSV on a common time grid: `t,err_<label>,energy_<label>,…`.
/// Truncated series leave their trailing cells empty.
pub fn write_diagnostics(path: &Path, times: &[f64], columns: &[DiagnosticsColumn]) -> Result<()> {
    let mut out = String::from("t");
    for c in columns {
        out.push_str(&format!(",err_{},energy_{}", c.label, c.label));
    }
    out.push('\n');
    for (j, t) in times.iter().enumerate() {
        out.push_str(&fmt(*t));
        for c in columns {
            out.push(',');
            if let Some(e) = c.errors.get(j) {
                out.push_str(&fmt(*e));
            }
            out.push(',');
            if let Some(e) = c.energies.get(j) {
                out.push_str(&fmt(*e));
            }
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// One summary row per (method, k).
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub method: String,
    pub k: usize,
    pub total_error: f64,
    pub blowup_time: Option<f64>,
    pub lambda_star: Option<(f64, f64)>,
    pub a_star: Option<(f64, f64)>,
}

/// Summary CSV: `method,k,total_error,blowup_time,lambda_star_re,
/// lambda_star_im,a_star,a_star_im`. a_star is the real part; the extra
/// imaginary column covers the complex entries the spectral table can
/// produce. Cells that do not apply stay empty.
pub fn write_summary(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut out = String::from(
        "method,k,total_error,blowup_time,lambda_star_re,lambda_star_im,a_star,a_star_im\n",
    );
    for r in rows {
        out.push_str(&format!("{},{},{}", r.method, r.k, fmt(r.total_error)));
        out.push(',');
        if let Some(t) = r.blowup_time {
            out.push_str(&fmt(t));
        }
        match r.lambda_star {
            Some((re, im)) => out.push_str(&format!(",{},{}", fmt(re), fmt(im))),
            None => out.push_str(",,"),
        }
        match r.a_star {
            Some((re, im)) => out.push_str(&format!(",{},{}", fmt(re), fmt(im))),
            None => out.push_str(",,"),
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Runtime table: excluded from the byte-determinism contract (wall times).
pub fn write_runtimes(path: &Path, rows: &[crate::deim::SpeedupRow]) -> Result<()> {
    let mut out = String::from("method,k,per_step_seconds,total_seconds,steps\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.label,
            r.k,
            fmt(r.per_step_seconds),
            fmt(r.total_seconds),
            r.steps
        ));
    }
    write_atomic(path, out.as_bytes())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}
