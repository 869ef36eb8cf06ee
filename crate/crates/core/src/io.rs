//! Plain-text persistence: matrices as CSV rows, Gaussian states as a small
//! tagged CSV, and sample dumps. Numbers are written in Rust's shortest
//! round-trip form, so a write/read cycle is exact.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::state::GaussianState;

fn parse_f64(field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: {field:?}")))
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// One row per matrix row.
pub fn write_matrix<W: Write>(m: &Mat, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for i in 0..m.nrows() {
        out.write_record(m.row(i).iter().map(|x| x.to_string())).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix<R: Read>(r: R) -> Result<Mat> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in reader(r).records() {
        let rec = rec.map_err(csv_error)?;
        rows.push(rec.iter().map(parse_f64).collect::<Result<_>>()?);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(Mat::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// `mu,…` then 2n rows `sigma,…`, after a `# gaussian-state` comment.
pub fn write_state<W: Write>(state: &GaussianState, mut w: W) -> Result<()> {
    writeln!(w, "# gaussian-state modes={}", state.n_modes())?;
    let mut out = csv::Writer::from_writer(w);
    let row = |tag: &str, vals: Vec<f64>| -> Vec<String> {
        std::iter::once(tag.to_string()).chain(vals.into_iter().map(|x| x.to_string())).collect()
    };
    out.write_record(row("mu", state.mean().iter().copied().collect())).map_err(csv_error)?;
    let s = state.sigma();
    for i in 0..s.nrows() {
        out.write_record(row("sigma", s.row(i).iter().copied().collect())).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the format of [`write_state`]. A file with only `sigma` rows is a
/// zero-mean state.
pub fn read_state<R: Read>(r: R) -> Result<GaussianState> {
    let mut mu: Option<Vec<f64>> = None;
    let mut sigma: Vec<Vec<f64>> = Vec::new();
    for rec in reader(r).records() {
        let rec = rec.map_err(csv_error)?;
        let tag = rec.get(0).unwrap_or("");
        let vals = rec.iter().skip(1).map(parse_f64).collect::<Result<Vec<_>>>()?;
        match tag {
            "mu" if mu.is_none() => mu = Some(vals),
            "sigma" => sigma.push(vals),
            other => return Err(Error::Parse(format!("unexpected row tag {other:?}"))),
        }
    }
    let d = sigma.len();
    if d == 0 || d % 2 != 0 || sigma.iter().any(|r| r.len() != d) {
        return Err(Error::Parse(format!("sigma must be a 2n×2n block, got {d} rows")));
    }
    let mu = mu.unwrap_or_else(|| vec![0.0; d]);
    if mu.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: mu.len() });
    }
    GaussianState::from_matrices(Vector::from_vec(mu), Mat::from_fn(d, d, |i, j| sigma[i][j]))
}

pub fn read_state_file(path: &Path) -> Result<GaussianState> {
    read_state(std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
}

pub fn write_state_file(state: &GaussianState, path: &Path) -> Result<()> {
    write_state(state, std::fs::File::create(path)?)
}

/// One outcome per row: trial, copy index, then the coordinates. Homodyne
/// outcomes have a single coordinate.
pub fn write_samples<W: Write>(trial: usize, samples: &[Vec<f64>], w: W) -> Result<()> {
    let mut out = csv::WriterBuilder::new().flexible(true).from_writer(w);
    for (i, s) in samples.iter().enumerate() {
        let head = [trial.to_string(), i.to_string()];
        out.write_record(head.into_iter().chain(s.iter().map(|x| x.to_string())))
            .map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}
