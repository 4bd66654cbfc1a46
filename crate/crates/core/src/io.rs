//! CSV and JSON formats of signals, phase functions and reports, and an
//! all-or-nothing writer for the files of one command.
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! outputs are byte-identical across runs and parse back exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::ambiguity::{DecayBoundReport, MpBenchRow, SparsePhase};
use crate::error::{Error, Result};
use crate::spaces::{Signal, C64};
use crate::transforms::{PhaseFunction, TransformSpec};
use crate::window_design::{MinimizerReport, TraceRow};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// CSV document from a header and rows of already formatted fields.
fn csv_bytes(header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

fn parse_f64(field: &str, what: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{what}: {field:?} is not a number")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("{what}: {field:?} is not finite")));
    }
    Ok(v)
}

/// Reads a CSV with the expected header and returns its numeric rows.
fn read_numeric_csv(path: &Path, header: &[String]) -> Result<Vec<Vec<f64>>> {
    let text = read_to_string(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let got: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    if got != header {
        return Err(Error::Parse(format!(
            "{}: header {:?}, expected {:?}",
            path.display(),
            got,
            header
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let what = format!("{} row {}", path.display(), line + 1);
        rows.push(rec.iter().map(|f| parse_f64(f, &what)).collect::<Result<Vec<f64>>>()?);
    }
    Ok(rows)
}

/// `index,re,im`, one row per sample in storage order.
pub fn signal_csv(f: &Signal) -> Result<Vec<u8>> {
    let header = ["index", "re", "im"].map(String::from);
    csv_bytes(
        &header,
        f.values()
            .iter()
            .enumerate()
            .map(|(i, v)| vec![i.to_string(), v.re.to_string(), v.im.to_string()]),
    )
}

/// Reads a signal CSV for the spec's signal space.
pub fn read_signal_csv(path: &Path, spec: &TransformSpec) -> Result<Signal> {
    let rows = read_numeric_csv(path, &["index", "re", "im"].map(String::from))?;
    let n = spec.space.len();
    if rows.len() != n {
        return Err(Error::Parse(format!(
            "{}: {} samples, the {} grid has {n}",
            path.display(),
            rows.len(),
            spec.name()
        )));
    }
    let mut v = vec![C64::new(0.0, 0.0); n];
    let mut seen = vec![false; n];
    for r in rows {
        let i = r[0];
        if i.fract() != 0.0 || i < 0.0 || i as usize >= n || seen[i as usize] {
            return Err(Error::Parse(format!("{}: bad or repeated index {i}", path.display())));
        }
        seen[i as usize] = true;
        v[i as usize] = C64::new(r[1], r[2]);
    }
    Signal::new(spec.space.clone(), v)
}

/// Block coordinates then `re,im`, one row per phase-grid point.
pub fn phase_function_csv(spec: &TransformSpec, f: &PhaseFunction) -> Result<Vec<u8>> {
    spec.check_grid(f)?;
    let mut header = spec.coordinate_names();
    header.extend(["re", "im"].map(String::from));
    csv_bytes(
        &header,
        f.values.iter().enumerate().map(|(i, v)| {
            let mut row: Vec<String> = spec.grid_element(i).flat().iter().map(|c| c.to_string()).collect();
            row.push(v.re.to_string());
            row.push(v.im.to_string());
            row
        }),
    )
}

/// Reads a phase function CSV, checking that its coordinates are the spec's grid.
pub fn read_phase_function_csv(path: &Path, spec: &TransformSpec) -> Result<PhaseFunction> {
    let mut header = spec.coordinate_names();
    header.extend(["re", "im"].map(String::from));
    let rows = read_numeric_csv(path, &header)?;
    if rows.len() != spec.grid.len() {
        return Err(Error::GridMismatch(format!(
            "{}: {} rows, the {} phase grid has {} points",
            path.display(),
            rows.len(),
            spec.name(),
            spec.grid.len()
        )));
    }
    let d = header.len() - 2;
    let mut out = PhaseFunction::zeros(spec.grid.len());
    for (i, r) in rows.iter().enumerate() {
        let expect = spec.grid_element(i).flat();
        if expect
            .iter()
            .zip(&r[..d])
            .any(|(a, b)| (a - b).abs() > 1e-9 * (1.0 + a.abs()))
        {
            return Err(Error::GridMismatch(format!(
                "{}: row {} is not grid point {:?}",
                path.display(),
                i + 1,
                expect
            )));
        }
        out.values[i] = C64::new(r[d], r[d + 1]);
    }
    Ok(out)
}

pub fn read_sparse_phase(path: &Path) -> Result<SparsePhase> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// `coords…,amb,bound,margin`; infinite bounds are written as `inf`.
pub fn decay_csv(spec: &TransformSpec, r: &DecayBoundReport) -> Result<Vec<u8>> {
    let mut header = spec.coordinate_names();
    header.extend(["amb", "bound", "margin"].map(String::from));
    csv_bytes(
        &header,
        r.rows.iter().map(|row| {
            let mut v: Vec<String> = row.coords.iter().map(|c| c.to_string()).collect();
            v.extend([row.amb.to_string(), row.bound.to_string(), row.margin.to_string()]);
            v
        }),
    )
}

pub fn trace_csv(trace: &[TraceRow]) -> Result<Vec<u8>> {
    csv_bytes(
        &["iter", "objective", "grad_norm"].map(String::from),
        trace
            .iter()
            .map(|t| vec![t.iter.to_string(), t.objective.to_string(), t.grad_norm.to_string()]),
    )
}

pub fn minimizer_csv(r: &MinimizerReport) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &r.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

pub fn mp_bench_csv(rows: &[MpBenchRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Parse(e.to_string()))
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

/// Files produced by one command, written only once all of them are ready.
#[derive(Default)]
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes every file to a temporary name in `dir`, then renames them
    /// into place. On failure the temporaries are removed and no final
    /// file of this set is created.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let mut staged = Vec::new();
        let cleanup = |staged: &[(PathBuf, PathBuf)]| {
            for (tmp, _) in staged {
                let _ = fs::remove_file(tmp);
            }
        };
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            let tmp = dir.join(format!(".{name}.tmp"));
            if let Err(e) = fs::write(&tmp, bytes) {
                cleanup(&staged);
                let _ = fs::remove_file(&tmp);
                return Err(io_err(&tmp, e));
            }
            staged.push((tmp, target));
        }
        let mut done = Vec::new();
        for (i, (tmp, target)) in staged.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, target) {
                cleanup(&staged[i..]);
                for d in &done {
                    let _ = fs::remove_file(d);
                }
                return Err(io_err(target, e));
            }
            done.push(target.clone());
        }
        Ok(done)
    }
}
