//! CSV and JSON emission, and ingestion of snapshot-schema CSV data.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;

use crate::numerics::{PolarGrid, RadialRule};
use crate::spectrum::WaveFunction;

use super::CliError;

/// 17 significant digits, the same on every platform.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table held in memory and written in one go.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory cannot fail");
        Table { writer }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).expect("writing to memory cannot fail");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("flushing memory cannot fail")
    }

    pub fn write(self, path: &Path) -> Result<(), CliError> {
        write_file(path, &self.into_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

/// `r,theta,re,im` rows of a wavefunction, ring by ring.
pub fn wavefunction_table(u: &WaveFunction) -> Table {
    let mut t = Table::new(&["r", "theta", "re", "im"]);
    for (p, v) in u.grid().nodes().zip(u.values()) {
        t.row([num(p.r), num(p.theta), num(v.re), num(v.im)]);
    }
    t
}

/// Snapshot file name for time `t`.
pub fn snapshot_name(t: f64) -> String {
    format!("wavefunction_t{t:.6}.csv")
}

/// Reads samples in the snapshot schema. The rows must be ordered ring by
/// ring with uniform angles `2 pi j / n`. The radii must either be those of
/// `fallback` or be uniform `h, 2h, ...` (optionally preceded by `r = 0`), as
/// written by `evolve`.
pub fn read_wavefunction(path: &Path, fallback: &PolarGrid) -> Result<WaveFunction, CliError> {
    let bad = |msg: String| CliError::Data {
        path: path.to_path_buf(),
        msg,
    };
    let text = read_file(path)?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["r", "theta", "re", "im"] {
        return Err(bad(format!("expected header r,theta,re,im, got {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows: Vec<[f64; 4]> = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut row = [0.0; 4];
        for (k, slot) in row.iter_mut().enumerate() {
            let field = rec.get(k).ok_or_else(|| bad(format!("row {} is short", i + 1)))?;
            *slot = field
                .trim()
                .parse()
                .map_err(|_| bad(format!("row {}: cannot parse {field:?}", i + 1)))?;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(bad("no data rows".into()));
    }
    let n_theta = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
    if !rows.len().is_multiple_of(n_theta) {
        return Err(bad(format!("{} rows do not split into rings of {n_theta}", rows.len())));
    }
    let radii: Vec<f64> = rows.chunks(n_theta).map(|c| c[0][0]).collect();
    for (ring, chunk) in rows.chunks(n_theta).enumerate() {
        for (j, r) in chunk.iter().enumerate() {
            let th = 2.0 * PI * j as f64 / n_theta as f64;
            if r[0] != radii[ring] || (r[1] - th).abs() > 1e-12 {
                return Err(bad(format!("row {} is off the polar grid", ring * n_theta + j + 1)));
            }
        }
    }
    let grid = infer_grid(&radii, n_theta, fallback).ok_or_else(|| {
        bad("radii match neither the configured grid nor a uniform sampling grid".into())
    })?;
    let values = rows.iter().map(|r| Complex64::new(r[2], r[3])).collect();
    WaveFunction::new(Arc::new(grid), values).map_err(|e| bad(e.to_string()))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * b.abs().max(1.0)
}

fn infer_grid(radii: &[f64], n_theta: usize, fallback: &PolarGrid) -> Option<PolarGrid> {
    if n_theta == fallback.angular_count()
        && radii.len() == fallback.ring_count()
        && radii.iter().zip(fallback.radii()).all(|(a, b)| close(*a, *b))
    {
        return Some(fallback.clone());
    }
    let origin = radii[0] == 0.0;
    let rest = if origin { &radii[1..] } else { radii };
    let count = rest.len();
    let h = *rest.first()?;
    if !(h > 0.0) || !rest.iter().enumerate().all(|(i, r)| close(*r, h * (i + 1) as f64)) {
        return None;
    }
    let b0 = fallback.b0();
    let rule = RadialRule::uniform_radius(b0, h * count as f64, count).ok()?;
    PolarGrid::new(b0, rule, n_theta, origin).ok()
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
