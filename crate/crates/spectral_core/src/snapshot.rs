use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::{SpectralError, TorusField, TorusGrid};

pub const SNAPSHOT_HEADER: &str = "d,N,components,time";

fn component_path(dir: &Path, stem: &str, c: usize) -> PathBuf {
    dir.join(format!("{stem}_c{c}.csv"))
}

/// Writes one CSV per component: header line, metadata line, then grid
/// values row-major with the last axis along each row.
pub fn write_snapshot(
    dir: &Path,
    stem: &str,
    f: &TorusField,
    time: f64,
) -> Result<Vec<PathBuf>, SpectralError> {
    fs::create_dir_all(dir)?;
    let g = f.grid();
    let n = g.n();
    let mut paths = Vec::new();
    for c in 0..f.components() {
        let vals = f.to_real_component(c);
        let path = component_path(dir, stem, c);
        let tmp = path.with_extension("csv.tmp");
        {
            let mut out = std::io::BufWriter::new(fs::File::create(&tmp)?);
            writeln!(out, "{SNAPSHOT_HEADER}")?;
            writeln!(out, "{},{},{},{}", g.dim(), n, f.components(), time)?;
            for row in vals.chunks(n) {
                let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
                writeln!(out, "{}", line.join(","))?;
            }
        }
        fs::rename(&tmp, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

/// Reads back a snapshot written by [`write_snapshot`]; returns field and time.
pub fn read_snapshot(dir: &Path, stem: &str) -> Result<(TorusField, f64), SpectralError> {
    let first = fs::read_to_string(component_path(dir, stem, 0))?;
    let (d, n, m, t) = parse_meta(&first)?;
    let grid = TorusGrid::new(d, n)?;
    let mut values = Vec::with_capacity(m);
    for c in 0..m {
        let text = if c == 0 {
            first.clone()
        } else {
            fs::read_to_string(component_path(dir, stem, c))?
        };
        let vals: Result<Vec<f64>, _> = text
            .lines()
            .skip(2)
            .flat_map(|l| l.split(','))
            .map(|v| v.trim().parse::<f64>())
            .collect();
        let vals = vals.map_err(|e| SpectralError::Format(e.to_string()))?;
        if vals.len() != grid.len() {
            return Err(SpectralError::Format(format!(
                "expected {} values, found {}",
                grid.len(),
                vals.len()
            )));
        }
        values.push(vals);
    }
    Ok((TorusField::from_real(&grid, &values), t))
}

fn parse_meta(text: &str) -> Result<(usize, usize, usize, f64), SpectralError> {
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(SpectralError::Format("missing header".into()));
    }
    let meta: Vec<&str> = lines
        .next()
        .ok_or_else(|| SpectralError::Format("missing metadata".into()))?
        .split(',')
        .collect();
    let bad = |_| SpectralError::Format("bad metadata".into());
    if meta.len() != 4 {
        return Err(SpectralError::Format("bad metadata".into()));
    }
    Ok((
        meta[0].parse().map_err(bad)?,
        meta[1].parse().map_err(bad)?,
        meta[2].parse().map_err(bad)?,
        meta[3].parse().map_err(|_| SpectralError::Format("bad time".into()))?,
    ))
}
