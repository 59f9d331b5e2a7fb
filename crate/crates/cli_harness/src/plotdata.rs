use std::fs;
use std::path::{Path, PathBuf};

use compressible_dynamics::TRAJECTORY_HEADER;
use ergodic_lab::HISTOGRAM_HEADER;
use psdo_calculus::loglog_slope;

use crate::report::Sink;
use crate::HarnessError;

pub const PLOT_HEADER: [&str; 3] = ["series", "x", "y"];
pub const MANIFEST_HEADER: [&str; 4] = ["kind", "series", "points", "status"];
pub const SAMPLES_HEADER: [&str; 8] =
    ["time", "l2_norm", "hs_norm", "htheta_norm", "wpinf_norm", "v_monitor", "decay", "njumps"];
pub const CONVERGENCE_HEADER: [&str; 2] = ["dt", "error"];
const DEFECT_COLUMNS: [&str; 5] = ["l", "r", "defect", "bound", "pass"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    NormTrace,
    Defect,
    Convergence,
    Histogram,
}

impl Kind {
    fn file(self) -> &'static str {
        match self {
            Kind::NormTrace => "norm_traces.csv",
            Kind::Defect => "defect_curves.csv",
            Kind::Convergence => "convergence.csv",
            Kind::Histogram => "histograms.csv",
        }
    }

    fn name(self) -> &'static str {
        &self.file()[..self.file().len() - 4]
    }

    fn detect(header: &csv::StringRecord) -> Option<(Kind, usize, usize)> {
        let h: Vec<&str> = header.iter().collect();
        if h == TRAJECTORY_HEADER {
            Some((Kind::NormTrace, 0, 1))
        } else if h == SAMPLES_HEADER {
            Some((Kind::NormTrace, 0, 2))
        } else if h == DEFECT_COLUMNS {
            Some((Kind::Defect, 0, 2))
        } else if h == CONVERGENCE_HEADER {
            Some((Kind::Convergence, 0, 1))
        } else if h == HISTOGRAM_HEADER {
            Some((Kind::Histogram, 0, 2))
        } else {
            None
        }
    }
}

fn csv_files(dir: &Path, out: &mut Vec<PathBuf>) {
    let Ok(entries) = fs::read_dir(dir) else { return };
    let mut entries: Vec<PathBuf> = entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            if p.file_name().is_some_and(|n| n != "plotdata") {
                csv_files(&p, out);
            }
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push(p);
        }
    }
}

fn read_series(path: &Path, kind: Kind, xc: usize, yc: usize) -> Result<Vec<(f64, f64)>, String> {
    let mut r = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    let mut pts = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| rec.get(i).and_then(|v| v.parse::<f64>().ok()).ok_or(format!("bad value in column {i}"));
        let x = if kind == Kind::Histogram { 0.5 * (num(0)? + num(1)?) } else { num(xc)? };
        pts.push((x, num(yc)?));
    }
    Ok(pts)
}

/// Long-format (series, x, y) files per kind plus a manifest. Convergence
/// series get a trailing `fit_slope` row.
pub fn emit_plotdata(results: &Path, sink: &mut Sink) -> Result<usize, HarnessError> {
    let mut files = Vec::new();
    csv_files(results, &mut files);
    let kinds = [Kind::NormTrace, Kind::Defect, Kind::Convergence, Kind::Histogram];
    let mut rows: Vec<Vec<Vec<String>>> = vec![Vec::new(); kinds.len()];
    let mut manifest = Vec::new();
    for path in files {
        let Ok(mut r) = csv::Reader::from_path(&path) else { continue };
        let Ok(header) = r.headers().cloned() else { continue };
        let Some((kind, xc, yc)) = Kind::detect(&header) else { continue };
        let series = path.strip_prefix(results).unwrap_or(&path).to_string_lossy().replace('\\', "/");
        let k = kinds.iter().position(|&q| q == kind).unwrap_or(0);
        match read_series(&path, kind, xc, yc) {
            Ok(pts) => {
                for &(x, y) in &pts {
                    rows[k].push(vec![series.clone(), x.to_string(), y.to_string()]);
                }
                if kind == Kind::Convergence && pts.len() >= 2 {
                    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
                    rows[k].push(vec![series.clone(), "fit_slope".into(), loglog_slope(&xs, &ys).to_string()]);
                }
                manifest.push(vec![kind.name().into(), series, pts.len().to_string(), "ok".into()]);
            }
            Err(e) => manifest.push(vec![kind.name().into(), series, "0".into(), format!("error: {e}")]),
        }
    }
    for (kind, r) in kinds.iter().zip(&rows) {
        if !r.is_empty() {
            sink.rows(&format!("plotdata/{}", kind.file()), &PLOT_HEADER, r)?;
        }
    }
    sink.rows("plotdata/manifest.csv", &MANIFEST_HEADER, &manifest)?;
    Ok(manifest.len())
}
