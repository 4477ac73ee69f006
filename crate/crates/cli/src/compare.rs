//! Comparison of two run directories.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use qdyn_core::Grid1D;
use qdyn_observables::compare_densities;

use crate::error::CliError;
use crate::output::{self, TextFile};

pub const COMPARE_HEADER: &str = "item,t,L1,L2,Linf,max_deviation";
const SERIES: [&str; 6] = ["norm", "N_minus", "N_plus", "q_mean_minus", "q_mean_plus", "energy"];
const TIME_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityDiff {
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub densities: Vec<DensityDiff>,
    /// Largest `|a − b|` per time-series column over rows where both are defined.
    pub series: Vec<(String, Option<f64>)>,
}

fn density_files(dir: &Path) -> Result<BTreeSet<String>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut out = BTreeSet::new();
    for entry in rd {
        let name = entry.map_err(|e| CliError::io(dir, e))?.file_name().to_string_lossy().into_owned();
        if name.starts_with("density_t") && name.ends_with(".csv") {
            out.insert(name);
        }
    }
    Ok(out)
}

fn read_density(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let rows = output::read_csv(path, output::DENSITY_HEADER)?;
    let bad = || CliError::Malformed { path: path.into(), reason: "NA in density file".into() };
    let mut q = Vec::with_capacity(rows.len());
    let mut d = Vec::with_capacity(rows.len());
    for r in rows {
        q.push(r[0].ok_or_else(bad)?);
        d.push(r[1].ok_or_else(bad)?);
    }
    Ok((q, d))
}

fn uniform_grid(q: &[f64], path: &Path) -> Result<Grid1D, CliError> {
    if q.len() < 2 {
        return Err(CliError::Malformed { path: path.into(), reason: "fewer than two grid points".into() });
    }
    Grid1D::new(q.len(), q[0], q[1] - q[0]).map_err(|e| CliError::Malformed { path: path.into(), reason: e.to_string() })
}

/// `values` sampled on `from`, linearly interpolated at `at`; zero outside.
fn resample(from: &Grid1D, values: &[f64], at: &[f64]) -> Vec<f64> {
    at.iter()
        .map(|&x| match from.locate(x) {
            Some((i, f)) => values[i] * (1.0 - f) + values.get(i + 1).copied().unwrap_or(0.0) * f,
            None => 0.0,
        })
        .collect()
}

/// Compares `b` against `a` on `a`'s grids and writes `out`.
///
/// Density snapshots must exist at the same times in both runs; when the
/// grids differ `b` is linearly interpolated onto `a`'s grid.
pub fn compare_runs(a: &Path, b: &Path, out: &Path) -> Result<CompareReport, CliError> {
    let ts_a = output::read_csv(&a.join(output::TIMESERIES), output::TIMESERIES_HEADER)?;
    let ts_b = output::read_csv(&b.join(output::TIMESERIES), output::TIMESERIES_HEADER)?;
    if ts_a.len() != ts_b.len() {
        return Err(CliError::Mismatch(format!("{} vs {} time-series rows", ts_a.len(), ts_b.len())));
    }
    for (ra, rb) in ts_a.iter().zip(&ts_b) {
        let (ta, tb) = (ra[0].unwrap_or(f64::NAN), rb[0].unwrap_or(f64::NAN));
        if !((ta - tb).abs() <= TIME_TOLERANCE * ta.abs().max(1.0)) {
            return Err(CliError::Mismatch(format!("time stamps {ta} and {tb} differ")));
        }
    }
    let series = SERIES
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let dev = ts_a
                .iter()
                .zip(&ts_b)
                .filter_map(|(ra, rb)| Some((ra[c + 1]? - rb[c + 1]?).abs()))
                .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
            (name.to_string(), dev)
        })
        .collect();

    let (fa, fb) = (density_files(a)?, density_files(b)?);
    if fa != fb {
        let only: Vec<&String> = fa.symmetric_difference(&fb).collect();
        return Err(CliError::Mismatch(format!("density snapshots present in only one run: {only:?}")));
    }
    let mut densities = Vec::with_capacity(fa.len());
    for name in &fa {
        let (pa, pb): (PathBuf, PathBuf) = (a.join(name), b.join(name));
        let (qa, da) = read_density(&pa)?;
        let (qb, db) = read_density(&pb)?;
        let grid = uniform_grid(&qa, &pa)?;
        let same = qa.len() == qb.len() && qa.iter().zip(&qb).all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0));
        let db = if same { db } else { resample(&uniform_grid(&qb, &pb)?, &db, &qa) };
        let m = compare_densities(&grid, &db, &da)?;
        let t: f64 = name["density_t".len()..name.len() - 4].parse().map_err(|_| CliError::Malformed {
            path: pa.clone(),
            reason: "file name does not carry a time stamp".into(),
        })?;
        densities.push(DensityDiff { t, l1: m.l1, l2: m.l2, linf: m.linf });
    }

    let report = CompareReport { densities, series };
    let mut f = TextFile::create(out)?;
    f.line(COMPARE_HEADER)?;
    for d in &report.densities {
        f.line(&format!("density,{},{},{},{},{}", d.t, d.l1, d.l2, d.linf, output::NA))?;
    }
    for (name, dev) in &report.series {
        let na = output::NA;
        f.line(&format!("{name},{na},{na},{na},{na},{}", output::fmt_opt(*dev)))?;
    }
    f.finish()?;
    Ok(report)
}
