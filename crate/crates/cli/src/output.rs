//! Plain-text output files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use qdyn_core::{Grid1D, PhaseSpaceField};
use qdyn_observables::ObservableRecord;

use crate::error::CliError;

pub const TIMESERIES: &str = "timeseries.csv";
pub const TIMESERIES_HEADER: &str = "t,norm,N_minus,N_plus,q_mean_minus,q_mean_plus,energy";
pub const DENSITY_HEADER: &str = "q,density";
pub const METADATA: &str = "metadata.txt";
pub const COMPARE: &str = "compare.csv";
pub const NA: &str = "NA";

/// Fixed-width time stamp so that file names sort by time.
pub fn stamp(t: f64) -> String {
    format!("{t:08.3}")
}

pub fn density_name(t: f64) -> String {
    format!("density_t{}.csv", stamp(t))
}

pub fn wigner_name(t: f64) -> String {
    format!("wigner_t{}.mat", stamp(t))
}

/// Shortest representation that parses back to the same value.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| x.to_string())
}

pub fn timeseries_row(r: &ObservableRecord) -> String {
    format!(
        "{},{},{},{},{},{},{}",
        r.t,
        r.norm,
        r.n_minus,
        r.n_plus,
        fmt_opt(r.q_mean_minus),
        fmt_opt(r.q_mean_plus),
        fmt_opt(r.energy)
    )
}

pub(crate) struct TextFile {
    path: PathBuf,
    out: BufWriter<File>,
}

impl TextFile {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn line(&mut self, text: &str) -> Result<(), CliError> {
        self.out.write_all(text.as_bytes()).and_then(|_| self.out.write_all(b"\n")).map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

pub fn write_density(path: &Path, grid: &Grid1D, density: &[f64]) -> Result<(), CliError> {
    let mut f = TextFile::create(path)?;
    f.line(DENSITY_HEADER)?;
    for (i, d) in density.iter().enumerate() {
        f.line(&format!("{},{}", grid.point(i), d))?;
    }
    f.finish()
}

/// First line `rows cols qmin dq pmin dp`, then one row per `q`.
pub fn write_matrix(path: &Path, field: &PhaseSpaceField) -> Result<(), CliError> {
    let g = field.grid;
    let mut f = TextFile::create(path)?;
    f.line(&format!("{} {} {} {} {} {}", g.q.n(), g.p.n(), g.q.min(), g.q.step(), g.p.min(), g.p.step()))?;
    for iq in 0..g.q.n() {
        let row: Vec<String> = field.row(iq).iter().map(|v| v.to_string()).collect();
        f.line(&row.join(" "))?;
    }
    f.finish()
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Rows of a CSV file after checking its header; `NA` becomes `None`.
pub fn read_csv(path: &Path, header: &str) -> Result<Vec<Vec<Option<f64>>>, CliError> {
    let text = read_text(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(header) {
        return Err(CliError::Malformed { path: path.into(), reason: format!("expected header `{header}`") });
    }
    let width = header.split(',').count();
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != width {
                return Err(CliError::Malformed { path: path.into(), reason: format!("row {} has {} cells", i + 2, cells.len()) });
            }
            cells
                .iter()
                .map(|c| match *c {
                    NA => Ok(None),
                    _ => c.parse().map(Some).map_err(|_| CliError::Malformed {
                        path: path.into(),
                        reason: format!("row {}: `{c}` is not a number", i + 2),
                    }),
                })
                .collect()
        })
        .collect()
}
