//! CSV loading and emission, analysis reports, and plot-data files.
//!
//! All numeric output uses shortest round-trip scientific notation, so
//! every load/emit pair is lossless at full f64 precision and deterministic
//! runs produce byte-identical files.
//!
//! Spectrum CSV: two or three columns `x, y[, sigma]`, `#` header lines
//! optional. Sweep CSV: `B_tesla, family, line_index, offset_ghz[, sigma_ghz]`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::fit::SpectrumSeries;
use crate::transitions::{pairwise_center, Family, MeasuredLine, MeasuredSweep, SweepTable};
use crate::units::{wavelength_nm_to_ghz, UnitsError};

/// Interpretation of a two-column spectrum file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumFormat {
    /// x in GHz (offsets or absolute), y in counts.
    FreqCounts,
    /// x in nm; converted to GHz on load.
    WavelengthCounts,
    /// x in ns (delay histogram).
    DelayCounts,
    /// x in degrees (half-wave plate angle), y in intensity.
    AngleIntensity,
}

impl SpectrumFormat {
    pub fn label(self) -> &'static str {
        match self {
            SpectrumFormat::FreqCounts => "freq_counts",
            SpectrumFormat::WavelengthCounts => "wavelength_counts",
            SpectrumFormat::DelayCounts => "delay_counts",
            SpectrumFormat::AngleIntensity => "angle_intensity",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s.trim() {
            "freq_counts" => Some(SpectrumFormat::FreqCounts),
            "wavelength_counts" => Some(SpectrumFormat::WavelengthCounts),
            "delay_counts" => Some(SpectrumFormat::DelayCounts),
            "angle_intensity" => Some(SpectrumFormat::AngleIntensity),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {reason}")]
    Parse {
        path: String,
        line: usize,
        reason: String,
    },
    #[error("{path}: x axis is not strictly monotone at line {line}")]
    NonMonotonicAxis { path: String, line: usize },
    #[error("{path}: no data rows")]
    EmptySeries { path: String },
    #[error("{path}:{line}: duplicate line entry (field {field_tesla} T, family {family}, index {index})")]
    DuplicateLine {
        path: String,
        line: usize,
        field_tesla: f64,
        family: Family,
        index: u8,
    },
    #[error(transparent)]
    Units(#[from] UnitsError),
}

fn parse_cell(path: &str, line: usize, cell: &str, what: &str) -> Result<f64, DataError> {
    cell.trim().parse::<f64>().map_err(|_| DataError::Parse {
        path: path.to_string(),
        line,
        reason: format!("{what}: expected a number, got `{}`", cell.trim()),
    })
}

/// Load a two- or three-column spectrum CSV. Wavelength files are
/// converted to GHz point by point; the x axis must end up strictly
/// monotone (either direction).
pub fn load_spectrum(path: &Path, format: SpectrumFormat) -> Result<SpectrumSeries, DataError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut sigma: Vec<f64> = Vec::new();
    let mut last_line = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').collect();
        if cells.len() != 2 && cells.len() != 3 {
            return Err(DataError::Parse {
                path: display,
                line,
                reason: format!("expected 2 or 3 columns, got {}", cells.len()),
            });
        }
        let mut xv = parse_cell(&display, line, cells[0], "x")?;
        if format == SpectrumFormat::WavelengthCounts {
            xv = wavelength_nm_to_ghz(xv)?;
        }
        let yv = parse_cell(&display, line, cells[1], "y")?;
        if cells.len() == 3 {
            if sigma.len() != x.len() {
                return Err(DataError::Parse {
                    path: display,
                    line,
                    reason: "sigma column must be present on every row or none".into(),
                });
            }
            sigma.push(parse_cell(&display, line, cells[2], "sigma")?);
        } else if !sigma.is_empty() {
            return Err(DataError::Parse {
                path: display,
                line,
                reason: "sigma column must be present on every row or none".into(),
            });
        }
        x.push(xv);
        y.push(yv);
        last_line = line;
    }
    if x.is_empty() {
        return Err(DataError::EmptySeries { path: display });
    }
    let monotone = x.windows(2).all(|w| w[1] > w[0]) || x.windows(2).all(|w| w[1] < w[0]);
    if !monotone {
        return Err(DataError::NonMonotonicAxis {
            path: display,
            line: last_line,
        });
    }
    Ok(SpectrumSeries {
        x,
        y,
        sigma: (!sigma.is_empty()).then_some(sigma),
    })
}

/// Write a spectrum as CSV with a `#` header naming the columns.
pub fn write_spectrum(series: &SpectrumSeries, header: &str, path: &Path) -> Result<(), DataError> {
    let mut out = String::new();
    out.push_str(&format!("# {header}\n"));
    for i in 0..series.len() {
        match &series.sigma {
            Some(s) => out.push_str(&format!("{:e},{:e},{:e}\n", series.x[i], series.y[i], s[i])),
            None => out.push_str(&format!("{:e},{:e}\n", series.x[i], series.y[i])),
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Load a measured Zeeman sweep from
/// `B_tesla, family, line_index, offset_ghz[, sigma_ghz]` rows.
///
/// Rows may arrive in any order; fields are sorted ascending. Families
/// with fewer than four lines at some field load fine and are reported by
/// [`MeasuredSweep::incomplete_cells`]; a duplicated (field, family, index)
/// triple is an error.
pub fn load_sweep(path: &Path) -> Result<MeasuredSweep, DataError> {
    let display = path.display().to_string();
    let text = fs::read_to_string(path)?;
    // (field, lines, first line number for diagnostics)
    let mut groups: Vec<(f64, Vec<MeasuredLine>)> = Vec::new();
    let mut any = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = trimmed.split(',').collect();
        if cells.len() != 4 && cells.len() != 5 {
            return Err(DataError::Parse {
                path: display,
                line,
                reason: format!("expected 4 or 5 columns, got {}", cells.len()),
            });
        }
        let field = parse_cell(&display, line, cells[0], "B_tesla")?;
        let family = Family::from_label(cells[1]).ok_or_else(|| DataError::Parse {
            path: display.clone(),
            line,
            reason: format!(
                "family must be one of A, B, C, D; got `{}`",
                cells[1].trim()
            ),
        })?;
        let index_raw = parse_cell(&display, line, cells[2], "line_index")?;
        if index_raw.fract() != 0.0 || !(0.0..=3.0).contains(&index_raw) {
            return Err(DataError::Parse {
                path: display,
                line,
                reason: format!("line_index must be an integer in 0..=3, got {index_raw}"),
            });
        }
        let index = index_raw as u8;
        let offset = parse_cell(&display, line, cells[3], "offset_ghz")?;
        let sigma = if cells.len() == 5 {
            Some(parse_cell(&display, line, cells[4], "sigma_ghz")?)
        } else {
            None
        };

        let group = match groups.iter_mut().find(|(f, _)| *f == field) {
            Some(g) => g,
            None => {
                groups.push((field, Vec::new()));
                groups.last_mut().unwrap()
            }
        };
        if group
            .1
            .iter()
            .any(|l| l.family == family && l.index == index)
        {
            return Err(DataError::DuplicateLine {
                path: display,
                line,
                field_tesla: field,
                family,
                index,
            });
        }
        group.1.push(MeasuredLine {
            family,
            index,
            offset_ghz: offset,
            sigma_ghz: sigma,
        });
        any = true;
    }
    if !any {
        return Err(DataError::EmptySeries { path: display });
    }
    groups.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sweep = MeasuredSweep::default();
    for (field, mut lines) in groups {
        lines.sort_by(|a, b| a.family.cmp(&b.family).then(a.index.cmp(&b.index)));
        sweep.fields_tesla.push(field);
        sweep.entries.push(lines);
    }
    Ok(sweep)
}

/// Write a measured sweep in the same CSV schema [`load_sweep`] reads.
pub fn write_measured_sweep(sweep: &MeasuredSweep, path: &Path) -> Result<(), DataError> {
    let with_sigma = sweep
        .entries
        .iter()
        .any(|lines| lines.iter().any(|l| l.sigma_ghz.is_some()));
    let mut out = String::new();
    out.push_str(if with_sigma {
        "# B_tesla,family,line_index,offset_ghz,sigma_ghz\n"
    } else {
        "# B_tesla,family,line_index,offset_ghz\n"
    });
    for (field, lines) in sweep.fields_tesla.iter().zip(&sweep.entries) {
        for l in lines {
            match (with_sigma, l.sigma_ghz) {
                (true, sigma) => out.push_str(&format!(
                    "{:e},{},{},{:e},{:e}\n",
                    field,
                    l.family,
                    l.index,
                    l.offset_ghz,
                    sigma.unwrap_or(0.0)
                )),
                (false, _) => out.push_str(&format!(
                    "{:e},{},{},{:e}\n",
                    field, l.family, l.index, l.offset_ghz
                )),
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

/// Tab-separated plot data for a model sweep: one row per field, one
/// column per tracked line (named like `C0`), optionally pairwise-centered
/// per family within each field.
#[allow(clippy::needless_range_loop)]
pub fn emit_plot_data(sweep: &SweepTable, centered: bool, path: &Path) -> Result<(), DataError> {
    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for family in Family::ALL {
        let curves = sweep.curves_for(family);
        if curves.is_empty() {
            continue;
        }
        let mut values: Vec<Vec<f64>> = curves.iter().map(|c| c.offsets_ghz.clone()).collect();
        if centered && curves.len() == 4 {
            for fi in 0..sweep.fields_tesla.len() {
                let mut order: Vec<usize> = (0..4).collect();
                order.sort_by(|&a, &b| values[b][fi].total_cmp(&values[a][fi]));
                let sorted: Vec<f64> = order.iter().map(|&c| values[c][fi]).collect();
                let centered_sorted = pairwise_center(&sorted).expect("four sorted lines");
                for (pos, &curve) in order.iter().enumerate() {
                    values[curve][fi] = centered_sorted[pos];
                }
            }
        }
        for (curve, vals) in curves.iter().zip(values) {
            columns.push((curve.name(), vals));
        }
    }

    let mut out = String::new();
    out.push_str("# B_tesla");
    for (name, _) in &columns {
        out.push('\t');
        out.push_str(name);
    }
    out.push('\n');
    for (fi, field) in sweep.fields_tesla.iter().enumerate() {
        out.push_str(&format!("{field:e}"));
        for (_, vals) in &columns {
            out.push_str(&format!("\t{:e}", vals[fi]));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// A self-describing analysis report: command, input digests, effective
/// configuration, and results, in a stable key order.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub version: String,
    /// (input name, content digest) pairs.
    pub inputs: Vec<(String, String)>,
    /// Effective configuration echo; re-running with it (plus the command
    /// options below) reproduces the payload for deterministic commands.
    pub config: Vec<(String, String)>,
    /// Command-line options of this invocation.
    pub options: Vec<(String, String)>,
    pub results: Vec<(String, String)>,
}

impl Report {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("# snvtk report\n");
        out.push_str(&format!("command = {}\n", self.command));
        out.push_str(&format!("version = {}\n", self.version));
        out.push_str("\n[inputs]\n");
        for (k, v) in &self.inputs {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str("\n[config]\n");
        for (k, v) in &self.config {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str("\n[options]\n");
        for (k, v) in &self.options {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str("\n[results]\n");
        for (k, v) in &self.results {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

/// Write a report to disk.
pub fn emit_report(report: &Report, path: &Path) -> Result<(), DataError> {
    let mut file = fs::File::create(path)?;
    file.write_all(report.render().as_bytes())?;
    Ok(())
}

/// Key/value rows for a fit result, stable order, full precision.
pub fn fit_result_rows(fit: &crate::fit::FitResult) -> Vec<(String, String)> {
    let mut rows = Vec::new();
    for p in &fit.params {
        rows.push((format!("param.{}", p.name), format!("{:e}", p.value)));
        rows.push((
            format!("std_error.{}", p.name),
            format!("{:e}", p.std_error),
        ));
    }
    rows.push(("rss".into(), format!("{:e}", fit.rss)));
    rows.push(("converged".into(), fit.converged.to_string()));
    rows.push(("iterations".into(), fit.iterations.to_string()));
    for (i, w) in fit.warnings.iter().enumerate() {
        rows.push((format!("warning.{i}"), w.clone()));
    }
    rows
}
