//! Separation scans, van der Waals asymptotics and Hamaker-constant fits.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::NM_PER_M;
use crate::lifshitz::{self, Geometry, GeometryKind, LifshitzError, LifshitzOptions, MaterialStack};
use crate::warning::Warning;

/// Below this separation exchange repulsion dominates and the theory does not apply.
pub const MIN_SEPARATION_NM: f64 = 0.5;
pub const DEFAULT_FIT_WINDOW_NM: (f64, f64) = (0.5, 2.0);
pub const SCAN_CSV_HEADER: &str = "a_nm,force,correction_factor,quad_error";

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Lifshitz(#[from] LifshitzError),
    #[error("separation grid is empty")]
    EmptyGrid,
    #[error("separation {0} nm appears more than once in the grid")]
    DuplicateSeparation(f64),
    #[error("separation {0} nm is below the 0.5 nm minimum")]
    SeparationTooSmall(f64),
    #[error("fit window [{lo}, {hi}] nm is not inside the scanned range [{scan_lo}, {scan_hi}] nm")]
    WindowOutsideScan { lo: f64, hi: f64, scan_lo: f64, scan_hi: f64 },
    #[error("fit needs at least 3 points in the window, found {0}")]
    TooFewPoints(usize),
    #[error("force magnitude does not decrease between {0} nm and {1} nm")]
    NonMonotonic(f64, f64),
    #[error("Hamaker constant must be non-negative and finite, got {0}")]
    InvalidHamaker(f64),
    #[error("combining needs at least 2 fits, got {0}")]
    TooFewFits(usize),
    #[error("scan CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("scan CSV line {line}: {message}")]
    CsvFormat { line: u64, message: String },
    #[error("scan JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub a_nm: f64,
    pub force: f64,
    pub correction_factor: f64,
    pub quad_error: f64,
    #[serde(default = "default_true")]
    pub converged: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub geometry: GeometryKind,
    pub stack: String,
    pub points: Vec<ScanPoint>,
}

/// The vdW grid: 0.1 nm steps on [0.5, 2], 0.2 nm on (2, 4], 1 nm on (4, 10]
/// and 5 nm on (10, 100].
pub fn vdw_grid() -> Vec<f64> {
    // Built in tenths of a nanometre so the nodes are exact decimals.
    let tenths = (5..=20)
        .chain((22..=40).step_by(2))
        .chain((50..=100).step_by(10))
        .chain((150..=1000).step_by(50));
    tenths.map(|t| t as f64 / 10.0).collect()
}

/// `count` separations spaced evenly in ln a over [lo, hi].
pub fn log_grid(lo_nm: f64, hi_nm: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo_nm],
        _ => {
            let step = (hi_nm / lo_nm).ln() / (count - 1) as f64;
            (0..count).map(|i| lo_nm * (step * i as f64).exp()).collect()
        }
    }
}

fn validated_grid(grid: &[f64]) -> Result<Vec<f64>, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::EmptyGrid);
    }
    let mut sorted = grid.to_vec();
    for &a in &sorted {
        if !a.is_finite() {
            return Err(LifshitzError::InvalidSeparation(a).into());
        }
        if a < MIN_SEPARATION_NM {
            return Err(AnalysisError::SeparationTooSmall(a));
        }
    }
    sorted.sort_by(f64::total_cmp);
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(AnalysisError::DuplicateSeparation(w[0]));
    }
    Ok(sorted)
}

/// Evaluates the force at each separation. Points run in parallel on the
/// current rayon pool; the output order is always by separation.
///
/// A point whose quadrature misses the tolerance keeps its best estimate
/// with `converged = false`.
pub fn scan(
    stack: &MaterialStack,
    geometry: GeometryKind,
    grid: &[f64],
    opts: &LifshitzOptions,
) -> Result<ScanResult, AnalysisError> {
    let grid = validated_grid(grid)?;
    let points = grid
        .par_iter()
        .map(|&a| scan_point(stack, geometry, a, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScanResult {
        geometry,
        stack: stack.describe(),
        points,
    })
}

fn scan_point(
    stack: &MaterialStack,
    geometry: GeometryKind,
    a_nm: f64,
    opts: &LifshitzOptions,
) -> Result<ScanPoint, AnalysisError> {
    let geom = Geometry {
        kind: geometry,
        separation_nm: a_nm,
    };
    let result = match lifshitz::force(stack, &geom, opts) {
        Ok(r) => r,
        Err(LifshitzError::NonConvergence { partial, .. }) => *partial,
        Err(e) => return Err(e.into()),
    };
    Ok(ScanPoint {
        a_nm,
        force: result.value,
        correction_factor: result.correction_factor,
        quad_error: result.quad_error,
        converged: result.converged,
        warnings: result.warnings.iter().map(Warning::to_string).collect(),
    })
}

impl ScanResult {
    pub fn all_failed(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| !p.converged)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(SCAN_CSV_HEADER.split(','))?;
        for p in &self.points {
            w.write_record([
                p.a_nm.to_string(),
                p.force.to_string(),
                p.correction_factor.to_string(),
                p.quad_error.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }

    /// Reads a scan written by [`ScanResult::write_csv`]; the geometry is not
    /// part of the CSV and must be supplied.
    pub fn read_csv<R: Read>(source: R, geometry: GeometryKind, stack: &str) -> Result<Self, AnalysisError> {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(source);
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        if header.join(",") != SCAN_CSV_HEADER {
            return Err(AnalysisError::CsvFormat {
                line: 1,
                message: format!("expected header `{SCAN_CSV_HEADER}`, found `{}`", header.join(",")),
            });
        }
        let mut points = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let field = |i: usize| -> Result<f64, AnalysisError> {
                record[i].trim().parse().map_err(|_| AnalysisError::CsvFormat {
                    line,
                    message: format!("`{}` is not a number", &record[i]),
                })
            };
            points.push(ScanPoint {
                a_nm: field(0)?,
                force: field(1)?,
                correction_factor: field(2)?,
                quad_error: field(3)?,
                converged: true,
                warnings: Vec::new(),
            });
        }
        let grid: Vec<f64> = points.iter().map(|p| p.a_nm).collect();
        validated_grid(&grid)?;
        points.sort_by(|p, q| p.a_nm.total_cmp(&q.a_nm));
        Ok(ScanResult {
            geometry,
            stack: stack.to_string(),
            points,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamakerFit {
    /// Hamaker constant in J.
    pub h: f64,
    pub h_sigma: f64,
    /// Power index of the force-distance law.
    pub n: f64,
    pub n_sigma: f64,
    /// First and last separation used, in nm.
    pub fit_window: (f64, f64),
    pub points: usize,
}

/// Non-retarded force: −H/(6πa³) per unit area, or −HR/(6a²) for a sphere.
pub fn vdw_asymptote(h_joule: f64, geom: &Geometry) -> Result<f64, AnalysisError> {
    if !(h_joule >= 0.0 && h_joule.is_finite()) {
        return Err(AnalysisError::InvalidHamaker(h_joule));
    }
    let a = geom.separation_nm / NM_PER_M;
    Ok(match geom.kind {
        GeometryKind::PlatePlate => -h_joule / (6.0 * PI * a.powi(3)),
        GeometryKind::SpherePlate { radius_um } => -h_joule * radius_um * 1e-6 / (6.0 * a * a),
    })
}

fn hamaker_from_force(force: f64, a_nm: f64, geometry: GeometryKind) -> f64 {
    let a = a_nm / NM_PER_M;
    match geometry {
        GeometryKind::PlatePlate => 6.0 * PI * a.powi(3) * force.abs(),
        GeometryKind::SpherePlate { radius_um } => 6.0 * a * a * force.abs() / (radius_um * 1e-6),
    }
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fits the van der Waals law over the scan points inside `window_nm`.
///
/// The power index is the mean of log-log slopes between adjacent points;
/// H is the mean of the per-point inversions of the force law. Both spreads
/// are sample standard deviations.
pub fn fit_hamaker(scan: &ScanResult, window_nm: (f64, f64)) -> Result<HamakerFit, AnalysisError> {
    let (lo, hi) = window_nm;
    let scan_lo = scan.points.first().map_or(f64::NAN, |p| p.a_nm);
    let scan_hi = scan.points.last().map_or(f64::NAN, |p| p.a_nm);
    let slack = 1e-9;
    if !(lo <= hi && lo >= scan_lo * (1.0 - slack) && hi <= scan_hi * (1.0 + slack)) {
        return Err(AnalysisError::WindowOutsideScan { lo, hi, scan_lo, scan_hi });
    }
    let inside: Vec<&ScanPoint> = scan
        .points
        .iter()
        .filter(|p| p.a_nm >= lo * (1.0 - slack) && p.a_nm <= hi * (1.0 + slack))
        .collect();
    if inside.len() < 3 {
        return Err(AnalysisError::TooFewPoints(inside.len()));
    }
    let mut slopes = Vec::with_capacity(inside.len() - 1);
    for w in inside.windows(2) {
        let (f0, f1) = (w[0].force.abs(), w[1].force.abs());
        if !(f1 < f0) {
            return Err(AnalysisError::NonMonotonic(w[0].a_nm, w[1].a_nm));
        }
        slopes.push(-(f1.ln() - f0.ln()) / (w[1].a_nm.ln() - w[0].a_nm.ln()));
    }
    let hs: Vec<f64> = inside
        .iter()
        .map(|p| hamaker_from_force(p.force, p.a_nm, scan.geometry))
        .collect();
    let (n, n_sigma) = mean_and_sample_std(&slopes);
    let (h, h_sigma) = mean_and_sample_std(&hs);
    Ok(HamakerFit {
        h,
        h_sigma,
        n,
        n_sigma,
        fit_window: (inside[0].a_nm, inside[inside.len() - 1].a_nm),
        points: inside.len(),
    })
}

/// Envelope of several Hamaker estimates for one material.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CombinedHamaker {
    /// Midpoint of the union of the intervals [H − σ, H + σ].
    pub h: f64,
    /// Half-width of that union.
    pub half_width: f64,
    /// `h` rounded to two significant figures.
    pub rounded_h: f64,
    /// Half-width about `rounded_h` covering the union, rounded to the last
    /// digit of `rounded_h` (at least one unit of it).
    pub rounded_half_width: f64,
    pub warnings: Vec<Warning>,
}

pub fn combine_hamaker(fits: &[HamakerFit]) -> Result<CombinedHamaker, AnalysisError> {
    if fits.len() < 2 {
        return Err(AnalysisError::TooFewFits(fits.len()));
    }
    let mut intervals: Vec<(f64, f64)> = fits.iter().map(|f| (f.h - f.h_sigma, f.h + f.h_sigma)).collect();
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut warnings = Vec::new();
    let mut reach = intervals[0].1;
    for &(l, u) in &intervals[1..] {
        if l > reach {
            warnings.push(Warning::DisjointIntervals);
            break;
        }
        reach = reach.max(u);
    }
    let lower = intervals[0].0;
    let upper = intervals.iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
    let h = 0.5 * (lower + upper);
    let half_width = 0.5 * (upper - lower);

    let unit = 10f64.powf(h.abs().log10().floor() - 1.0);
    let rounded_h = (h / unit).round() * unit;
    let reach_from_rounded = (rounded_h - lower).max(upper - rounded_h);
    let rounded_half_width = (reach_from_rounded / unit).round().max(1.0) * unit;
    Ok(CombinedHamaker {
        h,
        half_width,
        rounded_h,
        rounded_half_width,
        warnings,
    })
}
