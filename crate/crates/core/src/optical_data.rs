//! Tabulated complex refractive index data and the Im ε(ω) sampler built on it.
//!
//! Input tables are CSV with the header `energy_eV,n,k`; lines starting with
//! `#` are comments. Inside the table Im ε = 2nk is interpolated linearly in
//! log-log coordinates. Below a crossover energy the free-electron Drude loss
//! replaces the table, and above the last sample Im ε decays as a power law.

use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::HBAR_C_EV_NM;

/// Header line every optical CSV must start with (after comments).
pub const CSV_HEADER: &str = "energy_eV,n,k";

/// Default relative mismatch allowed between Drude and table at the crossover.
pub const DEFAULT_CONTINUITY_TOLERANCE: f64 = 0.05;

/// Default power-law exponent of the Im ε tail above the table.
pub const DEFAULT_HIGH_TAIL: f64 = 3.0;

#[derive(Debug, Error)]
pub enum OpticalDataError {
    #[error("I/O error reading optical table: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected header `{CSV_HEADER}`, found `{found}`")]
    Header { line: u64, found: String },
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: energy {energy_ev} eV is repeated; energies must be strictly increasing")]
    NonMonotonic { line: u64, energy_ev: f64 },
    #[error("line {line}: {message}")]
    InvalidValue { line: u64, message: String },
    #[error("optical table needs at least 2 entries, found {0}")]
    TooFewEntries(usize),
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("frequency must be positive, got {0} eV")]
    Domain(f64),
    #[error("invalid Drude parameters: {0}")]
    InvalidDrude(String),
    #[error("invalid sampler configuration: {0}")]
    InvalidSampler(String),
    #[error(
        "Drude and table disagree at crossover {crossover_ev} eV: Im eps {drude:.6e} vs {table:.6e} \
         ({mismatch:.1}% > {allowed:.1}%)",
        mismatch = 100.0 * mismatch,
        allowed = 100.0 * allowed
    )]
    Discontinuity {
        crossover_ev: f64,
        drude: f64,
        table: f64,
        mismatch: f64,
        allowed: f64,
    },
}

/// One tabulated sample: photon energy with the complex refractive index n + ik.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalSample {
    pub energy_ev: f64,
    pub n: f64,
    pub k: f64,
}

impl OpticalSample {
    pub fn im_epsilon(&self) -> f64 {
        2.0 * self.n * self.k
    }
}

/// Validated table of (energy, n, k) samples sorted by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTable {
    material_name: String,
    entries: Vec<OpticalSample>,
}

impl OpticalTable {
    /// Sorts the samples by energy and validates them.
    pub fn new(
        material_name: impl Into<String>,
        mut entries: Vec<OpticalSample>,
    ) -> Result<Self, OpticalDataError> {
        for s in &entries {
            validate_sample(s).map_err(OpticalDataError::InvalidSample)?;
        }
        entries.sort_by(|a, b| a.energy_ev.total_cmp(&b.energy_ev));
        if let Some(w) = entries.windows(2).find(|w| w[1].energy_ev <= w[0].energy_ev) {
            return Err(OpticalDataError::InvalidSample(format!(
                "energy {} eV is repeated",
                w[1].energy_ev
            )));
        }
        if entries.len() < 2 {
            return Err(OpticalDataError::TooFewEntries(entries.len()));
        }
        Ok(OpticalTable {
            material_name: material_name.into(),
            entries,
        })
    }

    /// Synthesizes a table from the Drude model on `points` log-spaced energies.
    ///
    /// Used for self-contained tests and as a stand-in when no measured data is
    /// available.
    pub fn from_drude(
        material_name: impl Into<String>,
        drude: &DrudeParams,
        lo_ev: f64,
        hi_ev: f64,
        points: usize,
    ) -> Result<Self, OpticalDataError> {
        if !(lo_ev > 0.0 && hi_ev > lo_ev && points >= 2) {
            return Err(OpticalDataError::InvalidSample(format!(
                "bad synthetic grid [{lo_ev}, {hi_ev}] with {points} points"
            )));
        }
        let step = (hi_ev / lo_ev).ln() / (points - 1) as f64;
        let entries = (0..points)
            .map(|i| {
                let omega = if i == points - 1 { hi_ev } else { lo_ev * (step * i as f64).exp() };
                let (n, k) = drude.refractive_index(omega);
                OpticalSample { energy_ev: omega, n, k }
            })
            .collect();
        Self::new(material_name, entries)
    }

    pub fn material_name(&self) -> &str {
        &self.material_name
    }

    pub fn entries(&self) -> &[OpticalSample] {
        &self.entries
    }

    /// `(first, last)` tabulated energy in eV.
    pub fn energy_range(&self) -> (f64, f64) {
        (self.entries[0].energy_ev, self.entries[self.entries.len() - 1].energy_ev)
    }

    /// Log-log interpolation of Im ε = 2nk; `None` outside the table.
    pub fn interpolate_im_epsilon(&self, omega_ev: f64) -> Option<f64> {
        let (lo, hi) = self.energy_range();
        if !(omega_ev >= lo && omega_ev <= hi) {
            return None;
        }
        let idx = self.entries.partition_point(|s| s.energy_ev < omega_ev);
        let right = &self.entries[idx];
        if right.energy_ev == omega_ev {
            return Some(right.im_epsilon());
        }
        let left = &self.entries[idx - 1];
        let (ya, yb) = (left.im_epsilon(), right.im_epsilon());
        let t = (omega_ev / left.energy_ev).ln() / (right.energy_ev / left.energy_ev).ln();
        if ya > 0.0 && yb > 0.0 {
            Some((ya.ln() + t * (yb / ya).ln()).exp())
        } else {
            // A zero endpoint has no logarithm; fall back to linear in ln ω.
            Some(ya + t * (yb - ya))
        }
    }
}

fn validate_sample(s: &OpticalSample) -> Result<(), String> {
    if !(s.energy_ev.is_finite() && s.energy_ev > 0.0) {
        return Err(format!("energy must be positive and finite, got {}", s.energy_ev));
    }
    if !(s.n.is_finite() && s.n >= 0.0) {
        return Err(format!("n must be non-negative, got {}", s.n));
    }
    if !(s.k.is_finite() && s.k >= 0.0) {
        return Err(format!("k must be non-negative, got {}", s.k));
    }
    Ok(())
}

/// Parses an optical CSV (`energy_eV,n,k`) into a validated table.
///
/// Rows may appear in any order; duplicated energies, malformed rows and
/// negative n or k are reported with their 1-based line number.
pub fn parse_optical_csv<R: Read>(
    source: R,
    material_name: impl Into<String>,
) -> Result<OpticalTable, OpticalDataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(source);

    let mut header_seen = false;
    let mut rows: Vec<(u64, OpticalSample)> = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            match e.into_kind() {
                csv::ErrorKind::Io(io) => OpticalDataError::Io(io),
                other => OpticalDataError::Malformed {
                    line,
                    message: format!("{other:?}"),
                },
            }
        })?;
        if !more {
            break;
        }
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if !header_seen {
            let found = record.iter().collect::<Vec<_>>().join(",");
            if found != CSV_HEADER {
                return Err(OpticalDataError::Header { line, found });
            }
            header_seen = true;
            continue;
        }
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != 3 {
            return Err(OpticalDataError::Malformed {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let mut values = [0.0; 3];
        for (slot, (field, name)) in values.iter_mut().zip(record.iter().zip(["energy_eV", "n", "k"])) {
            *slot = field.parse::<f64>().map_err(|_| OpticalDataError::Malformed {
                line,
                message: format!("cannot parse {name} from `{field}`"),
            })?;
        }
        let sample = OpticalSample {
            energy_ev: values[0],
            n: values[1],
            k: values[2],
        };
        validate_sample(&sample).map_err(|message| OpticalDataError::InvalidValue { line, message })?;
        rows.push((line, sample));
    }
    if !header_seen {
        return Err(OpticalDataError::Header {
            line: 1,
            found: String::new(),
        });
    }

    rows.sort_by(|a, b| a.1.energy_ev.total_cmp(&b.1.energy_ev).then(a.0.cmp(&b.0)));
    if let Some(w) = rows.windows(2).find(|w| w[1].1.energy_ev <= w[0].1.energy_ev) {
        return Err(OpticalDataError::NonMonotonic {
            line: w[1].0,
            energy_ev: w[1].1.energy_ev,
        });
    }
    OpticalTable::new(material_name, rows.into_iter().map(|(_, s)| s).collect())
}

/// Free-electron (Drude) parameters, both in eV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrudeParams {
    omega_p: f64,
    gamma: f64,
}

impl DrudeParams {
    /// Aluminium: ω_p = 12.5 eV, γ = 0.063 eV.
    pub const ALUMINUM: DrudeParams = DrudeParams {
        omega_p: 12.5,
        gamma: 0.063,
    };

    /// Gold: ω_p = 9.0 eV, γ = 0.035 eV.
    pub const GOLD: DrudeParams = DrudeParams {
        omega_p: 9.0,
        gamma: 0.035,
    };

    pub fn new(omega_p_ev: f64, gamma_ev: f64) -> Result<Self, OpticalDataError> {
        if !(omega_p_ev.is_finite() && omega_p_ev > 0.0) {
            return Err(OpticalDataError::InvalidDrude(format!(
                "plasma frequency must be positive, got {omega_p_ev} eV"
            )));
        }
        if !(gamma_ev.is_finite() && gamma_ev >= 0.0) {
            return Err(OpticalDataError::InvalidDrude(format!(
                "relaxation frequency must be non-negative, got {gamma_ev} eV"
            )));
        }
        Ok(DrudeParams {
            omega_p: omega_p_ev,
            gamma: gamma_ev,
        })
    }

    /// Plasma model: same plasma frequency with γ = 0.
    pub fn without_relaxation(self) -> Self {
        DrudeParams { gamma: 0.0, ..self }
    }

    pub fn omega_p_ev(&self) -> f64 {
        self.omega_p
    }

    pub fn gamma_ev(&self) -> f64 {
        self.gamma
    }

    /// λ_p = 2πc/ω_p in nm.
    pub fn plasma_wavelength_nm(&self) -> f64 {
        2.0 * std::f64::consts::PI * HBAR_C_EV_NM / self.omega_p
    }

    /// δ₀ = λ_p/2π in nm.
    pub fn penetration_depth_nm(&self) -> f64 {
        HBAR_C_EV_NM / self.omega_p
    }

    /// Im ε(ω) = ω_p²γ / (ω(ω² + γ²)).
    pub fn im_epsilon(&self, omega_ev: f64) -> f64 {
        self.omega_p * self.omega_p * self.gamma / (omega_ev * (omega_ev * omega_ev + self.gamma * self.gamma))
    }

    /// Re ε(ω) = 1 − ω_p² / (ω² + γ²).
    pub fn re_epsilon(&self, omega_ev: f64) -> f64 {
        1.0 - self.omega_p * self.omega_p / (omega_ev * omega_ev + self.gamma * self.gamma)
    }

    /// ε(iξ) = 1 + ω_p² / (ξ(ξ + γ)).
    pub fn epsilon_imaginary_axis(&self, xi_ev: f64) -> f64 {
        1.0 + self.omega_p * self.omega_p / (xi_ev * (xi_ev + self.gamma))
    }

    /// (n, k) with n + ik = √ε(ω) on the principal branch.
    pub fn refractive_index(&self, omega_ev: f64) -> (f64, f64) {
        let re = self.re_epsilon(omega_ev);
        let im = self.im_epsilon(omega_ev);
        let modulus = re.hypot(im);
        let n = (0.5 * (modulus + re)).max(0.0).sqrt();
        let k = (0.5 * (modulus - re)).max(0.0).sqrt();
        (n, k)
    }
}

/// Im ε(ω) over the whole positive axis: Drude below the crossover, the
/// table up to its last sample, a power-law tail above.
#[derive(Debug, Clone)]
pub struct ImEpsilonSampler {
    table: OpticalTable,
    drude: DrudeParams,
    crossover: f64,
    high_tail: f64,
}

impl ImEpsilonSampler {
    /// Builds a sampler with the default 5% continuity check at the crossover.
    pub fn new(
        table: OpticalTable,
        drude: DrudeParams,
        crossover_ev: f64,
        high_tail: f64,
    ) -> Result<Self, OpticalDataError> {
        Self::with_continuity_tolerance(table, drude, crossover_ev, high_tail, DEFAULT_CONTINUITY_TOLERANCE)
    }

    pub fn with_continuity_tolerance(
        table: OpticalTable,
        drude: DrudeParams,
        crossover_ev: f64,
        high_tail: f64,
        tolerance: f64,
    ) -> Result<Self, OpticalDataError> {
        let (lo, hi) = table.energy_range();
        if !(crossover_ev >= lo && crossover_ev < hi) {
            return Err(OpticalDataError::InvalidSampler(format!(
                "crossover {crossover_ev} eV must lie inside the table range [{lo}, {hi}) eV"
            )));
        }
        if !(high_tail.is_finite() && high_tail > 0.0) {
            return Err(OpticalDataError::InvalidSampler(format!(
                "high-frequency tail exponent must be positive, got {high_tail}"
            )));
        }
        if drude.gamma_ev() <= 0.0 {
            return Err(OpticalDataError::InvalidSampler(
                "Drude extrapolation of absorption data needs a positive relaxation frequency".into(),
            ));
        }
        let table_value = table
            .interpolate_im_epsilon(crossover_ev)
            .expect("crossover checked to lie inside the table");
        let drude_value = drude.im_epsilon(crossover_ev);
        let mismatch = if table_value > 0.0 {
            (drude_value - table_value).abs() / table_value
        } else {
            f64::INFINITY
        };
        if !(mismatch <= tolerance) {
            return Err(OpticalDataError::Discontinuity {
                crossover_ev,
                drude: drude_value,
                table: table_value,
                mismatch,
                allowed: tolerance,
            });
        }
        Ok(ImEpsilonSampler {
            table,
            drude,
            crossover: crossover_ev,
            high_tail,
        })
    }

    pub fn table(&self) -> &OpticalTable {
        &self.table
    }

    pub fn drude(&self) -> &DrudeParams {
        &self.drude
    }

    pub fn crossover_ev(&self) -> f64 {
        self.crossover
    }

    pub fn high_tail(&self) -> f64 {
        self.high_tail
    }

    /// Im ε(ω) for ω > 0.
    pub fn im_epsilon(&self, omega_ev: f64) -> Result<f64, OpticalDataError> {
        if !(omega_ev > 0.0) {
            return Err(OpticalDataError::Domain(omega_ev));
        }
        Ok(self.value(omega_ev))
    }

    /// Unchecked evaluation; `omega_ev` must be positive.
    pub(crate) fn value(&self, omega_ev: f64) -> f64 {
        if omega_ev < self.crossover {
            return self.drude.im_epsilon(omega_ev);
        }
        match self.table.interpolate_im_epsilon(omega_ev) {
            Some(v) => v,
            None => {
                let last = self.table.entries().last().expect("table has entries");
                last.im_epsilon() * (omega_ev / last.energy_ev).powf(-self.high_tail)
            }
        }
    }

    /// Energies where the sampler changes form or slope.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut points = vec![self.crossover, self.drude.gamma_ev()];
        points.extend(
            self.table
                .entries()
                .iter()
                .map(|s| s.energy_ev)
                .filter(|&e| e > self.crossover),
        );
        points
    }
}
