//! Material specs:
//!
//! ```text
//! drude:al | drude:au | drude:<wp>eV:<gamma>eV
//! plasma:al | plasma:au | plasma:<wp>eV
//! ideal
//! const:<eps>
//! table:al:<path> | table:au:<path>
//! table:<path>:<wp>eV:<gamma>eV:<crossover>eV
//! ```

use std::fs::File;
use std::path::Path;

use casimir_core::optical_data::{parse_optical_csv, DrudeParams, ImEpsilonSampler, DEFAULT_CONTINUITY_TOLERANCE, DEFAULT_HIGH_TAIL};
use casimir_core::permittivity::PermittivityFunction;

use crate::error::CliError;
use crate::units::parse_energy_ev;

pub const AL_CROSSOVER_EV: f64 = 0.04;
pub const AU_CROSSOVER_EV: f64 = 0.1;

#[derive(Debug, Clone, Copy)]
pub struct TableOptions {
    pub high_tail: f64,
    pub continuity_tol: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            high_tail: DEFAULT_HIGH_TAIL,
            continuity_tol: DEFAULT_CONTINUITY_TOLERANCE,
        }
    }
}

fn builtin(name: &str) -> Option<(DrudeParams, f64)> {
    match name {
        "al" => Some((DrudeParams::ALUMINUM, AL_CROSSOVER_EV)),
        "au" => Some((DrudeParams::GOLD, AU_CROSSOVER_EV)),
        _ => None,
    }
}

fn drude(wp: &str, gamma: &str) -> Result<DrudeParams, CliError> {
    DrudeParams::new(parse_energy_ev(wp)?, parse_energy_ev(gamma)?).map_err(|e| CliError::Config(e.to_string()))
}

pub fn parse_material(spec: &str, table_opts: &TableOptions) -> Result<PermittivityFunction, CliError> {
    let bad = || CliError::Config(format!("unrecognised material spec `{spec}`"));
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, r),
        None if spec == "ideal" => return Ok(PermittivityFunction::ideal_metal()),
        None => return Err(bad()),
    };
    match kind {
        "drude" => {
            let params = match builtin(rest) {
                Some((p, _)) => p,
                None => {
                    let (wp, g) = rest.split_once(':').ok_or_else(bad)?;
                    drude(wp, g)?
                }
            };
            Ok(PermittivityFunction::drude(params))
        }
        "plasma" => {
            let params = match builtin(rest) {
                Some((p, _)) => p.without_relaxation(),
                None => drude(rest, "0eV")?,
            };
            Ok(PermittivityFunction::drude(params))
        }
        "const" => {
            let eps: f64 = rest.parse().map_err(|_| bad())?;
            PermittivityFunction::constant(eps).map_err(|e| CliError::Config(e.to_string()))
        }
        "table" => {
            let (params, crossover, path) = match rest.split_once(':') {
                Some((name, path)) if builtin(name).is_some() => {
                    let (p, x) = builtin(name).expect("checked");
                    (p, x, path.to_string())
                }
                _ => {
                    let parts: Vec<&str> = rest.rsplitn(4, ':').collect();
                    if parts.len() != 4 {
                        return Err(bad());
                    }
                    let (crossover, gamma, wp, path) = (parts[0], parts[1], parts[2], parts[3]);
                    (drude(wp, gamma)?, parse_energy_ev(crossover)?, path.to_string())
                }
            };
            load_table(Path::new(&path), params, crossover, table_opts)
        }
        _ => Err(bad()),
    }
}

pub fn load_table(
    path: &Path,
    params: DrudeParams,
    crossover_ev: f64,
    opts: &TableOptions,
) -> Result<PermittivityFunction, CliError> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let name = path
        .file_stem()
        .map_or_else(|| "table".to_string(), |s| s.to_string_lossy().into_owned());
    let table = parse_optical_csv(file, &name).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let sampler = ImEpsilonSampler::with_continuity_tolerance(table, params, crossover_ev, opts.high_tail, opts.continuity_tol)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    PermittivityFunction::tabulated(sampler).map_err(|e| CliError::Data(e.to_string()))
}
