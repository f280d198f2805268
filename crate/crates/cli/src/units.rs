//! Quantities with mandatory unit suffixes.

use crate::error::CliError;

/// Length in nm from `500nm`, `0.5um` or `0.5µm`.
pub fn parse_length_nm(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    let (number, factor) = if let Some(n) = t.strip_suffix("nm") {
        (n, 1.0)
    } else if let Some(n) = t.strip_suffix("um").or_else(|| t.strip_suffix("µm")) {
        (n, 1e3)
    } else {
        return Err(CliError::Config(format!(
            "length `{text}` needs a unit suffix (nm or um)"
        )));
    };
    Ok(parse_number(number, text)? * factor)
}

/// Length in µm.
pub fn parse_length_um(text: &str) -> Result<f64, CliError> {
    parse_length_nm(text).map(|nm| nm / 1e3)
}

/// Photon energy in eV from `12.5eV`.
pub fn parse_energy_ev(text: &str) -> Result<f64, CliError> {
    let t = text.trim();
    match t.strip_suffix("eV") {
        Some(n) => parse_number(n, text),
        None => Err(CliError::Config(format!("energy `{text}` needs the eV suffix"))),
    }
}

fn parse_number(number: &str, original: &str) -> Result<f64, CliError> {
    let v: f64 = number
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("cannot read a number from `{original}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("`{original}` is not finite")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert_eq!(parse_length_nm("500nm").unwrap(), 500.0);
        assert_eq!(parse_length_nm("0.5um").unwrap(), 500.0);
        assert_eq!(parse_length_nm("3µm").unwrap(), 3000.0);
        assert_eq!(parse_length_um("100um").unwrap(), 100.0);
        assert!(parse_length_nm("500").is_err());
        assert!(parse_length_nm("nm").is_err());
    }

    #[test]
    fn energies() {
        assert_eq!(parse_energy_ev("12.5eV").unwrap(), 12.5);
        assert!(parse_energy_ev("12.5").is_err());
        assert!(parse_energy_ev("12.5ev").is_err());
    }
}
