//! Physical constants (CODATA 2018) and unit conversions.
//!
//! Frequencies are carried in eV throughout the crate, lengths in nm
//! unless a name says otherwise.

/// ħc in eV·nm.
pub const HBAR_C_EV_NM: f64 = 197.326_980_4;

/// ħ in eV·s.
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// ħ in J·s.
pub const HBAR_J_S: f64 = 1.054_571_817e-34;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// ħc in J·m.
pub const HBAR_C_J_M: f64 = HBAR_J_S * SPEED_OF_LIGHT;

/// Nanometres per metre.
pub const NM_PER_M: f64 = 1e9;

/// Converts a photon energy in eV to an angular frequency in rad/s.
pub fn ev_to_rad_per_s(energy_ev: f64) -> f64 {
    energy_ev / HBAR_EV_S
}

/// Wave number ξ/c in nm⁻¹ for an imaginary frequency given in eV.
pub fn ev_to_inverse_nm(xi_ev: f64) -> f64 {
    xi_ev / HBAR_C_EV_NM
}
