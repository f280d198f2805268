//! Fourth-order finite-conductivity corrections in powers of δ₀/a, with
//! δ₀ = λ_p/2π the plasma penetration depth (relaxation neglected).

use std::f64::consts::PI;

use crate::optical_data::DrudeParams;
use crate::warning::Warning;

/// Beyond this δ₀/a the truncated series is not trusted.
pub const SERIES_VALIDITY_LIMIT: f64 = 0.2;

/// Coefficients of (δ₀/a)^k, k = 1..4, for two plates.
pub fn plate_plate_coefficients() -> [f64; 4] {
    let pi2 = PI * PI;
    [
        -16.0 / 3.0,
        24.0,
        -640.0 / 7.0 * (1.0 - pi2 / 210.0),
        2800.0 / 9.0 * (1.0 - 163.0 * pi2 / 7350.0),
    ]
}

/// Coefficients of (δ₀/a)^k, k = 1..4, for a sphere above a plate.
pub fn sphere_plate_coefficients() -> [f64; 4] {
    let pi2 = PI * PI;
    [
        -4.0,
        72.0 / 5.0,
        -320.0 / 7.0 * (1.0 - pi2 / 210.0),
        400.0 / 3.0 * (1.0 - 163.0 * pi2 / 7350.0),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenetrationDepth(f64);

impl PenetrationDepth {
    pub fn new(delta0_nm: f64) -> Option<Self> {
        (delta0_nm > 0.0 && delta0_nm.is_finite()).then_some(PenetrationDepth(delta0_nm))
    }

    pub fn from_drude(params: &DrudeParams) -> Self {
        PenetrationDepth(params.penetration_depth_nm())
    }

    pub fn from_plasma_wavelength(lambda_p_nm: f64) -> Option<Self> {
        Self::new(lambda_p_nm / (2.0 * PI))
    }

    pub fn nm(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesFactor {
    pub value: f64,
    pub warning: Option<Warning>,
}

/// Partial sums 1, 1 + c₁x, …, through fourth order.
pub fn partial_sums(coefficients: &[f64; 4], delta0_nm: f64, a_nm: f64) -> [f64; 5] {
    let x = delta0_nm / a_nm;
    let mut sums = [1.0; 5];
    let mut power = 1.0;
    for (k, c) in coefficients.iter().enumerate() {
        power *= x;
        sums[k + 1] = sums[k] + c * power;
    }
    sums
}

fn evaluate(coefficients: &[f64; 4], delta0_nm: f64, a_nm: f64) -> SeriesFactor {
    assert!(a_nm > 0.0, "separation must be positive");
    let ratio = delta0_nm / a_nm;
    SeriesFactor {
        value: partial_sums(coefficients, delta0_nm, a_nm)[4],
        warning: (ratio > SERIES_VALIDITY_LIMIT).then_some(Warning::SeriesValidity {
            depth_over_separation: ratio,
        }),
    }
}

/// Correction factor for two plates.
pub fn perturbative_factor_ss(delta0_nm: f64, a_nm: f64) -> SeriesFactor {
    evaluate(&plate_plate_coefficients(), delta0_nm, a_nm)
}

/// Correction factor for a sphere above a plate.
pub fn perturbative_factor_sl(delta0_nm: f64, a_nm: f64) -> SeriesFactor {
    evaluate(&sphere_plate_coefficients(), delta0_nm, a_nm)
}
