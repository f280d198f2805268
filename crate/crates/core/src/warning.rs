use std::fmt;

use serde::Serialize;

/// Validity or accuracy caveat attached to a computed result.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Sphere radius not large enough against the gap for the proximity force approximation.
    ProximityForce { radius_over_separation: f64 },
    /// Zero-temperature result at a separation where thermal corrections are no longer small.
    Temperature { separation_nm: f64 },
    /// Metallic coating thinner than the range where a local permittivity is adequate.
    ThinCoating { thickness_nm: f64 },
    /// Quadrature stopped above the requested relative tolerance.
    Tolerance { achieved: f64, requested: f64 },
    /// Extending the frequency window by a decade moved the result too much.
    WindowSensitivity { relative_change: f64 },
    /// Penetration depth too large against the gap for the series expansion.
    SeriesValidity { depth_over_separation: f64 },
    /// Hamaker fit intervals do not overlap.
    DisjointIntervals,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ProximityForce { radius_over_separation } => write!(
                f,
                "R/a = {radius_over_separation:.3} < 100: proximity force approximation may be inaccurate"
            ),
            Warning::Temperature { separation_nm } => write!(
                f,
                "a = {separation_nm} nm > 1 um: finite-temperature corrections are not included"
            ),
            Warning::ThinCoating { thickness_nm } => write!(
                f,
                "coating thickness {thickness_nm} nm < 30 nm: spatial dispersion may invalidate the local permittivity"
            ),
            Warning::Tolerance { achieved, requested } => write!(
                f,
                "quadrature error {achieved:.3e} exceeds requested tolerance {requested:.3e}"
            ),
            Warning::WindowSensitivity { relative_change } => write!(
                f,
                "widening the frequency window changes the result by {:.3}%",
                100.0 * relative_change
            ),
            Warning::SeriesValidity { depth_over_separation } => write!(
                f,
                "delta0/a = {depth_over_separation:.3} > 0.2: perturbation series outside its range"
            ),
            Warning::DisjointIntervals => write!(f, "Hamaker fit intervals are disjoint"),
        }
    }
}
