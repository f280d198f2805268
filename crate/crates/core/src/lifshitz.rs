//! Lifshitz energy density and force between identical, optionally coated,
//! metal half-spaces, and sphere-plate forces through the proximity force
//! approximation.
//!
//! With y = ξa/ħc and Q = 1 − R² e^{−2yp} for each polarization,
//!
//! ```text
//! E(a) =  ħc/(4π²a³) ∫₀^∞ y² dy ∫₁^∞ p dp Σ ln Q
//! F(a) = −ħc/(2π²a⁴) ∫₀^∞ y³ dy ∫₁^∞ p² dp Σ (1 − Q)/Q
//! ```
//!
//! where R is the reflection coefficient of the (coated) wall at imaginary
//! frequency. The outer integral runs in ln ξ over a finite window, the inner
//! one over p − 1 on a semi-infinite map.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::constants::{HBAR_C_EV_NM, HBAR_C_J_M, NM_PER_M};
use crate::permittivity::{Epsilon, PermittivityError, PermittivityFunction};
use crate::quadrature::{integrate, QuadSpec};
use crate::warning::Warning;

pub const DEFAULT_TOLERANCE: f64 = 1e-4;
pub const DEFAULT_XI_WINDOW_EV: (f64, f64) = (1e-6, 1e4);
pub const TOLERANCE_RANGE: (f64, f64) = (1e-8, 1e-2);

/// Warn when the window tails carry more than this fraction of the result.
pub const WINDOW_SENSITIVITY_LIMIT: f64 = 5e-3;
/// Smallest R/a for which the proximity force approximation is trusted.
pub const PFT_MIN_RATIO: f64 = 100.0;
pub const THIN_COATING_NM: f64 = 30.0;
pub const TEMPERATURE_WARNING_NM: f64 = 1000.0;

#[derive(Debug, Error)]
pub enum LifshitzError {
    #[error(transparent)]
    Permittivity(#[from] PermittivityError),
    #[error("separation must be positive and finite, got {0} nm")]
    InvalidSeparation(f64),
    #[error("sphere radius must be positive and finite, got {0} um")]
    InvalidRadius(f64),
    #[error("coating thickness must be positive and finite, got {0} nm")]
    InvalidThickness(f64),
    #[error("tolerance must lie in [1e-8, 1e-2], got {0}")]
    InvalidTolerance(f64),
    #[error("frequency window must satisfy 0 < lo < hi, got [{0}, {1}] eV")]
    InvalidWindow(f64, f64),
    #[error("quadrature did not converge: best estimate {value:e}, relative error {quad_error:.3e}")]
    NonConvergence {
        value: f64,
        quad_error: f64,
        partial: Box<ForceResult>,
    },
}

#[derive(Debug, Clone)]
pub struct Coating {
    material: PermittivityFunction,
    thickness_nm: f64,
}

impl Coating {
    pub fn material(&self) -> &PermittivityFunction {
        &self.material
    }

    pub fn thickness_nm(&self) -> f64 {
        self.thickness_nm
    }
}

/// Wall composition, shared by both bodies.
#[derive(Debug, Clone)]
pub struct MaterialStack {
    substrate: PermittivityFunction,
    coating: Option<Coating>,
}

impl MaterialStack {
    pub fn bulk(substrate: PermittivityFunction) -> Self {
        MaterialStack {
            substrate,
            coating: None,
        }
    }

    pub fn coated(
        substrate: PermittivityFunction,
        coating: PermittivityFunction,
        thickness_nm: f64,
    ) -> Result<Self, LifshitzError> {
        if !(thickness_nm > 0.0 && thickness_nm.is_finite()) {
            return Err(LifshitzError::InvalidThickness(thickness_nm));
        }
        Ok(MaterialStack {
            substrate,
            coating: Some(Coating {
                material: coating,
                thickness_nm,
            }),
        })
    }

    pub fn substrate(&self) -> &PermittivityFunction {
        &self.substrate
    }

    pub fn coating(&self) -> Option<&Coating> {
        self.coating.as_ref()
    }

    pub fn describe(&self) -> String {
        match &self.coating {
            None => self.substrate.label(),
            Some(c) => format!(
                "{} on {} ({} nm)",
                c.material.label(),
                self.substrate.label(),
                c.thickness_nm
            ),
        }
    }

    fn at(&self, xi_ev: f64) -> Result<WallAt, PermittivityError> {
        let substrate = self.substrate.evaluate(xi_ev)?;
        let coating = match &self.coating {
            None => None,
            Some(c) => Some((c.material.evaluate(xi_ev)?, c.thickness_nm)),
        };
        Ok(WallAt { substrate, coating })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryKind {
    PlatePlate,
    SpherePlate { radius_um: f64 },
}

/// Body configuration; the separation is measured between outer surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub separation_nm: f64,
}

impl Geometry {
    pub fn plate_plate(separation_nm: f64) -> Result<Self, LifshitzError> {
        check_separation(separation_nm)?;
        Ok(Geometry {
            kind: GeometryKind::PlatePlate,
            separation_nm,
        })
    }

    pub fn sphere_plate(radius_um: f64, separation_nm: f64) -> Result<Self, LifshitzError> {
        if !(radius_um > 0.0 && radius_um.is_finite()) {
            return Err(LifshitzError::InvalidRadius(radius_um));
        }
        check_separation(separation_nm)?;
        Ok(Geometry {
            kind: GeometryKind::SpherePlate { radius_um },
            separation_nm,
        })
    }

    pub fn with_separation(self, separation_nm: f64) -> Result<Self, LifshitzError> {
        check_separation(separation_nm)?;
        Ok(Geometry { separation_nm, ..self })
    }

    pub fn radius_um(&self) -> Option<f64> {
        match self.kind {
            GeometryKind::PlatePlate => None,
            GeometryKind::SpherePlate { radius_um } => Some(radius_um),
        }
    }
}

fn check_separation(a_nm: f64) -> Result<(), LifshitzError> {
    if a_nm > 0.0 && a_nm.is_finite() {
        Ok(())
    } else {
        Err(LifshitzError::InvalidSeparation(a_nm))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifshitzOptions {
    /// Requested relative accuracy of the result.
    pub tol: f64,
    /// Imaginary-frequency integration window in eV.
    pub xi_window_ev: (f64, f64),
    /// Estimate the contribution of the decade beyond each window edge.
    pub check_window: bool,
}

impl Default for LifshitzOptions {
    fn default() -> Self {
        LifshitzOptions {
            tol: DEFAULT_TOLERANCE,
            xi_window_ev: DEFAULT_XI_WINDOW_EV,
            check_window: true,
        }
    }
}

impl LifshitzOptions {
    pub fn with_tol(tol: f64) -> Self {
        LifshitzOptions {
            tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<(), LifshitzError> {
        let (lo, hi) = TOLERANCE_RANGE;
        if !(self.tol >= lo && self.tol <= hi) {
            return Err(LifshitzError::InvalidTolerance(self.tol));
        }
        let (wlo, whi) = self.xi_window_ev;
        if !(wlo > 0.0 && whi > wlo && whi.is_finite()) {
            return Err(LifshitzError::InvalidWindow(wlo, whi));
        }
        Ok(())
    }
}

/// Force (N/m² for plates, N for a sphere) or energy density (J/m²), with
/// the ideal-metal reference and diagnostics. Negative values attract.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForceResult {
    pub value: f64,
    pub ideal_value: f64,
    pub correction_factor: f64,
    /// Estimated relative quadrature error.
    pub quad_error: f64,
    pub converged: bool,
    /// Relative weight of the decade beyond the frequency window, if checked.
    pub window_sensitivity: Option<f64>,
    pub warnings: Vec<Warning>,
}

/// Polarization factors Q = 1 − R² e^{−2ξpa/c}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QFactors {
    pub tm: f64,
    pub te: f64,
}

/// Q factors of the symmetric stack at one (ξ, p, a).
pub fn q_factors(stack: &MaterialStack, xi_ev: f64, p: f64, a_nm: f64) -> Result<QFactors, LifshitzError> {
    check_separation(a_nm)?;
    assert!(p >= 1.0, "p must be at least 1, got {p}");
    let wall = stack.at(xi_ev)?;
    let y = xi_ev * a_nm / HBAR_C_EV_NM;
    let [tm, te] = wall.round_trip(y, p - 1.0, a_nm);
    Ok(QFactors {
        tm: tm.one_minus_m,
        te: te.one_minus_m,
    })
}

/// Ideal-metal plate-plate energy density −π²ħc/(720a³) in J/m².
pub fn ideal_energy_density(a_nm: f64) -> f64 {
    let a = a_nm / NM_PER_M;
    -PI.powi(2) * HBAR_C_J_M / (720.0 * a.powi(3))
}

/// Ideal-metal force: −π²ħc/(240a⁴) in N/m² for plates, −π³Rħc/(360a³) in N
/// for a sphere.
pub fn ideal_force(geom: &Geometry) -> f64 {
    let a = geom.separation_nm / NM_PER_M;
    match geom.kind {
        GeometryKind::PlatePlate => -PI.powi(2) * HBAR_C_J_M / (240.0 * a.powi(4)),
        GeometryKind::SpherePlate { radius_um } => {
            -PI.powi(3) * (radius_um * 1e-6) * HBAR_C_J_M / (360.0 * a.powi(3))
        }
    }
}

/// Energy density between two plates in J/m².
pub fn energy_density(stack: &MaterialStack, a_nm: f64, opts: &LifshitzOptions) -> Result<ForceResult, LifshitzError> {
    check_separation(a_nm)?;
    opts.validate()?;
    let a = a_nm / NM_PER_M;
    let scale = HBAR_C_J_M / (4.0 * PI * PI * a.powi(3));
    let raw = lifshitz_integral(stack, a_nm, Kernel::Energy, opts)?;
    finish(stack, a_nm, scale, raw, ideal_energy_density(a_nm), opts, Vec::new())
}

/// Force per unit area between two plates in N/m².
pub fn force_plate_plate(stack: &MaterialStack, a_nm: f64, opts: &LifshitzOptions) -> Result<ForceResult, LifshitzError> {
    let geom = Geometry::plate_plate(a_nm)?;
    opts.validate()?;
    let a = a_nm / NM_PER_M;
    let scale = -HBAR_C_J_M / (2.0 * PI * PI * a.powi(4));
    let raw = lifshitz_integral(stack, a_nm, Kernel::Force, opts)?;
    finish(stack, a_nm, scale, raw, ideal_force(&geom), opts, Vec::new())
}

/// Sphere-plate force 2πR·E(a) in N.
pub fn force_sphere_plate(stack: &MaterialStack, geom: &Geometry, opts: &LifshitzOptions) -> Result<ForceResult, LifshitzError> {
    let radius_um = geom
        .radius_um()
        .expect("force_sphere_plate needs a sphere-plate geometry");
    let a_nm = geom.separation_nm;
    check_separation(a_nm)?;
    opts.validate()?;
    let radius_over_separation = radius_um * 1e3 / a_nm;
    let mut extra = Vec::new();
    if radius_over_separation < PFT_MIN_RATIO {
        extra.push(Warning::ProximityForce { radius_over_separation });
    }
    let a = a_nm / NM_PER_M;
    let scale = 2.0 * PI * radius_um * 1e-6 * HBAR_C_J_M / (4.0 * PI * PI * a.powi(3));
    let raw = lifshitz_integral(stack, a_nm, Kernel::Energy, opts)?;
    finish(stack, a_nm, scale, raw, ideal_force(geom), opts, extra)
}

/// Dispatches on the geometry kind.
pub fn force(stack: &MaterialStack, geom: &Geometry, opts: &LifshitzOptions) -> Result<ForceResult, LifshitzError> {
    match geom.kind {
        GeometryKind::PlatePlate => force_plate_plate(stack, geom.separation_nm, opts),
        GeometryKind::SpherePlate { .. } => force_sphere_plate(stack, geom, opts),
    }
}

fn finish(
    stack: &MaterialStack,
    a_nm: f64,
    scale: f64,
    raw: RawIntegral,
    ideal_value: f64,
    opts: &LifshitzOptions,
    mut warnings: Vec<Warning>,
) -> Result<ForceResult, LifshitzError> {
    let value = scale * raw.value;
    if a_nm > TEMPERATURE_WARNING_NM {
        warnings.push(Warning::Temperature { separation_nm: a_nm });
    }
    if let Some(c) = &stack.coating {
        if c.thickness_nm < THIN_COATING_NM && c.material.is_metallic() {
            warnings.push(Warning::ThinCoating {
                thickness_nm: c.thickness_nm,
            });
        }
    }
    if raw.rel_error > opts.tol {
        warnings.push(Warning::Tolerance {
            achieved: raw.rel_error,
            requested: opts.tol,
        });
    }
    if let Some(s) = raw.window_sensitivity {
        if s > WINDOW_SENSITIVITY_LIMIT {
            warnings.push(Warning::WindowSensitivity { relative_change: s });
        }
    }
    let result = ForceResult {
        value,
        ideal_value,
        correction_factor: value / ideal_value,
        quad_error: raw.rel_error,
        converged: raw.converged,
        window_sensitivity: raw.window_sensitivity,
        warnings,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(LifshitzError::NonConvergence {
            value: result.value,
            quad_error: result.quad_error,
            partial: Box::new(result),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kernel {
    /// p Σ ln Q, weighted by y² dy.
    Energy,
    /// p² Σ (1 − Q)/Q, weighted by y³ dy.
    Force,
}

struct RawIntegral {
    value: f64,
    rel_error: f64,
    converged: bool,
    window_sensitivity: Option<f64>,
}

struct OuterIntegral {
    value: f64,
    abs_error: f64,
    inner_rel_error: f64,
    converged: bool,
}

fn lifshitz_integral(
    stack: &MaterialStack,
    a_nm: f64,
    kernel: Kernel,
    opts: &LifshitzOptions,
) -> Result<RawIntegral, LifshitzError> {
    let (lo, hi) = opts.xi_window_ev;
    let main = outer_integral(stack, a_nm, kernel, lo, hi, 0.5 * opts.tol, 0.1 * opts.tol)?;
    let mut rel_error = main.abs_error / main.value.abs() + main.inner_rel_error;
    if !rel_error.is_finite() {
        rel_error = if main.value == 0.0 && main.abs_error == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let window_sensitivity = if opts.check_window && main.value != 0.0 {
        let below = outer_integral(stack, a_nm, kernel, lo / 10.0, lo, 1e-2, 1e-3)?;
        let above = outer_integral(stack, a_nm, kernel, hi, hi * 10.0, 1e-2, 1e-3)?;
        Some(below.value.abs().max(above.value.abs()) / main.value.abs())
    } else {
        None
    };
    Ok(RawIntegral {
        value: main.value,
        rel_error,
        converged: main.converged,
        window_sensitivity,
    })
}

fn outer_integral(
    stack: &MaterialStack,
    a_nm: f64,
    kernel: Kernel,
    lo_ev: f64,
    hi_ev: f64,
    outer_tol: f64,
    inner_tol: f64,
) -> Result<OuterIntegral, LifshitzError> {
    let failure: RefCell<Option<PermittivityError>> = RefCell::new(None);
    let inner_ok = Cell::new(true);
    let inner_worst = Cell::new(0.0f64);

    let integrand = |ln_xi: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        let xi = ln_xi.exp();
        let wall = match stack.at(xi) {
            Ok(w) => w,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                return 0.0;
            }
        };
        let y = xi * a_nm / HBAR_C_EV_NM;
        let inner = inner_integral(&wall, y, a_nm, kernel, inner_tol);
        if !inner.converged {
            inner_ok.set(false);
        }
        let rel = inner.relative_error();
        if rel.is_finite() && rel > inner_worst.get() {
            inner_worst.set(rel);
        }
        // dy = y d(ln ξ)
        match kernel {
            Kernel::Energy => y.powi(3) * inner.value,
            Kernel::Force => y.powi(4) * inner.value,
        }
    };

    let (ln_lo, ln_hi) = (lo_ev.ln(), hi_ev.ln());
    let characteristic = HBAR_C_EV_NM / (2.0 * a_nm);
    let decades = (lo_ev.log10().floor() as i32..=hi_ev.log10().ceil() as i32).map(|k| 10f64.powi(k));
    let scales = [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0].into_iter().map(|m| m * characteristic);
    let breaks: Vec<f64> = decades.chain(scales).map(f64::ln).collect();

    let spec = QuadSpec::finite(ln_lo, ln_hi)
        .rel_tol(outer_tol)
        .max_subdivisions(500)
        .breakpoints(breaks);
    let r = integrate(integrand, &spec);
    if let Some(e) = failure.into_inner() {
        return Err(e.into());
    }
    Ok(OuterIntegral {
        value: r.value,
        abs_error: r.error,
        inner_rel_error: inner_worst.get(),
        converged: r.converged && inner_ok.get(),
    })
}

fn inner_integral(wall: &WallAt, y: f64, a_nm: f64, kernel: Kernel, tol: f64) -> crate::quadrature::QuadResult {
    let integrand = |q: f64| -> f64 {
        let p = 1.0 + q;
        let [tm, te] = wall.round_trip(y, q, a_nm);
        match kernel {
            Kernel::Energy => p * (tm.ln_q() + te.ln_q()),
            Kernel::Force => p * p * (tm.ratio() + te.ratio()),
        }
    };
    let mut breaks = Vec::new();
    let mut push_eps = |e: Epsilon| {
        if let Epsilon::Finite(eps) = e {
            let q = eps.sqrt() - 1.0;
            if q > 0.0 {
                breaks.push(q);
            }
        }
    };
    push_eps(wall.substrate);
    if let Some((eps, d)) = wall.coating {
        push_eps(eps);
        let q = a_nm / (2.0 * y * d) - 1.0;
        if q > 0.0 && q.is_finite() {
            breaks.push(q);
        }
    }
    let spec = QuadSpec::semi_infinite(0.0, 0.5 / y)
        .rel_tol(tol)
        .max_subdivisions(200)
        .breakpoints(breaks);
    integrate(integrand, &spec)
}

/// Permittivities of the wall at one imaginary frequency.
struct WallAt {
    substrate: Epsilon,
    coating: Option<(Epsilon, f64)>,
}

/// R² e^{−2yp} and its complement for one polarization.
#[derive(Debug, Clone, Copy)]
struct RoundTrip {
    m: f64,
    one_minus_m: f64,
}

impl RoundTrip {
    fn ln_q(self) -> f64 {
        if self.m < 0.5 {
            (-self.m).ln_1p()
        } else {
            self.one_minus_m.ln()
        }
    }

    fn ratio(self) -> f64 {
        if self.m == 0.0 {
            0.0
        } else {
            self.m / self.one_minus_m
        }
    }
}

/// Reflection coefficient with its complement 1 − r² kept separately so
/// that near-perfect reflection does not cancel.
#[derive(Debug, Clone, Copy)]
struct Refl {
    r: f64,
    one_minus_r2: f64,
}

#[derive(Debug, Clone, Copy)]
enum Medium {
    Finite { k: f64, eps: f64 },
    Ideal,
}

impl Medium {
    fn new(eps: Epsilon, q: f64) -> Self {
        match eps {
            // p² − 1 = q(q + 2)
            Epsilon::Finite(eps) if eps == 1.0 => Medium::Finite { k: 1.0 + q, eps },
            Epsilon::Finite(eps) => Medium::Finite {
                k: (q * (q + 2.0) + eps).sqrt(),
                eps,
            },
            Epsilon::Infinite => Medium::Ideal,
        }
    }
}

/// TM and TE reflection at the interface seen from `outer` toward `inner`.
fn interface(outer: Medium, inner: Medium) -> [Refl; 2] {
    match (outer, inner) {
        (Medium::Finite { k: ka, eps: ea }, Medium::Finite { k: kb, eps: eb }) => {
            let den_tm = eb * ka + ea * kb;
            let den_te = ka + kb;
            debug_assert!(den_tm > 0.0 && den_te > 0.0);
            [
                Refl {
                    r: (eb * ka - ea * kb) / den_tm,
                    one_minus_r2: 4.0 * ea * eb * ka * kb / (den_tm * den_tm),
                },
                Refl {
                    r: (ka - kb) / den_te,
                    one_minus_r2: 4.0 * ka * kb / (den_te * den_te),
                },
            ]
        }
        (Medium::Finite { .. }, Medium::Ideal) => [
            Refl { r: 1.0, one_minus_r2: 0.0 },
            Refl { r: -1.0, one_minus_r2: 0.0 },
        ],
        (Medium::Ideal, _) => unreachable!("no field penetrates an ideal conductor"),
    }
}

/// Film reflection from the vacuum side, given the round-trip attenuation
/// `exponent` = 4κK₁d inside the film.
fn through_film(top: Refl, bottom: Refl, exponent: f64) -> Refl {
    let x = bottom.r * (-0.5 * exponent).exp();
    let one_minus_x2 = bottom.one_minus_r2 - bottom.r * bottom.r * (-exponent).exp_m1();
    let den = 1.0 + top.r * x;
    debug_assert!(den > 0.0);
    Refl {
        r: (top.r + x) / den,
        one_minus_r2: top.one_minus_r2 * one_minus_x2 / (den * den),
    }
}

impl WallAt {
    fn reflection(&self, y: f64, q: f64, a_nm: f64) -> [Refl; 2] {
        let vacuum = Medium::Finite { k: 1.0 + q, eps: 1.0 };
        let substrate = Medium::new(self.substrate, q);
        match self.coating {
            None => interface(vacuum, substrate),
            Some((eps, d)) => {
                let film = Medium::new(eps, q);
                match film {
                    Medium::Ideal => interface(vacuum, Medium::Ideal),
                    Medium::Finite { k, .. } => {
                        let top = interface(vacuum, film);
                        let bottom = interface(film, substrate);
                        // κd = y·d/a
                        let exponent = 4.0 * y * k * d / a_nm;
                        [
                            through_film(top[0], bottom[0], exponent),
                            through_film(top[1], bottom[1], exponent),
                        ]
                    }
                }
            }
        }
    }

    fn round_trip(&self, y: f64, q: f64, a_nm: f64) -> [RoundTrip; 2] {
        let two_yp = 2.0 * y * (1.0 + q);
        let decay = (-two_yp).exp();
        let gap_loss = -(-two_yp).exp_m1();
        self.reflection(y, q, a_nm).map(|refl| {
            let r2 = refl.r * refl.r;
            RoundTrip {
                m: r2 * decay,
                one_minus_m: refl.one_minus_r2 + r2 * gap_loss,
            }
        })
    }
}
