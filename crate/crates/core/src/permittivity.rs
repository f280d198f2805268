//! Dielectric permittivity on the imaginary frequency axis, ε(iξ).
//!
//! For measured data ε(iξ) follows from the absorption Im ε(ω) through the
//! dispersion relation
//!
//! ```text
//! ε(iξ) = 1 + (2/π) ∫₀^∞ ω Im ε(ω) / (ω² + ξ²) dω
//! ```
//!
//! which [`kk_transform`] evaluates with adaptive quadrature. The Drude model
//! has the closed form ε(iξ) = 1 + ω_p² / (ξ(ξ + γ)). Tabulated permittivities
//! are cached on a log grid because the force integrals evaluate them at
//! many frequencies.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::optical_data::{DrudeParams, ImEpsilonSampler, OpticalDataError};
use crate::quadrature::{integrate, QuadSpec};

/// Relative tolerance of the dispersion integral.
pub const KK_REL_TOL: f64 = 1e-5;

/// ξ range covered by the cache, in eV.
pub const CACHE_RANGE_EV: (f64, f64) = (1e-6, 1e4);

pub const CACHE_POINTS_PER_DECADE: usize = 64;

// How far below the lowest breakpoint the dispersion integral starts, in e-folds.
const LOW_CUTOFF_EFOLDS: f64 = 46.0;

#[derive(Debug, Error)]
pub enum PermittivityError {
    #[error(transparent)]
    Optical(#[from] OpticalDataError),
    #[error("imaginary frequency must be positive, got {0} eV")]
    Domain(f64),
    #[error("constant permittivity must be finite and at least 1, got {0}")]
    InvalidConstant(f64),
    #[error(
        "dispersion integral at xi = {xi_ev} eV did not converge: estimate {estimate}, error bound {error}"
    )]
    NonConvergence { xi_ev: f64, estimate: f64, error: f64 },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Absorption spectrum Im ε(ω) ≥ 0 on ω > 0.
pub trait LossFunction: Send + Sync {
    /// Im ε at photon energy `omega_ev > 0`.
    fn loss(&self, omega_ev: f64) -> f64;

    /// Energies where the loss has kinks or sharp features.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl LossFunction for ImEpsilonSampler {
    fn loss(&self, omega_ev: f64) -> f64 {
        self.value(omega_ev)
    }

    fn breakpoints(&self) -> Vec<f64> {
        ImEpsilonSampler::breakpoints(self)
    }
}

impl LossFunction for DrudeParams {
    fn loss(&self, omega_ev: f64) -> f64 {
        self.im_epsilon(omega_ev)
    }

    fn breakpoints(&self) -> Vec<f64> {
        vec![self.gamma_ev(), self.omega_p_ev()]
    }
}

/// Single damped Lorentz oscillator,
/// ε(ω) = 1 + f ω₀² / (ω₀² − ω² − iγω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzOscillator {
    pub strength: f64,
    pub resonance_ev: f64,
    pub damping_ev: f64,
}

impl LorentzOscillator {
    pub fn epsilon_imaginary_axis(&self, xi_ev: f64) -> f64 {
        let w0 = self.resonance_ev;
        1.0 + self.strength * w0 * w0 / (w0 * w0 + xi_ev * xi_ev + self.damping_ev * xi_ev)
    }
}

impl LossFunction for LorentzOscillator {
    fn loss(&self, omega_ev: f64) -> f64 {
        let w0 = self.resonance_ev;
        let detuning = w0 * w0 - omega_ev * omega_ev;
        self.strength * w0 * w0 * self.damping_ev * omega_ev
            / (detuning * detuning + self.damping_ev * self.damping_ev * omega_ev * omega_ev)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let w0 = self.resonance_ev;
        let g = self.damping_ev;
        vec![w0 - g, w0, w0 + g].into_iter().filter(|&w| w > 0.0).collect()
    }
}

/// ε(iξ) from the dispersion relation at the default tolerance.
pub fn kk_transform<L: LossFunction + ?Sized>(loss: &L, xi_ev: f64) -> Result<f64, PermittivityError> {
    kk_transform_with_tol(loss, xi_ev, KK_REL_TOL)
}

/// ε(iξ) from the dispersion relation.
///
/// The ω axis is split at ξ and at the loss breakpoints. Below the lowest
/// breakpoint and between breakpoints the integral runs in ln ω; above the
/// highest one a semi-infinite map takes over.
pub fn kk_transform_with_tol<L: LossFunction + ?Sized>(
    loss: &L,
    xi_ev: f64,
    rel_tol: f64,
) -> Result<f64, PermittivityError> {
    if !(xi_ev > 0.0 && xi_ev.is_finite()) {
        return Err(PermittivityError::Domain(xi_ev));
    }
    let mut edges: Vec<f64> = loss
        .breakpoints()
        .into_iter()
        .chain(std::iter::once(xi_ev))
        .filter(|b| b.is_finite() && *b > 0.0)
        .collect();
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let b_min = edges[0];
    let b_max = edges[edges.len() - 1];
    let xi2 = xi_ev * xi_ev;

    // ∫ ω Im ε / (ω² + ξ²) dω = ∫ ω² Im ε / (ω² + ξ²) d(ln ω)
    let in_log = |t: f64| {
        let w = t.exp();
        let l = loss.loss(w);
        if l == 0.0 {
            0.0
        } else {
            w * w * l / (w * w + xi2)
        }
    };
    let linear = |w: f64| {
        let l = loss.loss(w);
        if l == 0.0 {
            0.0
        } else {
            w * l / (w * w + xi2)
        }
    };

    let budget = 2000 + 4 * edges.len();
    let low = integrate(
        in_log,
        &QuadSpec::finite(b_min.ln() - LOW_CUTOFF_EFOLDS, b_min.ln())
            .rel_tol(rel_tol)
            .max_subdivisions(budget),
    );
    let middle = integrate(
        in_log,
        &QuadSpec::finite(b_min.ln(), b_max.ln())
            .rel_tol(rel_tol)
            .max_subdivisions(budget)
            .breakpoints(edges.iter().map(|b| b.ln())),
    );
    let tail = integrate(
        linear,
        &QuadSpec::semi_infinite(b_max, b_max).rel_tol(rel_tol).max_subdivisions(budget),
    );

    let sum = low.value + middle.value + tail.value;
    let error = low.error + middle.error + tail.error;
    let estimate = 1.0 + std::f64::consts::FRAC_2_PI * sum;
    if low.converged && middle.converged && tail.converged {
        Ok(estimate)
    } else {
        Err(PermittivityError::NonConvergence {
            xi_ev,
            estimate,
            error: std::f64::consts::FRAC_2_PI * error,
        })
    }
}

/// Fixed-grid trapezoid evaluation of the dispersion integral over
/// `[lo_ev, hi_ev]`, for cross-checking the adaptive route.
pub fn kk_transform_trapezoid<L: LossFunction + ?Sized>(
    loss: &L,
    xi_ev: f64,
    lo_ev: f64,
    hi_ev: f64,
    points: usize,
) -> f64 {
    let xi2 = xi_ev * xi_ev;
    let integral = crate::quadrature::trapezoid_log(|w| w * loss.loss(w) / (w * w + xi2), lo_ev, hi_ev, points);
    1.0 + std::f64::consts::FRAC_2_PI * integral
}

/// Value of ε(iξ); ideal metals are represented exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Finite(f64),
    Infinite,
}

impl Epsilon {
    pub fn finite(self) -> Option<f64> {
        match self {
            Epsilon::Finite(v) => Some(v),
            Epsilon::Infinite => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum PermittivityKind {
    /// Dispersion-relation transform of tabulated absorption data.
    TabulatedKk(Arc<ImEpsilonSampler>),
    /// Closed-form Drude model.
    Drude(DrudeParams),
    /// Perfect conductor, ε = ∞.
    IdealMetal,
    /// Frequency-independent ε ≥ 1.
    Constant(f64),
}

/// Uniform evaluator of ε(iξ).
#[derive(Debug, Clone)]
pub struct PermittivityFunction {
    kind: PermittivityKind,
    cache: Option<Arc<EpsilonCache>>,
}

impl PermittivityFunction {
    /// Tabulated material; the log-grid cache is built eagerly.
    pub fn tabulated(sampler: ImEpsilonSampler) -> Result<Self, PermittivityError> {
        Self::tabulated_uncached(sampler).with_cache()
    }

    /// Tabulated material evaluated by a fresh dispersion integral every call.
    pub fn tabulated_uncached(sampler: ImEpsilonSampler) -> Self {
        PermittivityFunction {
            kind: PermittivityKind::TabulatedKk(Arc::new(sampler)),
            cache: None,
        }
    }

    pub fn drude(params: DrudeParams) -> Self {
        PermittivityFunction {
            kind: PermittivityKind::Drude(params),
            cache: None,
        }
    }

    pub fn ideal_metal() -> Self {
        PermittivityFunction {
            kind: PermittivityKind::IdealMetal,
            cache: None,
        }
    }

    pub fn constant(eps: f64) -> Result<Self, PermittivityError> {
        if !(eps.is_finite() && eps >= 1.0) {
            return Err(PermittivityError::InvalidConstant(eps));
        }
        Ok(PermittivityFunction {
            kind: PermittivityKind::Constant(eps),
            cache: None,
        })
    }

    /// Precomputes ε(iξ) on the log grid over [`CACHE_RANGE_EV`].
    pub fn with_cache(mut self) -> Result<Self, PermittivityError> {
        match self.kind {
            PermittivityKind::TabulatedKk(_) | PermittivityKind::Drude(_) => {
                let cache = EpsilonCache::build(|xi| self.evaluate_direct_finite(xi))?;
                self.cache = Some(Arc::new(cache));
                Ok(self)
            }
            PermittivityKind::IdealMetal | PermittivityKind::Constant(_) => Ok(self),
        }
    }

    pub fn kind(&self) -> &PermittivityKind {
        &self.kind
    }

    pub fn cache(&self) -> Option<&EpsilonCache> {
        self.cache.as_deref()
    }

    /// Metals get the thin-film validity warning; dielectric constants do not.
    pub fn is_metallic(&self) -> bool {
        !matches!(self.kind, PermittivityKind::Constant(_))
    }

    /// Drude parameters backing this material, if any.
    pub fn drude_params(&self) -> Option<DrudeParams> {
        match &self.kind {
            PermittivityKind::TabulatedKk(s) => Some(*s.drude()),
            PermittivityKind::Drude(p) => Some(*p),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match &self.kind {
            PermittivityKind::TabulatedKk(s) => format!("table:{}", s.table().material_name()),
            PermittivityKind::Drude(p) => format!("drude:{}eV:{}eV", p.omega_p_ev(), p.gamma_ev()),
            PermittivityKind::IdealMetal => "ideal".to_string(),
            PermittivityKind::Constant(e) => format!("const:{e}"),
        }
    }

    /// ε(iξ), through the cache when one is present and covers ξ.
    pub fn evaluate(&self, xi_ev: f64) -> Result<Epsilon, PermittivityError> {
        if !(xi_ev > 0.0) {
            return Err(PermittivityError::Domain(xi_ev));
        }
        if let Some(cache) = &self.cache {
            if let Some(v) = cache.interpolate(xi_ev) {
                return Ok(Epsilon::Finite(v));
            }
        }
        self.evaluate_direct(xi_ev)
    }

    /// ε(iξ) bypassing the cache.
    pub fn evaluate_direct(&self, xi_ev: f64) -> Result<Epsilon, PermittivityError> {
        if !(xi_ev > 0.0) {
            return Err(PermittivityError::Domain(xi_ev));
        }
        match &self.kind {
            PermittivityKind::IdealMetal => Ok(Epsilon::Infinite),
            _ => self.evaluate_direct_finite(xi_ev).map(Epsilon::Finite),
        }
    }

    fn evaluate_direct_finite(&self, xi_ev: f64) -> Result<f64, PermittivityError> {
        match &self.kind {
            PermittivityKind::TabulatedKk(sampler) => kk_transform(sampler.as_ref(), xi_ev),
            PermittivityKind::Drude(p) => Ok(p.epsilon_imaginary_axis(xi_ev)),
            PermittivityKind::Constant(e) => Ok(*e),
            PermittivityKind::IdealMetal => Ok(f64::INFINITY),
        }
    }

    /// Writes `xi_eV,eps` rows for the given frequencies.
    pub fn write_csv<W: Write>(&self, mut out: W, xis_ev: &[f64]) -> Result<(), PermittivityError> {
        writeln!(out, "xi_eV,eps")?;
        for &xi in xis_ev {
            let eps = match self.evaluate(xi)? {
                Epsilon::Finite(v) => v,
                Epsilon::Infinite => f64::INFINITY,
            };
            writeln!(out, "{xi},{eps}")?;
        }
        Ok(())
    }
}

/// ε(iξ) for any kind; see [`PermittivityFunction::evaluate`].
pub fn epsilon_i_xi(f: &PermittivityFunction, xi_ev: f64) -> Result<Epsilon, PermittivityError> {
    f.evaluate(xi_ev)
}

/// ε(iξ) sampled on a log grid and interpolated with monotone cubic Hermite
/// splines in (ln ξ, ln(ε − 1)).
#[derive(Debug, Clone)]
pub struct EpsilonCache {
    ln_lo: f64,
    step: f64,
    xi: Vec<f64>,
    eps: Vec<f64>,
    // Interpolated ordinate: ln(ε − 1), or ε itself when some node has ε = 1.
    y: Vec<f64>,
    slope: Vec<f64>,
    log_excess: bool,
}

impl EpsilonCache {
    fn build<F>(eval: F) -> Result<Self, PermittivityError>
    where
        F: Fn(f64) -> Result<f64, PermittivityError> + Sync,
    {
        let (lo, hi) = CACHE_RANGE_EV;
        let decades = (hi / lo).log10().round() as usize;
        let n = decades * CACHE_POINTS_PER_DECADE + 1;
        let ln_lo = lo.ln();
        let step = (hi.ln() - ln_lo) / (n - 1) as f64;
        let xi: Vec<f64> = (0..n).map(|i| (ln_lo + step * i as f64).exp()).collect();
        let eps = xi.par_iter().map(|&x| eval(x)).collect::<Result<Vec<_>, _>>()?;
        let log_excess = eps.iter().all(|&e| e > 1.0);
        let y: Vec<f64> = if log_excess {
            eps.iter().map(|&e| (e - 1.0).ln()).collect()
        } else {
            eps.clone()
        };
        let slope = monotone_slopes(&y, step);
        Ok(EpsilonCache {
            ln_lo,
            step,
            xi,
            eps,
            y,
            slope,
            log_excess,
        })
    }

    /// Grid nodes `(ξ, ε(iξ))`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xi.iter().copied().zip(self.eps.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Interpolated ε(iξ), or `None` outside the cached range.
    pub fn interpolate(&self, xi_ev: f64) -> Option<f64> {
        let n = self.xi.len();
        if !(xi_ev >= self.xi[0] && xi_ev <= self.xi[n - 1]) {
            return None;
        }
        let s = (xi_ev.ln() - self.ln_lo) / self.step;
        let i = (s.floor() as usize).min(n - 2);
        let t = (s - i as f64).clamp(0.0, 1.0);
        if t == 0.0 {
            return Some(self.eps[i]);
        }
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let y = h00 * self.y[i]
            + h10 * self.step * self.slope[i]
            + h01 * self.y[i + 1]
            + h11 * self.step * self.slope[i + 1];
        Some(if self.log_excess { 1.0 + y.exp() } else { y })
    }
}

// Centred-difference slopes limited with the Fritsch–Carlson condition.
fn monotone_slopes(y: &[f64], step: f64) -> Vec<f64> {
    let n = y.len();
    let secant: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / step).collect();
    let mut m = vec![0.0; n];
    m[0] = secant[0];
    m[n - 1] = secant[n - 2];
    for i in 1..n - 1 {
        m[i] = if secant[i - 1] * secant[i] <= 0.0 {
            0.0
        } else {
            0.5 * (secant[i - 1] + secant[i])
        };
    }
    for i in 0..n - 1 {
        let d = secant[i];
        if d == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let alpha = m[i] / d;
        let beta = m[i + 1] / d;
        let r = alpha * alpha + beta * beta;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * alpha * d;
            m[i + 1] = tau * beta * d;
        }
    }
    m
}
