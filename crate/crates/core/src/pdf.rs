//! Asymptotic density of the phase estimate, its error moments, the
//! Cramér–Rao bound and the three limiting regimes of the RMSE.
//!
//! With `D̃ ~ CN(β e^{iφ}, 2σ²)` the argument `θ = arg D̃` has density
//!
//! ```text
//! g_φ(θ) = e^{-a²}/(2π) + (a cos Δ / (2√π)) e^{-a² sin² Δ} erfc(-a cos Δ),
//! a = β / (σ√2),  Δ = θ - φ.
//! ```

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::quadrature::{integrate_with_breakpoints, QuadratureError, Tolerance};
use crate::special::{erfcx_bracket, ln_erfc};
use crate::spectral::TheoreticalMoments;

/// Peaks narrower than this (in units of `σ/β`) are integrated in the
/// scaled variable `u = Δ β / σ`.
pub const NARROW_PEAK_WIDTH: f64 = 0.05;
/// Half-width of the scaled window, in peak widths.
pub const PEAK_WINDOW: f64 = 40.0;

/// `ln(2√π)`
const LN_2_SQRT_PI: f64 = 1.265_512_123_484_645_4;
const LN_TAU: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdfError {
    #[error("per-axis standard deviation must be positive and finite, got {0}")]
    DegenerateSigma(f64),
    #[error("phase-noise attenuation must lie in (0, 1], got {0}")]
    InvalidBeta(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// `g_φ` for given `β_p`, per-axis `σ` and true phase `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPdf {
    beta_p: f64,
    sigma: f64,
    phi: f64,
    a: f64,
}

impl PolarPdf {
    pub fn new(beta_p: f64, sigma: f64, phi: f64) -> Result<Self, PdfError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(PdfError::DegenerateSigma(sigma));
        }
        if !(beta_p > 0.0 && beta_p <= 1.0) {
            return Err(PdfError::InvalidBeta(beta_p));
        }
        Ok(Self { beta_p, sigma, phi, a: beta_p / (sigma * std::f64::consts::SQRT_2) })
    }

    pub fn from_moments(m: &TheoreticalMoments) -> Result<Self, PdfError> {
        Self::new(m.beta_p, m.sigma(), m.phase)
    }

    pub fn beta_p(&self) -> f64 {
        self.beta_p
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Peak width `σ/β`.
    pub fn width(&self) -> f64 {
        self.sigma / self.beta_p
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.at_offset(signed_error(theta, self.phi))
    }

    /// `g_0(Δ)`; depends on `Δ` only through `cos Δ` and `sin² Δ`.
    pub fn at_offset(&self, delta: f64) -> f64 {
        let (s, c) = delta.sin_cos();
        let a = self.a;
        if c >= 0.0 {
            let uniform = (-a * a).exp() / TAU;
            if c == 0.0 {
                return uniform;
            }
            let as_ = a * s;
            let ln_peak = (a * c).ln() - LN_2_SQRT_PI - as_ * as_ + ln_erfc(-a * c);
            uniform + ln_peak.exp()
        } else {
            // e^{-a²}/(2π) (1 - √π x erfcx(x)), x = a|cos Δ|
            let bracket = erfcx_bracket(-a * c);
            (-a * a - LN_TAU + bracket.ln()).exp()
        }
    }
}

/// Shortest angular distance between `theta` and `phi`, in `[0, π]`.
pub fn circular_error(theta: f64, phi: f64) -> f64 {
    let d = (theta - phi).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `theta - phi` wrapped into `(-π, π]`.
pub fn signed_error(theta: f64, phi: f64) -> f64 {
    PI - (PI - (theta - phi)).rem_euclid(TAU)
}

fn tolerance() -> Tolerance {
    Tolerance::new(1e-10, 1e-14)
}

/// `∫_{-π}^{π} Δ^m g_0(Δ) dΔ` split into the halves `[-π, 0]` and `[0, π]`,
/// returned in that order.
fn half_moments(pdf: &PolarPdf, m: i32) -> Result<(f64, f64), PdfError> {
    let w = pdf.width();
    let tol = tolerance();
    if w < NARROW_PEAK_WIDTH {
        // Δ = w u; the peak occupies |u| ≲ 10 whatever the width.
        let lim = PEAK_WINDOW * w;
        let scaled = |u: f64| u.powi(m) * w * pdf.at_offset(w * u);
        let ucuts = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, PEAK_WINDOW];
        let neg_ucuts: Vec<f64> = ucuts.iter().rev().map(|c| -c).collect();
        let tail_cuts: Vec<f64> = [lim, 0.5 * PI, PI].into_iter().filter(|c| *c >= lim).collect();
        let neg_tail_cuts: Vec<f64> = tail_cuts.iter().rev().map(|c| -c).collect();
        let scale = w.powi(m);
        let tail = |d: f64| d.powi(m) * pdf.at_offset(d);
        let right = integrate_with_breakpoints(scaled, &ucuts, tol)?.value * scale
            + integrate_with_breakpoints(tail, &tail_cuts, tol)?.value;
        let left = integrate_with_breakpoints(scaled, &neg_ucuts, tol)?.value * scale
            + integrate_with_breakpoints(tail, &neg_tail_cuts, tol)?.value;
        Ok((left, right))
    } else {
        let mut cuts = vec![0.0];
        for k in [1.0, 2.0, 4.0] {
            if k * w < 0.5 * PI {
                cuts.push(k * w);
            }
        }
        cuts.push(0.5 * PI);
        cuts.push(PI);
        let f = |d: f64| d.powi(m) * pdf.at_offset(d);
        let right = integrate_with_breakpoints(f, &cuts, tol)?.value;
        let mirrored: Vec<f64> = cuts.iter().rev().map(|c| -c).collect();
        let left = integrate_with_breakpoints(f, &mirrored, tol)?.value;
        Ok((left, right))
    }
}

/// `∫ g_0` over `[-π, π]`.
pub fn total_mass(pdf: &PolarPdf) -> Result<f64, PdfError> {
    let (l, r) = half_moments(pdf, 0)?;
    Ok(l + r)
}

/// `√(∫ θ² g_0(θ) dθ)`; the RMSE does not depend on `φ`.
pub fn rmse_polar(pdf: &PolarPdf) -> Result<f64, PdfError> {
    let (l, r) = half_moments(pdf, 2)?;
    Ok((l + r).sqrt())
}

/// `∫ θ g_0(θ) dθ`, zero up to quadrature error.
pub fn bias_polar(pdf: &PolarPdf) -> Result<f64, PdfError> {
    let (l, r) = half_moments(pdf, 1)?;
    Ok(l + r)
}

/// RMSE by integrating the squared circular error against the complex
/// normal law of `D̃` directly in the plane. Much slower than
/// [`rmse_polar`]; used to cross-check it.
pub fn rmse_cartesian_oracle(m: &TheoreticalMoments) -> Result<f64, PdfError> {
    let sigma = m.sigma();
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(PdfError::DegenerateSigma(sigma));
    }
    let (mx, my) = (m.mean.re, m.mean.im);
    let phi = m.phase;
    let reach = 8.0 * sigma;
    let radius = (2.0 * m.beta_p).max(reach);
    let x_lo = (mx - reach).min(-radius);
    let x_hi = (mx + reach).max(radius);
    let y_lo = (my - reach).min(-radius);
    let y_hi = (my + reach).max(radius);

    let (sin_psi, cos_psi) = (phi + PI).sin_cos();
    let inv_two_var = 0.5 / (sigma * sigma);
    let norm = 1.0 / (TAU * sigma * sigma);
    let inner_tol = Tolerance::new(1e-9, 0.0);
    let steps = [1.0, 2.0, 4.0, 8.0];

    let sorted_cuts = |lo: f64, hi: f64, mut pts: Vec<f64>| {
        pts.retain(|p| *p > lo && *p < hi);
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    };

    let inner = |y: f64| -> Result<f64, QuadratureError> {
        let dy = y - my;
        let weight = (-dy * dy * inv_two_var).exp() * norm;
        if weight == 0.0 {
            return Ok(0.0);
        }
        let mut pts: Vec<f64> = steps.iter().flat_map(|k| [mx - k * sigma, mx + k * sigma]).collect();
        pts.push(mx);
        pts.push(0.0);
        // Where the line crosses the ray opposite the true phase the
        // circular error has a ridge.
        if sin_psi.abs() > 1e-300 && y / sin_psi > 0.0 {
            pts.push(y * cos_psi / sin_psi);
        }
        let pts = sorted_cuts(x_lo, x_hi, pts);
        let f = |x: f64| {
            let e = circular_error(y.atan2(x), phi);
            let dx = x - mx;
            e * e * (-dx * dx * inv_two_var).exp()
        };
        Ok(weight * integrate_with_breakpoints(f, &pts, inner_tol)?.value)
    };

    let mut ypts: Vec<f64> = steps.iter().flat_map(|k| [my - k * sigma, my + k * sigma]).collect();
    ypts.push(my);
    ypts.push(0.0);
    let ypts = sorted_cuts(y_lo, y_hi, ypts);

    // The outer integrand cannot fail through `Fn(f64) -> f64`; park the
    // first inner error and surface it afterwards.
    let failure = std::cell::Cell::new(None);
    let outer = integrate_with_breakpoints(
        |y| match inner(y) {
            Ok(v) => v,
            Err(e) => {
                if failure.get().is_none() {
                    failure.set(Some(e));
                }
                0.0
            }
        },
        &ypts,
        Tolerance::new(1e-7, 1e-300),
    )?;
    if let Some(e) = failure.get() {
        return Err(e.into());
    }
    Ok(outer.value.sqrt())
}

/// `σ²/β_p²`, the inverse Fisher information for `φ`.
pub fn crlb(m: &TheoreticalMoments) -> f64 {
    m.sigma2 / (m.beta_p * m.beta_p)
}

pub fn efficiency(m: &TheoreticalMoments, rmse: f64) -> f64 {
    crlb(m) / (rmse * rmse)
}

/// RMSE of a phase uniform on `(-π, π]`.
pub fn rmse_uniform_limit() -> f64 {
    PI / 3f64.sqrt()
}

/// High-SNR law without phase noise, `1/√(N·SNR)`.
pub fn rmse_linear_approx(n: usize, snr: f64) -> f64 {
    1.0 / (n as f64 * snr).sqrt()
}

/// `√((1/β²)(1 − β² + 1/SNR)/N)`; without an SNR this is the phase-noise
/// floor `√((1/β² − 1)/N)`.
pub fn rmse_floor_approx(n: usize, beta_p: f64, snr: Option<f64>) -> f64 {
    let b2 = beta_p * beta_p;
    let one_minus_b2 = -(2.0 * beta_p.ln()).exp_m1();
    let excess = one_minus_b2 + snr.map_or(0.0, |s| 1.0 / s);
    (excess / (b2 * n as f64)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeHint {
    UniformSaturated,
    Linear,
    PhaseNoiseFloor,
    Transitional,
}

impl RegimeHint {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::UniformSaturated => "UniformSaturated",
            Self::Linear => "Linear",
            Self::PhaseNoiseFloor => "PhaseNoiseFloor",
            Self::Transitional => "Transitional",
        }
    }
}

impl std::fmt::Display for RegimeHint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Relative distance to the uniform limit below which a point counts as
/// saturated.
pub const SATURATION_BAND: f64 = 0.05;
pub const LINEAR_BAND: f64 = 0.02;

pub fn classify_with_rmse(m: &TheoreticalMoments, rmse: f64) -> RegimeHint {
    let uniform = rmse_uniform_limit();
    if (rmse - uniform).abs() <= SATURATION_BAND * uniform {
        return RegimeHint::UniformSaturated;
    }
    if m.one_minus_beta2() > 10.0 / m.snr {
        return RegimeHint::PhaseNoiseFloor;
    }
    let linear = rmse_linear_approx(m.n_samples, m.snr);
    if m.beta_p > 0.9999 && (rmse - linear).abs() <= LINEAR_BAND * linear {
        return RegimeHint::Linear;
    }
    RegimeHint::Transitional
}

pub fn classify_regime(m: &TheoreticalMoments) -> Result<RegimeHint, PdfError> {
    let rmse = rmse_polar(&PolarPdf::from_moments(m)?)?;
    Ok(classify_with_rmse(m, rmse))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub rmse_analytic: f64,
    pub bias_analytic: f64,
    pub crlb: f64,
    pub efficiency: f64,
    pub regime_hint: RegimeHint,
}

pub fn error_report(m: &TheoreticalMoments) -> Result<ErrorReport, PdfError> {
    let pdf = PolarPdf::from_moments(m)?;
    let rmse = rmse_polar(&pdf)?;
    Ok(ErrorReport {
        rmse_analytic: rmse,
        bias_analytic: bias_polar(&pdf)?,
        crlb: crlb(m),
        efficiency: efficiency(m, rmse),
        regime_hint: classify_with_rmse(m, rmse),
    })
}
