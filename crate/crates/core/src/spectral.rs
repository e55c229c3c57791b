//! Single-bin synchronous DFT and the phase estimate built on it.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::signal::{snr_linear, SignalParams, SignalRealization};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("input signal is empty")]
    EmptyInput,
    #[error("bin {k} is not a proper bin for {n} samples (need 0 < k < N/2)")]
    BinOutOfRange { k: usize, n: usize },
    #[error("DFT bin is exactly zero; the phase is undefined")]
    ZeroVector,
}

/// `Σ s_n e^{-i 2π k n / N}` via a second-order Goertzel recurrence.
///
/// Uses the Reinsch forms of the recurrence (state differences for
/// `ω ≤ π/2`, state sums above), which stay accurate when `2 cos ω` is
/// close to ±2.
pub fn dft_bin(samples: &[f64], k: usize) -> Result<Complex64, SpectralError> {
    check_bin(samples.len(), k)?;
    Ok(goertzel(samples, k))
}

/// Compensated direct summation with exactly reduced twiddles.
///
/// Slow; kept as the reference the recurrence is checked against.
pub fn dft_bin_naive(samples: &[f64], k: usize) -> Result<Complex64, SpectralError> {
    let n = samples.len();
    check_bin(n, k)?;
    let (mut re, mut im) = (KahanSum::default(), KahanSum::default());
    for (i, &s) in samples.iter().enumerate() {
        let m = ((k as u128 * i as u128) % n as u128) as f64;
        let (sin, cos) = (TAU * m / n as f64).sin_cos();
        re.add(s * cos);
        im.add(-s * sin);
    }
    Ok(Complex64::new(re.total(), im.total()))
}

fn check_bin(n: usize, k: usize) -> Result<(), SpectralError> {
    if n == 0 {
        return Err(SpectralError::EmptyInput);
    }
    if k == 0 || 2 * k >= n {
        return Err(SpectralError::BinOutOfRange { k, n });
    }
    Ok(())
}

pub(crate) fn goertzel(samples: &[f64], k: usize) -> Complex64 {
    let n = samples.len();
    let omega = TAU * k as f64 / n as f64;
    let (sin_w, _) = omega.sin_cos();
    let mut s = 0.0;
    if 2 * k <= n / 2 {
        // s_n - s_{n-1} = x_n + λ s_{n-1} + (s_{n-1} - s_{n-2}),  λ = 2cos ω - 2
        let half = (0.5 * omega).sin();
        let lambda = -4.0 * half * half;
        let mut d = 0.0;
        for &x in samples {
            d += lambda * s + x;
            s += d;
        }
        Complex64::new(d + 0.5 * lambda * s, sin_w * s)
    } else {
        // s_n + s_{n-1} = x_n + μ s_{n-1} - (s_{n-1} + s_{n-2}),  μ = 2cos ω + 2
        let half = (0.5 * omega).cos();
        let mu = 4.0 * half * half;
        let mut e = 0.0;
        for &x in samples {
            e = mu * s + x - e;
            s = e - s;
        }
        Complex64::new(0.5 * mu * s - e, sin_w * s)
    }
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
    fn total(&self) -> f64 {
        self.sum
    }
}

/// Principal argument in `(-π, π]`.
pub fn principal_arg(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    if a <= -PI {
        PI
    } else {
        a
    }
}

/// Reduced DFT value `2 D_N / (A N)` and its argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseStatistic {
    pub d_reduced: Complex64,
    pub phase_estimate: f64,
    pub dft_bin: usize,
    pub n_samples: usize,
}

pub fn estimate_phase(realization: &SignalRealization) -> Result<PhaseStatistic, SpectralError> {
    let p = &realization.params;
    estimate_from_samples(&realization.samples, p.dft_bin(), p.amplitude())
}

/// Phase estimate from raw samples. The amplitude only scales `d_reduced`;
/// the phase estimate does not depend on it.
pub fn estimate_from_samples(samples: &[f64], k: usize, amplitude: f64) -> Result<PhaseStatistic, SpectralError> {
    let d = dft_bin(samples, k)?;
    if d.re == 0.0 && d.im == 0.0 {
        return Err(SpectralError::ZeroVector);
    }
    let d_reduced = d * (2.0 / (amplitude * samples.len() as f64));
    Ok(PhaseStatistic { d_reduced, phase_estimate: principal_arg(d_reduced), dft_bin: k, n_samples: samples.len() })
}

/// Mean and variance of the reduced DFT value, and the per-axis variance of
/// its asymptotic complex-normal law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalMoments {
    /// `β_p e^{iφ}`
    pub mean: Complex64,
    /// `E|D̃ − E D̃|² = (2/N)(1 − β_p² + 1/SNR)`
    pub variance: f64,
    /// `e^{−σp²/2}`
    pub beta_p: f64,
    /// `variance / 2`
    pub sigma2: f64,
    pub phase: f64,
    pub n_samples: usize,
    pub snr: f64,
}

impl TheoreticalMoments {
    /// Moments from the noise description alone (`snr` may be `+∞`).
    pub fn from_noise(n_samples: usize, snr: f64, phase_sigma: f64, phase: f64) -> Self {
        let beta_p = (-0.5 * phase_sigma * phase_sigma).exp();
        // 1 - β² = -expm1(-σp²) keeps precision for tiny σp
        let one_minus_beta2 = -(-phase_sigma * phase_sigma).exp_m1();
        let sigma2 = (one_minus_beta2 + 1.0 / snr) / n_samples as f64;
        Self {
            mean: Complex64::from_polar(beta_p, phase),
            variance: 2.0 * sigma2,
            beta_p,
            sigma2,
            phase,
            n_samples,
            snr,
        }
    }

    pub fn one_minus_beta2(&self) -> f64 {
        -(2.0 * self.beta_p.ln()).exp_m1()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

pub fn theoretical_moments(params: &SignalParams) -> TheoreticalMoments {
    TheoreticalMoments::from_noise(params.n_samples(), snr_linear(params), params.phase_sigma(), params.phase())
}

/// Unreduced `Var(D_N) = N (A²/2 (1 − e^{−σp²}) + σx²)`.
pub fn dft_variance(params: &SignalParams) -> f64 {
    let a = params.amplitude();
    let sp = params.phase_sigma();
    let sx = params.additive_sigma();
    params.n_samples() as f64 * (0.5 * a * a * -(-sp * sp).exp_m1() + sx * sx)
}
