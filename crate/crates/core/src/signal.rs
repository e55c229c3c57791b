//! Generative model of a synchronously sampled, noisy sinusoid.
//!
//! `s_n = A cos(2π f0 n / fs + φ + p_n) + x_n` with `p_n ~ N(0, σp²)` (radians)
//! and `x_n ~ N(0, σx²)`, for `n = 0..N`. Frequencies are exact rationals so
//! that the synchronous-sampling condition `N f0 / fs ∈ ℕ` can be checked
//! without floating-point slack.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

use crate::rng::{DrawStream, NoiseStream};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("amplitude must be strictly positive and finite, got {0}")]
    NonPositiveAmplitude(f64),
    #[error("frequency must be strictly positive, got {0}")]
    NonPositiveFrequency(Frequency),
    #[error("cannot represent frequency {0:?} as an exact decimal")]
    MalformedFrequency(String),
    #[error("sampling frequency {fs} Hz does not exceed twice the signal frequency {f0} Hz")]
    NyquistViolation { f0: Frequency, fs: Frequency },
    #[error("N * f0 / fs = {n} * {f0} / {fs} is not an integer; sampling is not synchronous")]
    NonSynchronous { n: usize, f0: Frequency, fs: Frequency },
    #[error("at least one sample is required")]
    NoSamples,
    #[error("{name} must be finite and non-negative, got {value}")]
    InvalidNoise { name: &'static str, value: f64 },
    #[error("phase must be finite, got {0}")]
    InvalidPhase(f64),
    #[error("SNR must be strictly positive, got {0}")]
    InvalidSnr(f64),
}

/// A frequency in hertz held as an exact rational number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Frequency(Ratio<i128>);

impl Frequency {
    pub fn from_integer(hz: i64) -> Self {
        Self(Ratio::from_integer(hz as i128))
    }

    /// `numer / denom` hertz.
    ///
    /// Panics if `denom` is zero.
    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self(Ratio::new(numer as i128, denom as i128))
    }

    /// `self · numer / denom`, exactly. Panics if `denom` is zero.
    pub fn scaled(self, numer: i64, denom: i64) -> Self {
        Self(self.0 * Ratio::new(numer as i128, denom as i128))
    }

    pub fn as_ratio(&self) -> Ratio<i128> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        *self.0.numer() as f64 / *self.0.denom() as f64
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Frequency {
    type Err = SignalError;

    /// Accepts `12`, `12.5`, `1.25e3`, `-0.5` and `3/7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SignalError::MalformedFrequency(s.to_string());
        let t = s.trim();
        if let Some((num, den)) = t.split_once('/') {
            let num: i128 = num.trim().parse().map_err(|_| bad())?;
            let den: i128 = den.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Self(Ratio::new(num, den)));
        }
        let (mantissa, exponent) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (negative, digits) = match mantissa.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad());
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let all_digits = format!("{int_part}{frac_part}");
        let mut numer: i128 = all_digits.parse().map_err(|_| bad())?;
        let scale = exponent - frac_part.len() as i32;
        if scale.unsigned_abs() > 30 {
            return Err(bad());
        }
        let pow = 10i128.checked_pow(scale.unsigned_abs()).ok_or_else(bad)?;
        if negative {
            numer = -numer;
        }
        let value = if scale >= 0 {
            Ratio::from_integer(numer.checked_mul(pow).ok_or_else(bad)?)
        } else {
            Ratio::new(numer, pow)
        };
        Ok(Self(value))
    }
}

impl TryFrom<f64> for Frequency {
    type Error = SignalError;

    /// Reads the shortest decimal that round-trips to `hz`, so `0.1` maps to 1/10.
    fn try_from(hz: f64) -> Result<Self, Self::Error> {
        if !hz.is_finite() {
            return Err(SignalError::MalformedFrequency(hz.to_string()));
        }
        format!("{hz}").parse()
    }
}

/// Validated parameters of the signal model.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalParams {
    amplitude: f64,
    signal_freq: Frequency,
    sample_freq: Frequency,
    phase: f64,
    additive_sigma: f64,
    phase_sigma: f64,
    n_samples: usize,
    dft_bin: usize,
    alpha: f64,
}

/// Builds validated parameters; the DFT bin is `k = N f0 / fs`.
///
/// `phase` and `phase_sigma` are in radians; `phase` is wrapped into `[0, 2π)`.
pub fn make_params(
    amplitude: f64,
    signal_freq: Frequency,
    sample_freq: Frequency,
    phase: f64,
    additive_sigma: f64,
    phase_sigma: f64,
    n_samples: usize,
) -> Result<SignalParams, SignalError> {
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(SignalError::NonPositiveAmplitude(amplitude));
    }
    for f in [signal_freq, sample_freq] {
        if *f.0.numer() <= 0 {
            return Err(SignalError::NonPositiveFrequency(f));
        }
    }
    if sample_freq.0 <= signal_freq.0 * 2 {
        return Err(SignalError::NyquistViolation { f0: signal_freq, fs: sample_freq });
    }
    if n_samples == 0 {
        return Err(SignalError::NoSamples);
    }
    if !phase.is_finite() {
        return Err(SignalError::InvalidPhase(phase));
    }
    for (name, value) in [("additive_sigma", additive_sigma), ("phase_sigma", phase_sigma)] {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(SignalError::InvalidNoise { name, value });
        }
    }
    let bin = signal_freq.0 * n_samples as i128 / sample_freq.0;
    if !bin.is_integer() {
        return Err(SignalError::NonSynchronous { n: n_samples, f0: signal_freq, fs: sample_freq });
    }
    let dft_bin = bin.to_integer() as usize;
    let ratio = signal_freq.0 / sample_freq.0;
    let alpha = TAU * (*ratio.numer() as f64 / *ratio.denom() as f64);
    Ok(SignalParams {
        amplitude,
        signal_freq,
        sample_freq,
        phase: phase.rem_euclid(TAU),
        additive_sigma,
        phase_sigma,
        n_samples,
        dft_bin,
        alpha,
    })
}

impl SignalParams {
    /// Same as [`make_params`] with the additive noise set from an SNR in dB
    /// (`f64::INFINITY` means no additive noise).
    #[allow(clippy::too_many_arguments)]
    pub fn with_snr_db(
        amplitude: f64,
        signal_freq: Frequency,
        sample_freq: Frequency,
        phase: f64,
        snr_db: f64,
        phase_sigma: f64,
        n_samples: usize,
    ) -> Result<Self, SignalError> {
        let sigma_x = sigma_x_for_snr(amplitude, snr_db_to_linear(snr_db))?;
        make_params(amplitude, signal_freq, sample_freq, phase, sigma_x, phase_sigma, n_samples)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
    pub fn signal_freq(&self) -> Frequency {
        self.signal_freq
    }
    pub fn sample_freq(&self) -> Frequency {
        self.sample_freq
    }
    pub fn phase(&self) -> f64 {
        self.phase
    }
    pub fn additive_sigma(&self) -> f64 {
        self.additive_sigma
    }
    pub fn phase_sigma(&self) -> f64 {
        self.phase_sigma
    }
    pub fn n_samples(&self) -> usize {
        self.n_samples
    }
    pub fn dft_bin(&self) -> usize {
        self.dft_bin
    }
    /// Normalized angular frequency `2π f0 / fs`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Copy with a different phase (radians).
    pub fn with_phase(&self, phase: f64) -> Self {
        Self { phase: phase.rem_euclid(TAU), ..self.clone() }
    }
}

/// `A² / (2 σx²)`; `+∞` when there is no additive noise.
pub fn snr_linear(params: &SignalParams) -> f64 {
    if params.additive_sigma == 0.0 {
        return f64::INFINITY;
    }
    params.amplitude * params.amplitude / (2.0 * params.additive_sigma * params.additive_sigma)
}

pub fn snr_db(params: &SignalParams) -> f64 {
    snr_linear_to_db(snr_linear(params))
}

pub fn snr_linear_to_db(snr: f64) -> f64 {
    10.0 * snr.log10()
}

pub fn snr_db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Additive noise standard deviation giving `snr` at amplitude `amplitude`.
pub fn sigma_x_for_snr(amplitude: f64, snr: f64) -> Result<f64, SignalError> {
    if snr.is_nan() || snr <= 0.0 {
        return Err(SignalError::InvalidSnr(snr));
    }
    if snr.is_infinite() {
        return Ok(0.0);
    }
    Ok(amplitude / (2.0 * snr).sqrt())
}

/// One noisy realization of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRealization {
    pub samples: Vec<f64>,
    pub seed: u64,
    pub params: SignalParams,
}

/// Deterministic realization for `(params, seed)`.
pub fn generate(params: &SignalParams, seed: u64) -> SignalRealization {
    let synth = Synthesizer::new(params);
    let mut samples = vec![0.0; params.n_samples];
    synth.fill(&mut NoiseStream::new(seed).draw(0), &mut samples);
    SignalRealization { samples, seed, params: params.clone() }
}

/// Precomputed carrier for repeated synthesis with one parameter set.
///
/// Carrier angles use the exact reduction `2π (k n mod N) / N + φ`.
#[derive(Debug, Clone)]
pub struct Synthesizer {
    amplitude: f64,
    phase_sigma: f64,
    additive_sigma: f64,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
}

impl Synthesizer {
    pub fn new(params: &SignalParams) -> Self {
        let n = params.n_samples;
        let k = params.dft_bin;
        let (sin_t, cos_t) = (0..n)
            .map(|i| {
                let m = ((k as u128 * i as u128) % n as u128) as f64;
                (TAU * m / n as f64 + params.phase).sin_cos()
            })
            .unzip();
        Self {
            amplitude: params.amplitude,
            phase_sigma: params.phase_sigma,
            additive_sigma: params.additive_sigma,
            cos_t,
            sin_t,
        }
    }

    pub fn len(&self) -> usize {
        self.cos_t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos_t.is_empty()
    }

    /// Writes one realization into `out` (length N), reading the draw's
    /// stream from its current position.
    pub fn fill(&self, stream: &mut DrawStream, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.len());
        for ((s, &c), &sn) in out.iter_mut().zip(&self.cos_t).zip(&self.sin_t) {
            let (z_phase, z_add) = stream.normal_pair();
            let p = self.phase_sigma * z_phase;
            let carrier = if p == 0.0 {
                c
            } else {
                let (sp, cp) = p.sin_cos();
                c * cp - sn * sp
            };
            *s = self.amplitude * carrier + self.additive_sigma * z_add;
        }
    }
}

/// Degrees to radians, for boundary conversions.
pub fn deg_to_rad(deg: f64) -> f64 {
    deg * PI / 180.0
}

pub fn rad_to_deg(rad: f64) -> f64 {
    rad * 180.0 / PI
}
