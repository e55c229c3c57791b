//! Phase extraction from a synchronously sampled sinusoid of known frequency
//! under additive and phase noise.
//!
//! The estimator is the argument of the single DFT bin that carries the
//! tone. [`pdf`] gives its asymptotic density and error moments,
//! [`divergence`] compares that density with its limits and [`mc`] checks
//! everything by simulation.

pub mod divergence;
pub mod mc;
pub mod pdf;
pub mod quadrature;
pub mod rng;
pub mod signal;
pub mod special;
pub mod spectral;

pub use pdf::{PdfError, PolarPdf, RegimeHint};
pub use signal::{Frequency, SignalError, SignalParams, SignalRealization};
pub use spectral::{PhaseStatistic, SpectralError, TheoreticalMoments};
