//! Monte-Carlo evaluation of the phase estimator and the statistical tests
//! used to check that `D̃_N` is practically complex normal.
//!
//! Draws are grouped in fixed chunks of [`CHUNK`] consecutive indices. Each
//! chunk is reduced on its own and chunk summaries are merged pairwise in
//! index order, so results do not depend on the number of worker threads.

mod battery;
mod hoeffding;
mod multiple;
mod normality;

use std::f64::consts::{PI, TAU};
use std::ops::Range;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::pdf::{circular_error, signed_error};
use crate::rng::NoiseStream;
use crate::signal::{SignalParams, Synthesizer};
use crate::spectral::{goertzel, principal_arg};

pub use battery::{
    run_convergence_battery, BatteryPoint, TestBatteryReport, HOEFFDING_OUTCOMES, HZ_OUTCOMES, HZ_REPETITIONS,
};
pub use hoeffding::hoeffding_d;
pub use multiple::{benjamini_hochberg, fisher_combine};
pub use normality::henze_zirkler;

/// Draws per independently reduced chunk.
pub const CHUNK: u64 = 1024;
pub const HISTOGRAM_BINS: usize = 720;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample covariance is singular")]
    SingularCovariance,
    #[error("need at least {need} observations, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("p-value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid Monte-Carlo configuration: {0}")]
    InvalidConfig(&'static str),
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub params: SignalParams,
    pub n_draws: u64,
    pub master_seed: u64,
    pub n_workers_hint: usize,
}

impl McConfig {
    pub fn new(params: SignalParams, n_draws: u64, master_seed: u64) -> Self {
        Self { params, n_draws, master_seed, n_workers_hint: 1 }
    }

    pub fn with_workers(mut self, n: usize) -> Self {
        self.n_workers_hint = n;
        self
    }
}

/// Counts of `φ̂` over uniform bins partitioning `(-π, π]`; bin `j` is
/// `(edges[j], edges[j+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    fn empty(bins: usize) -> Self {
        let h = TAU / bins as f64;
        let edges = (0..=bins).map(|j| if j == bins { PI } else { -PI + h * j as f64 }).collect();
        Self { edges, counts: vec![0; bins] }
    }

    pub fn bin_of(&self, theta: f64) -> usize {
        let bins = self.counts.len();
        let h = TAU / bins as f64;
        let j = ((theta + PI) / h).ceil() as isize - 1;
        j.clamp(0, bins as isize - 1) as usize
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub n_draws: u64,
    /// `√(mean e²)` with `e` the circular error.
    pub rmse_empirical: f64,
    /// Mean of the signed error wrapped into `(-π, π]`.
    pub bias_empirical: f64,
    pub mean_d: Complex64,
    /// Unbiased sample `E|D̃ − mean|²`.
    pub var_d: f64,
    pub histogram: Histogram,
    /// Delta-method standard error of `rmse_empirical`.
    pub mc_standard_error: f64,
}

/// Running moments of one chunk of draws.
#[derive(Debug, Clone)]
struct Summary {
    n: u64,
    mean_d: Complex64,
    m2_d: f64,
    mean_sq: f64,
    m2_sq: f64,
    mean_signed: f64,
    counts: Vec<u64>,
}

impl Summary {
    fn new(bins: usize) -> Self {
        Self {
            n: 0,
            mean_d: Complex64::new(0.0, 0.0),
            m2_d: 0.0,
            mean_sq: 0.0,
            m2_sq: 0.0,
            mean_signed: 0.0,
            counts: vec![0; bins],
        }
    }

    fn push(&mut self, d: Complex64, err: f64, signed: f64, bin: usize) {
        self.n += 1;
        let n = self.n as f64;
        let delta = d - self.mean_d;
        self.mean_d += delta / n;
        self.m2_d += (delta.conj() * (d - self.mean_d)).re;
        let sq = err * err;
        let ds = sq - self.mean_sq;
        self.mean_sq += ds / n;
        self.m2_sq += ds * (sq - self.mean_sq);
        self.mean_signed += (signed - self.mean_signed) / n;
        self.counts[bin] += 1;
    }

    fn merge(a: Self, b: Self) -> Self {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let (na, nb) = (a.n as f64, b.n as f64);
        let n = na + nb;
        let dd = b.mean_d - a.mean_d;
        let ds = b.mean_sq - a.mean_sq;
        let counts = a.counts.iter().zip(&b.counts).map(|(x, y)| x + y).collect();
        Self {
            n: a.n + b.n,
            mean_d: a.mean_d + dd * (nb / n),
            m2_d: a.m2_d + b.m2_d + dd.norm_sqr() * na * nb / n,
            mean_sq: a.mean_sq + ds * (nb / n),
            m2_sq: a.m2_sq + b.m2_sq + ds * ds * na * nb / n,
            mean_signed: a.mean_signed + (b.mean_signed - a.mean_signed) * (nb / n),
            counts,
        }
    }
}

/// Pairwise reduction in index order.
fn tree_merge(mut parts: Vec<Summary>, bins: usize) -> Summary {
    if parts.is_empty() {
        return Summary::new(bins);
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(Summary::merge(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop().unwrap()
}

fn chunks(draws: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut start = draws.start;
    while start < draws.end {
        let end = (start + CHUNK).min(draws.end);
        out.push(start..end);
        start = end;
    }
    out
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool construction")
}

/// Per-draw reduced DFT values, in draw order.
struct DrawEngine {
    synth: Synthesizer,
    noise: NoiseStream,
    k: usize,
    scale: f64,
}

impl DrawEngine {
    fn new(params: &SignalParams, seed: u64) -> Self {
        Self {
            synth: Synthesizer::new(params),
            noise: NoiseStream::new(seed),
            k: params.dft_bin(),
            scale: 2.0 / (params.amplitude() * params.n_samples() as f64),
        }
    }

    fn for_each(&self, draws: Range<u64>, mut f: impl FnMut(Complex64)) {
        let mut buf = vec![0.0; self.synth.len()];
        for i in draws {
            self.synth.fill(&mut self.noise.draw(i), &mut buf);
            f(goertzel(&buf, self.k) * self.scale);
        }
    }
}

pub fn run_mc(config: &McConfig) -> Result<McReport, StatsError> {
    if config.n_draws == 0 {
        return Err(StatsError::InvalidConfig("n_draws must be at least 1"));
    }
    let engine = DrawEngine::new(&config.params, config.master_seed);
    let phi = config.params.phase();
    let template = Histogram::empty(HISTOGRAM_BINS);
    let parts: Vec<Summary> = pool(config.n_workers_hint).install(|| {
        chunks(0..config.n_draws)
            .into_par_iter()
            .map(|range| {
                let mut s = Summary::new(HISTOGRAM_BINS);
                engine.for_each(range, |d| {
                    let theta = principal_arg(d);
                    s.push(d, circular_error(theta, phi), signed_error(theta, phi), template.bin_of(theta));
                });
                s
            })
            .collect()
    });
    let total = tree_merge(parts, HISTOGRAM_BINS);
    let n = total.n as f64;
    let rmse = total.mean_sq.sqrt();
    let sd_sq = if total.n > 1 { (total.m2_sq / (n - 1.0)).sqrt() } else { 0.0 };
    let mc_standard_error = if rmse > 0.0 { sd_sq / (2.0 * rmse * n.sqrt()) } else { 0.0 };
    Ok(McReport {
        n_draws: total.n,
        rmse_empirical: rmse,
        bias_empirical: total.mean_signed,
        mean_d: total.mean_d,
        var_d: if total.n > 1 { total.m2_d / (n - 1.0) } else { 0.0 },
        histogram: Histogram { counts: total.counts, ..template },
        mc_standard_error,
    })
}

/// Reduced DFT values `D̃_N` for the draw indices in `draws`, in order.
pub fn simulate_reduced(params: &SignalParams, seed: u64, draws: Range<u64>, workers: usize) -> Vec<Complex64> {
    let engine = DrawEngine::new(params, seed);
    let parts: Vec<Vec<Complex64>> = pool(workers).install(|| {
        chunks(draws)
            .into_par_iter()
            .map(|range| {
                let mut v = Vec::with_capacity((range.end - range.start) as usize);
                engine.for_each(range, |d| v.push(d));
                v
            })
            .collect()
    });
    parts.concat()
}
