//! Kullback–Leibler and Bhattacharyya distances between densities sampled
//! on a common grid, and the grids used to compare the phase-error density
//! with its uniform and Gaussian limits.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::pdf::{PdfError, PolarPdf, NARROW_PEAK_WIDTH, PEAK_WINDOW};
use crate::spectral::TheoreticalMoments;

/// Nodes across the peak (and across `[-π, π]` for wide peaks).
pub const FINE_NODES: usize = (1 << 15) + 1;
/// Intervals in each coarse tail beside a narrow peak.
pub const TAIL_INTERVALS: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivergenceError {
    /// `q` vanishes on nodes carrying this fraction of `p`'s mass.
    #[error("q vanishes where p does not ({unsupported_mass:e} of p's mass is unsupported)")]
    SupportMismatch { unsupported_mass: f64 },
    #[error("densities are sampled on different grids")]
    GridMismatch,
    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
    #[error(transparent)]
    Pdf(#[from] PdfError),
}

/// Nonnegative samples of a density with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self, DivergenceError> {
        if nodes.len() < 2 {
            return Err(DivergenceError::InvalidGrid("need at least two nodes"));
        }
        if nodes.len() != values.len() {
            return Err(DivergenceError::InvalidGrid("nodes and values differ in length"));
        }
        if !nodes.iter().all(|x| x.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DivergenceError::InvalidGrid("nodes must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(DivergenceError::InvalidGrid("values must be finite and nonnegative"));
        }
        let mut weights = vec![0.0; nodes.len()];
        for (i, w) in nodes.windows(2).enumerate() {
            let h = 0.5 * (w[1] - w[0]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        Ok(Self { nodes, weights, values })
    }

    pub fn from_fn(nodes: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self, DivergenceError> {
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Trapezoid integral.
    pub fn integral(&self) -> f64 {
        self.weights.iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }

    /// Rescaled to unit trapezoid integral.
    pub fn normalized(mut self) -> Self {
        let z = self.integral();
        if z > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= z);
        }
        self
    }

    fn check_shared(&self, other: &Self) -> Result<(), DivergenceError> {
        if self.nodes != other.nodes {
            return Err(DivergenceError::GridMismatch);
        }
        Ok(())
    }
}

fn linspace(lo: f64, hi: f64, intervals: usize) -> impl Iterator<Item = f64> {
    let h = (hi - lo) / intervals as f64;
    (0..=intervals).map(move |i| if i == intervals { hi } else { lo + h * i as f64 })
}

/// Grid on `[-π, π]` for a peak of width `width`: uniform when the peak is
/// wide, otherwise dense over `|Δ| ≤ 40·width` with coarse tails.
pub fn working_nodes(width: f64) -> Vec<f64> {
    let fine = FINE_NODES - 1;
    if width.is_nan() || width >= NARROW_PEAK_WIDTH {
        return linspace(-PI, PI, fine).collect();
    }
    let lim = PEAK_WINDOW * width;
    let mut nodes: Vec<f64> = linspace(-PI, -lim, TAIL_INTERVALS).collect();
    nodes.pop();
    nodes.extend(linspace(-lim, lim, fine));
    nodes.extend(linspace(lim, PI, TAIL_INTERVALS).skip(1));
    nodes
}

fn width_of(m: &TheoreticalMoments) -> f64 {
    m.sigma() / m.beta_p
}

/// `g_0` on the working grid. Densities here are of the error `θ − φ`.
pub fn polar_density(m: &TheoreticalMoments) -> Result<DensityGrid, DivergenceError> {
    let pdf = PolarPdf::new(m.beta_p, m.sigma(), 0.0)?;
    DensityGrid::from_fn(working_nodes(pdf.width()), |d| pdf.at_offset(d))
}

/// The uniform density `1/(2π)` on `nodes`.
pub fn uniform(nodes: &[f64]) -> Result<DensityGrid, DivergenceError> {
    DensityGrid::from_fn(nodes.to_vec(), |_| 1.0 / TAU)
}

/// `N(0, σ²/β²)` on the working grid, renormalized to unit mass on `[-π, π]`.
pub fn gaussian_approximation(m: &TheoreticalMoments) -> Result<DensityGrid, DivergenceError> {
    let sigma = m.sigma();
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(PdfError::DegenerateSigma(sigma).into());
    }
    let sd = width_of(m);
    let c = 1.0 / (sd * TAU.sqrt());
    let grid = DensityGrid::from_fn(working_nodes(sd), |d| c * (-0.5 * (d / sd).powi(2)).exp())?;
    Ok(grid.normalized())
}

/// `∫ p ln(p/q)` with both densities normalized on the grid.
pub fn kl_divergence(p: &DensityGrid, q: &DensityGrid) -> Result<f64, DivergenceError> {
    p.check_shared(q)?;
    let zp = p.integral();
    let zq = q.integral();
    let mut acc = 0.0;
    let mut unsupported = 0.0;
    for ((w, &pv), &qv) in p.weights.iter().zip(&p.values).zip(&q.values) {
        if pv == 0.0 {
            continue;
        }
        if qv == 0.0 {
            unsupported += w * pv;
            continue;
        }
        acc += w * pv * (pv.ln() - qv.ln());
    }
    if unsupported > 0.0 {
        return Err(DivergenceError::SupportMismatch { unsupported_mass: unsupported / zp });
    }
    Ok(acc / zp - zp.ln() + zq.ln())
}

/// `−ln ∫ √(p q)` with both densities normalized on the grid.
pub fn bhattacharyya_distance(p: &DensityGrid, q: &DensityGrid) -> Result<f64, DivergenceError> {
    p.check_shared(q)?;
    let overlap: f64 = p.weights.iter().zip(&p.values).zip(&q.values).map(|((w, pv), qv)| w * (pv * qv).sqrt()).sum();
    Ok((-(overlap / (p.integral() * q.integral()).sqrt()).ln()).max(0.0))
}
