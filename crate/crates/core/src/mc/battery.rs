//! Normality and independence battery for the components of `D̃_N`.

use crate::signal::SignalParams;

use super::{benjamini_hochberg, fisher_combine, henze_zirkler, hoeffding_d, simulate_reduced, StatsError};

pub const HZ_REPETITIONS: usize = 10;
pub const HZ_OUTCOMES: u64 = 2000;
pub const HOEFFDING_OUTCOMES: u64 = 100_000;
/// First draw index of the Hoeffding sample, clear of the HZ repetitions.
const HOEFFDING_OFFSET: u64 = 1 << 32;
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct TestBatteryReport {
    /// Mean HZ statistic over the repetitions.
    pub hz_statistic: f64,
    pub hz_p_values: Vec<f64>,
    pub hz_adjusted: Vec<f64>,
    pub fisher_statistic: f64,
    pub fisher_p: f64,
    /// Between the real and imaginary parts.
    pub hoeffding_d: f64,
    pub verdict_normality: bool,
}

#[derive(Debug, Clone)]
pub struct BatteryPoint {
    pub params: SignalParams,
    pub report: Result<TestBatteryReport, StatsError>,
}

fn battery_at(params: &SignalParams, seed: u64, workers: usize) -> Result<TestBatteryReport, StatsError> {
    let mut stats = Vec::with_capacity(HZ_REPETITIONS);
    let mut p_values = Vec::with_capacity(HZ_REPETITIONS);
    for r in 0..HZ_REPETITIONS as u64 {
        let start = r * HZ_OUTCOMES;
        let d = simulate_reduced(params, seed, start..start + HZ_OUTCOMES, workers);
        let rows: Vec<[f64; 2]> = d.iter().map(|z| [z.re, z.im]).collect();
        let (s, p) = henze_zirkler(&rows)?;
        stats.push(s);
        p_values.push(p);
    }
    let adjusted = benjamini_hochberg(&p_values)?;
    let (fisher_statistic, fisher_p) = fisher_combine(&adjusted)?;
    let d = simulate_reduced(params, seed, HOEFFDING_OFFSET..HOEFFDING_OFFSET + HOEFFDING_OUTCOMES, workers);
    let (re, im): (Vec<f64>, Vec<f64>) = d.iter().map(|z| (z.re, z.im)).unzip();
    Ok(TestBatteryReport {
        hz_statistic: stats.iter().sum::<f64>() / stats.len() as f64,
        hz_p_values: p_values,
        hz_adjusted: adjusted,
        fisher_statistic,
        fisher_p,
        hoeffding_d: hoeffding_d(&re, &im)?,
        verdict_normality: fisher_p > ALPHA,
    })
}

/// One report per grid point; a failing point does not stop the others.
pub fn run_convergence_battery(grid: &[SignalParams], seed: u64, workers: usize) -> Vec<BatteryPoint> {
    grid.iter().map(|p| BatteryPoint { params: p.clone(), report: battery_at(p, seed, workers) }).collect()
}
