//! Axis lists (`0,10,20`, `-50:50:10`, `inf`) and the sweep grid built from them.

use syncphase::signal::{deg_to_rad, Frequency, SignalParams};

use crate::error::CliError;

/// Parses a comma-separated list whose items are numbers, `inf`, or inclusive
/// ranges `start:stop:step`.
pub fn parse_real_list(s: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if item.contains(':') {
            let parts: Vec<&str> = item.split(':').collect();
            let [a, b, step] = parts.as_slice() else {
                return Err(format!("range {item:?} must be start:stop:step"));
            };
            let a = parse_real(a)?;
            let b = parse_real(b)?;
            let step = parse_real(step)?;
            if !(a.is_finite() && b.is_finite() && step.is_finite()) || step == 0.0 || (b - a) / step < 0.0 {
                return Err(format!("range {item:?} is empty or unbounded"));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(format!("range {item:?} has too many points"));
            }
            out.extend((0..count).map(|i| a + step * i as f64));
        } else {
            out.push(parse_real(item)?);
        }
    }
    if out.is_empty() {
        return Err("empty list".into());
    }
    Ok(out)
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    match s.trim() {
        "inf" | "+inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|_| format!("{t:?} is not a number")),
    }
}

pub fn parse_count_list(s: &str) -> Result<Vec<usize>, String> {
    let reals = parse_real_list(s)?;
    reals
        .into_iter()
        .map(|v| {
            if v.is_finite() && v >= 1.0 && v.fract() == 0.0 && v <= 1e12 {
                Ok(v as usize)
            } else {
                Err(format!("{v} is not a positive integer"))
            }
        })
        .collect()
}

/// One sweep point: the axis values and its signal parameters.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub snr_db: f64,
    pub sigma_p_deg: f64,
    pub n: usize,
}

/// Cartesian product of the three axes over a fixed template. Each point
/// samples at `fs = N f0 / k`, so the tone stays on bin `k` for every `N`.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub snr_db_values: Vec<f64>,
    pub sigma_p_deg_values: Vec<f64>,
    pub n_values: Vec<usize>,
    pub f0: Frequency,
    pub k: usize,
    pub amplitude: f64,
    pub phi_deg: f64,
}

impl SweepGrid {
    /// Points sorted by `(snr_db, sigma_p_deg, n)`.
    pub fn points(&self) -> Vec<GridPoint> {
        let mut pts = Vec::new();
        for &snr_db in &self.snr_db_values {
            for &sigma_p_deg in &self.sigma_p_deg_values {
                for &n in &self.n_values {
                    pts.push(GridPoint { snr_db, sigma_p_deg, n });
                }
            }
        }
        pts.sort_by(|a, b| {
            a.snr_db.total_cmp(&b.snr_db).then(a.sigma_p_deg.total_cmp(&b.sigma_p_deg)).then(a.n.cmp(&b.n))
        });
        pts.dedup_by(|a, b| a.snr_db == b.snr_db && a.sigma_p_deg == b.sigma_p_deg && a.n == b.n);
        pts
    }

    pub fn params(&self, p: &GridPoint) -> Result<SignalParams, CliError> {
        let fs = self.f0.scaled(p.n as i64, self.k as i64);
        SignalParams::with_snr_db(
            self.amplitude,
            self.f0,
            fs,
            deg_to_rad(self.phi_deg),
            p.snr_db,
            deg_to_rad(p.sigma_p_deg),
            p.n,
        )
        .map_err(|e| CliError::Validation(format!("grid point {p:?}: {e}")))
    }

    /// Checks every point up front so a bad axis fails before any work.
    pub fn validate(&self) -> Result<(), CliError> {
        for p in self.points() {
            if p.sigma_p_deg < 0.0 || !p.sigma_p_deg.is_finite() {
                return Err(CliError::Validation(format!(
                    "sigma_p_deg must be finite and >= 0, got {}",
                    p.sigma_p_deg
                )));
            }
            self.params(&p)?;
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!(
            "snr_db={:?};sigma_p_deg={:?};n={:?};f0={};k={};amplitude={};phi_deg={}",
            self.snr_db_values, self.sigma_p_deg_values, self.n_values, self.f0, self.k, self.amplitude, self.phi_deg
        )
    }
}
