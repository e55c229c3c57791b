use std::path::Path;

use syncphase::divergence::{
    bhattacharyya_distance, gaussian_approximation, kl_divergence, polar_density, uniform, DivergenceError,
};
use syncphase::mc::{run_convergence_battery, run_mc, McConfig, StatsError};
use syncphase::pdf::{crlb, error_report, rmse_floor_approx, rmse_linear_approx};
use syncphase::signal::{deg_to_rad, generate, make_params, rad_to_deg, SignalParams};
use syncphase::spectral::{estimate_from_samples, theoretical_moments};
use syncphase::{PolarPdf, SpectralError};

use crate::error::CliError;
use crate::grid::{GridPoint, SweepGrid};
use crate::output::{fmt_real, join_reals, Cell, Provenance, Table};
use crate::{DivergenceArgs, EstimateArgs, GenArgs, McArgs, NormalityArgs, PdfArgs, SweepArgs};

fn deg2(x: f64) -> f64 {
    rad_to_deg(rad_to_deg(x))
}

fn point_cells(p: &GridPoint) -> Vec<Cell> {
    vec![Cell::Real(p.snr_db), Cell::Real(p.sigma_p_deg), Cell::Int(p.n as u64)]
}

fn stats_err(e: StatsError) -> CliError {
    CliError::Numeric(e.to_string())
}

fn divergence_err(e: DivergenceError) -> CliError {
    match e {
        DivergenceError::Pdf(p) => p.into(),
        other => CliError::Numeric(other.to_string()),
    }
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let params = SignalParams::with_snr_db(
        a.amplitude,
        a.f0,
        a.fs,
        deg_to_rad(a.phi_deg),
        a.snr_db,
        deg_to_rad(a.sigma_p_deg),
        a.n,
    )?;
    let real = generate(&params, a.seed);
    let grid = format!(
        "f0={};fs={};n={};phi_deg={};snr_db={};sigma_p_deg={};amplitude={}",
        a.f0,
        a.fs,
        a.n,
        fmt_real(a.phi_deg),
        fmt_real(a.snr_db),
        fmt_real(a.sigma_p_deg),
        fmt_real(a.amplitude)
    );
    let mut t = Table::new(Provenance { command: "gen".into(), seed: Some(a.seed), grid }, &["n", "sample"]);
    for (i, &s) in real.samples.iter().enumerate() {
        t.push(vec![Cell::Int(i as u64), Cell::Real(s)]);
    }
    t.write_to(a.out.as_deref(), false)
}

/// Reads the `n,sample` format; `#` lines are skipped.
pub fn read_samples(path: &Path) -> Result<Vec<f64>, CliError> {
    let name = path.display();
    let bytes = std::fs::read(path).map_err(|e| CliError::Validation(format!("cannot read {name}: {e}")))?;
    let has_content =
        String::from_utf8_lossy(&bytes).lines().any(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    if !has_content {
        return Err(CliError::Validation(format!("{name} is empty")));
    }
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(bytes.as_slice());
    let malformed = |what: String| CliError::Validation(format!("{name}: {what}"));
    let headers = rdr.headers().map_err(|e| malformed(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["n", "sample"] {
        return Err(malformed(format!(
            "expected header `n,sample`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut samples = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let n: usize = rec[0].parse().map_err(|_| malformed(format!("line {line}: bad index {:?}", &rec[0])))?;
        if n != i {
            return Err(malformed(format!("line {line}: index {n} out of sequence (expected {i})")));
        }
        let s: f64 = rec[1].parse().map_err(|_| malformed(format!("line {line}: bad sample {:?}", &rec[1])))?;
        if !s.is_finite() {
            return Err(malformed(format!("line {line}: sample is not finite")));
        }
        samples.push(s);
    }
    if samples.is_empty() {
        return Err(malformed("no samples".into()));
    }
    Ok(samples)
}

pub fn estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let samples = read_samples(&a.input)?;
    let params = make_params(a.amplitude, a.f0, a.fs, 0.0, 0.0, 0.0, samples.len())?;
    let stat = estimate_from_samples(&samples, params.dft_bin(), a.amplitude).map_err(|e| match e {
        SpectralError::ZeroVector => CliError::Numeric(e.to_string()),
        other => CliError::Validation(other.to_string()),
    })?;
    let grid = format!("f0={};fs={};n={};amplitude={}", a.f0, a.fs, samples.len(), fmt_real(a.amplitude));
    let mut t = Table::new(
        Provenance { command: "estimate".into(), seed: None, grid },
        &["phase_deg", "phase_rad", "d_re", "d_im"],
    );
    t.push(vec![
        Cell::Real(rad_to_deg(stat.phase_estimate)),
        Cell::Real(stat.phase_estimate),
        Cell::Real(stat.d_reduced.re),
        Cell::Real(stat.d_reduced.im),
    ]);
    t.write_to(None, a.json)
}

pub fn rmse(a: &SweepArgs) -> Result<(), CliError> {
    let grid = a.grid()?;
    let mut t = Table::new(
        Provenance { command: "rmse".into(), seed: None, grid: grid.describe() },
        &[
            "snr_db",
            "sigma_p_deg",
            "n",
            "rmse_analytic_deg",
            "rmse_linear_approx_deg",
            "rmse_floor_deg",
            "crlb_deg2",
            "efficiency",
            "regime",
            "diagnostics",
        ],
    );
    for p in grid.points() {
        let m = theoretical_moments(&grid.params(&p)?);
        let mut diagnostics = Vec::new();
        let report = error_report(&m).map_err(|e| diagnostics.push(e.to_string())).ok();
        // outside the floor regime the floor law alone is not the right comparison
        if m.one_minus_beta2() < 100.0 / m.snr {
            let generic = rmse_floor_approx(m.n_samples, m.beta_p, Some(m.snr));
            diagnostics.push(format!("generic_law_deg={}", fmt_real(rad_to_deg(generic))));
        }
        let mut row = point_cells(&p);
        row.extend([
            Cell::opt(report.map(|r| rad_to_deg(r.rmse_analytic))),
            Cell::real(rad_to_deg(rmse_linear_approx(m.n_samples, m.snr))),
            Cell::real(rad_to_deg(rmse_floor_approx(m.n_samples, m.beta_p, None))),
            Cell::real(deg2(crlb(&m))),
            Cell::opt(report.map(|r| r.efficiency)),
            report.map_or(Cell::Na, |r| Cell::Text(r.regime_hint.to_string())),
            Cell::Text(diagnostics.join(";")),
        ]);
        t.push(row);
    }
    t.write_to(None, a.json)
}

pub fn efficiency(a: &SweepArgs) -> Result<(), CliError> {
    let grid = a.grid()?;
    let mut t = Table::new(
        Provenance { command: "efficiency".into(), seed: None, grid: grid.describe() },
        &["snr_db", "sigma_p_deg", "n", "rmse_analytic_deg", "crlb_deg2", "efficiency", "one_minus_efficiency"],
    );
    for p in grid.points() {
        let m = theoretical_moments(&grid.params(&p)?);
        let r = error_report(&m)?;
        let mut row = point_cells(&p);
        row.extend([
            Cell::real(rad_to_deg(r.rmse_analytic)),
            Cell::real(deg2(r.crlb)),
            Cell::real(r.efficiency),
            Cell::real(1.0 - r.efficiency),
        ]);
        t.push(row);
    }
    t.write_to(None, a.json)
}

fn single_point(grid: &SweepGrid) -> Result<(GridPoint, SignalParams), CliError> {
    let p = grid.points().remove(0);
    let params = grid.params(&p)?;
    Ok((p, params))
}

pub fn mc(a: &McArgs) -> Result<(), CliError> {
    if a.draws < 2 {
        return Err(CliError::Validation("--draws must be at least 2".into()));
    }
    let grid = a.point.grid()?;
    let (p, params) = single_point(&grid)?;
    let report = run_mc(&McConfig::new(params, a.draws, a.seed).with_workers(a.workers.max(1))).map_err(stats_err)?;
    let desc = format!("{};draws={}", grid.describe(), a.draws);
    let prov = Provenance { command: "mc".into(), seed: Some(a.seed), grid: desc };
    let mut t = Table::new(
        prov.clone(),
        &[
            "snr_db",
            "sigma_p_deg",
            "n",
            "n_draws",
            "rmse_empirical_deg",
            "bias_empirical_deg",
            "mean_d_re",
            "mean_d_im",
            "var_d",
            "mc_standard_error_deg",
        ],
    );
    let mut row = point_cells(&p);
    row.extend([
        Cell::Int(report.n_draws),
        Cell::real(rad_to_deg(report.rmse_empirical)),
        Cell::real(rad_to_deg(report.bias_empirical)),
        Cell::real(report.mean_d.re),
        Cell::real(report.mean_d.im),
        Cell::real(report.var_d),
        Cell::real(rad_to_deg(report.mc_standard_error)),
    ]);
    t.push(row);
    if let Some(path) = &a.histogram {
        let mut h = Table::new(Provenance { command: "mc --histogram".into(), ..prov }, &["theta_deg", "count"]);
        for (c, &n) in report.histogram.centers().zip(&report.histogram.counts) {
            h.push(vec![Cell::Real(rad_to_deg(c)), Cell::Int(n)]);
        }
        h.write_to(Some(path), false)?;
    }
    t.write_to(None, a.json)
}

pub fn pdf(a: &PdfArgs) -> Result<(), CliError> {
    let grid = a.point.grid()?;
    let (_, params) = single_point(&grid)?;
    let pdf = PolarPdf::from_moments(&theoretical_moments(&params))?;
    if let Some(bad) = a.theta_deg.0.iter().find(|t| !t.is_finite()) {
        return Err(CliError::Validation(format!("theta_deg must be finite, got {bad}")));
    }
    let desc = format!("{};theta_deg={}", grid.describe(), join_reals(&a.theta_deg.0));
    let mut t = Table::new(Provenance { command: "pdf".into(), seed: None, grid: desc }, &["theta_deg", "g_value"]);
    for &th in &a.theta_deg.0 {
        t.push(vec![Cell::Real(th), Cell::real(pdf.value(deg_to_rad(th)))]);
    }
    t.write_to(None, a.json)
}

pub fn divergence(a: &DivergenceArgs) -> Result<(), CliError> {
    let grid = crate::build_grid(&a.snr_db.0, &[a.sigma_p_deg], &[a.n], &a.template)?;
    let mut t = Table::new(
        Provenance { command: "divergence".into(), seed: None, grid: grid.describe() },
        &["snr_db", "kl_to_uniform", "bhat_to_gauss", "kl_to_gauss_or_NA"],
    );
    for p in grid.points() {
        let m = theoretical_moments(&grid.params(&p)?);
        let g = polar_density(&m).map_err(divergence_err)?;
        let flat = uniform(g.nodes()).map_err(divergence_err)?;
        let gauss = gaussian_approximation(&m).map_err(divergence_err)?;
        let kl_u = kl_divergence(&g, &flat).map_err(divergence_err)?;
        let bhat = bhattacharyya_distance(&g, &gauss).map_err(divergence_err)?;
        let kl_g = match kl_divergence(&g, &gauss) {
            Ok(v) => Cell::real(v),
            Err(DivergenceError::SupportMismatch { .. }) => Cell::Na,
            Err(e) => return Err(divergence_err(e)),
        };
        t.push(vec![Cell::Real(p.snr_db), Cell::real(kl_u), Cell::real(bhat), kl_g]);
    }
    t.write_to(None, a.json)
}

pub fn normality(a: &NormalityArgs) -> Result<(), CliError> {
    let grid = a.sweep.grid()?;
    let points = grid.points();
    let params = points.iter().map(|p| grid.params(p)).collect::<Result<Vec<_>, _>>()?;
    let battery = run_convergence_battery(&params, a.seed, a.workers.max(1));
    let mut t = Table::new(
        Provenance { command: "normality".into(), seed: Some(a.seed), grid: grid.describe() },
        &[
            "snr_db",
            "sigma_p_deg",
            "n",
            "hz_statistic",
            "hz_p_values",
            "hz_adjusted",
            "fisher_statistic",
            "fisher_p",
            "hoeffding_d",
            "verdict_normality",
            "diagnostics",
        ],
    );
    for (p, b) in points.iter().zip(battery) {
        let mut row = point_cells(p);
        match b.report {
            Ok(r) => row.extend([
                Cell::real(r.hz_statistic),
                Cell::Text(join_reals(&r.hz_p_values)),
                Cell::Text(join_reals(&r.hz_adjusted)),
                Cell::real(r.fisher_statistic),
                Cell::real(r.fisher_p),
                Cell::real(r.hoeffding_d),
                Cell::Bool(r.verdict_normality),
                Cell::Text(String::new()),
            ]),
            Err(e) => {
                row.extend(std::iter::repeat_n(Cell::Na, 7));
                row.push(Cell::Text(e.to_string()));
            }
        }
        t.push(row);
    }
    t.write_to(None, a.sweep.json)
}
