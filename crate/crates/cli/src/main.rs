//! `syncphase`: signal round trips and figure-data sweeps for synchronous
//! phase estimation. Output is CSV (or JSON with `--json`) on stdout.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use syncphase::Frequency;

mod commands;
mod error;
mod grid;
mod output;

use error::CliError;
use grid::{parse_count_list, parse_real, parse_real_list, SweepGrid};

#[derive(Debug, Parser)]
#[command(name = "syncphase", version, about = "Phase extraction from a known-frequency sinusoid")]
#[command(args_override_self = true)]
struct Cli {
    /// JSON object whose keys are flag names (e.g. {"snr_db": "-50:50:10"});
    /// explicit flags win over it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write one noisy realization as CSV `n,sample`.
    Gen(GenArgs),
    /// Estimate the phase of a CSV realization.
    Estimate(EstimateArgs),
    /// Analytic RMSE, asymptotic laws, CRLB and regime over a grid.
    Rmse(SweepArgs),
    /// Monte-Carlo replication at one point.
    Mc(McArgs),
    /// Estimator density over a grid of angles.
    Pdf(PdfArgs),
    /// KL and Bhattacharyya divergences against the uniform and Gaussian limits.
    Divergence(DivergenceArgs),
    /// Asymptotic efficiency over a grid.
    Efficiency(SweepArgs),
    /// Henze–Zirkler and Hoeffding convergence battery over a grid.
    Normality(NormalityArgs),
}

/// A list of reals: comma-separated values, `inf`, or `start:stop:step`.
#[derive(Debug, Clone)]
pub struct RealList(pub Vec<f64>);

#[derive(Debug, Clone)]
pub struct CountList(pub Vec<usize>);

fn real_list(s: &str) -> Result<RealList, String> {
    parse_real_list(s).map(RealList)
}

fn count_list(s: &str) -> Result<CountList, String> {
    parse_count_list(s).map(CountList)
}

fn real(s: &str) -> Result<f64, String> {
    parse_real(s)
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub f0: Frequency,
    #[arg(long)]
    pub fs: Frequency,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_deg: f64,
    /// `inf` disables the additive channel.
    #[arg(long, default_value = "inf", value_parser = real, allow_hyphen_values = true)]
    pub snr_db: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_p_deg: f64,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long)]
    pub f0: Frequency,
    #[arg(long)]
    pub fs: Frequency,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long)]
    pub json: bool,
}

/// Fixed part of every sweep point. Sampling runs at `fs = N f0 / k`.
#[derive(Debug, Args)]
pub struct Template {
    #[arg(long, default_value = "1")]
    pub f0: Frequency,
    /// DFT bin of the tone.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub phi_deg: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "-50:50:10", value_parser = real_list, allow_hyphen_values = true)]
    pub snr_db: RealList,
    #[arg(long, default_value = "0", value_parser = real_list)]
    pub sigma_p_deg: RealList,
    #[arg(long, default_value = "1000", value_parser = count_list)]
    pub n: CountList,
    #[command(flatten)]
    pub template: Template,
    #[arg(long)]
    pub json: bool,
}

impl SweepArgs {
    pub fn grid(&self) -> Result<SweepGrid, CliError> {
        build_grid(&self.snr_db.0, &self.sigma_p_deg.0, &self.n.0, &self.template)
    }
}

pub fn build_grid(snr: &[f64], sp: &[f64], n: &[usize], t: &Template) -> Result<SweepGrid, CliError> {
    if t.k == 0 {
        return Err(CliError::Validation("k must be at least 1".into()));
    }
    let g = SweepGrid {
        snr_db_values: snr.to_vec(),
        sigma_p_deg_values: sp.to_vec(),
        n_values: n.to_vec(),
        f0: t.f0,
        k: t.k,
        amplitude: t.amplitude,
        phi_deg: t.phi_deg,
    };
    g.validate()?;
    Ok(g)
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[arg(long, default_value = "0", value_parser = real, allow_hyphen_values = true)]
    pub snr_db: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_p_deg: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub template: Template,
}

impl PointArgs {
    pub fn grid(&self) -> Result<SweepGrid, CliError> {
        build_grid(&[self.snr_db], &[self.sigma_p_deg], &[self.n], &self.template)
    }
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value_t = 100_000)]
    pub draws: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Also write `theta_deg,count` for the 720-bin histogram.
    #[arg(long, value_name = "FILE")]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PdfArgs {
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, default_value = "-180:180:0.5", value_parser = real_list, allow_hyphen_values = true)]
    pub theta_deg: RealList,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[arg(long, default_value = "-50:10:2", value_parser = real_list, allow_hyphen_values = true)]
    pub snr_db: RealList,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_p_deg: f64,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub template: Template,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct NormalityArgs {
    #[command(flatten)]
    pub sweep: SweepArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

/// Splices the `--config` file's keys in as flags right after the
/// subcommand, so anything given explicitly later on the line overrides them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut config = None;
    let mut sub_at = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(p) = a.strip_prefix("--config=") {
            config = Some(OsString::from(p));
        } else if sub_at.is_none() && !a.starts_with('-') {
            sub_at = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub_at)) = (config, sub_at) else {
        return Ok(args);
    };
    let path = PathBuf::from(path);
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("config {} is not valid JSON: {e}", path.display())))?;
    let serde_json::Value::Object(map) = doc else {
        return Err(CliError::Validation(format!("config {} must hold a JSON object", path.display())));
    };
    let mut injected = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let text = match value {
            serde_json::Value::Bool(true) => {
                injected.push(OsString::from(flag));
                continue;
            }
            serde_json::Value::Bool(false) | serde_json::Value::Null => continue,
            serde_json::Value::Array(items) => items.iter().map(scalar_text).collect::<Result<Vec<_>, _>>()?.join(","),
            other => scalar_text(&other)?,
        };
        injected.push(OsString::from(format!("{flag}={text}")));
    }
    let mut out = args[..=sub_at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub_at + 1..]);
    Ok(out)
}

fn scalar_text(v: &serde_json::Value) -> Result<String, CliError> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(CliError::Validation(format!("config value {other} is not a scalar"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Estimate(a) => commands::estimate(&a),
        Command::Rmse(a) => commands::rmse(&a),
        Command::Mc(a) => commands::mc(&a),
        Command::Pdf(a) => commands::pdf(&a),
        Command::Divergence(a) => commands::divergence(&a),
        Command::Efficiency(a) => commands::efficiency(&a),
        Command::Normality(a) => commands::normality(&a),
    }
}

fn main() -> ExitCode {
    let result = expand_config(std::env::args_os().collect()).and_then(|args| {
        let cli = Cli::try_parse_from(args).map_err(|e| {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            CliError::Usage(e.render().to_string())
        })?;
        run(cli)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(_) => eprintln!("{e}"),
                _ => eprintln!("syncphase: {e}"),
            }
            e.exit_code()
        }
    }
}
