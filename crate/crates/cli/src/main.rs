//! `coupler`: coefficient sweeps, quantum ground states, crosstalk scans,
//! spectrum fitting and figure data for the rf-SQUID coupler.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod artifacts;
mod commands;
mod error;
mod parse;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "coupler", version, about = "Tunable ultrastrong coupler between two LC resonators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Hamiltonian coefficients and normal modes over a flux sweep.
    Coeffs(CoeffsArgs),
    /// Branch frequencies over a flux sweep, optionally as synthetic noisy peaks.
    Spectrum(SpectrumArgs),
    /// Ground or first excited state: photon statistics, entropy and Wigner function.
    Quantum(QuantumArgs),
    /// Driven transmission or reflection map with port crosstalk.
    Crosstalk(CrosstalkArgs),
    /// Least-squares fit of circuit parameters to spectrum peaks.
    Fit(FitArgs),
    /// Peak extraction and signal-disappearance search on a spectrum file.
    Scan(ScanArgs),
    /// Data behind one figure panel, with a manifest.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct Output {
    /// Output directory, created if missing.
    #[arg(long, short, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    /// Parameter file (JSON, values with units).
    #[arg(long)]
    pub params: PathBuf,
    /// Single external flux, e.g. `0.5turn` or `3.14rad`.
    #[arg(long, conflicts_with = "sweep")]
    pub phi_ex: Option<String>,
    /// Flux sweep `start:stop:count`.
    #[arg(long, default_value = "0turn:1turn:201")]
    pub sweep: String,
    /// Let the local flux line also bias the dc-SQUID loop.
    #[arg(long)]
    pub local_leak: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value = "0turn:1turn:401")]
    pub sweep: String,
    /// Also write in-band branch points as a peaks file.
    #[arg(long)]
    pub peaks: bool,
    /// Instrument band for the peaks file, `low:high`.
    #[arg(long, default_value = "4GHz:8GHz")]
    pub band: String,
    /// Gaussian frequency noise added to the peaks.
    #[arg(long, default_value = "0Hz")]
    pub noise: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub local_leak: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateChoice {
    Ground,
    Excited,
}

#[derive(Args, Debug)]
pub struct QuantumArgs {
    /// Coupling ratio g/omega, or a sweep `start:stop:count`.
    #[arg(long, default_value = "0.2")]
    pub ratio: String,
    /// Resonator frequency f = omega / 2 pi.
    #[arg(long, default_value = "5GHz")]
    pub omega: String,
    /// Frequency of resonator b; defaults to `--omega`.
    #[arg(long)]
    pub omega_b: Option<String>,
    /// Photon cutoff per mode; chosen from the ratio when absent.
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, value_enum, default_value_t = StateChoice::Ground)]
    pub state: StateChoice,
    /// Half width of the square Wigner window in quadrature units.
    #[arg(long, default_value_t = 5.0)]
    pub wigner_extent: f64,
    /// Points per Wigner axis; 0 skips the Wigner grid.
    #[arg(long, default_value_t = 201)]
    pub wigner_points: usize,
    /// Also write the reduced density matrix of resonator a as a binary blob.
    #[arg(long)]
    pub rho: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CrosstalkArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// Measured coefficient: t_BA, t_AB, r_AA or r_BB.
    #[arg(long, default_value = "t_BA")]
    pub signal: String,
    /// Port crosstalk fraction.
    #[arg(long, default_value_t = 0.25)]
    pub eta: f64,
    /// Drive strength xi sqrt(kappa) / 2 pi.
    #[arg(long, default_value = "1.5MHz")]
    pub epsilon: String,
    #[arg(long, default_value = "330Hz")]
    pub kappa_a: String,
    #[arg(long, default_value = "330Hz")]
    pub kappa_b: String,
    /// Bias sweep `start:stop:count`; by default centred on the g = 0 bias.
    #[arg(long)]
    pub bias: Option<String>,
    /// Half-range of |g| covered by the default bias window.
    #[arg(long, default_value = "25MHz")]
    pub g_span: String,
    #[arg(long, default_value_t = 200)]
    pub bias_points: usize,
    /// Probe sweep `start:stop:count`; by default the branches +- 15 MHz.
    #[arg(long)]
    pub probe: Option<String>,
    #[arg(long, default_value_t = 400)]
    pub probe_points: usize,
    /// Boxcar average along the probe axis, e.g. `2MHz`.
    #[arg(long)]
    pub average: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Starting parameters.
    #[arg(long)]
    pub params: PathBuf,
    /// Spectrum CSV to extract peaks from.
    #[arg(long, conflicts_with = "peaks", required_unless_present = "peaks")]
    pub spectrum: Option<PathBuf>,
    /// Peaks CSV.
    #[arg(long)]
    pub peaks: Option<PathBuf>,
    /// Fit settings (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Peak threshold in robust standard deviations above the median.
    #[arg(long, default_value_t = 5.0)]
    pub threshold: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    /// Spectrum CSV.
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Circuit parameters; enables the disappearance search.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value = "t_BA")]
    pub signal: String,
    #[arg(long, default_value_t = 5.0)]
    pub threshold: f64,
    #[arg(long, default_value = "4GHz:8GHz")]
    pub band: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Panel id, e.g. fig2d, fig4a, fig5g.
    pub figure: String,
    #[command(flatten)]
    pub output: Output,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Coeffs(a) => commands::coeffs(&a),
        Command::Spectrum(a) => commands::spectrum(&a),
        Command::Quantum(a) => commands::quantum(&a),
        Command::Crosstalk(a) => commands::crosstalk(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Reproduce(a) => reproduce::reproduce(&a.figure, &a.output.out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
