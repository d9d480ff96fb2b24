//! snvtk: spin-Hamiltonian spectra and spectroscopy fits for group-IV
//! color centers in diamond (SnV⁻ defaults).
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 non-convergence.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use snvtk_core::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "snvtk",
    version,
    about = "Zeeman spectra prediction and spectroscopy fitting for group-IV color centers"
)]
struct Cli {
    /// Path to a key=value config file (see README for keys).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed for synthetic-data commands; overrides run.seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; overrides run.out_dir from the config.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict Zeeman-split transition lines across a field sweep.
    PredictZeeman(PredictZeemanArgs),
    /// Fit Lorentzian or Gaussian peaks to a spectrum CSV.
    FitSpectrum(FitSpectrumArgs),
    /// Fit the shelving-state autocorrelation model to a delay histogram.
    FitG2(FitG2Args),
    /// Fit Malus patterns to two angle series and test orthogonality.
    FitPolarization(FitPolarizationArgs),
    /// Calibrate per-parity orbital g-factor scales against a measured sweep.
    FitAlpha(FitAlphaArgs),
    /// Generate synthetic fixtures.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Lifetime-limited linewidth (MHz) for an excited-state lifetime (ns).
    LifetimeLinewidth(LifetimeArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct PredictZeemanArgs {
    /// Lowest field magnitude, Tesla.
    #[arg(long, default_value_t = 0.0)]
    b_min: f64,
    /// Highest field magnitude, Tesla.
    #[arg(long, default_value_t = 9.0)]
    b_max: f64,
    /// Number of field points (inclusive of both ends).
    #[arg(long, default_value_t = 19)]
    steps: usize,
    /// Field direction in the crystal frame, e.g. 0,0,1.
    #[arg(long, default_value = "0,0,1")]
    direction: String,
    /// Scale the ground-manifold orbital factors by this value.
    #[arg(long)]
    alpha_g: Option<f64>,
    /// Scale the excited-manifold orbital factors by this value.
    #[arg(long)]
    alpha_u: Option<f64>,
    /// Also emit pairwise-centered curves (drift-corrected view).
    #[arg(long, default_value_t = false)]
    centered: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FitSpectrumArgs {
    /// Spectrum CSV (x, y[, sigma]).
    #[arg(long)]
    input: PathBuf,
    /// Input x-axis interpretation: freq_counts or wavelength_counts.
    #[arg(long, default_value = "freq_counts")]
    format: String,
    /// Line shape: lorentzian or gaussian.
    #[arg(long, default_value = "lorentzian")]
    model: String,
    /// Number of peaks, 1 or 2.
    #[arg(long, default_value_t = 1)]
    peaks: usize,
    /// Solver iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FitG2Args {
    /// Delay histogram CSV (tau_ns, g2[, sigma]).
    #[arg(long)]
    input: PathBuf,
    /// Solver iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FitPolarizationArgs {
    /// First angle series CSV (angle_deg, intensity[, sigma]).
    #[arg(long)]
    input_a: PathBuf,
    /// Second angle series CSV.
    #[arg(long)]
    input_b: PathBuf,
    /// Allowed deviation from perpendicular, degrees.
    #[arg(long, default_value_t = 1.0)]
    ortho_tol_deg: f64,
    /// Solver iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FitAlphaArgs {
    /// Measured sweep CSV (B_tesla, family, line_index, offset_ghz[, sigma_ghz]).
    #[arg(long)]
    input: PathBuf,
    /// Which centered lines enter the objective: all, inner, or outer.
    #[arg(long, default_value = "all")]
    lines: String,
    /// Field direction in the crystal frame.
    #[arg(long, default_value = "0,0,1")]
    direction: String,
    /// Solver iteration cap.
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Spectrum of one family's lines at a fixed field.
    Spectrum(SynthSpectrumArgs),
    /// Autocorrelation trace.
    G2(SynthG2Args),
    /// Measured-style Zeeman sweep dataset with jitter and drift.
    Zeeman(SynthZeemanArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SynthSpectrumArgs {
    /// Transition family to synthesize (A, B, C, or D).
    #[arg(long, default_value = "C")]
    family: String,
    /// Field magnitude, Tesla.
    #[arg(long, default_value_t = 9.0)]
    b_tesla: f64,
    /// Field direction in the crystal frame.
    #[arg(long, default_value = "0,0,1")]
    direction: String,
    /// Line FWHM, GHz.
    #[arg(long, default_value_t = 0.5)]
    linewidth_ghz: f64,
    /// Grid start, GHz (defaults to a window around the family lines).
    #[arg(long)]
    grid_min: Option<f64>,
    /// Grid end, GHz.
    #[arg(long)]
    grid_max: Option<f64>,
    /// Number of grid points.
    #[arg(long, default_value_t = 1001)]
    points: usize,
    /// Noise model: gaussian_relative, gaussian_absolute, poisson_counts.
    #[arg(long, default_value = "gaussian_relative")]
    noise_kind: String,
    /// Noise magnitude (model-dependent meaning).
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    /// Constant baseline added to the model.
    #[arg(long, default_value_t = 0.0)]
    baseline: f64,
    /// Output file name (within the output directory).
    #[arg(long, default_value = "synth_spectrum.csv")]
    out: String,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SynthG2Args {
    #[arg(long, default_value_t = 0.3)]
    b: f64,
    #[arg(long, default_value_t = 0.77)]
    c: f64,
    #[arg(long, default_value_t = 4.8)]
    tau1_ns: f64,
    #[arg(long, default_value_t = 103.0)]
    tau2_ns: f64,
    /// Delay grid spans [-tau_max, tau_max].
    #[arg(long, default_value_t = 400.0)]
    tau_max_ns: f64,
    #[arg(long, default_value_t = 1601)]
    points: usize,
    #[arg(long, default_value = "gaussian_relative")]
    noise_kind: String,
    #[arg(long, default_value_t = 0.02)]
    noise: f64,
    #[arg(long, default_value = "synth_g2.csv")]
    out: String,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SynthZeemanArgs {
    #[arg(long, default_value_t = 1.0)]
    alpha_g: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha_u: f64,
    #[arg(long, default_value_t = 0.5)]
    b_min: f64,
    #[arg(long, default_value_t = 9.0)]
    b_max: f64,
    #[arg(long, default_value_t = 18)]
    steps: usize,
    #[arg(long, default_value = "0,0,1")]
    direction: String,
    /// Families to emit, comma separated.
    #[arg(long, default_value = "C,D")]
    families: String,
    /// Per-line Gaussian jitter, GHz.
    #[arg(long, default_value_t = 0.5)]
    jitter_ghz: f64,
    /// Per-field common drift values, comma separated (one per field).
    #[arg(long)]
    drift_ghz: Option<String>,
    #[arg(long, default_value = "synth_zeeman.csv")]
    out: String,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct LifetimeArgs {
    /// Excited-state lifetime, ns.
    #[arg(long)]
    tau1_ns: f64,
}

/// Errors mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or option values: exit 2.
    Usage(String),
    /// Unreadable, unparsable, or insufficient data: exit 3.
    Data(String),
    /// A fit failed to converge: exit 4.
    NotConverged(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::NotConverged(m) => write!(f, "non-convergence: {m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Data(format!("cannot read config {}: {e}", path.display()))
            })?;
            RunConfig::parse(&text).map_err(|e| CliError::Data(format!("config: {e}")))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        config.out_dir = dir.display().to_string();
    }
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::Data(format!("cannot create output directory: {e}")))?;
    Ok(config)
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (e.g. `snvtk ... | head`) like any
    // other command-line tool instead of panicking mid-write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let config = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.code());
        }
    };
    let result = match &cli.command {
        Command::PredictZeeman(args) => commands::predict_zeeman(&config, args),
        Command::FitSpectrum(args) => commands::fit_spectrum(&config, args),
        Command::FitG2(args) => commands::fit_g2(&config, args),
        Command::FitPolarization(args) => commands::fit_polarization(&config, args),
        Command::FitAlpha(args) => commands::fit_alpha(&config, args),
        Command::Synth(SynthCommand::Spectrum(args)) => commands::synth_spectrum(&config, args),
        Command::Synth(SynthCommand::G2(args)) => commands::synth_g2(&config, args),
        Command::Synth(SynthCommand::Zeeman(args)) => commands::synth_zeeman(&config, args),
        Command::LifetimeLinewidth(args) => commands::lifetime_linewidth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
