//! Command-line surface.

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands;
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{OutputSet, RunManifest};
use crate::recipe::{self, RecipeId};

#[derive(Parser, Debug, Clone)]
#[command(
    name = "combcavity",
    version,
    about = "Frequency-comb driven cavity with cold atoms"
)]
pub struct Cli {
    /// `key = value` parameter file; omitted keys take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, or a `.csv` path naming the main output file.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for parallel scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Reserved; every computation is deterministic.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// OSA-resolved transmission spectrum.
    Spectrum(SpectrumArgs),
    /// Spectra and shifted-mode counts over atom numbers.
    ScanAtoms(ScanAtomsArgs),
    /// Total transmission while the FSR is scanned against a fixed comb.
    ScanFsr(ScanFsrArgs),
    /// Collective shift of one mode, optionally saturated.
    Shift(ShiftArgs),
    /// Mean-field lineshape sweeps of one mode.
    Bistability(BistabilityArgs),
    /// Cavity population while the MOT beam is switched.
    Transient(TransientArgs),
    /// Dispersive shift from the Lindblad model against the formula.
    OracleValidate(OracleArgs),
    /// Figure reproduction with summary metrics.
    Recipe(RecipeArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n_atoms: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_f0_hz: Option<f64>,
    /// Also synthesize the empty cavity and count shifted modes.
    #[arg(long)]
    pub with_empty: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ScanAtomsArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [6e3, 6e4, 1.2e5])]
    pub n_values: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub delta_f0_hz: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ScanFsrArgs {
    /// Full width of the FSR offset scan, centred on zero.
    #[arg(long, default_value_t = 1000.0)]
    pub span_hz: f64,
    #[arg(long, default_value_t = 401)]
    pub points: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub epsilon_hz: Option<f64>,
    #[arg(long)]
    pub n_atoms: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ShiftArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub m: i32,
    #[arg(long)]
    pub intensity_mw_cm2: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepChoice {
    Up,
    Down,
    Both,
}

#[derive(Args, Debug, Clone)]
pub struct BistabilityArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    pub m: i32,
    /// MOT Rabi frequency; defaults to `omega_m_hz` from the config.
    #[arg(long)]
    pub omega_m_hz: Option<f64>,
    #[arg(long, value_enum, default_value_t = SweepChoice::Both)]
    pub sweep: SweepChoice,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Sweep width; defaults to 16 cavity linewidths.
    #[arg(long)]
    pub span_hz: Option<f64>,
    /// Sweep centre; defaults to the resonance expected with the MOT-driven inversion.
    #[arg(long, allow_hyphen_values = true)]
    pub center_hz: Option<f64>,
    /// Halve the integration step.
    #[arg(long)]
    pub fine: bool,
}

#[derive(Args, Debug, Clone)]
pub struct TransientArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    pub m: i32,
    #[arg(long)]
    pub omega_m_hz: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub t_on: f64,
    #[arg(long, default_value_t = 50e-6)]
    pub t_off: f64,
    /// Defaults to 100 µs after `t_off`.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Probe-cavity detuning; defaults to the MOT-on resonance estimate.
    #[arg(long, allow_hyphen_values = true)]
    pub probe_hz: Option<f64>,
    #[arg(long, default_value_t = 0.5e-6)]
    pub sample_interval: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0.02)]
    pub g0_over_delta: f64,
    #[arg(long, default_value_t = 1)]
    pub n_atoms_q: usize,
}

#[derive(Args, Debug, Clone)]
pub struct RecipeArgs {
    #[arg(value_enum)]
    pub id: RecipeId,
    /// Exit with status 4 when a metric misses its expected range.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug, Clone)]
pub struct RerunArgs {
    pub manifest: PathBuf,
}

impl Command {
    fn stem(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::ScanAtoms(_) => "scan_atoms",
            Command::ScanFsr(_) => "scan_fsr",
            Command::Shift(_) => "shift",
            Command::Bistability(_) => "bistability",
            Command::Transient(_) => "transient",
            Command::OracleValidate(_) => "oracle",
            Command::Recipe(r) => r.id.name(),
            Command::Rerun(_) => "rerun",
        }
    }
}

/// Parses `argv` and runs it.
pub fn main_with_args(argv: Vec<String>) -> CliResult<Option<RunManifest>> {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(None);
        }
        Err(e) => return Err(CliError::Argument(e.to_string())),
    };
    run(&cli, &argv)
}

pub fn run(cli: &Cli, argv: &[String]) -> CliResult<Option<RunManifest>> {
    if let Some(n) = cli.threads {
        // A second configuration attempt in the same process is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    if let Command::Rerun(r) = &cli.command {
        return rerun(&r.manifest, cli).map(Some);
    }
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    execute(cli, &config, argv).map(Some)
}

fn execute(cli: &Cli, config: &Config, argv: &[String]) -> CliResult<RunManifest> {
    if let Some(w) = config.finesse_warning() {
        eprintln!("warning: {w}");
    }
    let mut out = OutputSet::new(&cli.out, cli.command.stem())?;
    let mut failed_checks = Vec::new();
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(config, a, &mut out)?,
        Command::ScanAtoms(a) => commands::scan_atoms(config, a, &mut out)?,
        Command::ScanFsr(a) => commands::scan_fsr(config, a, &mut out)?,
        Command::Shift(a) => commands::shift(config, a, &mut out)?,
        Command::Bistability(a) => commands::bistability(config, a, &mut out)?,
        Command::Transient(a) => commands::transient(config, a, &mut out)?,
        Command::OracleValidate(a) => commands::oracle_validate(config, a, &mut out)?,
        Command::Recipe(a) => {
            let report = recipe::run_recipe(a.id, config, &mut out)?;
            if a.check {
                failed_checks = report.failures();
            }
        }
        Command::Rerun(_) => unreachable!("handled by run"),
    }
    let resolved = match &cli.command {
        Command::Recipe(a) => config.with(a.id.overrides())?,
        _ => config.clone(),
    };
    let manifest = out.finish(&resolved, argv)?;
    if failed_checks.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::CheckFailed(failed_checks))
    }
}

/// Runs the recorded command line again with the recorded configuration,
/// writing to the `--out` of the current invocation.
fn rerun(path: &std::path::Path, current: &Cli) -> CliResult<RunManifest> {
    let read_err = |e: String| CliError::Argument(format!("{}: {e}", path.display()));
    let text = std::fs::read_to_string(path).map_err(|e| read_err(e.to_string()))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| read_err(e.to_string()))?;
    let mut recorded = Cli::try_parse_from(&manifest.command_line)
        .map_err(|e| CliError::Argument(e.to_string()))?;
    if matches!(recorded.command, Command::Rerun(_)) {
        return Err(read_err("manifest records another rerun".into()));
    }
    let config = Config::from_snapshot(&manifest.config)?;
    // Keep the recorded file stem when only a directory is given now.
    let recorded_csv = recorded.out.extension().is_some_and(|e| e == "csv");
    let current_csv = current.out.extension().is_some_and(|e| e == "csv");
    recorded.out = match recorded.out.file_name() {
        Some(name) if recorded_csv && !current_csv => current.out.join(name),
        _ => current.out.clone(),
    };
    execute(&recorded, &config, &manifest.command_line)
}
