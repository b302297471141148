//! `schmidt-lab`: Schmidt-mode extraction for sampled two-variable amplitudes
//! and the atom–photon / SPDC figure reproductions.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 configuration
//! error, 3 numerical failure, 4 unreadable input matrix.

mod config;
mod error;
mod matrix_file;
mod output;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{default_n_from_env, CommandKind, Preset, RunConfig, Settings};
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "schmidt-lab", version, about = "Schmidt decomposition of two-variable amplitudes")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    presets: Presets,

    /// Flat JSON object of settings (keys as flag names); flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(flatten)]
    settings: Settings,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
struct Presets {
    /// Coordinate atom-photon amplitude, xi0 = 100, eta = 0.03, tau = 10
    #[arg(long, global = true)]
    fig1: bool,
    /// Dynamics of K and S for xi0 = 100, eta = 0.03
    #[arg(long, global = true)]
    fig2: bool,
    /// Momentum atom-photon amplitude, xi0 = 100, eta = 0.03
    #[arg(long, global = true)]
    fig3: bool,
    /// Coherence against crystal length at sigma = 10 1/ps
    #[arg(long, global = true)]
    fig4: bool,
    /// SPDC, L = 0.5 mm, sigma = 10 1/ps
    #[arg(long, global = true)]
    fig5: bool,
    /// SPDC, L = 4 mm, sigma = 10 1/ps
    #[arg(long, global = true)]
    fig6: bool,
}

impl Presets {
    fn selected(&self) -> Option<Preset> {
        [
            (self.fig1, Preset::Fig1),
            (self.fig2, Preset::Fig2),
            (self.fig3, Preset::Fig3),
            (self.fig4, Preset::Fig4),
            (self.fig5, Preset::Fig5),
            (self.fig6, Preset::Fig6),
        ]
        .into_iter()
        .find_map(|(on, p)| on.then_some(p))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose the coordinate-space atom-photon amplitude
    AtomPhotonCoord,
    /// Decompose the momentum-space atom-photon amplitude
    AtomPhotonMomentum,
    /// Sweep K and S over time, with and without fine structure
    AtomPhotonDynamics,
    /// Decompose the type-II SPDC biphoton amplitude and its polarization state
    Spdc,
    /// Sweep the SPDC coherence over crystal length
    SpdcLengthSweep,
    /// Decompose a matrix read from a text file
    Decompose {
        /// Whitespace-separated entries `re`, `re+imj` or `re-imj`, one row per line
        file: PathBuf,
    },
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let preset = cli.presets.selected();
    let (command, input) = match &cli.command {
        Some(Command::AtomPhotonCoord) => (Some(CommandKind::AtomPhotonCoord), None),
        Some(Command::AtomPhotonMomentum) => (Some(CommandKind::AtomPhotonMomentum), None),
        Some(Command::AtomPhotonDynamics) => (Some(CommandKind::AtomPhotonDynamics), None),
        Some(Command::Spdc) => (Some(CommandKind::Spdc), None),
        Some(Command::SpdcLengthSweep) => (Some(CommandKind::SpdcLengthSweep), None),
        Some(Command::Decompose { file }) => (Some(CommandKind::Decompose), Some(file.clone())),
        None => (None, None),
    };
    let command = match (command, preset) {
        (Some(c), Some(p)) if c != p.command() => {
            return Err(CliError::Config(format!("--{} is a preset for {}, not {c}", p.label(), p.command())))
        }
        (Some(c), _) => c,
        (None, Some(p)) => p.command(),
        (None, None) => return Err(CliError::Config("no subcommand or figure preset given (see --help)".into())),
    };
    let file = cli.config.as_deref().map(Settings::from_file).transpose()?;
    RunConfig::resolve(command, preset, input, file.as_ref(), &cli.settings, default_n_from_env()?)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    for key in &cfg.ignored {
        eprintln!("warning: setting {key} does not apply to {} and is ignored", cfg.command);
    }
    if cli.dry_run {
        let text = serde_json::to_string_pretty(&cfg.to_json()).unwrap_or_default();
        // a closed stdout (e.g. piped into `head`) is not an error
        let _ = writeln!(std::io::stdout(), "{text}");
        return Ok(());
    }
    let formats = cfg.formats()?;
    cfg.jobs()?;
    let started = Instant::now();
    let report = run::run(&cfg)?;
    let elapsed = started.elapsed();

    let out = cfg.out_dir();
    let io = |e: std::io::Error, what: &str| CliError::Io(format!("{what} in {}: {e}", out.display()));
    std::fs::create_dir_all(&out).map_err(|e| io(e, "cannot create output directory"))?;
    let mut written = Vec::new();
    for (name, body) in report.selected(&formats) {
        std::fs::write(out.join(&name), body).map_err(|e| io(e, &format!("cannot write {name}")))?;
        written.push(name);
    }
    let mut log = std::fs::File::create(out.join("run.log")).map_err(|e| io(e, "cannot write run.log"))?;
    let args: Vec<String> = std::env::args().collect();
    let mut text = format!(
        "command: {}\nargs: {}\nwall_clock_seconds: {:.3}\nfiles: {}\n",
        cfg.command,
        args.join(" "),
        elapsed.as_secs_f64(),
        written.join(", ")
    );
    for w in &report.warnings {
        text.push_str(&format!("warning: {w}\n"));
    }
    log.write_all(text.as_bytes()).map_err(|e| io(e, "cannot write run.log"))?;

    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let mut stdout = std::io::stdout();
    let _ = writeln!(stdout, "{}: {}", cfg.command, report.headline);
    let _ = writeln!(stdout, "wrote {} file(s) to {} in {:.2} s", written.len() + 1, out.display(), elapsed.as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
