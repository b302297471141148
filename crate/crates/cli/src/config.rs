//! Run configuration: flags, config file, presets and defaults, merged in
//! that order of precedence.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

/// Environment variable that replaces the built-in default resolution.
pub const DEFAULT_N_ENV: &str = "SCHMIDT_LAB_DEFAULT_N";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    AtomPhotonCoord,
    AtomPhotonMomentum,
    AtomPhotonDynamics,
    Spdc,
    SpdcLengthSweep,
    Decompose,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::AtomPhotonCoord => "atom-photon-coord",
            CommandKind::AtomPhotonMomentum => "atom-photon-momentum",
            CommandKind::AtomPhotonDynamics => "atom-photon-dynamics",
            CommandKind::Spdc => "spdc",
            CommandKind::SpdcLengthSweep => "spdc-length-sweep",
            CommandKind::Decompose => "decompose",
        }
    }

    fn is_sweep(self) -> bool {
        matches!(self, CommandKind::AtomPhotonDynamics | CommandKind::SpdcLengthSweep)
    }

    /// Setting keys meaningful for this command.
    fn keys(self) -> &'static [&'static str] {
        const COMMON: [&str; 8] = ["trunc", "epsilon", "gauge", "route", "out", "format", "jobs", "modes"];
        match self {
            CommandKind::AtomPhotonCoord => &[
                "trunc", "epsilon", "gauge", "route", "out", "format", "jobs", "modes", "n", "window",
                "check-convergence", "xi0", "eta", "tau", "strictness",
            ],
            CommandKind::AtomPhotonMomentum => &[
                "trunc", "epsilon", "gauge", "route", "out", "format", "jobs", "modes", "n", "window",
                "check-convergence", "xi0", "eta", "strictness",
            ],
            CommandKind::AtomPhotonDynamics => &[
                "trunc", "epsilon", "gauge", "route", "out", "format", "jobs", "n", "check-convergence", "xi0",
                "eta", "taus", "convention",
            ],
            CommandKind::Spdc => &[
                "trunc", "epsilon", "gauge", "route", "out", "format", "jobs", "modes", "n", "window",
                "check-convergence", "length", "sigma", "d-o", "d-e", "half-width",
            ],
            CommandKind::SpdcLengthSweep => &[
                "trunc", "epsilon", "gauge", "route", "out", "format", "jobs", "n", "lengths", "sigma", "d-o",
                "d-e", "half-width",
            ],
            CommandKind::Decompose => &COMMON,
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeArg {
    LargestReal,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    Direct,
    Gram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionArg {
    AsPrinted,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    JsonSummary,
    CsvSpectrum,
    CsvModes,
    CsvSweep,
}

impl Format {
    fn parse(s: &str) -> Option<Format> {
        match s {
            "json-summary" => Some(Format::JsonSummary),
            "csv-spectrum" => Some(Format::CsvSpectrum),
            "csv-modes" => Some(Format::CsvModes),
            "csv-sweep" => Some(Format::CsvSweep),
            _ => None,
        }
    }
}

/// Every tunable of every command. Flag names and config-file keys coincide.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Nodes per axis
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Sampling window p_min,p_max,q_min,q_max
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<String>,
    /// Drop weights below this fraction of the largest one
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc: Option<f64>,
    /// Regularization added before inverting weights on the gram route
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Mode phase convention
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeArg>,
    /// Decomposition route
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteArg>,
    /// Output directory
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of json-summary,csv-spectrum,csv-modes,csv-sweep
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// Sweep points evaluated concurrently
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Number of mode pairs written to the mode files
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    /// Re-run on an enlarged window and report (atom-photon: enforce) the drift
    #[arg(long, global = true, value_name = "BOOL")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check_convergence: Option<bool>,
    /// Atomic constant xi0
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi0: Option<f64>,
    /// Momentum-spread parameter eta
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Dimensionless time tau
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Times for the dynamics sweep: a,b,c or start:stop:count
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub taus: Option<String>,
    /// Strictness factor of the parameter validity window
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strictness: Option<f64>,
    /// How emission weights enter K and S in the dynamics sweep
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<ConventionArg>,
    /// Crystal length, mm
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    /// Pump bandwidth, 1/ps
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Ordinary-ray group-delay mismatch, ps/mm
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_o: Option<f64>,
    /// Extraordinary-ray group-delay mismatch, ps/mm
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_e: Option<f64>,
    /// Crystal lengths for the sweep: a,b,c or start:stop:count
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<String>,
    /// Half-width of the square SPDC window
    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

macro_rules! overlay {
    ($low:expr, $high:expr, $($f:ident),*) => {
        Settings { $($f: $high.$f.clone().or_else(|| $low.$f.clone())),* }
    };
}

impl Settings {
    /// Field-wise `high` over `self`.
    pub fn overlay(&self, high: &Settings) -> Settings {
        overlay!(
            self, high, n, window, trunc, epsilon, gauge, route, out, format, jobs, modes, check_convergence, xi0,
            eta, tau, taus, strictness, convention, length, sigma, d_o, d_e, lengths, half_width
        )
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config file {}: {e}", path.display())))
    }

    fn to_map(&self) -> Map<String, Value> {
        match serde_json::to_value(self) {
            Ok(Value::Object(m)) => m,
            _ => Map::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl Preset {
    pub fn label(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
        }
    }

    pub fn command(self) -> CommandKind {
        match self {
            Preset::Fig1 => CommandKind::AtomPhotonCoord,
            Preset::Fig2 => CommandKind::AtomPhotonDynamics,
            Preset::Fig3 => CommandKind::AtomPhotonMomentum,
            Preset::Fig4 => CommandKind::SpdcLengthSweep,
            Preset::Fig5 | Preset::Fig6 => CommandKind::Spdc,
        }
    }

    /// The parameter set of the figure.
    pub fn settings(self) -> Settings {
        let atom = Settings { xi0: Some(100.0), eta: Some(0.03), ..Settings::default() };
        let crystal = Settings {
            sigma: Some(10.0),
            d_o: Some(schmidt_core::spdc::DEFAULT_D_O),
            d_e: Some(schmidt_core::spdc::DEFAULT_D_E),
            ..Settings::default()
        };
        match self {
            Preset::Fig1 => Settings { tau: Some(10.0), modes: Some(3), ..atom },
            Preset::Fig2 => Settings { taus: Some("0.1:10:34".into()), ..atom },
            Preset::Fig3 => Settings { modes: Some(2), ..atom },
            Preset::Fig4 => Settings { lengths: Some("0.25:4:16".into()), ..crystal },
            Preset::Fig5 => Settings { length: Some(0.5), modes: Some(4), ..crystal },
            Preset::Fig6 => Settings { length: Some(4.0), modes: Some(4), ..crystal },
        }
    }
}

/// Built-in defaults; `default_n` replaces the per-command resolution.
pub fn defaults(command: CommandKind, default_n: Option<usize>) -> Settings {
    let base = Settings {
        trunc: Some(1e-14),
        epsilon: Some(1e-12),
        gauge: Some(GaugeArg::LargestReal),
        route: Some(RouteArg::Direct),
        out: Some(PathBuf::from("schmidt-lab-out")),
        modes: Some(4),
        format: Some(if command.is_sweep() {
            "json-summary,csv-sweep".into()
        } else {
            "json-summary,csv-spectrum,csv-modes".into()
        }),
        ..Settings::default()
    };
    let n = |builtin: usize| Some(default_n.unwrap_or(builtin));
    let atom = Settings {
        xi0: Some(100.0),
        eta: Some(0.03),
        strictness: Some(3.0),
        check_convergence: Some(true),
        ..Settings::default()
    };
    let crystal = Settings {
        sigma: Some(10.0),
        d_o: Some(schmidt_core::spdc::DEFAULT_D_O),
        d_e: Some(schmidt_core::spdc::DEFAULT_D_E),
        half_width: Some(schmidt_core::spdc::DEFAULT_HALF_WIDTH),
        n: n(schmidt_core::spdc::DEFAULT_N),
        ..Settings::default()
    };
    let specific = match command {
        CommandKind::AtomPhotonCoord => Settings { tau: Some(10.0), n: n(400), ..atom },
        CommandKind::AtomPhotonMomentum => Settings { n: n(800), ..atom },
        CommandKind::AtomPhotonDynamics => Settings {
            taus: Some("0.1:10:34".into()),
            n: n(400),
            convention: Some(ConventionArg::AsPrinted),
            ..atom
        },
        CommandKind::Spdc => Settings { length: Some(0.5), check_convergence: Some(false), ..crystal },
        CommandKind::SpdcLengthSweep => Settings { lengths: Some("0.25:4:16".into()), ..crystal },
        CommandKind::Decompose => Settings::default(),
    };
    base.overlay(&specific)
}

/// Reads the default-resolution override from the environment.
pub fn default_n_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(DEFAULT_N_ENV) {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 2)
            .map(Some)
            .ok_or_else(|| CliError::Config(format!("{DEFAULT_N_ENV} must be an integer >= 2, got {v:?}"))),
        _ => Ok(None),
    }
}

/// Fully merged configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub preset: Option<Preset>,
    pub input: Option<PathBuf>,
    pub settings: Settings,
    /// Settings that were given but do not apply to the command.
    pub ignored: Vec<String>,
}

impl RunConfig {
    pub fn resolve(
        command: CommandKind,
        preset: Option<Preset>,
        input: Option<PathBuf>,
        file: Option<&Settings>,
        flags: &Settings,
        default_n: Option<usize>,
    ) -> Result<RunConfig, CliError> {
        let mut merged = defaults(command, default_n);
        if let Some(p) = preset {
            merged = merged.overlay(&p.settings());
        }
        let mut given = Settings::default();
        if let Some(f) = file {
            given = given.overlay(f);
        }
        given = given.overlay(flags);
        merged = merged.overlay(&given);

        let keys = command.keys();
        let ignored: Vec<String> = given.to_map().keys().filter(|k| !keys.contains(&k.as_str())).cloned().collect();
        let mut map = merged.to_map();
        map.retain(|k, _| keys.contains(&k.as_str()));
        let settings: Settings = serde_json::from_value(Value::Object(map))
            .map_err(|e| CliError::Config(format!("internal settings error: {e}")))?;
        let cfg = RunConfig { command, preset, input, settings, ignored };
        cfg.formats()?;
        Ok(cfg)
    }

    /// Resolved configuration as printed by `--dry-run`.
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("command".into(), Value::String(self.command.name().into()));
        m.insert("preset".into(), self.preset.map_or(Value::Null, |p| Value::String(p.label().into())));
        if let Some(input) = &self.input {
            m.insert("input".into(), Value::String(input.display().to_string()));
        }
        m.insert("settings".into(), Value::Object(self.settings.to_map()));
        Value::Object(m)
    }

    pub fn formats(&self) -> Result<BTreeSet<Format>, CliError> {
        let spec = self.settings.format.as_deref().unwrap_or("");
        let mut out = BTreeSet::new();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let f = Format::parse(part).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown format {part:?}; expected json-summary, csv-spectrum, csv-modes or csv-sweep"
                ))
            })?;
            out.insert(f);
        }
        Ok(out)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.settings.out.clone().unwrap_or_else(|| PathBuf::from("schmidt-lab-out"))
    }

    pub fn jobs(&self) -> Result<usize, CliError> {
        match self.settings.jobs {
            Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
            Some(j) => Ok(j),
            None => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
        }
    }

    pub fn require<T: Clone>(&self, value: &Option<T>, key: &str) -> Result<T, CliError> {
        value.clone().ok_or_else(|| CliError::Config(format!("missing setting {key}")))
    }
}

/// `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_list(key: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Config(format!("invalid {key} {spec:?}: {msg}"));
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad("a range is start:stop:count".into()));
        }
        let start: f64 = parts[0].parse().map_err(|_| bad(format!("bad start {:?}", parts[0])))?;
        let stop: f64 = parts[1].parse().map_err(|_| bad(format!("bad stop {:?}", parts[1])))?;
        let count: usize = parts[2].parse().map_err(|_| bad(format!("bad count {:?}", parts[2])))?;
        match count {
            0 => return Err(bad("count must be positive".into())),
            1 => vec![start],
            _ => {
                let step = (stop - start) / (count - 1) as f64;
                (0..count).map(|i| if i + 1 == count { stop } else { start + step * i as f64 }).collect()
            }
        }
    } else {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| bad(format!("bad number {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(bad(format!("non-finite value {v}")));
    }
    Ok(values)
}

/// `p_min,p_max,q_min,q_max`.
pub fn parse_window(spec: &str) -> Result<[f64; 4], CliError> {
    let parts: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Config(format!("invalid window {spec:?}: expected p_min,p_max,q_min,q_max")))?;
    match parts.as_slice() {
        &[a, b, c, d] => Ok([a, b, c, d]),
        _ => Err(CliError::Config(format!("invalid window {spec:?}: expected four numbers"))),
    }
}
