//! One function per subcommand. Each returns the summary, the data files and
//! any warnings; writing to disk is left to the caller.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use schmidt_core::atom_photon::{
    asymptotics, decompose_coord, decompose_momentum, full_dynamics, laguerre_basis, laguerre_mode, spectrum_drift,
    validity_check, AtomPhotonParams, GridPolicy, ModelDecomposition, ValidityReport, WeightConvention, Window,
    COORD_MIN_TAU, DRIFT_TOLERANCE,
};
use schmidt_core::polarization::{coherence_report, BASIS};
use schmidt_core::schmidt::{mode_overlap, schmidt_decompose, DecompositionOptions, Gauge, Route, SchmidtResult};
use schmidt_core::spdc::{decompose_spdc, decompose_spdc_on, phase_step, spdc_grid, SpdcParams};
use schmidt_core::tensor::{inner, normalize, AmplitudeMatrix, Grid};
use serde_json::{Map, Value};

use crate::config::{parse_list, parse_window, CommandKind, ConventionArg, Format, GaugeArg, RouteArg, RunConfig};
use crate::error::CliError;
use crate::matrix_file::parse_matrix;
use crate::output::{complex, densities_csv, fmt, modes_csv, num, nums, obj, spectrum_csv, spectrum_json, Csv, SCHEMA_VERSION};

/// Number of Laguerre functions compared against the coordinate modes.
const LAGUERRE_TABLE: usize = 5;

pub struct Report {
    pub summary: Value,
    /// `(file name, contents, format)` in a fixed order.
    pub files: Vec<(String, String, Format)>,
    pub warnings: Vec<String>,
    /// One-line result for the terminal.
    pub headline: String,
}

impl Report {
    /// Files selected by the configured formats, `summary.json` included.
    pub fn selected(&self, formats: &BTreeSet<Format>) -> Vec<(String, String)> {
        let mut out = Vec::new();
        if formats.contains(&Format::JsonSummary) {
            let mut text = serde_json::to_string_pretty(&self.summary).unwrap_or_default();
            text.push('\n');
            out.push(("summary.json".to_string(), text));
        }
        for (name, body, f) in &self.files {
            if formats.contains(f) {
                out.push((name.clone(), body.clone()));
            }
        }
        out
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    match cfg.command {
        CommandKind::AtomPhotonCoord => run_coord(cfg),
        CommandKind::AtomPhotonMomentum => run_momentum(cfg),
        CommandKind::AtomPhotonDynamics => run_dynamics(cfg),
        CommandKind::Spdc => run_spdc(cfg),
        CommandKind::SpdcLengthSweep => run_spdc_sweep(cfg),
        CommandKind::Decompose => run_decompose(cfg),
    }
}

fn options(cfg: &RunConfig) -> Result<DecompositionOptions, CliError> {
    let s = &cfg.settings;
    let opts = DecompositionOptions {
        truncation_relative_threshold: cfg.require(&s.trunc, "trunc")?,
        regularization_epsilon: cfg.require(&s.epsilon, "epsilon")?,
        gauge: match cfg.require(&s.gauge, "gauge")? {
            GaugeArg::LargestReal => Gauge::LargestReal,
            GaugeArg::None => Gauge::None,
        },
        route: match cfg.require(&s.route, "route")? {
            RouteArg::Direct => Route::Direct,
            RouteArg::Gram => Route::Gram,
        },
    };
    opts.validate()?;
    Ok(opts)
}

fn options_json(opts: &DecompositionOptions) -> Value {
    obj([
        ("truncation_relative_threshold", num(opts.truncation_relative_threshold)),
        ("regularization_epsilon", num(opts.regularization_epsilon)),
        ("gauge", Value::from(if opts.gauge == Gauge::LargestReal { "largest-real" } else { "none" })),
        ("route", Value::from(if opts.route == Route::Direct { "direct" } else { "gram" })),
    ])
}

fn grid_json(g: &Grid) -> Value {
    let (p0, p1) = g.p_range();
    let (q0, q1) = g.q_range();
    obj([("n", Value::from(g.n())), ("p_min", num(p0)), ("p_max", num(p1)), ("q_min", num(q0)), ("q_max", num(q1))])
}

fn summary(cfg: &RunConfig, opts: &DecompositionOptions, parameters: Value, extra: Vec<(&str, Value)>, warnings: &[String]) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), Value::from(SCHEMA_VERSION));
    m.insert("command".into(), Value::from(cfg.command.name()));
    m.insert("preset".into(), cfg.preset.map_or(Value::Null, |p| Value::from(p.label())));
    m.insert("parameters".into(), parameters);
    m.insert("options".into(), options_json(opts));
    for (k, v) in extra {
        m.insert(k.into(), v);
    }
    m.insert("warnings".into(), Value::Array(warnings.iter().map(|w| Value::from(w.as_str())).collect()));
    Value::Object(m)
}

fn validity_json(v: &ValidityReport) -> Value {
    obj([
        ("eta_upper", num(v.eta_upper)),
        ("eta_lower", num(v.eta_lower)),
        ("packet_ratio", num(v.packet_ratio)),
        ("strictness", num(v.strictness)),
        ("satisfied", Value::from(v.satisfied)),
        ("marginal", Value::from(v.marginal)),
        ("messages", Value::Array(v.messages.iter().map(|m| Value::from(m.as_str())).collect())),
    ])
}

fn convergence_json(checked: bool, drift: Option<f64>) -> Value {
    obj([
        ("checked", Value::from(checked)),
        ("drift", drift.map_or(Value::Null, num)),
        ("tolerance", num(DRIFT_TOLERANCE)),
    ])
}

fn window(cfg: &RunConfig) -> Result<Option<Window>, CliError> {
    cfg.settings
        .window
        .as_deref()
        .map(|w| parse_window(w).map(|[p_min, p_max, q_min, q_max]| Window { p_min, p_max, q_min, q_max }))
        .transpose()
}

fn policy(cfg: &RunConfig) -> Result<GridPolicy, CliError> {
    Ok(GridPolicy {
        n: cfg.require(&cfg.settings.n, "n")?,
        window: window(cfg)?,
        check_convergence: cfg.settings.check_convergence.unwrap_or(true),
    })
}

fn pool(cfg: &RunConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs()?)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} worker threads: {e}", cfg.jobs().unwrap_or(1))))
}

fn mode_files(
    result: &SchmidtResult,
    grid: &Grid,
    r: usize,
    names: (&str, &str),
    coords: (&str, &str),
) -> Vec<(String, String, Format)> {
    vec![
        (names.0.to_string(), modes_csv(coords.0, &grid.p_nodes(), &result.modes_p, r), Format::CsvModes),
        (names.1.to_string(), modes_csv(coords.1, &grid.q_nodes(), &result.modes_q, r), Format::CsvModes),
    ]
}

fn atom_params(cfg: &RunConfig, tau: f64) -> Result<AtomPhotonParams, CliError> {
    let s = &cfg.settings;
    Ok(AtomPhotonParams::new(cfg.require(&s.xi0, "xi0")?, cfg.require(&s.eta, "eta")?, tau)?)
}

fn run_coord(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = options(cfg)?;
    let tau = cfg.require(&cfg.settings.tau, "tau")?;
    let params = atom_params(cfg, tau)?;
    let mut warnings = params.warnings();
    let validity = validity_check(&params, cfg.settings.strictness.unwrap_or(3.0));
    if !validity.satisfied || validity.marginal {
        warnings.extend(validity.messages.iter().cloned());
    }
    let policy = policy(cfg)?;
    let d = decompose_coord(&params, &policy, &opts)?;

    let nodes = d.grid.p_nodes();
    let kmax = LAGUERRE_TABLE.min(d.result.rank);
    let basis = laguerre_basis(LAGUERRE_TABLE, tau, &nodes)?;
    let mut table = Vec::new();
    for k in 0..kmax {
        let mode = &d.result.modes_p[k];
        let overlap = mode_overlap(&laguerre_mode(k as i64, tau, &nodes)?, mode)?.norm();
        let captured: f64 = basis.iter().map(|b| inner(b, mode).norm_sqr()).sum();
        table.push(obj([
            ("k", Value::from(k)),
            ("mode", Value::from(k + 1)),
            ("overlap", num(overlap)),
            ("basis_capture", num(captured)),
        ]));
    }

    let parameters = obj([("xi0", num(params.xi0())), ("eta", num(params.eta())), ("tau", num(tau))]);
    let summary = summary(
        cfg,
        &opts,
        parameters,
        vec![
            ("grid", grid_json(&d.grid)),
            ("spectrum", spectrum_json(&d.result)),
            ("convergence", convergence_json(policy.check_convergence, d.drift)),
            ("validity", validity_json(&validity)),
            ("laguerre_overlaps", Value::Array(table)),
        ],
        &warnings,
    );
    let r = cfg.settings.modes.unwrap_or(4);
    let mut files = vec![("spectrum.csv".to_string(), spectrum_csv(&d.result), Format::CsvSpectrum)];
    files.extend(mode_files(&d.result, &d.grid, r, ("modes_p.csv", "modes_q.csv"), ("p", "q")));
    let headline = format!(
        "K = {:.6}, S = {:.6} bits, lambda_1 = {:.6}",
        d.result.schmidt_number, d.result.entropy, d.result.lambdas[0]
    );
    Ok(Report { summary, files, warnings, headline })
}

fn run_momentum(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = options(cfg)?;
    // the momentum amplitude has no time dependence
    let params = atom_params(cfg, 1.0)?;
    let mut warnings = Vec::new();
    let validity = validity_check(&params, cfg.settings.strictness.unwrap_or(3.0));
    if !validity.satisfied || validity.marginal {
        warnings.extend(validity.messages.iter().cloned());
    }
    let policy = policy(cfg)?;
    let d: ModelDecomposition = decompose_momentum(&params, &policy, &opts)?;

    let asym = match asymptotics(params.eta()) {
        Ok(a) => {
            let dk = (d.result.schmidt_number - 1.0 - (a.k_inf - 1.0)) / (a.k_inf - 1.0);
            let ds = (d.result.entropy - a.s_inf) / a.s_inf;
            obj([
                ("k_inf", num(a.k_inf)),
                ("s_inf", num(a.s_inf)),
                ("k_excess_relative_deviation", num(dk)),
                ("s_relative_deviation", num(ds)),
            ])
        }
        Err(e) => {
            warnings.push(format!("asymptotic comparison skipped: {e}"));
            Value::Null
        }
    };
    let parameters = obj([("xi0", num(params.xi0())), ("eta", num(params.eta()))]);
    let summary = summary(
        cfg,
        &opts,
        parameters,
        vec![
            ("grid", grid_json(&d.grid)),
            ("spectrum", spectrum_json(&d.result)),
            ("convergence", convergence_json(policy.check_convergence, d.drift)),
            ("validity", validity_json(&validity)),
            ("asymptotics", asym),
        ],
        &warnings,
    );
    let r = cfg.settings.modes.unwrap_or(4);
    let mut files = vec![("spectrum.csv".to_string(), spectrum_csv(&d.result), Format::CsvSpectrum)];
    files.extend(mode_files(&d.result, &d.grid, r, ("modes_nu.csv", "modes_pi.csv"), ("nu", "pi")));
    files.push((
        "densities_nu.csv".into(),
        densities_csv("nu", &d.grid.p_nodes(), &d.result.modes_p, r),
        Format::CsvModes,
    ));
    files.push((
        "densities_pi.csv".into(),
        densities_csv("pi", &d.grid.q_nodes(), &d.result.modes_q, r),
        Format::CsvModes,
    ));
    let headline = format!("K - 1 = {:.6e}, S = {:.6e} bits", d.result.schmidt_number - 1.0, d.result.entropy);
    Ok(Report { summary, files, warnings, headline })
}

fn run_dynamics(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = options(cfg)?;
    let taus = parse_list("taus", &cfg.require(&cfg.settings.taus, "taus")?)?;
    let base = atom_params(cfg, 1.0)?;
    let convention = match cfg.settings.convention.unwrap_or(ConventionArg::AsPrinted) {
        ConventionArg::AsPrinted => WeightConvention::AsPrinted,
        ConventionArg::Direct => WeightConvention::Direct,
    };
    let policy = GridPolicy { window: None, ..policy(cfg)? };
    let points = pool(cfg)?.install(|| {
        taus.par_iter()
            .map(|&tau| full_dynamics(&base.with_tau(tau)?, &policy, &opts, convention))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut warnings = Vec::new();
    let early: Vec<String> = taus.iter().filter(|&&t| t < COORD_MIN_TAU).map(|t| t.to_string()).collect();
    if !early.is_empty() {
        warnings.push(format!(
            "coordinate amplitude assumes tau >> 1; {} point(s) below tau = {COORD_MIN_TAU}",
            early.len()
        ));
    }
    let mut csv = Csv::new(&["tau", "K0", "S0", "K", "S", "K_minus_K0", "S_minus_S0"]);
    let (mut max_dk, mut max_ds, mut min_k, mut max_drift) = (0.0f64, 0.0f64, f64::INFINITY, None::<f64>);
    for p in &points {
        csv.row(&[fmt(p.tau), fmt(p.k0), fmt(p.s0), fmt(p.k), fmt(p.s), fmt(p.k - p.k0), fmt(p.s - p.s0)]);
        max_dk = max_dk.max((p.k - p.k0).abs());
        max_ds = max_ds.max((p.s - p.s0).abs());
        min_k = min_k.min(p.k);
        if let Some(d) = p.drift {
            max_drift = Some(max_drift.map_or(d, |m: f64| m.max(d)));
        }
    }
    let parameters = obj([
        ("xi0", num(base.xi0())),
        ("eta", num(base.eta())),
        ("taus", nums(&taus)),
        ("convention", Value::from(if convention == WeightConvention::AsPrinted { "as-printed" } else { "direct" })),
    ]);
    let last = points.last().expect("at least one tau");
    let summary = summary(
        cfg,
        &opts,
        parameters,
        vec![
            ("n", Value::from(policy.n)),
            (
                "corrections",
                obj([
                    ("max_abs_k_minus_k0", num(max_dk)),
                    ("max_abs_s_minus_s0", num(max_ds)),
                    ("min_k", num(min_k)),
                    ("final_tau", num(last.tau)),
                    ("final_k", num(last.k)),
                    ("final_s", num(last.s)),
                ]),
            ),
            ("convergence", convergence_json(policy.check_convergence, max_drift)),
        ],
        &warnings,
    );
    let files = vec![("dynamics.csv".to_string(), csv.finish(), Format::CsvSweep)];
    let headline = format!("{} points, max |K - K0| = {:.3e}, max |S - S0| = {:.3e}", points.len(), max_dk, max_ds);
    Ok(Report { summary, files, warnings, headline })
}

fn spdc_params(cfg: &RunConfig, length: f64) -> Result<SpdcParams, CliError> {
    let s = &cfg.settings;
    Ok(SpdcParams::new(length, cfg.require(&s.sigma, "sigma")?, cfg.require(&s.d_o, "d-o")?, cfg.require(&s.d_e, "d-e")?)?)
}

fn spdc_parameters_json(p: &SpdcParams) -> Value {
    obj([
        ("length_mm", num(p.length())),
        ("sigma_per_ps", num(p.sigma())),
        ("d_o_ps_per_mm", num(p.d_o())),
        ("d_e_ps_per_mm", num(p.d_e())),
        ("x_o", num(p.x_o())),
        ("x_e", num(p.x_e())),
    ])
}

fn run_spdc(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = options(cfg)?;
    let params = spdc_params(cfg, cfg.require(&cfg.settings.length, "length")?)?;
    let n = cfg.require(&cfg.settings.n, "n")?;
    let grid = match window(cfg)? {
        Some(w) => Grid::new(w.p_min, w.p_max, w.q_min, w.q_max, n)?,
        None => Grid::square(-cfg.require(&cfg.settings.half_width, "half-width")?, cfg.settings.half_width.unwrap_or(0.0), n)?,
    };
    let d = decompose_spdc_on(&params, &grid, &opts)?;
    let report = coherence_report(&d.amplitude, &d.result)?;
    let mut warnings = report.warnings.clone();

    // doubling check at unchanged spacing; reported, not enforced
    let check = cfg.settings.check_convergence.unwrap_or(false);
    let drift = if check {
        let (p0, p1) = grid.p_range();
        let (q0, q1) = grid.q_range();
        let (pc, qc) = (0.5 * (p0 + p1), 0.5 * (q0 + q1));
        let wide = Grid::new(pc - (p1 - p0), pc + (p1 - p0), qc - (q1 - q0), qc + (q1 - q0), 2 * n - 1)?;
        let dw = decompose_spdc_on(&params, &wide, &opts)?;
        let drift = spectrum_drift(&d.result, &dw.result);
        if drift > DRIFT_TOLERANCE {
            warnings.push(format!("weights drift by {drift:e} when the window is doubled"));
        }
        Some(drift)
    } else {
        None
    };

    let rho: Vec<Value> = (0..4)
        .map(|i| Value::Array((0..4).map(|j| complex(report.rho.entry(i, j))).collect()))
        .collect();
    let diag = &report.diagnostics;
    let coherence = obj([
        ("f", complex(report.f)),
        ("weight_plus", num(report.weight_plus)),
        ("weight_minus", num(report.weight_minus)),
        ("basis", Value::Array(BASIS.iter().map(|b| Value::from(*b)).collect())),
        ("rho", Value::Array(rho)),
        ("rho_eigenvalues", nums(&diag.eigenvalues)),
        ("purity", num(diag.purity)),
        ("trace_deviation", num(diag.trace_deviation)),
        ("hermiticity_deviation", num(diag.hermiticity_deviation)),
    ]);
    let summary = summary(
        cfg,
        &opts,
        spdc_parameters_json(&params),
        vec![
            ("grid", grid_json(&d.grid)),
            ("phase_step", num(phase_step(&params, &d.grid))),
            ("spectrum", spectrum_json(&d.result)),
            ("coherence", coherence),
            ("convergence", convergence_json(check, drift)),
        ],
        &warnings,
    );
    let r = cfg.settings.modes.unwrap_or(4);
    let mut files = vec![("spectrum.csv".to_string(), spectrum_csv(&d.result), Format::CsvSpectrum)];
    files.extend(mode_files(&d.result, &d.grid, r, ("modes_ordinary.csv", "modes_extraordinary.csv"), ("p", "q")));
    let headline = format!(
        "F = {:.6}, K = {:.6}, S = {:.6} bits",
        report.f.re, d.result.schmidt_number, d.result.entropy
    );
    Ok(Report { summary, files, warnings, headline })
}

fn run_spdc_sweep(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = options(cfg)?;
    let lengths = parse_list("lengths", &cfg.require(&cfg.settings.lengths, "lengths")?)?;
    let n = cfg.require(&cfg.settings.n, "n")?;
    let half_width = cfg.require(&cfg.settings.half_width, "half-width")?;
    let params: Vec<SpdcParams> = lengths.iter().map(|&l| spdc_params(cfg, l)).collect::<Result<_, _>>()?;
    // fail fast on resolution before spending time on any point
    for p in &params {
        spdc_grid(p, half_width, n)?;
    }
    let rows = pool(cfg)?.install(|| {
        params
            .par_iter()
            .map(|p| {
                let d = decompose_spdc(p, half_width, n, &opts)?;
                let r = coherence_report(&d.amplitude, &d.result)?;
                Ok::<_, schmidt_core::Error>((r.f, d.result.schmidt_number, d.result.entropy))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut csv = Csv::new(&["L", "X_o", "X_e", "F", "K", "S"]);
    let mut warnings = Vec::new();
    for (p, (f, k, s)) in params.iter().zip(&rows) {
        csv.row(&[fmt(p.length()), fmt(p.x_o()), fmt(p.x_e()), fmt(f.re), fmt(*k), fmt(*s)]);
        if f.im.abs() > schmidt_core::polarization::IMAGINARY_TOLERANCE {
            warnings.push(format!("L = {}: coherence has imaginary part {:e}", p.length(), f.im));
        }
    }
    let f_decreasing = rows.windows(2).all(|w| w[1].0.re < w[0].0.re);
    let parameters = obj([
        ("lengths_mm", nums(&lengths)),
        ("sigma_per_ps", num(params[0].sigma())),
        ("d_o_ps_per_mm", num(params[0].d_o())),
        ("d_e_ps_per_mm", num(params[0].d_e())),
        ("half_width", num(half_width)),
        ("n", Value::from(n)),
    ]);
    let summary = summary(
        cfg,
        &opts,
        parameters,
        vec![
            ("points", Value::from(rows.len())),
            ("f_strictly_decreasing", Value::from(f_decreasing)),
            (
                "note",
                Value::from("results depend on L and sigma only through L*sigma; rescale L for another sigma"),
            ),
        ],
        &warnings,
    );
    let files = vec![("sweep.csv".to_string(), csv.finish(), Format::CsvSweep)];
    let headline = format!("{} lengths, F from {:.4} to {:.4}", rows.len(), rows[0].0.re, rows[rows.len() - 1].0.re);
    Ok(Report { summary, files, warnings, headline })
}

fn run_decompose(cfg: &RunConfig) -> Result<Report, CliError> {
    let opts = options(cfg)?;
    let path = cfg.input.as_deref().ok_or_else(|| CliError::Config("decompose needs an input file".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let m = parse_matrix(&text)?;
    let n = m.rows();
    let grid = Grid::square(0.0, (n - 1) as f64, n)?;
    let input_norm = m.frobenius_norm();
    let a = AmplitudeMatrix::from_matrix(grid, m).map_err(|e| CliError::Parse(e.to_string()))?;
    let a = normalize(&a).map_err(|e| CliError::Parse(format!("{}: {e}", display(path))))?;
    let result = schmidt_decompose(&a, &opts)?;

    let parameters = obj([("input", Value::from(display(path))), ("n", Value::from(n)), ("input_norm", num(input_norm))]);
    let summary = summary(cfg, &opts, parameters, vec![("spectrum", spectrum_json(&result))], &[]);
    let r = cfg.settings.modes.unwrap_or(4);
    let mut files = vec![("spectrum.csv".to_string(), spectrum_csv(&result), Format::CsvSpectrum)];
    files.extend(mode_files(&result, &grid, r, ("modes_row.csv", "modes_col.csv"), ("index", "index")));
    let headline = format!("rank {}, K = {:.6}, S = {:.6} bits", result.rank, result.schmidt_number, result.entropy);
    Ok(Report { summary, files, warnings: Vec::new(), headline })
}

fn display(path: &Path) -> String {
    path.display().to_string()
}
