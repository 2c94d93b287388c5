//! Command-line interface for twisted-light ion photo-absorption scans.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical/domain error,
//! 3 fit non-convergence.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use twistion::{builtin_scenarios, BeamFamily, HalfInt, Scenario};
use twistion_cli::config::Config;
use twistion_cli::fit::{run_fit, FitOutcome};
use twistion_cli::request::{
    custom_scenario, defaults, parse_channel, parse_fit_data, parse_multipoles, parse_polarization,
    scenario_with_levels, FitParam, FitRequest, Normalization, PolRequest, ScanRequest,
};
use twistion_cli::scan::{run_alignscan, run_polmap, run_profile};
use twistion_cli::selftest;
use twistion_cli::table::{emit_csv, emit_grid, format_value};

#[derive(Parser)]
#[command(
    name = "twistion",
    version,
    about = "Photo-absorption strength profiles of trapped ions in twisted light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Strength versus impact parameter.
    Profile(ScanArgs),
    /// Strength over (polarization angle, signed impact parameter).
    Polmap(PolmapArgs),
    /// Strength versus alignment angle theta_z at fixed impact parameter.
    Alignscan(AlignArgs),
    /// Recover beam parameters from a measured profile.
    Fit(FitArgs),
    /// List the built-in scenarios.
    Scenarios,
    /// Run the built-in oracle suites.
    Selftest,
}

#[derive(Args, Clone)]
struct ScanArgs {
    /// Scenario id (see `twistion scenarios`).
    #[arg(long)]
    scenario: Option<String>,
    /// Initial sublevel m_i, e.g. 1/2, -1/2, or `all`.
    #[arg(long, allow_hyphen_values = true)]
    mi: Option<String>,
    /// Final sublevel m_f, or `all`.
    #[arg(long, allow_hyphen_values = true)]
    mf: Option<String>,
    /// Orbital angular momentum of the beam.
    #[arg(long, allow_negative_numbers = true)]
    oam: Option<i32>,
    /// Pitch angle theta_k in radians.
    #[arg(long)]
    pitch: Option<f64>,
    /// Gaussian waist in wavelengths (Bessel-Gauss only).
    #[arg(long)]
    waist: Option<f64>,
    /// Beam family: `bg` (Bessel-Gauss) or `bessel`.
    #[arg(long)]
    family: Option<String>,
    /// Alignment angle theta_z in radians.
    #[arg(long = "theta-z", allow_negative_numbers = true)]
    theta_z: Option<f64>,
    /// Alignment azimuth phi_z in radians.
    #[arg(long = "phi-z", allow_negative_numbers = true)]
    phi_z: Option<f64>,
    /// Vortex-line azimuth phi_b in radians.
    #[arg(long = "phi-b", allow_negative_numbers = true)]
    phi_b: Option<f64>,
    /// Polarization: L, R, H, V, alpha:delta, sweep; comma lists allowed.
    #[arg(long)]
    pol: Option<String>,
    #[arg(long = "b-min")]
    b_min: Option<f64>,
    #[arg(long = "b-max")]
    b_max: Option<f64>,
    #[arg(long = "b-steps")]
    b_steps: Option<usize>,
    /// Output scaling: raw or peak.
    #[arg(long)]
    normalize: Option<String>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Key-value config file supplying defaults for any flag.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hyperfine F_i override (yb171_e3 only).
    #[arg(long, allow_hyphen_values = true)]
    fi: Option<String>,
    /// Hyperfine F_f override (yb171_e3 only).
    #[arg(long, allow_hyphen_values = true)]
    ff: Option<String>,
}

#[derive(Args, Clone)]
struct PolmapArgs {
    #[command(flatten)]
    scan: ScanArgs,
    /// Number of alpha rows of the sweep.
    #[arg(long = "alpha-steps")]
    alpha_steps: Option<usize>,
    /// Fixed retardation delta of the sweep, radians.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Also print an ASCII heat map to stdout.
    #[arg(long)]
    ascii: bool,
}

#[derive(Args, Clone)]
struct AlignArgs {
    #[command(flatten)]
    scan: ScanArgs,
    /// Fixed (signed) impact parameter of the scan.
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    /// Number of theta_z samples in [0, pi].
    #[arg(long = "z-steps")]
    z_steps: Option<usize>,
}

#[derive(Args, Clone)]
struct FitArgs {
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mf: Option<String>,
    /// CSV data: rows of (b, strength) or (alpha, b, strength).
    #[arg(long)]
    data: PathBuf,
    /// Free parameters, e.g. `pitch,phi-b,waist,scale`.
    #[arg(long)]
    free: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    oam: Option<i32>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long = "theta-z", allow_negative_numbers = true)]
    theta_z: Option<f64>,
    #[arg(long = "phi-z", allow_negative_numbers = true)]
    phi_z: Option<f64>,
    /// Polarization of 2-column data.
    #[arg(long)]
    pol: Option<String>,
    /// Retardation paired with the alpha column of 3-column data.
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    #[arg(long = "init-pitch")]
    init_pitch: Option<f64>,
    #[arg(long = "init-phi-b", allow_negative_numbers = true)]
    init_phi_b: Option<f64>,
    #[arg(long = "init-waist")]
    init_waist: Option<f64>,
    #[arg(long = "init-scale")]
    init_scale: Option<f64>,
    /// Relative step tolerance for convergence.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    /// Output CSV path for the fitted parameters; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

enum AppError {
    Usage(String),
    Domain(String),
    NonConvergence(String),
}

impl From<twistion::Error> for AppError {
    fn from(e: twistion::Error) -> Self {
        AppError::Domain(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(1)
        }
        Err(AppError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(AppError::NonConvergence(msg)) => {
            eprintln!("fit did not converge: {msg}");
            ExitCode::from(3)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<Config, AppError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| AppError::Usage(format!("reading {}: {e}", p.display())))?;
            Config::parse(&text).map_err(|e| AppError::Usage(e.to_string()))
        }
    }
}

fn parse_family(s: &str) -> Result<BeamFamily, AppError> {
    match s.to_ascii_lowercase().as_str() {
        "bg" | "bessel-gauss" | "besselgauss" => Ok(BeamFamily::BesselGauss),
        "bessel" | "bb" => Ok(BeamFamily::Bessel),
        other => Err(AppError::Usage(format!(
            "beam family `{other}` (use bg or bessel)"
        ))),
    }
}

fn usage<T>(r: twistion::Result<T>) -> Result<T, AppError> {
    r.map_err(|e| AppError::Usage(e.to_string()))
}

/// A config file defining `ji` and `jf` describes a user-defined ion; the
/// `scenario` key then only names it.
fn custom_scenario_from_config(cfg: &Config, name: &str) -> Result<Option<Scenario>, AppError> {
    let (ji, jf) = match (cfg.get("ji"), cfg.get("jf")) {
        (None, None) => return Ok(None),
        (Some(a), Some(b)) => (a, b),
        _ => return Err(AppError::Usage("ji and jf must be given together".into())),
    };
    let j_i = usage(HalfInt::from_str(ji))?;
    let j_f = usage(HalfInt::from_str(jf))?;
    let multipoles = usage(parse_multipoles(cfg.get("multipoles").ok_or_else(
        || AppError::Usage("a user-defined ion needs a `multipoles` key, e.g. E2:1.0".into()),
    )?))?;
    let hyperfine = match cfg.get("nuclear-spin") {
        None => None,
        Some(spin) => {
            let spin = usage(HalfInt::from_str(spin))?;
            let (fi, ff) = match (cfg.get("fi"), cfg.get("ff")) {
                (Some(a), Some(b)) => (usage(HalfInt::from_str(a))?, usage(HalfInt::from_str(b))?),
                _ => {
                    return Err(AppError::Usage(
                        "nuclear-spin needs fi and ff keys for the hyperfine levels".into(),
                    ))
                }
            };
            Some((spin, fi, ff))
        }
    };
    Ok(Some(custom_scenario(
        name, j_i, j_f, multipoles, hyperfine,
    )?))
}

/// Builds the resolved scan request from flags + config + defaults.
fn build_scan_request(args: &ScanArgs, cfg: &Config) -> Result<ScanRequest, AppError> {
    let scenario_id = match (&args.scenario, cfg.get("scenario")) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => s.to_string(),
        (None, None) => {
            if cfg.get("ji").is_some() {
                "custom".to_string()
            } else {
                return Err(AppError::Usage("missing --scenario".into()));
            }
        }
    };
    if let Some(custom) = custom_scenario_from_config(cfg, &scenario_id)? {
        return finish_scan_request(args, cfg, custom);
    }
    let f_levels = {
        let fi = usage(
            cfg.resolve_opt::<HalfInt>(
                args.fi
                    .as_deref()
                    .map(HalfInt::from_str)
                    .transpose()
                    .map_err(|e| AppError::Usage(e.to_string()))?,
                "fi",
            ),
        )?;
        let ff = usage(
            cfg.resolve_opt::<HalfInt>(
                args.ff
                    .as_deref()
                    .map(HalfInt::from_str)
                    .transpose()
                    .map_err(|e| AppError::Usage(e.to_string()))?,
                "ff",
            ),
        )?;
        match (fi, ff) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => {
                return Err(AppError::Usage(
                    "--fi and --ff must be given together".into(),
                ))
            }
        }
    };
    let scenario = scenario_with_levels(&scenario_id, f_levels)?;
    finish_scan_request(args, cfg, scenario)
}

fn finish_scan_request(
    args: &ScanArgs,
    cfg: &Config,
    scenario: Scenario,
) -> Result<ScanRequest, AppError> {
    let mi = args
        .mi
        .clone()
        .or_else(|| cfg.get("mi").map(str::to_string))
        .unwrap_or_else(|| scenario.default_m_i.to_string());
    let mf = args
        .mf
        .clone()
        .or_else(|| cfg.get("mf").map(str::to_string))
        .unwrap_or_else(|| scenario.default_m_f.to_string());
    let channels = usage(parse_channel(&mi, &mf))?;
    let family = match (&args.family, cfg.get("family")) {
        (Some(f), _) => parse_family(f)?,
        (None, Some(f)) => parse_family(f)?,
        (None, None) => BeamFamily::BesselGauss,
    };
    let pol_spec = args
        .pol
        .clone()
        .or_else(|| cfg.get("pol").map(str::to_string))
        .unwrap_or_else(|| "H,V".to_string());
    let mut warnings = Vec::new();
    let pol = usage(parse_polarization(&pol_spec, &mut warnings))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let normalize = match (&args.normalize, cfg.get("normalize")) {
        (Some(n), _) => usage(Normalization::from_str(n))?,
        (None, Some(n)) => usage(Normalization::from_str(n))?,
        (None, None) => Normalization::Raw,
    };
    let req = ScanRequest {
        channels,
        scenario,
        beam_family: family,
        pitch: usage(cfg.resolve(args.pitch, "pitch", defaults::DEFAULT_PITCH))?,
        oam: usage(cfg.resolve(args.oam, "oam", 0))?,
        waist: usage(cfg.resolve(args.waist, "waist", defaults::DEFAULT_WAIST))?,
        theta_z: usage(cfg.resolve(args.theta_z, "theta-z", 0.0))?,
        phi_z: usage(cfg.resolve(args.phi_z, "phi-z", 0.0))?,
        phi_b: usage(cfg.resolve(args.phi_b, "phi-b", 0.0))?,
        pol,
        b_min: usage(cfg.resolve(args.b_min, "b-min", defaults::B_MIN))?,
        b_max: usage(cfg.resolve(args.b_max, "b-max", defaults::B_MAX))?,
        b_steps: usage(cfg.resolve(args.b_steps, "b-steps", defaults::B_STEPS))?,
        angle_steps: defaults::ANGLE_STEPS,
        sweep_delta: 0.0,
        fixed_b: 0.0,
        normalize,
    };
    Ok(req)
}

fn resolve_out(cli: &Option<PathBuf>, cfg: &Config) -> Option<PathBuf> {
    cli.clone().or_else(|| cfg.get("out").map(PathBuf::from))
}

fn write_or_print(text: &str, out: &Option<PathBuf>) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| AppError::Domain(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Profile(args) => {
            let cfg = load_config(&args.config)?;
            let req = build_scan_request(&args, &cfg)?;
            let (table, normalized_ok) = run_profile(&req)?;
            if !normalized_ok {
                eprintln!("warning: all strengths are zero; peak normalization skipped");
            }
            match resolve_out(&args.out, &cfg) {
                Some(path) => emit_csv(&table, &path)?,
                None => print!("{}", table.to_csv()),
            }
            Ok(())
        }
        Command::Polmap(args) => {
            let cfg = load_config(&args.scan.config)?;
            let mut req = build_scan_request(&args.scan, &cfg)?;
            if args.scan.pol.is_none() && cfg.get("pol").is_none() {
                req.pol = PolRequest::Sweep;
            }
            if req.normalize == Normalization::Raw
                && args.scan.normalize.is_none()
                && cfg.get("normalize").is_none()
            {
                req.normalize = Normalization::Peak;
            }
            req.angle_steps =
                usage(cfg.resolve(args.alpha_steps, "alpha-steps", defaults::ANGLE_STEPS))?;
            if req.angle_steps < 2 {
                return Err(AppError::Usage("--alpha-steps must be at least 2".into()));
            }
            req.sweep_delta = usage(cfg.resolve(args.delta, "delta", 0.0))?;
            let (grid, normalized_ok) = run_polmap(&req)?;
            if !normalized_ok {
                eprintln!("warning: all strengths are zero; peak normalization skipped");
            }
            match resolve_out(&args.scan.out, &cfg) {
                Some(path) => emit_grid(&grid, &path)?,
                None => print!("{}", grid.to_csv()),
            }
            let ascii = args.ascii || cfg.get("ascii").is_some_and(|v| v == "true");
            if ascii {
                print!("{}", grid.to_ascii());
            }
            Ok(())
        }
        Command::Alignscan(args) => {
            let cfg = load_config(&args.scan.config)?;
            let mut req = build_scan_request(&args.scan, &cfg)?;
            req.fixed_b = usage(cfg.resolve(args.b, "b", 0.0))?;
            req.angle_steps = usage(cfg.resolve(args.z_steps, "z-steps", defaults::ANGLE_STEPS))?;
            let (table, normalized_ok) = run_alignscan(&req)?;
            if !normalized_ok {
                eprintln!("warning: all strengths are zero; peak normalization skipped");
            }
            match resolve_out(&args.scan.out, &cfg) {
                Some(path) => emit_csv(&table, &path)?,
                None => print!("{}", table.to_csv()),
            }
            Ok(())
        }
        Command::Fit(args) => run_fit_command(args),
        Command::Scenarios => {
            for s in builtin_scenarios() {
                let t = &s.transition;
                let kind: Vec<String> = t
                    .multipoles
                    .iter()
                    .map(|m| {
                        let tag = match m.kind {
                            twistion::MultipoleKind::Magnetic => "M",
                            twistion::MultipoleKind::Electric => "E",
                        };
                        format!("{tag}{} x {}", m.order, m.reduced_amplitude)
                    })
                    .collect();
                println!(
                    "{:10} j_i={} j_f={} [{}]  default channel {} -> {}  {}",
                    s.id,
                    t.j_i,
                    t.j_f,
                    kind.join(", "),
                    s.default_m_i,
                    s.default_m_f,
                    s.description
                );
            }
            Ok(())
        }
        Command::Selftest => {
            if selftest::run() {
                Ok(())
            } else {
                Err(AppError::Domain("selftest failures".into()))
            }
        }
    }
}

fn run_fit_command(args: FitArgs) -> Result<(), AppError> {
    let cfg = load_config(&args.config)?;
    let scenario_id = match (&args.scenario, cfg.get("scenario")) {
        (Some(s), _) => s.clone(),
        (None, Some(s)) => s.to_string(),
        (None, None) => {
            if cfg.get("ji").is_some() {
                "custom".to_string()
            } else {
                return Err(AppError::Usage("missing --scenario".into()));
            }
        }
    };
    let scenario = match custom_scenario_from_config(&cfg, &scenario_id)? {
        Some(custom) => custom,
        None => scenario_with_levels(&scenario_id, None)?,
    };
    let m_i = match args
        .mi
        .clone()
        .or_else(|| cfg.get("mi").map(str::to_string))
    {
        Some(s) => usage(HalfInt::from_str(&s))?,
        None => scenario.default_m_i,
    };
    let m_f = match args
        .mf
        .clone()
        .or_else(|| cfg.get("mf").map(str::to_string))
    {
        Some(s) => usage(HalfInt::from_str(&s))?,
        None => scenario.default_m_f,
    };
    let text = std::fs::read_to_string(&args.data)
        .map_err(|e| AppError::Usage(format!("reading {}: {e}", args.data.display())))?;
    let data = usage(parse_fit_data(&text))?;
    let free_spec = args
        .free
        .clone()
        .or_else(|| cfg.get("free").map(str::to_string))
        .unwrap_or_else(|| "pitch,phi-b,waist,scale".to_string());
    let free: Vec<FitParam> = free_spec
        .split(',')
        .map(|s| FitParam::from_str(s).map_err(|e| AppError::Usage(e.to_string())))
        .collect::<Result<_, _>>()?;
    let family = match (&args.family, cfg.get("family")) {
        (Some(f), _) => parse_family(f)?,
        (None, Some(f)) => parse_family(f)?,
        (None, None) => BeamFamily::BesselGauss,
    };
    let pol_spec = args
        .pol
        .clone()
        .or_else(|| cfg.get("pol").map(str::to_string))
        .unwrap_or_else(|| "H".to_string());
    let mut warnings = Vec::new();
    let pol = match usage(parse_polarization(&pol_spec, &mut warnings))? {
        PolRequest::Named(pols, _) if pols.len() == 1 => pols[0],
        _ => {
            return Err(AppError::Usage(
                "fit needs a single concrete polarization".into(),
            ))
        }
    };
    let req = FitRequest {
        m_i,
        m_f,
        scenario,
        beam_family: family,
        oam: usage(cfg.resolve(args.oam, "oam", 0))?,
        theta_z: usage(cfg.resolve(args.theta_z, "theta-z", 0.0))?,
        phi_z: usage(cfg.resolve(args.phi_z, "phi-z", 0.0))?,
        pol,
        sweep_delta: usage(cfg.resolve(args.delta, "delta", 0.0))?,
        data,
        free,
        init_pitch: usage(cfg.resolve(args.init_pitch, "init-pitch", defaults::DEFAULT_PITCH))?,
        init_phi_b: usage(cfg.resolve(args.init_phi_b, "init-phi-b", 0.0))?,
        init_waist: usage(cfg.resolve(args.init_waist, "init-waist", defaults::DEFAULT_WAIST))?,
        init_scale: usage(cfg.resolve(args.init_scale, "init-scale", 1.0))?,
        tolerance: usage(cfg.resolve(args.tol, "tol", defaults::FIT_TOLERANCE))?,
        max_iterations: usage(cfg.resolve(
            args.max_iter,
            "max-iter",
            defaults::FIT_MAX_ITERATIONS,
        ))?,
    };
    let outcome = run_fit(&req)?;
    let report = render_fit(&outcome);
    write_or_print(&report, &resolve_out(&args.out, &cfg))?;
    if !outcome.converged {
        return Err(AppError::NonConvergence(format!(
            "best-so-far parameters reported after {} iterations, residual norm {}",
            outcome.iterations,
            format_value(outcome.residual_norm)
        )));
    }
    Ok(())
}

fn render_fit(out: &FitOutcome) -> String {
    let mut text = String::from("parameter,value,sigma,free\n");
    for p in [
        FitParam::Pitch,
        FitParam::PhiB,
        FitParam::Waist,
        FitParam::Scale,
    ] {
        let free = out.free.contains(&p);
        let sigma = out.sigma(p).unwrap_or(0.0);
        text.push_str(&format!(
            "{},{},{},{}\n",
            p.name(),
            format_value(out.value(p)),
            format_value(sigma),
            free
        ));
    }
    text.push_str(&format!(
        "residual_norm,{},,\n",
        format_value(out.residual_norm)
    ));
    text.push_str(&format!("converged,{},,\n", out.converged));
    text.push_str(&format!("iterations,{},,\n", out.iterations));
    text
}
