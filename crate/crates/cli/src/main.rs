//! `nri`: single points, detuning sweeps, oracle comparisons and band
//! reports for the four-level chiral medium.
//!
//! Exit codes: 0 success, 2 config, 3 degenerate point, 4 I/O,
//! 5 oracle regime.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nri_core::report::{oracle_report, BandReport, RunManifest, RunReport, DEFAULT_LADDER};
use nri_core::sweep::{
    oracle_grid_check, read_csv, run_sweep, write_csv, DriveGroup, Execution, SweepSpec,
    DEFAULT_FROM, DEFAULT_POINTS, DEFAULT_TO, REFERENCE_GROUPS,
};
use nri_core::{
    evaluate_point, BranchPolicy, EquationMode, Error, FormulaMode, Handedness, PipelineModes,
    ScaledConfig,
};
use serde_json::{json, Value};

const EXIT_CONFIG: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_ORACLE: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "nri",
    version,
    about = "Chirality-induced negative refraction in a four-level atomic medium"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the closed-form pipeline at one detuning.
    Point(PointArgs),
    /// Sweep the probe detuning over one or more drive groups.
    Sweep(SweepArgs),
    /// Compare the closed forms with the steady-state oracle.
    Oracle(OracleArgs),
    /// Re-read a sweep CSV and print its band report.
    Bands(BandsArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config; the built-in reference parameters when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ScaledConfig, Failure> {
        match &self.config {
            None => Ok(ScaledConfig::reference_defaults()),
            Some(path) => ScaledConfig::from_path(path).map_err(|e| match e {
                Error::Io(io) => Failure::config(format!("cannot read {}: {io}", path.display())),
                other => Failure::from(other),
            }),
        }
    }

    fn path_string(&self) -> Option<String> {
        self.config.as_ref().map(|p| p.display().to_string())
    }
}

#[derive(Debug, Args)]
struct ModeArgs {
    #[arg(long, default_value = "paper-rule")]
    policy: BranchPolicy,
    #[arg(long, default_value = "paper-literal")]
    formula_mode: FormulaMode,
    #[arg(long, default_value = "printed")]
    handedness: Handedness,
}

impl ModeArgs {
    fn modes(&self) -> PipelineModes {
        PipelineModes {
            formula_mode: self.formula_mode,
            policy: self.policy,
            handedness: self.handedness,
        }
    }
}

#[derive(Debug, Args)]
struct PointArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    modes: ModeArgs,
    /// Probe detuning in units of gamma_unit.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta_p: f64,
    /// Drive group `Gamma,Omega_c` in units of gamma_unit; overrides the config.
    #[arg(long, value_parser = parse_group)]
    group: Option<DriveGroup>,
    /// Also print D1..D9 and Z.
    #[arg(long)]
    dump_denominators: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(flatten)]
    modes: ModeArgs,
    #[arg(long, default_value_t = DEFAULT_FROM, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = DEFAULT_TO, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Output directory for sweep.csv and report.json.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value = "trace-preserving")]
    equation_mode: EquationMode,
    /// Drive group `Gamma,Omega_c`; repeatable. Defaults to the three
    /// reference groups.
    #[arg(long = "group", value_parser = parse_group)]
    groups: Vec<DriveGroup>,
    /// Evaluate grid points on one thread.
    #[arg(long)]
    serial: bool,
    /// Also run the steady-state oracle at every grid point and record its
    /// worst-case diagnostics in the report.
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Drive group `Gamma,Omega_c`; repeatable. Defaults to the three
    /// reference groups.
    #[arg(long = "group", value_parser = parse_group)]
    groups: Vec<DriveGroup>,
    /// Comma-separated pump rates for the ladder, in units of gamma_unit.
    #[arg(long, value_delimiter = ',')]
    ladder: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    delta_p: f64,
    #[arg(long, default_value = "trace-preserving")]
    equation_mode: EquationMode,
}

#[derive(Debug, Args)]
struct BandsArgs {
    #[arg(long)]
    csv: PathBuf,
}

fn parse_group(s: &str) -> Result<DriveGroup, String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `Gamma,Omega_c`, got `{s}`"))?;
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{t}` is not a number"))
    };
    Ok(DriveGroup::new(num(a)?, num(b)?))
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn config(message: String) -> Self {
        Self {
            code: EXIT_CONFIG,
            message,
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Config { .. } | Error::ConfigParse(_) | Error::Spec(_) => EXIT_CONFIG,
            Error::DegenerateDenominator { .. } => EXIT_DEGENERATE,
            Error::Io(_) | Error::Csv(_) => EXIT_IO,
            Error::SingularSystem { .. } | Error::NonlinearRegime { .. } => EXIT_ORACLE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot serialize output: {e}"),
    })
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let text = to_json(value)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "{text}").map_err(|e| Failure::io(Path::new("<stdout>"), e))
}

fn cmd_point(args: &PointArgs) -> Result<(), Failure> {
    let mut cfg = args.config.load()?;
    if let Some(g) = args.group {
        cfg = cfg.with_group(g.pump, g.omega_c);
    }
    cfg = cfg.with_delta_p(args.delta_p);
    cfg.validate()?;
    let modes = args.modes.modes();
    let manifest = RunManifest::new(
        args.config.path_string(),
        &cfg,
        modes,
        EquationMode::default(),
    )?;
    let eval = evaluate_point(&manifest.resolved_si, modes)?;
    let mut out = json!({
        "manifest": manifest,
        "delta_p_over_gamma": args.delta_p,
        "group": DriveGroup::new(cfg.pump_gamma, cfg.omega_c),
        "index": eval.index,
        "constitutive": eval.constitutive,
        "polarizabilities": eval.polarizabilities,
        "coefficients": eval.coefficients,
    });
    if args.dump_denominators {
        out["denominators"] = serde_json::to_value(eval.denominators).unwrap_or(Value::Null);
    }
    print_json(&out)
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = args.config.load()?;
    let modes = args.modes.modes();
    let spec = SweepSpec {
        delta_p_range: (args.from, args.to),
        points: args.points,
        groups: if args.groups.is_empty() {
            REFERENCE_GROUPS.to_vec()
        } else {
            args.groups.clone()
        },
        base: cfg.clone(),
        policy: modes.policy,
        formula_mode: modes.formula_mode,
        equation_mode: args.equation_mode,
        handedness: modes.handedness,
    };
    spec.validate()?;
    let execution = if args.serial {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let records = run_sweep(&spec, execution)?;
    let manifest = RunManifest::new(args.config.path_string(), &cfg, modes, args.equation_mode)?;
    let mut report = RunReport::new(manifest, &spec, &records);
    if args.oracle_check {
        report.oracle_grid = Some(oracle_grid_check(&spec, execution)?);
    }

    fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    let csv_path = args.out.join("sweep.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Failure::io(&csv_path, e))?;
    write_csv(&records, std::io::BufWriter::new(file)).map_err(|e| Failure::io(&csv_path, e))?;
    let report_path = args.out.join("report.json");
    fs::write(&report_path, to_json(&report)? + "\n").map_err(|e| Failure::io(&report_path, e))?;

    eprintln!(
        "wrote {} records to {} and {} ({} negative bands)",
        records.len(),
        csv_path.display(),
        report_path.display(),
        report.bands.bands.len()
    );
    Ok(())
}

fn cmd_oracle(args: &OracleArgs) -> Result<(), Failure> {
    let cfg = args.config.load()?;
    let groups = if args.groups.is_empty() {
        REFERENCE_GROUPS.to_vec()
    } else {
        args.groups.clone()
    };
    let ladder = args
        .ladder
        .clone()
        .unwrap_or_else(|| DEFAULT_LADDER.to_vec());
    if ladder.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(Failure::config(
            "ladder entries must be finite and non-negative".into(),
        ));
    }
    let manifest = RunManifest::new(
        args.config.path_string(),
        &cfg,
        PipelineModes::default(),
        args.equation_mode,
    )?;
    let report = oracle_report(&cfg, &groups, &ladder, args.delta_p, args.equation_mode)?;
    print_json(&json!({ "manifest": manifest, "report": report }))
}

fn cmd_bands(args: &BandsArgs) -> Result<(), Failure> {
    let file = fs::File::open(&args.csv).map_err(|e| Failure::io(&args.csv, e))?;
    let records = read_csv(std::io::BufReader::new(file))?;
    let report = BandReport::from_records(&records);
    print_json(&json!({
        "tool_version": nri_core::report::TOOL_VERSION,
        "source": args.csv.display().to_string(),
        "records": records.len(),
        "report": report,
    }))
}

/// Caps the rayon pool from `NRI_THREADS` (0 or unset = automatic).
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("NRI_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        Failure::config(format!(
            "NRI_THREADS must be a non-negative integer, got `{raw}`"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Point(a) => cmd_point(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bands(a) => cmd_bands(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
