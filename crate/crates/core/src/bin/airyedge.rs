//! Command-line front end: seeded experiment drivers with replayable
//! metadata headers. Exit codes: 0 success, 1 computation or criterion
//! failure, 2 usage error.

use std::collections::HashMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use airyedge::ensemble::BetaEnsembleSpec;
use airyedge::minors::{compute_trajectory, spectral_weight_samples};
use airyedge::randvar::RngStream;
use airyedge::sao::{
    derivative_check_with, sample_path_for, solve_domain, stationarity_shift_check,
    SlopeExtraction, DEFAULT_EXTENT, DEFAULT_MESH, DEFAULT_WINDOW_CELLS,
};
use airyedge::stats::{self, KsReport, Moments};
use airyedge::verify::{run_suite, CriterionResult};

/// Environment variable that replaces the built-in default seed. An explicit
/// --seed flag (or config-file entry) always wins over it.
const SEED_ENV: &str = "AIRYEDGE_SEED";
const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "airyedge",
    version,
    about = "Edge eigenvalue trajectories of tridiagonal beta ensembles and their operator limit"
)]
struct Cli {
    /// Optional key=value file pre-populating flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed. Default 42, overridable through AIRYEDGE_SEED.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads (0 keeps the library default).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Scaled edge eigenvalue trajectories of the minor process on one draw.
    Trajectory(TrajectoryArgs),
    /// Distribution of scaled spectral weights against the gamma law.
    DerivativeDist(DerivativeDistArgs),
    /// Shifted-domain operator eigenvalues with derivative reports.
    Sao(SaoArgs),
    /// Two-sample check that the recentered operator law does not move.
    Stationarity(StationarityArgs),
    /// Run the verification checklist.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TrajectoryArgs {
    /// Matrix dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Ensemble beta; the literal `inf` disables the noise.
    #[arg(long, value_parser = parse_beta)]
    beta: Option<f64>,
    /// Number of tracked eigenvalues.
    #[arg(long)]
    num_eigs: Option<usize>,
    /// Final boundary time.
    #[arg(long)]
    t_max: Option<f64>,
    /// Time grid step.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct DerivativeDistArgs {
    /// Matrix dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Ensemble beta; the literal `inf` disables the noise.
    #[arg(long, value_parser = parse_beta)]
    beta: Option<f64>,
    /// Number of weights per replica.
    #[arg(long)]
    num_eigs: Option<usize>,
    /// Number of replicas.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args)]
struct SaoArgs {
    /// Ensemble beta; the literal `inf` disables the noise.
    #[arg(long, value_parser = parse_beta)]
    beta: Option<f64>,
    /// Mesh width.
    #[arg(long)]
    h: Option<f64>,
    /// Domain length: each solve runs on [t, t + L].
    #[arg(long = "L", visible_alias = "l")]
    l: Option<f64>,
    /// Number of eigenvalues per domain.
    #[arg(long)]
    num_eigs: Option<usize>,
    /// Final left-boundary position.
    #[arg(long)]
    t_max: Option<f64>,
    /// Boundary time step (snapped to whole grid cells).
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Args)]
struct StationarityArgs {
    /// Ensemble beta; the literal `inf` disables the noise.
    #[arg(long, value_parser = parse_beta)]
    beta: Option<f64>,
    /// Mesh width.
    #[arg(long)]
    h: Option<f64>,
    /// Domain length.
    #[arg(long = "L", visible_alias = "l")]
    l: Option<f64>,
    /// Shift time t* compared against 0.
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of paths per sample.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only the fast exact/deterministic subset.
    #[arg(long)]
    quick: bool,
}

/// Resolved run configuration echoed into every output header.
#[derive(Serialize)]
struct RunConfig {
    subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_eigs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reps: Option<usize>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    out_path: Option<String>,
    format: &'static str,
}

impl RunConfig {
    fn new(subcommand: &'static str, seed: u64, out: &Option<PathBuf>, format: Format) -> Self {
        RunConfig {
            subcommand,
            beta: None,
            n: None,
            num_eigs: None,
            t_max: None,
            dt: None,
            h: None,
            l: None,
            reps: None,
            seed,
            out_path: out.as_ref().map(|p| p.display().to_string()),
            format: format.name(),
        }
    }

    fn set_beta(&mut self, beta: f64) {
        self.beta = Some(beta_token(beta));
    }

    /// `# key = value` lines for CSV headers, in declaration order.
    fn header_lines(&self) -> Vec<String> {
        let value = serde_json::to_value(self).expect("config serializes");
        let mut lines = vec![format!("# airyedge {}", self.subcommand)];
        if let serde_json::Value::Object(map) = value {
            for (k, v) in map {
                if k == "subcommand" {
                    continue;
                }
                let shown = match v {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                lines.push(format!("# {k} = {shown}"));
            }
        }
        lines
    }
}

fn beta_token(beta: f64) -> String {
    if beta.is_infinite() {
        "inf".to_string()
    } else {
        format!("{beta}")
    }
}

fn parse_beta(s: &str) -> Result<f64, String> {
    let beta: f64 = s
        .parse()
        .map_err(|_| format!("`{s}` is not a number or `inf`"))?;
    if beta.is_nan() || beta <= 0.0 {
        return Err("beta must be positive (or `inf`)".to_string());
    }
    Ok(beta)
}

/// Usage error: message to stderr, exit 2.
struct UsageError(String);
/// Computation failure: message to stderr, exit 1.
struct RunError(String);

enum CliError {
    Usage(UsageError),
    Run(RunError),
}

impl From<airyedge::Error> for CliError {
    fn from(e: airyedge::Error) -> Self {
        CliError::Run(RunError(e.to_string()))
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Run(RunError(format!("io error: {e}")))
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(UsageError(msg.into()))
}

type CliResult<T> = Result<T, CliError>;

/// key=value file with # comments; '-' and '_' in keys are equivalent.
fn read_config_file(path: &PathBuf) -> CliResult<HashMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!(
                "config file line {} is not key=value: `{raw}`",
                idx + 1
            )));
        };
        map.insert(
            key.trim().replace('-', "_").to_lowercase(),
            value.trim().to_string(),
        );
    }
    Ok(map)
}

/// Fill an unset flag from the config map, parsing with `parse`.
fn fill<T>(
    slot: &mut Option<T>,
    file: &HashMap<String, String>,
    key: &str,
    parse: impl Fn(&str) -> Result<T, String>,
) -> CliResult<()> {
    if slot.is_none() {
        if let Some(raw) = file.get(key) {
            let parsed = parse(raw).map_err(|e| usage(format!("config key `{key}`: {e}")))?;
            *slot = Some(parsed);
        }
    }
    Ok(())
}

fn parse_plain<T: std::str::FromStr>(s: &str) -> Result<T, String> {
    s.parse().map_err(|_| format!("cannot parse `{s}`"))
}

fn require<T>(slot: Option<T>, flag: &str) -> CliResult<T> {
    slot.ok_or_else(|| usage(format!("missing required option --{flag}")))
}

fn positive(v: f64, flag: &str) -> CliResult<f64> {
    if v <= 0.0 || !v.is_finite() {
        return Err(usage(format!(
            "--{flag} must be positive and finite, got {v}"
        )));
    }
    Ok(v)
}

/// Buffered sink for the chosen output target.
fn open_sink(out: &Option<PathBuf>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(fs::File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> CliResult<()> {
    let mut sink = open_sink(out)?;
    serde_json::to_writer_pretty(&mut sink, value)
        .map_err(|e| CliError::Run(RunError(format!("serialization failed: {e}"))))?;
    sink.write_all(b"\n")?;
    sink.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(UsageError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(RunError(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let file = match &cli.config {
        Some(path) => read_config_file(path)?,
        None => HashMap::new(),
    };
    let mut seed_flag = cli.seed;
    fill(&mut seed_flag, &file, "seed", parse_plain::<u64>)?;
    let seed = match seed_flag {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(raw) => raw
                .parse()
                .map_err(|_| usage(format!("{SEED_ENV} must be an integer, got `{raw}`")))?,
            Err(_) => DEFAULT_SEED,
        },
    };
    let mut threads = cli.threads;
    fill(&mut threads, &file, "threads", parse_plain::<usize>)?;
    if let Some(t) = threads {
        if t > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Run(RunError(format!("thread pool: {e}"))))?;
        }
    }
    let mut out = cli.out;
    if out.is_none() {
        if let Some(p) = file.get("out") {
            out = Some(PathBuf::from(p));
        }
    }
    let mut format_flag = cli.format;
    if format_flag.is_none() {
        if let Some(raw) = file.get("format") {
            format_flag = Some(match raw.as_str() {
                "csv" => Format::Csv,
                "json" => Format::Json,
                other => return Err(usage(format!("unknown format `{other}`"))),
            });
        }
    }

    match cli.command {
        Command::Trajectory(args) => cmd_trajectory(args, &file, seed, out, format_flag),
        Command::DerivativeDist(args) => cmd_derivative_dist(args, &file, seed, out, format_flag),
        Command::Sao(args) => cmd_sao(args, &file, seed, out, format_flag),
        Command::Stationarity(args) => cmd_stationarity(args, &file, seed, out, format_flag),
        Command::Verify(args) => cmd_verify(args, &file, seed, out, format_flag),
    }
}

#[derive(Serialize)]
struct TrajectorySummary {
    config: RunConfig,
    spec: BetaEnsembleSpec,
    seed: u64,
    /// Recentered moments per tracked eigenvalue across frames.
    moments: Vec<Moments>,
    ks_reports: Vec<KsReport>,
}

fn cmd_trajectory(
    mut args: TrajectoryArgs,
    file: &HashMap<String, String>,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> CliResult<ExitCode> {
    fill(&mut args.n, file, "n", parse_plain::<usize>)?;
    fill(&mut args.beta, file, "beta", parse_beta)?;
    fill(&mut args.num_eigs, file, "num_eigs", parse_plain::<usize>)?;
    fill(&mut args.t_max, file, "t_max", parse_plain::<f64>)?;
    fill(&mut args.dt, file, "dt", parse_plain::<f64>)?;
    let n = require(args.n, "n")?;
    let beta = require(args.beta, "beta")?;
    let num_eigs = args.num_eigs.unwrap_or(1);
    let t_max = args.t_max.unwrap_or(1.0);
    let dt = positive(args.dt.unwrap_or((n as f64).powf(-1.0 / 3.0)), "dt")?;
    let format = format.unwrap_or(Format::Csv);

    let spec = BetaEnsembleSpec::new(n, beta).map_err(|e| usage(e.to_string()))?;
    let mut config = RunConfig::new("trajectory", seed, &out, format);
    config.set_beta(beta);
    config.n = Some(n);
    config.num_eigs = Some(num_eigs);
    config.t_max = Some(t_max);
    config.dt = Some(dt);

    let mut stream = RngStream::new(seed, 0);
    let traj = compute_trajectory(&spec, &mut stream, num_eigs, t_max, dt)?;

    match format {
        Format::Csv => {
            let mut sink = open_sink(&out)?;
            for line in config.header_lines() {
                writeln!(sink, "{line}")?;
            }
            writeln!(sink, "t,eig_index,scaled_eig,recentered,deriv_est")?;
            for frame in &traj.frames {
                for i in 0..num_eigs {
                    writeln!(
                        sink,
                        "{},{},{},{},{}",
                        frame.t,
                        i,
                        frame.scaled_eigs[i],
                        frame.recentered[i],
                        frame.derivative_est[i]
                    )?;
                }
            }
            sink.flush()?;
        }
        Format::Json => {
            let moments = (0..num_eigs)
                .map(|i| {
                    let series: Vec<f64> = traj.frames.iter().map(|f| f.recentered[i]).collect();
                    stats::moments(&series)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let summary = TrajectorySummary {
                config,
                spec,
                seed,
                moments,
                ks_reports: Vec::new(),
            };
            write_json(&out, &summary)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct DerivativeDistSummary {
    config: RunConfig,
    spec: BetaEnsembleSpec,
    seed: u64,
    /// Moments per weight index over replicas.
    moments: Vec<Moments>,
    /// One-sample KS against Gamma(beta/2, 2/beta) per weight index.
    ks_reports: Vec<KsReport>,
}

fn cmd_derivative_dist(
    mut args: DerivativeDistArgs,
    file: &HashMap<String, String>,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> CliResult<ExitCode> {
    fill(&mut args.n, file, "n", parse_plain::<usize>)?;
    fill(&mut args.beta, file, "beta", parse_beta)?;
    fill(&mut args.num_eigs, file, "num_eigs", parse_plain::<usize>)?;
    fill(&mut args.reps, file, "reps", parse_plain::<usize>)?;
    let n = args.n.unwrap_or(2000);
    let beta = require(args.beta, "beta")?;
    if beta.is_infinite() {
        return Err(usage("derivative-dist needs finite beta"));
    }
    let num_eigs = args.num_eigs.unwrap_or(1);
    let reps = args.reps.unwrap_or(5000);
    let format = format.unwrap_or(Format::Json);

    let spec = BetaEnsembleSpec::new(n, beta).map_err(|e| usage(e.to_string()))?;
    let mut config = RunConfig::new("derivative-dist", seed, &out, format);
    config.set_beta(beta);
    config.n = Some(n);
    config.num_eigs = Some(num_eigs);
    config.reps = Some(reps);

    let master = RngStream::new(seed, 0);
    let rows = spectral_weight_samples(&spec, &master, num_eigs, reps)?;
    let shape = beta / 2.0;
    let cdf = move |x: f64| {
        if x <= 0.0 {
            0.0
        } else {
            stats::reg_lower_gamma(shape, x * shape).unwrap_or(1.0)
        }
    };
    let mut moments = Vec::with_capacity(num_eigs);
    let mut ks_reports = Vec::with_capacity(num_eigs);
    for i in 0..num_eigs {
        let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        moments.push(stats::moments(&col)?);
        ks_reports.push(stats::ks_one_sample(&col, cdf, 0.01)?);
    }

    match format {
        Format::Csv => {
            let mut sink = open_sink(&out)?;
            for line in config.header_lines() {
                writeln!(sink, "{line}")?;
            }
            writeln!(sink, "rep,eig_index,deriv_est")?;
            for (rep, row) in rows.iter().enumerate() {
                for (i, v) in row.iter().enumerate() {
                    writeln!(sink, "{rep},{i},{v}")?;
                }
            }
            sink.flush()?;
        }
        Format::Json => {
            let summary = DerivativeDistSummary {
                config,
                spec,
                seed,
                moments,
                ks_reports,
            };
            write_json(&out, &summary)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_sao(
    mut args: SaoArgs,
    file: &HashMap<String, String>,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> CliResult<ExitCode> {
    fill(&mut args.beta, file, "beta", parse_beta)?;
    fill(&mut args.h, file, "h", parse_plain::<f64>)?;
    fill(&mut args.l, file, "l", parse_plain::<f64>)?;
    fill(&mut args.num_eigs, file, "num_eigs", parse_plain::<usize>)?;
    fill(&mut args.t_max, file, "t_max", parse_plain::<f64>)?;
    fill(&mut args.dt, file, "dt", parse_plain::<f64>)?;
    let beta = require(args.beta, "beta")?;
    let h = positive(args.h.unwrap_or(DEFAULT_MESH), "h")?;
    let l = positive(args.l.unwrap_or(DEFAULT_EXTENT), "L")?;
    let num_eigs = args.num_eigs.unwrap_or(1);
    let t_max = args.t_max.unwrap_or(0.5);
    let dt = positive(args.dt.unwrap_or(0.05), "dt")?;
    let format = format.unwrap_or(Format::Csv);

    let mut config = RunConfig::new("sao", seed, &out, format);
    config.set_beta(beta);
    config.num_eigs = Some(num_eigs);
    config.t_max = Some(t_max);
    config.dt = Some(dt);
    config.h = Some(h);
    config.l = Some(l);

    let mut stream = RngStream::new(seed, 0);
    let path = sample_path_for(&mut stream, h, t_max + l + 1.0)?;
    let step_cells = ((dt / h).round() as usize).max(1);
    let max_index = (t_max / h * (1.0 + 1e-12) + 1e-9).floor() as usize;

    #[derive(Serialize)]
    struct Row {
        t: f64,
        j: usize,
        lambda: f64,
        slope: f64,
        slope_sq: f64,
        fd_quotient: f64,
        rel_err: f64,
    }
    let mut rows = Vec::new();
    let mut t_index = 0usize;
    loop {
        let t = t_index as f64 * h;
        let solve = solve_domain(&path, beta, t_index, t + l, num_eigs)?;
        let reports = derivative_check_with(
            &path,
            beta,
            t_index,
            num_eigs,
            DEFAULT_WINDOW_CELLS,
            l,
            SlopeExtraction::OneSided,
        )?;
        for (j, report) in reports.iter().enumerate() {
            rows.push(Row {
                t,
                j,
                lambda: solve.eigs[j],
                slope: solve.boundary_slopes[j],
                slope_sq: report.slope_squared,
                fd_quotient: report.fd_quotient,
                rel_err: report.rel_err,
            });
        }
        if t_index >= max_index {
            break;
        }
        t_index = (t_index + step_cells).min(max_index);
    }

    match format {
        Format::Csv => {
            let mut sink = open_sink(&out)?;
            for line in config.header_lines() {
                writeln!(sink, "{line}")?;
            }
            writeln!(sink, "t,j,lambda,slope,slope_sq,fd_quotient,rel_err")?;
            for r in &rows {
                writeln!(
                    sink,
                    "{},{},{},{},{},{},{}",
                    r.t, r.j, r.lambda, r.slope, r.slope_sq, r.fd_quotient, r.rel_err
                )?;
            }
            sink.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                config: RunConfig,
                seed: u64,
                rows: Vec<Row>,
            }
            write_json(&out, &Summary { config, seed, rows })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stationarity(
    mut args: StationarityArgs,
    file: &HashMap<String, String>,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> CliResult<ExitCode> {
    fill(&mut args.beta, file, "beta", parse_beta)?;
    fill(&mut args.h, file, "h", parse_plain::<f64>)?;
    fill(&mut args.l, file, "l", parse_plain::<f64>)?;
    fill(&mut args.t_max, file, "t_max", parse_plain::<f64>)?;
    fill(&mut args.reps, file, "reps", parse_plain::<usize>)?;
    let beta = require(args.beta, "beta")?;
    let h = positive(args.h.unwrap_or(DEFAULT_MESH), "h")?;
    let l = positive(args.l.unwrap_or(DEFAULT_EXTENT), "L")?;
    let t_star = args.t_max.unwrap_or(1.0);
    let reps = args.reps.unwrap_or(2000);
    let format = format.unwrap_or(Format::Json);

    let mut config = RunConfig::new("stationarity", seed, &out, format);
    config.set_beta(beta);
    config.t_max = Some(t_star);
    config.h = Some(h);
    config.l = Some(l);
    config.reps = Some(reps);

    let master = RngStream::new(seed, 0);
    let report = stationarity_shift_check(&master, beta, h, l, t_star, reps, 0.01)?;

    match format {
        Format::Csv => {
            let mut sink = open_sink(&out)?;
            for line in config.header_lines() {
                writeln!(sink, "{line}")?;
            }
            writeln!(
                sink,
                "statistic,n_effective,alpha,critical_value,p_value,passed"
            )?;
            writeln!(
                sink,
                "{},{},{},{},{},{}",
                report.statistic,
                report.n_effective,
                report.alpha,
                report.critical_value,
                report.p_value,
                report.passed
            )?;
            sink.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                config: RunConfig,
                seed: u64,
                ks: KsReport,
            }
            write_json(
                &out,
                &Summary {
                    config,
                    seed,
                    ks: report,
                },
            )?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(
    args: VerifyArgs,
    file: &HashMap<String, String>,
    seed: u64,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> CliResult<ExitCode> {
    let mut quick = args.quick;
    if !quick {
        if let Some(raw) = file.get("quick") {
            quick = raw == "true" || raw == "1";
        }
    }
    let format = format.unwrap_or(Format::Json);
    let mut config = RunConfig::new("verify", seed, &out, format);
    config.reps = None;
    let results = run_suite(seed, quick)?;
    for r in &results {
        eprintln!(
            "criterion {:2} ({}): {} [{:.1}s]",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds
        );
    }
    let all_passed = results.iter().all(|r| r.passed);

    match format {
        Format::Csv => {
            let mut sink = open_sink(&out)?;
            for line in config.header_lines() {
                writeln!(sink, "{line}")?;
            }
            writeln!(sink, "id,name,passed,seconds")?;
            for r in &results {
                writeln!(sink, "{},{},{},{}", r.id, r.name, r.passed, r.seconds)?;
            }
            sink.flush()?;
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Summary {
                config: RunConfig,
                seed: u64,
                quick: bool,
                all_passed: bool,
                results: Vec<CriterionResult>,
            }
            write_json(
                &out,
                &Summary {
                    config,
                    seed,
                    quick,
                    all_passed,
                    results,
                },
            )?;
        }
    }
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
