//! Command-line front end shared by the `rotspec` binary and the tests.
//!
//! Settings resolve as flags > config file > defaults; every report echoes the
//! effective settings in its header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::checks::{self, CheckSuite};
use crate::geometry::RotationParams;
use crate::ivp::IntegratorConfig;
use crate::output::{csv_table, sig9, write_atomic, Cell, Report};
use crate::profile::{self, PeriodicProfile, ProfileError, ShootingProblem};
use crate::spectrum::{self, ModeIndex, OperatorKind, ScanSettings, SpectrumReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONVERGENCE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "rotspec",
    version,
    about = "Periodic profiles and Laplace/Jacobi spectra of rotational minimal hypersurfaces in spheres"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Solve for the periodic profile and print its summary
    Shoot,
    /// Sweep periodic profiles over a range of n at fixed l
    Table,
    /// Sample one full period of the profile curve
    Profile,
    /// Sample the Floquet discriminant of one mode over a λ range
    Discriminant,
    /// Assemble the Laplace or Jacobi spectrum
    Spectrum,
    /// Run the invariant suite on a profile
    Check,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Shoot => "shoot",
            Command::Table => "table",
            Command::Profile => "profile",
            Command::Discriminant => "discriminant",
            Command::Spectrum => "spectrum",
            Command::Check => "check",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Table | Command::Profile | Command::Discriminant => Format::Csv,
            Command::Shoot | Command::Spectrum | Command::Check => Format::Report,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Report,
}

impl Format {
    fn name(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Hypersurface dimension n = k + l + 1
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Dimension of the first sphere factor
    #[arg(long, global = true)]
    pub k: Option<u32>,
    /// Dimension of the second sphere factor
    #[arg(long, global = true)]
    pub l: Option<u32>,
    /// Use this starting radius as is instead of shooting for it
    #[arg(long, global = true)]
    pub a0: Option<f64>,
    /// Lower end of the λ range (default depends on the operator)
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda_min: Option<f64>,
    /// Upper end of the λ range
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub lambda_max: Option<f64>,
    /// λ grid spacing
    #[arg(long, global = true)]
    pub step: Option<f64>,
    /// `laplace` or `jacobi`
    #[arg(long, global = true)]
    pub operator: Option<OperatorKind>,
    /// Mode as `i,j`
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format (default depends on the command)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Integrator relative tolerance
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Integrator absolute tolerance
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Flat `key = value` file with long flag names as keys
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// First n of a table sweep
    #[arg(long, global = true)]
    pub n_from: Option<u32>,
    /// Last n of a table sweep (inclusive)
    #[arg(long, global = true)]
    pub n_to: Option<u32>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Convergence(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Io { .. } => EXIT_IO,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Convergence(_) => "convergence",
            CliError::Io { .. } => "io",
        }
    }

    /// Machine-readable block for the diagnostic stream.
    pub fn block(&self) -> String {
        let mut r = Report::new();
        r.section("error")
            .text("kind", self.kind())
            .int("exit_code", self.exit_code())
            .text("message", format!("{:?}", self.to_string()));
        r.finish()
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::Params(p) => CliError::Usage(p.to_string()),
            e => CliError::Convergence(e.to_string()),
        }
    }
}

const CONFIG_KEYS: &[&str] = &[
    "n",
    "k",
    "l",
    "a0",
    "lambda-min",
    "lambda-max",
    "step",
    "operator",
    "mode",
    "out",
    "format",
    "rel-tol",
    "abs-tol",
    "jobs",
    "n-from",
    "n-to",
];

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected `key = value`",
                lineno + 1
            ))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: std::str::FromStr>(
    file: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match file.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`"))),
    }
}

/// Flag value, else config-file value, else `None`.
macro_rules! layered {
    ($flag:expr, $file:expr, $key:literal) => {
        match $flag {
            Some(v) => Some(v),
            None => from_file($file, $key)?,
        }
    };
}

fn parse_mode(s: &str) -> Result<(u32, u32), CliError> {
    let bad = || CliError::Usage(format!("--mode expects `i,j`, got `{s}`"));
    let (i, j) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        i.trim().parse().map_err(|_| bad())?,
        j.trim().parse().map_err(|_| bad())?,
    ))
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Absent only for `table`, which fixes l and sweeps n.
    pub params: Option<RotationParams>,
    pub table_l: u32,
    pub n_range: (u32, u32),
    pub a0: Option<f64>,
    pub lambda_range: (f64, f64),
    pub step: f64,
    pub operator: OperatorKind,
    pub mode: Option<(u32, u32)>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub integrator: IntegratorConfig,
    pub jobs: Option<usize>,
    pub config_path: Option<PathBuf>,
}

impl RunConfig {
    /// Merges flags with the optional config file and checks consistency.
    pub fn resolve(command: Command, flags: &Options) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_config_file(&text)?
            }
            None => BTreeMap::new(),
        };
        let f = &file;
        let n: Option<u32> = layered!(flags.n, f, "n");
        let k: Option<u32> = layered!(flags.k, f, "k");
        let l: Option<u32> = layered!(flags.l, f, "l");
        let a0: Option<f64> = layered!(flags.a0, f, "a0");
        let lambda_min: Option<f64> = layered!(flags.lambda_min, f, "lambda-min");
        let lambda_max: Option<f64> = layered!(flags.lambda_max, f, "lambda-max");
        let step: Option<f64> = layered!(flags.step, f, "step");
        let operator: Option<OperatorKind> = match flags.operator {
            Some(op) => Some(op),
            None => match f.get("operator") {
                Some(v) => Some(v.parse().map_err(CliError::Usage)?),
                None => None,
            },
        };
        let mode: Option<String> = layered!(flags.mode.clone(), f, "mode");
        let out: Option<PathBuf> = layered!(flags.out.clone(), f, "out");
        let format: Option<Format> = match flags.format {
            Some(fm) => Some(fm),
            None => match f.get("format").map(String::as_str) {
                Some("csv") => Some(Format::Csv),
                Some("report") => Some(Format::Report),
                Some(other) => return Err(CliError::Usage(format!("unknown format `{other}`"))),
                None => None,
            },
        };
        let rel_tol: Option<f64> = layered!(flags.rel_tol, f, "rel-tol");
        let abs_tol: Option<f64> = layered!(flags.abs_tol, f, "abs-tol");
        let jobs: Option<usize> = layered!(flags.jobs, f, "jobs");
        let n_from: Option<u32> = layered!(flags.n_from, f, "n-from");
        let n_to: Option<u32> = layered!(flags.n_to, f, "n-to");

        let mut integrator = IntegratorConfig::default();
        if let Some(r) = rel_tol {
            integrator.rel_tol = r;
        }
        if let Some(a) = abs_tol {
            integrator.abs_tol = a;
        }
        integrator
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        if jobs == Some(0) {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }

        let (params, table_l, n_range) = if command == Command::Table {
            let l = l.ok_or_else(|| CliError::Usage("table requires --l".into()))?;
            let from = n_from.unwrap_or(l + 3);
            let to = n_to.unwrap_or(from);
            if from < l + 2 || from > to || to > 200 {
                return Err(CliError::Usage(format!(
                    "table needs l + 2 <= n-from <= n-to <= 200, got {from}..{to} with l = {l}"
                )));
            }
            (None, l, (from, to))
        } else {
            let p =
                RotationParams::from_any(n, k, l).map_err(|e| CliError::Usage(e.to_string()))?;
            (Some(p), p.l(), (p.n(), p.n()))
        };

        if command == Command::Spectrum && operator.is_none() {
            return Err(CliError::Usage("spectrum requires --operator".into()));
        }
        let operator = operator.unwrap_or(OperatorKind::Laplace);
        let mode = mode.as_deref().map(parse_mode).transpose()?;
        if command == Command::Discriminant && mode.is_none() {
            return Err(CliError::Usage("discriminant requires --mode i,j".into()));
        }
        let (dlo, dhi) = operator.default_range();
        let lambda_range = (lambda_min.unwrap_or(dlo), lambda_max.unwrap_or(dhi));
        // written negated so that NaN bounds are rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(lambda_range.0 < lambda_range.1) {
            return Err(CliError::Usage(format!(
                "empty λ range [{}, {}]",
                lambda_range.0, lambda_range.1
            )));
        }
        let step = step.unwrap_or(spectrum::DEFAULT_STEP);
        if !(step > 0.0 && step.is_finite()) {
            return Err(CliError::Usage(format!(
                "--step must be positive, got {step}"
            )));
        }
        Ok(Self {
            command,
            params,
            table_l,
            n_range,
            a0,
            lambda_range,
            step,
            operator,
            mode,
            out,
            format: format.unwrap_or(command.default_format()),
            integrator,
            jobs,
            config_path: flags.config.clone(),
        })
    }

    fn scan_settings(&self) -> ScanSettings {
        ScanSettings::new(self.lambda_range, self.step, self.integrator)
    }

    /// The effective settings, in a fixed order.
    fn echo(&self, r: &mut Report) {
        r.section("config").text("command", self.command.name());
        match self.params {
            Some(p) => {
                r.int("n", p.n()).int("k", p.k()).int("l", p.l());
            }
            None => {
                r.int("l", self.table_l)
                    .int("n_from", self.n_range.0)
                    .int("n_to", self.n_range.1);
            }
        }
        match self.a0 {
            Some(a) => r.float("a0", a),
            None => r.text("a0", "shoot"),
        };
        if matches!(self.command, Command::Discriminant | Command::Spectrum) {
            r.text("operator", self.operator.name())
                .float("lambda_min", self.lambda_range.0)
                .float("lambda_max", self.lambda_range.1)
                .float("step", self.step);
        }
        if let Some((i, j)) = self.mode {
            r.text("mode", format!("{i},{j}"));
        }
        r.text("format", self.format.name())
            .float("rel_tol", self.integrator.rel_tol)
            .float("abs_tol", self.integrator.abs_tol)
            .float("max_step", self.integrator.max_step);
        if let Some(path) = &self.config_path {
            r.text("config_file", path.display().to_string());
        }
        r.end();
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// The rendered document; also written to `out` when set, else meant for stdout.
    pub document: String,
}

/// Parses `args` (program name first) and runs. Returns the exit code and the
/// text for stdout and stderr; stdout stays empty when `--out` took the document.
pub fn main_with_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    (EXIT_OK, e.to_string(), String::new())
                }
                _ => (EXIT_USAGE, String::new(), e.to_string()),
            }
        }
    };
    let result = RunConfig::resolve(cli.command, &cli.options)
        .and_then(|cfg| run(&cfg).map(|outcome| (cfg.out.is_some(), outcome)));
    match result {
        // the document already went to the output file
        Ok((true, outcome)) => (outcome.exit_code, String::new(), String::new()),
        Ok((false, outcome)) => (outcome.exit_code, outcome.document, String::new()),
        Err(e) => (e.exit_code(), String::new(), e.block()),
    }
}

/// Executes one resolved invocation on a pool of `jobs` workers.
///
/// When `out` is set the document is written there atomically and the returned
/// document is still the full text.
pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let outcome = pool.install(|| execute(cfg))?;
    if let Some(path) = &cfg.out {
        write_out(path, &outcome.document)?;
    }
    Ok(outcome)
}

fn write_out(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn obtain_profile(cfg: &RunConfig) -> Result<PeriodicProfile, CliError> {
    let params = cfg.params.expect("resolved for every command but table");
    let profile = match cfg.a0 {
        Some(a0) => profile::profile_at(&params, a0, &cfg.integrator)?,
        None => profile::solve_periodic(&ShootingProblem::with_default_bracket(
            params,
            cfg.integrator,
        )?)?,
    };
    Ok(profile)
}

fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let ok = |document| Outcome {
        exit_code: EXIT_OK,
        document,
    };
    match cfg.command {
        Command::Shoot => {
            let p = obtain_profile(cfg)?;
            Ok(ok(match cfg.format {
                Format::Csv => csv_table(PROFILE_SUMMARY_HEADER, &[profile_summary_row(&p)]),
                Format::Report => {
                    let mut r = header(cfg);
                    profile_section(&mut r, &p);
                    r.finish()
                }
            }))
        }
        Command::Table => table(cfg).map(ok),
        Command::Profile => {
            let p = obtain_profile(cfg)?;
            profile_curve(cfg, &p).map(ok)
        }
        Command::Discriminant => {
            let p = obtain_profile(cfg)?;
            discriminant_curve(cfg, &p).map(ok)
        }
        Command::Spectrum => {
            let p = obtain_profile(cfg)?;
            let report = spectrum::assemble_spectrum(&p, cfg.operator, &cfg.scan_settings())
                .map_err(|e| CliError::Convergence(e.to_string()))?;
            Ok(ok(match cfg.format {
                Format::Csv => spectrum_csv(&report),
                Format::Report => spectrum_report(cfg, &p, &report),
            }))
        }
        Command::Check => {
            let p = obtain_profile(cfg)?;
            let suite = checks::run_checks(&p, &cfg.integrator);
            Ok(Outcome {
                exit_code: if suite.all_passed() {
                    EXIT_OK
                } else {
                    EXIT_CHECK_FAILED
                },
                document: check_document(cfg, &p, &suite),
            })
        }
    }
}

fn header(cfg: &RunConfig) -> Report {
    let mut r = Report::new();
    r.text("rotspec", cfg.command.name());
    cfg.echo(&mut r);
    r
}

const PROFILE_SUMMARY_HEADER: &[&str] = &[
    "n",
    "k",
    "l",
    "a0",
    "T",
    "residual_f1",
    "residual_f2",
    "residual_theta",
    "minimality_residual",
];

fn profile_summary_row(p: &PeriodicProfile) -> Vec<Cell> {
    vec![
        p.params.n().into(),
        p.params.k().into(),
        p.params.l().into(),
        p.a0.into(),
        p.period.into(),
        p.residual_f1.into(),
        p.residual_f2.into(),
        p.residual_theta.into(),
        p.minimality_residual.into(),
    ]
}

fn profile_section(r: &mut Report, p: &PeriodicProfile) {
    r.section("profile")
        .int("n", p.params.n())
        .int("k", p.params.k())
        .int("l", p.params.l())
        .float("a0", p.a0)
        .float("period", p.period)
        .float("half_period", 0.5 * p.period)
        .float("residual_f1", p.residual_f1)
        .float("residual_theta", p.residual_theta)
        .float("residual_f2", p.residual_f2)
        .flag("f2_closure_flagged", p.f2_closure_flagged())
        .float("minimality_residual", p.minimality_residual)
        .int("flights", p.flights as i64)
        .end();
}

fn table(cfg: &RunConfig) -> Result<String, CliError> {
    let sweep = profile::table_sweep(cfg.table_l, cfg.n_range, &cfg.integrator)?;
    Ok(match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = sweep.profiles.iter().map(profile_summary_row).collect();
            csv_table(PROFILE_SUMMARY_HEADER, &rows)
        }
        Format::Report => {
            let mut r = header(cfg);
            r.section("table")
                .int("converged", sweep.profiles.len() as i64)
                .int("failed", sweep.failures.len() as i64);
            for p in &sweep.profiles {
                r.item(&format!("n{}", p.params.n()))
                    .float("a0", p.a0)
                    .float("period", p.period)
                    .float("residual_f1", p.residual_f1)
                    .end();
            }
            for (n, e) in &sweep.failures {
                r.item(&format!("n{n}"))
                    .text("failure", e.to_string())
                    .end();
            }
            r.end();
            r.finish()
        }
    })
}

fn profile_curve(cfg: &RunConfig, p: &PeriodicProfile) -> Result<String, CliError> {
    let traj = p
        .full_period(&cfg.integrator)
        .map_err(|e| CliError::Convergence(e.to_string()))?;
    let mut rows = Vec::with_capacity(traj.nodes().len());
    let mut worst = 0.0f64;
    for node in traj.nodes() {
        let s = crate::geometry::ProfileState::from_slice(&node.state);
        let nh = crate::geometry::curvature_bundle_with(&s, &p.params, node.derivative[2])
            .map(|b| b.n_h)
            .map_err(|e| CliError::Convergence(format!("at u = {}: {e}", node.u)))?;
        worst = worst.max(nh.abs());
        rows.push(vec![
            node.u.into(),
            s.f1.into(),
            s.f2.into(),
            s.theta.into(),
            nh.into(),
        ]);
    }
    Ok(match cfg.format {
        Format::Csv => csv_table(&["u", "f1", "f2", "theta", "nH_residual"], &rows),
        Format::Report => {
            let mut r = header(cfg);
            profile_section(&mut r, p);
            r.section("curve")
                .int("samples", rows.len() as i64)
                .float("max_abs_nH", worst)
                .end();
            r.finish()
        }
    })
}

fn discriminant_curve(cfg: &RunConfig, p: &PeriodicProfile) -> Result<String, CliError> {
    let (i, j) = cfg.mode.expect("resolved for discriminant");
    let mode = ModeIndex::new(i, j, &p.params);
    let scan = spectrum::scan_and_refine(p, &mode, cfg.operator, &cfg.scan_settings())
        .map_err(|e| CliError::Convergence(e.to_string()))?;
    Ok(match cfg.format {
        Format::Csv => {
            let rows: Vec<Vec<Cell>> = scan
                .samples
                .iter()
                .map(|d| {
                    let m = &d.monodromy;
                    vec![
                        d.lambda.into(),
                        d.delta0.into(),
                        m.z1_t.into(),
                        m.z2_t.into(),
                        m.dz1_t.into(),
                        m.dz2_t.into(),
                    ]
                })
                .collect();
            csv_table(&["lambda", "delta0", "z1T", "z2T", "dz1T", "dz2T"], &rows)
        }
        Format::Report => {
            let mut r = header(cfg);
            profile_section(&mut r, p);
            r.section("discriminant")
                .text("mode", mode.to_string())
                .int("samples", scan.samples.len() as i64)
                .int("refined_intervals", scan.refined_intervals as i64)
                .int("root_count", scan.roots.len() as i64);
            for root in &scan.roots {
                r.item("root")
                    .float("lambda", root.lambda)
                    .int("kernel_dim", root.kernel_dim)
                    .flag("tangential", root.tangential)
                    .end();
            }
            for c in &scan.candidates {
                r.item("candidate")
                    .float("lambda", c.lambda)
                    .float("abs_delta0", c.abs_delta0)
                    .end();
            }
            r.end();
            r.finish()
        }
    })
}

fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut rows = Vec::new();
    for (gi, g) in report.groups.iter().enumerate() {
        for m in &g.members {
            rows.push(vec![
                Cell::Int(gi as i64),
                m.lambda.into(),
                m.mode.i.into(),
                m.mode.j.into(),
                m.kernel_dim.into(),
                m.mode.mult_k.into(),
                m.mode.mult_l.into(),
                m.total_multiplicity.into(),
                Cell::from(if m.tangential { "true" } else { "false" }),
            ]);
        }
    }
    csv_table(
        &[
            "group",
            "lambda",
            "i",
            "j",
            "kernel_dim",
            "mult_k",
            "mult_l",
            "total_multiplicity",
            "tangential",
        ],
        &rows,
    )
}

fn modes_list(modes: impl Iterator<Item = ModeIndex>) -> String {
    let mut s = String::new();
    for (t, m) in modes.enumerate() {
        if t > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{m}");
    }
    if s.is_empty() {
        s.push_str("none");
    }
    s
}

fn spectrum_report(cfg: &RunConfig, p: &PeriodicProfile, report: &SpectrumReport) -> String {
    let mut r = header(cfg);
    profile_section(&mut r, p);
    r.section("spectrum")
        .text("operator", report.operator.name());
    if let (Some(index), Some(nullity)) = (report.stability_index, report.nullity) {
        r.int("stability_index", index as i64)
            .int("nullity", nullity as i64);
    }
    r.int("group_count", report.groups.len() as i64);
    r.section("groups");
    for g in &report.groups {
        r.item("group")
            .float("lambda", g.lambda)
            .int("multiplicity", g.multiplicity as i64);
        for m in &g.members {
            r.item(&format!("mode {}", m.mode))
                .float("lambda", m.lambda)
                .int("kernel_dim", m.kernel_dim)
                .int("total_multiplicity", m.total_multiplicity as i64)
                .flag("tangential", m.tangential)
                .end();
        }
        r.end();
    }
    r.end();
    r.text(
        "scanned_modes",
        modes_list(report.scans.iter().map(|s| s.mode)),
    )
    .text("skipped_modes", modes_list(report.skipped.iter().copied()));
    r.section("pruned");
    for w in &report.pruned {
        r.item(&format!("mode {}", w.mode))
            .flag("witness_consistent", w.consistent())
            .float(
                "max_witness_delta0",
                w.samples
                    .iter()
                    .map(|s| s.1)
                    .fold(f64::NEG_INFINITY, f64::max),
            )
            .end();
    }
    r.end();
    r.section("candidates");
    for c in &report.candidates {
        r.item(&format!("mode {}", c.mode))
            .float("lambda", c.lambda)
            .float("abs_delta0", c.abs_delta0)
            .end();
    }
    r.end();
    r.end();
    r.finish()
}

fn check_document(cfg: &RunConfig, p: &PeriodicProfile, suite: &CheckSuite) -> String {
    let mut r = header(cfg);
    profile_section(&mut r, p);
    r.section("checks");
    for line in &suite.lines {
        r.text(
            line.name,
            format!(
                "{} value={} threshold={}",
                if line.passed() { "pass" } else { "fail" },
                sig9(line.value),
                sig9(line.threshold)
            ),
        );
    }
    r.flag("all_passed", suite.all_passed()).end();
    r.finish()
}
