//! `screening` command line. Every number printed comes straight from
//! `screening-core`; formats only differ in how many digits they show.
//!
//! Exit status: 0 success, 1 domain error or failed verification,
//! 2 usage error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use screening_core::oracle::{
    simulate, verify_report, SimulationConfig, SimulationReport, Verdict, DEFAULT_SIGMAS,
    DEFAULT_TRIALS,
};
use screening_core::tables::{surface_to_csv, surface_to_dat, STANDARD_LOG_LR, STANDARD_PHI};
use screening_core::{
    generate_reference_table, iterations_needed, iterations_needed_log_lr, npv, npv_curve, ppv,
    ppv_curve, prevalence_threshold, sequential_ppv, surface_grid, unit_grid, AxisRange,
    IterationPlan, Prior, ReferenceTableSpec, ScreeningError, TestProfile,
};
use screening_service::ServiceConfig;
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Markdown,
    Plain,
}

#[derive(Debug, Parser)]
#[command(
    name = "screening",
    version,
    about = "Screening-test predictive values and serial-testing planner"
)]
pub struct Cli {
    /// Output format; defaults to plain for single values and csv for grids.
    #[arg(long, short, global = true, env = "SCREENING_FORMAT", value_enum)]
    pub format: Option<OutputFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// Sensitivity a.
    #[arg(long)]
    pub sens: f64,
    /// Specificity b.
    #[arg(long)]
    pub spec: f64,
}

impl TestArgs {
    fn profile(&self) -> Result<TestProfile, CliError> {
        Ok(TestProfile::new(self.sens, self.spec)?)
    }
}

/// Either `--sens/--spec` or `--log-lr`.
#[derive(Debug, Args)]
pub struct LrArgs {
    #[arg(long, requires = "spec", conflicts_with = "log_lr")]
    pub sens: Option<f64>,
    #[arg(long, requires = "sens", conflicts_with = "log_lr")]
    pub spec: Option<f64>,
    /// Natural log of the positive likelihood ratio a/(1-b).
    #[arg(long, allow_hyphen_values = true)]
    pub log_lr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axes {
    Paper,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveKind {
    Ppv,
    Npv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Positive predictive value.
    Ppv {
        #[command(flatten)]
        test: TestArgs,
        #[arg(long)]
        prev: f64,
    },
    /// Negative predictive value.
    Npv {
        #[command(flatten)]
        test: TestArgs,
        #[arg(long)]
        prev: f64,
    },
    /// Prevalence threshold and epsilon = a + b.
    Threshold {
        #[command(flatten)]
        test: TestArgs,
    },
    /// Consecutive positive results needed to reach a target PPV.
    Iterations {
        #[command(flatten)]
        lr: LrArgs,
        #[arg(long)]
        prev: f64,
        #[arg(long)]
        target: f64,
    },
    /// PPV after n consecutive positive results.
    SequentialPpv {
        #[command(flatten)]
        test: TestArgs,
        #[arg(long)]
        prev: f64,
        #[arg(long)]
        n: u64,
    },
    /// Reference table of iteration counts over (ln LR+, prior).
    Table {
        #[arg(long)]
        target: f64,
        #[arg(long, value_enum, default_value = "paper")]
        axes: Axes,
        /// Row axis for custom tables, comma separated.
        #[arg(long, value_delimiter = ',')]
        log_lr_values: Vec<f64>,
        /// Column axis for custom tables, comma separated.
        #[arg(long, value_delimiter = ',')]
        phi_values: Vec<f64>,
        /// Single row from a test's sensitivity/specificity.
        #[arg(long, requires = "spec")]
        sens: Option<f64>,
        #[arg(long, requires = "sens")]
        spec: Option<f64>,
    },
    /// Dense (ln LR+, prior, raw n) grid for surface plots.
    Surface {
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 0.5)]
        log_lr_start: f64,
        #[arg(long, default_value_t = 5.0)]
        log_lr_stop: f64,
        #[arg(long, default_value_t = 0.1)]
        log_lr_step: f64,
        #[arg(long, default_value_t = 0.01)]
        phi_start: f64,
        #[arg(long, default_value_t = 0.2)]
        phi_stop: f64,
        #[arg(long, default_value_t = 0.01)]
        phi_step: f64,
    },
    /// PPV or NPV sampled at evenly spaced priors on [0, 1].
    Curve {
        #[arg(long, value_enum)]
        kind: CurveKind,
        #[command(flatten)]
        test: TestArgs,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
    /// Monte Carlo estimate of the PPV after 1..=depth positives.
    Simulate {
        #[command(flatten)]
        test: TestArgs,
        #[arg(long)]
        prev: f64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// Compare against the closed form; exit 1 on mismatch.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_SIGMAS)]
        sigmas: f64,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "SCREENING_PORT")]
        port: Option<u16>,
        #[arg(long)]
        bind: Option<String>,
        /// TOML config file.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Domain(ScreeningError),
    Usage(String),
    Failed(String),
    Io(std::io::Error),
}

impl From<ScreeningError> for CliError {
    fn from(e: ScreeningError) -> Self {
        Self::Domain(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Domain(e) => write!(f, "{}: {e}", e.name()),
            Self::Usage(m) => write!(f, "usage: {m}"),
            Self::Failed(m) => f.write_str(m),
            Self::Io(e) => write!(f, "io: {e}"),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// A flat list of named values.
#[derive(Debug, Clone)]
struct Record(Vec<(&'static str, Value)>);

impl Record {
    fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => {
                let map: serde_json::Map<_, _> = self
                    .0
                    .iter()
                    .map(|(k, v)| ((*k).to_owned(), v.clone()))
                    .collect();
                format!(
                    "{}\n",
                    serde_json::to_string_pretty(&Value::Object(map)).expect("json")
                )
            }
            OutputFormat::Csv => {
                let keys: Vec<_> = self.0.iter().map(|(k, _)| *k).collect();
                let vals: Vec<_> = self.0.iter().map(|(_, v)| full(v)).collect();
                format!("{}\n{}\n", keys.join(","), vals.join(","))
            }
            OutputFormat::Markdown => {
                let keys: Vec<_> = self.0.iter().map(|(k, _)| *k).collect();
                let vals: Vec<_> = self.0.iter().map(|(_, v)| short(v)).collect();
                format!(
                    "| {} |\n|{}\n| {} |\n",
                    keys.join(" | "),
                    "---|".repeat(keys.len()),
                    vals.join(" | ")
                )
            }
            OutputFormat::Plain if self.0.len() == 1 => format!("{}\n", short(&self.0[0].1)),
            OutputFormat::Plain => self
                .0
                .iter()
                .map(|(k, v)| format!("{k}: {}\n", short(v)))
                .collect(),
        }
    }
}

fn full(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn short(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => format!("{:.4}", n.as_f64().expect("f64")),
        Value::Null => "-".into(),
        other => full(other),
    }
}

fn plan_record(plan: &IterationPlan) -> Record {
    Record(vec![
        ("status", json!(plan.status)),
        ("target_rho", json!(plan.target_rho)),
        ("prior", json!(plan.prior)),
        ("raw_n", json!(plan.raw_n)),
        ("n_i", json!(plan.n_i)),
    ])
}

fn execute(cli: &Cli, out: &mut impl Write) -> Result<(), CliError> {
    let single = cli.format.unwrap_or(OutputFormat::Plain);
    let grid = cli.format.unwrap_or(OutputFormat::Csv);
    match &cli.command {
        Command::Ppv { test, prev } => {
            let v = ppv(&test.profile()?, Prior::new(*prev)?)?;
            out.write_all(
                Record(vec![("ppv", json!(v.value))])
                    .render(single)
                    .as_bytes(),
            )?;
        }
        Command::Npv { test, prev } => {
            let v = npv(&test.profile()?, Prior::new(*prev)?)?;
            out.write_all(
                Record(vec![("npv", json!(v.value))])
                    .render(single)
                    .as_bytes(),
            )?;
        }
        Command::Threshold { test } => {
            let profile = test.profile()?;
            let rec = Record(vec![
                (
                    "prevalence_threshold",
                    json!(prevalence_threshold(&profile)?),
                ),
                ("epsilon", json!(profile.epsilon())),
            ]);
            out.write_all(rec.render(single).as_bytes())?;
        }
        Command::Iterations { lr, prev, target } => {
            let prior = Prior::new(*prev)?;
            let plan = match (lr.sens, lr.spec, lr.log_lr) {
                (Some(a), Some(b), None) => {
                    iterations_needed(&TestProfile::new(a, b)?, prior, *target)?
                }
                (None, None, Some(log_lr)) => iterations_needed_log_lr(log_lr, prior, *target)?,
                _ => {
                    return Err(CliError::Usage(
                        "give either --sens and --spec, or --log-lr".into(),
                    ))
                }
            };
            out.write_all(plan_record(&plan).render(single).as_bytes())?;
        }
        Command::SequentialPpv { test, prev, n } => {
            let v = sequential_ppv(&test.profile()?, Prior::new(*prev)?, *n)?;
            let rec = Record(vec![("n", json!(n)), ("ppv", json!(v))]);
            out.write_all(rec.render(single).as_bytes())?;
        }
        Command::Table {
            target,
            axes,
            log_lr_values,
            phi_values,
            sens,
            spec,
        } => {
            let rows = match (sens, spec) {
                (Some(a), Some(b)) => {
                    let lr = TestProfile::new(*a, *b)?.positive_likelihood_ratio()?;
                    vec![lr.ln()]
                }
                _ if *axes == Axes::Paper => STANDARD_LOG_LR.to_vec(),
                _ => log_lr_values.clone(),
            };
            let cols = match axes {
                Axes::Paper => STANDARD_PHI.to_vec(),
                Axes::Custom => phi_values.clone(),
            };
            let table = generate_reference_table(&ReferenceTableSpec::new(*target, rows, cols)?)?;
            let text = match grid {
                OutputFormat::Csv => table.to_csv(),
                OutputFormat::Json => table.to_json() + "\n",
                OutputFormat::Markdown | OutputFormat::Plain => table.to_markdown(),
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Surface {
            target,
            log_lr_start,
            log_lr_stop,
            log_lr_step,
            phi_start,
            phi_stop,
            phi_step,
        } => {
            let points = surface_grid(
                *target,
                AxisRange {
                    start: *log_lr_start,
                    stop: *log_lr_stop,
                    step: *log_lr_step,
                },
                AxisRange {
                    start: *phi_start,
                    stop: *phi_stop,
                    step: *phi_step,
                },
            )?;
            let text = match grid {
                OutputFormat::Csv => surface_to_csv(&points),
                OutputFormat::Json => {
                    serde_json::to_string_pretty(&json!({ "target_rho": target, "points": points }))
                        .expect("json")
                        + "\n"
                }
                OutputFormat::Plain => surface_to_dat(&points),
                OutputFormat::Markdown => {
                    let mut s = String::from("| ln LR+ | prior | raw n |\n|---:|---:|---:|\n");
                    for p in &points {
                        s.push_str(&format!(
                            "| {:.2} | {} | {:.2} |\n",
                            p.log_lr, p.phi, p.raw_n
                        ));
                    }
                    s
                }
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Curve { kind, test, points } => {
            let profile = test.profile()?;
            let grid_points = unit_grid(*points);
            let pairs = match kind {
                CurveKind::Ppv => ppv_curve(&profile, &grid_points)?,
                CurveKind::Npv => npv_curve(&profile, &grid_points)?,
            };
            let name = match kind {
                CurveKind::Ppv => "ppv",
                CurveKind::Npv => "npv",
            };
            let text = match grid {
                OutputFormat::Csv => {
                    let mut s = format!("phi,{name}\n");
                    for (x, y) in &pairs {
                        s.push_str(&format!("{x},{y}\n"));
                    }
                    s
                }
                OutputFormat::Json => {
                    let pts: Vec<_> = pairs
                        .iter()
                        .map(|(x, y)| json!({"phi": x, "value": y}))
                        .collect();
                    serde_json::to_string_pretty(&json!({
                        "kind": name,
                        "threshold": prevalence_threshold(&profile).ok(),
                        "points": pts,
                    }))
                    .expect("json")
                        + "\n"
                }
                OutputFormat::Plain => pairs
                    .iter()
                    .map(|(x, y)| format!("{x:.4} {y:.4}\n"))
                    .collect(),
                OutputFormat::Markdown => {
                    let mut s = format!("| phi | {name} |\n|---:|---:|\n");
                    for (x, y) in &pairs {
                        s.push_str(&format!("| {x:.4} | {y:.4} |\n"));
                    }
                    s
                }
            };
            out.write_all(text.as_bytes())?;
        }
        Command::Simulate {
            test,
            prev,
            trials,
            seed,
            depth,
            verify,
            sigmas,
        } => {
            let config =
                SimulationConfig::new(test.profile()?, Prior::new(*prev)?, *trials, *seed, *depth)?;
            let report = simulate(&config)?;
            let verdict = if *verify {
                Some(verify_report(&report, *sigmas, |n| {
                    sequential_ppv(&config.test, config.prior, u64::from(n))
                })?)
            } else {
                None
            };
            out.write_all(render_simulation(&report, verdict.as_ref(), single).as_bytes())?;
            if let Some(v) = verdict {
                if !v.passed {
                    return Err(CliError::Failed(format!(
                        "closed form rejected at {} sigma",
                        v.tolerance_sigmas
                    )));
                }
            }
        }
        Command::Serve { port, bind, config } => {
            let mut cfg = ServiceConfig::load(config.as_deref())
                .map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(p) = port {
                cfg.port = *p;
            }
            if let Some(b) = bind {
                cfg.bind = b.clone();
            }
            let _ = tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .try_init();
            let runtime = tokio::runtime::Runtime::new()?;
            runtime
                .block_on(screening_service::serve(cfg))
                .map_err(|e| CliError::Failed(e.to_string()))?;
        }
    }
    Ok(())
}

fn render_simulation(
    report: &SimulationReport,
    verdict: Option<&Verdict>,
    format: OutputFormat,
) -> String {
    let check = |n: u32| verdict.and_then(|v| v.checks.iter().find(|c| c.n == n));
    match format {
        OutputFormat::Json => {
            let doc = json!({ "report": report, "verdict": verdict });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
        OutputFormat::Csv => {
            let mut s = String::from("n,estimate,standard_error,count,closed_form,passed\n");
            for row in &report.empirical_ppv_by_n {
                let c = check(row.n);
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    row.n,
                    opt(row.ppv.estimate),
                    opt(row.ppv.standard_error),
                    row.ppv.count,
                    opt(c.map(|c| c.closed_form)),
                    c.and_then(|c| c.passed)
                        .map(|p| p.to_string())
                        .unwrap_or_default(),
                ));
            }
            s
        }
        OutputFormat::Plain | OutputFormat::Markdown => {
            let mut s = format!("trials: {}\n", report.trials_used);
            for row in &report.empirical_ppv_by_n {
                s.push_str(&format!(
                    "n={}: ppv {} (se {}, m={})",
                    row.n,
                    opt4(row.ppv.estimate),
                    opt4(row.ppv.standard_error),
                    row.ppv.count
                ));
                if let Some(c) = check(row.n) {
                    let mark = match c.passed {
                        Some(true) => "ok",
                        Some(false) => "FAIL",
                        None => "n/a",
                    };
                    s.push_str(&format!(" closed form {:.4} {mark}", c.closed_form));
                }
                s.push('\n');
            }
            s.push_str(&format!(
                "npv (first result negative): {} (se {}, m={})\n",
                opt4(report.empirical_npv.estimate),
                opt4(report.empirical_npv.standard_error),
                report.empirical_npv.count
            ));
            if let Some(v) = verdict {
                s.push_str(&format!(
                    "verdict: {} at {} sigma\n",
                    if v.passed { "pass" } else { "fail" },
                    v.tolerance_sigmas
                ));
            }
            s
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt4(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}
