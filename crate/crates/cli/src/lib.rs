//! Command-line pipeline: build plans, audit them, sample couplings, and
//! run the metric-space construction end to end.
//!
//! All randomness comes from `--seed` (default [`DEFAULT_SEED`]). Sample `i`
//! uses generator stream `i` of that seed, so outputs depend only on the
//! inputs, the seed and the sample count.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use coupling_core::coupling::{build_plan, CouplingPlan, CouplingSampler, DEFAULT_ENUMERATION_CAP};
use coupling_core::rng::{self, DEFAULT_SEED};
use coupling_core::serial::{laws_from_json, model_from_json, plan_from_json, plan_to_json, spec_from_json, tree_to_json, SampleRecord};
use coupling_core::skorohod::{build_skorohod_coupling, Backend};
use coupling_core::verify::{
    audit_joint, audit_plan, audit_skorohod, mc_agreement, mc_decoder_marginals, mc_distance, mc_marginals,
    VerificationReport,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: coupling_core::Error },
    #[error(transparent)]
    Core(#[from] coupling_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Write the coupling plan of a spec.
    Build,
    /// Audit a plan (or a spec's plan) and write a report.
    Verify,
    /// Stream coupled samples as JSON lines.
    Sample,
    /// Partition, digitize, couple and verify a metric model.
    Skorohod,
    /// Render a report as text.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Table,
    Linf,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Table => Backend::Table,
            BackendArg::Linf => Backend::Linf,
        }
    }
}

#[derive(Debug, Clone, Parser)]
#[command(name = "coupling", version, about = "Exact widening-window couplings of finite processes")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Process spec JSON.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Plan JSON written by `build`.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Metric model JSON for `skorohod`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Law sequence on the model's points for `skorohod`.
    #[arg(long)]
    pub laws: Option<PathBuf>,
    /// Report JSON for `report`.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Output file; a directory for `skorohod`. Defaults to stdout elsewhere.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Monte Carlo sample count (0 skips sampling checks in `verify`).
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Partition depth K.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Override the model's metric backend.
    #[arg(long, value_enum)]
    pub backend: Option<BackendArg>,
    /// Largest joint support enumerated for exact marginal checks.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
}

fn require<'a>(path: &'a Option<PathBuf>, flag: &str, command: Command) -> Result<&'a Path> {
    let path = path
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("{command:?} needs --{flag}").to_lowercase()))?;
    if !path.is_file() {
        return Err(CliError::Usage(format!("--{flag} {}: no such file", path.display())));
    }
    Ok(path)
}

fn check_output(out: &Option<PathBuf>) -> Result<()> {
    if let Some(parent) = out.as_deref().and_then(Path::parent) {
        if !parent.as_os_str().is_empty() && !parent.is_dir() {
            return Err(CliError::Usage(format!("--out {}: parent directory missing", parent.display())));
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T>(path: &Path, f: impl FnOnce(&str) -> coupling_core::Result<T>) -> Result<T> {
    f(&read(path)?).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

/// The plan from `--plan`, or built from `--spec`.
fn load_plan(config: &RunConfig) -> Result<CouplingPlan> {
    match (&config.plan, &config.spec) {
        (Some(_), None) => parse(require(&config.plan, "plan", config.command)?, plan_from_json),
        (None, Some(_)) => {
            let spec = parse(require(&config.spec, "spec", config.command)?, spec_from_json)?;
            Ok(build_plan(&spec)?)
        }
        _ => Err(CliError::Usage("give exactly one of --plan or --spec".into())),
    }
}

/// Exact audits, the joint-law check when enumerable (3-sigma marginals
/// otherwise), and the Monte Carlo agreement guard.
pub fn verify_plan(plan: &CouplingPlan, samples: u64, seed: u64, cap: u128) -> Result<VerificationReport> {
    let mut report = audit_plan(plan);
    match audit_joint(plan, cap) {
        Ok(joint) => report.merge(joint),
        Err(coupling_core::Error::TooLarge { .. }) => report.merge(mc_marginals(plan, samples.max(1), seed)?),
        Err(e) => return Err(e.into()),
    }
    if samples > 0 {
        report.merge(mc_agreement(plan, samples, seed)?);
    }
    report.provenance.seed = Some(seed);
    Ok(report)
}

fn sample(config: &RunConfig) -> Result<()> {
    let plan = load_plan(config)?;
    let sampler = CouplingSampler::new(&plan)?;
    let mut sink: Box<dyn Write> = match &config.out {
        Some(path) => Box::new(BufWriter::new(fs::File::create(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let io_err = |source| CliError::Io {
        path: config.out.clone().unwrap_or_else(|| "<stdout>".into()),
        source,
    };
    let mut written = Ok(());
    for i in 0..config.samples {
        let s = sampler.sample(&mut rng::stream(config.seed, i))?;
        written = writeln!(sink, "{}", SampleRecord::new(&plan, config.seed, i, &s).to_line());
        if written.is_err() {
            break;
        }
    }
    match written.and_then(|()| sink.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(io_err(e)),
        _ => Ok(()),
    }
}

fn skorohod(config: &RunConfig) -> Result<bool> {
    let model_path = require(&config.model, "model", config.command)?;
    let laws_path = require(&config.laws, "laws", config.command)?;
    let out = config
        .out
        .as_deref()
        .ok_or_else(|| CliError::Usage("skorohod needs --out <directory>".into()))?;
    let mut model = parse(model_path, model_from_json)?;
    if let Some(b) = config.backend {
        model = model.with_backend(b.into())?;
    }
    let laws = parse(laws_path, |t| laws_from_json(t, &model))?;
    if config.depth == 0 {
        return Err(CliError::Usage("--depth must be at least 1".into()));
    }
    fs::create_dir_all(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;

    let coupling = build_skorohod_coupling(&model, &laws, config.depth)?;
    let (mut report, enumerated) = audit_skorohod(&coupling, config.cap)?;
    report.merge(mc_distance(&coupling, config.samples, config.seed)?);
    if !enumerated {
        report.merge(mc_decoder_marginals(&coupling, config.samples.max(1), config.seed)?);
    }
    report.provenance.seed = Some(config.seed);
    write_file(&out.join("tree.json"), &tree_to_json(&model, &coupling.tree))?;
    write_file(&out.join("plan.json"), &plan_to_json(&coupling.plan))?;
    write_file(&out.join("report.json"), &report.to_json())?;
    emit(&None, report.render_text().trim_end())?;
    Ok(report.passed())
}

/// Runs one subcommand. Returns the process exit code: 0 on success, 1 when
/// a verification check fails.
pub fn run(config: &RunConfig) -> Result<u8> {
    check_output(&config.out)?;
    let passed = match config.command {
        Command::Build => {
            let spec = parse(require(&config.spec, "spec", config.command)?, spec_from_json)?;
            emit(&config.out, &plan_to_json(&build_plan(&spec)?))?;
            true
        }
        Command::Verify => {
            let plan = load_plan(config)?;
            let report = verify_plan(&plan, config.samples, config.seed, config.cap)?;
            match &config.out {
                Some(path) => {
                    write_file(path, &report.to_json())?;
                    emit(&None, report.render_text().trim_end())?;
                }
                None => emit(&None, &report.to_json())?,
            }
            if !report.exact_passed() {
                for f in report.failures() {
                    eprintln!("exact check failed: {} ({})", f.name, f.witness.as_deref().unwrap_or(""));
                }
            }
            report.passed()
        }
        Command::Sample => {
            sample(config)?;
            true
        }
        Command::Skorohod => skorohod(config)?,
        Command::Report => {
            let report = parse(require(&config.report, "report", config.command)?, VerificationReport::from_json)?;
            emit(&config.out, report.render_text().trim_end())?;
            true
        }
    };
    Ok(if passed { 0 } else { 1 })
}
