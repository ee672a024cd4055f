//! `weaversim` command-line runner: loads a scenario file, runs one
//! experiment and writes report.json with CSV sidecars and SVG plots.

pub mod artifacts;
pub mod commands;
pub mod plot;
pub mod report;
pub mod scenario_file;

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use weaversim_core::plan::Architecture;

pub use artifacts::{render_all, Artifact};
pub use report::{Body, Report, ToolInfo, REPORT_SCHEMA_VERSION};
pub use scenario_file::{ScenarioFile, SCHEMA_VERSION};

pub const REPORT_FILE: &str = "report.json";
pub const OUT_ENV: &str = "WEAVERSIM_OUT";

#[derive(Debug, Parser)]
#[command(name = "weaversim", version, about = "E-band Weaver phased-array transceiver simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Scenario file (JSON).
    #[arg(long, required_unless_present = "replot")]
    pub scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "weaversim-out")]
    pub out: PathBuf,
    /// Master seed, overriding the scenario's.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Regenerate sidecars and plots from an existing report.json.
    #[arg(long, conflicts_with_all = ["scenario", "seed"])]
    pub replot: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchArg {
    Direct,
    SlidingIf,
    Weaver,
}

impl From<ArchArg> for Architecture {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::Direct => Architecture::DirectConversion,
            ArchArg::SlidingIf => Architecture::SlidingIf,
            ArchArg::Weaver => Architecture::WeaverShared,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// LO tuning of each architecture and the optimized Weaver plan.
    Plan {
        #[command(flatten)]
        common: Common,
        /// Report one architecture only.
        #[arg(long, value_enum)]
        arch: Option<ArchArg>,
    },
    /// Image rejection, closed form against time-domain simulation.
    Irr {
        #[command(flatten)]
        common: Common,
        /// Sweep the gain/phase grid from the scenario's `irr` section.
        #[arg(long)]
        grid: bool,
    },
    /// Quantized beam steering and pattern metrics.
    Beam {
        #[command(flatten)]
        common: Common,
        /// Steering angles, `start:step:stop` or a comma list, degrees.
        #[arg(long, allow_hyphen_values = true)]
        angles: Option<String>,
    },
    /// End-to-end link EVM in both bands.
    Link {
        #[command(flatten)]
        common: Common,
        /// Fit the IF droop knob to the scenario's `fit` target first.
        #[arg(long)]
        calibrate: bool,
    },
    /// Power, EIRP and link-budget figures.
    Budget {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Plan { common, .. }
            | Command::Irr { common, .. }
            | Command::Beam { common, .. }
            | Command::Link { common, .. }
            | Command::Budget { common } => common,
        }
    }

    pub fn task(&self) -> anyhow::Result<Task> {
        Ok(match self {
            Command::Plan { arch, .. } => Task::Plan {
                arch: arch.map(Architecture::from),
            },
            Command::Irr { grid, .. } => Task::Irr { grid: *grid },
            Command::Beam { angles, .. } => Task::Beam {
                angles: angles.as_deref().map(commands::parse_angles).transpose()?,
            },
            Command::Link { calibrate, .. } => Task::Link { calibrate: *calibrate },
            Command::Budget { .. } => Task::Budget,
        })
    }
}

/// One experiment request, independent of argument parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Plan { arch: Option<Architecture> },
    Irr { grid: bool },
    Beam { angles: Option<Vec<f64>> },
    Link { calibrate: bool },
    Budget,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Plan { .. } => "plan",
            Task::Irr { .. } => "irr",
            Task::Beam { .. } => "beam",
            Task::Link { .. } => "link",
            Task::Budget => "budget",
        }
    }
}

pub fn execute(task: &Task, file: &ScenarioFile) -> anyhow::Result<Report> {
    let body = match task {
        Task::Plan { arch } => Body::Plan(commands::plan(file, *arch)?),
        Task::Irr { grid } => Body::Irr(commands::irr(file, *grid)?),
        Task::Beam { angles } => Body::Beam(commands::beam(file, angles.as_deref())?),
        Task::Link { calibrate } => Body::Link(commands::link(file, *calibrate)?),
        Task::Budget => Body::Budget(commands::budget(file)?),
    };
    Ok(Report {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: ToolInfo::current(),
        seed: file.seed,
        scenario: file.clone(),
        body,
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut builder = tempfile::Builder::new();
    builder.prefix(".weaversim-");
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder
        .tempfile_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub seed: u64,
    pub written: Vec<PathBuf>,
}

fn write_all(dir: &Path, report_json: Option<&str>, artifacts: &[Artifact]) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    if let Some(json) = report_json {
        let path = dir.join(REPORT_FILE);
        write_atomic(&path, json.as_bytes())?;
        written.push(path);
    }
    for a in artifacts {
        let path = dir.join(&a.name);
        write_atomic(&path, &a.bytes)?;
        written.push(path);
    }
    Ok(written)
}

pub fn load_report(path: &Path) -> anyhow::Result<Report> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

/// Runs one command. Progress lines, starting with the seed, go to `log`.
pub fn run(cmd: &Command, log: &mut dyn Write) -> anyhow::Result<Outcome> {
    let common = cmd.common();
    let task = cmd.task()?;
    if let Some(path) = &common.replot {
        let report = load_report(path)?;
        if report.body.command() != task.name() {
            bail!(
                "{} holds a `{}` report, not `{}`",
                path.display(),
                report.body.command(),
                task.name()
            );
        }
        writeln!(log, "seed: {}", report.seed)?;
        let written = write_all(&common.out, None, &render_all(&report)?)?;
        return Ok(Outcome {
            seed: report.seed,
            written,
        });
    }

    let path = common.scenario.as_ref().context("--scenario is required")?;
    let mut file = ScenarioFile::load(path)?;
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    writeln!(log, "seed: {}", file.seed)?;
    let json = execute(&task, &file)?.to_json()?;
    // Plots are drawn from the serialized report so a replot reproduces them.
    let reread: Report = serde_json::from_str(&json)?;
    let written = write_all(&common.out, Some(&json), &render_all(&reread)?)?;
    Ok(Outcome {
        seed: file.seed,
        written,
    })
}

/// Machine-readable form of a failure, printed to stderr by the binary.
pub fn error_json(err: &anyhow::Error) -> serde_json::Value {
    use weaversim_core::Error as CoreError;

    let message = format!("{err:#}");
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<serde_json::Error>() {
            return json!({ "error": {
                "kind": "schema",
                "message": message,
                "line": e.line(),
                "column": e.column(),
            }});
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            let detail = match e {
                CoreError::Stage { stage, .. } => json!({ "kind": "stage", "stage": stage.to_string() }),
                CoreError::InvalidParameter { name, .. } => json!({ "kind": "validation", "field": name }),
                CoreError::Infeasible(c) => json!({ "kind": "infeasible", "binding_constraint": c.to_string() }),
                _ => json!({ "kind": "computation" }),
            };
            let mut obj = detail;
            obj["message"] = json!(message);
            return json!({ "error": obj });
        }
        if let Some(e) = cause.downcast_ref::<scenario_file::SchemaVersionError>() {
            return json!({ "error": {
                "kind": "schema",
                "message": message,
                "schema_version": e.found,
            }});
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return json!({ "error": { "kind": "io", "message": message }});
        }
    }
    json!({ "error": { "kind": "invalid_input", "message": message }})
}
