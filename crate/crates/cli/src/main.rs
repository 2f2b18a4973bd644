//! `rvplan`: plan multi-tenant component instance assignments from sharing
//! requirements.
//!
//! Exit codes: 0 on success, 1 on domain errors (validation failures,
//! unknown names, coverage gaps), 2 on I/O or parse errors.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rvplan_core::allocation::Mode;
use rvplan_core::model::{Bundle, RvcId, TenantId};
use rvplan_core::pipeline::{self, explain, plan_all, ExplainError, PlanError, PlanOptions};
use rvplan_core::report::{export_dot, render_report, GraphKind, ReportFormat};
use rvplan_core::schema::{self, BundleSources};
use rvplan_core::simulate::{render_csv, sweep};

#[derive(Parser)]
#[command(
    name = "rvplan",
    version,
    about = "Deterministic instance planner for multi-tenant component deployments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// The five input documents of one planning run.
#[derive(Args)]
struct BundleArgs {
    /// Provider catalog (JSON)
    #[arg(long)]
    catalog: PathBuf,
    /// Configuration template (JSON); repeat for several applications
    #[arg(long = "template", required = true)]
    templates: Vec<PathBuf>,
    /// Tenant registry (JSON)
    #[arg(long)]
    registry: PathBuf,
    /// Functional requirements (JSON); repeatable
    #[arg(long = "functional")]
    functional: Vec<PathBuf>,
    /// Deployment requirements (JSON); repeatable
    #[arg(long = "deployment")]
    deployment: Vec<PathBuf>,
}

#[derive(Args)]
struct PlanFlags {
    /// Instance-sharing semantics
    #[arg(long, default_value = "shared-pool")]
    mode: Mode,
    /// Participating-tenant ceiling for the exact optimality audit;
    /// overrides the RV_EXACT_LIMIT environment variable
    #[arg(long)]
    exact_limit: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a bundle's cross-references and report errors and warnings
    Validate {
        #[command(flatten)]
        bundle: BundleArgs,
    },
    /// Run the full pipeline and emit one plan report per application
    Plan {
        #[command(flatten)]
        bundle: BundleArgs,
        #[command(flatten)]
        flags: PlanFlags,
        /// Report format
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        /// Write the report here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace one tenant's requirements on one component down to its instance
    Explain {
        #[command(flatten)]
        bundle: BundleArgs,
        #[command(flatten)]
        flags: PlanFlags,
        #[arg(long)]
        tenant: String,
        #[arg(long)]
        rvc: String,
    },
    /// Export a component's sharing-relationship or conflict graph as DOT
    Export {
        #[command(flatten)]
        bundle: BundleArgs,
        #[arg(long)]
        rvc: String,
        /// Which graph to export
        #[arg(long)]
        kind: GraphKind,
        /// Write the DOT document here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate seeded scenarios and sweep greedy vs exact instance counts
    Bench {
        /// Scenario list (JSON)
        #[arg(long)]
        spec: PathBuf,
        /// Participating-tenant ceiling for the exact solver
        #[arg(long)]
        exact_limit: Option<usize>,
        /// Write the CSV here instead of standard output
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum CliError {
    /// I/O or parse failure: exit 2.
    Input(String),
    /// Domain failure: exit 1.
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Domain(msg) => f.write_str(msg),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(err: PlanError) -> Self {
        CliError::Domain(err.to_string())
    }
}

impl From<ExplainError> for CliError {
    fn from(err: ExplainError) -> Self {
        CliError::Domain(err.to_string())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_output(out: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_sources(args: &BundleArgs) -> Result<BundleSources, CliError> {
    let mut sources = BundleSources {
        catalog: read(&args.catalog)?,
        registry: read(&args.registry)?,
        ..BundleSources::default()
    };
    for path in &args.templates {
        sources.templates.push(read(path)?);
    }
    for path in &args.functional {
        sources.functional.push(read(path)?);
    }
    for path in &args.deployment {
        sources.deployment.push(read(path)?);
    }
    Ok(sources)
}

fn load_bundle(args: &BundleArgs) -> Result<Bundle, CliError> {
    let sources = load_sources(args)?;
    let raw = schema::parse_bundle(&sources).map_err(|e| CliError::Input(e.to_string()))?;
    match Bundle::from_raw(raw) {
        Ok((bundle, _)) => Ok(bundle),
        Err(report) => Err(CliError::Domain(format!("bundle is invalid\n{report}"))),
    }
}

/// Flag beats the RV_EXACT_LIMIT environment variable beats the default.
fn resolve_exact_limit(flag: Option<usize>) -> Result<usize, CliError> {
    if let Some(limit) = flag {
        return Ok(limit);
    }
    match std::env::var("RV_EXACT_LIMIT") {
        Ok(value) => value
            .parse()
            .map_err(|_| CliError::Input(format!("RV_EXACT_LIMIT={value} is not a number"))),
        Err(_) => Ok(pipeline::DEFAULT_EXACT_LIMIT),
    }
}

fn plan_options(flags: &PlanFlags) -> Result<PlanOptions, CliError> {
    Ok(PlanOptions {
        mode: flags.mode,
        exact_limit: resolve_exact_limit(flags.exact_limit)?,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { bundle } => {
            let sources = load_sources(&bundle)?;
            let raw = schema::parse_bundle(&sources).map_err(|e| CliError::Input(e.to_string()))?;
            let report = rvplan_core::model::validate_bundle(&raw);
            println!("{report}");
            if report.is_clean() {
                Ok(())
            } else {
                Err(CliError::Domain("bundle is invalid".to_owned()))
            }
        }
        Command::Plan {
            bundle,
            flags,
            format,
            out,
        } => {
            let options = plan_options(&flags)?;
            let bundle = load_bundle(&bundle)?;
            let plans = plan_all(&bundle, &options)?;
            let rendered = match (format, plans.len()) {
                (ReportFormat::Json, 1) => render_report(&plans[0].report, ReportFormat::Json),
                (ReportFormat::Json, _) => {
                    let reports: Vec<_> = plans.iter().map(|p| &p.report).collect();
                    let mut json = serde_json::to_string_pretty(&reports)
                        .expect("report serialization is infallible");
                    json.push('\n');
                    json
                }
                (ReportFormat::Text, _) => plans
                    .iter()
                    .map(|p| render_report(&p.report, ReportFormat::Text))
                    .collect::<Vec<_>>()
                    .join("\n"),
            };
            write_output(out.as_ref(), &rendered)
        }
        Command::Explain {
            bundle,
            flags,
            tenant,
            rvc,
        } => {
            let options = plan_options(&flags)?;
            let bundle = load_bundle(&bundle)?;
            let text = explain(&bundle, &TenantId::new(tenant), &RvcId::new(rvc), &options)?;
            print!("{text}");
            Ok(())
        }
        Command::Export {
            bundle,
            rvc,
            kind,
            out,
        } => {
            let bundle = load_bundle(&bundle)?;
            let (relationship, conflict) = pipeline::graphs_for_rvc(&bundle, &RvcId::new(rvc))?;
            let dot = match kind {
                GraphKind::Relationship => export_dot(&relationship, kind),
                GraphKind::Conflict => export_dot(&conflict, kind),
            };
            write_output(out.as_ref(), &dot)
        }
        Command::Bench {
            spec,
            exact_limit,
            out,
        } => {
            let limit = resolve_exact_limit(exact_limit)?;
            let scenarios = schema::parse_scenarios(&read(&spec)?)
                .map_err(|e| CliError::Input(e.to_string()))?;
            let rows = sweep(&scenarios, limit).map_err(|e| CliError::Domain(e.to_string()))?;
            write_output(out.as_ref(), &render_csv(&rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
