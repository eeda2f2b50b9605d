//! Command-line surface: one subcommand per lifecycle step.
//!
//! Every command takes `--repo` (or the `ARGLIFE_REPO` environment variable;
//! the flag wins) and `--json` for line-delimited machine-readable output.
//! Exit statuses: 0 success, 1 domain error, 2 usage error, 3 I/O or
//! integrity error. Domain errors print a single `error[CODE]: ...` line on
//! standard error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::Utc;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use arglife_core::model::{is_error_free, validate, ElementId, Severity, Tag};
use arglife_core::pattern::BindingSet;
use arglife_core::represent::{Milestone, RepresentationKind, ScopeFilter, Stakeholder};
use arglife_core::Timestamp;

use crate::error::{Error, Result};
use crate::session::Workspace;

#[derive(Parser)]
#[command(
    name = "arglife",
    version,
    about = "Safety argumentation lifecycle workbench",
    propagate_version = true
)]
struct Cli {
    /// Repository path (falls back to $ARGLIFE_REPO, then the current directory)
    #[arg(long, global = true, env = "ARGLIFE_REPO", default_value = ".")]
    repo: PathBuf,
    /// Line-delimited JSON output instead of human-readable text
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a repository and baseline it from a pattern framework
    Init {
        /// Directory containing the framework's .gsnp pattern files
        #[arg(long)]
        framework: PathBuf,
        /// Name of the composed argumentation
        #[arg(long, default_value = "argumentation")]
        name: String,
    },
    /// Validate a stored revision (default: head)
    Validate {
        #[arg(long)]
        revision: Option<u64>,
    },
    /// Apply an evolution operation to the head revision
    Evolve {
        #[command(subcommand)]
        op: EvolveOp,
    },
    /// Show phase, maturity, context score, and gap counts of the head
    Status,
    /// List refinement signals for the system lifecycle
    Gaps,
    /// Manage evidence records
    Evidence {
        #[command(subcommand)]
        cmd: EvidenceCmd,
    },
    /// Manage milestones
    Milestone {
        #[command(subcommand)]
        cmd: MilestoneCmd,
    },
    /// Derive the representation for a milestone from a revision
    Derive {
        #[arg(long)]
        milestone: String,
        #[arg(long)]
        revision: Option<u64>,
    },
    /// Request or decide releases
    Release {
        #[command(subcommand)]
        cmd: ReleaseCmd,
    },
    /// Transfer the head revision into the conservation phase
    Deploy,
    /// Manage safety performance indicators
    Spi {
        #[command(subcommand)]
        cmd: SpiCmd,
    },
    /// Conservation-phase updates
    Update {
        #[command(subcommand)]
        cmd: UpdateCmd,
    },
    /// Show the revision history
    Log,
    /// Show the change set between two revisions
    Diff { base: u64, next: u64 },
    /// Check store integrity: re-validate, replay, and recompute metrics
    Check,
    /// Traceability tooling
    Trace {
        #[command(subcommand)]
        cmd: TraceCmd,
    },
}

#[derive(Subcommand)]
enum EvolveOp {
    /// Bind placeholders / expand multiplicities of a framework pattern
    Instantiate {
        #[arg(long)]
        pattern: String,
        /// JSON binding file: {"scalar": {...}, "expansions": [...]}
        #[arg(long)]
        bindings: PathBuf,
    },
    /// Remove an argumentation subtree (requires a justification)
    Eliminate {
        #[arg(long)]
        root: String,
        #[arg(long)]
        why: String,
    },
    /// Attach a .gsn fragment beneath an existing element
    Extend {
        #[arg(long)]
        fragment: PathBuf,
        #[arg(long)]
        at: String,
        #[arg(long)]
        why: String,
    },
}

#[derive(Subcommand)]
enum EvidenceCmd {
    /// Register evidence on a solution element
    Add {
        #[arg(long)]
        solution: String,
        #[arg(long)]
        uri: String,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        activity: String,
    },
    /// List registered evidence
    List,
}

#[derive(Subcommand)]
enum MilestoneCmd {
    /// Add a milestone definition
    Add(MilestoneArgs),
    /// List milestones
    List,
    /// Show the derivation history of a milestone
    Trace {
        #[arg(long)]
        id: String,
    },
}

#[derive(Args)]
struct MilestoneArgs {
    #[arg(long)]
    id: String,
    #[arg(long)]
    name: String,
    /// decision_maker | public | certification_agency | any other label (custom)
    #[arg(long)]
    stakeholder: String,
    #[arg(long)]
    purpose: String,
    /// release_document | safety_report | conformity_case
    #[arg(long)]
    kind: String,
    /// Comma-separated tags to include (default: all elements)
    #[arg(long)]
    include: Option<String>,
    /// Comma-separated tags to exclude
    #[arg(long)]
    exclude: Option<String>,
}

#[derive(Subcommand)]
enum ReleaseCmd {
    /// Derive a release document for the head revision and open a pending record
    Request {
        #[arg(long)]
        milestone: String,
    },
    /// Decide a pending release record
    Decide {
        #[arg(long)]
        id: u64,
        #[arg(long, conflicts_with = "deny")]
        grant: bool,
        #[arg(long)]
        deny: bool,
        #[arg(long)]
        by: String,
        #[arg(long)]
        conditions: Option<String>,
    },
    /// List release records
    List,
}

#[derive(Subcommand)]
enum SpiCmd {
    /// Register indicator definitions from a .spi file
    Define {
        #[arg(long)]
        file: PathBuf,
    },
    /// Ingest observations from a CSV file (spi_id,timestamp,value)
    Ingest {
        #[arg(long)]
        file: PathBuf,
    },
    /// Show indicator status
    Status,
}

#[derive(Subcommand)]
enum UpdateCmd {
    /// Propose a conservation update from an edited .gsn file
    Propose {
        #[arg(long)]
        change: PathBuf,
        #[arg(long)]
        why: String,
        /// Allow an update without an invalidated claim (qualitative trigger)
        #[arg(long)]
        qualitative: bool,
    },
}

#[derive(Subcommand)]
enum TraceCmd {
    /// Verify a stored representation against its source revision
    Verify {
        #[arg(long)]
        milestone: String,
        #[arg(long)]
        revision: u64,
    },
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error[{}]: {}", error.code(), error);
            error.exit_class()
        }
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::io(format!("reading {}", path.display())))
}

fn element_id(text: &str) -> Result<ElementId> {
    ElementId::new(text).map_err(|e| Error::InvalidInput {
        path: PathBuf::new(),
        what: "element identifier",
        detail: e.to_string(),
    })
}

fn parse_gsn_file(path: &Path) -> Result<arglife_core::model::Argument> {
    let text = read_file(path)?;
    arglife_core::text::parse_argument(&text).map_err(|errors| Error::Parse {
        path: path.to_path_buf(),
        errors,
    })
}

fn now() -> Timestamp {
    Utc::now()
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Init { framework, name } => {
            let (_, report) = Workspace::init(&cli.repo, framework, name, now())?;
            for warning in &report.warnings {
                eprintln!("{warning}");
            }
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "revision": report.revision.id,
                        "phase": report.revision.phase,
                        "patterns": report.patterns_installed,
                        "elements": report.revision.argument.elements.len(),
                        "warnings": report.warnings.iter().map(|w| w.code.clone()).collect::<Vec<_>>(),
                    })
                );
            } else {
                println!(
                    "initialized repository at {} with {} pattern(s); revision 0 ({} elements, phase {})",
                    cli.repo.display(),
                    report.patterns_installed,
                    report.revision.argument.elements.len(),
                    report.revision.phase
                );
            }
            Ok(0)
        }
        Command::Validate { revision } => {
            let workspace = Workspace::open(&cli.repo)?;
            let id = match revision {
                Some(id) => *id,
                None => workspace.head()?.id,
            };
            // Bypass the store's own validity gate so diagnostics of a
            // hand-edited revision are reported instead of an opaque
            // integrity failure.
            let argument = workspace.repo().read_argument_unchecked(id)?;
            let diagnostics = validate(&argument);
            for diagnostic in &diagnostics {
                if cli.json {
                    println!("{}", serde_json::to_string(diagnostic).expect("serializable"));
                } else {
                    println!("{diagnostic}");
                }
            }
            if is_error_free(&diagnostics) {
                if !cli.json {
                    println!("revision {id} is well formed");
                }
                Ok(0)
            } else {
                eprintln!(
                    "error[VALIDATION-FAILED]: revision {id} has {} error diagnostic(s)",
                    diagnostics.iter().filter(|d| d.severity == Severity::Error).count()
                );
                Ok(1)
            }
        }
        Command::Evolve { op } => {
            let workspace = Workspace::open(&cli.repo)?;
            let report = match op {
                EvolveOp::Instantiate { pattern, bindings } => {
                    let text = read_file(bindings)?;
                    let bindings: BindingSet =
                        serde_json::from_str(&text).map_err(|e| Error::InvalidInput {
                            path: bindings.clone(),
                            what: "binding file",
                            detail: e.to_string(),
                        })?;
                    workspace.instantiate(pattern, bindings, now())?
                }
                EvolveOp::Eliminate { root, why } => {
                    workspace.eliminate(element_id(root)?, why, now())?
                }
                EvolveOp::Extend { fragment, at, why } => {
                    let fragment = parse_gsn_file(fragment)?;
                    workspace.extend(fragment, element_id(at)?, why, now())?
                }
            };
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "revision": report.revision.id,
                        "phase": report.revision.phase,
                        "operation": report.revision.operation.as_ref().map(|o| o.kind_name()),
                        "elements": report.revision.argument.elements.len(),
                        "context_score": report.revision.context_score,
                        "dropped_optionals": report.dropped_optionals,
                    })
                );
            } else {
                println!(
                    "revision {} created ({} elements, context score {})",
                    report.revision.id,
                    report.revision.argument.elements.len(),
                    report.revision.context_score
                );
                if !report.dropped_optionals.is_empty() {
                    let dropped: Vec<&str> =
                        report.dropped_optionals.iter().map(|id| id.as_str()).collect();
                    println!("dropped unselected optional elements: {}", dropped.join(", "));
                }
            }
            Ok(0)
        }
        Command::Status => {
            let workspace = Workspace::open(&cli.repo)?;
            let status = workspace.status()?;
            if cli.json {
                println!("{}", serde_json::to_string(&status).expect("serializable"));
            } else {
                println!("revision:       {}", status.revision);
                println!("phase:          {}", status.phase);
                println!(
                    "maturity:       developed {} | instantiated {} | evidence {} | aggregate {}",
                    status.maturity.developed,
                    status.maturity.instantiated,
                    status.maturity.evidence,
                    status.maturity.aggregate
                );
                println!("context score:  {}", status.context_score);
                println!(
                    "placeholders:   {} of {} bound",
                    status.coverage.bound_placeholders, status.coverage.total_placeholders
                );
                println!(
                    "open elements:  {} undeveloped, {} uninstantiated",
                    status.coverage.undeveloped_elements.len(),
                    status.coverage.uninstantiated_elements.len()
                );
                if status.gap_counts.is_empty() {
                    println!("gaps:           none");
                } else {
                    let parts: Vec<String> = status
                        .gap_counts
                        .iter()
                        .map(|(kind, count)| format!("{kind}: {count}"))
                        .collect();
                    println!("gaps:           {}", parts.join(", "));
                }
                if !status.invalidated_claims.is_empty() {
                    let ids: Vec<&str> =
                        status.invalidated_claims.iter().map(|id| id.as_str()).collect();
                    println!("invalidated:    {}", ids.join(", "));
                }
            }
            Ok(0)
        }
        Command::Gaps => {
            let workspace = Workspace::open(&cli.repo)?;
            let signals = workspace.gaps()?;
            for signal in &signals {
                if cli.json {
                    println!("{}", serde_json::to_string(signal).expect("serializable"));
                } else {
                    let ids: Vec<&str> = signal.element_ids.iter().map(|id| id.as_str()).collect();
                    println!(
                        "{:?}: [{}] -> suggested activity: {}",
                        signal.kind,
                        ids.join(", "),
                        signal.suggested_activity
                    );
                }
            }
            if signals.is_empty() && !cli.json {
                println!("no gaps");
            }
            Ok(0)
        }
        Command::Evidence { cmd } => {
            let workspace = Workspace::open(&cli.repo)?;
            match cmd {
                EvidenceCmd::Add {
                    solution,
                    uri,
                    kind,
                    activity,
                } => {
                    let record =
                        workspace.add_evidence(element_id(solution)?, uri, kind, activity, now())?;
                    if cli.json {
                        println!("{}", serde_json::to_string(&record).expect("serializable"));
                    } else {
                        println!(
                            "evidence {} registered on {} ({})",
                            record.id, record.solution_id, record.artifact_kind
                        );
                    }
                }
                EvidenceCmd::List => {
                    for record in workspace.evidence()? {
                        if cli.json {
                            println!("{}", serde_json::to_string(&record).expect("serializable"));
                        } else {
                            println!(
                                "{}: {} <- {} [{}] by {}",
                                record.id,
                                record.solution_id,
                                record.artifact_uri,
                                record.artifact_kind,
                                record.produced_by_activity
                            );
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Milestone { cmd } => {
            let workspace = Workspace::open(&cli.repo)?;
            match cmd {
                MilestoneCmd::Add(args) => {
                    let milestone = milestone_from_args(args)?;
                    workspace.add_milestone(milestone)?;
                    if cli.json {
                        println!("{}", json!({"milestone": args.id, "added": true}));
                    } else {
                        println!("milestone {} added", args.id);
                    }
                }
                MilestoneCmd::List => {
                    for milestone in workspace.milestones()? {
                        if cli.json {
                            println!("{}", serde_json::to_string(&milestone).expect("serializable"));
                        } else {
                            println!(
                                "{}: \"{}\" ({}, {})",
                                milestone.id,
                                milestone.name,
                                milestone.kind.keyword(),
                                milestone.stakeholder.label()
                            );
                        }
                    }
                }
                MilestoneCmd::Trace { id } => {
                    for (revision, path) in workspace.milestone_trace(id)? {
                        if cli.json {
                            println!("{}", json!({"revision": revision, "document": path}));
                        } else {
                            println!("revision {revision}: {path}");
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Derive {
            milestone,
            revision,
        } => {
            let workspace = Workspace::open(&cli.repo)?;
            let report = workspace.derive(milestone, *revision, now())?;
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "document": report.document_path,
                        "trace": report.trace_path,
                        "sections": report.sections,
                        "uncovered": report.uncovered,
                    })
                );
            } else {
                println!(
                    "derived {} ({} section(s), {} uncovered element(s))",
                    report.document_path, report.sections, report.uncovered
                );
            }
            Ok(0)
        }
        Command::Release { cmd } => {
            let workspace = Workspace::open(&cli.repo)?;
            match cmd {
                ReleaseCmd::Request { milestone } => {
                    let record = workspace.request_release(milestone, now())?;
                    if cli.json {
                        println!("{}", serde_json::to_string(&record).expect("serializable"));
                    } else {
                        println!(
                            "release {} pending for revision {} ({})",
                            record.id, record.revision_id, record.document_path
                        );
                    }
                }
                ReleaseCmd::Decide {
                    id,
                    grant,
                    deny,
                    by,
                    conditions,
                } => {
                    if *grant == *deny {
                        return Err(Error::InvalidInput {
                            path: PathBuf::new(),
                            what: "release decision",
                            detail: "exactly one of --grant or --deny is required".to_string(),
                        });
                    }
                    let record =
                        workspace.decide_release(*id, *grant, by, conditions.clone(), now())?;
                    if cli.json {
                        println!("{}", serde_json::to_string(&record).expect("serializable"));
                    } else {
                        println!(
                            "release {} {:?} by {}",
                            record.id,
                            record.decision,
                            record.decided_by.as_deref().unwrap_or("unknown")
                        );
                    }
                }
                ReleaseCmd::List => {
                    for record in workspace.releases()? {
                        if cli.json {
                            println!("{}", serde_json::to_string(&record).expect("serializable"));
                        } else {
                            println!(
                                "{}: revision {} / {} -> {:?}",
                                record.id, record.revision_id, record.milestone_id, record.decision
                            );
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Deploy => {
            let workspace = Workspace::open(&cli.repo)?;
            let revision = workspace.deploy(now())?;
            if cli.json {
                println!(
                    "{}",
                    json!({"revision": revision.id, "phase": revision.phase})
                );
            } else {
                println!(
                    "revision {} deployed; conservation phase active",
                    revision.id
                );
            }
            Ok(0)
        }
        Command::Spi { cmd } => {
            let workspace = Workspace::open(&cli.repo)?;
            match cmd {
                SpiCmd::Define { file } => {
                    let text = read_file(file)?;
                    let definitions = workspace.define_spis(file, &text)?;
                    if cli.json {
                        for definition in &definitions {
                            println!("{}", serde_json::to_string(definition).expect("serializable"));
                        }
                    } else {
                        println!("registered {} indicator(s)", definitions.len());
                    }
                }
                SpiCmd::Ingest { file } => {
                    let text = read_file(file)?;
                    let batch = crate::store::parse_observations_csv(file, &text)?;
                    let count = batch.len();
                    let violations = workspace.ingest(batch)?;
                    if cli.json {
                        for violation in &violations {
                            println!("{}", serde_json::to_string(violation).expect("serializable"));
                        }
                    } else {
                        println!(
                            "ingested {count} observation(s); {} violation(s)",
                            violations.len()
                        );
                        for violation in &violations {
                            let claims: Vec<&str> =
                                violation.affected_claims.iter().map(|id| id.as_str()).collect();
                            println!(
                                "violation: {} window value {} {} {} (claims: {})",
                                violation.spi_id,
                                violation.window_value,
                                violation.comparator.token(),
                                violation.threshold,
                                claims.join(", ")
                            );
                        }
                    }
                }
                SpiCmd::Status => {
                    for entry in workspace.spi_status()? {
                        if cli.json {
                            println!("{}", serde_json::to_string(&entry).expect("serializable"));
                        } else {
                            let current = entry
                                .window_value
                                .map(|v| v.to_display_string())
                                .unwrap_or_else(|| "insufficient data".to_string());
                            let state = match entry.within_limits {
                                None => "not evaluated",
                                Some(true) => "within limits",
                                Some(false) => "violated",
                            };
                            println!(
                                "{}: {} {} {} [{}] window {} -> {} ({}, {} outstanding)",
                                entry.id,
                                entry.metric_name,
                                entry.comparator.token(),
                                entry.threshold,
                                entry.unit,
                                entry.window.canonical(),
                                current,
                                state,
                                entry.outstanding_violations
                            );
                        }
                    }
                }
            }
            Ok(0)
        }
        Command::Update { cmd } => {
            let workspace = Workspace::open(&cli.repo)?;
            match cmd {
                UpdateCmd::Propose {
                    change,
                    why,
                    qualitative,
                } => {
                    let new_argument = parse_gsn_file(change)?;
                    let report = workspace.propose_update(new_argument, why, *qualitative, now())?;
                    for dangling in &report.dangling {
                        let missing: Vec<&str> =
                            dangling.missing_claims.iter().map(|id| id.as_str()).collect();
                        eprintln!(
                            "warning[DANGLING-SPI]: indicator {} lost claim(s) {}",
                            dangling.spi_id,
                            missing.join(", ")
                        );
                    }
                    if cli.json {
                        println!(
                            "{}",
                            json!({
                                "revision": report.revision.id,
                                "phase": report.revision.phase,
                                "addressed_violations": report.addressed_violations,
                                "dangling_spis": report.dangling.len(),
                            })
                        );
                    } else {
                        println!(
                            "conservation update recorded as revision {} (addresses {} violation(s))",
                            report.revision.id, report.addressed_violations
                        );
                    }
                }
            }
            Ok(0)
        }
        Command::Log => {
            let workspace = Workspace::open(&cli.repo)?;
            let log = workspace.log()?;
            for entry in &log.revisions {
                if cli.json {
                    println!("{}", serde_json::to_string(entry).expect("serializable"));
                } else {
                    println!(
                        "revision {:>3}  {:<12} {:<20} elements {:<4} context {:<4} maturity {}",
                        entry.revision,
                        entry.phase.to_string(),
                        entry.operation.as_deref().unwrap_or("baseline"),
                        entry.elements,
                        entry.context_score,
                        entry.maturity_aggregate
                    );
                }
            }
            if cli.json {
                println!(
                    "{}",
                    json!({
                        "summary": {
                            "deployed_revision": log.deployed_revision,
                            "conservation_updates": log.conservation_updates,
                        }
                    })
                );
            } else {
                match log.deployed_revision {
                    Some(m) => println!(
                        "deployed at revision {m}; {} conservation update(s)",
                        log.conservation_updates
                    ),
                    None => println!("not deployed yet"),
                }
            }
            Ok(0)
        }
        Command::Diff { base, next } => {
            let workspace = Workspace::open(&cli.repo)?;
            let change = workspace.diff_revisions(*base, *next)?;
            if cli.json {
                println!("{}", serde_json::to_string(&change).expect("serializable"));
            } else if change.is_empty() {
                println!("no differences");
            } else {
                for id in change.added.keys() {
                    println!("added:    {id}");
                }
                for id in &change.removed {
                    println!("removed:  {id}");
                }
                for id in change.modified.keys() {
                    println!("modified: {id}");
                }
                for relation in &change.added_relations {
                    println!(
                        "relation added:   {} -> {} ({})",
                        relation.source,
                        relation.target,
                        relation.kind.keyword()
                    );
                }
                for relation in &change.removed_relations {
                    println!(
                        "relation removed: {} -> {} ({})",
                        relation.source,
                        relation.target,
                        relation.kind.keyword()
                    );
                }
            }
            Ok(0)
        }
        Command::Check => {
            let workspace = Workspace::open(&cli.repo)?;
            let report = workspace.check()?;
            for finding in &report.findings {
                if cli.json {
                    println!("{}", serde_json::to_string(finding).expect("serializable"));
                } else {
                    println!("{}: {}", finding.code, finding.detail);
                }
            }
            if report.passed() {
                if !cli.json {
                    println!("store integrity verified");
                }
                Ok(0)
            } else {
                eprintln!(
                    "error[INTEGRITY-ERROR]: {} finding(s)",
                    report.findings.len()
                );
                Ok(3)
            }
        }
        Command::Trace { cmd } => {
            let workspace = Workspace::open(&cli.repo)?;
            match cmd {
                TraceCmd::Verify {
                    milestone,
                    revision,
                } => {
                    let report = workspace.verify_trace(milestone, *revision)?;
                    for finding in &report.findings {
                        if cli.json {
                            println!("{}", serde_json::to_string(finding).expect("serializable"));
                        } else {
                            let ids: Vec<&str> = finding.ids.iter().map(|id| id.as_str()).collect();
                            println!("{}: {} [{}]", finding.check, finding.detail, ids.join(", "));
                        }
                    }
                    if report.passed() {
                        if !cli.json {
                            println!("traceability verified");
                        }
                        Ok(0)
                    } else {
                        eprintln!(
                            "error[TRACE-VERIFICATION-FAILED]: {} finding(s)",
                            report.findings.len()
                        );
                        Ok(1)
                    }
                }
            }
        }
    }
}

fn milestone_from_args(args: &MilestoneArgs) -> Result<Milestone> {
    let stakeholder = match args.stakeholder.as_str() {
        "decision_maker" => Stakeholder::DecisionMaker,
        "public" => Stakeholder::Public,
        "certification_agency" => Stakeholder::CertificationAgency,
        other => Stakeholder::Custom(other.to_string()),
    };
    let kind = match args.kind.as_str() {
        "release_document" => RepresentationKind::ReleaseDocument,
        "safety_report" => RepresentationKind::SafetyReport,
        "conformity_case" => RepresentationKind::ConformityCase,
        other => {
            return Err(Error::InvalidInput {
                path: PathBuf::new(),
                what: "representation kind",
                detail: format!(
                    "`{other}` is not one of release_document, safety_report, conformity_case"
                ),
            })
        }
    };
    if !arglife_core::model::is_valid_ident(&args.id) {
        return Err(Error::InvalidInput {
            path: PathBuf::new(),
            what: "milestone identifier",
            detail: format!("`{}` is not a valid identifier", args.id),
        });
    }
    let parse_tags = |list: &Option<String>| -> Result<BTreeSet<Tag>> {
        let mut tags = BTreeSet::new();
        if let Some(list) = list {
            for part in list.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                tags.insert(Tag::new(part).map_err(|e| Error::InvalidInput {
                    path: PathBuf::new(),
                    what: "tag",
                    detail: e.to_string(),
                })?);
            }
        }
        Ok(tags)
    };
    Ok(Milestone {
        id: args.id.clone(),
        name: args.name.clone(),
        stakeholder,
        purpose: args.purpose.clone(),
        kind,
        scope: ScopeFilter {
            include: parse_tags(&args.include)?,
            exclude: parse_tags(&args.exclude)?,
        },
    })
}
