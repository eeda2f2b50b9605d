//! On-disk repository: append-only, human-diffable, replayable.
//!
//! Layout (version 1):
//!
//! ```text
//! <root>/
//!   version                      layout version
//!   revisions/<id>/argument.gsn  canonical serialization
//!   revisions/<id>/meta.json     phase, parent, operation, metrics
//!   framework/*.gsnp             the baselined pattern framework
//!   spi/definitions.spi          indicator definitions
//!   spi/observations.csv         field observations (spi_id,timestamp,value)
//!   milestones/milestones        milestone records
//!   evidence.jsonl               evidence records, one per line
//!   releases.jsonl               release request/decision events
//!   representations/<milestone>/<revision>.md + .trace.json
//! ```
//!
//! Revision directories are written to a temporary name and renamed into
//! place, so a repository is never observable with a meta file but no
//! argument. Existing revision files are never modified or deleted. Mutating
//! commands hold an advisory lock file; readers never block.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use arglife_core::conservation::{SpiDefinition, SpiObservation};
use arglife_core::coupling::{EvidenceRecord, ReleaseDecision, ReleaseRecord};
use arglife_core::lifecycle::{
    apply_op_to_argument, ArgOperation, MaturityScore, MaturityWeights, MetricContext, Phase,
    Revision,
};
use arglife_core::model::{is_error_free, validate};
use arglife_core::pattern::{parse_pattern, Framework};
use arglife_core::rational::Rational;
use arglife_core::represent::{Milestone, Representation, TraceabilityManifest};
use arglife_core::text::{parse_argument, serialize_argument};
use arglife_core::Timestamp;

use crate::docfile;
use crate::error::{Error, Result};

pub const LAYOUT_VERSION: u32 = 1;

pub struct Repository {
    root: PathBuf,
}

/// Advisory writer lock; removed on drop.
pub struct RepoLock {
    path: PathBuf,
}

impl Drop for RepoLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Sidecar metadata stored next to each revision's canonical argument.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RevisionMeta {
    pub id: u64,
    pub parent: Option<u64>,
    pub phase: Phase,
    pub operation: Option<ArgOperation>,
    pub maturity: MaturityScore,
    pub context_score: u64,
    pub created_at: Timestamp,
}

/// A release log event; decisions reference the request line they resolve.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum ReleaseEvent {
    Requested {
        id: u64,
        revision_id: u64,
        milestone_id: String,
        document_path: String,
        trace_path: String,
        requested_at: Timestamp,
    },
    Decided {
        id: u64,
        decision: ReleaseDecision,
        decided_by: String,
        decided_at: Timestamp,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        conditions: Option<String>,
    },
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct IntegrityFinding {
    pub code: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct IntegrityReport {
    pub findings: Vec<IntegrityFinding>,
}

impl IntegrityReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }

    fn push(&mut self, code: &str, detail: impl Into<String>) {
        self.findings.push(IntegrityFinding {
            code: code.to_string(),
            detail: detail.into(),
        });
    }
}

impl Repository {
    /// Creates the layout at `path`, which must be empty or nonexistent.
    pub fn init(path: &Path) -> Result<Repository> {
        if path.exists() {
            let mut entries =
                fs::read_dir(path).map_err(Error::io(format!("reading {}", path.display())))?;
            if entries.next().is_some() {
                return Err(Error::NotEmpty {
                    path: path.to_path_buf(),
                });
            }
        }
        for dir in ["revisions", "framework", "spi", "milestones", "representations"] {
            fs::create_dir_all(path.join(dir))
                .map_err(Error::io(format!("creating {}/{dir}", path.display())))?;
        }
        let write = |name: &str, contents: &str| -> Result<()> {
            fs::write(path.join(name), contents)
                .map_err(Error::io(format!("writing {}/{name}", path.display())))
        };
        write("version", &format!("{LAYOUT_VERSION}\n"))?;
        write("evidence.jsonl", "")?;
        write("releases.jsonl", "")?;
        write("spi/definitions.spi", "")?;
        write("spi/observations.csv", "spi_id,timestamp,value\n")?;
        write("milestones/milestones", "")?;
        Ok(Repository {
            root: path.to_path_buf(),
        })
    }

    pub fn open(path: &Path) -> Result<Repository> {
        let version_file = path.join("version");
        let text = fs::read_to_string(&version_file).map_err(|_| Error::NotARepository {
            path: path.to_path_buf(),
        })?;
        let found: u32 = text.trim().parse().map_err(|_| Error::NotARepository {
            path: path.to_path_buf(),
        })?;
        if found != LAYOUT_VERSION {
            return Err(Error::UnsupportedLayout {
                found,
                expected: LAYOUT_VERSION,
            });
        }
        Ok(Repository {
            root: path.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn lock(&self) -> Result<RepoLock> {
        let path = self.root.join(".lock");
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut file) => {
                let _ = writeln!(file, "{}", std::process::id());
                Ok(RepoLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                Err(Error::Locked { path })
            }
            Err(e) => Err(Error::io(format!("creating {}", path.display()))(e)),
        }
    }

    // -- revisions ---------------------------------------------------------

    pub fn revision_ids(&self) -> Result<Vec<u64>> {
        let dir = self.root.join("revisions");
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(Error::io(format!("reading {}", dir.display())))? {
            let entry = entry.map_err(Error::io("reading revisions directory"))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if let Ok(id) = name.parse::<u64>() {
                ids.push(id);
            }
        }
        ids.sort_unstable();
        Ok(ids)
    }

    pub fn head_id(&self) -> Result<Option<u64>> {
        Ok(self.revision_ids()?.into_iter().max())
    }

    fn revision_dir(&self, id: u64) -> PathBuf {
        self.root.join("revisions").join(id.to_string())
    }

    pub fn write_revision(&self, revision: &Revision) -> Result<()> {
        let final_dir = self.revision_dir(revision.id);
        if final_dir.exists() {
            return Err(Error::DuplicateRevision { id: revision.id });
        }
        let argument_text = serialize_argument(&revision.argument)?;
        let meta = RevisionMeta {
            id: revision.id,
            parent: revision.parent,
            phase: revision.phase,
            operation: revision.operation.clone(),
            maturity: revision.maturity,
            context_score: revision.context_score,
            created_at: revision.created_at,
        };
        let mut meta_text = serde_json::to_string_pretty(&meta).map_err(|e| Error::Integrity {
            detail: format!("cannot serialize revision meta: {e}"),
        })?;
        meta_text.push('\n');

        let tmp_dir = self.root.join("revisions").join(format!(".tmp-{}", revision.id));
        if tmp_dir.exists() {
            fs::remove_dir_all(&tmp_dir)
                .map_err(Error::io(format!("clearing {}", tmp_dir.display())))?;
        }
        fs::create_dir_all(&tmp_dir).map_err(Error::io(format!("creating {}", tmp_dir.display())))?;
        fs::write(tmp_dir.join("argument.gsn"), argument_text)
            .map_err(Error::io("writing argument.gsn"))?;
        fs::write(tmp_dir.join("meta.json"), meta_text).map_err(Error::io("writing meta.json"))?;
        fs::rename(&tmp_dir, &final_dir)
            .map_err(Error::io(format!("publishing revision {}", revision.id)))?;
        Ok(())
    }

    pub fn read_meta(&self, id: u64) -> Result<RevisionMeta> {
        let path = self.revision_dir(id).join("meta.json");
        let text = fs::read_to_string(&path).map_err(|_| Error::UnknownRevision { id })?;
        let meta: RevisionMeta = serde_json::from_str(&text).map_err(|e| Error::Integrity {
            detail: format!("{}: unreadable meta: {e}", path.display()),
        })?;
        if meta.id != id {
            return Err(Error::Integrity {
                detail: format!("{}: meta claims id {}", path.display(), meta.id),
            });
        }
        Ok(meta)
    }

    /// Reads and parses a stored argument without the validity gate, for
    /// explicit validation of possibly hand-edited repositories.
    pub fn read_argument_unchecked(&self, id: u64) -> Result<arglife_core::model::Argument> {
        let path = self.revision_dir(id).join("argument.gsn");
        let text = fs::read_to_string(&path).map_err(|_| Error::UnknownRevision { id })?;
        parse_argument(&text).map_err(|errors| Error::Integrity {
            detail: format!("{}: stored argument does not parse: {}", path.display(), errors[0]),
        })
    }

    /// Reads a stored revision, re-validating the argument on the way in.
    pub fn read_revision(&self, id: u64) -> Result<Revision> {
        let dir = self.revision_dir(id);
        let argument_path = dir.join("argument.gsn");
        let text = fs::read_to_string(&argument_path).map_err(|_| Error::UnknownRevision { id })?;
        let argument = parse_argument(&text).map_err(|errors| Error::Integrity {
            detail: format!(
                "{}: stored argument does not parse: {}",
                argument_path.display(),
                errors[0]
            ),
        })?;
        let diagnostics = validate(&argument);
        if !is_error_free(&diagnostics) {
            return Err(Error::Integrity {
                detail: format!(
                    "{}: stored argument fails validation ({})",
                    argument_path.display(),
                    diagnostics[0]
                ),
            });
        }
        let meta = self.read_meta(id)?;
        Ok(Revision {
            id: meta.id,
            parent: meta.parent,
            phase: meta.phase,
            argument,
            operation: meta.operation,
            created_at: meta.created_at,
            maturity: meta.maturity,
            context_score: meta.context_score,
        })
    }

    // -- framework ---------------------------------------------------------

    /// Copies `.gsnp` files from a directory into the repository. The
    /// framework is the immutable basis for replay; it is installed once at
    /// baselining.
    pub fn install_framework(&self, source: &Path) -> Result<usize> {
        let mut names: Vec<PathBuf> = Vec::new();
        for entry in
            fs::read_dir(source).map_err(Error::io(format!("reading {}", source.display())))?
        {
            let entry = entry.map_err(Error::io("reading framework directory"))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) == Some("gsnp") {
                names.push(path);
            }
        }
        names.sort();
        for path in &names {
            let file_name = path.file_name().expect("file has a name");
            fs::copy(path, self.root.join("framework").join(file_name))
                .map_err(Error::io(format!("copying {}", path.display())))?;
        }
        Ok(names.len())
    }

    pub fn load_framework(&self) -> Result<Framework> {
        let dir = self.root.join("framework");
        let mut files: Vec<PathBuf> = Vec::new();
        for entry in fs::read_dir(&dir).map_err(Error::io(format!("reading {}", dir.display())))? {
            let entry = entry.map_err(Error::io("reading framework directory"))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) == Some("gsnp") {
                files.push(path);
            }
        }
        files.sort();
        let mut patterns = Vec::new();
        for path in files {
            let text = fs::read_to_string(&path)
                .map_err(Error::io(format!("reading {}", path.display())))?;
            let pattern = parse_pattern(&text).map_err(|errors| Error::Parse {
                path: path.clone(),
                errors,
            })?;
            patterns.push(pattern);
        }
        Framework::new(patterns).map_err(|e| Error::Lifecycle(e.into()))
    }

    // -- indicators --------------------------------------------------------

    pub fn load_spi_definitions(&self) -> Result<Vec<SpiDefinition>> {
        let path = self.root.join("spi/definitions.spi");
        let text =
            fs::read_to_string(&path).map_err(Error::io(format!("reading {}", path.display())))?;
        arglife_core::conservation::parse_spi_file(&text)
            .map_err(|errors| Error::Parse { path, errors })
    }

    pub fn append_spi_definition(&self, definition: &SpiDefinition) -> Result<()> {
        let path = self.root.join("spi/definitions.spi");
        let mut file = fs::OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(Error::io(format!("opening {}", path.display())))?;
        file.write_all(arglife_core::conservation::serialize_spi(definition).as_bytes())
            .map_err(Error::io("appending indicator definition"))
    }

    pub fn load_observations(&self) -> Result<Vec<SpiObservation>> {
        let path = self.root.join("spi/observations.csv");
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(&path)
            .map_err(|e| Error::Integrity {
                detail: format!("{}: {e}", path.display()),
            })?;
        let mut observations = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| Error::Integrity {
                detail: format!("{}: {e}", path.display()),
            })?;
            observations.push(parse_observation_record(&path, &record)?);
        }
        Ok(observations)
    }

    pub fn append_observations(&self, observations: &[SpiObservation]) -> Result<()> {
        let path = self.root.join("spi/observations.csv");
        let file = fs::OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(Error::io(format!("opening {}", path.display())))?;
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        for observation in observations {
            writer
                .write_record([
                    observation.spi_id.as_str(),
                    &observation.timestamp.to_rfc3339(),
                    &observation.value.to_display_string(),
                ])
                .map_err(|e| Error::Integrity {
                    detail: format!("appending observation: {e}"),
                })?;
        }
        writer.flush().map_err(Error::io("flushing observations"))
    }

    // -- milestones --------------------------------------------------------

    pub fn load_milestones(&self) -> Result<Vec<Milestone>> {
        let path = self.root.join("milestones/milestones");
        let text =
            fs::read_to_string(&path).map_err(Error::io(format!("reading {}", path.display())))?;
        arglife_core::represent::parse_milestones_file(&text)
            .map_err(|errors| Error::Parse { path, errors })
    }

    pub fn append_milestone(&self, milestone: &Milestone) -> Result<()> {
        let path = self.root.join("milestones/milestones");
        let mut file = fs::OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(Error::io(format!("opening {}", path.display())))?;
        file.write_all(arglife_core::represent::serialize_milestone(milestone).as_bytes())
            .map_err(Error::io("appending milestone"))
    }

    // -- evidence and releases ----------------------------------------------

    pub fn load_evidence(&self) -> Result<Vec<EvidenceRecord>> {
        read_jsonl(&self.root.join("evidence.jsonl"))
    }

    pub fn append_evidence(&self, record: &EvidenceRecord) -> Result<()> {
        append_jsonl(&self.root.join("evidence.jsonl"), record)
    }

    pub fn load_release_events(&self) -> Result<Vec<ReleaseEvent>> {
        read_jsonl(&self.root.join("releases.jsonl"))
    }

    pub fn append_release_event(&self, event: &ReleaseEvent) -> Result<()> {
        append_jsonl(&self.root.join("releases.jsonl"), event)
    }

    /// Folds the event log into current release records.
    pub fn load_releases(&self) -> Result<Vec<ReleaseRecord>> {
        let mut records: Vec<ReleaseRecord> = Vec::new();
        for event in self.load_release_events()? {
            match event {
                ReleaseEvent::Requested {
                    id,
                    revision_id,
                    milestone_id,
                    document_path,
                    trace_path,
                    requested_at,
                } => {
                    if records.iter().any(|r| r.id == id) {
                        return Err(Error::Integrity {
                            detail: format!("releases.jsonl: duplicate request id {id}"),
                        });
                    }
                    records.push(ReleaseRecord {
                        id,
                        revision_id,
                        milestone_id,
                        document_path,
                        trace_path,
                        requested_at,
                        decision: ReleaseDecision::Pending,
                        decided_by: None,
                        decided_at: None,
                        conditions: None,
                    });
                }
                ReleaseEvent::Decided {
                    id,
                    decision,
                    decided_by,
                    decided_at,
                    conditions,
                } => {
                    let record = records.iter_mut().find(|r| r.id == id).ok_or_else(|| {
                        Error::Integrity {
                            detail: format!("releases.jsonl: decision for unknown request {id}"),
                        }
                    })?;
                    if record.decision != ReleaseDecision::Pending {
                        return Err(Error::Integrity {
                            detail: format!("releases.jsonl: request {id} decided twice"),
                        });
                    }
                    record.decision = decision;
                    record.decided_by = Some(decided_by);
                    record.decided_at = Some(decided_at);
                    record.conditions = conditions;
                }
            }
        }
        Ok(records)
    }

    // -- representations ----------------------------------------------------

    pub fn representation_paths(&self, milestone_id: &str, revision_id: u64) -> (PathBuf, PathBuf) {
        let dir = self.root.join("representations").join(milestone_id);
        (
            dir.join(format!("{revision_id}.md")),
            dir.join(format!("{revision_id}.trace.json")),
        )
    }

    /// Writes both representation files; returns repository-relative paths.
    pub fn write_representation(
        &self,
        milestone: &Milestone,
        representation: &Representation,
        manifest: &TraceabilityManifest,
    ) -> Result<(String, String)> {
        let (md_path, trace_path) =
            self.representation_paths(&milestone.id, representation.revision_id);
        let dir = md_path.parent().expect("representation files have a parent");
        fs::create_dir_all(dir).map_err(Error::io(format!("creating {}", dir.display())))?;
        fs::write(&md_path, docfile::render_markdown(representation, milestone))
            .map_err(Error::io(format!("writing {}", md_path.display())))?;
        fs::write(&trace_path, docfile::render_manifest(manifest))
            .map_err(Error::io(format!("writing {}", trace_path.display())))?;
        let relative = |p: &Path| {
            p.strip_prefix(&self.root)
                .unwrap_or(p)
                .to_string_lossy()
                .into_owned()
        };
        Ok((relative(&md_path), relative(&trace_path)))
    }

    pub fn read_representation(
        &self,
        milestone_id: &str,
        revision_id: u64,
    ) -> Result<(Representation, TraceabilityManifest)> {
        let (md_path, trace_path) = self.representation_paths(milestone_id, revision_id);
        let md = fs::read_to_string(&md_path).map_err(|_| Error::UnknownRepresentation {
            milestone: milestone_id.to_string(),
            revision: revision_id,
        })?;
        let trace = fs::read_to_string(&trace_path).map_err(|_| Error::UnknownRepresentation {
            milestone: milestone_id.to_string(),
            revision: revision_id,
        })?;
        let representation = docfile::parse_markdown(&md_path, &md)?;
        let manifest = docfile::parse_manifest(&trace_path, &trace)?;
        Ok((representation, manifest))
    }

    /// Revisions for which a representation of this milestone exists, in
    /// ascending order. This is the milestone's derivation history.
    pub fn representation_revisions(&self, milestone_id: &str) -> Result<Vec<u64>> {
        let dir = self.root.join("representations").join(milestone_id);
        if !dir.exists() {
            return Ok(Vec::new());
        }
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(Error::io(format!("reading {}", dir.display())))? {
            let entry = entry.map_err(Error::io("reading representations"))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if let Some(stem) = name.strip_suffix(".md") {
                if let Ok(id) = stem.parse::<u64>() {
                    ids.push(id);
                }
            }
        }
        ids.sort_unstable();
        Ok(ids)
    }

    // -- integrity ----------------------------------------------------------

    /// Re-validates every stored argument, replays the operation log from
    /// revision 0, recomputes metrics, and compares against stored metadata.
    pub fn integrity_check(&self, weights: MaturityWeights) -> Result<IntegrityReport> {
        let mut report = IntegrityReport::default();

        let ids = self.revision_ids()?;
        let Some(&max_id) = ids.last() else {
            return Ok(report);
        };
        let contiguous: Vec<u64> = (0..=max_id).collect();
        if ids != contiguous {
            let present: BTreeSet<u64> = ids.iter().copied().collect();
            let missing: Vec<String> = contiguous
                .iter()
                .filter(|id| !present.contains(id))
                .map(|id| id.to_string())
                .collect();
            report.push(
                "LINEAGE-BREAK",
                format!("missing revision(s): {}", missing.join(", ")),
            );
        }

        let framework = match self.load_framework() {
            Ok(framework) => Some(framework),
            Err(e) => {
                report.push("FRAMEWORK-UNREADABLE", e.to_string());
                None
            }
        };
        let evidence = self.load_evidence().unwrap_or_default();
        let vocabulary = framework
            .as_ref()
            .map(|f| f.vocabulary())
            .unwrap_or_default();

        // Replay state: the argument as reproduced from the operation log.
        let mut replayed: Option<arglife_core::model::Argument> = None;
        let mut instantiated_patterns: BTreeSet<String> = BTreeSet::new();
        let mut previous_phase: Option<Phase> = None;

        for id in &ids {
            let id = *id;
            let dir = self.revision_dir(id);
            let argument_text = match fs::read_to_string(dir.join("argument.gsn")) {
                Ok(text) => text,
                Err(e) => {
                    report.push("MISSING-ARGUMENT", format!("revision {id}: {e}"));
                    replayed = None;
                    continue;
                }
            };
            let argument = match parse_argument(&argument_text) {
                Ok(argument) => argument,
                Err(errors) => {
                    report.push(
                        "CORRUPT-ARGUMENT",
                        format!("revision {id}: {}", errors[0]),
                    );
                    replayed = None;
                    continue;
                }
            };
            let diagnostics = validate(&argument);
            if !is_error_free(&diagnostics) {
                report.push(
                    "INVALID-ARGUMENT",
                    format!("revision {id}: {}", diagnostics[0]),
                );
            }
            let meta = match self.read_meta(id) {
                Ok(meta) => meta,
                Err(e) => {
                    report.push("CORRUPT-META", format!("revision {id}: {e}"));
                    previous_phase = None;
                    continue;
                }
            };

            // Lineage shape.
            let expected_parent = if id == 0 { None } else { Some(id - 1) };
            if meta.parent != expected_parent {
                report.push(
                    "LINEAGE-BREAK",
                    format!("revision {id}: parent {:?}, expected {:?}", meta.parent, expected_parent),
                );
            }
            if id == 0 && meta.operation.is_some() {
                report.push("LINEAGE-BREAK", "revision 0 carries an operation record");
            }
            if id > 0 && meta.operation.is_none() {
                report.push(
                    "MISSING-OPERATION",
                    format!("revision {id} has no operation record"),
                );
            }
            if let Some(previous) = previous_phase {
                let legal = matches!(
                    (previous, meta.phase),
                    (Phase::Baselining, Phase::Evolution)
                        | (Phase::Evolution, Phase::Evolution)
                        | (Phase::Evolution, Phase::Conservation)
                        | (Phase::Conservation, Phase::Conservation)
                );
                if !legal {
                    report.push(
                        "PHASE-VIOLATION",
                        format!("revision {id}: {previous} -> {}", meta.phase),
                    );
                }
            } else if id == 0 && meta.phase != Phase::Baselining {
                report.push("PHASE-VIOLATION", "revision 0 is not in the baselining phase");
            }
            previous_phase = Some(meta.phase);

            // Replay the recorded operation and compare canonical bytes.
            if id == 0 {
                if let Some(framework) = framework.as_ref() {
                    match framework.compose(&argument.name) {
                        Ok(composed) => {
                            match (serialize_argument(&composed), serialize_argument(&argument)) {
                                (Ok(expected), Ok(stored)) if expected != stored => {
                                    report.push(
                                        "REPLAY-MISMATCH",
                                        "revision 0 differs from the framework composition",
                                    );
                                }
                                _ => {}
                            }
                            replayed = Some(composed);
                        }
                        Err(e) => {
                            report.push(
                                "REPLAY-MISMATCH",
                                format!("framework does not compose: {e}"),
                            );
                            replayed = Some(argument.clone());
                        }
                    }
                }
            } else {
                if let (Some(previous), Some(op), Some(framework)) =
                    (replayed.take(), meta.operation.as_ref(), framework.as_ref())
                {
                    let resolve = match op {
                        ArgOperation::Instantiate { pattern, bindings, .. } => {
                            let first = !instantiated_patterns.contains(pattern);
                            if !bindings.is_empty() {
                                instantiated_patterns.insert(pattern.clone());
                            }
                            first
                        }
                        _ => false,
                    };
                    match apply_op_to_argument(&previous, op, framework, resolve) {
                        Ok((next, _)) => {
                            match (serialize_argument(&next), serialize_argument(&argument)) {
                                (Ok(expected), Ok(stored)) if expected != stored => {
                                    report.push(
                                        "REPLAY-MISMATCH",
                                        format!("revision {id}: replayed argument differs from stored bytes"),
                                    );
                                }
                                (Err(e), _) | (_, Err(e)) => {
                                    report.push(
                                        "REPLAY-MISMATCH",
                                        format!("revision {id}: cannot canonicalize: {e}"),
                                    );
                                }
                                _ => {}
                            }
                            replayed = Some(next);
                        }
                        Err(e) => {
                            report.push(
                                "REPLAY-MISMATCH",
                                format!("revision {id}: recorded operation does not replay: {e}"),
                            );
                            replayed = Some(argument.clone());
                        }
                    }
                } else if framework.is_some() {
                    replayed = Some(argument.clone());
                }
            }

            // Metric recomputation: evidence is counted as of creation time.
            let evidenced: BTreeSet<_> = evidence
                .iter()
                .filter(|r| r.registered_at <= meta.created_at)
                .map(|r| r.solution_id.clone())
                .collect();
            let ctx = MetricContext {
                vocabulary: &vocabulary,
                evidenced_solutions: &evidenced,
                weights,
            };
            let expected = arglife_core::lifecycle::maturity(&argument, &ctx);
            let expected_context =
                arglife_core::lifecycle::context_score(&argument, &vocabulary);
            if expected != meta.maturity {
                report.push(
                    "METRIC-MISMATCH",
                    format!(
                        "revision {id}: stored maturity {} does not match recomputed {}",
                        meta.maturity.aggregate.to_fraction_string(),
                        expected.aggregate.to_fraction_string()
                    ),
                );
            }
            if expected_context != meta.context_score {
                report.push(
                    "METRIC-MISMATCH",
                    format!(
                        "revision {id}: stored context score {} does not match recomputed {expected_context}",
                        meta.context_score
                    ),
                );
            }
        }

        Ok(report)
    }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(Error::io(format!("reading {}", path.display())))?;
    let mut out = Vec::new();
    for (number, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(line).map_err(|e| Error::Integrity {
            detail: format!("{}:{}: unreadable record: {e}", path.display(), number + 1),
        })?;
        out.push(value);
    }
    Ok(out)
}

fn append_jsonl<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut line = serde_json::to_string(value).map_err(|e| Error::Integrity {
        detail: format!("cannot serialize record: {e}"),
    })?;
    line.push('\n');
    let mut file = fs::OpenOptions::new()
        .append(true)
        .open(path)
        .map_err(Error::io(format!("opening {}", path.display())))?;
    file.write_all(line.as_bytes())
        .map_err(Error::io(format!("appending to {}", path.display())))
}

fn parse_observation_record(path: &Path, record: &csv::StringRecord) -> Result<SpiObservation> {
    let bad = |detail: String| Error::Integrity {
        detail: format!("{}: {detail}", path.display()),
    };
    if record.len() != 3 {
        return Err(bad(format!("expected 3 fields, found {}", record.len())));
    }
    let timestamp = DateTime::parse_from_rfc3339(&record[1])
        .map_err(|e| bad(format!("unreadable timestamp `{}`: {e}", &record[1])))?
        .with_timezone(&Utc);
    let value = Rational::parse(&record[2])
        .map_err(|_| bad(format!("unreadable value `{}`", &record[2])))?;
    Ok(SpiObservation {
        spi_id: record[0].to_string(),
        timestamp,
        value,
    })
}

/// Parses a user-supplied observations CSV (same schema as the stored file).
pub fn parse_observations_csv(path: &Path, text: &str) -> Result<Vec<SpiObservation>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidInput {
            path: path.to_path_buf(),
            what: "observations file",
            detail: e.to_string(),
        })?
        .clone();
    let expected = ["spi_id", "timestamp", "value"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidInput {
            path: path.to_path_buf(),
            what: "observations file",
            detail: format!("header must be `{}`", expected.join(",")),
        });
    }
    let mut observations = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::InvalidInput {
            path: path.to_path_buf(),
            what: "observations file",
            detail: e.to_string(),
        })?;
        let parsed = parse_observation_record(path, &record).map_err(|e| match e {
            Error::Integrity { detail } => Error::InvalidInput {
                path: path.to_path_buf(),
                what: "observations file",
                detail,
            },
            other => other,
        })?;
        observations.push(parsed);
    }
    Ok(observations)
}
