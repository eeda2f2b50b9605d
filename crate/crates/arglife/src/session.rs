//! Workspace orchestration: the full lifecycle workflow over one repository.
//!
//! `Workspace` loads state from the store, runs the pure core operations, and
//! persists the results. Mutating operations take the writer lock; reads run
//! lock-free. Timestamps are injected by the caller so tests stay
//! deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use arglife_core::conservation::{
    self, evaluate_stream, invalidate, re_resolve, status_entry, verify_definition,
    verify_monotone, DanglingSpi, SpiDefinition, SpiObservation, SpiStatusEntry, ValidityState,
    Violation,
};
use arglife_core::coupling::{
    check_evidence_target, evidenced_solutions, gap_analysis, ActivityMap, EvidenceRecord,
    RefinementSignal, ReleaseDecision, ReleaseRecord,
};
use arglife_core::lifecycle::{
    apply_operation, deploy as deploy_revision, init_baseline, maturity, ArgOperation,
    LifecycleError, MaturityScore, MaturityWeights, MetricContext, Phase, Revision, ViolationRef,
};
use arglife_core::model::{diff, Argument, ChangeSet, Diagnostic, ElementId};
use arglife_core::pattern::{BindingSet, CoverageReport, Framework};
use arglife_core::represent::{
    derive, verify_traceability, DeriveInputs, Milestone, RepresentationKind, VerificationReport,
};
use arglife_core::Timestamp;

use crate::error::{Error, Result};
use crate::store::{IntegrityReport, ReleaseEvent, Repository};

pub struct Workspace {
    repo: Repository,
    weights: MaturityWeights,
}

/// Result of baselining a repository.
pub struct InitReport {
    pub revision: Revision,
    pub warnings: Vec<Diagnostic>,
    pub patterns_installed: usize,
}

/// Result of an evolution step.
pub struct EvolveReport {
    pub revision: Revision,
    pub dropped_optionals: BTreeSet<ElementId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatusReport {
    pub revision: u64,
    pub phase: Phase,
    pub maturity: MaturityScore,
    pub context_score: u64,
    pub coverage: CoverageReport,
    pub gap_counts: BTreeMap<String, u64>,
    pub invalidated_claims: Vec<ElementId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RevisionSummary {
    pub revision: u64,
    pub parent: Option<u64>,
    pub phase: Phase,
    pub operation: Option<String>,
    pub maturity_aggregate: arglife_core::Rational,
    pub context_score: u64,
    pub elements: u64,
    pub created_at: Timestamp,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogReport {
    pub revisions: Vec<RevisionSummary>,
    pub deployed_revision: Option<u64>,
    pub conservation_updates: u64,
}

pub struct DeriveReport {
    pub document_path: String,
    pub trace_path: String,
    pub sections: usize,
    pub uncovered: usize,
}

pub struct UpdateReport {
    pub revision: Revision,
    pub addressed_violations: usize,
    pub dangling: Vec<DanglingSpi>,
}

impl Workspace {
    /// Creates a repository at `path`, installs the framework, and writes
    /// revision 0. A failed baselining removes the half-created repository so
    /// the path stays usable for another attempt.
    pub fn init(
        path: &Path,
        framework_dir: &Path,
        name: &str,
        now: Timestamp,
    ) -> Result<(Workspace, InitReport)> {
        let repo = Repository::init(path)?;
        let baseline = |workspace: &Workspace| -> Result<InitReport> {
            let _lock = workspace.repo.lock()?;
            let patterns_installed = workspace.repo.install_framework(framework_dir)?;
            let framework = workspace.repo.load_framework()?;
            let outcome = init_baseline(&framework, name, now, workspace.weights)?;
            workspace.repo.write_revision(&outcome.revision)?;
            Ok(InitReport {
                revision: outcome.revision,
                warnings: outcome.warnings,
                patterns_installed,
            })
        };
        let workspace = Workspace {
            repo,
            weights: MaturityWeights::default(),
        };
        match baseline(&workspace) {
            Ok(report) => Ok((workspace, report)),
            Err(error) => {
                let _ = fs::remove_dir_all(path);
                Err(error)
            }
        }
    }

    pub fn open(path: &Path) -> Result<Workspace> {
        Ok(Workspace {
            repo: Repository::open(path)?,
            weights: MaturityWeights::default(),
        })
    }

    pub fn repo(&self) -> &Repository {
        &self.repo
    }

    pub fn head(&self) -> Result<Revision> {
        let id = self.repo.head_id()?.ok_or(Error::UnknownRevision { id: 0 })?;
        self.repo.read_revision(id)
    }

    pub fn revision(&self, id: Option<u64>) -> Result<Revision> {
        match id {
            Some(id) => self.repo.read_revision(id),
            None => self.head(),
        }
    }

    fn metric_parts(&self) -> Result<(Framework, BTreeSet<String>, BTreeSet<ElementId>)> {
        let framework = self.repo.load_framework()?;
        let vocabulary = framework.vocabulary();
        let evidenced = evidenced_solutions(&self.repo.load_evidence()?);
        Ok((framework, vocabulary, evidenced))
    }

    // -- evolution -----------------------------------------------------------

    fn apply_and_store(
        &self,
        op: ArgOperation,
        now: Timestamp,
    ) -> Result<EvolveReport> {
        let _lock = self.repo.lock()?;
        let parent = self.head()?;
        let (framework, vocabulary, evidenced) = self.metric_parts()?;
        let ctx = MetricContext {
            vocabulary: &vocabulary,
            evidenced_solutions: &evidenced,
            weights: self.weights,
        };
        let resolve = match &op {
            ArgOperation::Instantiate { pattern, .. } => {
                !self.pattern_already_instantiated(pattern)?
            }
            _ => false,
        };
        let revision = apply_operation(&parent, op, &framework, &ctx, now, resolve)?;
        let dropped = match &revision.operation {
            Some(ArgOperation::Instantiate {
                dropped_optionals, ..
            }) => dropped_optionals.clone(),
            _ => BTreeSet::new(),
        };
        self.repo.write_revision(&revision)?;
        Ok(EvolveReport {
            revision,
            dropped_optionals: dropped,
        })
    }

    /// True once any stored revision applied a non-empty instantiation of the
    /// named pattern; optional-branch resolution happens only the first time.
    fn pattern_already_instantiated(&self, name: &str) -> Result<bool> {
        for id in self.repo.revision_ids()? {
            let meta = self.repo.read_meta(id)?;
            if let Some(ArgOperation::Instantiate { pattern, bindings, .. }) = meta.operation {
                if pattern == name && !bindings.is_empty() {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    pub fn instantiate(
        &self,
        pattern: &str,
        bindings: BindingSet,
        now: Timestamp,
    ) -> Result<EvolveReport> {
        self.apply_and_store(
            ArgOperation::Instantiate {
                pattern: pattern.to_string(),
                bindings,
                dropped_optionals: BTreeSet::new(),
            },
            now,
        )
    }

    pub fn eliminate(&self, root: ElementId, why: &str, now: Timestamp) -> Result<EvolveReport> {
        self.apply_and_store(
            ArgOperation::Eliminate {
                root,
                justification: why.to_string(),
            },
            now,
        )
    }

    pub fn extend(
        &self,
        fragment: Argument,
        attach_at: ElementId,
        why: &str,
        now: Timestamp,
    ) -> Result<EvolveReport> {
        self.apply_and_store(
            ArgOperation::Extend {
                fragment,
                attach_at,
                justification: why.to_string(),
            },
            now,
        )
    }

    // -- status and gaps ------------------------------------------------------

    /// Live status of the head revision: maturity is recomputed with the
    /// current evidence index, so registrations show up immediately.
    pub fn status(&self) -> Result<StatusReport> {
        let head = self.head()?;
        let (_, vocabulary, evidenced) = self.metric_parts()?;
        let ctx = MetricContext {
            vocabulary: &vocabulary,
            evidenced_solutions: &evidenced,
            weights: self.weights,
        };
        let validity = self.validity()?;
        let gaps = gap_analysis(&head.argument, &evidenced, &ActivityMap::default());
        let mut gap_counts = BTreeMap::new();
        for signal in &gaps {
            *gap_counts
                .entry(format!("{:?}", signal.kind).to_snake_case())
                .or_insert(0u64) += 1;
        }
        Ok(StatusReport {
            revision: head.id,
            phase: head.phase,
            maturity: maturity(&head.argument, &ctx),
            context_score: arglife_core::lifecycle::context_score(&head.argument, &vocabulary),
            coverage: arglife_core::pattern::coverage(&head.argument, &vocabulary),
            gap_counts,
            invalidated_claims: validity.invalidated().into_iter().collect(),
        })
    }

    pub fn gaps(&self) -> Result<Vec<RefinementSignal>> {
        let head = self.head()?;
        let evidenced = evidenced_solutions(&self.repo.load_evidence()?);
        Ok(gap_analysis(&head.argument, &evidenced, &ActivityMap::default()))
    }

    // -- evidence --------------------------------------------------------------

    pub fn add_evidence(
        &self,
        solution: ElementId,
        uri: &str,
        kind: &str,
        activity: &str,
        now: Timestamp,
    ) -> Result<EvidenceRecord> {
        let _lock = self.repo.lock()?;
        let head = self.head()?;
        check_evidence_target(&head.argument, &solution)?;
        let existing = self.repo.load_evidence()?;
        let record = EvidenceRecord {
            id: existing.len() as u64,
            solution_id: solution,
            artifact_uri: uri.to_string(),
            artifact_kind: kind.to_string(),
            produced_by_activity: activity.to_string(),
            registered_at: now,
            content_hash: hash_local_artifact(uri),
        };
        self.repo.append_evidence(&record)?;
        Ok(record)
    }

    pub fn evidence(&self) -> Result<Vec<EvidenceRecord>> {
        self.repo.load_evidence()
    }

    // -- milestones and representations ----------------------------------------

    pub fn add_milestone(&self, milestone: Milestone) -> Result<()> {
        let _lock = self.repo.lock()?;
        let existing = self.repo.load_milestones()?;
        if existing.iter().any(|m| m.id == milestone.id) {
            return Err(Error::DuplicateMilestone { id: milestone.id });
        }
        self.repo.append_milestone(&milestone)
    }

    pub fn milestones(&self) -> Result<Vec<Milestone>> {
        self.repo.load_milestones()
    }

    pub fn milestone(&self, id: &str) -> Result<Milestone> {
        self.repo
            .load_milestones()?
            .into_iter()
            .find(|m| m.id == id)
            .ok_or_else(|| Error::UnknownMilestone { id: id.to_string() })
    }

    fn derive_inputs(&self) -> Result<DeriveInputs> {
        Ok(DeriveInputs {
            validity: self.validity()?,
            spi_status: self.spi_status()?,
        })
    }

    pub fn derive(
        &self,
        milestone_id: &str,
        revision: Option<u64>,
        now: Timestamp,
    ) -> Result<DeriveReport> {
        let _lock = self.repo.lock()?;
        let milestone = self.milestone(milestone_id)?;
        let revision = self.revision(revision)?;
        let inputs = self.derive_inputs()?;
        let (representation, manifest) =
            derive(&revision.argument, revision.id, &milestone, &inputs, now)?;
        let (document_path, trace_path) =
            self.repo
                .write_representation(&milestone, &representation, &manifest)?;
        Ok(DeriveReport {
            document_path,
            trace_path,
            sections: representation.sections.len(),
            uncovered: manifest.uncovered.len(),
        })
    }

    /// Verifies stored representation files against the stored revision.
    pub fn verify_trace(&self, milestone_id: &str, revision_id: u64) -> Result<VerificationReport> {
        let milestone = self.milestone(milestone_id)?;
        let revision = self.repo.read_revision(revision_id)?;
        let (representation, manifest) = self.repo.read_representation(milestone_id, revision_id)?;
        let inputs = self.derive_inputs()?;
        Ok(verify_traceability(
            &representation,
            &manifest,
            &revision.argument,
            &milestone,
            &inputs,
        ))
    }

    /// Derivation history of a milestone: every revision it was derived for.
    pub fn milestone_trace(&self, milestone_id: &str) -> Result<Vec<(u64, String)>> {
        self.milestone(milestone_id)?;
        let revisions = self.repo.representation_revisions(milestone_id)?;
        Ok(revisions
            .into_iter()
            .map(|revision| {
                let (md, _) = self.repo.representation_paths(milestone_id, revision);
                let relative = md
                    .strip_prefix(self.repo.root())
                    .unwrap_or(&md)
                    .to_string_lossy()
                    .into_owned();
                (revision, relative)
            })
            .collect())
    }

    // -- release gate -----------------------------------------------------------

    /// Requests a release for the head revision: derives the release document
    /// and records a pending release. Repeated requests return the existing
    /// pending record.
    pub fn request_release(&self, milestone_id: &str, now: Timestamp) -> Result<ReleaseRecord> {
        let milestone = self.milestone(milestone_id)?;
        if milestone.kind != RepresentationKind::ReleaseDocument {
            return Err(Error::MilestoneKind {
                milestone: milestone.id.clone(),
                kind: milestone.kind.keyword().to_string(),
            });
        }
        let head = self.head()?;
        if let Some(existing) = self
            .repo
            .load_releases()?
            .into_iter()
            .find(|r| r.revision_id == head.id && r.milestone_id == milestone_id && r.is_pending())
        {
            return Ok(existing);
        }

        let _lock = self.repo.lock()?;
        let inputs = self.derive_inputs()?;
        let (representation, manifest) = derive(&head.argument, head.id, &milestone, &inputs, now)?;
        let (document_path, trace_path) =
            self.repo
                .write_representation(&milestone, &representation, &manifest)?;
        let id = self.repo.load_release_events()?.iter().filter(|e| matches!(e, ReleaseEvent::Requested { .. })).count() as u64;
        let event = ReleaseEvent::Requested {
            id,
            revision_id: head.id,
            milestone_id: milestone.id.clone(),
            document_path: document_path.clone(),
            trace_path: trace_path.clone(),
            requested_at: now,
        };
        self.repo.append_release_event(&event)?;
        Ok(ReleaseRecord {
            id,
            revision_id: head.id,
            milestone_id: milestone.id,
            document_path,
            trace_path,
            requested_at: now,
            decision: ReleaseDecision::Pending,
            decided_by: None,
            decided_at: None,
            conditions: None,
        })
    }

    pub fn releases(&self) -> Result<Vec<ReleaseRecord>> {
        self.repo.load_releases()
    }

    /// Decides a pending release. Granting re-verifies the derived document
    /// right now: a tampered or stale document blocks the grant.
    pub fn decide_release(
        &self,
        id: u64,
        grant: bool,
        decided_by: &str,
        conditions: Option<String>,
        now: Timestamp,
    ) -> Result<ReleaseRecord> {
        let _lock = self.repo.lock()?;
        let records = self.repo.load_releases()?;
        let record = records
            .into_iter()
            .find(|r| r.id == id)
            .ok_or(Error::UnknownRelease { id })?;
        if !record.is_pending() {
            return Err(Error::AlreadyDecided { id });
        }
        if grant {
            self.verify_release_document(&record)?;
        }
        let decision = if grant {
            ReleaseDecision::Granted
        } else {
            ReleaseDecision::Denied
        };
        let event = ReleaseEvent::Decided {
            id,
            decision,
            decided_by: decided_by.to_string(),
            decided_at: now,
            conditions: conditions.clone(),
        };
        self.repo.append_release_event(&event)?;
        Ok(ReleaseRecord {
            decision,
            decided_by: Some(decided_by.to_string()),
            decided_at: Some(now),
            conditions,
            ..record
        })
    }

    fn verify_release_document(&self, record: &ReleaseRecord) -> Result<()> {
        let report = self.verify_trace(&record.milestone_id, record.revision_id)?;
        if !report.passed() {
            return Err(Error::GateDocumentInvalid {
                revision: record.revision_id,
                findings: report.findings.len(),
            });
        }
        Ok(())
    }

    /// Transfers the head revision into conservation. Requires a granted
    /// release whose document still verifies; the gate fails closed on
    /// tampering.
    pub fn deploy(&self, now: Timestamp) -> Result<Revision> {
        let _lock = self.repo.lock()?;
        let head = self.head()?;
        if head.phase != Phase::Evolution {
            return Err(Error::Lifecycle(LifecycleError::PhaseError {
                phase: head.phase,
                operation: "deploy",
            }));
        }
        let releases = self.repo.load_releases()?;
        let granted = releases
            .iter()
            .find(|r| r.grants(head.id))
            .ok_or(Error::GateNotGranted { revision: head.id })?;
        self.verify_release_document(granted)?;

        let (_, vocabulary, evidenced) = self.metric_parts()?;
        let ctx = MetricContext {
            vocabulary: &vocabulary,
            evidenced_solutions: &evidenced,
            weights: self.weights,
        };
        let revision = deploy_revision(&head, granted.id, &ctx, now)?;
        self.repo.write_revision(&revision)?;
        Ok(revision)
    }

    // -- conservation ------------------------------------------------------------

    /// Registers indicator definitions from `.spi` file text. Monitoring
    /// starts at conservation: definitions are rejected before deployment.
    pub fn define_spis(&self, path: &Path, text: &str) -> Result<Vec<SpiDefinition>> {
        let _lock = self.repo.lock()?;
        let head = self.head()?;
        if head.phase != Phase::Conservation {
            return Err(Error::Lifecycle(LifecycleError::PhaseError {
                phase: head.phase,
                operation: "define_spi",
            }));
        }
        let definitions = conservation::parse_spi_file(text).map_err(|errors| Error::Parse {
            path: path.to_path_buf(),
            errors,
        })?;
        let existing = self.repo.load_spi_definitions()?;
        for definition in &definitions {
            if existing.iter().any(|d| d.id == definition.id) {
                return Err(Error::Spi(conservation::SpiError::DuplicateSpi(
                    definition.id.clone(),
                )));
            }
            verify_definition(definition, &head.argument)?;
        }
        for definition in &definitions {
            self.repo.append_spi_definition(definition)?;
        }
        Ok(definitions)
    }

    pub fn spi_definitions(&self) -> Result<Vec<SpiDefinition>> {
        self.repo.load_spi_definitions()
    }

    /// Appends an observation batch and evaluates exactly the new stream
    /// positions. Timestamps must be strictly increasing per indicator,
    /// including across batches.
    pub fn ingest(&self, batch: Vec<SpiObservation>) -> Result<Vec<Violation>> {
        let _lock = self.repo.lock()?;
        let definitions = self.repo.load_spi_definitions()?;
        let stored = self.repo.load_observations()?;

        let mut by_spi: BTreeMap<&str, Vec<&SpiObservation>> = BTreeMap::new();
        for observation in &batch {
            let known = definitions.iter().any(|d| d.id == observation.spi_id);
            if !known {
                return Err(Error::Spi(conservation::SpiError::UnknownSpi(
                    observation.spi_id.clone(),
                )));
            }
            by_spi.entry(&observation.spi_id).or_default().push(observation);
        }
        for (spi_id, observations) in &by_spi {
            let last = stored
                .iter()
                .filter(|o| o.spi_id == **spi_id)
                .map(|o| o.timestamp)
                .max();
            verify_monotone(spi_id, last, observations)?;
        }

        let new_counts: BTreeMap<String, usize> = by_spi
            .iter()
            .map(|(spi_id, observations)| (spi_id.to_string(), observations.len()))
            .collect();
        drop(by_spi);
        self.repo.append_observations(&batch)?;

        let mut violations = Vec::new();
        let all: Vec<SpiObservation> = stored.into_iter().chain(batch).collect();
        for definition in &definitions {
            let stream: Vec<SpiObservation> = all
                .iter()
                .filter(|o| o.spi_id == definition.id)
                .cloned()
                .collect();
            let new_in_batch = new_counts.get(&definition.id).copied().unwrap_or(0);
            let start = stream.len() - new_in_batch;
            violations.extend(conservation::violations_in_range(definition, &stream, start));
        }
        violations.sort_by(|a, b| (&a.spi_id, a.detected_at).cmp(&(&b.spi_id, b.detected_at)));
        Ok(violations)
    }

    /// Every violation derivable from the stored observation stream.
    pub fn all_violations(&self) -> Result<Vec<Violation>> {
        let definitions = self.repo.load_spi_definitions()?;
        let observations = self.repo.load_observations()?;
        let mut violations = Vec::new();
        for definition in &definitions {
            let stream: Vec<SpiObservation> = observations
                .iter()
                .filter(|o| o.spi_id == definition.id)
                .cloned()
                .collect();
            violations.extend(evaluate_stream(definition, &stream));
        }
        violations.sort_by(|a, b| (&a.spi_id, a.detected_at).cmp(&(&b.spi_id, b.detected_at)));
        Ok(violations)
    }

    /// Violations not yet addressed by a conservation update.
    pub fn outstanding_violations(&self) -> Result<Vec<Violation>> {
        let mut addressed: BTreeSet<ViolationRef> = BTreeSet::new();
        for id in self.repo.revision_ids()? {
            let meta = self.repo.read_meta(id)?;
            if let Some(ArgOperation::ConservationUpdate { violations, .. }) = meta.operation {
                addressed.extend(violations);
            }
        }
        Ok(self
            .all_violations()?
            .into_iter()
            .filter(|v| !addressed.contains(&v.to_ref()))
            .collect())
    }

    /// Claim validity of the deployed argument. Before deployment everything
    /// is trivially valid and unmonitored.
    pub fn validity(&self) -> Result<ValidityState> {
        let head = self.head()?;
        if head.phase != Phase::Conservation {
            return Ok(ValidityState::default());
        }
        let definitions = self.repo.load_spi_definitions()?;
        let outstanding = self.outstanding_violations()?;
        Ok(invalidate(&definitions, &outstanding))
    }

    pub fn spi_status(&self) -> Result<Vec<SpiStatusEntry>> {
        let definitions = self.repo.load_spi_definitions()?;
        let observations = self.repo.load_observations()?;
        let outstanding = self.outstanding_violations()?;
        Ok(definitions
            .iter()
            .map(|definition| {
                let stream: Vec<SpiObservation> = observations
                    .iter()
                    .filter(|o| o.spi_id == definition.id)
                    .cloned()
                    .collect();
                let count = outstanding
                    .iter()
                    .filter(|v| v.spi_id == definition.id)
                    .count() as u64;
                status_entry(definition, &stream, count)
            })
            .collect())
    }

    /// Proposes a conservation update: the new argument must touch every
    /// invalidated claim's subtree (or defer it in the rationale), and the
    /// resulting revision records the violations it addresses. Indicators are
    /// re-resolved against the new argument; lost guards are reported.
    pub fn propose_update(
        &self,
        new_argument: Argument,
        why: &str,
        qualitative: bool,
        now: Timestamp,
    ) -> Result<UpdateReport> {
        let _lock = self.repo.lock()?;
        let head = self.head()?;
        if head.phase != Phase::Conservation {
            return Err(Error::Lifecycle(LifecycleError::PhaseError {
                phase: head.phase,
                operation: "conservation_update",
            }));
        }
        let change = diff(&head.argument, &new_argument)?;
        let state = self.validity()?;
        conservation::check_update(&head.argument, &state, &change, why, qualitative)?;
        let outstanding = self.outstanding_violations()?;
        let refs: Vec<ViolationRef> = outstanding.iter().map(Violation::to_ref).collect();
        let addressed = refs.len();

        let (framework, vocabulary, evidenced) = self.metric_parts()?;
        let ctx = MetricContext {
            vocabulary: &vocabulary,
            evidenced_solutions: &evidenced,
            weights: self.weights,
        };
        let op = ArgOperation::ConservationUpdate {
            violations: refs,
            change,
            rationale: why.to_string(),
            qualitative,
        };
        let revision = apply_operation(&head, op, &framework, &ctx, now, false)?;
        self.repo.write_revision(&revision)?;

        let definitions = self.repo.load_spi_definitions()?;
        let dangling = re_resolve(&definitions, &revision.argument);
        Ok(UpdateReport {
            revision,
            addressed_violations: addressed,
            dangling,
        })
    }

    // -- history -------------------------------------------------------------

    /// The full revision chain with per-revision summaries plus the deploy
    /// marker (revision m) and the count of conservation updates (n).
    pub fn log(&self) -> Result<LogReport> {
        let mut revisions = Vec::new();
        let mut deployed_revision = None;
        let mut conservation_updates = 0;
        for id in self.repo.revision_ids()? {
            let revision = self.repo.read_revision(id)?;
            match &revision.operation {
                Some(ArgOperation::Deploy { .. }) => deployed_revision = Some(id),
                Some(ArgOperation::ConservationUpdate { .. }) => conservation_updates += 1,
                _ => {}
            }
            revisions.push(RevisionSummary {
                revision: revision.id,
                parent: revision.parent,
                phase: revision.phase,
                operation: revision.operation.as_ref().map(|o| o.kind_name().to_string()),
                maturity_aggregate: revision.maturity.aggregate,
                context_score: revision.context_score,
                elements: revision.argument.elements.len() as u64,
                created_at: revision.created_at,
            });
        }
        Ok(LogReport {
            revisions,
            deployed_revision,
            conservation_updates,
        })
    }

    /// Lineage of a revision: the path from revision 0, each entry with the
    /// operation that produced it.
    pub fn lineage(&self, id: u64) -> Result<Vec<Revision>> {
        let ids = self.repo.revision_ids()?;
        if !ids.contains(&id) {
            return Err(Error::UnknownRevision { id });
        }
        (0..=id).map(|i| self.repo.read_revision(i)).collect()
    }

    pub fn diff_revisions(&self, base: u64, next: u64) -> Result<ChangeSet> {
        let base = self.repo.read_revision(base)?;
        let next = self.repo.read_revision(next)?;
        Ok(diff(&base.argument, &next.argument)?)
    }

    pub fn check(&self) -> Result<IntegrityReport> {
        self.repo.integrity_check(self.weights)
    }
}

trait SnakeCase {
    fn to_snake_case(&self) -> String;
}

impl SnakeCase for String {
    fn to_snake_case(&self) -> String {
        let mut out = String::with_capacity(self.len() + 4);
        for (i, c) in self.chars().enumerate() {
            if c.is_ascii_uppercase() {
                if i > 0 {
                    out.push('_');
                }
                out.push(c.to_ascii_lowercase());
            } else {
                out.push(c);
            }
        }
        out
    }
}

/// Hashes the referenced artifact when the URI points at a local file;
/// remote or unresolvable URIs are recorded without a digest.
fn hash_local_artifact(uri: &str) -> Option<String> {
    let path = if let Some(stripped) = uri.strip_prefix("file://") {
        PathBuf::from(stripped)
    } else if uri.contains("://") {
        return None;
    } else {
        PathBuf::from(uri)
    };
    let bytes = fs::read(path).ok()?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Some(hex::encode(hasher.finalize()))
}
