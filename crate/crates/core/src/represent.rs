//! Milestone-tailored stakeholder documents derived from a revision.
//!
//! A [`Milestone`] names a stakeholder, a communication purpose, a document
//! kind, and a tag-based scope filter. [`derive()`] is the tailoring function:
//! a pure transformation of one revision into a [`Representation`] (ordered
//! markdown sections, each anchored to the argument elements it renders) and
//! a [`TraceabilityManifest`]. [`verify_traceability`] re-checks a document
//! against its source revision, so tampering or drift is detectable long
//! after derivation.
//!
//! Document kinds:
//! - release document: executive summary of every residual-risk item, claim
//!   status table, open risks, indicator status. For internal release
//!   decisions.
//! - safety report: narrative per top-level branch, with `internal`-tagged
//!   elements excluded from scope. For the public.
//! - conformity case: sections grouped by `standard:`-prefixed tags. For
//!   certification agencies.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::conservation::{SpiStatusEntry, ValidityState};
use crate::model::{is_valid_ident, Argument, ElementId, ElementKind, Tag};
use crate::text::{self, ParseError, TokenStream};
use crate::Timestamp;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stakeholder {
    DecisionMaker,
    Public,
    CertificationAgency,
    Custom(String),
}

impl Stakeholder {
    pub fn label(&self) -> &str {
        match self {
            Stakeholder::DecisionMaker => "decision maker",
            Stakeholder::Public => "public",
            Stakeholder::CertificationAgency => "certification agency",
            Stakeholder::Custom(name) => name,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationKind {
    ReleaseDocument,
    SafetyReport,
    ConformityCase,
}

impl RepresentationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RepresentationKind::ReleaseDocument => "release_document",
            RepresentationKind::SafetyReport => "safety_report",
            RepresentationKind::ConformityCase => "conformity_case",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            RepresentationKind::ReleaseDocument => "Release Document",
            RepresentationKind::SafetyReport => "Safety Report",
            RepresentationKind::ConformityCase => "Conformity Case",
        }
    }

    fn from_keyword(word: &str) -> Option<Self> {
        match word {
            "release_document" => Some(RepresentationKind::ReleaseDocument),
            "safety_report" => Some(RepresentationKind::SafetyReport),
            "conformity_case" => Some(RepresentationKind::ConformityCase),
            _ => None,
        }
    }
}

/// Tag-based element selection. An empty include list selects everything;
/// excluded tags are removed afterwards.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScopeFilter {
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub include: BTreeSet<Tag>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub exclude: BTreeSet<Tag>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Milestone {
    pub id: String,
    pub name: String,
    pub stakeholder: Stakeholder,
    pub purpose: String,
    pub kind: RepresentationKind,
    #[serde(default)]
    pub scope: ScopeFilter,
}

/// One rendered document section anchored to its source elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub heading: String,
    pub body: String,
    pub sources: BTreeSet<ElementId>,
}

/// A derived stakeholder document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub milestone_id: String,
    pub revision_id: u64,
    pub sections: Vec<Section>,
    pub generated_at: Timestamp,
}

/// Machine-checkable mapping between sections and element identifiers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceabilityManifest {
    pub sections: Vec<BTreeSet<ElementId>>,
    pub uncovered: BTreeSet<ElementId>,
}

impl TraceabilityManifest {
    /// Element to section indices, derived from the forward map.
    pub fn reverse(&self) -> BTreeMap<ElementId, Vec<usize>> {
        let mut reverse: BTreeMap<ElementId, Vec<usize>> = BTreeMap::new();
        for (index, sources) in self.sections.iter().enumerate() {
            for id in sources {
                reverse.entry(id.clone()).or_default().push(index);
            }
        }
        reverse
    }

    pub fn covered(&self) -> BTreeSet<ElementId> {
        let mut covered = BTreeSet::new();
        for sources in &self.sections {
            covered.extend(sources.iter().cloned());
        }
        covered
    }
}

/// Monitoring context a derivation renders: claim validity and indicator
/// status. Before deployment both are empty.
#[derive(Clone, Debug, Default)]
pub struct DeriveInputs {
    pub validity: ValidityState,
    pub spi_status: Vec<SpiStatusEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeriveError {
    #[error("milestone `{milestone}` selects no elements of revision {revision}")]
    EmptyScope { milestone: String, revision: u64 },
}

/// Elements a milestone selects from an argument. Safety reports additionally
/// drop `internal`-tagged elements: they are out of scope for the public, not
/// merely unrendered.
pub fn scope_for(milestone: &Milestone, argument: &Argument) -> BTreeSet<ElementId> {
    argument
        .elements
        .values()
        .filter(|element| {
            let included = milestone.scope.include.is_empty()
                || element.tags.iter().any(|t| milestone.scope.include.contains(t));
            let excluded = element.tags.iter().any(|t| milestone.scope.exclude.contains(t));
            let internal_cut =
                milestone.kind == RepresentationKind::SafetyReport && element.has_tag("internal");
            included && !excluded && !internal_cut
        })
        .map(|element| element.id.clone())
        .collect()
}

/// The residual-risk items a release document must surface: in-scope
/// undeveloped and uninstantiated elements plus every invalidated claim.
/// Invalidated claims that no longer exist in this revision cannot be
/// anchored and are reported through the dangling-indicator channel instead.
pub fn residual_risk_ids(
    argument: &Argument,
    scope: &BTreeSet<ElementId>,
    validity: &ValidityState,
) -> BTreeSet<ElementId> {
    let mut ids: BTreeSet<ElementId> = scope
        .iter()
        .filter(|id| {
            let element = &argument.elements[*id];
            element.is_undeveloped() || element.is_uninstantiated()
        })
        .cloned()
        .collect();
    ids.extend(
        validity
            .invalidated()
            .into_iter()
            .filter(|id| argument.contains(id)),
    );
    ids
}

fn table_cell(text: &str) -> String {
    text.replace('|', "\\|")
}

fn element_line(argument: &Argument, id: &ElementId) -> String {
    let element = &argument.elements[id];
    let mut flags = Vec::new();
    if element.is_undeveloped() {
        flags.push("undeveloped");
    }
    if element.is_uninstantiated() {
        flags.push("uninstantiated");
    }
    let status = if flags.is_empty() {
        String::new()
    } else {
        alloc::format!(", {}", flags.join(", "))
    };
    alloc::format!(
        "- {id} ({}{status}): \"{}\"",
        element.kind.keyword(),
        element.statement
    )
}

fn fallback_sources(argument: &Argument, ids: BTreeSet<ElementId>) -> BTreeSet<ElementId> {
    if ids.is_empty() {
        BTreeSet::from([argument.root.clone()])
    } else {
        ids
    }
}

/// Derives the representation and manifest for a milestone from one revision.
/// Pure: identical inputs produce identical documents.
pub fn derive(
    argument: &Argument,
    revision_id: u64,
    milestone: &Milestone,
    inputs: &DeriveInputs,
    generated_at: Timestamp,
) -> Result<(Representation, TraceabilityManifest), DeriveError> {
    let scope = scope_for(milestone, argument);
    if scope.is_empty() {
        return Err(DeriveError::EmptyScope {
            milestone: milestone.id.clone(),
            revision: revision_id,
        });
    }

    let sections = match milestone.kind {
        RepresentationKind::ReleaseDocument => release_sections(argument, &scope, inputs),
        RepresentationKind::SafetyReport => safety_report_sections(argument, &scope),
        RepresentationKind::ConformityCase => conformity_sections(argument, &scope),
    };

    let manifest = TraceabilityManifest {
        sections: sections.iter().map(|s| s.sources.clone()).collect(),
        uncovered: {
            let covered: BTreeSet<ElementId> =
                sections.iter().flat_map(|s| s.sources.iter().cloned()).collect();
            scope.difference(&covered).cloned().collect()
        },
    };
    let representation = Representation {
        milestone_id: milestone.id.clone(),
        revision_id,
        sections,
        generated_at,
    };
    Ok((representation, manifest))
}

pub const EXECUTIVE_SUMMARY_HEADING: &str = "Executive Summary";

fn release_sections(
    argument: &Argument,
    scope: &BTreeSet<ElementId>,
    inputs: &DeriveInputs,
) -> Vec<Section> {
    let mut sections = Vec::new();
    let invalidated = inputs.validity.invalidated();

    // Executive summary: one line per residual-risk item.
    let residual = residual_risk_ids(argument, scope, &inputs.validity);
    let mut body = String::new();
    if residual.is_empty() {
        body.push_str("No open residual risk items.\n");
    } else {
        body.push_str("Residual risk items requiring an explicit decision:\n\n");
        for id in &residual {
            let mut reasons = Vec::new();
            if let Some(element) = argument.element(id) {
                if element.is_undeveloped() {
                    reasons.push("undeveloped".to_string());
                }
                if element.is_uninstantiated() {
                    reasons.push("uninstantiated".to_string());
                }
            }
            if invalidated.contains(id) {
                let guards: Vec<String> = inputs
                    .spi_status
                    .iter()
                    .filter(|s| s.guarded_claims.contains(id))
                    .map(|s| s.id.clone())
                    .collect();
                if guards.is_empty() {
                    reasons.push("invalidated".to_string());
                } else {
                    reasons.push(alloc::format!("invalidated ({})", guards.join(", ")));
                }
            }
            let statement = argument
                .element(id)
                .map(|e| alloc::format!(" \"{}\"", e.statement))
                .unwrap_or_default();
            let _ = writeln!(body, "- {id}: {}{statement}", reasons.join(", "));
        }
    }
    sections.push(Section {
        heading: EXECUTIVE_SUMMARY_HEADING.to_string(),
        body,
        sources: fallback_sources(argument, residual),
    });

    // Claim status table over in-scope goals.
    let goals: Vec<&ElementId> = scope
        .iter()
        .filter(|id| argument.elements[*id].kind == ElementKind::Goal)
        .collect();
    let mut body = String::new();
    body.push_str("| Claim | Statement | Development | Instantiation | Validity |\n");
    body.push_str("| --- | --- | --- | --- | --- |\n");
    for id in &goals {
        let element = &argument.elements[*id];
        let development = if element.is_undeveloped() { "undeveloped" } else { "developed" };
        let instantiation = if element.is_uninstantiated() {
            "uninstantiated"
        } else {
            "instantiated"
        };
        let validity = match inputs.validity.claims.get(*id) {
            None => "unmonitored",
            Some(crate::conservation::ClaimValidity::Valid) => "valid",
            Some(crate::conservation::ClaimValidity::Invalidated(_)) => "invalidated",
        };
        let _ = writeln!(
            body,
            "| {id} | {} | {development} | {instantiation} | {validity} |",
            table_cell(&element.statement)
        );
    }
    sections.push(Section {
        heading: "Claim Status".to_string(),
        body,
        sources: fallback_sources(argument, goals.into_iter().cloned().collect()),
    });

    // Open risks: the undeveloped / uninstantiated detail view.
    let open: BTreeSet<ElementId> = scope
        .iter()
        .filter(|id| {
            let element = &argument.elements[*id];
            element.is_undeveloped() || element.is_uninstantiated()
        })
        .cloned()
        .collect();
    let mut body = String::new();
    if open.is_empty() {
        body.push_str("All in-scope elements are developed and instantiated.\n");
    } else {
        for id in &open {
            let _ = writeln!(body, "{}", element_line(argument, id));
        }
    }
    sections.push(Section {
        heading: "Open Risks".to_string(),
        body,
        sources: fallback_sources(argument, open),
    });

    // Indicator status.
    let mut body = String::new();
    let mut sources = BTreeSet::new();
    if inputs.spi_status.is_empty() {
        body.push_str("No safety performance indicators registered.\n");
    } else {
        body.push_str("| Indicator | Metric | Guards | Limit | Window | Current | Status |\n");
        body.push_str("| --- | --- | --- | --- | --- | --- | --- |\n");
        for entry in &inputs.spi_status {
            let guards: Vec<String> =
                entry.guarded_claims.iter().map(|c| c.to_string()).collect();
            for claim in &entry.guarded_claims {
                if argument.contains(claim) {
                    sources.insert(claim.clone());
                }
            }
            let current = entry
                .window_value
                .map(|v| v.to_display_string())
                .unwrap_or_else(|| "insufficient data".to_string());
            let status = match entry.within_limits {
                None => "not evaluated",
                Some(true) => "within limits",
                Some(false) => "violated",
            };
            let _ = writeln!(
                body,
                "| {} | {} | {} | {} {} {} | {} | {} | {} |",
                entry.id,
                table_cell(&entry.metric_name),
                guards.join(", "),
                entry.comparator.token(),
                entry.threshold.to_display_string(),
                table_cell(&entry.unit),
                entry.window.canonical(),
                current,
                status
            );
        }
    }
    sections.push(Section {
        heading: "Safety Performance Indicators".to_string(),
        body,
        sources: fallback_sources(argument, sources),
    });

    sections
}

fn safety_report_sections(argument: &Argument, scope: &BTreeSet<ElementId>) -> Vec<Section> {
    let in_scope = |id: &ElementId| scope.contains(id);
    let mut sections = Vec::new();

    // Overview: the root claim and its immediate context.
    let mut overview_sources = BTreeSet::new();
    let mut body = String::new();
    if in_scope(&argument.root) {
        let root = &argument.elements[&argument.root];
        let _ = writeln!(body, "{}\n", root.statement);
        overview_sources.insert(argument.root.clone());
        let contexts: Vec<&ElementId> = argument
            .targets(&argument.root, crate::model::RelationKind::InContextOf)
            .into_iter()
            .filter(|id| in_scope(id))
            .collect();
        if !contexts.is_empty() {
            body.push_str("Context of this claim:\n\n");
            for id in contexts {
                let _ = writeln!(body, "{}", element_line(argument, id));
                overview_sources.insert(id.clone());
            }
        }
    } else {
        body.push_str("The top-level claim is outside the scope of this report.\n");
    }
    sections.push(Section {
        heading: "Overview".to_string(),
        body,
        sources: fallback_sources(argument, overview_sources),
    });

    // One narrative section per top-level branch.
    let branches: Vec<&ElementId> = argument
        .targets(&argument.root, crate::model::RelationKind::SupportedBy)
        .into_iter()
        .collect();
    for branch in branches {
        let closure = branch_closure(argument, branch);
        let members: BTreeSet<ElementId> =
            closure.into_iter().filter(|id| in_scope(id)).collect();
        if members.is_empty() {
            continue;
        }
        let mut body = String::new();
        for id in text::canonical_order(argument) {
            if members.contains(&id) {
                let _ = writeln!(body, "{}", element_line(argument, &id));
            }
        }
        sections.push(Section {
            heading: alloc::format!("Branch {branch}"),
            body,
            sources: members,
        });
    }
    sections
}

/// Supported-by closure from a branch head plus attached context elements,
/// regardless of element kind at the head.
fn branch_closure(argument: &Argument, head: &ElementId) -> BTreeSet<ElementId> {
    let mut members = BTreeSet::new();
    let mut queue = alloc::collections::VecDeque::new();
    if argument.contains(head) {
        members.insert(head.clone());
        queue.push_back(head.clone());
    }
    while let Some(current) = queue.pop_front() {
        for target in argument.targets(&current, crate::model::RelationKind::SupportedBy) {
            if argument.contains(target) && members.insert(target.clone()) {
                queue.push_back(target.clone());
            }
        }
    }
    let fixed: Vec<ElementId> = members.iter().cloned().collect();
    for id in fixed {
        for target in argument.targets(&id, crate::model::RelationKind::InContextOf) {
            if argument.contains(target) {
                members.insert(target.clone());
            }
        }
    }
    members
}

fn conformity_sections(argument: &Argument, scope: &BTreeSet<ElementId>) -> Vec<Section> {
    // Group in-scope elements by `standard:` tag suffix.
    let mut by_standard: BTreeMap<String, BTreeSet<ElementId>> = BTreeMap::new();
    for id in scope {
        for tag in &argument.elements[id].tags {
            if let Some(suffix) = tag.standard_suffix() {
                by_standard
                    .entry(suffix.to_string())
                    .or_default()
                    .insert(id.clone());
            }
        }
    }

    let mut sections = Vec::new();
    let mut body = String::new();
    let root = &argument.elements[&argument.root];
    let _ = writeln!(body, "Core claim: \"{}\"\n", root.statement);
    if by_standard.is_empty() {
        body.push_str("No elements are mapped to standards yet.\n");
    } else {
        body.push_str("Standards addressed:\n\n");
        for standard in by_standard.keys() {
            let _ = writeln!(body, "- {standard}");
        }
    }
    sections.push(Section {
        heading: "Conformity Overview".to_string(),
        body,
        sources: BTreeSet::from([argument.root.clone()]),
    });

    for (standard, members) in &by_standard {
        let mut body = String::new();
        for id in members {
            let _ = writeln!(body, "{}", element_line(argument, id));
        }
        sections.push(Section {
            heading: alloc::format!("Standard {standard}"),
            body,
            sources: members.clone(),
        });
    }
    sections
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

/// One failed traceability check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceFinding {
    pub check: String,
    pub ids: Vec<ElementId>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub findings: Vec<TraceFinding>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.findings.is_empty()
    }
}

/// Extracts the element ids listed as items in the executive summary body.
pub fn summary_listed_ids(body: &str) -> BTreeSet<ElementId> {
    let mut ids = BTreeSet::new();
    for line in body.lines() {
        let Some(rest) = line.strip_prefix("- ") else {
            continue;
        };
        let Some((candidate, _)) = rest.split_once(':') else {
            continue;
        };
        if is_valid_ident(candidate) {
            if let Ok(id) = ElementId::new(candidate) {
                ids.insert(id);
            }
        }
    }
    ids
}

/// Re-checks a representation against its source revision:
/// (a) every referenced element exists, (b) every in-scope element is covered
/// by a section or listed as uncovered, (c) a release document's executive
/// summary lists every residual-risk item line by line, (d) the sidecar
/// manifest agrees with the document's own trace anchors.
pub fn verify_traceability(
    representation: &Representation,
    manifest: &TraceabilityManifest,
    argument: &Argument,
    milestone: &Milestone,
    inputs: &DeriveInputs,
) -> VerificationReport {
    let mut findings = Vec::new();

    let mut referenced: BTreeSet<ElementId> = BTreeSet::new();
    for section in &representation.sections {
        referenced.extend(section.sources.iter().cloned());
    }
    for sources in &manifest.sections {
        referenced.extend(sources.iter().cloned());
    }
    referenced.extend(manifest.uncovered.iter().cloned());
    let unknown: Vec<ElementId> = referenced
        .iter()
        .filter(|id| !argument.contains(id))
        .cloned()
        .collect();
    if !unknown.is_empty() {
        findings.push(TraceFinding {
            check: "existence".to_string(),
            ids: unknown.clone(),
            detail: alloc::format!(
                "{} referenced element(s) do not exist in revision {}",
                unknown.len(),
                representation.revision_id
            ),
        });
    }

    let scope = scope_for(milestone, argument);
    let mut accounted = manifest.covered();
    accounted.extend(manifest.uncovered.iter().cloned());
    let missing: Vec<ElementId> = scope.difference(&accounted).cloned().collect();
    if !missing.is_empty() {
        findings.push(TraceFinding {
            check: "coverage".to_string(),
            ids: missing.clone(),
            detail: alloc::format!(
                "{} in-scope element(s) are neither covered nor listed as uncovered",
                missing.len()
            ),
        });
    }

    if milestone.kind == RepresentationKind::ReleaseDocument {
        let required = residual_risk_ids(argument, &scope, &inputs.validity);
        match representation
            .sections
            .iter()
            .find(|s| s.heading == EXECUTIVE_SUMMARY_HEADING)
        {
            None => findings.push(TraceFinding {
                check: "residual-risk".to_string(),
                ids: Vec::new(),
                detail: "the executive summary section is missing".to_string(),
            }),
            Some(summary) => {
                let listed = summary_listed_ids(&summary.body);
                let absent: Vec<ElementId> =
                    required.difference(&listed).cloned().collect();
                if !absent.is_empty() {
                    findings.push(TraceFinding {
                        check: "residual-risk".to_string(),
                        ids: absent.clone(),
                        detail: alloc::format!(
                            "{} residual-risk item(s) are not listed in the executive summary",
                            absent.len()
                        ),
                    });
                }
            }
        }
    }

    if manifest.sections.len() != representation.sections.len() {
        findings.push(TraceFinding {
            check: "manifest".to_string(),
            ids: Vec::new(),
            detail: alloc::format!(
                "manifest has {} section(s), document has {}",
                manifest.sections.len(),
                representation.sections.len()
            ),
        });
    } else {
        for (index, (section, sources)) in representation
            .sections
            .iter()
            .zip(&manifest.sections)
            .enumerate()
        {
            if &section.sources != sources {
                let mut ids: Vec<ElementId> = section
                    .sources
                    .symmetric_difference(sources)
                    .cloned()
                    .collect();
                ids.sort();
                findings.push(TraceFinding {
                    check: "manifest".to_string(),
                    ids,
                    detail: alloc::format!(
                        "manifest entry {index} disagrees with the document's trace anchor"
                    ),
                });
            }
        }
    }

    VerificationReport { findings }
}

// ---------------------------------------------------------------------------
// `.milestones` file format
// ---------------------------------------------------------------------------

/// Parses a milestones file: one `milestone` record per entry.
pub fn parse_milestones_file(input: &str) -> Result<Vec<Milestone>, Vec<ParseError>> {
    let mut stream = match TokenStream::new(input) {
        Ok(stream) => stream,
        Err(err) => return Err(alloc::vec![err]),
    };
    let mut milestones = Vec::new();
    let mut seen = BTreeSet::new();
    while !stream.at_end() {
        match parse_milestone_record(&mut stream) {
            Ok(milestone) => {
                if !seen.insert(milestone.id.clone()) {
                    return Err(alloc::vec![stream.error_here(alloc::format!(
                        "unique milestone id (duplicate `{}`)",
                        milestone.id
                    ))]);
                }
                milestones.push(milestone);
            }
            Err(err) => return Err(alloc::vec![err]),
        }
    }
    Ok(milestones)
}

fn parse_taglist(stream: &mut TokenStream) -> Result<BTreeSet<Tag>, ParseError> {
    let mut tags = BTreeSet::new();
    loop {
        let (word, span) = stream.expect_word("tag")?;
        match Tag::new(word) {
            Ok(tag) => {
                tags.insert(tag);
            }
            Err(err) => {
                return Err(ParseError {
                    span,
                    expected: "tag".to_string(),
                    found: alloc::format!("`{}`", err.literal),
                })
            }
        }
        if stream.expect_tok(crate::text::Tok::Comma, "`,`").is_err() {
            break;
        }
    }
    Ok(tags)
}

fn parse_milestone_record(stream: &mut TokenStream) -> Result<Milestone, ParseError> {
    stream.expect_keyword("milestone")?;
    let (id, id_span) = stream.expect_word("milestone identifier")?;
    if !is_valid_ident(&id) {
        return Err(ParseError {
            span: id_span,
            expected: "milestone identifier".to_string(),
            found: alloc::format!("`{id}`"),
        });
    }
    let (name, _) = stream.expect_string("quoted milestone name")?;
    stream.expect_keyword("stakeholder")?;
    let (kind_word, span) = stream.expect_word("stakeholder kind")?;
    let stakeholder = match kind_word.as_str() {
        "decision_maker" => Stakeholder::DecisionMaker,
        "public" => Stakeholder::Public,
        "certification_agency" => Stakeholder::CertificationAgency,
        "custom" => {
            let (label, _) = stream.expect_string("quoted custom stakeholder")?;
            Stakeholder::Custom(label)
        }
        other => {
            return Err(ParseError {
                span,
                expected: "`decision_maker`, `public`, `certification_agency`, or `custom`"
                    .to_string(),
                found: alloc::format!("`{other}`"),
            })
        }
    };
    stream.expect_keyword("purpose")?;
    let (purpose, _) = stream.expect_string("quoted purpose")?;
    stream.expect_keyword("kind")?;
    let (rep_word, rep_span) = stream.expect_word("representation kind")?;
    let kind = RepresentationKind::from_keyword(&rep_word).ok_or_else(|| ParseError {
        span: rep_span,
        expected: "`release_document`, `safety_report`, or `conformity_case`".to_string(),
        found: alloc::format!("`{rep_word}`"),
    })?;
    let mut scope = ScopeFilter::default();
    if stream.eat_keyword("include") {
        scope.include = parse_taglist(stream)?;
    }
    if stream.eat_keyword("exclude") {
        scope.exclude = parse_taglist(stream)?;
    }
    Ok(Milestone {
        id,
        name,
        stakeholder,
        purpose,
        kind,
        scope,
    })
}

/// Canonical one-line form of a milestone record.
pub fn serialize_milestone(milestone: &Milestone) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "milestone {} \"{}\" stakeholder ",
        milestone.id,
        text::escape_statement(&milestone.name)
    );
    match &milestone.stakeholder {
        Stakeholder::DecisionMaker => out.push_str("decision_maker"),
        Stakeholder::Public => out.push_str("public"),
        Stakeholder::CertificationAgency => out.push_str("certification_agency"),
        Stakeholder::Custom(label) => {
            let _ = write!(out, "custom \"{}\"", text::escape_statement(label));
        }
    }
    let _ = write!(
        out,
        " purpose \"{}\" kind {}",
        text::escape_statement(&milestone.purpose),
        milestone.kind.keyword()
    );
    let taglist = |tags: &BTreeSet<Tag>| {
        tags.iter()
            .map(|t| t.as_str().to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    if !milestone.scope.include.is_empty() {
        let _ = write!(out, " include {}", taglist(&milestone.scope.include));
    }
    if !milestone.scope.exclude.is_empty() {
        let _ = write!(out, " exclude {}", taglist(&milestone.scope.exclude));
    }
    out.push('\n');
    out
}
