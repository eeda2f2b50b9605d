//! The argumentation/system-lifecycle coupling surface.
//!
//! Inbound, evidence produced by system-lifecycle activities is registered
//! onto solution elements and immediately feeds the evidence maturity
//! fraction. Outbound, [`gap_analysis`] turns argumentation gaps into
//! refinement signals naming the lifecycle activity that should close them.
//! Release records gate deployment: a revision deploys only after a derived
//! release document exists and the decision on it was `Granted`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{Argument, ElementId, ElementKind, RelationKind};
use crate::Timestamp;

/// Evidence from the system lifecycle attached to a solution element.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceRecord {
    pub id: u64,
    pub solution_id: ElementId,
    pub artifact_uri: String,
    pub artifact_kind: String,
    pub produced_by_activity: String,
    pub registered_at: Timestamp,
    /// Hex digest of the artifact when the URI resolves to a local file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_hash: Option<String>,
}

/// Solutions with at least one evidence record. Multiple records on one
/// solution count once for the evidence fraction; all records are retained.
pub fn evidenced_solutions(records: &[EvidenceRecord]) -> BTreeSet<ElementId> {
    records.iter().map(|r| r.solution_id.clone()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CouplingError {
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("element {id} is a {found}, evidence attaches to solutions only")]
    NotASolution { id: ElementId, found: ElementKind },
}

/// Evidence may only be attached to an existing solution of the latest
/// revision.
pub fn check_evidence_target(argument: &Argument, solution_id: &ElementId) -> Result<(), CouplingError> {
    match argument.element(solution_id) {
        None => Err(CouplingError::UnknownElement(solution_id.clone())),
        Some(element) if element.kind != ElementKind::Solution => {
            Err(CouplingError::NotASolution {
                id: solution_id.clone(),
                found: element.kind,
            })
        }
        Some(_) => Ok(()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    UnsupportedGoal,
    UndevelopedGoal,
    UnevidencedSolution,
    MissingProcessArgument,
}

impl SignalKind {
    pub const ALL: [SignalKind; 4] = [
        SignalKind::UnsupportedGoal,
        SignalKind::UndevelopedGoal,
        SignalKind::UnevidencedSolution,
        SignalKind::MissingProcessArgument,
    ];
}

/// A gap in the argumentation, addressed to the system lifecycle.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RefinementSignal {
    pub kind: SignalKind,
    pub element_ids: BTreeSet<ElementId>,
    pub suggested_activity: String,
}

/// Configurable mapping from signal kind to the suggested lifecycle activity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivityMap {
    map: BTreeMap<SignalKind, String>,
}

impl Default for ActivityMap {
    fn default() -> Self {
        let mut map = BTreeMap::new();
        map.insert(SignalKind::UnsupportedGoal, "safety analysis".to_string());
        map.insert(SignalKind::UndevelopedGoal, "argument development".to_string());
        map.insert(
            SignalKind::UnevidencedSolution,
            "verification & validation".to_string(),
        );
        map.insert(
            SignalKind::MissingProcessArgument,
            "process definition".to_string(),
        );
        ActivityMap { map }
    }
}

impl ActivityMap {
    pub fn with_activity(mut self, kind: SignalKind, activity: impl Into<String>) -> Self {
        self.map.insert(kind, activity.into());
        self
    }

    pub fn activity_for(&self, kind: SignalKind) -> &str {
        self.map.get(&kind).map(String::as_str).unwrap_or("")
    }
}

/// Scans a revision for argumentation gaps: developed goals without support,
/// undeveloped goals, unevidenced solutions, and a missing process argument.
/// Output is deterministic: ordered by signal kind, then element id.
pub fn gap_analysis(
    argument: &Argument,
    evidenced: &BTreeSet<ElementId>,
    activities: &ActivityMap,
) -> Vec<RefinementSignal> {
    let mut signals = Vec::new();
    let single = |kind: SignalKind, id: &ElementId| RefinementSignal {
        kind,
        element_ids: BTreeSet::from([id.clone()]),
        suggested_activity: activities.activity_for(kind).to_string(),
    };

    for element in argument.elements_of_kind(ElementKind::Goal) {
        if !element.is_undeveloped()
            && argument
                .targets(&element.id, RelationKind::SupportedBy)
                .is_empty()
        {
            signals.push(single(SignalKind::UnsupportedGoal, &element.id));
        }
        if element.is_undeveloped() {
            signals.push(single(SignalKind::UndevelopedGoal, &element.id));
        }
    }
    for element in argument.elements_of_kind(ElementKind::Solution) {
        if !evidenced.contains(&element.id) {
            signals.push(single(SignalKind::UnevidencedSolution, &element.id));
        }
    }
    if !argument.elements.values().any(|e| e.has_tag("process")) {
        signals.push(RefinementSignal {
            kind: SignalKind::MissingProcessArgument,
            element_ids: BTreeSet::new(),
            suggested_activity: activities
                .activity_for(SignalKind::MissingProcessArgument)
                .to_string(),
        });
    }
    signals.sort();
    signals
}

// ---------------------------------------------------------------------------
// Release gating
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReleaseDecision {
    Pending,
    Granted,
    Denied,
}

/// A release request and its decision, event-sourced in the store. A record
/// always references the derived release document; there is no release
/// without one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseRecord {
    pub id: u64,
    pub revision_id: u64,
    pub milestone_id: String,
    pub document_path: String,
    pub trace_path: String,
    pub requested_at: Timestamp,
    pub decision: ReleaseDecision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decided_by: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decided_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<String>,
}

impl ReleaseRecord {
    pub fn is_pending(&self) -> bool {
        self.decision == ReleaseDecision::Pending
    }

    pub fn grants(&self, revision_id: u64) -> bool {
        self.decision == ReleaseDecision::Granted && self.revision_id == revision_id
    }
}
