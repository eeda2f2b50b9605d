//! Revisions and the operations that evolve them.
//!
//! The lifecycle runs in three phases: baselining produces revision 0 from a
//! context-open framework, evolution applies argument operations
//! (instantiation, elimination, extension) yielding successive revisions of
//! growing maturity, and conservation follows deployment, admitting only
//! monitored update operations. Revisions are immutable; every revision
//! records the operation that produced it, so the whole chain replays from
//! revision 0.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{
    self, apply_changeset, codes, require_valid, Argument, ChangeSet, Development, Diagnostic,
    ElementId, ModelError, Relation,
};
use crate::pattern::{self, BindingSet, Framework, FrameworkError, PatternError};
use crate::rational::Rational;
use crate::Timestamp;

/// Lifecycle phase of a revision. Legal transitions: Baselining to Evolution
/// (first operation), Evolution to Conservation (deploy), Conservation to
/// Conservation (updates).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Baselining,
    Evolution,
    Conservation,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Phase::Baselining => "baselining",
            Phase::Evolution => "evolution",
            Phase::Conservation => "conservation",
        };
        f.write_str(name)
    }
}

/// Reference to a threshold violation, stable across storage.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ViolationRef {
    pub spi_id: String,
    pub detected_at: Timestamp,
}

/// An operation applied to a revision to produce its successor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ArgOperation {
    /// Bind placeholders and expand multiplicities of a framework pattern.
    Instantiate {
        pattern: String,
        bindings: BindingSet,
        /// Optional elements dropped by this step, recorded for the audit trail.
        #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
        dropped_optionals: BTreeSet<ElementId>,
    },
    /// Remove a non-relevant argumentation part. Removals are safety-relevant
    /// audit events, so a justification is mandatory.
    Eliminate {
        root: ElementId,
        justification: String,
    },
    /// Attach a sub-argument beneath an existing element.
    Extend {
        fragment: Argument,
        attach_at: ElementId,
        justification: String,
    },
    /// Transfer into the conservation phase; the argument is unchanged.
    Deploy { release: u64 },
    /// Post-deployment update triggered by violations or qualitative insight.
    ConservationUpdate {
        violations: Vec<ViolationRef>,
        change: ChangeSet,
        rationale: String,
        #[serde(default)]
        qualitative: bool,
    },
}

impl ArgOperation {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ArgOperation::Instantiate { .. } => "instantiate",
            ArgOperation::Eliminate { .. } => "eliminate",
            ArgOperation::Extend { .. } => "extend",
            ArgOperation::Deploy { .. } => "deploy",
            ArgOperation::ConservationUpdate { .. } => "conservation_update",
        }
    }
}

/// Relative weights for the maturity aggregate; defaults to equal thirds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaturityWeights {
    pub developed: u32,
    pub instantiated: u32,
    pub evidence: u32,
}

impl Default for MaturityWeights {
    fn default() -> Self {
        MaturityWeights {
            developed: 1,
            instantiated: 1,
            evidence: 1,
        }
    }
}

/// Measured maturity of a revision. Fractions with an empty denominator are
/// defined as 1 (nothing left to do).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaturityScore {
    pub developed: Rational,
    pub instantiated: Rational,
    pub evidence: Rational,
    pub aggregate: Rational,
}

/// An immutable snapshot of the argument plus lineage metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Revision {
    pub id: u64,
    pub parent: Option<u64>,
    pub phase: Phase,
    pub argument: Argument,
    pub operation: Option<ArgOperation>,
    pub created_at: Timestamp,
    pub maturity: MaturityScore,
    pub context_score: u64,
}

/// Inputs every metric computation needs: the framework vocabulary fixes the
/// placeholder basis, and the evidence index decides which solutions count as
/// evidenced.
#[derive(Clone, Debug)]
pub struct MetricContext<'a> {
    pub vocabulary: &'a BTreeSet<String>,
    pub evidenced_solutions: &'a BTreeSet<ElementId>,
    pub weights: MaturityWeights,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LifecycleError {
    #[error("framework contains no patterns")]
    EmptyFramework,
    #[error(transparent)]
    Framework(#[from] FrameworkError),
    #[error("resulting argument fails validation with {} error(s)", diagnostics.len())]
    ValidationFailed { diagnostics: Vec<Diagnostic> },
    #[error("operation `{operation}` is not allowed in phase {phase}")]
    PhaseError { phase: Phase, operation: &'static str },
    #[error("framework has no pattern named `{name}`")]
    UnknownPattern { name: String },
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("element {id} already exists; extension fragments must use fresh identifiers")]
    DuplicateElement { id: ElementId },
    #[error("a non-empty justification is required for this operation")]
    EmptyJustification,
    #[error("the argument root cannot be eliminated")]
    EliminateRoot,
    #[error("extension fragment is not well formed: {0}")]
    InvalidFragment(ModelError),
    #[error("conservation change cannot be applied: {0}")]
    ChangeRejected(ModelError),
}

/// Computes the three maturity fractions and their weighted aggregate.
pub fn maturity(argument: &Argument, ctx: &MetricContext<'_>) -> MaturityScore {
    let fraction = |num: usize, den: usize| {
        if den == 0 {
            Rational::ONE
        } else {
            Rational::new(num as i64, den as i64)
        }
    };

    let developable: Vec<&model::Element> = argument
        .elements
        .values()
        .filter(|e| e.kind.may_be_undeveloped())
        .collect();
    let developed = fraction(
        developable.iter().filter(|e| !e.is_undeveloped()).count(),
        developable.len(),
    );

    let open = argument.open_placeholders();
    let bound = ctx
        .vocabulary
        .iter()
        .filter(|name| !open.contains(*name))
        .count();
    let instantiated = fraction(bound, ctx.vocabulary.len());

    let solutions: Vec<&model::Element> = argument
        .elements_of_kind(model::ElementKind::Solution)
        .collect();
    let evidence = fraction(
        solutions
            .iter()
            .filter(|e| ctx.evidenced_solutions.contains(&e.id))
            .count(),
        solutions.len(),
    );

    let weight_sum = ctx.weights.developed + ctx.weights.instantiated + ctx.weights.evidence;
    let weight = |w: u32| Rational::from_integer(w as i64);
    let aggregate = (developed * weight(ctx.weights.developed)
        + instantiated * weight(ctx.weights.instantiated)
        + evidence * weight(ctx.weights.evidence))
        / weight(weight_sum.max(1));

    MaturityScore {
        developed,
        instantiated,
        evidence,
        aggregate,
    }
}

/// Context enrichment proxy: bound placeholder names plus instantiated
/// elements. Reproducible from the serialized text alone by counting
/// placeholder tokens and `uninstantiated` flags.
pub fn context_score(argument: &Argument, vocabulary: &BTreeSet<String>) -> u64 {
    let report = pattern::coverage(argument, vocabulary);
    let instantiated = argument
        .elements
        .values()
        .filter(|e| !e.is_uninstantiated())
        .count() as u64;
    report.bound_placeholders + instantiated
}

/// Result of baselining: revision 0 plus non-fatal findings such as a missing
/// process argument.
#[derive(Clone, Debug)]
pub struct BaselineOutcome {
    pub revision: Revision,
    pub warnings: Vec<Diagnostic>,
}

/// Composes the framework into revision 0. The composed argument must be well
/// formed; a missing `process`-tagged element is reported as a warning, not
/// an error.
pub fn init_baseline(
    framework: &Framework,
    name: &str,
    created_at: Timestamp,
    weights: MaturityWeights,
) -> Result<BaselineOutcome, LifecycleError> {
    if framework.is_empty() {
        return Err(LifecycleError::EmptyFramework);
    }
    let argument = framework.compose(name)?;
    if let Err(ModelError::Invalid { diagnostics, .. }) = require_valid(&argument) {
        return Err(LifecycleError::ValidationFailed { diagnostics });
    }

    let mut warnings = Vec::new();
    if !argument.elements.values().any(|e| e.has_tag("process")) {
        warnings.push(Diagnostic::warning(
            codes::PROCESS_ARG_MISSING,
            Vec::new(),
            "no element is tagged `process`; the framework should contain a process argument",
        ));
    }

    let vocabulary = framework.vocabulary();
    let empty = BTreeSet::new();
    let ctx = MetricContext {
        vocabulary: &vocabulary,
        evidenced_solutions: &empty,
        weights,
    };
    let revision = Revision {
        id: 0,
        parent: None,
        phase: Phase::Baselining,
        maturity: maturity(&argument, &ctx),
        context_score: context_score(&argument, &vocabulary),
        argument,
        operation: None,
        created_at,
    };
    Ok(BaselineOutcome { revision, warnings })
}

/// Applies an operation to an argument without any phase or lineage logic.
/// This is the replay kernel: identical inputs produce identical outputs.
/// For `Instantiate`, `resolve_optionals` must be true exactly when this is
/// the first non-empty instantiation of the pattern in the lineage.
pub fn apply_op_to_argument(
    argument: &Argument,
    op: &ArgOperation,
    framework: &Framework,
    resolve_optionals: bool,
) -> Result<(Argument, BTreeSet<ElementId>), LifecycleError> {
    match op {
        ArgOperation::Instantiate {
            pattern, bindings, ..
        } => {
            let pattern = framework
                .pattern(pattern)
                .ok_or_else(|| LifecycleError::UnknownPattern {
                    name: pattern.clone(),
                })?;
            let outcome =
                pattern::instantiate_into(argument, pattern, bindings, resolve_optionals)?;
            Ok((outcome.argument, outcome.dropped_optionals))
        }
        ArgOperation::Eliminate {
            root,
            justification,
        } => {
            if justification.trim().is_empty() {
                return Err(LifecycleError::EmptyJustification);
            }
            if !argument.contains(root) {
                return Err(LifecycleError::UnknownElement(root.clone()));
            }
            if *root == argument.root {
                return Err(LifecycleError::EliminateRoot);
            }
            let mut next = argument.clone();
            next.elements.remove(root);
            next.relations
                .retain(|r| r.source != *root && r.target != *root);
            let reachable = next.reachable_from(&next.root);
            next.elements.retain(|id, _| reachable.contains(id));
            next.relations
                .retain(|r| reachable.contains(&r.source) && reachable.contains(&r.target));
            Ok((next, BTreeSet::new()))
        }
        ArgOperation::Extend {
            fragment,
            attach_at,
            justification,
        } => {
            if justification.trim().is_empty() {
                return Err(LifecycleError::EmptyJustification);
            }
            if !argument.contains(attach_at) {
                return Err(LifecycleError::UnknownElement(attach_at.clone()));
            }
            require_valid(fragment).map_err(LifecycleError::InvalidFragment)?;
            for id in fragment.elements.keys() {
                if argument.contains(id) {
                    return Err(LifecycleError::DuplicateElement { id: id.clone() });
                }
            }
            let mut next = argument.clone();
            next.elements.extend(
                fragment
                    .elements
                    .iter()
                    .map(|(id, e)| (id.clone(), e.clone())),
            );
            next.relations.extend(fragment.relations.iter().cloned());
            next.relations.insert(Relation::supported_by(
                attach_at.clone(),
                fragment.root.clone(),
            ));
            // Attaching support develops a previously undeveloped element.
            if let Some(element) = next.elements.get_mut(attach_at) {
                element.development = Development::Developed;
            }
            Ok((next, BTreeSet::new()))
        }
        ArgOperation::Deploy { .. } => Ok((argument.clone(), BTreeSet::new())),
        ArgOperation::ConservationUpdate { change, .. } => {
            let next = apply_changeset(argument, change).map_err(LifecycleError::ChangeRejected)?;
            Ok((next, BTreeSet::new()))
        }
    }
}

fn allowed_in_phase(phase: Phase, op: &ArgOperation) -> bool {
    match op {
        ArgOperation::Instantiate { .. }
        | ArgOperation::Eliminate { .. }
        | ArgOperation::Extend { .. } => {
            matches!(phase, Phase::Baselining | Phase::Evolution)
        }
        ArgOperation::Deploy { .. } => phase == Phase::Evolution,
        ArgOperation::ConservationUpdate { .. } => phase == Phase::Conservation,
    }
}

fn phase_after(op: &ArgOperation) -> Phase {
    match op {
        ArgOperation::Instantiate { .. }
        | ArgOperation::Eliminate { .. }
        | ArgOperation::Extend { .. } => Phase::Evolution,
        ArgOperation::Deploy { .. } | ArgOperation::ConservationUpdate { .. } => {
            Phase::Conservation
        }
    }
}

/// Applies an operation to a parent revision, producing the next revision.
/// The parent is never altered; an ill-formed result rejects the whole
/// operation with no partial state. Deployment gating (release records) is
/// enforced by the caller before constructing the `Deploy` operation.
pub fn apply_operation(
    parent: &Revision,
    op: ArgOperation,
    framework: &Framework,
    ctx: &MetricContext<'_>,
    created_at: Timestamp,
    resolve_optionals: bool,
) -> Result<Revision, LifecycleError> {
    if !allowed_in_phase(parent.phase, &op) {
        return Err(LifecycleError::PhaseError {
            phase: parent.phase,
            operation: op.kind_name(),
        });
    }
    let (argument, dropped) =
        apply_op_to_argument(&parent.argument, &op, framework, resolve_optionals)?;
    if let Err(ModelError::Invalid { diagnostics, .. }) = require_valid(&argument) {
        return Err(LifecycleError::ValidationFailed { diagnostics });
    }
    let op = match op {
        ArgOperation::Instantiate {
            pattern, bindings, ..
        } => ArgOperation::Instantiate {
            pattern,
            bindings,
            dropped_optionals: dropped,
        },
        other => other,
    };
    Ok(Revision {
        id: parent.id + 1,
        parent: Some(parent.id),
        phase: phase_after(&op),
        maturity: maturity(&argument, ctx),
        context_score: context_score(&argument, ctx.vocabulary),
        argument,
        operation: Some(op),
        created_at,
    })
}

/// Phase transition into conservation once a release has been granted. The
/// argument is carried over unchanged.
pub fn deploy(
    parent: &Revision,
    release: u64,
    ctx: &MetricContext<'_>,
    created_at: Timestamp,
) -> Result<Revision, LifecycleError> {
    let framework = Framework::new(Vec::new()).expect("empty framework is always nameable");
    apply_operation(
        parent,
        ArgOperation::Deploy { release },
        &framework,
        ctx,
        created_at,
        false,
    )
}
