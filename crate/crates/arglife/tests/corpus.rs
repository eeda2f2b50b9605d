//! The toy corpus matches the hand counts recorded in its README, and the
//! remaining contract examples that operate on it hold.

mod common;

use std::collections::BTreeSet;

use arglife::session::Workspace;
use arglife_core::coupling::{gap_analysis, ActivityMap, SignalKind};
use arglife_core::lifecycle::apply_op_to_argument;
use arglife_core::model::{undeveloped, ElementKind};
use arglife_core::represent::RepresentationKind;
use arglife_core::text::serialize_argument;

use common::{fixture, id, public_milestone, scripted_to_update, ts};

#[test]
fn baseline_matches_readme_hand_counts() {
    let dir = tempfile::tempdir().unwrap();
    let (workspace, report) =
        Workspace::init(&dir.path().join("repo"), &fixture("framework"), "shuttle_one", ts(0))
            .unwrap();
    let argument = &report.revision.argument;

    assert_eq!(argument.elements.len(), 23);
    assert_eq!(argument.relations.len(), 22);
    let count = |kind: ElementKind| argument.elements_of_kind(kind).count();
    assert_eq!(count(ElementKind::Goal), 9);
    assert_eq!(count(ElementKind::Strategy), 3);
    assert_eq!(count(ElementKind::Solution), 3);
    assert_eq!(count(ElementKind::Context), 5);
    assert_eq!(count(ElementKind::Assumption), 1);
    assert_eq!(count(ElementKind::Justification), 2);

    assert_eq!(
        undeveloped(argument).unwrap(),
        BTreeSet::from([id("G_hz"), id("G_beh"), id("G_mon")])
    );

    let framework = workspace.repo().load_framework().unwrap();
    let expected_vocabulary: BTreeSet<String> = [
        "System", "ODD", "Regulation", "UseBound", "HazardLog", "HazReport", "RiskCriteria",
        "Hazard", "DevStandard", "AuditRef", "OpsConcept", "SmpRef",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    assert_eq!(framework.vocabulary(), expected_vocabulary);

    let hazards = framework.pattern("hazards").unwrap();
    assert_eq!(hazards.optional_elements, BTreeSet::from([id("C_resid")]));
    assert_eq!(hazards.multiplicities.len(), 1);
}

#[test]
fn eliminating_the_process_argument_adds_exactly_one_missing_process_signal() {
    let dir = tempfile::tempdir().unwrap();
    let (workspace, report) =
        Workspace::init(&dir.path().join("repo"), &fixture("framework"), "shuttle_one", ts(0))
            .unwrap();
    let evidenced = BTreeSet::new();
    let before = gap_analysis(&report.revision.argument, &evidenced, &ActivityMap::default());
    assert!(!before.iter().any(|s| s.kind == SignalKind::MissingProcessArgument));

    let removed = report.revision.argument.exclusive_subtree(&id("G_process"));
    let evolved = workspace
        .eliminate(id("G_process"), "process adequacy argued at programme level for this study", ts(1))
        .unwrap();
    let after = gap_analysis(&evolved.revision.argument, &evidenced, &ActivityMap::default());

    // Exactly one MissingProcessArgument signal appears; every other change
    // is the disappearance of signals naming removed elements.
    let missing: Vec<_> = after
        .iter()
        .filter(|s| s.kind == SignalKind::MissingProcessArgument)
        .collect();
    assert_eq!(missing.len(), 1);
    let survivors: Vec<_> = before
        .iter()
        .filter(|s| s.element_ids.iter().all(|e| !removed.contains(e)))
        .cloned()
        .collect();
    let after_without_missing: Vec<_> = after
        .iter()
        .filter(|s| s.kind != SignalKind::MissingProcessArgument)
        .cloned()
        .collect();
    assert_eq!(after_without_missing, survivors);
}

#[test]
fn replay_reproduces_stored_arguments_through_a_second_update() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_update(dir.path());

    // A follow-up qualitative update: revisions now reach m + 2.
    let head = workspace.head().unwrap();
    let mut next = head.argument.clone();
    next.elements.get_mut(&id("G_mon")).unwrap().statement =
        "Field monitoring with quarterly indicator review is operating".to_string();
    workspace
        .propose_update(next, "gained knowledge from the first quarterly review", true, ts(30))
        .unwrap();

    let framework = workspace.repo().load_framework().unwrap();
    let mut replayed = framework.compose("shuttle_one").unwrap();
    let mut seen_patterns: BTreeSet<String> = BTreeSet::new();
    for revision_id in 0..=7u64 {
        let revision = workspace.repo().read_revision(revision_id).unwrap();
        if let Some(op) = &revision.operation {
            let resolve = match op {
                arglife_core::lifecycle::ArgOperation::Instantiate { pattern, bindings, .. } => {
                    let first = !seen_patterns.contains(pattern);
                    if !bindings.is_empty() {
                        seen_patterns.insert(pattern.clone());
                    }
                    first
                }
                _ => false,
            };
            replayed = apply_op_to_argument(&replayed, op, &framework, resolve).unwrap().0;
        }
        assert_eq!(
            serialize_argument(&replayed).unwrap(),
            serialize_argument(&revision.argument).unwrap(),
            "revision {revision_id} does not replay"
        );
    }
    let report = workspace
        .repo()
        .integrity_check(arglife_core::lifecycle::MaturityWeights::default())
        .unwrap();
    assert!(report.passed(), "{:?}", report.findings);
}

#[test]
fn mature_safety_report_has_one_section_per_branch_and_full_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_update(dir.path());
    workspace.add_milestone(public_milestone()).unwrap();
    workspace.derive("m_public_report", None, ts(40)).unwrap();

    let (representation, manifest) = workspace
        .repo()
        .read_representation("m_public_report", 6)
        .unwrap();
    // The root has a single supporting branch: overview plus one section.
    assert_eq!(representation.sections.len(), 2);
    assert_eq!(representation.sections[0].heading, "Overview");
    assert_eq!(representation.sections[1].heading, "Branch S_risk");
    assert!(manifest.uncovered.is_empty(), "{:?}", manifest.uncovered);

    let milestone = workspace.milestone("m_public_report").unwrap();
    assert_eq!(milestone.kind, RepresentationKind::SafetyReport);
}
