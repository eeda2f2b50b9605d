//! Workflow edge cases: error paths and idempotence rules of the session
//! layer.

mod common;

use std::fs;

use arglife::error::Error;
use arglife::session::Workspace;
use arglife::store::parse_observations_csv;
use arglife_core::conservation::{SpiError, UpdateError};
use arglife_core::coupling::ReleaseDecision;
use arglife_core::lifecycle::LifecycleError;

use common::{
    bindings_fixture, conformity_milestone, fixture, id, public_milestone, release_milestone,
    scripted_to_deploy, scripted_to_update, ts,
};

#[test]
fn lineage_replays_and_unknown_revisions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_update(dir.path());
    let lineage = workspace.lineage(6).unwrap();
    assert_eq!(lineage.len(), 7);
    assert!(lineage[0].operation.is_none());
    for window in lineage.windows(2) {
        assert_eq!(window[1].parent, Some(window[0].id));
        assert!(window[1].operation.is_some());
    }
    match workspace.lineage(99) {
        Err(Error::UnknownRevision { id: 99 }) => {}
        other => panic!("expected UnknownRevision, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn spi_registration_error_paths() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_deploy(dir.path());

    // Guarding a non-goal is rejected.
    let bad = "spi x guards Sn_audit metric \"m\" < 1 unit \"u\" window latest\n";
    match workspace.define_spis(&fixture("x.spi"), bad) {
        Err(Error::Spi(SpiError::UnknownClaim { .. })) => {}
        other => panic!("expected UnknownClaim, got {:?}", other.map(|_| ())),
    }

    // Duplicate indicator ids are rejected, whether stored or in-file.
    let text = fs::read_to_string(fixture("indicators.spi")).unwrap();
    workspace.define_spis(&fixture("indicators.spi"), &text).unwrap();
    match workspace.define_spis(&fixture("indicators.spi"), &text) {
        Err(Error::Spi(SpiError::DuplicateSpi(spi))) => assert_eq!(spi, "disengagement_rate"),
        other => panic!("expected DuplicateSpi, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn ingest_error_paths() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_deploy(dir.path());
    let text = fs::read_to_string(fixture("indicators.spi")).unwrap();
    workspace.define_spis(&fixture("indicators.spi"), &text).unwrap();

    let unknown = parse_observations_csv(
        &fixture("x.csv"),
        "spi_id,timestamp,value\nghost,2026-03-01T00:00:00+00:00,1\n",
    )
    .unwrap();
    match workspace.ingest(unknown) {
        Err(Error::Spi(SpiError::UnknownSpi(spi))) => assert_eq!(spi, "ghost"),
        other => panic!("expected UnknownSpi, got {:?}", other.map(|_| ())),
    }

    // Non-monotone within a batch.
    let backwards = parse_observations_csv(
        &fixture("x.csv"),
        "spi_id,timestamp,value\ndisengagement_rate,2026-03-02T00:00:00+00:00,0.1\ndisengagement_rate,2026-03-01T00:00:00+00:00,0.1\n",
    )
    .unwrap();
    match workspace.ingest(backwards) {
        Err(Error::Spi(SpiError::NonMonotoneTimestamps { .. })) => {}
        other => panic!("expected NonMonotoneTimestamps, got {:?}", other.map(|_| ())),
    }

    // Non-monotone across batches.
    let first = parse_observations_csv(
        &fixture("x.csv"),
        "spi_id,timestamp,value\ndisengagement_rate,2026-03-05T00:00:00+00:00,0.1\n",
    )
    .unwrap();
    workspace.ingest(first).unwrap();
    let stale = parse_observations_csv(
        &fixture("x.csv"),
        "spi_id,timestamp,value\ndisengagement_rate,2026-03-04T00:00:00+00:00,0.1\n",
    )
    .unwrap();
    match workspace.ingest(stale) {
        Err(Error::Spi(SpiError::NonMonotoneTimestamps { .. })) => {}
        other => panic!("expected NonMonotoneTimestamps, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn ingest_evaluates_only_new_positions() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_deploy(dir.path());
    let text = fs::read_to_string(fixture("indicators.spi")).unwrap();
    workspace.define_spis(&fixture("indicators.spi"), &text).unwrap();

    let first = parse_observations_csv(
        &fixture("x.csv"),
        "spi_id,timestamp,value\ndisengagement_rate,2026-03-01T00:00:00+00:00,0.2\ndisengagement_rate,2026-03-02T00:00:00+00:00,0.4\n",
    )
    .unwrap();
    assert!(workspace.ingest(first).unwrap().is_empty(), "window not computable yet");

    let second = parse_observations_csv(
        &fixture("x.csv"),
        "spi_id,timestamp,value\ndisengagement_rate,2026-03-03T00:00:00+00:00,1.2\n",
    )
    .unwrap();
    let violations = workspace.ingest(second).unwrap();
    // The window spans both batches; only the new position is evaluated.
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0].window_value, arglife_core::Rational::new(3, 5));
}

#[test]
fn update_requires_violations_unless_qualitative() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_deploy(dir.path());
    let head = workspace.head().unwrap();

    let mut next = head.argument.clone();
    next.elements.get_mut(&id("G_mon")).unwrap().statement =
        "Field monitoring with quarterly indicator review is operating".to_string();

    match workspace.propose_update(next.clone(), "routine wording pass", false, ts(30)) {
        Err(Error::Update(UpdateError::NoViolation)) => {}
        other => panic!("expected NoViolation, got {:?}", other.map(|_| ())),
    }
    let report = workspace
        .propose_update(next, "gained knowledge from the quarterly review", true, ts(31))
        .unwrap();
    assert_eq!(report.revision.id, 6);
    assert_eq!(report.addressed_violations, 0);
}

#[test]
fn update_reports_dangling_indicators() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_deploy(dir.path());
    let text = fs::read_to_string(fixture("indicators.spi")).unwrap();
    workspace.define_spis(&fixture("indicators.spi"), &text).unwrap();

    // Remove the guarded hazard claim in a qualitative update.
    let head = workspace.head().unwrap();
    let mut next = head.argument.clone();
    next.elements.remove(&id("G_hz_3"));
    next.relations
        .retain(|r| r.source != id("G_hz_3") && r.target != id("G_hz_3"));
    let report = workspace
        .propose_update(next, "hazard retired after infrastructure change", true, ts(30))
        .unwrap();
    assert_eq!(report.dangling.len(), 1);
    assert_eq!(report.dangling[0].spi_id, "hard_brake_rate");
}

#[test]
fn empty_framework_directory_is_rejected_and_leaves_no_debris() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("patterns");
    fs::create_dir_all(&empty).unwrap();
    let repo = dir.path().join("repo");
    match Workspace::init(&repo, &empty, "x", ts(0)) {
        Err(Error::Lifecycle(LifecycleError::EmptyFramework)) => {}
        other => panic!("expected EmptyFramework, got {:?}", other.map(|_| ())),
    }
    // The failed attempt cleans up, so a corrected retry succeeds.
    assert!(!repo.exists());
    Workspace::init(&repo, &fixture("framework"), "x", ts(1)).unwrap();
}

#[test]
fn derivation_stays_verifiable_when_an_invalidated_claim_is_removed() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_deploy(dir.path());
    let text = fs::read_to_string(fixture("indicators.spi")).unwrap();
    workspace.define_spis(&fixture("indicators.spi"), &text).unwrap();
    let csv = fs::read_to_string(fixture("observations_violation.csv")).unwrap();
    let batch = parse_observations_csv(&fixture("observations_violation.csv"), &csv).unwrap();
    workspace.ingest(batch).unwrap();

    // Remove the guarded, currently invalidated claim. The guard dangles and
    // its violation is recorded as addressed by this update.
    let head = workspace.head().unwrap();
    let mut next = head.argument.clone();
    next.elements.remove(&id("G_beh"));
    next.relations
        .retain(|r| r.source != id("G_beh") && r.target != id("G_beh"));
    let report = workspace
        .propose_update(next, "claim G_beh retired; supervision moved to fleet level", false, ts(30))
        .unwrap();
    assert_eq!(report.dangling.len(), 1, "{:?}", report.dangling);

    // A fresh derivation of the new revision must verify against itself even
    // though a guard now points at a removed claim.
    workspace.derive("m_road_release", None, ts(31)).unwrap();
    let verification = workspace.verify_trace("m_road_release", report.revision.id).unwrap();
    assert!(verification.passed(), "{:?}", verification.findings);

    // Even with a new violation against the dangling guard, documents keep
    // verifying: the unanchorable claim is reported as dangling, not listed.
    let more = parse_observations_csv(
        &fixture("x.csv"),
        "spi_id,timestamp,value\ndisengagement_rate,2026-03-10T00:00:00+00:00,2\ndisengagement_rate,2026-03-11T00:00:00+00:00,2\ndisengagement_rate,2026-03-12T00:00:00+00:00,2\n",
    )
    .unwrap();
    let violations = workspace.ingest(more).unwrap();
    assert!(!violations.is_empty());
    workspace.derive("m_road_release", None, ts(32)).unwrap();
    let verification = workspace.verify_trace("m_road_release", report.revision.id).unwrap();
    assert!(verification.passed(), "{:?}", verification.findings);
}

#[test]
fn release_rules() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    let (workspace, _) =
        Workspace::init(&repo, &fixture("framework"), "shuttle_one", ts(0)).unwrap();
    workspace
        .instantiate("risk_top", bindings_fixture("bindings/top.json"), ts(1))
        .unwrap();
    workspace.add_milestone(release_milestone()).unwrap();
    workspace.add_milestone(public_milestone()).unwrap();

    // Only release-document milestones can gate a release.
    match workspace.request_release("m_public_report", ts(2)) {
        Err(Error::MilestoneKind { .. }) => {}
        other => panic!("expected MilestoneKind, got {:?}", other.map(|_| ())),
    }
    match workspace.request_release("m_missing", ts(2)) {
        Err(Error::UnknownMilestone { .. }) => {}
        other => panic!("expected UnknownMilestone, got {:?}", other.map(|_| ())),
    }

    // Repeated requests return the existing pending record.
    let first = workspace.request_release("m_road_release", ts(3)).unwrap();
    let second = workspace.request_release("m_road_release", ts(4)).unwrap();
    assert_eq!(first.id, second.id);
    assert_eq!(workspace.releases().unwrap().len(), 1);

    // Deciding twice is rejected; denial keeps deployment blocked.
    let denied = workspace
        .decide_release(first.id, false, "safety board", None, ts(5))
        .unwrap();
    assert_eq!(denied.decision, ReleaseDecision::Denied);
    match workspace.decide_release(first.id, true, "safety board", None, ts(6)) {
        Err(Error::AlreadyDecided { .. }) => {}
        other => panic!("expected AlreadyDecided, got {:?}", other.map(|_| ())),
    }
    match workspace.deploy(ts(7)) {
        Err(Error::GateNotGranted { .. }) => {}
        other => panic!("expected GateNotGranted, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn granting_a_tampered_document_fails_closed() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    let (workspace, _) =
        Workspace::init(&repo, &fixture("framework"), "shuttle_one", ts(0)).unwrap();
    workspace
        .instantiate("risk_top", bindings_fixture("bindings/top.json"), ts(1))
        .unwrap();
    workspace.add_milestone(release_milestone()).unwrap();
    let record = workspace.request_release("m_road_release", ts(2)).unwrap();

    let document = repo.join(&record.document_path);
    let text = fs::read_to_string(&document).unwrap();
    let tampered: Vec<&str> = text.lines().filter(|l| !l.starts_with("- G_mon:")).collect();
    fs::write(&document, tampered.join("\n")).unwrap();

    match workspace.decide_release(record.id, true, "safety board", None, ts(3)) {
        Err(Error::GateDocumentInvalid { .. }) => {}
        other => panic!("expected GateDocumentInvalid, got {:?}", other.map(|_| ())),
    }
    // The record is still pending, so an honest re-derivation can recover.
    assert!(workspace.releases().unwrap()[0].is_pending());
}

#[test]
fn second_deploy_is_a_phase_error() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_deploy(dir.path());
    match workspace.deploy(ts(30)) {
        Err(Error::Lifecycle(LifecycleError::PhaseError { .. })) => {}
        other => panic!("expected PhaseError, got {:?}", other.map(|_| ())),
    }
}

#[test]
fn evidence_content_hash_for_local_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path().join("repo");
    let (workspace, _) =
        Workspace::init(&repo, &fixture("framework"), "shuttle_one", ts(0)).unwrap();

    let artifact = dir.path().join("report.txt");
    fs::write(&artifact, "all checks passed").unwrap();
    let record = workspace
        .add_evidence(
            id("Sn_audit"),
            artifact.to_str().unwrap(),
            "test report",
            "verification",
            ts(1),
        )
        .unwrap();
    // sha256 of "all checks passed", frozen from `sha256sum`.
    assert_eq!(
        record.content_hash.as_deref(),
        Some("8e57c74cfecc7f047b34ffdcd97718fd4ac1469fb553fa7a38179f6e273523af")
    );

    let remote = workspace
        .add_evidence(
            id("Sn_ops"),
            "https://example.invalid/report.pdf",
            "test report",
            "verification",
            ts(2),
        )
        .unwrap();
    assert!(remote.content_hash.is_none());
}

/// For any registered indicator and any observation stream crossing its
/// threshold under its window rule, the ingest -> invalidate -> update
/// pipeline yields a conservation revision referencing the triggering
/// violation.
#[test]
fn randomized_violation_streams_drive_the_update_pipeline() {
    use arglife_core::conservation::invalidate;
    use arglife_core::lifecycle::ArgOperation;
    use rand::{Rng, SeedableRng};

    for seed in 0..8u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let dir = tempfile::tempdir().unwrap();
        let workspace = scripted_to_deploy(dir.path());

        let comparator = ["<", "<=", ">", ">="][rng.gen_range(0..4)];
        let threshold = rng.gen_range(1..20);
        let k = rng.gen_range(1..=4u32);
        let window = match rng.gen_range(0..4) {
            0 => "latest".to_string(),
            1 => format!("mean({k})"),
            2 => format!("max({k})"),
            _ => format!("min({k})"),
        };
        let definition = format!(
            "spi random_rate guards G_beh metric \"random metric\" {comparator} {threshold} unit \"u\" window {window}\n"
        );
        workspace
            .define_spis(&fixture("random.spi"), &definition)
            .unwrap();

        // Every observation is on the unhealthy side, so any computable
        // window violates; the stream is long enough to compute one.
        let unhealthy = match comparator {
            "<" | "<=" => threshold + 1,
            _ => 0,
        };
        let length = (k as usize).max(1) + rng.gen_range(0..3);
        let mut csv = String::from("spi_id,timestamp,value\n");
        for i in 0..length {
            csv.push_str(&format!(
                "random_rate,2026-04-{:02}T00:00:00+00:00,{unhealthy}\n",
                i + 1
            ));
        }
        let batch = parse_observations_csv(&fixture("random.csv"), &csv).unwrap();
        let violations = workspace.ingest(batch).unwrap();
        assert!(!violations.is_empty(), "seed {seed}: stream crossed no threshold");

        let definitions = workspace.spi_definitions().unwrap();
        let state = invalidate(&definitions, &violations);
        assert!(state.invalidated().contains(&id("G_beh")), "seed {seed}");

        let head = workspace.head().unwrap();
        let mut next = head.argument.clone();
        next.elements.get_mut(&id("G_beh")).unwrap().statement =
            format!("In-service behavior stays within the revised envelope E-{seed}");
        let report = workspace
            .propose_update(next, "threshold crossing addressed", false, ts(40))
            .unwrap();
        assert_eq!(report.revision.phase, arglife_core::lifecycle::Phase::Conservation);
        match &report.revision.operation {
            Some(ArgOperation::ConservationUpdate { violations: refs, .. }) => {
                assert!(
                    refs.iter().any(|r| r.spi_id == "random_rate"),
                    "seed {seed}: update does not reference the triggering violation"
                );
            }
            other => panic!("seed {seed}: expected conservation update, got {other:?}"),
        }
        assert!(workspace.validity().unwrap().all_valid(), "seed {seed}");
    }
}

#[test]
fn derive_for_every_milestone_kind_from_stored_revision() {
    let dir = tempfile::tempdir().unwrap();
    let workspace = scripted_to_update(dir.path());
    workspace.add_milestone(public_milestone()).unwrap();
    workspace.add_milestone(conformity_milestone()).unwrap();

    for (milestone, revision) in [
        ("m_road_release", 6),
        ("m_public_report", 6),
        ("m_type_approval", 6),
    ] {
        let report = workspace.derive(milestone, Some(revision), ts(40)).unwrap();
        assert!(report.sections >= 2, "{milestone} produced too few sections");
        let verification = workspace.verify_trace(milestone, revision).unwrap();
        assert!(verification.passed(), "{milestone}: {:?}", verification.findings);
    }
}
