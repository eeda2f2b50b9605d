//! Shared helpers for the integration and acceptance suites.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use chrono::{TimeZone, Utc};

use arglife::session::Workspace;
use arglife_core::model::{Development, Element, ElementId, ElementKind, Relation};
use arglife_core::pattern::BindingSet;
use arglife_core::represent::{Milestone, RepresentationKind, ScopeFilter, Stakeholder};
use arglife_core::Timestamp;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn ts(step: i64) -> Timestamp {
    Utc.timestamp_opt(1_770_000_000 + step * 60, 0).unwrap()
}

pub fn id(text: &str) -> ElementId {
    ElementId::new(text).unwrap()
}

pub fn bindings_fixture(name: &str) -> BindingSet {
    let text = fs::read_to_string(fixture(name)).expect("binding fixture exists");
    serde_json::from_str(&text).expect("binding fixture parses")
}

pub fn release_milestone() -> Milestone {
    Milestone {
        id: "m_road_release".to_string(),
        name: "Public road pilot release".to_string(),
        stakeholder: Stakeholder::DecisionMaker,
        purpose: "Inform the release decision on residual risk".to_string(),
        kind: RepresentationKind::ReleaseDocument,
        scope: ScopeFilter::default(),
    }
}

pub fn public_milestone() -> Milestone {
    Milestone {
        id: "m_public_report".to_string(),
        name: "Public safety report".to_string(),
        stakeholder: Stakeholder::Public,
        purpose: "Educate on capabilities and limitations".to_string(),
        kind: RepresentationKind::SafetyReport,
        scope: ScopeFilter::default(),
    }
}

pub fn conformity_milestone() -> Milestone {
    Milestone {
        id: "m_type_approval".to_string(),
        name: "Type approval conformity case".to_string(),
        stakeholder: Stakeholder::CertificationAgency,
        purpose: "Show adherence to normative requirements".to_string(),
        kind: RepresentationKind::ConformityCase,
        scope: ScopeFilter::default(),
    }
}

/// Runs the standard scripted evolution over the toy framework with fixed
/// timestamps: init, three instantiations, one extension, evidence on every
/// solution, release request and grant, deploy. Leaves the repository at
/// revision 5 (deployed).
pub fn scripted_to_deploy(dir: &Path) -> Workspace {
    let (workspace, report) =
        Workspace::init(dir, &fixture("framework"), "shuttle_one", ts(0)).expect("init");
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);

    workspace
        .instantiate("risk_top", bindings_fixture("bindings/top.json"), ts(1))
        .expect("instantiate risk_top");
    workspace
        .instantiate("hazards", bindings_fixture("bindings/hazards.json"), ts(2))
        .expect("instantiate hazards");
    let fragment_text =
        fs::read_to_string(fixture("fragments/mitigation_ped.gsn")).expect("fragment exists");
    let fragment = arglife_core::text::parse_argument(&fragment_text).expect("fragment parses");
    workspace
        .extend(fragment, id("G_hz_1"), "validation evidence for the pedestrian-conflict hazard is available", ts(3))
        .expect("extend");
    workspace
        .instantiate("process", bindings_fixture("bindings/process.json"), ts(4))
        .expect("instantiate process");

    for (step, solution) in ["Sn_hazrep", "Sn_audit", "Sn_ops", "Sn_ped_val"].iter().enumerate() {
        workspace
            .add_evidence(
                id(solution),
                &format!("reports/{solution}.pdf"),
                "test report",
                "verification & validation",
                ts(5 + step as i64),
            )
            .expect("register evidence");
    }

    workspace.add_milestone(release_milestone()).expect("milestone");
    let record = workspace
        .request_release("m_road_release", ts(9))
        .expect("request release");
    workspace
        .decide_release(record.id, true, "safety board", Some("attendant on board during the pilot".to_string()), ts(10))
        .expect("grant");
    workspace.deploy(ts(11)).expect("deploy");
    workspace
}

/// Continues the scripted scenario into conservation: indicators, a
/// threshold-crossing observation stream, and one update revision. Leaves the
/// repository at revision 6.
pub fn scripted_to_update(dir: &Path) -> Workspace {
    let workspace = scripted_to_deploy(dir);
    let spi_text = fs::read_to_string(fixture("indicators.spi")).expect("spi fixture");
    workspace
        .define_spis(&fixture("indicators.spi"), &spi_text)
        .expect("define spis");
    let csv_text =
        fs::read_to_string(fixture("observations_violation.csv")).expect("observations fixture");
    let batch = arglife::store::parse_observations_csv(&fixture("observations_violation.csv"), &csv_text)
        .expect("observations parse");
    let violations = workspace.ingest(batch).expect("ingest");
    assert_eq!(violations.len(), 1, "fixture stream must cross exactly one threshold");

    let head = workspace.head().expect("head");
    let mut next = head.argument.clone();
    let claim = next.elements.get_mut(&id("G_beh")).expect("G_beh exists");
    claim.statement = "In-service behavior of Shuttle One remains within the accepted risk envelope under supervision concept SUP-02".to_string();
    claim.development = Development::Developed;
    next.elements.insert(
        id("Sn_sup"),
        Element::new(
            id("Sn_sup"),
            ElementKind::Solution,
            "Updated supervision concept and monitoring directive SUP-02",
        ),
    );
    next.relations
        .insert(Relation::supported_by(id("G_beh"), id("Sn_sup")));
    workspace
        .propose_update(
            next,
            "disengagement rate exceeded the accepted threshold; supervision concept strengthened",
            false,
            ts(20),
        )
        .expect("propose update");
    workspace
}

/// Invokes the installed binary against a repository.
pub fn cli(repo: &Path, args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_arglife"))
        .arg("--repo")
        .arg(repo)
        .args(args)
        .env_remove("ARGLIFE_REPO")
        .output()
        .expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&output.stdout).into_owned(),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

/// Hash of every file under `revisions/`, for append-only comparisons.
pub fn revision_snapshot(repo: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut snapshot = BTreeMap::new();
    let base = repo.join("revisions");
    if !base.exists() {
        return snapshot;
    }
    let mut stack = vec![base];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).expect("readable dir") {
            let entry = entry.expect("dir entry");
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                snapshot.insert(path.clone(), fs::read(&path).expect("readable file"));
            }
        }
    }
    snapshot
}

/// Asserts that `later` contains every entry of `earlier`, byte-identical.
pub fn assert_append_only(
    earlier: &BTreeMap<PathBuf, Vec<u8>>,
    later: &BTreeMap<PathBuf, Vec<u8>>,
) {
    for (path, bytes) in earlier {
        match later.get(path) {
            None => panic!("revision file {} was deleted", path.display()),
            Some(current) => assert_eq!(
                current,
                bytes,
                "revision file {} was modified",
                path.display()
            ),
        }
    }
}
