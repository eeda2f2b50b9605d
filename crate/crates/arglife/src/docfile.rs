//! Representation files: markdown documents with trace anchors plus the
//! `.trace.json` sidecar manifest.
//!
//! Each section is written as a `##` heading followed by an HTML-comment
//! trace anchor naming the elements the section renders. The sidecar repeats
//! the per-section id arrays and the uncovered list, so either artifact can
//! be checked against the other and against the source revision.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use arglife_core::model::ElementId;
use arglife_core::represent::{Milestone, Representation, Section, TraceabilityManifest};

use crate::error::{Error, Result};

/// Renders the markdown document for a derived representation.
pub fn render_markdown(representation: &Representation, milestone: &Milestone) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}: {}", milestone.kind.title(), milestone.name);
    out.push('\n');
    let _ = writeln!(out, "- Milestone: {}", representation.milestone_id);
    let _ = writeln!(out, "- Revision: {}", representation.revision_id);
    let _ = writeln!(out, "- Stakeholder: {}", milestone.stakeholder.label());
    let _ = writeln!(out, "- Purpose: {}", milestone.purpose);
    let _ = writeln!(out, "- Generated: {}", representation.generated_at.to_rfc3339());
    for section in &representation.sections {
        out.push('\n');
        let _ = writeln!(out, "## {}", section.heading);
        out.push('\n');
        let ids: Vec<&str> = section.sources.iter().map(|id| id.as_str()).collect();
        let _ = writeln!(out, "<!-- trace: {} -->", ids.join(","));
        out.push('\n');
        let body = section.body.trim_end_matches('\n');
        out.push_str(body);
        out.push('\n');
    }
    out
}

/// Parses a markdown representation file back into its structured form. The
/// reader is strict about the pieces verification relies on (header fields,
/// headings, trace anchors) and lenient about body prose.
pub fn parse_markdown(path: &Path, text: &str) -> Result<Representation> {
    let bad = |detail: String| Error::InvalidInput {
        path: path.to_path_buf(),
        what: "representation document",
        detail,
    };

    let mut milestone_id = None;
    let mut revision_id = None;
    let mut generated_at = None;
    let mut sections: Vec<Section> = Vec::new();
    let mut current: Option<(String, Option<Vec<ElementId>>, Vec<String>)> = None;

    for line in text.lines() {
        if let Some(heading) = line.strip_prefix("## ") {
            if let Some(section) = finish_section(path, current.take())? {
                sections.push(section);
            }
            current = Some((heading.to_string(), None, Vec::new()));
            continue;
        }
        match &mut current {
            None => {
                if let Some(value) = line.strip_prefix("- Milestone: ") {
                    milestone_id = Some(value.trim().to_string());
                } else if let Some(value) = line.strip_prefix("- Revision: ") {
                    revision_id = Some(value.trim().parse::<u64>().map_err(|_| {
                        bad(format!("unreadable revision number `{}`", value.trim()))
                    })?);
                } else if let Some(value) = line.strip_prefix("- Generated: ") {
                    let parsed = DateTime::parse_from_rfc3339(value.trim())
                        .map_err(|e| bad(format!("unreadable timestamp: {e}")))?;
                    generated_at = Some(parsed.with_timezone(&Utc));
                }
            }
            Some((_, sources, body)) => {
                if let Some(anchor) = line.trim().strip_prefix("<!-- trace:") {
                    let anchor = anchor.trim_end_matches("-->").trim();
                    let mut ids = Vec::new();
                    for part in anchor.split(',') {
                        let part = part.trim();
                        if part.is_empty() {
                            continue;
                        }
                        ids.push(ElementId::new(part).map_err(|e| {
                            bad(format!("invalid id in trace anchor: `{}`", e.literal))
                        })?);
                    }
                    if sources.is_some() {
                        return Err(bad("section has more than one trace anchor".to_string()));
                    }
                    *sources = Some(ids);
                } else {
                    body.push(line.to_string());
                }
            }
        }
    }
    if let Some(section) = finish_section(path, current.take())? {
        sections.push(section);
    }

    Ok(Representation {
        milestone_id: milestone_id.ok_or_else(|| bad("missing `- Milestone:` line".to_string()))?,
        revision_id: revision_id.ok_or_else(|| bad("missing `- Revision:` line".to_string()))?,
        generated_at: generated_at.ok_or_else(|| bad("missing `- Generated:` line".to_string()))?,
        sections,
    })
}

fn finish_section(
    path: &Path,
    current: Option<(String, Option<Vec<ElementId>>, Vec<String>)>,
) -> Result<Option<Section>> {
    let Some((heading, sources, body_lines)) = current else {
        return Ok(None);
    };
    let sources = sources.ok_or_else(|| Error::InvalidInput {
        path: path.to_path_buf(),
        what: "representation document",
        detail: format!("section `{heading}` has no trace anchor"),
    })?;
    let mut body = body_lines.join("\n");
    let trimmed = body.trim_matches('\n').to_string();
    body = trimmed;
    body.push('\n');
    Ok(Some(Section {
        heading,
        body,
        sources: sources.into_iter().collect(),
    }))
}

/// Sidecar schema: section index to id array, plus the uncovered array.
#[derive(Serialize, Deserialize)]
struct TraceSidecar {
    sections: Vec<Vec<String>>,
    uncovered: Vec<String>,
}

pub fn render_manifest(manifest: &TraceabilityManifest) -> String {
    let sidecar = TraceSidecar {
        sections: manifest
            .sections
            .iter()
            .map(|ids| ids.iter().map(|id| id.as_str().to_string()).collect())
            .collect(),
        uncovered: manifest
            .uncovered
            .iter()
            .map(|id| id.as_str().to_string())
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&sidecar).expect("manifest serializes");
    text.push('\n');
    text
}

pub fn parse_manifest(path: &Path, text: &str) -> Result<TraceabilityManifest> {
    let bad = |detail: String| Error::InvalidInput {
        path: path.to_path_buf(),
        what: "traceability manifest",
        detail,
    };
    let sidecar: TraceSidecar =
        serde_json::from_str(text).map_err(|e| bad(format!("unreadable JSON: {e}")))?;
    let parse_ids = |ids: Vec<String>| -> Result<std::collections::BTreeSet<ElementId>> {
        ids.into_iter()
            .map(|id| {
                ElementId::new(id).map_err(|e| bad(format!("invalid id `{}`", e.literal)))
            })
            .collect()
    };
    Ok(TraceabilityManifest {
        sections: sidecar
            .sections
            .into_iter()
            .map(parse_ids)
            .collect::<Result<_>>()?,
        uncovered: parse_ids(sidecar.uncovered)?,
    })
}
