//! Deterministic random model generators for property and acceptance tests.
//!
//! Everything here is seeded: the same seed yields the same model on every
//! platform, so failures reproduce. Enabled with the `testgen` feature and
//! meant for test code only.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    has_placeholders, validate, Argument, Development, Element, ElementId, ElementKind,
    Instantiation, Relation, RelationKind, Tag,
};

const WORDS: &[&str] = &[
    "operation", "residual", "risk", "hazard", "mitigated", "acceptable", "monitoring",
    "procedure", "vehicle", "route", "evidence", "analysis", "validated", "bounded",
    "supervision", "fallback", "braking", "detection", "defined", "reviewed",
];

const PLACEHOLDERS: &[&str] = &["System", "ODD", "Hazard", "Standard", "Metric", "Scope"];

const TAGS: &[&str] = &["process", "internal", "standard:iso26262", "standard:ul4600", "ops"];

fn ident(prefix: &str, n: usize) -> ElementId {
    ElementId::new(alloc::format!("{prefix}{n}")).expect("generated ids are valid")
}

fn random_statement(rng: &mut ChaCha8Rng, allow_placeholders: bool) -> String {
    let count = rng.gen_range(2..6);
    let mut parts: Vec<String> = (0..count)
        .map(|_| WORDS.choose(rng).unwrap().to_string())
        .collect();
    if allow_placeholders && rng.gen_bool(0.3) {
        let name = PLACEHOLDERS.choose(rng).unwrap();
        parts.push(alloc::format!("{{{name}}}"));
    }
    if rng.gen_bool(0.08) {
        parts.push("a \"quoted\" term".to_string());
    }
    if rng.gen_bool(0.05) {
        parts.push("back\\slash".to_string());
    }
    parts.join(" ")
}

fn fix_flags(element: &mut Element) {
    element.instantiation = if has_placeholders(&element.statement) {
        Instantiation::Uninstantiated
    } else {
        Instantiation::Instantiated
    };
    if !element.kind.may_be_undeveloped() {
        element.development = Development::Developed;
    }
}

/// Generates a well-formed argument with `size` elements. Panics if the
/// result fails validation, which would be a generator bug.
pub fn random_argument(seed: u64, size: usize) -> Argument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = size.max(1);

    let mut root = Element::new(ident("G", 0), ElementKind::Goal, random_statement(&mut rng, true));
    root.development = if size == 1 && rng.gen_bool(0.5) {
        Development::Undeveloped
    } else {
        Development::Developed
    };
    fix_flags(&mut root);
    let mut argument = Argument::new(alloc::format!("generated_{seed}"), root);

    let mut parents: Vec<ElementId> = alloc::vec![ident("G", 0)];
    for n in 1..size {
        let parent = parents.choose(&mut rng).unwrap().clone();
        let (kind, prefix, relation_kind) = match rng.gen_range(0..10) {
            0..=3 => (ElementKind::Goal, "G", RelationKind::SupportedBy),
            4..=5 => (ElementKind::Strategy, "S", RelationKind::SupportedBy),
            6 => (ElementKind::Solution, "Sn", RelationKind::SupportedBy),
            7 => (ElementKind::Context, "C", RelationKind::InContextOf),
            8 => (ElementKind::Assumption, "A", RelationKind::InContextOf),
            _ => (ElementKind::Justification, "J", RelationKind::InContextOf),
        };
        let id = ident(prefix, n);
        let mut element = Element::new(id.clone(), kind, random_statement(&mut rng, true));
        if kind.may_be_undeveloped() && rng.gen_bool(0.3) {
            element.development = Development::Undeveloped;
        }
        if rng.gen_bool(0.2) {
            element.tags.insert(Tag::new(*TAGS.choose(&mut rng).unwrap()).unwrap());
        }
        if rng.gen_bool(0.1) {
            element.module_name = Some(alloc::format!("mod_{}", rng.gen_range(0..3)));
        }
        fix_flags(&mut element);
        if kind.may_source_relations() {
            parents.push(id.clone());
        }
        argument.relations.insert(Relation {
            source: parent,
            target: id.clone(),
            kind: relation_kind,
        });
        argument.elements.insert(id, element);
    }

    // A few extra diamond edges, always from an earlier goal/strategy to a
    // later supportable element so the graph stays acyclic.
    let extra = rng.gen_range(0..=(size / 6));
    let ids: Vec<ElementId> = argument.elements.keys().cloned().collect();
    for _ in 0..extra {
        let a = rng.gen_range(0..ids.len());
        let b = rng.gen_range(0..ids.len());
        let (source, target) = (&ids[a.min(b)], &ids[a.max(b)]);
        if source == target || *target == argument.root {
            continue;
        }
        let source_element = &argument.elements[source];
        let target_element = &argument.elements[target];
        if !source_element.kind.may_source_relations() {
            continue;
        }
        // Index order follows creation order, so source precedes target and
        // the new edge cannot close a cycle.
        let number = |id: &ElementId| -> usize {
            id.as_str()
                .trim_start_matches(|c: char| c.is_ascii_alphabetic())
                .parse()
                .unwrap_or(0)
        };
        if number(source) >= number(target) {
            continue;
        }
        if target_element.kind.may_be_supported_by_target() {
            argument.relations.insert(Relation::supported_by(source.clone(), target.clone()));
        }
    }

    let diagnostics = validate(&argument);
    assert!(
        diagnostics.is_empty(),
        "random_argument produced an invalid model: {diagnostics:?}"
    );
    argument
}

/// Applies 1..=4 random validity-preserving edits: add an element, remove a
/// leaf, modify a statement or tags, or toggle development.
pub fn random_edit(seed: u64, base: &Argument) -> Argument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut argument = base.clone();
    let edits = rng.gen_range(1..=4);
    for step in 0..edits {
        match rng.gen_range(0..4) {
            0 => {
                // Add a leaf under a random goal/strategy.
                let parents: Vec<ElementId> = argument
                    .elements
                    .values()
                    .filter(|e| e.kind.may_source_relations())
                    .map(|e| e.id.clone())
                    .collect();
                let parent = parents.choose(&mut rng).unwrap().clone();
                let id = ElementId::new(alloc::format!("E{seed}_{step}")).unwrap();
                let mut element =
                    Element::new(id.clone(), ElementKind::Solution, random_statement(&mut rng, false));
                fix_flags(&mut element);
                argument.elements.insert(id.clone(), element);
                argument.relations.insert(Relation::supported_by(parent, id));
            }
            1 => {
                // Remove a random leaf that is not the root.
                let leaves: Vec<ElementId> = argument
                    .elements
                    .keys()
                    .filter(|id| {
                        **id != argument.root
                            && !argument.relations.iter().any(|r| r.source == **id)
                    })
                    .cloned()
                    .collect();
                if let Some(victim) = leaves.choose(&mut rng) {
                    argument.elements.remove(victim);
                    argument.relations.retain(|r| r.target != *victim);
                }
            }
            2 => {
                // Rewrite a statement.
                let ids: Vec<ElementId> = argument.elements.keys().cloned().collect();
                let id = ids.choose(&mut rng).unwrap();
                let statement = random_statement(&mut rng, true);
                let element = argument.elements.get_mut(id).unwrap();
                element.statement = statement;
                fix_flags(element);
            }
            _ => {
                // Toggle development or tags.
                let ids: Vec<ElementId> = argument.elements.keys().cloned().collect();
                let id = ids.choose(&mut rng).unwrap();
                let element = argument.elements.get_mut(id).unwrap();
                if element.kind.may_be_undeveloped() && rng.gen_bool(0.5) {
                    element.development = match element.development {
                        Development::Developed => Development::Undeveloped,
                        Development::Undeveloped => Development::Developed,
                    };
                } else {
                    let tag = Tag::new(*TAGS.choose(&mut rng).unwrap()).unwrap();
                    if !element.tags.remove(&tag) {
                        element.tags.insert(tag);
                    }
                }
            }
        }
    }
    let diagnostics = validate(&argument);
    assert!(
        diagnostics.is_empty(),
        "random_edit produced an invalid model: {diagnostics:?}"
    );
    argument
}

/// Random text for parser fuzzing: a mix of near-valid token soup and raw
/// garbage, biased toward inputs that reach deep into the parser.
pub fn random_parser_input(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match rng.gen_range(0..4) {
        0 => {
            // Mutate a valid serialization.
            let argument = random_argument(seed, rng.gen_range(1..12));
            let mut text = crate::text::serialize_argument(&argument).unwrap();
            let mutations = rng.gen_range(1..4);
            for _ in 0..mutations {
                if text.is_empty() {
                    break;
                }
                let at = rng.gen_range(0..text.len());
                let at = (0..=at).rev().find(|i| text.is_char_boundary(*i)).unwrap_or(0);
                match rng.gen_range(0..3) {
                    0 => {
                        text.insert(at, *[b'{', b'}', b'"', b'#', b'\\', b'(', b',']
                            .choose(&mut rng)
                            .unwrap() as char);
                    }
                    1 => {
                        if at < text.len() {
                            let end = (at + 1..=text.len())
                                .find(|i| text.is_char_boundary(*i))
                                .unwrap_or(text.len());
                            text.replace_range(at..end, "");
                        }
                    }
                    _ => {
                        text.insert_str(at, WORDS.choose(&mut rng).unwrap());
                    }
                }
            }
            text
        }
        1 => {
            // Token soup.
            let tokens = [
                "argument", "goal", "strategy", "solution", "context", "assumption",
                "justification", "supported_by", "in_context_of", "undeveloped",
                "uninstantiated", "module", "tag", "many", "min", "max", "{", "}", "(", ")",
                ",", "=", "\"x\"", "\"", "G1", "0.5", "#c", "\\",
            ];
            let count = rng.gen_range(0..60);
            let mut out = String::new();
            for _ in 0..count {
                out.push_str(tokens.choose(&mut rng).unwrap());
                if rng.gen_bool(0.7) {
                    out.push(' ');
                }
                if rng.gen_bool(0.1) {
                    out.push('\n');
                }
            }
            out
        }
        2 => {
            // Printable garbage.
            let count = rng.gen_range(0..200);
            (0..count)
                .map(|_| char::from_u32(rng.gen_range(0x20..0x7f)).unwrap())
                .collect()
        }
        _ => {
            // Arbitrary unicode, including control characters.
            let count = rng.gen_range(0..120);
            (0..count)
                .map(|_| {
                    let c = rng.gen_range(0u32..0x2ff);
                    char::from_u32(c).unwrap_or('\u{fffd}')
                })
                .collect()
        }
    }
}
