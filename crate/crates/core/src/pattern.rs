//! Context-open argument patterns and binding-driven instantiation.
//!
//! A [`Pattern`] is an argument whose statements may contain `{Name}`
//! placeholders, whose relations may carry multiplicity ranges (`supported_by
//! many G_hz min=1 max=3`), and whose elements may be `optional`. Patterns are
//! stored as `.gsnp` files using the `.gsn` grammar plus those two extensions.
//!
//! Instantiation applies a [`BindingSet`]: scalar bindings substitute
//! placeholder text everywhere, expansion bindings replace a multiplicity
//! template with per-copy instances (ids `<base>_1 .. <base>_k`), and elements
//! whose placeholders are all resolved flip to `Instantiated`. Partial
//! instantiation is legal; unbound placeholders survive literally so the
//! argument can be enriched over many revisions.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{
    has_placeholders, placeholder_names, require_valid, Argument, Diagnostic, Element, ElementId,
    Instantiation, ModelError, Relation, RelationKind,
};
use crate::text::{self, FileSyntax, ParseError, SourceSpan};

/// How many copies a `many` relation admits; `max == None` means unbounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Multiplicity {
    pub min: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<u32>,
}

/// A context-open argument framework piece: an argument plus placeholder
/// vocabulary, multiplicity declarations, and optional elements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub name: String,
    pub argument: Argument,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub multiplicities: Vec<(Relation, Multiplicity)>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub optional_elements: BTreeSet<ElementId>,
    pub vocabulary: BTreeSet<String>,
}

impl Pattern {
    pub fn multiplicity_of(&self, relation: &Relation) -> Option<Multiplicity> {
        self.multiplicities
            .iter()
            .find(|(r, _)| r == relation)
            .map(|(_, m)| *m)
    }

    /// Coverage of the raw pattern: no placeholder is bound yet.
    pub fn coverage(&self) -> CoverageReport {
        coverage(&self.argument, &self.vocabulary)
    }
}

/// Values to substitute into a pattern. Expansion copies carry their own
/// nested binding sets, so hierarchical templates expand recursively.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingSet {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scalar: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub expansions: Vec<ExpansionBinding>,
}

/// Copies requested for one `many` relation, identified by its endpoints as
/// written in the pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpansionBinding {
    pub source: ElementId,
    pub target: ElementId,
    pub copies: Vec<BindingSet>,
}

impl BindingSet {
    pub fn is_empty(&self) -> bool {
        self.scalar.is_empty() && self.expansions.is_empty()
    }

    /// All placeholder names this binding set touches, including nested
    /// per-copy bindings. Used for optional-branch selection.
    pub fn bound_names(&self) -> BTreeSet<String> {
        let mut names: BTreeSet<String> = self.scalar.keys().cloned().collect();
        for expansion in &self.expansions {
            for copy in &expansion.copies {
                names.extend(copy.bound_names());
            }
        }
        names
    }
}

/// How much of a pattern's vocabulary has been resolved, and which elements
/// still need work. `bound_placeholders` counts vocabulary names that no
/// longer occur anywhere in the argument text, which is exactly what a
/// textual scan of the serialized form reproduces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub total_placeholders: u64,
    pub bound_placeholders: u64,
    pub uninstantiated_elements: BTreeSet<ElementId>,
    pub undeveloped_elements: BTreeSet<ElementId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("placeholder {{{name}}} is not in the pattern vocabulary")]
    UnknownPlaceholder { name: String },
    #[error("no multiplicity is declared for {from} -> {to}")]
    UndeclaredExpansion { from: ElementId, to: ElementId },
    #[error("multiple expansion bindings for {from} -> {to}")]
    DuplicateExpansion { from: ElementId, to: ElementId },
    #[error("{actual} copies for {from} -> {to} outside [{min}, {}]", max.map(|m| alloc::format!("{m}")).unwrap_or_else(|| alloc::string::String::from("unbounded")))]
    MultiplicityViolation {
        from: ElementId,
        to: ElementId,
        min: u32,
        max: Option<u32>,
        actual: u32,
    },
    #[error("relation {from} -> {to} is not present (already expanded or removed)")]
    ExpansionUnavailable { from: ElementId, to: ElementId },
    #[error("expansion copy id {id} collides with an existing element")]
    CopyCollision { id: ElementId },
    #[error("instantiation result fails validation with {} error(s)", diagnostics.len())]
    ResultInvalid { diagnostics: Vec<Diagnostic> },
}

/// Result of one instantiation step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstantiationOutcome {
    pub argument: Argument,
    pub coverage: CoverageReport,
    /// Unselected optional elements removed by this step, recorded so the
    /// operation log preserves an elimination audit trail.
    pub dropped_optionals: BTreeSet<ElementId>,
}

/// Coverage of an argument measured against a placeholder vocabulary: a name
/// counts as bound once it no longer occurs in any statement.
pub fn coverage(argument: &Argument, vocabulary: &BTreeSet<String>) -> CoverageReport {
    let open = argument.open_placeholders();
    let bound = vocabulary.iter().filter(|name| !open.contains(*name)).count();
    CoverageReport {
        total_placeholders: vocabulary.len() as u64,
        bound_placeholders: bound as u64,
        uninstantiated_elements: argument
            .elements
            .values()
            .filter(|e| e.is_uninstantiated())
            .map(|e| e.id.clone())
            .collect(),
        undeveloped_elements: argument
            .elements
            .values()
            .filter(|e| e.is_undeveloped())
            .map(|e| e.id.clone())
            .collect(),
    }
}

/// Instantiates a self-contained pattern. The result must be well formed;
/// optional branches are resolved whenever the binding set is non-empty (an
/// empty binding set is the identity).
pub fn instantiate(pattern: &Pattern, bindings: &BindingSet) -> Result<InstantiationOutcome, PatternError> {
    let outcome = instantiate_into(&pattern.argument, pattern, bindings, !bindings.is_empty())?;
    if let Err(ModelError::Invalid { diagnostics, .. }) = require_valid(&outcome.argument) {
        return Err(PatternError::ResultInvalid { diagnostics });
    }
    Ok(outcome)
}

/// The instantiation engine, shared by the pure pattern operation and the
/// lifecycle's `Instantiate` revision operation. `base` is either the
/// pattern's own argument or a composed revision argument containing the
/// pattern's elements. When `resolve_optionals` is set and the bindings are
/// non-empty, optional elements whose subtree receives no binding are dropped
/// and reported.
pub fn instantiate_into(
    base: &Argument,
    pattern: &Pattern,
    bindings: &BindingSet,
    resolve_optionals: bool,
) -> Result<InstantiationOutcome, PatternError> {
    check_bindings(pattern, bindings)?;
    let mut working = base.clone();

    let no_rename = BTreeMap::new();
    for expansion in &bindings.expansions {
        expand_one(&mut working, pattern, expansion, &no_rename)?;
    }

    let mut dropped = BTreeSet::new();
    if resolve_optionals && !bindings.is_empty() {
        let bound = bindings.bound_names();
        for optional in &pattern.optional_elements {
            if !working.contains(optional) {
                continue;
            }
            let subtree = template_set(&working, optional);
            let mut names = BTreeSet::new();
            for id in &subtree {
                names.extend(placeholder_names(&working.elements[id].statement));
            }
            let selected = bound.intersection(&names).next().is_some();
            if !selected {
                for id in &subtree {
                    working.elements.remove(id);
                }
                working
                    .relations
                    .retain(|r| !subtree.contains(&r.source) && !subtree.contains(&r.target));
                dropped.extend(subtree);
            }
        }
    }

    apply_scalar(&mut working, &bindings.scalar);
    refresh_instantiation(&mut working);

    let coverage = coverage(&working, &pattern.vocabulary);
    Ok(InstantiationOutcome {
        argument: working,
        coverage,
        dropped_optionals: dropped,
    })
}

fn check_bindings(pattern: &Pattern, bindings: &BindingSet) -> Result<(), PatternError> {
    for name in bindings.scalar.keys() {
        if !pattern.vocabulary.contains(name) {
            return Err(PatternError::UnknownPlaceholder { name: name.clone() });
        }
    }
    let mut seen = BTreeSet::new();
    for expansion in &bindings.expansions {
        let relation = Relation::supported_by(expansion.source.clone(), expansion.target.clone());
        let multiplicity =
            pattern
                .multiplicity_of(&relation)
                .ok_or_else(|| PatternError::UndeclaredExpansion {
                    from: expansion.source.clone(),
                    to: expansion.target.clone(),
                })?;
        if !seen.insert(relation) {
            return Err(PatternError::DuplicateExpansion {
                from: expansion.source.clone(),
                to: expansion.target.clone(),
            });
        }
        let actual = expansion.copies.len() as u32;
        if actual < multiplicity.min || multiplicity.max.is_some_and(|max| actual > max) {
            return Err(PatternError::MultiplicityViolation {
                from: expansion.source.clone(),
                to: expansion.target.clone(),
                min: multiplicity.min,
                max: multiplicity.max,
                actual,
            });
        }
        for copy in &expansion.copies {
            check_bindings(pattern, copy)?;
        }
    }
    Ok(())
}

/// The elements an expansion copies (or an optional drop removes): everything
/// whose only connection to the root runs through `node`. Shared context
/// elements stay behind; copies keep edges to them.
fn template_set(argument: &Argument, node: &ElementId) -> BTreeSet<ElementId> {
    let from_root = argument.reachable_from(&argument.root);
    if from_root.contains(node) {
        argument.exclusive_subtree(node)
    } else {
        argument.reachable_from(node)
    }
}

fn expand_one(
    working: &mut Argument,
    pattern: &Pattern,
    expansion: &ExpansionBinding,
    rename: &BTreeMap<ElementId, ElementId>,
) -> Result<(), PatternError> {
    let resolve = |id: &ElementId| rename.get(id).cloned().unwrap_or_else(|| id.clone());
    let source = resolve(&expansion.source);
    let target = resolve(&expansion.target);
    let relation = Relation::supported_by(source.clone(), target.clone());
    if !working.relations.contains(&relation) || !working.contains(&target) {
        return Err(PatternError::ExpansionUnavailable {
            from: expansion.source.clone(),
            to: expansion.target.clone(),
        });
    }

    let template = template_set(working, &target);
    let mut new_elements: BTreeMap<ElementId, Element> = BTreeMap::new();
    let mut new_relations: BTreeSet<Relation> = BTreeSet::new();
    let mut nested_jobs: Vec<(BTreeMap<ElementId, ElementId>, &BindingSet)> = Vec::new();

    for (index, copy) in expansion.copies.iter().enumerate() {
        let ordinal = index + 1;
        let mut copy_map: BTreeMap<ElementId, ElementId> = BTreeMap::new();
        for member in &template {
            let new_id = ElementId::new(alloc::format!("{member}_{ordinal}"))
                .expect("suffixing preserves the identifier grammar");
            let collides = (working.contains(&new_id) && !template.contains(&new_id))
                || new_elements.contains_key(&new_id);
            if collides {
                return Err(PatternError::CopyCollision { id: new_id });
            }
            copy_map.insert(member.clone(), new_id);
        }
        for member in &template {
            let mut element = working.elements[member].clone();
            element.id = copy_map[member].clone();
            for (name, value) in &copy.scalar {
                element.statement = element.statement.replace(&alloc::format!("{{{name}}}"), value);
            }
            new_elements.insert(element.id.clone(), element);
        }
        for existing in &working.relations {
            if template.contains(&existing.source) {
                let new_target = copy_map
                    .get(&existing.target)
                    .cloned()
                    .unwrap_or_else(|| existing.target.clone());
                new_relations.insert(Relation {
                    source: copy_map[&existing.source].clone(),
                    target: new_target,
                    kind: existing.kind,
                });
            }
        }
        new_relations.insert(Relation::supported_by(
            source.clone(),
            copy_map[&target].clone(),
        ));

        if !copy.expansions.is_empty() {
            let mut nested_rename = BTreeMap::new();
            for pattern_id in pattern.argument.elements.keys() {
                let current = resolve(pattern_id);
                if let Some(renamed) = copy_map.get(&current) {
                    nested_rename.insert(pattern_id.clone(), renamed.clone());
                }
            }
            nested_jobs.push((nested_rename, copy));
        }
    }

    for member in &template {
        working.elements.remove(member);
    }
    // Outgoing template edges and the expanded edge go away with the copies;
    // stray edges pointing into the template from elsewhere are left to fail
    // validation so the operation rejects atomically instead of silently
    // unlinking a foreign parent.
    working
        .relations
        .retain(|r| !template.contains(&r.source) && *r != relation);
    working.elements.extend(new_elements);
    working.relations.extend(new_relations);

    for (nested_rename, copy) in nested_jobs {
        for nested in &copy.expansions {
            expand_one(working, pattern, nested, &nested_rename)?;
        }
    }
    Ok(())
}

fn apply_scalar(working: &mut Argument, scalar: &BTreeMap<String, String>) {
    if scalar.is_empty() {
        return;
    }
    for element in working.elements.values_mut() {
        for (name, value) in scalar {
            let token = alloc::format!("{{{name}}}");
            if element.statement.contains(token.as_str()) {
                element.statement = element.statement.replace(token.as_str(), value);
            }
        }
    }
}

fn refresh_instantiation(working: &mut Argument) {
    for element in working.elements.values_mut() {
        element.instantiation = if has_placeholders(&element.statement) {
            Instantiation::Uninstantiated
        } else {
            Instantiation::Instantiated
        };
    }
}

// ---------------------------------------------------------------------------
// Pattern files
// ---------------------------------------------------------------------------

const PATTERN_SYNTAX: FileSyntax = FileSyntax {
    keyword: "pattern",
    pattern_extensions: true,
};

/// Parses a `.gsnp` pattern file. On top of syntax checking this verifies
/// that the `uninstantiated` flag of every element agrees with placeholder
/// presence, so vocabulary extraction is trustworthy.
pub fn parse_pattern(input: &str) -> Result<Pattern, Vec<ParseError>> {
    let file = text::parse_file(input, &PATTERN_SYNTAX)?;

    let mut errors: Vec<ParseError> = Vec::new();
    let mut multiplicities = Vec::new();
    let mut optional_elements = BTreeSet::new();
    let mut vocabulary = BTreeSet::new();
    let mut flag_checks: Vec<(ElementId, bool, SourceSpan)> = Vec::new();

    for raw in &file.raw_elements {
        if raw.optional {
            optional_elements.insert(raw.element.id.clone());
        }
        for (relation, min, max) in &raw.many {
            multiplicities.push((relation.clone(), Multiplicity { min: *min, max: *max }));
        }
        vocabulary.extend(placeholder_names(&raw.element.statement));
        flag_checks.push((
            raw.element.id.clone(),
            raw.element.is_uninstantiated(),
            raw.id_span,
        ));
    }

    // Multiplicity relations are real relations of the pattern argument; the
    // template stays attached until an expansion consumes it.
    let mut file = file;
    for raw in &mut file.raw_elements {
        let many = core::mem::take(&mut raw.many);
        raw.relations.extend(many.into_iter().map(|(r, _, _)| r));
    }
    let argument = text::assemble_argument(file)?;

    for (id, flagged, span) in flag_checks {
        let open = has_placeholders(&argument.elements[&id].statement);
        if open != flagged {
            let found = if flagged {
                alloc::format!("element {id} flagged uninstantiated without placeholders")
            } else {
                alloc::format!("element {id} has placeholders but no uninstantiated flag")
            };
            errors.push(ParseError {
                span,
                expected: String::from("uninstantiated flag consistent with placeholders"),
                found,
            });
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    Ok(Pattern {
        name: argument.name.clone(),
        argument,
        multiplicities,
        optional_elements,
        vocabulary,
    })
}

/// Canonical `.gsnp` form. Patterns may reference elements defined by sibling
/// patterns of the same framework, so no graph validation is applied here.
pub fn serialize_pattern(pattern: &Pattern) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pattern {} {{", pattern.argument.name);
    for id in text::canonical_order(&pattern.argument) {
        let element = &pattern.argument.elements[&id];
        let many: Vec<(Relation, u32, Option<u32>)> = pattern
            .multiplicities
            .iter()
            .filter(|(r, _)| r.source == id)
            .map(|(r, m)| (r.clone(), m.min, m.max))
            .collect();
        text::write_element_line(
            &mut out,
            &pattern.argument,
            element,
            pattern.optional_elements.contains(&id),
            &many,
        );
    }
    out.push_str("}\n");
    out
}

// ---------------------------------------------------------------------------
// Frameworks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrameworkError {
    #[error("duplicate pattern name `{0}`")]
    DuplicatePattern(String),
    #[error("element {id} is defined by more than one pattern")]
    DuplicateElement { id: ElementId },
    #[error("framework has no goal without incoming support; cannot choose a root")]
    NoRoot,
    #[error("framework has several root candidates: {}", candidates.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", "))]
    MultipleRoots { candidates: Vec<ElementId> },
}

/// An ordered collection of patterns forming one context-open framework.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Framework {
    patterns: Vec<Pattern>,
}

impl Framework {
    pub fn new(patterns: Vec<Pattern>) -> Result<Self, FrameworkError> {
        let mut names = BTreeSet::new();
        for pattern in &patterns {
            if !names.insert(pattern.name.clone()) {
                return Err(FrameworkError::DuplicatePattern(pattern.name.clone()));
            }
        }
        Ok(Framework { patterns })
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, name: &str) -> Option<&Pattern> {
        self.patterns.iter().find(|p| p.name == name)
    }

    /// Union of all pattern vocabularies; the fixed basis for instantiation
    /// and context metrics across the whole lifecycle.
    pub fn vocabulary(&self) -> BTreeSet<String> {
        let mut vocabulary = BTreeSet::new();
        for pattern in &self.patterns {
            vocabulary.extend(pattern.vocabulary.iter().cloned());
        }
        vocabulary
    }

    /// Merges all patterns into one argument. Patterns may reference each
    /// other's elements; the root is the unique goal without incoming
    /// support. The result is *not* validated here; baselining validates and
    /// reports diagnostics.
    pub fn compose(&self, name: &str) -> Result<Argument, FrameworkError> {
        let mut elements: BTreeMap<ElementId, Element> = BTreeMap::new();
        let mut relations: BTreeSet<Relation> = BTreeSet::new();
        for pattern in &self.patterns {
            for (id, element) in &pattern.argument.elements {
                if elements.insert(id.clone(), element.clone()).is_some() {
                    return Err(FrameworkError::DuplicateElement { id: id.clone() });
                }
            }
            relations.extend(pattern.argument.relations.iter().cloned());
        }
        let supported: BTreeSet<&ElementId> = relations
            .iter()
            .filter(|r| r.kind == RelationKind::SupportedBy)
            .map(|r| &r.target)
            .collect();
        let candidates: Vec<ElementId> = elements
            .values()
            .filter(|e| e.kind == crate::model::ElementKind::Goal && !supported.contains(&e.id))
            .map(|e| e.id.clone())
            .collect();
        let root = match candidates.as_slice() {
            [one] => one.clone(),
            [] => return Err(FrameworkError::NoRoot),
            _ => return Err(FrameworkError::MultipleRoots { candidates }),
        };
        Ok(Argument {
            name: String::from(name),
            elements,
            relations,
            root,
        })
    }
}
