//! The argument graph model and its structural operations.
//!
//! An [`Argument`] is a named directed acyclic graph of six element kinds
//! connected by `SupportedBy` and `InContextOf` relations. The type itself is
//! a plain data structure: any shape can be constructed or parsed, and
//! [`validate`] reports every broken well-formedness rule as a [`Diagnostic`]
//! instead of refusing construction. Operations that require a well-formed
//! input reject arguments whose validation yields errors.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Identifier grammar shared by elements, arguments, patterns, and
/// placeholders: a letter followed by letters, digits, or underscores.
pub fn is_valid_ident(text: &str) -> bool {
    let mut bytes = text.bytes();
    match bytes.next() {
        Some(b) if b.is_ascii_alphabetic() => {}
        _ => return false,
    }
    bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// Tags additionally allow colon-separated segments (`standard:iso26262`),
/// used to group conformity-case sections.
pub fn is_valid_tag(text: &str) -> bool {
    !text.is_empty() && text.split(':').all(is_valid_ident)
}

/// Error for rejected identifier or tag literals.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid {role} `{literal}`")]
pub struct IdentError {
    pub role: &'static str,
    pub literal: String,
}

/// Identifier of an element, unique within one argument.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(text: impl Into<String>) -> Result<Self, IdentError> {
        let text = text.into();
        if is_valid_ident(&text) {
            Ok(ElementId(text))
        } else {
            Err(IdentError {
                role: "element identifier",
                literal: text,
            })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ElementId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        ElementId::new(text).map_err(serde::de::Error::custom)
    }
}

/// A grouping or filtering label on an element.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct Tag(String);

impl Tag {
    pub fn new(text: impl Into<String>) -> Result<Self, IdentError> {
        let text = text.into();
        if is_valid_tag(&text) {
            Ok(Tag(text))
        } else {
            Err(IdentError {
                role: "tag",
                literal: text,
            })
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// For `standard:iso26262` returns `iso26262`.
    pub fn standard_suffix(&self) -> Option<&str> {
        self.0.strip_prefix("standard:")
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Tag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Tag::new(text).map_err(serde::de::Error::custom)
    }
}

/// The six element kinds of the dialect. No other kinds exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Goal,
    Strategy,
    Solution,
    Context,
    Assumption,
    Justification,
}

impl ElementKind {
    pub const ALL: [ElementKind; 6] = [
        ElementKind::Goal,
        ElementKind::Strategy,
        ElementKind::Solution,
        ElementKind::Context,
        ElementKind::Assumption,
        ElementKind::Justification,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            ElementKind::Goal => "goal",
            ElementKind::Strategy => "strategy",
            ElementKind::Solution => "solution",
            ElementKind::Context => "context",
            ElementKind::Assumption => "assumption",
            ElementKind::Justification => "justification",
        }
    }

    pub fn from_keyword(word: &str) -> Option<ElementKind> {
        Self::ALL.into_iter().find(|k| k.keyword() == word)
    }

    /// Only goals and strategies may be left undeveloped.
    pub fn may_be_undeveloped(self) -> bool {
        matches!(self, ElementKind::Goal | ElementKind::Strategy)
    }

    /// Kinds allowed as the source of any relation.
    pub fn may_source_relations(self) -> bool {
        matches!(self, ElementKind::Goal | ElementKind::Strategy)
    }

    /// Kinds allowed as the target of a `SupportedBy` relation.
    pub fn may_be_supported_by_target(self) -> bool {
        matches!(
            self,
            ElementKind::Goal | ElementKind::Strategy | ElementKind::Solution
        )
    }

    /// Kinds allowed as the target of an `InContextOf` relation.
    pub fn may_be_context_target(self) -> bool {
        matches!(
            self,
            ElementKind::Context | ElementKind::Assumption | ElementKind::Justification
        )
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Development {
    Developed,
    Undeveloped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instantiation {
    Instantiated,
    Uninstantiated,
}

/// A single node of the argument graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: ElementId,
    pub kind: ElementKind,
    pub statement: String,
    pub development: Development,
    pub instantiation: Instantiation,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub tags: BTreeSet<Tag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module_name: Option<String>,
}

impl Element {
    /// A developed, instantiated element with no tags or module.
    pub fn new(id: ElementId, kind: ElementKind, statement: impl Into<String>) -> Self {
        Element {
            id,
            kind,
            statement: statement.into(),
            development: Development::Developed,
            instantiation: Instantiation::Instantiated,
            tags: BTreeSet::new(),
            module_name: None,
        }
    }

    pub fn is_undeveloped(&self) -> bool {
        self.development == Development::Undeveloped
    }

    pub fn is_uninstantiated(&self) -> bool {
        self.instantiation == Instantiation::Uninstantiated
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t.as_str() == tag)
    }

    /// True if the element differs from `other` in any field that counts as a
    /// modification for diff purposes (everything except relations).
    fn content_differs(&self, other: &Element) -> bool {
        self.kind != other.kind
            || self.statement != other.statement
            || self.development != other.development
            || self.instantiation != other.instantiation
            || self.tags != other.tags
            || self.module_name != other.module_name
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    SupportedBy,
    InContextOf,
}

impl RelationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::SupportedBy => "supported_by",
            RelationKind::InContextOf => "in_context_of",
        }
    }
}

/// A typed edge between two elements, identified by its endpoints and kind.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub source: ElementId,
    pub target: ElementId,
    pub kind: RelationKind,
}

impl Relation {
    pub fn supported_by(source: ElementId, target: ElementId) -> Self {
        Relation {
            source,
            target,
            kind: RelationKind::SupportedBy,
        }
    }

    pub fn in_context_of(source: ElementId, target: ElementId) -> Self {
        Relation {
            source,
            target,
            kind: RelationKind::InContextOf,
        }
    }
}

/// A named argument graph with a distinguished root goal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub name: String,
    pub elements: BTreeMap<ElementId, Element>,
    pub relations: BTreeSet<Relation>,
    pub root: ElementId,
}

impl Argument {
    pub fn new(name: impl Into<String>, root: Element) -> Self {
        let root_id = root.id.clone();
        let mut elements = BTreeMap::new();
        elements.insert(root_id.clone(), root);
        Argument {
            name: name.into(),
            elements,
            relations: BTreeSet::new(),
            root: root_id,
        }
    }

    pub fn element(&self, id: &ElementId) -> Option<&Element> {
        self.elements.get(id)
    }

    pub fn contains(&self, id: &ElementId) -> bool {
        self.elements.contains_key(id)
    }

    /// Outgoing relation targets of `id` with the given kind, in id order.
    pub fn targets(&self, id: &ElementId, kind: RelationKind) -> Vec<&ElementId> {
        self.relations
            .iter()
            .filter(|r| r.kind == kind && &r.source == id)
            .map(|r| &r.target)
            .collect()
    }

    /// Incoming relations of `id` with the given kind.
    pub fn incoming(&self, id: &ElementId, kind: RelationKind) -> Vec<&Relation> {
        self.relations
            .iter()
            .filter(|r| r.kind == kind && &r.target == id)
            .collect()
    }

    pub fn elements_of_kind(&self, kind: ElementKind) -> impl Iterator<Item = &Element> {
        self.elements.values().filter(move |e| e.kind == kind)
    }

    /// Ids reachable from `start` following both relation kinds, including
    /// `start` itself. Traversal ignores elements missing from the map.
    pub fn reachable_from(&self, start: &ElementId) -> BTreeSet<ElementId> {
        self.reachable_from_excluding(start, None)
    }

    fn reachable_from_excluding(
        &self,
        start: &ElementId,
        blocked: Option<&ElementId>,
    ) -> BTreeSet<ElementId> {
        let mut seen = BTreeSet::new();
        if !self.contains(start) || Some(start) == blocked {
            return seen;
        }
        let mut queue = VecDeque::new();
        queue.push_back(start.clone());
        seen.insert(start.clone());
        while let Some(current) = queue.pop_front() {
            for relation in self.relations.iter().filter(|r| r.source == current) {
                let next = &relation.target;
                if Some(next) == blocked || !self.contains(next) || seen.contains(next) {
                    continue;
                }
                seen.insert(next.clone());
                queue.push_back(next.clone());
            }
        }
        seen
    }

    /// Elements whose every path from the argument root passes through
    /// `node`, including `node` itself. This is the subtree an elimination
    /// removes and an expansion copies; shared context elements that stay
    /// reachable some other way are excluded.
    pub fn exclusive_subtree(&self, node: &ElementId) -> BTreeSet<ElementId> {
        let full = self.reachable_from(&self.root);
        let without = self.reachable_from_excluding(&self.root, Some(node));
        let mut subtree: BTreeSet<ElementId> =
            full.difference(&without).cloned().collect();
        subtree.insert(node.clone());
        subtree
    }

    /// Distinct placeholder names occurring in any statement.
    pub fn open_placeholders(&self) -> BTreeSet<String> {
        let mut names = BTreeSet::new();
        for element in self.elements.values() {
            names.extend(placeholder_names(&element.statement));
        }
        names
    }
}

/// Scans a statement for placeholder tokens of the form `{Name}` where `Name`
/// follows the identifier grammar. Anything else involving braces is treated
/// as literal text.
pub fn placeholder_names(statement: &str) -> BTreeSet<String> {
    let mut names = BTreeSet::new();
    let bytes = statement.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(end) = statement[i + 1..].find(['{', '}']) {
                let candidate = &statement[i + 1..i + 1 + end];
                if bytes[i + 1 + end] == b'}' && is_valid_ident(candidate) {
                    names.insert(candidate.to_string());
                    i += end + 2;
                    continue;
                }
            }
        }
        i += 1;
    }
    names
}

/// True if the statement contains at least one placeholder token.
pub fn has_placeholders(statement: &str) -> bool {
    !placeholder_names(statement).is_empty()
}

// ---------------------------------------------------------------------------
// Diagnostics
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes emitted by [`validate`] and the lifecycle.
pub mod codes {
    pub const ROOT_MISSING: &str = "ROOT-MISSING";
    pub const ROOT_NOT_GOAL: &str = "ROOT-NOT-GOAL";
    pub const ROOT_SUPPORTED: &str = "ROOT-SUPPORTED";
    pub const UNKNOWN_SOURCE: &str = "UNKNOWN-SOURCE";
    pub const UNKNOWN_TARGET: &str = "UNKNOWN-TARGET";
    pub const SELF_RELATION: &str = "SELF-RELATION";
    pub const BAD_SOURCE_KIND: &str = "BAD-SOURCE-KIND";
    pub const BAD_TARGET_KIND: &str = "BAD-TARGET-KIND";
    pub const CYCLE: &str = "CYCLE";
    pub const BAD_DEVELOPMENT: &str = "BAD-DEVELOPMENT";
    pub const INSTANTIATION_MISMATCH: &str = "INSTANTIATION-MISMATCH";
    pub const BAD_STATEMENT: &str = "BAD-STATEMENT";
    pub const ORPHAN: &str = "ORPHAN";
    pub const PROCESS_ARG_MISSING: &str = "PROCESS-ARG-MISSING";
}

/// One finding from validation: a broken invariant with the elements involved.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub element_ids: Vec<ElementId>,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &str, ids: Vec<ElementId>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            element_ids: ids,
            message: message.into(),
        }
    }

    pub fn warning(code: &str, ids: Vec<ElementId>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.to_string(),
            element_ids: ids,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}]: {}", self.code, self.message)
    }
}

/// True when no diagnostic in the list is an error.
pub fn is_error_free(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().all(|d| d.severity != Severity::Error)
}

/// Checks every well-formedness rule and returns one diagnostic per
/// violation, ordered by (severity, code, element ids, message). An empty
/// result means the argument is well formed.
pub fn validate(argument: &Argument) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    let root_present = match argument.elements.get(&argument.root) {
        Some(root) => {
            if root.kind != ElementKind::Goal {
                out.push(Diagnostic::error(
                    codes::ROOT_NOT_GOAL,
                    alloc::vec![argument.root.clone()],
                    alloc::format!("root element {} is a {}, not a goal", argument.root, root.kind),
                ));
            }
            if !argument
                .incoming(&argument.root, RelationKind::SupportedBy)
                .is_empty()
            {
                out.push(Diagnostic::error(
                    codes::ROOT_SUPPORTED,
                    alloc::vec![argument.root.clone()],
                    alloc::format!("root element {} has an incoming supported_by relation", argument.root),
                ));
            }
            true
        }
        None => {
            out.push(Diagnostic::error(
                codes::ROOT_MISSING,
                alloc::vec![argument.root.clone()],
                alloc::format!("root element {} does not exist", argument.root),
            ));
            false
        }
    };

    for relation in &argument.relations {
        let source = argument.element(&relation.source);
        let target = argument.element(&relation.target);
        if source.is_none() {
            out.push(Diagnostic::error(
                codes::UNKNOWN_SOURCE,
                alloc::vec![relation.source.clone()],
                alloc::format!("relation source {} does not exist", relation.source),
            ));
        }
        if target.is_none() {
            out.push(Diagnostic::error(
                codes::UNKNOWN_TARGET,
                alloc::vec![relation.target.clone()],
                alloc::format!("relation target {} does not exist", relation.target),
            ));
        }
        if relation.source == relation.target {
            out.push(Diagnostic::error(
                codes::SELF_RELATION,
                alloc::vec![relation.source.clone()],
                alloc::format!("element {} relates to itself", relation.source),
            ));
        }
        if let (Some(source), Some(target)) = (source, target) {
            if !source.kind.may_source_relations() {
                out.push(Diagnostic::error(
                    codes::BAD_SOURCE_KIND,
                    alloc::vec![relation.source.clone()],
                    alloc::format!(
                        "{} {} cannot be the source of {}",
                        source.kind,
                        relation.source,
                        relation.kind.keyword()
                    ),
                ));
            }
            let target_ok = match relation.kind {
                RelationKind::SupportedBy => target.kind.may_be_supported_by_target(),
                RelationKind::InContextOf => target.kind.may_be_context_target(),
            };
            if !target_ok {
                out.push(Diagnostic::error(
                    codes::BAD_TARGET_KIND,
                    alloc::vec![relation.target.clone()],
                    alloc::format!(
                        "{} {} cannot be the target of {}",
                        target.kind,
                        relation.target,
                        relation.kind.keyword()
                    ),
                ));
            }
        }
    }

    for cycle in supported_by_cycles(argument) {
        let members: Vec<String> = cycle.iter().map(|id| id.to_string()).collect();
        out.push(Diagnostic::error(
            codes::CYCLE,
            cycle,
            alloc::format!("supported_by cycle through {}", members.join(", ")),
        ));
    }

    for element in argument.elements.values() {
        if element.is_undeveloped() && !element.kind.may_be_undeveloped() {
            out.push(Diagnostic::error(
                codes::BAD_DEVELOPMENT,
                alloc::vec![element.id.clone()],
                alloc::format!("{} {} cannot be undeveloped", element.kind, element.id),
            ));
        }
        let open = has_placeholders(&element.statement);
        if open != element.is_uninstantiated() {
            let detail = if open {
                "contains placeholders but is not flagged uninstantiated"
            } else {
                "is flagged uninstantiated but contains no placeholder"
            };
            out.push(Diagnostic::error(
                codes::INSTANTIATION_MISMATCH,
                alloc::vec![element.id.clone()],
                alloc::format!("element {} {detail}", element.id),
            ));
        }
        if element.statement.chars().any(char::is_control) {
            out.push(Diagnostic::error(
                codes::BAD_STATEMENT,
                alloc::vec![element.id.clone()],
                alloc::format!("statement of {} contains control characters", element.id),
            ));
        }
    }

    if root_present {
        let reachable = argument.reachable_from(&argument.root);
        for id in argument.elements.keys() {
            if !reachable.contains(id) {
                out.push(Diagnostic::error(
                    codes::ORPHAN,
                    alloc::vec![id.clone()],
                    alloc::format!("element {id} is not reachable from the root"),
                ));
            }
        }
    }

    out.sort();
    out
}

/// Strongly connected components of size > 1 in the `SupportedBy` subgraph,
/// each reported once with members in id order. Iterative Tarjan so deep
/// graphs cannot overflow the stack.
fn supported_by_cycles(argument: &Argument) -> Vec<Vec<ElementId>> {
    let nodes: Vec<&ElementId> = argument.elements.keys().collect();
    let index_of: BTreeMap<&ElementId, usize> =
        nodes.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut adjacency: Vec<Vec<usize>> = alloc::vec![Vec::new(); nodes.len()];
    for relation in &argument.relations {
        if relation.kind != RelationKind::SupportedBy {
            continue;
        }
        if let (Some(&s), Some(&t)) = (index_of.get(&relation.source), index_of.get(&relation.target)) {
            adjacency[s].push(t);
        }
    }

    const UNVISITED: usize = usize::MAX;
    let n = nodes.len();
    let mut index = alloc::vec![UNVISITED; n];
    let mut lowlink = alloc::vec![0usize; n];
    let mut on_stack = alloc::vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components = Vec::new();

    for start in 0..n {
        if index[start] != UNVISITED {
            continue;
        }
        // Explicit DFS frames: (node, next child position).
        let mut frames: Vec<(usize, usize)> = alloc::vec![(start, 0)];
        index[start] = next_index;
        lowlink[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        #[allow(clippy::while_let_loop)]
        loop {
            let (node, child) = match frames.last_mut() {
                Some(frame) => {
                    let pair = (frame.0, frame.1);
                    frame.1 += 1;
                    pair
                }
                None => break,
            };
            if child < adjacency[node].len() {
                let next = adjacency[node][child];
                if index[next] == UNVISITED {
                    index[next] = next_index;
                    lowlink[next] = next_index;
                    next_index += 1;
                    stack.push(next);
                    on_stack[next] = true;
                    frames.push((next, 0));
                } else if on_stack[next] {
                    lowlink[node] = lowlink[node].min(index[next]);
                }
            } else {
                frames.pop();
                if let Some(parent) = frames.last() {
                    lowlink[parent.0] = lowlink[parent.0].min(lowlink[node]);
                }
                if lowlink[node] == index[node] {
                    let mut component = Vec::new();
                    while let Some(member) = stack.pop() {
                        on_stack[member] = false;
                        component.push(member);
                        if member == node {
                            break;
                        }
                    }
                    if component.len() > 1 {
                        let mut ids: Vec<ElementId> =
                            component.into_iter().map(|i| nodes[i].clone()).collect();
                        ids.sort();
                        components.push(ids);
                    }
                }
            }
        }
    }
    components.sort();
    components
}

// ---------------------------------------------------------------------------
// ChangeSet and diff
// ---------------------------------------------------------------------------

/// Difference between two arguments, applicable to the base to reproduce the
/// next version. Added and modified entries carry the new element content so
/// the change set is self-contained.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeSet {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub added: BTreeMap<ElementId, Element>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub removed: BTreeSet<ElementId>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub modified: BTreeMap<ElementId, Element>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub added_relations: BTreeSet<Relation>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub removed_relations: BTreeSet<Relation>,
}

impl ChangeSet {
    pub fn is_empty(&self) -> bool {
        self.added.is_empty()
            && self.removed.is_empty()
            && self.modified.is_empty()
            && self.added_relations.is_empty()
            && self.removed_relations.is_empty()
    }

    pub fn added_ids(&self) -> BTreeSet<ElementId> {
        self.added.keys().cloned().collect()
    }

    pub fn modified_ids(&self) -> BTreeSet<ElementId> {
        self.modified.keys().cloned().collect()
    }

    /// Every element id the change touches, including relation endpoints.
    pub fn touched_ids(&self) -> BTreeSet<ElementId> {
        let mut ids = BTreeSet::new();
        ids.extend(self.added.keys().cloned());
        ids.extend(self.removed.iter().cloned());
        ids.extend(self.modified.keys().cloned());
        for relation in self.added_relations.iter().chain(&self.removed_relations) {
            ids.insert(relation.source.clone());
            ids.insert(relation.target.clone());
        }
        ids
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("argument `{name}` fails validation with {} error(s)", diagnostics.len())]
    Invalid {
        name: String,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("arguments have different roots: {base} vs {next}")]
    RootMismatch { base: ElementId, next: ElementId },
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("element {id} is a {found}, expected a {expected}")]
    KindError {
        id: ElementId,
        expected: ElementKind,
        found: ElementKind,
    },
    #[error("change set cannot be applied: {0}")]
    ApplyConflict(String),
}

/// Validates and returns the error diagnostics if any exist.
pub fn require_valid(argument: &Argument) -> Result<(), ModelError> {
    let diagnostics = validate(argument);
    let errors: Vec<Diagnostic> = diagnostics
        .into_iter()
        .filter(|d| d.severity == Severity::Error)
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ModelError::Invalid {
            name: argument.name.clone(),
            diagnostics: errors,
        })
    }
}

/// Ids of all undeveloped elements. Rejects arguments with validation errors.
pub fn undeveloped(argument: &Argument) -> Result<BTreeSet<ElementId>, ModelError> {
    require_valid(argument)?;
    Ok(argument
        .elements
        .values()
        .filter(|e| e.is_undeveloped())
        .map(|e| e.id.clone())
        .collect())
}

/// Computes the change set turning `base` into `next`. Both inputs must be
/// well formed and share the same root; names are lineage metadata and may
/// differ.
pub fn diff(base: &Argument, next: &Argument) -> Result<ChangeSet, ModelError> {
    require_valid(base)?;
    require_valid(next)?;
    if base.root != next.root {
        return Err(ModelError::RootMismatch {
            base: base.root.clone(),
            next: next.root.clone(),
        });
    }
    let mut change = ChangeSet::default();
    for (id, element) in &next.elements {
        match base.elements.get(id) {
            None => {
                change.added.insert(id.clone(), element.clone());
            }
            Some(previous) if previous.content_differs(element) => {
                change.modified.insert(id.clone(), element.clone());
            }
            Some(_) => {}
        }
    }
    for id in base.elements.keys() {
        if !next.elements.contains_key(id) {
            change.removed.insert(id.clone());
        }
    }
    change.added_relations = next.relations.difference(&base.relations).cloned().collect();
    change.removed_relations = base.relations.difference(&next.relations).cloned().collect();
    Ok(change)
}

/// Applies a change set to `base`. The result keeps the base name and root;
/// callers validate the outcome where well-formedness is required.
pub fn apply_changeset(base: &Argument, change: &ChangeSet) -> Result<Argument, ModelError> {
    let mut next = base.clone();
    for id in &change.removed {
        if next.elements.remove(id).is_none() {
            return Err(ModelError::ApplyConflict(alloc::format!(
                "removed element {id} does not exist"
            )));
        }
    }
    for (id, element) in &change.added {
        if next.elements.contains_key(id) {
            return Err(ModelError::ApplyConflict(alloc::format!(
                "added element {id} already exists"
            )));
        }
        next.elements.insert(id.clone(), element.clone());
    }
    for (id, element) in &change.modified {
        if !next.elements.contains_key(id) {
            return Err(ModelError::ApplyConflict(alloc::format!(
                "modified element {id} does not exist"
            )));
        }
        next.elements.insert(id.clone(), element.clone());
    }
    for relation in &change.removed_relations {
        if !next.relations.remove(relation) {
            return Err(ModelError::ApplyConflict(alloc::format!(
                "removed relation {} -> {} does not exist",
                relation.source,
                relation.target
            )));
        }
    }
    for relation in &change.added_relations {
        if !next.relations.insert(relation.clone()) {
            return Err(ModelError::ApplyConflict(alloc::format!(
                "added relation {} -> {} already exists",
                relation.source,
                relation.target
            )));
        }
    }
    Ok(next)
}

/// Extracts the reusable sub-argument rooted at `root_id`: the supported-by
/// closure plus every context element attached to an included element. The
/// result keeps the source name and passes validation whenever the input did.
pub fn extract_module(argument: &Argument, root_id: &ElementId) -> Result<Argument, ModelError> {
    let root = argument
        .element(root_id)
        .ok_or_else(|| ModelError::UnknownElement(root_id.clone()))?;
    if root.kind != ElementKind::Goal {
        return Err(ModelError::KindError {
            id: root_id.clone(),
            expected: ElementKind::Goal,
            found: root.kind,
        });
    }

    let mut included = BTreeSet::new();
    let mut queue = VecDeque::new();
    included.insert(root_id.clone());
    queue.push_back(root_id.clone());
    while let Some(current) = queue.pop_front() {
        for target in argument.targets(&current, RelationKind::SupportedBy) {
            if argument.contains(target) && included.insert(target.clone()) {
                queue.push_back(target.clone());
            }
        }
    }
    let closure: Vec<ElementId> = included.iter().cloned().collect();
    for id in closure {
        for target in argument.targets(&id, RelationKind::InContextOf) {
            if argument.contains(target) {
                included.insert(target.clone());
            }
        }
    }

    let elements = argument
        .elements
        .iter()
        .filter(|(id, _)| included.contains(*id))
        .map(|(id, e)| (id.clone(), e.clone()))
        .collect();
    let relations = argument
        .relations
        .iter()
        .filter(|r| included.contains(&r.source) && included.contains(&r.target))
        .cloned()
        .collect();
    Ok(Argument {
        name: argument.name.clone(),
        elements,
        relations,
        root: root_id.clone(),
    })
}
