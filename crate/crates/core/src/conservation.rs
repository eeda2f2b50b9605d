//! Post-deployment validity monitoring with safety performance indicators.
//!
//! An [`SpiDefinition`] binds a quantitative field metric to the goals whose
//! validity it guards: a comparator, a threshold, and a window rule over the
//! observation stream. Observations are evaluated position by position; a
//! [`Violation`] is raised wherever the window is computable and the
//! comparator fails. Windows that lack data are never violations; silence
//! during warm-up is deliberate and visible in status reports.
//!
//! Definitions are stored in `.spi` files, one record per indicator:
//!
//! ```text
//! spi <ID> guards <IDLIST> metric "<TEXT>" <CMP> <NUMBER> unit "<TEXT>" window <RULE>
//! CMP  := "<" | "<=" | ">" | ">="
//! RULE := "latest" | "mean(K)" | "max(K)" | "min(K)"
//! ```

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::lifecycle::ViolationRef;
use crate::model::{Argument, ChangeSet, ElementId, ElementKind};
use crate::rational::Rational;
use crate::text::{ParseError, Tok, TokenStream};
use crate::Timestamp;

/// Comparator giving the healthy direction: the indicator is within limits
/// while `value CMP threshold` holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    LessThan,
    LessOrEqual,
    GreaterThan,
    GreaterOrEqual,
}

impl Comparator {
    pub fn token(self) -> &'static str {
        match self {
            Comparator::LessThan => "<",
            Comparator::LessOrEqual => "<=",
            Comparator::GreaterThan => ">",
            Comparator::GreaterOrEqual => ">=",
        }
    }

    /// True while the observed value is healthy.
    pub fn within_limits(self, value: Rational, threshold: Rational) -> bool {
        match self {
            Comparator::LessThan => value < threshold,
            Comparator::LessOrEqual => value <= threshold,
            Comparator::GreaterThan => value > threshold,
            Comparator::GreaterOrEqual => value >= threshold,
        }
    }
}

/// Aggregation over the observation stream. `k` is at least 1; windows with
/// fewer than `k` observations are not evaluable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowRule {
    Latest,
    MeanOfLastK(u32),
    MaxOfLastK(u32),
    MinOfLastK(u32),
}

impl WindowRule {
    pub fn canonical(&self) -> String {
        match self {
            WindowRule::Latest => "latest".to_string(),
            WindowRule::MeanOfLastK(k) => alloc::format!("mean({k})"),
            WindowRule::MaxOfLastK(k) => alloc::format!("max({k})"),
            WindowRule::MinOfLastK(k) => alloc::format!("min({k})"),
        }
    }
}

/// A monitored metric guarding the validity of specific goals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiDefinition {
    pub id: String,
    pub claim_ids: BTreeSet<ElementId>,
    pub metric_name: String,
    pub comparator: Comparator,
    pub threshold: Rational,
    pub unit: String,
    pub window: WindowRule,
}

/// One time-stamped field observation for an indicator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiObservation {
    pub spi_id: String,
    pub timestamp: Timestamp,
    pub value: Rational,
}

/// A threshold breach: the window value at `detected_at` failed the
/// comparator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub spi_id: String,
    pub window_value: Rational,
    pub threshold: Rational,
    pub comparator: Comparator,
    pub affected_claims: BTreeSet<ElementId>,
    pub detected_at: Timestamp,
}

impl Violation {
    pub fn to_ref(&self) -> ViolationRef {
        ViolationRef {
            spi_id: self.spi_id.clone(),
            detected_at: self.detected_at,
        }
    }
}

/// Validity of a guarded claim. Only goals guarded by at least one indicator
/// appear in a [`ValidityState`]; everything else cannot be invalidated here.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimValidity {
    Valid,
    Invalidated(Vec<ViolationRef>),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityState {
    pub claims: BTreeMap<ElementId, ClaimValidity>,
}

impl ValidityState {
    pub fn invalidated(&self) -> BTreeSet<ElementId> {
        self.claims
            .iter()
            .filter(|(_, v)| matches!(v, ClaimValidity::Invalidated(_)))
            .map(|(id, _)| id.clone())
            .collect()
    }

    pub fn all_valid(&self) -> bool {
        self.invalidated().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SpiError {
    #[error("indicator `{0}` is not registered")]
    UnknownSpi(String),
    #[error("indicator `{0}` is already registered")]
    DuplicateSpi(String),
    #[error("indicator `{spi_id}` guards `{claim}`, which is not a goal of the deployed revision")]
    UnknownClaim { spi_id: String, claim: ElementId },
    #[error("indicator `{0}` guards no claims")]
    EmptyClaims(String),
    #[error("indicator `{0}` declares a zero-size window")]
    InvalidWindow(String),
    #[error("non-monotone timestamps for indicator `{spi_id}` at {at}")]
    NonMonotoneTimestamps { spi_id: String, at: Timestamp },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UpdateError {
    #[error("no claim is invalidated; use a qualitative update to record other triggers")]
    NoViolation,
    #[error("a non-empty rationale is required")]
    EmptyRationale,
    #[error("invalidated claim {0} is neither touched by the change nor deferred in the rationale")]
    UnaddressedClaim(ElementId),
}

/// An indicator whose guarded claims vanished from the argument; reported,
/// never silently dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DanglingSpi {
    pub spi_id: String,
    pub missing_claims: BTreeSet<ElementId>,
}

/// Checks that a definition is registrable against the deployed argument:
/// non-empty claims, all of them existing goals, window size at least 1.
pub fn verify_definition(definition: &SpiDefinition, argument: &Argument) -> Result<(), SpiError> {
    if definition.claim_ids.is_empty() {
        return Err(SpiError::EmptyClaims(definition.id.clone()));
    }
    match definition.window {
        WindowRule::MeanOfLastK(0) | WindowRule::MaxOfLastK(0) | WindowRule::MinOfLastK(0) => {
            return Err(SpiError::InvalidWindow(definition.id.clone()));
        }
        _ => {}
    }
    for claim in &definition.claim_ids {
        let ok = argument
            .element(claim)
            .map(|e| e.kind == ElementKind::Goal)
            .unwrap_or(false);
        if !ok {
            return Err(SpiError::UnknownClaim {
                spi_id: definition.id.clone(),
                claim: claim.clone(),
            });
        }
    }
    Ok(())
}

/// Window value at `position` (0-based, inclusive) of the value stream, or
/// `None` while the window has too little data.
pub fn window_value_at(window: WindowRule, values: &[Rational], position: usize) -> Option<Rational> {
    if position >= values.len() {
        return None;
    }
    match window {
        WindowRule::Latest => Some(values[position]),
        WindowRule::MeanOfLastK(k) => {
            let k = k as usize;
            if position + 1 < k {
                return None;
            }
            let slice = &values[position + 1 - k..=position];
            let sum: Rational = slice.iter().copied().sum();
            Some(sum / Rational::from_integer(k as i64))
        }
        WindowRule::MaxOfLastK(k) => {
            let k = k as usize;
            if position + 1 < k {
                return None;
            }
            values[position + 1 - k..=position].iter().copied().max()
        }
        WindowRule::MinOfLastK(k) => {
            let k = k as usize;
            if position + 1 < k {
                return None;
            }
            values[position + 1 - k..=position].iter().copied().min()
        }
    }
}

/// Evaluates one indicator over its observation stream, reporting a violation
/// at every position whose computable window value fails the comparator.
/// `start` skips positions already evaluated by earlier ingests.
pub fn violations_in_range(
    definition: &SpiDefinition,
    observations: &[SpiObservation],
    start: usize,
) -> Vec<Violation> {
    let values: Vec<Rational> = observations.iter().map(|o| o.value).collect();
    let mut out = Vec::new();
    for (position, observation) in observations.iter().enumerate().skip(start) {
        if let Some(window_value) = window_value_at(definition.window, &values, position) {
            if !definition
                .comparator
                .within_limits(window_value, definition.threshold)
            {
                out.push(Violation {
                    spi_id: definition.id.clone(),
                    window_value,
                    threshold: definition.threshold,
                    comparator: definition.comparator,
                    affected_claims: definition.claim_ids.clone(),
                    detected_at: observation.timestamp,
                });
            }
        }
    }
    out
}

/// Full-stream evaluation from the first observation.
pub fn evaluate_stream(definition: &SpiDefinition, observations: &[SpiObservation]) -> Vec<Violation> {
    violations_in_range(definition, observations, 0)
}

/// Checks strict timestamp monotonicity of a batch against the last stored
/// timestamp of the same indicator.
pub fn verify_monotone(
    spi_id: &str,
    last_stored: Option<Timestamp>,
    batch: &[&SpiObservation],
) -> Result<(), SpiError> {
    let mut previous = last_stored;
    for observation in batch {
        if let Some(previous) = previous {
            if observation.timestamp <= previous {
                return Err(SpiError::NonMonotoneTimestamps {
                    spi_id: spi_id.to_string(),
                    at: observation.timestamp,
                });
            }
        }
        previous = Some(observation.timestamp);
    }
    Ok(())
}

/// Maps violations onto the claims they invalidate. Claims guarded by several
/// indicators are invalidated as soon as any one of them violates; applying
/// the same violations twice changes nothing.
pub fn invalidate(definitions: &[SpiDefinition], violations: &[Violation]) -> ValidityState {
    let mut claims: BTreeMap<ElementId, ClaimValidity> = BTreeMap::new();
    for definition in definitions {
        for claim in &definition.claim_ids {
            claims.entry(claim.clone()).or_insert(ClaimValidity::Valid);
        }
    }
    for violation in violations {
        for claim in &violation.affected_claims {
            let entry = claims
                .entry(claim.clone())
                .or_insert(ClaimValidity::Valid);
            let reference = violation.to_ref();
            match entry {
                ClaimValidity::Valid => {
                    *entry = ClaimValidity::Invalidated(alloc::vec![reference]);
                }
                ClaimValidity::Invalidated(refs) => {
                    if !refs.contains(&reference) {
                        refs.push(reference);
                    }
                }
            }
        }
    }
    ValidityState { claims }
}

/// Admissibility of a conservation update: at least one invalidated claim
/// (unless explicitly qualitative), a rationale, and every invalidated claim
/// either touched by the change within its subtree or deferred by naming it
/// in the rationale.
pub fn check_update(
    argument: &Argument,
    state: &ValidityState,
    change: &ChangeSet,
    rationale: &str,
    qualitative: bool,
) -> Result<(), UpdateError> {
    if rationale.trim().is_empty() {
        return Err(UpdateError::EmptyRationale);
    }
    let invalidated = state.invalidated();
    if invalidated.is_empty() && !qualitative {
        return Err(UpdateError::NoViolation);
    }
    let touched = change.touched_ids();
    for claim in invalidated {
        let subtree = argument.reachable_from(&claim);
        let addressed = touched.iter().any(|id| subtree.contains(id))
            || rationale.contains(claim.as_str());
        if !addressed {
            return Err(UpdateError::UnaddressedClaim(claim));
        }
    }
    Ok(())
}

/// After an update, every indicator must either re-bind to the new argument
/// or be reported as dangling. No guard is lost silently.
pub fn re_resolve(definitions: &[SpiDefinition], argument: &Argument) -> Vec<DanglingSpi> {
    let mut dangling = Vec::new();
    for definition in definitions {
        let missing: BTreeSet<ElementId> = definition
            .claim_ids
            .iter()
            .filter(|claim| {
                argument
                    .element(claim)
                    .map(|e| e.kind != ElementKind::Goal)
                    .unwrap_or(true)
            })
            .cloned()
            .collect();
        if !missing.is_empty() {
            dangling.push(DanglingSpi {
                spi_id: definition.id.clone(),
                missing_claims: missing,
            });
        }
    }
    dangling
}

/// Point-in-time status of one indicator, for reports and the status command.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiStatusEntry {
    pub id: String,
    pub metric_name: String,
    pub comparator: Comparator,
    pub threshold: Rational,
    pub unit: String,
    pub window: WindowRule,
    pub guarded_claims: BTreeSet<ElementId>,
    pub observation_count: u64,
    pub window_value: Option<Rational>,
    pub within_limits: Option<bool>,
    pub outstanding_violations: u64,
}

/// Builds the status entry for one indicator from its full observation
/// stream and the violations still outstanding against it.
pub fn status_entry(
    definition: &SpiDefinition,
    observations: &[SpiObservation],
    outstanding_violations: u64,
) -> SpiStatusEntry {
    let values: Vec<Rational> = observations.iter().map(|o| o.value).collect();
    let window_value = if values.is_empty() {
        None
    } else {
        window_value_at(definition.window, &values, values.len() - 1)
    };
    SpiStatusEntry {
        id: definition.id.clone(),
        metric_name: definition.metric_name.clone(),
        comparator: definition.comparator,
        threshold: definition.threshold,
        unit: definition.unit.clone(),
        window: definition.window,
        guarded_claims: definition.claim_ids.clone(),
        observation_count: observations.len() as u64,
        window_value,
        within_limits: window_value
            .map(|v| definition.comparator.within_limits(v, definition.threshold)),
        outstanding_violations,
    }
}

// ---------------------------------------------------------------------------
// `.spi` file format
// ---------------------------------------------------------------------------

/// Parses an `.spi` definitions file: zero or more `spi` records.
pub fn parse_spi_file(input: &str) -> Result<Vec<SpiDefinition>, Vec<ParseError>> {
    let mut stream = match TokenStream::new(input) {
        Ok(stream) => stream,
        Err(err) => return Err(alloc::vec![err]),
    };
    let mut definitions = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    while !stream.at_end() {
        match parse_spi_record(&mut stream) {
            Ok(definition) => {
                if !seen.insert(definition.id.clone()) {
                    return Err(alloc::vec![stream.error_here(alloc::format!(
                        "unique indicator id (duplicate `{}`)",
                        definition.id
                    ))]);
                }
                definitions.push(definition);
            }
            Err(err) => return Err(alloc::vec![err]),
        }
    }
    Ok(definitions)
}

fn parse_spi_record(stream: &mut TokenStream) -> Result<SpiDefinition, ParseError> {
    stream.expect_keyword("spi")?;
    let (id, _) = stream.expect_word("indicator identifier")?;
    stream.expect_keyword("guards")?;
    let mut claim_ids = BTreeSet::new();
    loop {
        let (claim, _) = stream.expect_element_id("guarded goal identifier")?;
        claim_ids.insert(claim);
        if stream.expect_tok(Tok::Comma, "`,`").is_err() {
            break;
        }
    }
    stream.expect_keyword("metric")?;
    let (metric_name, _) = stream.expect_string("quoted metric name")?;
    let comparator = match stream.peek().map(|t| t.tok.clone()) {
        Some(Tok::Lt) => Comparator::LessThan,
        Some(Tok::Le) => Comparator::LessOrEqual,
        Some(Tok::Gt) => Comparator::GreaterThan,
        Some(Tok::Ge) => Comparator::GreaterOrEqual,
        _ => return Err(stream.error_here("comparator `<`, `<=`, `>`, or `>=`")),
    };
    stream.advance();
    let threshold = match stream.peek() {
        Some(token) => {
            if let Tok::Num(literal) = &token.tok {
                match Rational::parse(literal) {
                    Ok(value) => {
                        stream.advance();
                        value
                    }
                    Err(_) => return Err(stream.error_here("threshold number")),
                }
            } else {
                return Err(stream.error_here("threshold number"));
            }
        }
        None => return Err(stream.error_here("threshold number")),
    };
    stream.expect_keyword("unit")?;
    let (unit, _) = stream.expect_string("quoted unit")?;
    stream.expect_keyword("window")?;
    let (rule_word, rule_span) = stream.expect_word("window rule")?;
    let window = match rule_word.as_str() {
        "latest" => WindowRule::Latest,
        "mean" | "max" | "min" => {
            stream.expect_tok(Tok::LParen, "`(`")?;
            let (k, k_span) = stream.expect_integer("window size")?;
            stream.expect_tok(Tok::RParen, "`)`")?;
            if k == 0 {
                return Err(ParseError {
                    span: k_span,
                    expected: "window size of at least 1".to_string(),
                    found: "`0`".to_string(),
                });
            }
            match rule_word.as_str() {
                "mean" => WindowRule::MeanOfLastK(k),
                "max" => WindowRule::MaxOfLastK(k),
                _ => WindowRule::MinOfLastK(k),
            }
        }
        other => {
            return Err(ParseError {
                span: rule_span,
                expected: "`latest`, `mean(K)`, `max(K)`, or `min(K)`".to_string(),
                found: alloc::format!("`{other}`"),
            })
        }
    };
    if claim_ids.is_empty() {
        return Err(stream.error_here("at least one guarded goal"));
    }
    Ok(SpiDefinition {
        id,
        claim_ids,
        metric_name,
        comparator,
        threshold,
        unit,
        window,
    })
}

/// Canonical `.spi` line for one definition.
pub fn serialize_spi(definition: &SpiDefinition) -> String {
    let mut out = String::new();
    let _ = write!(out, "spi {} guards ", definition.id);
    for (i, claim) in definition.claim_ids.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{claim}");
    }
    let _ = write!(
        out,
        " metric \"{}\" {} {} unit \"{}\" window {}",
        crate::text::escape_statement(&definition.metric_name),
        definition.comparator.token(),
        definition.threshold.to_display_string(),
        crate::text::escape_statement(&definition.unit),
        definition.window.canonical()
    );
    out.push('\n');
    out
}
