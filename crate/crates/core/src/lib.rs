//! Core model for goal-structured safety argumentation and its lifecycle.
//!
//! This crate carries the pure, allocation-only parts of the tool:
//!
//! - [`model`]: the argument graph (goals, strategies, solutions, context
//!   elements), well-formedness validation, diffs, and subtree extraction.
//! - [`text`]: the `.gsn` textual dialect: a total parser with positioned
//!   errors and a canonical serializer.
//! - [`pattern`]: context-open argument patterns (`.gsnp`): placeholders,
//!   multiplicities, optional branches, and binding-driven instantiation.
//! - [`lifecycle`]: immutable revisions, the argument operations that
//!   produce them, and maturity/context metrics.
//! - [`conservation`]: safety performance indicators: definitions,
//!   observation windows, threshold violations, and claim validity.
//! - [`represent`]: milestone-tailored stakeholder documents derived from a
//!   revision, with machine-checkable traceability.
//! - [`coupling`]: evidence registration, gap analysis signals, and release
//!   records gating deployment.
//!
//! Everything here is deterministic and side-effect free; persistence and the
//! command-line surface live in the companion `arglife` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod conservation;
pub mod coupling;
pub mod lifecycle;
pub mod model;
pub mod pattern;
pub mod rational;
pub mod represent;
pub mod text;

#[cfg(feature = "testgen")]
pub mod testgen;

pub use rational::Rational;

/// Timestamps are UTC throughout; callers supply them so that every function
/// in this crate stays a pure mapping from inputs to outputs.
pub type Timestamp = chrono::DateTime<chrono::Utc>;
