//! Safety argumentation lifecycle workbench.
//!
//! This crate carries everything that touches the outside world: the on-disk
//! [`store`], the representation document files ([`docfile`]), the workflow
//! orchestration ([`session`]), and the command-line interface ([`cli`]).
//! The argument model, pattern instantiation, metrics, monitoring, and
//! document derivation live in `arglife-core` and stay pure.

pub mod cli;
pub mod docfile;
pub mod error;
pub mod session;
pub mod store;

pub use error::{Error, Result};
pub use session::Workspace;
pub use store::Repository;
