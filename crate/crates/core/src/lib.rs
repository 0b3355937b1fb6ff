//! Numerical engine for Legendrean contact structures on a coordinate chart.
//!
//! The crate evaluates contact forms, Reeb fields, Legendrean splittings,
//! the induced partial connections on the quotient TM/F, and the first
//! relative BGG operator, all in exact-derivative jet arithmetic, and checks
//! the defining identities of these constructions at randomized sample
//! points. Structures are described in a small TOML-based config format (see
//! [`harness`]); the `legctl` binary exposes verification suites and
//! pointwise evaluation on top of it.

pub mod bgg;
pub mod connect;
pub mod contact;
pub mod error;
pub mod expr;
pub mod fields;
pub mod harness;
pub mod jet;

#[cfg(test)]
pub(crate) mod testutil;

pub use error::{Error, Result};
