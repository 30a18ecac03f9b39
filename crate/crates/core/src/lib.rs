//! α-quotiented λ-terms with nominal recursors and corecursors realised as
//! executable models, law suites, model transformations and coterm machinery.
//!
//! The crate is organised bottom-up: [`perm`] and [`varset`] provide names,
//! [`term`] the finitary syntax, [`models`] law checking over arbitrary
//! carriers, [`recursors`] and [`transforms`] the definitional principles,
//! [`infinitary`] and [`corecursors`] the coinductive side, and
//! [`counterexamples`] / [`examples`] concrete instances.

#![allow(clippy::type_complexity)]

pub mod corecursors;
pub mod counterexamples;
pub mod error;
pub mod examples;
pub mod gen;
pub mod infinitary;
pub mod models;
pub mod perm;
pub mod recursors;
pub mod report;
pub mod term;
pub mod transforms;
pub mod varset;

pub use error::{NomError, ParseError};
pub use models::{Model, PropId, Signature, Sym};
pub use perm::{parse_perm, Perm, Var};
pub use report::{PropLine, PropReport, Status};
pub use term::{alpha_eq, parse, parse_with, DestView, Names, Term};
pub use varset::{fresh_var, VarSet};
