//! Strategy-proof voting rules for single-peaked preferences.
//!
//! Every strategy-proof rule on an interval is a generalized median with
//! phantom voters. This crate represents such rules by their phantom
//! function ([`phantoms::PhantomFunction`]), evaluates them through five
//! equivalent formulas ([`representations`]), audits arbitrary rules against
//! the classical axioms on grids ([`axioms`]) and synthesizes rules that
//! minimize expected or worst-case distance to the voters' peaks
//! ([`welfare`]).

pub mod axioms;
pub mod cli;
pub mod domain;
pub mod error;
pub mod exact;
pub mod phantoms;
pub mod representations;
pub mod welfare;

pub use error::{Error, Result};
