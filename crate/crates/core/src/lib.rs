//! Scoring, selection-error analysis and optimal product selection for
//! bibliometric research assessment exercises.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`corpus`] loads researchers, products and authorships from CSV.
//! 2. [`gev`] scores every authorship under its panel's rules, using the
//!    percentile thresholds of a [`reference::ReferenceLibrary`].
//! 3. [`selection`] builds the per-researcher portfolio sets, measures
//!    selection errors, simulates the three institutional selection
//!    scenarios and solves the exact optimum as a min-cost flow.
//! 4. [`report`] renders the comparison tables.

pub mod cli;
pub mod corpus;
pub mod gev;
pub mod reference;
pub mod report;
pub mod score;
pub mod selection;
mod table;

pub use score::Score;
