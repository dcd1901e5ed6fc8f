//! Evolutionary diversity optimization on permutation problems.
//!
//! Solutions to the symmetric and asymmetric traveling salesperson problems
//! (STSP, ATSP) and the quadratic assignment problem (QAP) are all encoded as
//! permutations. Each solution induces a set of exactly `n` *objects*
//! (undirected edges, directed edges, or position/value assignments), and
//! population diversity is measured through how often each object is used.
//!
//! The crate is organised as:
//!
//! * [`permutation`] and [`instance`]: genotype, object sets, overlaps, costs.
//! * [`diversity`]: count tables, the lexicographic measures, D1/D2 scores and
//!   survival selection.
//! * [`mutation`]: the mutation operators and their neighbourhoods.
//! * [`construct`]: maximum-diversity constructions, trap populations and
//!   exhaustive verifiers.
//! * [`engine`]: the (μ+1) evolutionary algorithm.
//! * [`analysis`]: closed-form improvement/run-time bounds and Monte-Carlo
//!   estimators.
//! * [`qaplib`]: QAPLIB instance/solution parsing, synthetic instances and
//!   population files.
//! * [`experiment`]: seeded experiment grids with CSV output.

pub mod analysis;
pub mod construct;
pub mod diversity;
pub mod engine;
mod error;
pub mod experiment;
pub mod instance;
pub mod mutation;
pub mod permutation;
pub mod qaplib;
pub mod rng;

pub use diversity::{
    CountTable, DiversityVector, MeasureKind, Population, PopulationStats, Score, TieBreak,
};
pub use engine::{EaConfig, InitMode, RunRecord};
pub use error::{Error, Result};
pub use instance::{Optimum, Problem, QapInstance, TspInstance};
pub use mutation::{Derangement, OperatorSpec};
pub use permutation::{ObjectSet, Permutation, ProblemKind};
