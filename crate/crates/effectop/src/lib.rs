//! effectop: effective topology over a concrete step-counted machine.
//!
//! The crate bundles a fuel-counted register machine with a total Gödel
//! numbering (`kernel`), effective T₀ spaces over it (`spaces`), concrete
//! instances from domain theory and metric spaces (`instances`), canonical
//! sequence families and limit algorithms (`seqlim`), continuity
//! certificates and convergence-module extractors (`continuity`), an
//! executable counterexample separating effectivity from sequential
//! continuity (`counterexamples`), and the acceptance suite that drives all
//! of it (`suite`).

pub mod continuity;
pub mod instances;
pub mod kernel;
pub mod par;
pub mod seqlim;
pub mod spaces;

pub use kernel::{EvalOutcome, GoedelIndex, Machine};
