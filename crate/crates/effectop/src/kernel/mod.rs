//! The concrete model of computation: a deterministic fuel-counted
//! register machine with a total Gödel numbering, pairing, s-m-n, the
//! recursion theorem and dovetailed enumeration.

pub mod asm;
pub mod catalog;
pub mod enumerate;
pub mod externs;
pub mod machine;
pub mod pairing;
pub mod program;
pub mod recursion;

pub use asm::Asm;
pub use catalog::{default_catalog, Catalog, CatalogEntry};
pub use enumerate::{we_contains, we_enumerate};
pub use externs::{slots, standard_machine, HostFnExtern};
pub use machine::{
    EvalOutcome, Extern, ExternOutcome, GoedelIndex, Machine, MemoResult, StageFn, StageResult,
};
pub use pairing::{nat, pair, proj1, proj2, triple, unpair, untriple};
pub use program::{match_param_prog, param_prog, Inst, Program};
pub use recursion::{const_index, fixpoint, fixpoint_index, smn, transformer_catalog, Transformer};
