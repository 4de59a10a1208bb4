//! Observation-level operations on effective spaces.
//!
//! Everything here goes through the machine: membership and strong
//! inclusion are fuel-bounded evaluations of the space's semidecision
//! programs, and all extensional claims are stated at the separation-budget
//! level that T₀ observation licenses.

use num_bigint::BigUint;

use crate::kernel::pairing::{nat, pair, to_u64_clamped, unpair};
use crate::kernel::{EvalOutcome, GoedelIndex};

use super::externs::ext_prog;
use super::stage::param_prog;
use super::{Numbering, Space};

/// A fuel-bounded observation: either seen, or nothing yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Obs {
    Observed,
    Unknown,
}

impl Obs {
    pub fn observed(self) -> bool {
        matches!(self, Obs::Observed)
    }
}

/// `x_i ∈ B_n`, observed within `fuel` steps of the membership program.
pub fn is_member(sp: &Space, i: &BigUint, n: &BigUint, fuel: u64) -> Obs {
    match sp
        .machine()
        .eval(&GoedelIndex(sp.membership.clone()), &pair(i, n), fuel)
    {
        EvalOutcome::Halted(_) => Obs::Observed,
        EvalOutcome::TimedOut(_) => Obs::Unknown,
    }
}

/// Observation of `m ≺_B n` through the machine-level semidecision.
pub fn si_obs(sp: &Space, m: &BigUint, n: &BigUint, fuel: u64) -> Obs {
    match sp
        .machine()
        .eval(&GoedelIndex(sp.strong_inclusion.clone()), &pair(m, n), fuel)
    {
        EvalOutcome::Halted(_) => Obs::Observed,
        EvalOutcome::TimedOut(_) => Obs::Unknown,
    }
}

/// The effectivity witness of a strong basis: for `x_i ∈ B_m ∩ B_n`, find
/// `a` with `x_i ∈ B_a`, `a ≺_B m`, `a ≺_B n`, by the fixed Cantor dovetail
/// over (candidate rank, fuel). Returns `None` when the probe budget runs
/// out, which is the observation of divergence off the precondition.
pub fn sb(sp: &Space, i: &BigUint, m: &BigUint, n: &BigUint, probes: u64) -> Option<BigUint> {
    for t in 0..probes {
        let (rank, f) = unpair(&nat(t));
        let rank = to_u64_clamped(&rank);
        let fuel = to_u64_clamped(&f).saturating_mul(16);
        let a = sp.sem.basis_candidate(rank);
        if sp.si_host(&a, m) && sp.si_host(&a, n) && is_member(sp, i, &a, fuel).observed() {
            return Some(a);
        }
    }
    None
}

/// Lemma-style normed enumeration: `q(i)` indexes a total ≺_B-decreasing
/// enumeration of basic opens converging to `x_i`.
pub fn normed_enum(sp: &Space, i: &BigUint) -> GoedelIndex {
    GoedelIndex(param_prog(sp.slots.normed, i))
}

/// Effective limit passing: from a normed computable enumeration index to
/// an index of the point it converges to.
pub fn limit_pass(sp: &Space, m: &BigUint) -> BigUint {
    sp.ctx.limit_pass(m)
}

/// The acceptable numbering bundle: the numbering itself, the membership
/// program and the limit-passing program, all machine-level.
pub struct AcceptableNumbering {
    pub numbering: Numbering,
    pub membership_prog: BigUint,
    pub limit_pass_prog: BigUint,
    /// Reduction x ≤ x̄ (identity: canonical indices already are x̄-indices).
    pub reduce_into: BigUint,
    /// Reduction x̄ ≤ x via normed enumeration followed by limit passing.
    pub reduce_back: BigUint,
}

pub fn acceptable_numbering(sp: &Space) -> AcceptableNumbering {
    let numbering = Numbering {
        label: format!("{}-xbar", sp.label),
        domain_test: ext_prog(sp.slots.dom_test),
        equality_budget: sp.points.equality_budget,
    };
    // x̄ ≤ x: e ↦ pt(q(e)).
    let mut asm = crate::kernel::Asm::new();
    asm.ext(sp.slots.q_build);
    asm.ext(sp.slots.t_build);
    asm.halt();
    let reduce_back = asm.assemble().encode();
    let identity = crate::kernel::Program::new(vec![crate::kernel::Inst::Halt]).encode();
    AcceptableNumbering {
        numbering,
        membership_prog: sp.membership.clone(),
        limit_pass_prog: ext_prog(sp.slots.t_build),
        reduce_into: identity,
        reduce_back,
    }
}

/// Refutation-only hull probing: search `{a : n ≺_B a}` for a set whose
/// non-membership of `x_j` is certified.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HullVerdict {
    RefutedBy(BigUint),
    Unknown,
}

pub fn hull_refute(sp: &Space, j: &BigUint, n: &BigUint, budget: u64, fuel: u64) -> HullVerdict {
    for k in 0..budget {
        match sp.sem.hull_envelope(n, k) {
            Some(a) => {
                debug_assert!(sp.si_host(n, &a));
                if sp.certified_not(j, &a, fuel) {
                    return HullVerdict::RefutedBy(a);
                }
            }
            None => break,
        }
    }
    HullVerdict::Unknown
}

/// Budgeted specialization-order check: `SeparatedBy(n)` certifies
/// `x_i ∈ B_n` observed and `x_j ∉ B_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecLeqVerdict {
    ConsistentSoFar,
    SeparatedBy(BigUint),
}

pub fn spec_leq(sp: &Space, i: &BigUint, j: &BigUint, budget: u64, fuel: u64) -> SpecLeqVerdict {
    for rank in 0..budget {
        let n = sp.sem.basis_candidate(rank);
        if is_member(sp, i, &n, fuel).observed() && sp.certified_not(j, &n, fuel) {
            return SpecLeqVerdict::SeparatedBy(n);
        }
    }
    SpecLeqVerdict::ConsistentSoFar
}

/// Indistinguishability at the separation budget: the first `budget` basis
/// candidates produce identical membership observations at the given fuel.
/// Returns a separating basis index if one shows up.
pub fn indistinguishable_at(
    sp: &Space,
    i: &BigUint,
    j: &BigUint,
    budget: u64,
    fuel: u64,
) -> Option<BigUint> {
    for rank in 0..budget {
        let n = sp.sem.basis_candidate(rank);
        if is_member(sp, i, &n, fuel) != is_member(sp, j, &n, fuel) {
            return Some(n);
        }
    }
    None
}

/// Reducibility check report: `ν ≤ κ` via `g` on the given samples.
#[derive(Debug, Clone, Default)]
pub struct ReduceReport {
    pub checked: usize,
    pub violations: Vec<ReduceViolation>,
}

#[derive(Debug, Clone)]
pub enum ReduceViolation {
    TranslationDiverged { sample: BigUint },
    SeparatedBy { sample: BigUint, basis: BigUint },
}

impl ReduceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify on samples that `g` translates indices of `ν` to indices of `κ`
/// naming indistinguishable points. Both numberings are views of the same
/// space, so observations flow through the space's membership program.
pub fn reduce_verify(
    sp: &Space,
    g: &BigUint,
    samples: &[BigUint],
    budget: u64,
    fuel: u64,
) -> ReduceReport {
    let mut report = ReduceReport::default();
    for s in samples {
        report.checked += 1;
        let translated = match sp.machine().eval(&GoedelIndex(g.clone()), s, fuel) {
            EvalOutcome::Halted(v) => v,
            EvalOutcome::TimedOut(_) => {
                report
                    .violations
                    .push(ReduceViolation::TranslationDiverged { sample: s.clone() });
                continue;
            }
        };
        if let Some(basis) = indistinguishable_at(sp, s, &translated, budget, fuel) {
            report.violations.push(ReduceViolation::SeparatedBy {
                sample: s.clone(),
                basis,
            });
        }
    }
    report
}
