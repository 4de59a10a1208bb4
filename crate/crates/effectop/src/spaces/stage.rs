//! Stage-enumerator programs and the index templates built from them.
//!
//! A stage enumerator is a total program whose values are `⟨1, n⟩` (emit
//! `n`) or `⟨0, _⟩` (gap); the set it presents is its emission range. The
//! canonical way to turn an enumerator `E` into a W-index whose domain is
//! that set is the wrapper `t(E)`: `φ_{t(E)}(n)` searches the stages of `E`
//! for an emission of `n`, so `dom(φ_{t(E)}) = range-of-emissions(E)`.
//!
//! Both the enumerators and the wrapper are four-instruction programs of a
//! fixed shape, `[Const(1, c); Pair(1, 0, 0); CallExtern(σ); Halt]`, which
//! search externs recognise to drive the stages directly. Unrecognised
//! indices fall back to fair cap-doubled probing of the raw program, so the
//! fast path changes costs, never semantics.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::kernel::pairing::{nat, pair, unpair};
use crate::kernel::{Extern, ExternOutcome, Machine, MemoResult, StageFn, StageResult};

/// Abstract cost charged per stage probe on top of the stage's own cost:
/// the four wrapper instructions plus the extern call.
pub const STAGE_OVERHEAD: u64 = 5;

pub use crate::kernel::program::{match_param_prog, param_prog};

/// Stage value constructors and destructor.
pub fn stage_emit(n: &BigUint) -> BigUint {
    pair(&nat(1), n)
}

pub fn stage_skip() -> BigUint {
    BigUint::zero()
}

pub fn parse_stage_value(v: &BigUint) -> Option<BigUint> {
    let (flag, n) = unpair(v);
    if flag == nat(1) {
        Some(n)
    } else {
        None
    }
}

/// Drive the stages of an arbitrary enumerator index, calling `visit` on
/// every probe outcome in a deterministic order with a cumulative abstract
/// cost. Recognised stage backends are driven directly; anything else is
/// probed fairly with doubling caps (stage `k` first enters at cap
/// `max(64, k)`), so divergent stages burn bounded cost per round.
pub struct StageDriver<'m> {
    mach: &'m Machine,
    mode: DriverMode,
}

enum DriverMode {
    Backend { stage: std::sync::Arc<dyn Extern>, c: BigUint },
    Raw { index: BigUint },
}

/// What the consumer learned from one probe.
pub enum Probe {
    Emit(BigUint),
    Skip,
}

pub enum DriveOutcome<T> {
    /// The visitor accepted; carries its result and the cost so far.
    Accepted { result: T, cost: u64 },
    /// Budget exhausted before the visitor accepted.
    Exhausted,
}

impl<'m> StageDriver<'m> {
    pub fn new(mach: &'m Machine, enumerator: &BigUint) -> Self {
        let mode = match match_param_prog(&mach.program(enumerator)) {
            Some((slot, c)) => match mach.extern_at(slot) {
                Some(ext) if ext.as_stage().is_some() => DriverMode::Backend { stage: ext, c },
                _ => DriverMode::Raw {
                    index: enumerator.clone(),
                },
            },
            None => DriverMode::Raw {
                index: enumerator.clone(),
            },
        };
        StageDriver { mach, mode }
    }

    /// Probe stages until `visit` returns `Some`, the budget runs out, or
    /// (backend mode only) the stage function reports it needs more than the
    /// remaining budget.
    pub fn drive<T>(
        &self,
        budget: u64,
        mut visit: impl FnMut(u64, Probe) -> Option<T>,
    ) -> DriveOutcome<T> {
        match &self.mode {
            DriverMode::Backend { stage, c } => {
                let stage = stage.as_stage().expect("checked in new");
                let mut cost = 0u64;
                let mut k = 0u64;
                loop {
                    if cost >= budget {
                        return DriveOutcome::Exhausted;
                    }
                    let r = stage.stage(self.mach, c, &nat(k), budget - cost);
                    let (probe, c_inc) = match r {
                        StageResult::Emit { value, cost } => (Probe::Emit(value), cost),
                        StageResult::Skip { cost } => (Probe::Skip, cost),
                        StageResult::NeedsMore => return DriveOutcome::Exhausted,
                    };
                    cost = cost.saturating_add(c_inc.saturating_add(STAGE_OVERHEAD));
                    if cost > budget {
                        return DriveOutcome::Exhausted;
                    }
                    if let Some(result) = visit(k, probe) {
                        return DriveOutcome::Accepted { result, cost };
                    }
                    k += 1;
                }
            }
            DriverMode::Raw { index } => {
                let mut cost = 0u64;
                let mut round_cap = 64u64;
                loop {
                    for k in 0..=round_cap {
                        let r = self.mach.probe(index, &nat(k), round_cap);
                        let (probe, c_inc) = match r {
                            MemoResult::Halted { steps, value } if steps <= round_cap => {
                                match parse_stage_value(&value) {
                                    Some(n) => (Probe::Emit(n), steps + 1),
                                    None => (Probe::Skip, steps + 1),
                                }
                            }
                            _ => (Probe::Skip, round_cap),
                        };
                        cost = cost.saturating_add(c_inc);
                        if cost > budget {
                            return DriveOutcome::Exhausted;
                        }
                        if matches!(probe, Probe::Emit(_)) {
                            if let Some(result) = visit(k, probe) {
                                return DriveOutcome::Accepted { result, cost };
                            }
                        }
                    }
                    round_cap = round_cap.saturating_mul(2);
                }
            }
        }
    }
}

/// `RANGE_MEMBER(⟨E, n⟩)`: semidecide that some stage of `E` emits `n`;
/// the value is the witness stage. `t(E) = param_prog(RANGE_MEMBER, E)`.
pub struct RangeMemberExtern;

impl Extern for RangeMemberExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (e, n) = unpair(input);
        let driver = StageDriver::new(mach, &e);
        match driver.drive(budget, |k, probe| match probe {
            Probe::Emit(m) if m == n => Some(nat(k)),
            _ => None,
        }) {
            DriveOutcome::Accepted { result, cost } => ExternOutcome::value(result, cost.max(1)),
            DriveOutcome::Exhausted => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "range-member"
    }
}

/// `ENUM_STAGE(⟨m, k⟩)`: lift a plain total enumeration `φ_m` into stage
/// form by emitting `φ_m(k)`. This is the paper-style conversion from
/// enumerations to W-indices when composed with `t`.
pub struct EnumStageExtern;

impl StageFn for EnumStageExtern {
    fn stage(&self, mach: &Machine, c: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        match mach.probe(c, k, budget.max(1) - 1) {
            MemoResult::Halted { steps, value } if steps < budget => StageResult::Emit {
                value,
                cost: steps + 1,
            },
            _ => StageResult::NeedsMore,
        }
    }

    fn stage_name(&self) -> &str {
        "enum-stage"
    }
}

impl Extern for EnumStageExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (c, k) = unpair(input);
        match self.stage(mach, &c, &k, budget) {
            StageResult::Emit { value, cost } => ExternOutcome::value(stage_emit(&value), cost),
            StageResult::Skip { cost } => ExternOutcome::value(stage_skip(), cost),
            StageResult::NeedsMore => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "enum-stage"
    }

    fn as_stage(&self) -> Option<&dyn StageFn> {
        Some(self)
    }
}

/// Generic extern wrapper around any [`StageFn`].
pub struct StageExtern<S: StageFn> {
    pub stage_fn: S,
}

impl<S: StageFn> Extern for StageExtern<S> {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (c, k) = unpair(input);
        match self.stage_fn.stage(mach, &c, &k, budget) {
            StageResult::Emit { value, cost } => ExternOutcome::value(stage_emit(&value), cost),
            StageResult::Skip { cost } => ExternOutcome::value(stage_skip(), cost),
            StageResult::NeedsMore => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        self.stage_fn.stage_name()
    }

    fn as_stage(&self) -> Option<&dyn StageFn> {
        Some(&self.stage_fn)
    }
}
