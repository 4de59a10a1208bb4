//! The fuel-counted universal machine.
//!
//! Evaluation is deterministic and fuel-monotone: if `φ_i(a)` halts within
//! `n` steps it halts with the same value within any `n' ≥ n`. Divergence is
//! observable only as [`EvalOutcome::TimedOut`]. Every instruction costs one
//! step; an extern call costs 1 + the extern's cost on that input; universal
//! and bounded calls charge the steps of the sub-computation to the caller.
//!
//! Halting results are memoized per `(index, argument)`; memoized outcomes
//! are exact because of fuel monotonicity. Runs that touch an unregistered
//! extern slot are never memoized, so registering further externs cannot
//! invalidate the cache.

use std::sync::Arc;
use std::sync::RwLock;

use dashmap::DashMap;
use num_bigint::BigUint;
use num_traits::Zero;

use super::pairing::{to_u64_clamped, unpair};
use super::program::{Inst, Program};

/// Ceiling on the size of a register value, in bits. Instructions whose
/// result would exceed it diverge instead; this keeps runaway
/// self-applications (which double their index size per recursion level)
/// from exhausting host memory while staying deterministic and
/// fuel-monotone. Constructed indices in this crate stay well below it.
pub const MAX_VALUE_BITS: u64 = 1 << 18;

/// Index of a (possibly divergent) unary partial function of the machine.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoedelIndex(pub BigUint);

impl GoedelIndex {
    pub fn value(&self) -> &BigUint {
        &self.0
    }
}

impl From<BigUint> for GoedelIndex {
    fn from(v: BigUint) -> Self {
        GoedelIndex(v)
    }
}

impl From<u64> for GoedelIndex {
    fn from(v: u64) -> Self {
        GoedelIndex(BigUint::from(v))
    }
}

impl std::fmt::Display for GoedelIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// The only observable of a partial computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalOutcome {
    Halted(BigUint),
    TimedOut(u64),
}

impl EvalOutcome {
    pub fn is_halted(&self) -> bool {
        matches!(self, EvalOutcome::Halted(_))
    }

    pub fn halted_value(&self) -> Option<&BigUint> {
        match self {
            EvalOutcome::Halted(v) => Some(v),
            EvalOutcome::TimedOut(_) => None,
        }
    }
}

/// Result of asking an extern for its value within a step budget.
///
/// Implementations must be deterministic functions of the input alone: the
/// value and cost may not depend on the budget, which only selects between
/// `Value` (cost ≤ budget) and `NeedsMore`. Costs must be at least 1.
pub enum ExternOutcome {
    Value { value: BigUint, cost: u64 },
    NeedsMore,
}

impl ExternOutcome {
    pub fn value(value: BigUint, cost: u64) -> Self {
        ExternOutcome::Value { value, cost }
    }
}

/// A deterministic host function installed in the machine's extern table.
pub trait Extern: Send + Sync {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome;

    /// A short diagnostic name.
    fn name(&self) -> &str {
        "extern"
    }

    /// When the extern is the backend of a stage-enumerator program, expose
    /// the stage function so searches can drive it without simulating the
    /// four-instruction wrapper.
    fn as_stage(&self) -> Option<&dyn StageFn> {
        None
    }
}

/// One stage of an enumeration: either an element or a gap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StageResult {
    Emit { value: BigUint, cost: u64 },
    Skip { cost: u64 },
    NeedsMore,
}

/// Backend of a stage-enumerator program `φ(k) = stage(c, k)`, where stage
/// values are `⟨1, n⟩` for an element and `⟨0, _⟩` for a gap. Results must
/// be deterministic in `(c, k)`; the budget only gates `NeedsMore`.
pub trait StageFn: Send + Sync {
    fn stage(&self, mach: &Machine, c: &BigUint, k: &BigUint, budget: u64) -> StageResult;

    fn stage_name(&self) -> &str {
        "stage"
    }
}

/// Exact halting information for a `(program, argument)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemoResult {
    Halted { steps: u64, value: BigUint },
    /// Known not to halt within the given number of steps.
    Exceeds(u64),
}

#[derive(Clone)]
enum MemoEntry {
    Halted { steps: u64, value: BigUint },
    TimedOutAt(u64),
}

/// The machine: total numbering, extern table, evaluation caches.
pub struct Machine {
    externs: RwLock<Vec<Arc<dyn Extern>>>,
    memo: DashMap<(BigUint, BigUint), MemoEntry>,
    decode_cache: DashMap<BigUint, Arc<Program>>,
}

impl Default for Machine {
    fn default() -> Self {
        Self::new()
    }
}

impl Machine {
    pub fn new() -> Self {
        Machine {
            externs: RwLock::new(Vec::new()),
            memo: DashMap::new(),
            decode_cache: DashMap::new(),
        }
    }

    /// Append an extern; the slot stays valid for the life of the machine.
    /// Registration is meant for the construction phase of a scenario:
    /// existing slots are never replaced, so earlier evaluation results
    /// remain valid.
    pub fn register_extern(&self, ext: Arc<dyn Extern>) -> u16 {
        let mut table = self.externs.write().expect("extern table poisoned");
        let slot = u16::try_from(table.len()).expect("extern table full");
        table.push(ext);
        slot
    }

    pub fn extern_at(&self, slot: u16) -> Option<Arc<dyn Extern>> {
        self.externs
            .read()
            .expect("extern table poisoned")
            .get(slot as usize)
            .cloned()
    }

    pub fn extern_count(&self) -> usize {
        self.externs.read().expect("extern table poisoned").len()
    }

    pub fn program(&self, index: &BigUint) -> Arc<Program> {
        if let Some(p) = self.decode_cache.get(index) {
            return p.clone();
        }
        let p = Arc::new(Program::decode(index));
        self.decode_cache.insert(index.clone(), p.clone());
        p
    }

    /// Evaluate `φ_i(a)` with the given fuel.
    pub fn eval(&self, i: &GoedelIndex, a: &BigUint, fuel: u64) -> EvalOutcome {
        self.eval_counted(i, a, fuel).0
    }

    /// Evaluate and report the exact steps consumed (equal to `fuel` when the
    /// outcome is `TimedOut`).
    pub fn eval_counted(&self, i: &GoedelIndex, a: &BigUint, fuel: u64) -> (EvalOutcome, u64) {
        match self.probe(&i.0, a, fuel) {
            MemoResult::Halted { steps, value } if steps <= fuel => {
                (EvalOutcome::Halted(value), steps)
            }
            _ => (EvalOutcome::TimedOut(fuel), fuel),
        }
    }

    /// Decidable bounded-halting test: `φ_i(a)↓_n`.
    pub fn halts_within(&self, i: &GoedelIndex, a: &BigUint, n: u64) -> bool {
        self.eval(i, a, n).is_halted()
    }

    /// Memo-backed halting information with a step cap: either exact halting
    /// data (whose step count may exceed `cap`) or the fact that the program
    /// does not halt within `cap`.
    ///
    /// Repeated probes at growing caps re-run with a doubled bound so the
    /// total simulation work stays linear in the final cap.
    pub fn probe(&self, i: &BigUint, a: &BigUint, cap: u64) -> MemoResult {
        let mut prev = 0u64;
        if let Some(r) = self.memo_probe_exact(i, a) {
            match r {
                MemoEntry::Halted { steps, value } => return MemoResult::Halted { steps, value },
                MemoEntry::TimedOutAt(c) if c >= cap => return MemoResult::Exceeds(cap),
                MemoEntry::TimedOutAt(c) => prev = c,
            }
        }
        let amplified = cap.max(prev.saturating_mul(2)).max(64);
        let (outcome, steps) = self.run(i, a, amplified);
        match outcome {
            EvalOutcome::Halted(value) => MemoResult::Halted { steps, value },
            EvalOutcome::TimedOut(_) => MemoResult::Exceeds(cap),
        }
    }

    fn memo_probe_exact(&self, i: &BigUint, a: &BigUint) -> Option<MemoEntry> {
        self.memo.get(&(i.clone(), a.clone())).map(|e| e.clone())
    }

    fn memo_probe(&self, i: &BigUint, a: &BigUint, fuel: u64) -> Option<MemoResult> {
        match self.memo_probe_exact(i, a)? {
            MemoEntry::Halted { steps, value } => {
                if steps <= fuel {
                    Some(MemoResult::Halted { steps, value })
                } else {
                    Some(MemoResult::Exceeds(fuel))
                }
            }
            MemoEntry::TimedOutAt(c) => {
                if fuel <= c {
                    Some(MemoResult::Exceeds(fuel))
                } else {
                    None
                }
            }
        }
    }

    fn memo_record_halt(&self, i: &BigUint, a: &BigUint, steps: u64, value: &BigUint) {
        self.memo.insert(
            (i.clone(), a.clone()),
            MemoEntry::Halted {
                steps,
                value: value.clone(),
            },
        );
    }

    fn memo_record_timeout(&self, i: &BigUint, a: &BigUint, cap: u64) {
        let key = (i.clone(), a.clone());
        match self.memo.get_mut(&key) {
            Some(mut e) => {
                if let MemoEntry::TimedOutAt(c) = &mut *e {
                    if *c < cap {
                        *c = cap;
                    }
                }
            }
            None => {
                self.memo.insert(key, MemoEntry::TimedOutAt(cap));
            }
        }
    }

    fn run(&self, index: &BigUint, arg: &BigUint, fuel: u64) -> (EvalOutcome, u64) {
        Interp::new(self).run(index, arg, fuel)
    }
}

struct Frame {
    prog: Arc<Program>,
    pc: usize,
    regs: Vec<BigUint>,
    /// Absolute ceiling on the global step counter for this frame's subtree.
    limit: u64,
    /// Step counter value at frame entry.
    entry: u64,
    key: (BigUint, BigUint),
    kind: FrameKind,
    /// Whether this frame's subtree touched a missing extern slot.
    tainted: bool,
}

#[derive(PartialEq, Eq)]
enum FrameKind {
    Top,
    Universal,
    /// Bounded test; `local` records that the requested bound fits below the
    /// parent's limit, so hitting `limit` resolves the test with 0 instead of
    /// propagating a timeout.
    Bounded { local: bool },
}

struct Interp<'m> {
    mach: &'m Machine,
    steps: u64,
    stack: Vec<Frame>,
    /// Multiset of `(index, arg)` pairs of live universal-call frames. A
    /// universal call on a pair already live below it is an infinite
    /// regress (the machine is deterministic), hence divergence.
    live_universal: std::collections::HashMap<(BigUint, BigUint), u32>,
}

enum StepEvent {
    Continue,
    /// The innermost frame hit its step ceiling.
    LimitHit,
}

impl<'m> Interp<'m> {
    fn new(mach: &'m Machine) -> Self {
        Interp {
            mach,
            steps: 0,
            stack: Vec::new(),
            live_universal: std::collections::HashMap::new(),
        }
    }

    fn run(&mut self, index: &BigUint, arg: &BigUint, fuel: u64) -> (EvalOutcome, u64) {
        self.push_frame(index.clone(), arg.clone(), fuel, FrameKind::Top);
        loop {
            let done = match self.step() {
                StepEvent::Continue => self.pop_halted_frames(),
                StepEvent::LimitHit => self.unwind_limit(),
            };
            if let Some(outcome) = done {
                return outcome;
            }
        }
    }

    fn push_frame(&mut self, index: BigUint, arg: BigUint, limit: u64, kind: FrameKind) {
        let prog = self.mach.program(&index);
        let mut regs = Vec::with_capacity(8);
        regs.push(arg.clone());
        if !matches!(kind, FrameKind::Bounded { .. }) {
            *self
                .live_universal
                .entry((index.clone(), arg.clone()))
                .or_insert(0) += 1;
        }
        self.stack.push(Frame {
            prog,
            pc: 0,
            regs,
            limit,
            entry: self.steps,
            key: (index, arg),
            kind,
            tainted: false,
        });
    }

    fn drop_frame_bookkeeping(&mut self, frame: &Frame) {
        if !matches!(frame.kind, FrameKind::Bounded { .. }) {
            if let Some(c) = self.live_universal.get_mut(&frame.key) {
                *c -= 1;
                if *c == 0 {
                    self.live_universal.remove(&frame.key);
                }
            }
        }
    }

    /// Pop every frame that has run off its program; returns the final
    /// outcome if the top-level frame finished.
    fn pop_halted_frames(&mut self) -> Option<(EvalOutcome, u64)> {
        loop {
            let top = self.stack.last()?;
            if top.pc < top.prog.len() {
                return None;
            }
            let frame = self.stack.pop().expect("frame stack empty");
            self.drop_frame_bookkeeping(&frame);
            let value = frame.regs.first().cloned().unwrap_or_default();
            let taken = self.steps - frame.entry;
            if !frame.tainted {
                self.mach
                    .memo_record_halt(&frame.key.0, &frame.key.1, taken, &value);
            }
            match frame.kind {
                FrameKind::Top => return Some((EvalOutcome::Halted(value), taken)),
                FrameKind::Universal => {
                    self.set_reg(0, value);
                }
                FrameKind::Bounded { .. } => {
                    let mut v = BigUint::from(taken);
                    v += 1u8;
                    self.set_reg(0, v);
                }
                // taint propagates to the caller
            }
            if frame.tainted {
                if let Some(parent) = self.stack.last_mut() {
                    parent.tainted = true;
                }
            }
        }
    }

    /// Handle the innermost frame reaching its step ceiling.
    fn unwind_limit(&mut self) -> Option<(EvalOutcome, u64)> {
        loop {
            let frame = self.stack.pop().expect("limit hit with empty stack");
            self.drop_frame_bookkeeping(&frame);
            self.steps = frame.limit;
            let consumed = self.steps - frame.entry;
            if !frame.tainted {
                self.mach
                    .memo_record_timeout(&frame.key.0, &frame.key.1, consumed);
            }
            let tainted = frame.tainted;
            match frame.kind {
                FrameKind::Top => return Some((EvalOutcome::TimedOut(frame.limit), frame.limit)),
                FrameKind::Bounded { local: true } => {
                    self.set_reg(0, BigUint::zero());
                    if tainted {
                        if let Some(parent) = self.stack.last_mut() {
                            parent.tainted = true;
                        }
                    }
                    return None;
                }
                FrameKind::Universal | FrameKind::Bounded { local: false } => {
                    if tainted {
                        if let Some(parent) = self.stack.last_mut() {
                            parent.tainted = true;
                        }
                    }
                    // The parent shares the same ceiling; keep unwinding.
                }
            }
        }
    }

    fn set_reg(&mut self, r: usize, v: BigUint) {
        let frame = self.stack.last_mut().expect("no frame for register write");
        if frame.regs.len() <= r {
            frame.regs.resize(r + 1, BigUint::zero());
        }
        frame.regs[r] = v;
    }

    /// Write a value, diverging the innermost frame when it exceeds the
    /// size ceiling.
    fn set_reg_checked(&mut self, r: usize, v: BigUint) -> Option<StepEvent> {
        if v.bits() > MAX_VALUE_BITS {
            return Some(self.diverge_top());
        }
        self.set_reg(r, v);
        None
    }

    fn diverge_top(&mut self) -> StepEvent {
        self.steps = self.stack.last().expect("no frame").limit;
        StepEvent::LimitHit
    }

    fn reg(&self, r: usize) -> BigUint {
        let frame = self.stack.last().expect("no frame for register read");
        frame.regs.get(r).cloned().unwrap_or_default()
    }

    /// Consume `c` steps against the innermost ceiling.
    fn consume(&mut self, c: u64) -> Result<(), ()> {
        let limit = self.stack.last().expect("no frame").limit;
        let next = self.steps.saturating_add(c);
        if next > limit {
            Err(())
        } else {
            self.steps = next;
            Ok(())
        }
    }

    fn remaining(&self) -> u64 {
        self.stack.last().expect("no frame").limit - self.steps
    }

    fn step(&mut self) -> StepEvent {
        let (inst, at_end) = {
            let top = self.stack.last().expect("no frame");
            if top.pc >= top.prog.len() {
                (None, true)
            } else {
                (Some(top.prog.insts[top.pc].clone()), false)
            }
        };
        if at_end {
            // Off the end: implicit halt, no cost. pop_halted_frames handles it.
            return StepEvent::Continue;
        }
        let inst = inst.expect("instruction");
        // Every instruction costs one step up front.
        if self.consume(1).is_err() {
            return StepEvent::LimitHit;
        }
        let mut advance = true;
        match inst {
            Inst::Halt => {
                let top = self.stack.last_mut().expect("no frame");
                top.pc = top.prog.len();
                advance = false;
            }
            Inst::HaltZero => {
                self.set_reg(0, BigUint::zero());
                let top = self.stack.last_mut().expect("no frame");
                top.pc = top.prog.len();
                advance = false;
            }
            Inst::Inc(r) => {
                let mut v = self.reg(r as usize);
                v += 1u8;
                if let Some(ev) = self.set_reg_checked(r as usize, v) {
                    return ev;
                }
            }
            Inst::DecJz(r, target) => {
                let v = self.reg(r as usize);
                let top_len = self.stack.last().expect("no frame").prog.len();
                if v.is_zero() {
                    let top = self.stack.last_mut().expect("no frame");
                    top.pc = (target as usize).min(top_len);
                    advance = false;
                } else {
                    self.set_reg(r as usize, v - 1u8);
                }
            }
            Inst::Copy(s, d) => {
                let v = self.reg(s as usize);
                self.set_reg(d as usize, v);
            }
            Inst::Const(r, ref v) => {
                if let Some(ev) = self.set_reg_checked(r as usize, v.clone()) {
                    return ev;
                }
            }
            Inst::Pair(a, b, d) => {
                let va = self.reg(a as usize);
                let vb = self.reg(b as usize);
                if va.bits() + vb.bits() > MAX_VALUE_BITS {
                    return self.diverge_top();
                }
                if let Some(ev) = self.set_reg_checked(d as usize, super::pairing::pair(&va, &vb)) {
                    return ev;
                }
            }
            Inst::Unpair(s, d1, d2) => {
                let (a, b) = unpair(&self.reg(s as usize));
                self.set_reg(d1 as usize, a);
                self.set_reg(d2 as usize, b);
            }
            Inst::CallExtern(k) => {
                let input = self.reg(0);
                match self.mach.extern_at(k) {
                    Some(ext) => {
                        let budget = self.remaining();
                        match ext.call(self.mach, &input, budget) {
                            ExternOutcome::Value { value, cost } => {
                                debug_assert!(cost <= budget, "extern overspent its budget");
                                if self.consume(cost.min(budget)).is_err() {
                                    return StepEvent::LimitHit;
                                }
                                if let Some(ev) = self.set_reg_checked(0, value) {
                                    return ev;
                                }
                            }
                            ExternOutcome::NeedsMore => {
                                self.steps = self.stack.last().expect("no frame").limit;
                                return StepEvent::LimitHit;
                            }
                        }
                    }
                    None => {
                        // Unregistered slot: diverge, and poison memoization
                        // for every enclosing frame.
                        for f in self.stack.iter_mut() {
                            f.tainted = true;
                        }
                        self.steps = self.stack.last().expect("no frame").limit;
                        return StepEvent::LimitHit;
                    }
                }
            }
            Inst::CallUniversal => {
                let (i, x) = unpair(&self.reg(0));
                let limit = self.stack.last().expect("no frame").limit;
                {
                    let top = self.stack.last_mut().expect("no frame");
                    top.pc += 1;
                }
                advance = false;
                if let Some(ev) = self.enter_call(i, x, limit, FrameKind::Universal) {
                    return ev;
                }
            }
            Inst::CallBounded => {
                let (i, rest) = unpair(&self.reg(0));
                let (x, s_big) = unpair(&rest);
                let s = to_u64_clamped(&s_big);
                let parent_limit = self.stack.last().expect("no frame").limit;
                let local = self.steps.saturating_add(s) <= parent_limit;
                let limit = parent_limit.min(self.steps.saturating_add(s));
                {
                    let top = self.stack.last_mut().expect("no frame");
                    top.pc += 1;
                }
                advance = false;
                if let Some(ev) = self.enter_call(i, x, limit, FrameKind::Bounded { local }) {
                    return ev;
                }
            }
        }
        if advance {
            let top = self.stack.last_mut().expect("no frame");
            top.pc += 1;
        }
        StepEvent::Continue
    }

    /// Start a sub-computation, consulting the memo first.
    fn enter_call(
        &mut self,
        index: BigUint,
        arg: BigUint,
        limit: u64,
        kind: FrameKind,
    ) -> Option<StepEvent> {
        let budget = limit - self.steps;
        // A universal re-entry on a live (index, arg) pair cannot terminate:
        // determinism makes it an infinite regress.
        if !matches!(kind, FrameKind::Bounded { .. })
            && self.live_universal.contains_key(&(index.clone(), arg.clone()))
        {
            self.steps = limit;
            return Some(StepEvent::LimitHit);
        }
        match self.mach.memo_probe(&index, &arg, budget) {
            Some(MemoResult::Halted { steps, value }) => {
                self.steps += steps;
                match kind {
                    FrameKind::Universal | FrameKind::Top => self.set_reg(0, value),
                    FrameKind::Bounded { .. } => {
                        let mut v = BigUint::from(steps);
                        v += 1u8;
                        self.set_reg(0, v);
                    }
                }
                None
            }
            Some(MemoResult::Exceeds(_)) => {
                self.steps = limit;
                match kind {
                    FrameKind::Bounded { local: true } => {
                        self.set_reg(0, BigUint::zero());
                        None
                    }
                    _ => Some(StepEvent::LimitHit),
                }
            }
            None => {
                self.push_frame(index, arg, limit, kind);
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::asm::Asm;
    use crate::kernel::pairing::{nat, pair};

    fn const_prog(v: u64) -> Program {
        Program::new(vec![Inst::Const(0, nat(v)), Inst::Halt])
    }

    fn loop_forever() -> Program {
        // R63 is never written, so DecJz always jumps back to 0.
        Program::new(vec![Inst::DecJz(crate::kernel::program::ZERO_REG, 0)])
    }

    #[test]
    fn constant_program_runs() {
        let m = Machine::new();
        let i = GoedelIndex(const_prog(7).encode());
        assert_eq!(m.eval(&i, &nat(3), 100), EvalOutcome::Halted(nat(7)));
        // Step count of the two-instruction constant program, measured.
        let (out, steps) = m.eval_counted(&i, &nat(3), 100);
        assert!(out.is_halted());
        assert_eq!(steps, 2);
        assert!(!m.halts_within(&i, &nat(3), 1));
        assert!(m.halts_within(&i, &nat(3), 100));
    }

    #[test]
    fn divergence_spends_all_fuel() {
        let m = Machine::new();
        let i = GoedelIndex(loop_forever().encode());
        assert_eq!(m.eval(&i, &nat(0), 1000), EvalOutcome::TimedOut(1000));
    }

    #[test]
    fn empty_program_is_identity() {
        let m = Machine::new();
        let i = GoedelIndex(nat(0));
        assert_eq!(m.eval(&i, &nat(42), 10), EvalOutcome::Halted(nat(42)));
    }

    #[test]
    fn universal_call_transparent() {
        let m = Machine::new();
        let inner = const_prog(9).encode();
        // φ(x) = φ_inner(x) via the universal instruction.
        let mut a = Asm::new();
        let(r_tmp,) = (1,);
        a.const_reg(r_tmp, inner);
        a.pair(r_tmp, 0, 0);
        a.universal();
        a.halt();
        let outer = GoedelIndex(a.assemble().encode());
        assert_eq!(m.eval(&outer, &nat(5), 100), EvalOutcome::Halted(nat(9)));
        // 3 own instructions + halt + 2 inner
        let (_, steps) = m.eval_counted(&outer, &nat(5), 100);
        assert_eq!(steps, 6);
    }

    #[test]
    fn bounded_call_reports_steps_or_zero() {
        let m = Machine::new();
        let inner = const_prog(9).encode();
        let mk = |bound: u64| {
            let mut a = Asm::new();
            a.const_reg(1, pair(&nat(bound), &nat(0)) /*unused*/);
            // R0 = ⟨inner, ⟨x, bound⟩⟩
            a.const_reg(2, nat(bound));
            a.pair(0, 2, 0);
            a.const_reg(2, inner.clone());
            a.pair(2, 0, 0);
            a.bounded();
            a.halt();
            GoedelIndex(a.assemble().encode())
        };
        // Bound 1: inner needs 2 steps, test answers 0.
        assert_eq!(m.eval(&mk(1), &nat(5), 100), EvalOutcome::Halted(nat(0)));
        // Bound 10: halts in 2 steps, answer 1 + 2.
        assert_eq!(m.eval(&mk(10), &nat(5), 100), EvalOutcome::Halted(nat(3)));
    }

    #[test]
    fn fuel_monotonicity_sampled() {
        let m = Machine::new();
        for n in 0u64..300 {
            let i = GoedelIndex(nat(n * 13 + 7));
            let a = nat(n % 17);
            if let (EvalOutcome::Halted(v), s) = m.eval_counted(&i, &a, 100) {
                for extra in [1u64, 37, 1000] {
                    assert_eq!(
                        m.eval(&i, &a, 100 + extra),
                        EvalOutcome::Halted(v.clone()),
                        "index {n} not fuel-monotone"
                    );
                }
                assert!(s <= 100);
            }
        }
    }
}
