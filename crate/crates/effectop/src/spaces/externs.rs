//! Extern backends of a space: membership, strong inclusion, normed
//! enumerations, generating points, shrinking, limit algorithms and least
//! upper bounds. Each is a deterministic host function with exact cost
//! accounting; the space's machine-level programs are thin wrappers
//! around these slots.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::kernel::machine::StageResult;
use crate::kernel::pairing::{nat, pair, unpair};
use crate::kernel::program::{Inst, Program};
use crate::kernel::{Extern, ExternOutcome, HostFnExtern, Machine, MemoResult, StageFn};

use super::stage::{
    match_param_prog, param_prog, DriveOutcome, Probe, StageDriver, StageExtern,
};
use super::{Capabilities, Ctx, InstanceSem, Numbering, Semi, SeqKind, Space, SpaceSlots};

/// Program `[CallExtern(slot); Halt]`: the machine-level face of an extern.
pub fn ext_prog(slot: u16) -> BigUint {
    Program::new(vec![Inst::CallExtern(slot), Inst::Halt]).encode()
}

/// Drive the members of `W_e`: emissions of the inner enumerator for
/// `t`-form indices, the halting domain for raw indices.
pub struct WindexDriver<'m> {
    mach: &'m Machine,
    mode: WMode,
}

enum WMode {
    Enumerator(BigUint),
    Domain(BigUint),
}

impl<'m> WindexDriver<'m> {
    pub fn new(mach: &'m Machine, range_member: u16, e: &BigUint) -> Self {
        let mode = match match_param_prog(&mach.program(e)) {
            Some((slot, inner)) if slot == range_member => WMode::Enumerator(inner),
            _ => WMode::Domain(e.clone()),
        };
        WindexDriver { mach, mode }
    }

    /// Visit members of `W_e` (members may repeat) until accepted.
    pub fn drive<T>(
        &self,
        budget: u64,
        mut visit: impl FnMut(&BigUint) -> Option<T>,
    ) -> DriveOutcome<T> {
        match &self.mode {
            WMode::Enumerator(e) => {
                StageDriver::new(self.mach, e).drive(budget, |_k, probe| match probe {
                    Probe::Emit(m) => visit(&m),
                    Probe::Skip => None,
                })
            }
            WMode::Domain(e) => {
                let mut cost = 0u64;
                let mut cap = 64u64;
                loop {
                    for cand in 0..=cap {
                        let cand = nat(cand);
                        let c_inc = match self.mach.probe(e, &cand, cap) {
                            MemoResult::Halted { steps, .. } if steps <= cap => {
                                if let Some(result) = visit(&cand) {
                                    return DriveOutcome::Accepted {
                                        result,
                                        cost: cost.saturating_add(steps + 1),
                                    };
                                }
                                steps + 1
                            }
                            _ => cap,
                        };
                        cost = cost.saturating_add(c_inc);
                        if cost > budget {
                            return DriveOutcome::Exhausted;
                        }
                    }
                    cap = cap.saturating_mul(2);
                }
            }
        }
    }
}

/// Random access to stage `j` of `dom(φ_e)`; see [`WindexDriver`] for the
/// two index shapes.
pub fn windex_stage(
    mach: &Machine,
    range_member: u16,
    e: &BigUint,
    j: &BigUint,
    budget: u64,
) -> StageResult {
    if let Some((slot, inner)) = match_param_prog(&mach.program(e)) {
        if slot == range_member {
            if let Some((islot, c)) = match_param_prog(&mach.program(&inner)) {
                if let Some(ext) = mach.extern_at(islot) {
                    if let Some(stage) = ext.as_stage() {
                        return stage.stage(mach, &c, j, budget);
                    }
                }
            }
            // t over a raw enumerator: probe the enumerator's stage values.
            let (cand, cap_exp) = unpair(j);
            let cap = 1u64 << cap_exp.to_u64().unwrap_or(40).min(40);
            if cap >= budget {
                return StageResult::NeedsMore;
            }
            return match mach.probe(&inner, &cand, cap) {
                MemoResult::Halted { steps, value } if steps <= cap => {
                    match super::stage::parse_stage_value(&value) {
                        Some(n) => StageResult::Emit {
                            value: n,
                            cost: steps + 1,
                        },
                        None => StageResult::Skip { cost: steps + 1 },
                    }
                }
                _ => StageResult::Skip { cost: cap },
            };
        }
    }
    let (cand, cap_exp) = unpair(j);
    let cap = 1u64 << cap_exp.to_u64().unwrap_or(40).min(40);
    if cap >= budget {
        return StageResult::NeedsMore;
    }
    match mach.probe(e, &cand, cap) {
        MemoResult::Halted { steps, .. } if steps <= cap => StageResult::Emit {
            value: cand,
            cost: steps + 1,
        },
        _ => StageResult::Skip { cost: cap },
    }
}

/// Strong inclusion `⟨m, n⟩ ↦ m ≺_B n`, accepting with cost 1.
pub struct SiExtern {
    pub sem: Arc<dyn InstanceSem>,
}

impl Extern for SiExtern {
    fn call(&self, _mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (m, n) = unpair(input);
        if self.sem.si(&m, &n) && budget >= 1 {
            ExternOutcome::value(BigUint::one(), 1)
        } else {
            ExternOutcome::NeedsMore
        }
    }

    fn name(&self) -> &str {
        "strong-inclusion"
    }
}

/// Membership `⟨e, n⟩ ↦ x̄_e ∈ B_n`, semidecided as `∃m ∈ W_e. m ≺_B n`.
pub struct XbarMemExtern {
    pub sem: Arc<dyn InstanceSem>,
    pub range_member: u16,
}

impl Extern for XbarMemExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (e, n) = unpair(input);
        let driver = WindexDriver::new(mach, self.range_member, &e);
        match driver.drive(budget.saturating_sub(1), |m| {
            self.sem.si(m, &n).then(|| m.clone())
        }) {
            DriveOutcome::Accepted { result, cost } => ExternOutcome::value(result, cost + 1),
            DriveOutcome::Exhausted => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "xbar-membership"
    }
}

/// Exterior membership `⟨e, n⟩ ↦ x̄_e ∈ ext(B_n)`: some enumerated basic
/// open of the point is certified disjoint from `B_n`.
pub struct CoMemExtern {
    pub sem: Arc<dyn InstanceSem>,
    pub range_member: u16,
}

impl Extern for CoMemExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (e, n) = unpair(input);
        let driver = WindexDriver::new(mach, self.range_member, &e);
        match driver.drive(budget.saturating_sub(1), |m| {
            (self.sem.basis_disjoint(m, &n) == Some(true)).then(|| m.clone())
        }) {
            DriveOutcome::Accepted { result, cost } => ExternOutcome::value(result, cost + 1),
            DriveOutcome::Exhausted => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "co-membership"
    }
}

/// Canonical base enumeration stages, `⟨p, k⟩ ↦` stage `k` of the full
/// filter trace of point code `p`.
pub struct CanonStage {
    pub sem: Arc<dyn InstanceSem>,
}

impl StageFn for CanonStage {
    fn stage(&self, mach: &Machine, c: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        self.sem.canon_stage(mach, c, k, budget)
    }

    fn stage_name(&self) -> &str {
        "canon-base"
    }
}

/// Normed enumeration terms `⟨i, a⟩ ↦ φ_{q(i)}(a)`: the canonical shrinking
/// chain for canonical indices, a greedy ≺-refining chain through the
/// enumerated base otherwise.
pub struct NormedExtern {
    pub sem: Arc<dyn InstanceSem>,
    pub range_member: u16,
    pub canon_stage: u16,
}

impl NormedExtern {
    fn decode_canonical(&self, mach: &Machine, i: &BigUint) -> Option<BigUint> {
        let (slot, e) = match_param_prog(&mach.program(i))?;
        if slot != self.range_member {
            return None;
        }
        let (islot, code) = match_param_prog(&mach.program(&e))?;
        (islot == self.canon_stage && self.sem.code_valid(&code)).then_some(code)
    }
}

impl Extern for NormedExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (i, a) = unpair(input);
        if let Some(code) = self.decode_canonical(mach, &i) {
            return match self.sem.normed_stage(mach, &code, &a, budget) {
                StageResult::Emit { value, cost } => ExternOutcome::value(value, cost.max(1)),
                _ => ExternOutcome::NeedsMore,
            };
        }
        // Greedy interleaved chain: c_0 is the first enumerated member;
        // c_{j+1} is the first member below both c_j and the (j+1)-st
        // member, which exists by the strong-base property.
        let want = match a.to_u64() {
            Some(v) => v as usize,
            None => return ExternOutcome::NeedsMore,
        };
        let driver = WindexDriver::new(mach, self.range_member, &i);
        let mut emissions: Vec<BigUint> = Vec::new();
        let mut chain: Vec<BigUint> = Vec::new();
        let outcome = driver.drive(budget.saturating_sub(1), |m| {
            emissions.push(m.clone());
            loop {
                if chain.is_empty() {
                    chain.push(emissions[0].clone());
                    continue;
                }
                let j = chain.len();
                if j > want {
                    return Some(chain[want].clone());
                }
                if emissions.len() <= j {
                    return None;
                }
                let prev = chain[j - 1].clone();
                let pivot = emissions[j].clone();
                match emissions
                    .iter()
                    .find(|c| self.sem.si(c, &prev) && self.sem.si(c, &pivot))
                {
                    Some(next) => chain.push(next.clone()),
                    None => return None,
                }
            }
        });
        match outcome {
            DriveOutcome::Accepted { result, cost } => ExternOutcome::value(result, cost + 1),
            DriveOutcome::Exhausted => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "normed-enum"
    }
}

/// Domain test of the point numbering: accepts the canonical core.
pub struct DomTestExtern {
    pub sem: Arc<dyn InstanceSem>,
    pub range_member: u16,
    pub canon_stage: u16,
}

impl Extern for DomTestExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let inner = NormedExtern {
            sem: self.sem.clone(),
            range_member: self.range_member,
            canon_stage: self.canon_stage,
        };
        match inner.decode_canonical(mach, input) {
            Some(_) if budget >= 1 => ExternOutcome::value(BigUint::one(), 1),
            _ => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "domain-test"
    }
}

/// `pd(n)`: canonical index of the generating point of `B_n`.
pub struct PdExtern {
    pub sem: Arc<dyn InstanceSem>,
    pub range_member: u16,
    pub canon_stage: u16,
}

impl Extern for PdExtern {
    fn call(&self, _mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        match self.sem.pd_code(input) {
            Some(code) if budget >= 1 => {
                let cp = param_prog(self.range_member, &param_prog(self.canon_stage, &code));
                ExternOutcome::value(cp, 1)
            }
            _ => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "pd"
    }
}

/// Effective T₃ shrinking `⟨i, m⟩ ↦ a` with `x_i ∈ B_a`, `cl(B_a) ⊆ B_m`.
pub struct T3Extern {
    pub sem: Arc<dyn InstanceSem>,
    pub range_member: u16,
    pub canon_stage: u16,
}

impl Extern for T3Extern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (i, m) = unpair(input);
        let canonical = NormedExtern {
            sem: self.sem.clone(),
            range_member: self.range_member,
            canon_stage: self.canon_stage,
        }
        .decode_canonical(mach, &i);
        if let Some(code) = canonical {
            return match self.sem.t3_shrink_code(mach, &code, &m, budget) {
                StageResult::Emit { value, cost } => ExternOutcome::value(value, cost.max(1)),
                _ => ExternOutcome::NeedsMore,
            };
        }
        // In the metric strong inclusion, d ≺_B m certifies cl(B_d) ⊆ B_m.
        let driver = WindexDriver::new(mach, self.range_member, &i);
        match driver.drive(budget.saturating_sub(1), |d| {
            self.sem.si(d, &m).then(|| d.clone())
        }) {
            DriveOutcome::Accepted { result, cost } => ExternOutcome::value(result, cost + 1),
            DriveOutcome::Exhausted => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "t3-shrink"
    }
}

/// Limit-algorithm stages for monotone sequences over pointed spaces:
/// `W_{li(m)} = {n : ∃a. n ∈ W_{φ_m(a)}}`, enumerated as stage
/// `⟨a, j⟩ ↦` stage `j` of the `a`-th element's base.
pub struct LiT0Stage {
    pub range_member: u16,
}

impl StageFn for LiT0Stage {
    fn stage(&self, mach: &Machine, m: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        let (a, j) = unpair(k);
        let elt = match mach.probe(m, &a, budget.max(2) - 1) {
            MemoResult::Halted { steps, value } if steps < budget => (steps, value),
            _ => return StageResult::NeedsMore,
        };
        let (elt_steps, elt_idx) = elt;
        match windex_stage(mach, self.range_member, &elt_idx, &j, budget - elt_steps) {
            StageResult::Emit { value, cost } => StageResult::Emit {
                value,
                cost: cost + elt_steps + 1,
            },
            StageResult::Skip { cost } => StageResult::Skip {
                cost: cost + elt_steps + 1,
            },
            StageResult::NeedsMore => StageResult::NeedsMore,
        }
    }

    fn stage_name(&self) -> &str {
        "li-t0"
    }
}

/// Limit-algorithm stages for regular Cauchy sequences over metric spaces:
/// `W_{li(m)} = {⟨i, a-1⟩ : a > 0 ∧ (∃d ∈ W_{φ_m(a)}) d ≺_B ⟨i, a⟩}`.
/// Stage `⟨a', j⟩` inspects stage `j` of element `a'+1`'s base: an
/// enumerated ball `⟨i, n'⟩` with `n' > a` certifies `⟨i, n'⟩ ≺_B ⟨i, a⟩`
/// and contributes `⟨i, a'⟩`.
pub struct LiMetStage {
    pub range_member: u16,
}

impl StageFn for LiMetStage {
    fn stage(&self, mach: &Machine, m: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        let (a_prev, j) = unpair(k);
        let a = &a_prev + BigUint::one();
        let elt = match mach.probe(m, &a, budget.max(2) - 1) {
            MemoResult::Halted { steps, value } if steps < budget => (steps, value),
            _ => return StageResult::NeedsMore,
        };
        let (elt_steps, elt_idx) = elt;
        match windex_stage(mach, self.range_member, &elt_idx, &j, budget - elt_steps) {
            StageResult::Emit { value: d, cost } => {
                let (i, n_prime) = unpair(&d);
                if n_prime > a {
                    StageResult::Emit {
                        value: pair(&i, &a_prev),
                        cost: cost + elt_steps + 1,
                    }
                } else {
                    StageResult::Skip {
                        cost: cost + elt_steps + 1,
                    }
                }
            }
            StageResult::Skip { cost } => StageResult::Skip {
                cost: cost + elt_steps + 1,
            },
            StageResult::NeedsMore => StageResult::NeedsMore,
        }
    }

    fn stage_name(&self) -> &str {
        "li-metric"
    }
}

/// Least-upper-bound stages for constructive domains: the base of
/// `⊔ β(W_e)` is the union of the bases of the enumerated basis elements.
/// Stage `⟨w, j⟩` looks at probe `w` of `W_e` and stage `j` of that basis
/// element's generating point.
pub struct LubStage {
    pub sem: Arc<dyn InstanceSem>,
    pub range_member: u16,
}

impl StageFn for LubStage {
    fn stage(&self, mach: &Machine, e: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        let (w, j) = unpair(k);
        match windex_stage(mach, self.range_member, e, &w, budget) {
            StageResult::Emit { value: m, cost } => {
                let code = match self.sem.pd_code(&m) {
                    Some(c) => c,
                    None => return StageResult::Skip { cost: cost + 1 },
                };
                if cost >= budget {
                    return StageResult::NeedsMore;
                }
                match self.sem.canon_stage(mach, &code, &j, budget - cost) {
                    StageResult::Emit { value, cost: c2 } => StageResult::Emit {
                        value,
                        cost: cost + c2 + 1,
                    },
                    StageResult::Skip { cost: c2 } => StageResult::Skip {
                        cost: cost + c2 + 1,
                    },
                    StageResult::NeedsMore => StageResult::NeedsMore,
                }
            }
            StageResult::Skip { cost } => StageResult::Skip { cost: cost + 1 },
            StageResult::NeedsMore => StageResult::NeedsMore,
        }
    }

    fn stage_name(&self) -> &str {
        "lub"
    }
}

/// Backend of registered sequences: `⟨id, a⟩ ↦` point index of element `a`.
pub struct SeqValExtern {
    pub registry: Arc<super::SeqRegistry>,
}

impl Extern for SeqValExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (id, a) = unpair(input);
        let id = match id.to_u64() {
            Some(v) => v,
            None => return ExternOutcome::NeedsMore,
        };
        match self.registry.get(id) {
            Some(f) => match f(mach, &a, budget) {
                Some((idx, cost)) if cost <= budget => ExternOutcome::value(idx, cost.max(1)),
                _ => ExternOutcome::NeedsMore,
            },
            None => ExternOutcome::NeedsMore,
        }
    }

    fn name(&self) -> &str {
        "seq-val"
    }
}

/// Uniform convergence modules for sequences built from normed
/// enumerations: `⟨m, n⟩ ↦` the least `a' ≥ 1` with `φ_m(a'-1) ≺_B n`
/// (the first element of the associated enumerable set for this `(m, n)`).
pub struct ConvModExtern {
    pub sem: Arc<dyn InstanceSem>,
}

impl Extern for ConvModExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        let (m, n) = unpair(input);
        let mut cost = 0u64;
        let mut a = 1u64;
        loop {
            if cost >= budget {
                return ExternOutcome::NeedsMore;
            }
            match mach.probe(&m, &nat(a - 1), budget - cost) {
                MemoResult::Halted { steps, value } if steps <= budget - cost => {
                    cost += steps + 1;
                    if self.sem.si(&value, &n) {
                        return ExternOutcome::value(nat(a), cost.max(1));
                    }
                }
                _ => return ExternOutcome::NeedsMore,
            }
            a += 1;
        }
    }

    fn name(&self) -> &str {
        "conv-module"
    }
}

/// Assemble a space on a shared context: registers the extern suite and
/// wires the machine-level membership and strong-inclusion programs.
pub fn build_space(
    ctx: &Arc<Ctx>,
    sem: Arc<dyn InstanceSem>,
    caps: Capabilities,
    equality_budget: u64,
) -> Arc<Space> {
    let mach = &ctx.machine;
    let range_member = ctx.range_member;
    let enum_stage = ctx.enum_stage;

    let canon_stage = mach.register_extern(Arc::new(StageExtern {
        stage_fn: CanonStage { sem: sem.clone() },
    }));
    let si = mach.register_extern(Arc::new(SiExtern { sem: sem.clone() }));
    let xbar_mem = mach.register_extern(Arc::new(XbarMemExtern {
        sem: sem.clone(),
        range_member,
    }));
    let normed = mach.register_extern(Arc::new(NormedExtern {
        sem: sem.clone(),
        range_member,
        canon_stage,
    }));
    let dom_test = mach.register_extern(Arc::new(DomTestExtern {
        sem: sem.clone(),
        range_member,
        canon_stage,
    }));
    let t_build = mach.register_extern(HostFnExtern::new("t-build", move |_m, e| {
        param_prog(range_member, &param_prog(enum_stage, e))
    }));
    let normed_slot = normed;
    let q_build = mach.register_extern(HostFnExtern::new("q-build", move |_m, i| {
        param_prog(normed_slot, i)
    }));
    let cp_build = mach.register_extern(HostFnExtern::new("cp-build", move |_m, code| {
        param_prog(range_member, &param_prog(canon_stage, code))
    }));
    let seqs = Arc::new(super::SeqRegistry::default());
    let seq_val = mach.register_extern(Arc::new(SeqValExtern {
        registry: seqs.clone(),
    }));
    let conv_mod = mach.register_extern(Arc::new(ConvModExtern { sem: sem.clone() }));

    let mut slots = SpaceSlots {
        canon_stage,
        si,
        xbar_mem,
        normed,
        dom_test,
        t_build,
        q_build,
        cp_build,
        seq_val,
        conv_mod,
        ..SpaceSlots::default()
    };

    if caps.pointed {
        slots.pd = Some(mach.register_extern(Arc::new(PdExtern {
            sem: sem.clone(),
            range_member,
            canon_stage,
        })));
    }
    if caps.t3 {
        slots.t3 = Some(mach.register_extern(Arc::new(T3Extern {
            sem: sem.clone(),
            range_member,
            canon_stage,
        })));
    }
    if caps.co_computable {
        slots.co_mem = Some(mach.register_extern(Arc::new(CoMemExtern {
            sem: sem.clone(),
            range_member,
        })));
    }
    if caps.limit_algorithm {
        let li_stage = match sem.seq_kind() {
            SeqKind::MonotoneIncreasing => mach.register_extern(Arc::new(StageExtern {
                stage_fn: LiT0Stage { range_member },
            })),
            SeqKind::RegularCauchy => mach.register_extern(Arc::new(StageExtern {
                stage_fn: LiMetStage { range_member },
            })),
        };
        slots.li_stage = Some(li_stage);
        slots.li_build = Some(mach.register_extern(HostFnExtern::new(
            "li-build",
            move |_m, seq| param_prog(range_member, &param_prog(li_stage, seq)),
        )));
    }
    if matches!(sem.seq_kind(), SeqKind::MonotoneIncreasing) {
        let lub_stage = mach.register_extern(Arc::new(StageExtern {
            stage_fn: LubStage {
                sem: sem.clone(),
                range_member,
            },
        }));
        slots.lub_stage = Some(lub_stage);
        slots.lub_build = Some(mach.register_extern(HostFnExtern::new(
            "lub-build",
            move |_m, e| param_prog(range_member, &param_prog(lub_stage, e)),
        )));
    }

    let membership = ext_prog(xbar_mem);
    let strong_inclusion = ext_prog(si);
    let points = Numbering {
        label: format!("{}-points", sem.label()),
        domain_test: ext_prog(dom_test),
        equality_budget,
    };

    Arc::new(Space {
        label: sem.label().to_string(),
        ctx: ctx.clone(),
        points,
        membership,
        strong_inclusion,
        caps,
        slots,
        sem,
        seqs,
    })
}

/// Soundness helper used by several invariants: membership of a code via
/// the host predicate, independent of the machine pipeline.
pub fn host_code_membership(sp: &Space, code: &BigUint, n: &BigUint, budget: u64) -> Semi {
    sp.sem.code_membership(sp.machine(), code, n, budget)
}
