//! Effective T₀ spaces over the machine: numberings, membership, strong
//! inclusion, normed enumerations, limit passing and the specialization
//! order, all observed through fuel-bounded evaluation of machine programs.

pub mod externs;
pub mod ops;
pub mod stage;

use std::sync::Arc;

use num_bigint::BigUint;

use crate::kernel::machine::StageResult;
use crate::kernel::pairing::nat;
use crate::kernel::{standard_machine, GoedelIndex, Machine};

pub use ops::{
    acceptable_numbering, hull_refute, indistinguishable_at, is_member, limit_pass, normed_enum,
    reduce_verify, sb, spec_leq, AcceptableNumbering, HullVerdict, Obs, ReduceReport,
    SpecLeqVerdict,
};

/// Shared effective-topology context on one machine: the common template
/// externs plus the machine itself. Every space, map and sequence of a
/// scenario lives on one `Ctx`.
pub struct Ctx {
    pub machine: Arc<Machine>,
    /// Slot of the `t`-wrapper backend: `t(E) = param_prog(range_member, E)`.
    pub range_member: u16,
    /// Slot lifting plain total enumerations into stage form.
    pub enum_stage: u16,
}

impl Ctx {
    pub fn new() -> Arc<Ctx> {
        let machine = standard_machine();
        let range_member = machine.register_extern(Arc::new(stage::RangeMemberExtern));
        let enum_stage = machine.register_extern(Arc::new(stage::EnumStageExtern));
        Arc::new(Ctx {
            machine,
            range_member,
            enum_stage,
        })
    }

    /// W-index with domain = emission range of the stage enumerator `e`.
    pub fn t_form(&self, e: &BigUint) -> BigUint {
        stage::param_prog(self.range_member, e)
    }

    /// Inverse of [`Ctx::t_form`] on recognised indices.
    pub fn un_t_form(&self, idx: &BigUint) -> Option<BigUint> {
        let (slot, e) = stage::match_param_prog(&self.machine.program(idx))?;
        (slot == self.range_member).then_some(e)
    }

    /// Effective limit passing: wrap a plain normed enumeration index `m`
    /// into the point index `t(m)` whose enumerated base is `range(φ_m)`.
    pub fn limit_pass(&self, m: &BigUint) -> BigUint {
        self.t_form(&stage::param_prog(self.enum_stage, m))
    }
}

/// A (partial) numbering descriptor: a semidecision for its domain and the
/// separation budget used when comparing the points it names.
#[derive(Debug, Clone)]
pub struct Numbering {
    pub label: String,
    /// Program index semideciding membership in the numbering's domain
    /// (sound on the constructible core; domains are caller obligations).
    pub domain_test: BigUint,
    /// Number of basic opens consulted when comparing points at desk scale.
    pub equality_budget: u64,
}

/// Which canonical sequence family the instance declares.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeqKind {
    MonotoneIncreasing,
    RegularCauchy,
}

/// Optional capabilities of a space.
#[derive(Debug, Clone, Copy, Default)]
pub struct Capabilities {
    pub pointed: bool,
    pub t3: bool,
    pub co_computable: bool,
    pub dense: bool,
    pub limit_algorithm: bool,
    pub maximal_limits: bool,
}

/// Extern slots backing one space.
#[derive(Debug, Clone, Default)]
pub struct SpaceSlots {
    pub canon_stage: u16,
    pub si: u16,
    pub xbar_mem: u16,
    pub normed: u16,
    pub dom_test: u16,
    pub t_build: u16,
    pub q_build: u16,
    pub cp_build: u16,
    pub seq_val: u16,
    pub conv_mod: u16,
    pub pd: Option<u16>,
    pub t3: Option<u16>,
    pub co_mem: Option<u16>,
    pub li_stage: Option<u16>,
    pub li_build: Option<u16>,
    pub lub_stage: Option<u16>,
    pub lub_build: Option<u16>,
}

/// A registered sequence backend: argument ↦ (point index, cost), or not
/// within budget.
pub type SeqSpecFn =
    Arc<dyn Fn(&Machine, &BigUint, u64) -> Option<(BigUint, u64)> + Send + Sync>;

/// Append-only registry of constructed sequences of one space.
#[derive(Default)]
pub struct SeqRegistry {
    specs: std::sync::RwLock<Vec<SeqSpecFn>>,
}

impl SeqRegistry {
    pub fn push(&self, f: SeqSpecFn) -> u64 {
        let mut specs = self.specs.write().expect("seq registry poisoned");
        specs.push(f);
        (specs.len() - 1) as u64
    }

    pub fn get(&self, id: u64) -> Option<SeqSpecFn> {
        self.specs
            .read()
            .expect("seq registry poisoned")
            .get(id as usize)
            .cloned()
    }
}

/// Semidecision outcome of an instance-level predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semi {
    Accept { cost: u64 },
    /// Certified refutation (instance decision capability).
    Reject,
    /// Not within this budget.
    NeedsMore,
}

/// Host-level semantics of a bundled instance: the exact predicates and
/// enumerations its externs are built from.
pub trait InstanceSem: Send + Sync {
    fn label(&self) -> &str;

    /// Strong inclusion `m ≺_B n`, decided exactly.
    fn si(&self, m: &BigUint, n: &BigUint) -> bool;

    /// Point-code membership `x_p ∈ B_n`. `Reject` must be sound; instances
    /// without a decision capability answer `NeedsMore` instead.
    fn code_membership(&self, mach: &Machine, p: &BigUint, n: &BigUint, budget: u64) -> Semi;

    /// Stage `k` of the canonical base enumeration of point code `p`; its
    /// emission range must be the full filter trace `{n : x_p ∈ B_n}`.
    fn canon_stage(&self, mach: &Machine, p: &BigUint, k: &BigUint, budget: u64) -> StageResult;

    /// Deterministic basis-index search order (a total surjection onto the
    /// basis indices, reaching fine refinements at small ranks).
    fn basis_candidate(&self, rank: u64) -> BigUint;

    /// Certificate that `B_m` and `B_n` are disjoint.
    fn basis_disjoint(&self, _m: &BigUint, _n: &BigUint) -> Option<bool> {
        None
    }

    /// Decide `B_m ⊆ B_n` at the instance level (used by map data).
    fn basis_subset(&self, _m: &BigUint, _n: &BigUint) -> Option<bool> {
        None
    }

    /// `k`-th element of `{a : n ≺_B a}` (the sets intersected by the hull).
    fn hull_envelope(&self, n: &BigUint, k: u64) -> Option<BigUint>;

    /// Code of the generating point of `B_n` (effectively pointed).
    fn pd_code(&self, _n: &BigUint) -> Option<BigUint> {
        None
    }

    /// Code of the `k`-th dense point (recursively separable).
    fn dense_code(&self, _k: u64) -> Option<BigUint> {
        None
    }

    /// `a`-th term of the canonical normed enumeration converging to `x_p`;
    /// emits a basis index.
    fn normed_stage(&self, mach: &Machine, p: &BigUint, a: &BigUint, budget: u64) -> StageResult;

    /// Basis index `b` with `x_p ∈ B_b` and `cl(B_b) ⊆ B_m`, given
    /// `x_p ∈ B_m` (effectively T₃ instances); emits a basis index.
    fn t3_shrink_code(
        &self,
        _mach: &Machine,
        _p: &BigUint,
        _m: &BigUint,
        _budget: u64,
    ) -> StageResult {
        StageResult::NeedsMore
    }

    fn code_valid(&self, p: &BigUint) -> bool;

    fn seq_kind(&self) -> SeqKind;

    /// All basis indices up to the instance's natural period, for
    /// exhaustive sweeps on finite instances.
    fn finite_basis(&self) -> Option<Vec<BigUint>> {
        None
    }

    /// All point codes of a finite instance.
    fn finite_codes(&self) -> Option<Vec<BigUint>> {
        None
    }
}

/// A completely enumerable subset of a space: a W-index accepting exactly
/// the point indices whose points belong to the set.
#[derive(Debug, Clone)]
pub struct CeSet {
    pub acceptor: BigUint,
    pub label: String,
}

impl CeSet {
    /// The basic open `B_n` as a completely enumerable set.
    pub fn basic_open(sp: &Space, n: &BigUint) -> CeSet {
        let mut a = crate::kernel::Asm::new();
        a.const_reg(1, n.clone());
        a.pair(0, 1, 0); // ⟨i, n⟩
        a.const_reg(1, sp.membership.clone());
        a.pair(1, 0, 0);
        a.universal();
        a.halt();
        CeSet {
            acceptor: a.assemble().encode(),
            label: format!("{}∈B_{}", sp.label, n),
        }
    }

    /// Preimage under an effective map given by its tracker index.
    pub fn preimage(tracker: &BigUint, inner: &CeSet, label: impl Into<String>) -> CeSet {
        let mut a = crate::kernel::Asm::new();
        a.const_reg(1, tracker.clone());
        a.pair(1, 0, 0);
        a.universal(); // f(i)
        a.const_reg(1, inner.acceptor.clone());
        a.pair(1, 0, 0);
        a.universal();
        a.halt();
        CeSet {
            acceptor: a.assemble().encode(),
            label: label.into(),
        }
    }

    /// Fuel-bounded acceptance observation on a point index.
    pub fn accepts(&self, sp: &Space, i: &BigUint, fuel: u64) -> bool {
        sp.machine()
            .eval(&GoedelIndex(self.acceptor.clone()), i, fuel)
            .is_halted()
    }
}

/// An effective space bundled with its machine-level surface.
pub struct Space {
    pub label: String,
    pub ctx: Arc<Ctx>,
    pub points: Numbering,
    /// Program index semideciding `L = {⟨i, n⟩ : x_i ∈ B_n}`.
    pub membership: BigUint,
    /// Program index semideciding `m ≺_B n`.
    pub strong_inclusion: BigUint,
    pub caps: Capabilities,
    pub slots: SpaceSlots,
    pub sem: Arc<dyn InstanceSem>,
    pub seqs: Arc<SeqRegistry>,
}

impl Space {
    pub fn machine(&self) -> &Machine {
        &self.ctx.machine
    }

    /// Register a constructed sequence; the returned index is a total
    /// program mapping positions to point indices.
    pub fn register_seq(&self, f: SeqSpecFn) -> GoedelIndex {
        let id = self.seqs.push(f);
        GoedelIndex(stage::param_prog(self.slots.seq_val, &nat(id)))
    }

    /// Evaluate a sequence program at a position.
    pub fn seq_at(&self, m: &BigUint, a: u64, fuel: u64) -> Option<BigUint> {
        self.machine()
            .eval(&GoedelIndex(m.clone()), &nat(a), fuel)
            .halted_value()
            .cloned()
    }

    /// Canonical point index of an instance point code.
    pub fn cp(&self, code: &BigUint) -> BigUint {
        self.ctx
            .t_form(&stage::param_prog(self.slots.canon_stage, code))
    }

    /// Recover the point code of a canonical index.
    pub fn decode_canonical(&self, idx: &BigUint) -> Option<BigUint> {
        let e = self.ctx.un_t_form(idx)?;
        let (slot, code) = stage::match_param_prog(&self.machine().program(&e))?;
        (slot == self.slots.canon_stage && self.sem.code_valid(&code)).then_some(code)
    }

    /// Fuel-bounded membership observation through the machine-level L.
    pub fn member_obs(&self, i: &BigUint, n: &BigUint, fuel: u64) -> Obs {
        ops::is_member(self, i, n, fuel)
    }

    /// Exterior observation (co-computable spaces).
    pub fn co_obs(&self, i: &BigUint, n: &BigUint, fuel: u64) -> Obs {
        match self.slots.co_mem {
            Some(_) => {
                let co = self
                    .caps
                    .co_computable
                    .then(|| self.co_membership_prog())
                    .expect("co_mem slot implies capability");
                match self.machine().eval(
                    &GoedelIndex(co),
                    &crate::kernel::pair(i, n),
                    fuel,
                ) {
                    crate::kernel::EvalOutcome::Halted(_) => Obs::Observed,
                    crate::kernel::EvalOutcome::TimedOut(_) => Obs::Unknown,
                }
            }
            None => Obs::Unknown,
        }
    }

    /// Program index of the exterior semidecision.
    pub fn co_membership_prog(&self) -> BigUint {
        let slot = self.slots.co_mem.expect("space is not co-computable");
        externs::ext_prog(slot)
    }

    /// Limit algorithm: `li(m)` for a sequence index `m`.
    pub fn li_index(&self, m: &BigUint) -> Option<BigUint> {
        let slot = self.slots.li_stage?;
        Some(self.ctx.t_form(&stage::param_prog(slot, m)))
    }

    /// Program index computing `li`.
    pub fn li_prog(&self) -> Option<BigUint> {
        self.slots.li_build.map(externs::ext_prog)
    }

    /// `pd(n)`: canonical index of the generating point of `B_n`.
    pub fn pd_index(&self, n: &BigUint) -> Option<BigUint> {
        self.sem.pd_code(n).map(|c| self.cp(&c))
    }

    /// Program index computing `pd`.
    pub fn pd_prog(&self) -> Option<BigUint> {
        self.slots.pd.map(externs::ext_prog)
    }

    /// `lub(e)`: point index of the least upper bound of `β(W_e)`.
    pub fn lub_index(&self, e: &BigUint) -> Option<BigUint> {
        let slot = self.slots.lub_stage?;
        Some(self.ctx.t_form(&stage::param_prog(slot, e)))
    }

    /// Canonical index of the `k`-th dense point, when separable.
    pub fn dense_index(&self, k: u64) -> Option<BigUint> {
        self.sem.dense_code(k).map(|c| self.cp(&c))
    }

    /// Host-level strong inclusion (the same predicate the extern runs).
    pub fn si_host(&self, m: &BigUint, n: &BigUint) -> bool {
        self.sem.si(m, n)
    }

    /// Certified non-membership: canonical decision or exterior observation.
    pub fn certified_not(&self, i: &BigUint, n: &BigUint, fuel: u64) -> bool {
        if let Some(code) = self.decode_canonical(i) {
            if let Semi::Reject = self.sem.code_membership(self.machine(), &code, n, fuel) {
                return true;
            }
        }
        matches!(self.co_obs(i, n, fuel), Obs::Observed)
    }
}
