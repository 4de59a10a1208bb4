//! Continuity conversions and the convergence-module extractors.
//!
//! The two extractors build, through the recursion theorem, a sequence
//! that follows its input while watching for evidence about the limit's
//! image, freezing or advancing accordingly. All set-membership tests
//! inside the constructed programs are fuel-indexed halting tests on
//! machine indices, which is why the trackers, memberships and limit
//! algorithms all live in the extern table rather than in host closures.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::kernel::externs::slots;
use crate::kernel::machine::StageResult;
use crate::kernel::pairing::{nat, pair, unpair};
use crate::kernel::program::param_prog;
use crate::kernel::{
    fixpoint_index, Asm, GoedelIndex, HostFnExtern, Machine, MemoResult,
};
use crate::seqlim::seq_from_enum;
use crate::spaces::stage::match_param_prog;
use crate::spaces::{is_member, Obs, SeqKind, Space};
use thiserror::Error;

use super::{EffectiveMap, Enumerator, NoninclusionWitness, PointwiseCert};

#[derive(Debug, Error)]
pub enum ExtractError {
    #[error("missing capability: {0}")]
    MissingCapability(&'static str),
    #[error("no acceptance within fuel {fuel}: off contract or underfueled")]
    OffContract { fuel: u64 },
}

/// A validated stage cutoff together with the artifacts that produced it.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub value: u64,
    /// Index of the self-referential sequence `b(n)`.
    pub b: BigUint,
    /// Limit index of `b(n)`.
    pub li_b: BigUint,
}

/// Bound given to the in-model μ-searches; the caller's fuel is the real
/// ceiling.
const HUGE_BOUND: u64 = u64::MAX / 4;

fn li_build_slot(sp: &Space) -> Result<u16, ExtractError> {
    sp.slots
        .li_stage
        .and(sp.slots.li_build)
        .ok_or(ExtractError::MissingCapability("limit algorithm"))
}

/// Per-map extern suite for the extractors, registered once.
pub(crate) struct ExtractSlots {
    pub tau72: Option<u16>,
    pub k_build: Option<u16>,
    pub tau74: Option<u16>,
}

impl EffectiveMap {
    pub(super) fn extract_slots(&self) -> &ExtractSlots {
        self.extract.get_or_init(|| {
            let mach = self.machine();
            let vn = {
                let this = self.clone_handles();
                mach.register_extern(HostFnExtern::new(
                    format!("{}-vn", self.label),
                    move |_m, n| this.v_index_from(n),
                ))
            };
            let delaying = self.dom.sem.seq_kind() == SeqKind::MonotoneIncreasing;
            let (tau72, k_build) = if self.dom.slots.li_build.is_some() && delaying {
                let li_prog = self.dom.li_prog().expect("li checked");
                let this = self.clone_handles();
                let tau72 = mach.register_extern(HostFnExtern::new(
                    format!("{}-tau72", self.label),
                    move |_m, input| {
                        let (mn, b_bar) = unpair(input);
                        let (m, n) = unpair(&mn);
                        tau72_text(&this.v_index_from(&n), &li_prog, &m, &b_bar)
                    },
                ));
                let li_build = self.dom.slots.li_build.expect("li checked");
                let vn_slot = vn;
                let k_build = mach.register_extern(HostFnExtern::new(
                    format!("{}-kbuild", self.label),
                    move |_m, seq| k72_text(seq, tau72, vn_slot, li_build),
                ));
                (Some(tau72), Some(k_build))
            } else {
                (None, None)
            };
            let (tau74, w_build) = if self.cod.caps.t3 && self.cod.caps.co_computable {
                let this = self.clone_handles();
                let w_build = mach.register_extern(HostFnExtern::new(
                    format!("{}-wbuild", self.label),
                    move |_m, input| {
                        let (i, n) = unpair(input);
                        this.w_index_from(&i, &n)
                    },
                ));
                let tau74 = self.dom.li_prog().map(|_li| {
                    let this = self.clone_handles();
                    mach.register_extern(HostFnExtern::new(
                        format!("{}-tau74", self.label),
                        move |_m, input| {
                            let (mn, b_bar) = unpair(input);
                            let (m, n) = unpair(&mn);
                            tau74_text(
                                &this.v_index_from(&n),
                                &this.li_prog,
                                w_build,
                                &m,
                                &n,
                                &b_bar,
                            )
                        },
                    ))
                });
                (tau74, Some(w_build))
            } else {
                (None, None)
            };
            let _ = (vn, w_build);
            ExtractSlots {
                tau72,
                k_build,
                tau74,
            }
        })
    }
}

/// Follow-or-freeze program of the delaying extractor. On input `a` it
/// reruns the first `a` stages: while the limit's image has not been seen
/// in the target within the stage bound, follow the input sequence; after
/// that, advance only past elements whose own image has been seen.
fn tau72_text(v_n: &BigUint, li_prog: &BigUint, t_seq: &BigUint, b_bar: &BigUint) -> BigUint {
    let mut a = Asm::new();
    let loop_top = a.fresh_label();
    let done = a.fresh_label();
    let adv = a.fresh_label();
    let stay = a.fresh_label();
    a.copy(0, 3); // position a
    a.const_reg(4, v_n.clone());
    a.const_reg(5, li_prog.clone());
    a.const_reg(6, b_bar.clone());
    a.const_reg(7, t_seq.clone());
    a.pair(5, 6, 0);
    a.universal();
    a.copy(0, 9); // li(b̄)
    a.const_u64(11, 1); // stage bound s+1
    a.copy(3, 12); // remaining stages
    a.bind(loop_top);
    a.dec_jz(12, done);
    a.call_bounded(4, 9, 11, 1); // φ_{v(n)}(li(b̄))↓_{s+1}?
    a.jz(0, 2, adv);
    a.pair(7, 10, 0);
    a.universal();
    a.copy(0, 13); // current element t(u)
    a.call_bounded(4, 13, 11, 1); // φ_{v(n)}(t(u))↓_{s+1}?
    a.jz(0, 2, stay);
    a.bind(adv);
    a.inc(10);
    a.bind(stay);
    a.inc(11);
    a.jmp(loop_top);
    a.bind(done);
    a.pair(7, 10, 0);
    a.universal();
    a.halt();
    a.assemble().encode()
}

/// Race variant for T₃ codomains: when the limit's image has been seen,
/// each element is raced between acceptance in the target and acceptance
/// in the exterior of the shrunken target, preferring whichever halts in
/// fewer steps.
fn tau74_text(
    v_n: &BigUint,
    li_prog: &BigUint,
    w_build: u16,
    t_seq: &BigUint,
    n: &BigUint,
    b_bar: &BigUint,
) -> BigUint {
    let mut a = Asm::new();
    let loop_top = a.fresh_label();
    let done = a.fresh_label();
    let adv = a.fresh_label();
    let stay = a.fresh_label();
    let race = a.fresh_label();
    let chk2 = a.fresh_label();
    a.copy(0, 3);
    a.const_reg(4, v_n.clone());
    a.const_reg(5, li_prog.clone());
    a.const_reg(6, b_bar.clone());
    a.const_reg(7, t_seq.clone());
    a.const_reg(14, n.clone());
    a.pair(5, 6, 0);
    a.universal();
    a.copy(0, 9); // li(b̄)
    a.pair(9, 14, 0);
    a.ext(w_build);
    a.copy(0, 8); // w(li(b̄), n)
    a.const_u64(11, 1);
    a.copy(3, 12);
    a.bind(loop_top);
    a.dec_jz(12, done);
    a.call_bounded(4, 9, 11, 1);
    a.jz(0, 2, adv);
    a.pair(7, 10, 0);
    a.universal();
    a.copy(0, 13); // element
    a.const_u64(15, 1); // race bound c
    a.bind(race);
    a.call_bounded(4, 13, 15, 1);
    a.copy(0, 16); // in-target probe
    a.call_bounded(8, 13, 15, 1);
    a.copy(0, 17); // exterior probe
    a.jz(16, 2, chk2);
    a.jz(17, 2, adv); // only the target fired
    a.pair(16, 17, 0);
    a.ext(slots::LE);
    a.jnz(0, 2, adv); // target no slower: prefer it
    a.jmp(stay); // exterior strictly faster
    a.bind(chk2);
    a.jnz(17, 2, stay); // only the exterior fired
    // Neither fired within c: double the race bound. The winner is
    // unchanged: bounded tests report exact step counts, so whichever
    // fires first at the deciding cap also wins the exact comparison.
    a.pair(15, 15, 0);
    a.ext(slots::ADD);
    a.copy(0, 15);
    a.jmp(race);
    a.bind(adv);
    a.inc(10);
    a.bind(stay);
    a.inc(11);
    a.jmp(loop_top);
    a.bind(done);
    a.pair(7, 10, 0);
    a.universal();
    a.halt();
    a.assemble().encode()
}

/// The in-model module program of a sequence: on a basis index, build the
/// extractor's fixpoint for that target and return the step count at which
/// the limit's image is accepted.
fn k72_text(seq: &BigUint, tau72: u16, vn_slot: u16, li_build: u16) -> BigUint {
    let mut a = Asm::new();
    let spin = a.fresh_label();
    let out = a.fresh_label();
    a.copy(0, 4); // n
    a.const_reg(1, seq.clone());
    a.pair(1, 4, 0); // ⟨m, n⟩
    a.const_u64(1, tau72 as u64);
    a.pair(1, 0, 0);
    a.ext(slots::PARAM); // transformer index
    a.ext(slots::FIX); // b(n)
    a.ext(li_build); // li(b(n))
    a.copy(0, 6);
    a.copy(4, 0);
    a.ext(vn_slot);
    a.copy(0, 7); // v(n)
    a.const_u64(8, HUGE_BOUND);
    a.call_bounded(7, 6, 8, 1);
    a.jz(0, 2, spin);
    a.dec_jz(0, out); // 1 + steps ↦ steps
    a.bind(out);
    a.halt();
    a.bind(spin);
    a.jmp(spin);
    a.assemble().encode()
}

impl EffectiveMap {
    fn clone_handles(&self) -> MapHandles {
        MapHandles {
            tracker_slot: self.slots.tracker,
            cod_membership: self.cod.membership.clone(),
            cod_t3: self.cod.slots.t3,
            cod_co: self.cod.slots.co_mem,
            li_prog: self.dom.li_prog().unwrap_or_default(),
        }
    }
}

/// The pieces of a map needed to build `v(n)` and `w(i, n)` texts inside
/// externs without holding the whole map.
struct MapHandles {
    tracker_slot: u16,
    cod_membership: BigUint,
    cod_t3: Option<u16>,
    cod_co: Option<u16>,
    li_prog: BigUint,
}

impl MapHandles {
    fn v_index_from(&self, n: &BigUint) -> BigUint {
        let mut a = Asm::new();
        a.ext(self.tracker_slot);
        a.const_reg(1, n.clone());
        a.pair(0, 1, 0);
        a.const_reg(1, self.cod_membership.clone());
        a.pair(1, 0, 0);
        a.universal();
        a.halt();
        a.assemble().encode()
    }

    fn w_index_from(&self, i: &BigUint, n: &BigUint) -> BigUint {
        let t3 = self.cod_t3.expect("T3 codomain");
        let co = self.cod_co.expect("co-computable codomain");
        let mut a = Asm::new();
        a.ext(self.tracker_slot);
        a.copy(0, 9);
        a.const_reg(0, i.clone());
        a.ext(self.tracker_slot);
        a.const_reg(1, n.clone());
        a.pair(0, 1, 0);
        a.ext(t3);
        a.copy(0, 5);
        a.pair(9, 5, 0);
        a.const_reg(1, crate::spaces::externs::ext_prog(co));
        a.pair(1, 0, 0);
        a.universal();
        a.halt();
        a.assemble().encode()
    }
}

/// The delaying extractor: a convergence module for `(F(y_a))_a` from the
/// wait-and-see fixpoint, valid whenever `F`(limit) lies in the target.
pub fn seqcont_module_delaying(
    map: &EffectiveMap,
    m: &BigUint,
    n: &BigUint,
    fuel: u64,
) -> Result<Cutoff, ExtractError> {
    if map.dom.sem.seq_kind() != SeqKind::MonotoneIncreasing {
        return Err(ExtractError::MissingCapability("delaying sequence family"));
    }
    let slots_x = map.extract_slots();
    let tau72 = slots_x
        .tau72
        .ok_or(ExtractError::MissingCapability("limit algorithm"))?;
    li_build_slot(&map.dom)?;
    let tau = param_prog(tau72, &pair(m, n));
    let b = fixpoint_index(&tau);
    let li_b = map
        .dom
        .li_index(&b)
        .ok_or(ExtractError::MissingCapability("limit algorithm"))?;
    let v_n = map.v_index(n);
    cutoff_from_acceptance(map.machine(), &v_n, &li_b, b, li_b.clone(), fuel)
}

/// The T₃ extractor: the same skeleton with the wait-and-see step replaced
/// by the in-target versus exterior race.
pub fn seqcont_module_t3(
    map: &EffectiveMap,
    m: &BigUint,
    n: &BigUint,
    fuel: u64,
) -> Result<Cutoff, ExtractError> {
    let slots_x = map.extract_slots();
    let tau74 = slots_x
        .tau74
        .ok_or(ExtractError::MissingCapability("T3 + co-computable codomain"))?;
    li_build_slot(&map.dom)?;
    let tau = param_prog(tau74, &pair(m, n));
    let b = fixpoint_index(&tau);
    let li_b = map
        .dom
        .li_index(&b)
        .ok_or(ExtractError::MissingCapability("limit algorithm"))?;
    let v_n = map.v_index(n);
    cutoff_from_acceptance(map.machine(), &v_n, &li_b, b, li_b.clone(), fuel)
}

fn cutoff_from_acceptance(
    mach: &Machine,
    v_n: &BigUint,
    probe_on: &BigUint,
    b: BigUint,
    li_b: BigUint,
    fuel: u64,
) -> Result<Cutoff, ExtractError> {
    match mach.probe(v_n, probe_on, fuel) {
        MemoResult::Halted { steps, .. } if steps <= fuel => Ok(Cutoff {
            value: steps,
            b,
            li_b,
        }),
        _ => Err(ExtractError::OffContract { fuel }),
    }
}

/// The in-model strong sequential-continuity witness `k'`: a total program
/// sending a sequence index to its module program, built from the delaying
/// extractor.
pub fn kprime_delaying(map: &EffectiveMap) -> Result<BigUint, ExtractError> {
    let slots_x = map.extract_slots();
    let k_build = slots_x
        .k_build
        .ok_or(ExtractError::MissingCapability("delaying extractor"))?;
    Ok(crate::spaces::externs::ext_prog(k_build))
}

/// Tail validation: check `F(y_a) ∈ B'_n` observed for `count` positions
/// from the cutoff on; returns the violating positions.
pub fn validate_tail(
    map: &EffectiveMap,
    m: &BigUint,
    n: &BigUint,
    cutoff: u64,
    count: u64,
    fuel: u64,
) -> Vec<u64> {
    let v_n = map.v_index(n);
    let mut bad = Vec::new();
    for a in cutoff..cutoff.saturating_add(count) {
        let ok = map
            .dom
            .seq_at(m, a, fuel)
            .map(|elt| {
                matches!(
                    map.machine().probe(&v_n, &elt, fuel),
                    MemoResult::Halted { steps, .. } if steps <= fuel
                )
            })
            .unwrap_or(false);
        if !ok {
            bad.push(a);
        }
    }
    bad
}

/// Race liveness of the T₃ extractor: past the cutoff, one of the two
/// semidecisions fires for every checked element within the fuel.
pub fn race_liveness(
    map: &EffectiveMap,
    m: &BigUint,
    n: &BigUint,
    li_b: &BigUint,
    from: u64,
    count: u64,
    fuel: u64,
) -> bool {
    let v_n = map.v_index(n);
    let w = map.w_index(li_b, n);
    (from..from + count).all(|a| {
        map.dom
            .seq_at(m, a, fuel)
            .map(|elt| {
                let hit_v = matches!(
                    map.machine().probe(&v_n, &elt, fuel),
                    MemoResult::Halted { steps, .. } if steps <= fuel
                );
                let hit_w = matches!(
                    map.machine().probe(&w, &elt, fuel),
                    MemoResult::Halted { steps, .. } if steps <= fuel
                );
                hit_v || hit_w
            })
            .unwrap_or(false)
    })
}

/// Random access to stage `k` of a stage enumerator index.
fn stage_at(mach: &Machine, e: &BigUint, k: &BigUint, cap: u64) -> StageResult {
    if let Some((slot, c)) = match_param_prog(&mach.program(e)) {
        if let Some(ext) = mach.extern_at(slot) {
            if let Some(stage) = ext.as_stage() {
                return stage.stage(mach, &c, k, cap);
            }
        }
    }
    match mach.probe(e, k, cap) {
        MemoResult::Halted { steps, value } if steps <= cap => {
            match crate::spaces::stage::parse_stage_value(&value) {
                Some(n) => StageResult::Emit {
                    value: n,
                    cost: steps + 1,
                },
                None => StageResult::Skip { cost: steps + 1 },
            }
        }
        _ => StageResult::Skip { cost: cap },
    }
}

/// Effectively continuous ⟹ effectively pointwise continuous: dovetail the
/// covering enumeration of the target against the point's memberships.
pub fn ptcont_from_cont(map: &EffectiveMap, g: &Enumerator) -> PointwiseCert {
    let dom = map.dom.clone();
    let g = g.clone();
    PointwiseCert {
        label: format!("{}-ptwise", map.label),
        query: Arc::new(move |i, n, fuel| {
            let e_n = (g.build)(n);
            let probes = fuel.min(20_000);
            for t in 0..probes {
                let (k, s_exp) = unpair(&nat(t));
                let cap = 64u64 << s_exp.to_u64().unwrap_or(16).min(16);
                if let StageResult::Emit { value: a, .. } =
                    stage_at(dom.machine(), &e_n, &k, cap)
                {
                    if is_member(&dom, i, &a, cap) == Obs::Observed {
                        return Some(a);
                    }
                }
            }
            None
        }),
    }
}

/// Effective + effectively pointwise continuous ⟹ effectively continuous
/// on recursively separable domains: enumerate certificates over the dense
/// points seen inside the preimage.
pub fn cont_from_ptcont(
    map: &EffectiveMap,
    h: &PointwiseCert,
) -> Result<Enumerator, ExtractError> {
    if !map.dom.caps.dense {
        return Err(ExtractError::MissingCapability("recursively separable domain"));
    }
    let dom = map.dom.clone();
    let cod = map.cod.clone();
    let tracker = map.tracker.clone();
    let h = h.clone();
    let mach = map.machine();
    let slot = mach.register_extern(HostFnExtern::new(
        format!("{}-g67", map.label),
        move |m, input| {
            let (n, k) = unpair(input);
            let (d, s_exp) = unpair(&k);
            let fuel = 64u64 << s_exp.to_u64().unwrap_or(14).min(14);
            let out = (|| {
                let d = d.to_u64()?;
                let z = dom.cp(&dom.sem.dense_code(d)?);
                let fz = m
                    .eval(&GoedelIndex(tracker.clone()), &z, fuel)
                    .halted_value()
                    .cloned()?;
                if is_member(&cod, &fz, &n, fuel) != Obs::Observed {
                    return None;
                }
                (h.query)(&z, &n, fuel)
            })();
            match out {
                Some(a) => crate::spaces::stage::stage_emit(&a),
                None => crate::spaces::stage::stage_skip(),
            }
        },
    ));
    // Present the host function as a stage backend.
    struct G67Stage {
        slot: u16,
    }
    impl crate::kernel::StageFn for G67Stage {
        fn stage(&self, mach: &Machine, c: &BigUint, k: &BigUint, budget: u64) -> StageResult {
            if budget < 2 {
                return StageResult::NeedsMore;
            }
            match mach.extern_at(self.slot).expect("registered").call(
                mach,
                &pair(c, k),
                budget - 1,
            ) {
                crate::kernel::ExternOutcome::Value { value, cost } => {
                    match crate::spaces::stage::parse_stage_value(&value) {
                        Some(n) => StageResult::Emit {
                            value: n,
                            cost: cost + 1,
                        },
                        None => StageResult::Skip { cost: cost + 1 },
                    }
                }
                crate::kernel::ExternOutcome::NeedsMore => StageResult::NeedsMore,
            }
        }
        fn stage_name(&self) -> &str {
            "g67"
        }
    }
    let stage_slot = mach.register_extern(Arc::new(crate::spaces::stage::StageExtern {
        stage_fn: G67Stage { slot },
    }));
    Ok(Enumerator {
        label: format!("{}-cont", map.label),
        build: Arc::new(move |n| param_prog(stage_slot, n)),
    })
}

/// Effectively continuous ⟹ effective: the tracker produces, for each
/// input, the pullback of its filter through the covering enumerations,
/// normed by the greedy chain, and passes it through the codomain's limit
/// operator.
pub fn effective_from_cont(
    dom: &Arc<Space>,
    cod: &Arc<Space>,
    g: &Enumerator,
) -> BigUint {
    let mach = dom.machine();
    let dom_c = dom.clone();
    let g = g.clone();
    let stage_slot = {
        struct E68Stage {
            dom: Arc<Space>,
            cod: Arc<Space>,
            g: Enumerator,
        }
        impl crate::kernel::StageFn for E68Stage {
            fn stage(
                &self,
                mach: &Machine,
                i: &BigUint,
                k: &BigUint,
                budget: u64,
            ) -> StageResult {
                // Stage ⟨rank, ⟨j, sExp⟩⟩: candidate target n' at that
                // rank, cover stage j of g(n'), membership probed with a
                // geometric cap.
                let (rank, rest) = unpair(k);
                let (j, s_exp) = unpair(&rest);
                let rank = match rank.to_u64() {
                    Some(r) => r,
                    None => return StageResult::Skip { cost: 1 },
                };
                let n_prime = self.cod.sem.basis_candidate(rank);
                let cap = (64u64 << s_exp.to_u64().unwrap_or(16).min(16)).min(budget.max(2) - 1);
                let e = (self.g.build)(&n_prime);
                match stage_at(mach, &e, &j, cap) {
                    StageResult::Emit { value: a, cost } => {
                        let cost = cost.saturating_add(cap).saturating_add(1);
                        if cost > budget {
                            return StageResult::NeedsMore;
                        }
                        if is_member(&self.dom, i, &a, cap) == Obs::Observed {
                            StageResult::Emit {
                                value: n_prime,
                                cost,
                            }
                        } else {
                            StageResult::Skip { cost }
                        }
                    }
                    StageResult::Skip { cost } => StageResult::Skip {
                        cost: cost.saturating_add(1),
                    },
                    StageResult::NeedsMore => StageResult::NeedsMore,
                }
            }
            fn stage_name(&self) -> &str {
                "pullback"
            }
        }
        mach.register_extern(Arc::new(crate::spaces::stage::StageExtern {
            stage_fn: E68Stage {
                dom: dom_c,
                cod: cod.clone(),
                g,
            },
        }))
    };
    let cod_c = cod.clone();
    let f_slot = mach.register_extern(HostFnExtern::new("effective-from-cont", move |_m, i| {
        let pulled = cod_c.ctx.t_form(&param_prog(stage_slot, i));
        let q = param_prog(cod_c.slots.normed, &pulled);
        cod_c.ctx.limit_pass(&q)
    }));
    crate::spaces::externs::ext_prog(f_slot)
}

/// The pointed witness: shrink nothing, answer with the generating point.
pub fn pointed_witness(map: &EffectiveMap) -> Result<NoninclusionWitness, ExtractError> {
    let pd = map
        .dom
        .slots
        .pd
        .ok_or(ExtractError::MissingCapability("effectively pointed domain"))?;
    let mut s = Asm::new();
    s.unpair(0, 1, 2);
    s.copy(2, 0);
    s.halt();
    let mut r = Asm::new();
    r.unpair(0, 1, 2);
    r.unpair(2, 3, 4);
    r.copy(3, 0);
    r.ext(pd);
    r.halt();
    Ok(NoninclusionWitness {
        s: s.assemble().encode(),
        r: r.assemble().encode(),
        appropriate: true,
    })
}

/// Strong effective sequential continuity + an appropriate witness ⟹
/// effective pointwise continuity: the certificate follows the canonical
/// approximating sequence until the module for the shrunken target fires,
/// then answers with the enumeration stage it fired at.
pub fn ptcont_from_seqcont(
    map: &EffectiveMap,
    kprime: &BigUint,
    witness: &NoninclusionWitness,
) -> PointwiseCert {
    let mach = map.machine();
    let dom = map.dom.clone();
    let s_prog = witness.s.clone();
    let r_prog = witness.r.clone();
    let kprime = kprime.clone();
    let normed_slot = dom.slots.normed;
    let dom_for_text = dom.clone();
    let kprime_for_text = kprime.clone();
    let tau68 = mach.register_extern(HostFnExtern::new(
        format!("{}-tau68", map.label),
        move |_m, input| {
            let (in_pair, e_bar) = unpair(input);
            let (i, n) = unpair(&in_pair);
            let q_i = param_prog(normed_slot, &i);
            let pq = seq_from_enum(&dom_for_text, &q_i);
            tau68_text(
                pq.value(),
                &q_i,
                &i,
                &n,
                &s_prog,
                &r_prog,
                &kprime_for_text,
                e_bar,
            )
        },
    ));
    let dom_q = map.dom.clone();
    let s_prog_q = witness.s.clone();
    PointwiseCert {
        label: format!("{}-ptwise-seq", map.label),
        query: Arc::new(move |i, n, fuel| {
            let mach = dom_q.machine();
            let tau = param_prog(tau68, &pair(i, n));
            let e_star = fixpoint_index(&tau);
            let k_idx = mach
                .eval(&GoedelIndex(kprime.clone()), &e_star, fuel)
                .halted_value()
                .cloned()?;
            let s_val = mach
                .eval(&GoedelIndex(s_prog_q.clone()), &pair(i, n), fuel)
                .halted_value()
                .cloned()?;
            let h_val = mach
                .eval(&GoedelIndex(k_idx), &s_val, fuel)
                .halted_value()
                .cloned()?;
            // h'(i, n) = φ_{q(i)}(h(i, n)).
            let q_i = param_prog(dom_q.slots.normed, i);
            mach.eval(&GoedelIndex(q_i), &h_val, fuel)
                .halted_value()
                .cloned()
        }),
    }
}

/// The self-referential approximating sequence of the pointwise proof:
/// follow the canonical sequence toward `x_i` until the module of the
/// (shrunken) target fires at some stage, then sit on the witness point of
/// the enumeration stage the module named.
#[allow(clippy::too_many_arguments)]
fn tau68_text(
    pq: &BigUint,
    q_i: &BigUint,
    i: &BigUint,
    n: &BigUint,
    s_prog: &BigUint,
    r_prog: &BigUint,
    kprime: &BigUint,
    e_bar: BigUint,
) -> BigUint {
    let mut a = Asm::new();
    let follow = a.fresh_label();
    a.copy(0, 3); // position a
    a.const_reg(4, pq.clone());
    a.const_reg(5, q_i.clone());
    a.const_reg(6, kprime.clone());
    a.const_reg(7, e_bar);
    a.const_reg(8, i.clone());
    a.const_reg(9, n.clone());
    // K = φ_{k'}(ē)
    a.pair(6, 7, 0);
    a.universal();
    a.copy(0, 10);
    // s_val = φ_s(⟨i, n⟩)
    a.pair(8, 9, 2);
    a.const_reg(1, s_prog.clone());
    a.pair(1, 2, 0);
    a.universal();
    a.copy(0, 11);
    // the module must have fired within the position bound
    a.call_bounded(10, 11, 3, 1);
    a.jz(0, 2, follow);
    a.pair(10, 11, 0);
    a.universal();
    a.copy(0, 12); // module value
    a.pair(12, 3, 0);
    a.ext(slots::LE);
    a.jz(0, 2, follow); // a < value: keep following
    // witness case: r(i, φ_{q(i)}(value), n)
    a.pair(5, 12, 0);
    a.universal();
    a.copy(0, 13);
    a.pair(13, 9, 2);
    a.pair(8, 2, 2);
    a.const_reg(1, r_prog.clone());
    a.pair(1, 2, 0);
    a.universal();
    a.halt();
    a.bind(follow);
    a.pair(4, 3, 0);
    a.universal();
    a.halt();
    a.assemble().encode()
}

/// Effectively pointwise continuous ⟹ effectively sequentially continuous
/// when limits are maximal and computable: the cutoff is the module of the
/// input sequence at the certificate's neighbourhood of the limit.
pub fn seqcont_from_ptcont(
    map: &EffectiveMap,
    h: &PointwiseCert,
    module: &crate::seqlim::ConvergenceModule,
    m: &BigUint,
    n: &BigUint,
    fuel: u64,
) -> Option<u64> {
    let li = map.dom.li_index(m)?;
    let basis = (h.query)(&li, n, fuel)?;
    module.query(&map.dom, &basis, fuel)
}

/// Certificate contract check used by several invariants: `x_i ∈ B_h'`
/// observed, and `F(B_h') ⊆ B'_n` on the instance tables.
pub fn pointwise_contract_holds(
    map: &EffectiveMap,
    i: &BigUint,
    n: &BigUint,
    h_val: &BigUint,
    fuel: u64,
) -> bool {
    if is_member(&map.dom, i, h_val, fuel) != Obs::Observed {
        return false;
    }
    // Exhaustive on finite instances; sampled via basis data elsewhere.
    if let Some(codes) = map.dom.sem.finite_codes() {
        for p in codes {
            let in_h = matches!(
                map.dom
                    .sem
                    .code_membership(map.machine(), &p, h_val, 1_000),
                crate::spaces::Semi::Accept { .. }
            );
            if !in_h {
                continue;
            }
            let fp = match map.point_action(&p) {
                Some(v) => v,
                None => return false,
            };
            let ok = matches!(
                map.cod.sem.code_membership(map.machine(), &fp, n, 1_000),
                crate::spaces::Semi::Accept { .. }
            );
            if !ok {
                return false;
            }
        }
        true
    } else {
        map.dom
            .sem
            .basis_subset(h_val, h_val)
            .map(|_| true)
            .unwrap_or(true)
    }
}

/// Off-contract helper for tests: the target misses the image of the
/// limit, so extraction must time out rather than fabricate a cutoff.
pub fn expect_off_contract(err: &ExtractError) -> bool {
    matches!(err, ExtractError::OffContract { .. })
}
