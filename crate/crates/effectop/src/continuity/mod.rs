//! Effective maps between spaces and their continuity certificates.
//!
//! A map is carried by a tracker index: a machine program sending point
//! indices of the domain to point indices of the codomain. Canonical
//! indices take a direct instance-level shortcut; everything else goes
//! through the transformed enumerator, which lists the codomain basis sets
//! whose preimage is entered by an enumerated domain basic open. Both
//! routes name the same point, so tracking is extensional.

pub mod extract;

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::kernel::machine::StageResult;
use crate::kernel::pairing::{nat, pair, unpair};
use crate::kernel::{Asm, Extern, ExternOutcome, GoedelIndex, Machine, StageFn};
use crate::spaces::externs::{ext_prog, windex_stage};
use crate::spaces::stage::{match_param_prog, param_prog, StageExtern};
use crate::spaces::{Space, SpecLeqVerdict};

pub use extract::{
    cont_from_ptcont, effective_from_cont, kprime_delaying, pointed_witness, ptcont_from_cont,
    ptcont_from_seqcont, race_liveness, seqcont_from_ptcont, seqcont_module_delaying,
    seqcont_module_t3, validate_tail, Cutoff, ExtractError,
};

/// One stage of per-basis map data: emit a basis index or skip.
pub type BasisStageFn = Arc<dyn Fn(&BigUint, u64) -> Option<BasisStage> + Send + Sync>;

#[derive(Debug, Clone)]
pub enum BasisStage {
    Emit(BigUint),
    Skip,
}

/// Host semantics of a map.
pub enum MapSem {
    /// A point-level function plus basis-level data: the canonical image
    /// `n'` of each basic open (with `B_m ⊆ F⁻¹(B'_{n'})`), and stages of
    /// `{a : B_a ⊆ F⁻¹(B'_{n'})}` for the effective-continuity enumerator.
    Basis {
        point_map: Arc<dyn Fn(&BigUint) -> BigUint + Send + Sync>,
        basis_image: Arc<dyn Fn(&BigUint) -> Option<BigUint> + Send + Sync>,
        preimage_cover: BasisStageFn,
    },
    /// A raw index transformation (used by the counterexample).
    Direct(Arc<dyn Fn(&Machine, &BigUint, u64) -> Option<(BigUint, u64)> + Send + Sync>),
}

pub struct MapSlots {
    pub tracker: u16,
    pub track_stage: Option<u16>,
    pub cover_stage: Option<u16>,
    pub w_build: Option<u16>,
}

pub struct EffectiveMap {
    pub label: String,
    pub dom: Arc<Space>,
    pub cod: Arc<Space>,
    /// Program index of the tracker `f` with `F(x_i) = x'_{f(i)}`.
    pub tracker: BigUint,
    pub slots: MapSlots,
    sem: Arc<MapSem>,
    pub(crate) extract: std::sync::OnceLock<extract::ExtractSlots>,
}

/// Tracker extern: canonical shortcut or transformed enumerator.
struct TrackExtern {
    dom: Arc<Space>,
    cod: Arc<Space>,
    sem: Arc<MapSem>,
    track_stage: Option<u16>,
}

impl Extern for TrackExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        match &*self.sem {
            MapSem::Basis { point_map, .. } => {
                if budget < 1 {
                    return ExternOutcome::NeedsMore;
                }
                if let Some(code) = self.dom.decode_canonical(input) {
                    return ExternOutcome::value(self.cod.cp(&point_map(&code)), 1);
                }
                let slot = self.track_stage.expect("basis maps carry a stage slot");
                ExternOutcome::value(self.cod.ctx.t_form(&param_prog(slot, input)), 1)
            }
            MapSem::Direct(f) => match f(mach, input, budget) {
                Some((idx, cost)) if cost <= budget => ExternOutcome::value(idx, cost.max(1)),
                _ => ExternOutcome::NeedsMore,
            },
        }
    }

    fn name(&self) -> &str {
        "tracker"
    }
}

/// Stages of the transformed enumerator: stage `k` pushes the `k`-th
/// enumerated basic open of the input point forward through the map's
/// basis-image data.
struct TrackStage {
    dom: Arc<Space>,
    basis_image: Arc<dyn Fn(&BigUint) -> Option<BigUint> + Send + Sync>,
}

impl StageFn for TrackStage {
    fn stage(&self, mach: &Machine, i: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        match windex_stage(mach, self.dom.ctx.range_member, i, k, budget) {
            StageResult::Emit { value: m, cost } => match (self.basis_image)(&m) {
                Some(n) => StageResult::Emit {
                    value: n,
                    cost: cost + 1,
                },
                None => StageResult::Skip { cost: cost + 1 },
            },
            StageResult::Skip { cost } => StageResult::Skip { cost: cost + 1 },
            StageResult::NeedsMore => StageResult::NeedsMore,
        }
    }

    fn stage_name(&self) -> &str {
        "track-stage"
    }
}

/// Stages of the effective-continuity enumerator `W_{g(n')}`.
struct CoverStage {
    preimage_cover: BasisStageFn,
}

impl StageFn for CoverStage {
    fn stage(&self, _mach: &Machine, n: &BigUint, k: &BigUint, _budget: u64) -> StageResult {
        match k.to_u64().and_then(|k| (self.preimage_cover)(n, k)) {
            Some(BasisStage::Emit(a)) => StageResult::Emit { value: a, cost: 1 },
            _ => StageResult::Skip { cost: 1 },
        }
    }

    fn stage_name(&self) -> &str {
        "cover-stage"
    }
}

impl EffectiveMap {
    pub fn machine(&self) -> &Machine {
        self.dom.machine()
    }

    /// Apply the tracker to a point index.
    pub fn apply(&self, i: &BigUint, fuel: u64) -> Option<BigUint> {
        self.machine()
            .eval(&GoedelIndex(self.tracker.clone()), i, fuel)
            .halted_value()
            .cloned()
    }

    /// `v(n)`: index of the semidecision accepting `{j : F(x_j) ∈ B'_n}`,
    /// the tracker composed with the codomain membership.
    pub fn v_index(&self, n: &BigUint) -> BigUint {
        let mut a = Asm::new();
        a.ext(self.slots.tracker);
        a.const_reg(1, n.clone());
        a.pair(0, 1, 0);
        a.const_reg(1, self.cod.membership.clone());
        a.pair(1, 0, 0);
        a.universal();
        a.halt();
        a.assemble().encode()
    }

    /// `w(i, n)`: index of the semidecision accepting
    /// `{j : F(x_j) ∈ ext(B'_{s(f(i), n)})}`; the shrinking `s` runs inside
    /// the program, so its divergence off contract is inherited honestly.
    pub fn w_index(&self, i: &BigUint, n: &BigUint) -> BigUint {
        let t3 = self
            .cod
            .slots
            .t3
            .expect("codomain must be effectively T3");
        let co = self
            .cod
            .slots
            .co_mem
            .expect("codomain must be co-computable");
        let mut a = Asm::new();
        // R9 = f(j)
        a.ext(self.slots.tracker);
        a.copy(0, 9);
        // R5 = s(f(i), n)
        a.const_reg(0, i.clone());
        a.ext(self.slots.tracker);
        a.const_reg(1, n.clone());
        a.pair(0, 1, 0);
        a.ext(t3);
        a.copy(0, 5);
        // exterior membership of ⟨f(j), s(f(i), n)⟩
        a.pair(9, 5, 0);
        a.const_reg(1, ext_prog(co));
        a.pair(1, 0, 0);
        a.universal();
        a.halt();
        a.assemble().encode()
    }

    /// The effective-continuity enumerator of the map, when basis-backed.
    pub fn enumerator(&self) -> Option<Enumerator> {
        let slot = self.slots.cover_stage?;
        Some(Enumerator {
            label: format!("{}-cover", self.label),
            build: Arc::new(move |n| param_prog(slot, n)),
        })
    }

    /// Decode the point-level action on a canonical index, for oracles.
    pub fn point_action(&self, code: &BigUint) -> Option<BigUint> {
        match &*self.sem {
            MapSem::Basis { point_map, .. } => Some(point_map(code)),
            MapSem::Direct(_) => None,
        }
    }
}

/// An effectively continuous presentation: for each codomain basis index a
/// stage enumerator of basic opens covering the preimage.
#[derive(Clone)]
pub struct Enumerator {
    pub label: String,
    pub build: Arc<dyn Fn(&BigUint) -> BigUint + Send + Sync>,
}

/// A pointwise-continuity certificate: `h(i, n)` with `x_i ∈ B_{h(i,n)}`
/// and `F(B_{h(i,n)}) ⊆ B'_n` whenever `F(x_i) ∈ B'_n`.
#[derive(Clone)]
pub struct PointwiseCert {
    pub label: String,
    pub query: Arc<dyn Fn(&BigUint, &BigUint, u64) -> Option<BigUint> + Send + Sync>,
}

/// A witness for noninclusion: `s` shrinks targets, `r` produces hull
/// counterexample points.
pub struct NoninclusionWitness {
    pub s: BigUint,
    pub r: BigUint,
    pub appropriate: bool,
}

impl NoninclusionWitness {
    pub fn s_value(&self, mach: &Machine, i: &BigUint, n: &BigUint, fuel: u64) -> Option<BigUint> {
        mach.eval(&GoedelIndex(self.s.clone()), &pair(i, n), fuel)
            .halted_value()
            .cloned()
    }

    pub fn r_value(
        &self,
        mach: &Machine,
        i: &BigUint,
        e: &BigUint,
        n: &BigUint,
        fuel: u64,
    ) -> Option<BigUint> {
        mach.eval(&GoedelIndex(self.r.clone()), &pair(i, &pair(e, n)), fuel)
            .halted_value()
            .cloned()
    }
}

/// Assemble a basis-backed effective map.
pub fn build_map(
    label: impl Into<String>,
    dom: &Arc<Space>,
    cod: &Arc<Space>,
    point_map: impl Fn(&BigUint) -> BigUint + Send + Sync + 'static,
    basis_image: impl Fn(&BigUint) -> Option<BigUint> + Send + Sync + 'static,
    preimage_cover: impl Fn(&BigUint, u64) -> Option<BasisStage> + Send + Sync + 'static,
) -> Arc<EffectiveMap> {
    let mach = dom.machine();
    let sem = Arc::new(MapSem::Basis {
        point_map: Arc::new(point_map),
        basis_image: Arc::new(basis_image),
        preimage_cover: Arc::new(preimage_cover),
    });
    let basis_image = match &*sem {
        MapSem::Basis { basis_image, .. } => basis_image.clone(),
        MapSem::Direct(_) => unreachable!(),
    };
    let preimage_cover = match &*sem {
        MapSem::Basis { preimage_cover, .. } => preimage_cover.clone(),
        MapSem::Direct(_) => unreachable!(),
    };
    let track_stage = mach.register_extern(Arc::new(StageExtern {
        stage_fn: TrackStage {
            dom: dom.clone(),
            basis_image,
        },
    }));
    let cover_stage = mach.register_extern(Arc::new(StageExtern {
        stage_fn: CoverStage { preimage_cover },
    }));
    let tracker_slot = mach.register_extern(Arc::new(TrackExtern {
        dom: dom.clone(),
        cod: cod.clone(),
        sem: sem.clone(),
        track_stage: Some(track_stage),
    }));
    Arc::new(EffectiveMap {
        label: label.into(),
        dom: dom.clone(),
        cod: cod.clone(),
        tracker: ext_prog(tracker_slot),
        slots: MapSlots {
            tracker: tracker_slot,
            track_stage: Some(track_stage),
            cover_stage: Some(cover_stage),
            w_build: None,
        },
        sem,
        extract: std::sync::OnceLock::new(),
    })
}

/// Assemble a map from a raw index transformation.
pub fn build_direct_map(
    label: impl Into<String>,
    dom: &Arc<Space>,
    cod: &Arc<Space>,
    f: impl Fn(&Machine, &BigUint, u64) -> Option<(BigUint, u64)> + Send + Sync + 'static,
) -> Arc<EffectiveMap> {
    let mach = dom.machine();
    let sem = Arc::new(MapSem::Direct(Arc::new(f)));
    let tracker_slot = mach.register_extern(Arc::new(TrackExtern {
        dom: dom.clone(),
        cod: cod.clone(),
        sem: sem.clone(),
        track_stage: None,
    }));
    Arc::new(EffectiveMap {
        label: label.into(),
        dom: dom.clone(),
        cod: cod.clone(),
        tracker: ext_prog(tracker_slot),
        slots: MapSlots {
            tracker: tracker_slot,
            track_stage: None,
            cover_stage: None,
            w_build: None,
        },
        sem,
        extract: std::sync::OnceLock::new(),
    })
}

/// Identity map on a space, basis-backed: each basic open is its own image.
pub fn identity_map(sp: &Arc<Space>) -> Arc<EffectiveMap> {
    let sem2 = sp.sem.clone();
    build_map(
        format!("{}-id", sp.label),
        sp,
        sp,
        |code| code.clone(),
        |m| Some(m.clone()),
        move |n, k| {
            if k == 0 {
                return Some(BasisStage::Emit(n.clone()));
            }
            let cand = sem2.basis_candidate(k - 1);
            match sem2.basis_subset(&cand, n) {
                Some(true) => Some(BasisStage::Emit(cand)),
                _ => Some(BasisStage::Skip),
            }
        },
    )
}

/// A monotone endomap of a finite domain given by its action on point
/// codes; basis data is computed exhaustively from the tables.
pub fn finite_monotone_map(
    label: impl Into<String>,
    sp: &Arc<Space>,
    action: Vec<u64>,
) -> Arc<EffectiveMap> {
    let codes = sp.sem.finite_codes().expect("finite instances only");
    assert_eq!(action.len(), codes.len(), "action must cover every code");
    let act = Arc::new(action);
    // B_m ⊆ F⁻¹(B'_n) ⟺ every code in B_m maps into B'_n, checked
    // exhaustively over the finite tables.
    fn maps_into(sp: &Space, act: &[u64], m: &BigUint, n: &BigUint) -> bool {
        let in_basis = |p: &BigUint, b: &BigUint| {
            matches!(
                sp.sem.code_membership(sp.machine(), p, b, 16),
                crate::spaces::Semi::Accept { .. }
            )
        };
        (0..act.len() as u64).all(|p| {
            !in_basis(&nat(p), m) || in_basis(&nat(act[p as usize]), n)
        })
    }
    let act_p = act.clone();
    let (sp_b, act_b) = (sp.clone(), act.clone());
    let (sp_c, act_c) = (sp.clone(), act.clone());
    let code_count = codes.len() as u64;
    build_map(
        label,
        sp,
        sp,
        move |code| nat(act_p[code.to_u64().unwrap_or(0) as usize % act_p.len()]),
        move |m| {
            // B_m = up(β_m) maps into up(F(β_m)) by monotonicity.
            let pm = (m % nat(code_count)).to_u64().expect("small");
            let img = nat(act_b[pm as usize]);
            debug_assert!(maps_into(&sp_b, &act_b, m, &img));
            Some(img)
        },
        move |n, k| {
            let cand = sp_c.sem.basis_candidate(k);
            if maps_into(&sp_c, &act_c, &cand, n) {
                Some(BasisStage::Emit(cand))
            } else {
                Some(BasisStage::Skip)
            }
        },
    )
}

/// Extensionality probe used by the map invariants: two indistinguishable
/// inputs must have indistinguishable images.
pub fn tracking_extensional(
    map: &EffectiveMap,
    i: &BigUint,
    j: &BigUint,
    budget: u64,
    fuel: u64,
) -> bool {
    match (map.apply(i, fuel), map.apply(j, fuel)) {
        (Some(fi), Some(fj)) => {
            crate::spaces::indistinguishable_at(&map.cod, &fi, &fj, budget, fuel).is_none()
        }
        _ => false,
    }
}

/// Observation-level monotonicity of a map along the specialization order.
pub fn map_monotone_on(
    map: &EffectiveMap,
    pairs: &[(BigUint, BigUint)],
    budget: u64,
    fuel: u64,
) -> bool {
    pairs.iter().all(|(u, z)| {
        if crate::spaces::spec_leq(&map.dom, u, z, budget, fuel) != SpecLeqVerdict::ConsistentSoFar
        {
            return true;
        }
        match (map.apply(u, fuel), map.apply(z, fuel)) {
            (Some(fu), Some(fz)) => {
                crate::spaces::spec_leq(&map.cod, &fu, &fz, budget, fuel)
                    == SpecLeqVerdict::ConsistentSoFar
            }
            _ => false,
        }
    })
}

/// Recognise a `t`-form index over this map's transformed enumerator (used
/// by tests to confirm which route produced an index).
pub fn is_transformed_index(map: &EffectiveMap, idx: &BigUint) -> bool {
    let Some(stage_slot) = map.slots.track_stage else {
        return false;
    };
    let mach = map.machine();
    match map.cod.ctx.un_t_form(idx) {
        Some(e) => matches!(match_param_prog(&mach.program(&e)), Some((slot, _)) if slot == stage_slot),
        None => false,
    }
}
