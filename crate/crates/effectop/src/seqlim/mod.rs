//! Canonical sequence families, delaying, limit algorithms, convergence
//! modules and the membership-propagation engine.
//!
//! Sequences are total machine programs mapping positions to point
//! indices. The monotone family (pointed spaces) allows delaying; the
//! regular-Cauchy family (metric spaces) does not, and gets its limit
//! algorithm from the ball-filtering construction instead.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::kernel::externs::slots;
use crate::kernel::pairing::{nat, pair};
use crate::kernel::{fixpoint, Asm, GoedelIndex, Transformer};
use crate::spaces::stage::param_prog;
use crate::spaces::{CeSet, SeqKind, Space};

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("the {0} family does not allow delaying: repeating an element breaks the regular Cauchy gap bound")]
    DelayingNotAllowed(&'static str),
    #[error("space {0} has no limit algorithm for this family")]
    NoLimitAlgorithm(String),
    #[error("precondition unmet: {0}")]
    Precondition(String),
    #[error("space {0} is not a dyadic metric instance")]
    NotDyadic(String),
}

/// Descriptor of the canonical sequence family of a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeqFamily {
    pub kind: SeqKind,
    pub allows_delaying: bool,
}

pub fn seq_family(sp: &Space) -> SeqFamily {
    match sp.sem.seq_kind() {
        SeqKind::MonotoneIncreasing => SeqFamily {
            kind: SeqKind::MonotoneIncreasing,
            allows_delaying: true,
        },
        SeqKind::RegularCauchy => SeqFamily {
            kind: SeqKind::RegularCauchy,
            allows_delaying: false,
        },
    }
}

/// Register the constant sequence at a point index.
pub fn seq_const(sp: &Space, point: &BigUint) -> GoedelIndex {
    let point = point.clone();
    sp.register_seq(Arc::new(move |_m, _a, _b| Some((point.clone(), 1))))
}

/// Register the sequence running through `points` and then repeating the
/// last one (the canonical "chain" shape).
pub fn seq_table(sp: &Space, points: Vec<BigUint>) -> GoedelIndex {
    assert!(!points.is_empty(), "table sequences need an element");
    sp.register_seq(Arc::new(move |_m, a, _b| {
        let idx = a.to_u64().map(|v| v as usize).unwrap_or(points.len() - 1);
        Some((points[idx.min(points.len() - 1)].clone(), 1))
    }))
}

/// Register the regular Cauchy sequence `y_a = target ∓ 2^{-(a+shift)}`
/// over the dyadic segment (clamped to [0,1]). `shift ≥ 2` keeps the gap
/// bound `δ(y_m, y_n) < 2^{-m}` strict.
pub fn seq_dyadic_approach(
    sp: &Space,
    target: BigRational,
    from_below: bool,
    shift: u64,
) -> Result<GoedelIndex, SeqError> {
    if sp.sem.seq_kind() != SeqKind::RegularCauchy || sp.label != "dyadic01" {
        return Err(SeqError::NotDyadic(sp.label.clone()));
    }
    let sp_canon = sp.slots.canon_stage;
    let sp_rm = sp.ctx.range_member;
    Ok(sp.register_seq(Arc::new(move |_m, a, _b| {
        // freeze near the limit before dense-code exponents clamp
        let a = a.to_u64().unwrap_or(60).min(60);
        let exp = (a + shift).min(62) as u32;
        let eps = BigRational::new(num_bigint::BigInt::one(), num_bigint::BigInt::from(2u8).pow(exp));
        let v = if from_below {
            (target.clone() - eps).max(BigRational::zero())
        } else {
            (target.clone() + eps).min(BigRational::one())
        };
        let code = dyadic_code_of(&v)?;
        Some((param_prog(sp_rm, &param_prog(sp_canon, &code)), 1))
    })))
}

/// Exact dense code of a dyadic rational in [0,1].
pub fn dyadic_code_of(v: &BigRational) -> Option<BigUint> {
    if v.is_negative() || v > &BigRational::one() {
        return None;
    }
    let den = v.denom().to_biguint()?;
    let e = den.bits() - 1;
    if BigUint::from(2u8).pow(e as u32) != den {
        return None;
    }
    let num = v.numer().to_biguint()?;
    Some(pair(&num, &nat(e)))
}

/// The p-builder of the family: from a converging normed enumeration index
/// to a canonical sequence hugging its hulls. Pointed spaces take the
/// generating points `pd(φ_m(a))`; metric spaces take the enumerated
/// centres.
pub fn seq_from_enum(sp: &Space, m: &BigUint) -> GoedelIndex {
    let mut a = Asm::new();
    a.const_reg(1, m.clone());
    a.pair(1, 0, 0);
    a.universal(); // R0 = φ_m(a), a basis index
    match sp.sem.seq_kind() {
        SeqKind::MonotoneIncreasing => {
            a.ext(sp.slots.pd.expect("pointed instance"));
        }
        SeqKind::RegularCauchy => {
            a.unpair(0, 1, 2); // centre code, radius exponent
            a.copy(1, 0);
            a.ext(sp.slots.cp_build);
        }
    }
    a.halt();
    GoedelIndex(a.assemble().encode())
}

/// The delaying transform: equal to `y` below `ā`, repeats `y_ā` for `k`
/// further positions, then resumes shifted. Only the monotone family
/// admits it.
pub fn delay(
    fam: &SeqFamily,
    sp: &Space,
    m: &BigUint,
    a_bar: u64,
    k: u64,
) -> Result<GoedelIndex, SeqError> {
    if !fam.allows_delaying {
        return Err(SeqError::DelayingNotAllowed("regular-Cauchy"));
    }
    let _ = sp;
    let mut a = Asm::new();
    let case1 = a.fresh_label();
    let case2 = a.fresh_label();
    a.copy(0, 3); // R3 = position
    a.const_u64(4, a_bar);
    a.const_u64(5, a_bar + k);
    a.const_u64(6, k);
    a.const_reg(7, m.clone());
    // position < ā ⟺ ¬(ā ≤ position)
    a.pair(4, 3, 0);
    a.ext(slots::LE);
    a.jz(0, 2, case1);
    // position ≤ ā + k
    a.pair(3, 5, 0);
    a.ext(slots::LE);
    a.jnz(0, 2, case2);
    // resume shifted: (position ∸ k) + 1
    a.pair(3, 6, 0);
    a.ext(slots::MONUS);
    a.inc(0);
    a.pair(7, 0, 0);
    a.universal();
    a.halt();
    a.bind(case2);
    a.pair(7, 4, 0);
    a.universal();
    a.halt();
    a.bind(case1);
    a.pair(7, 3, 0);
    a.universal();
    a.halt();
    Ok(GoedelIndex(a.assemble().encode()))
}

/// Limit algorithm over pointed spaces with the monotone family.
pub fn li_pointed(sp: &Space, m: &BigUint) -> Result<BigUint, SeqError> {
    if sp.sem.seq_kind() != SeqKind::MonotoneIncreasing {
        return Err(SeqError::NoLimitAlgorithm(sp.label.clone()));
    }
    sp.li_index(m)
        .ok_or_else(|| SeqError::NoLimitAlgorithm(sp.label.clone()))
}

/// Limit algorithm over metric spaces with the regular-Cauchy family.
pub fn li_metric(sp: &Space, m: &BigUint) -> Result<BigUint, SeqError> {
    if sp.sem.seq_kind() != SeqKind::RegularCauchy {
        return Err(SeqError::NoLimitAlgorithm(sp.label.clone()));
    }
    sp.li_index(m)
        .ok_or_else(|| SeqError::NoLimitAlgorithm(sp.label.clone()))
}

/// A per-basis-set cutoff function, packaged as a machine program.
#[derive(Debug, Clone)]
pub struct ConvergenceModule {
    pub prog: BigUint,
}

impl ConvergenceModule {
    pub fn query(&self, sp: &Space, n: &BigUint, fuel: u64) -> Option<u64> {
        sp.machine()
            .eval(&GoedelIndex(self.prog.clone()), n, fuel)
            .halted_value()
            .and_then(|v| v.to_u64())
    }
}

/// Uniform convergence module of the sequence derived from a converging
/// normed enumeration: the cutoff for `B_n` is the first position whose
/// predecessor's enumerated set strongly includes into `n`.
pub fn conv_module_from_enum(sp: &Space, m: &BigUint) -> ConvergenceModule {
    ConvergenceModule {
        prog: param_prog(sp.slots.conv_mod, m),
    }
}

/// Outcome of the membership-propagation engine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropagationVerdict {
    /// `x_{li(m)} ∈ X` observed; also reports the self-referential run.
    Positive { li_b_observed: bool },
    /// Not observed within the fuel (distinct from a refutation, which
    /// c.e. sets cannot provide).
    NotObserved { fuel: u64 },
}

/// Membership propagation along delayable sequences: if some element of
/// the sequence lies in the completely enumerable set, so does the
/// distinguished limit. Builds the self-referential wait-and-see program
/// through the recursion theorem and reports the observations.
pub fn propagate_membership(
    sp: &Space,
    fam: &SeqFamily,
    x_set: &CeSet,
    m: &BigUint,
    a_bar: u64,
    fuel: u64,
) -> Result<PropagationVerdict, SeqError> {
    if !fam.allows_delaying {
        return Err(SeqError::DelayingNotAllowed("regular-Cauchy"));
    }
    let li_prog = sp
        .li_prog()
        .ok_or_else(|| SeqError::NoLimitAlgorithm(sp.label.clone()))?;
    // Precondition: y_ā ∈ X observed.
    let elt = sp
        .seq_at(m, a_bar, fuel)
        .ok_or_else(|| SeqError::Precondition(format!("sequence diverges at {a_bar}")))?;
    if !x_set.accepts(sp, &elt, fuel) {
        return Err(SeqError::Precondition(format!(
            "y_{a_bar} ∈ X not observed within {fuel}"
        )));
    }

    let b = build_propagation_fixpoint(sp, x_set, m, a_bar, &li_prog);

    let li_m = sp
        .li_index(m)
        .ok_or_else(|| SeqError::NoLimitAlgorithm(sp.label.clone()))?;
    let li_b = sp
        .li_index(&b)
        .ok_or_else(|| SeqError::NoLimitAlgorithm(sp.label.clone()))?;
    let li_b_observed = x_set.accepts(sp, &li_b, fuel);
    if x_set.accepts(sp, &li_m, fuel) {
        Ok(PropagationVerdict::Positive { li_b_observed })
    } else {
        Ok(PropagationVerdict::NotObserved { fuel })
    }
}

/// The self-referential sequence of the propagation proof: follow `y` up
/// to `ā`; past it, freeze on `y_ā` until both `li(b)` and the acceptance
/// of `x_{li(b)}` have been seen within the position bound, then resume
/// shifted by the step `g(b)` at which both were first seen.
fn build_propagation_fixpoint(
    sp: &Space,
    x_set: &CeSet,
    m: &BigUint,
    a_bar: u64,
    li_prog: &BigUint,
) -> BigUint {
    let m = m.clone();
    let acceptor = x_set.acceptor.clone();
    let li_prog = li_prog.clone();
    let transformer = Transformer::host("propagation-b", move |b_bar| {
        let mut a = Asm::new();
        let case1 = a.fresh_label();
        let case2 = a.fresh_label();
        let found = a.fresh_label();
        let loop_top = a.fresh_label();
        a.copy(0, 3); // R3 = position a
        a.const_u64(4, a_bar);
        a.const_reg(5, m.clone());
        a.const_reg(6, acceptor.clone());
        a.const_reg(7, li_prog.clone());
        a.const_reg(8, b_bar.clone());
        // a ≤ ā → follow the sequence
        a.pair(3, 4, 0);
        a.ext(slots::LE);
        a.jnz(0, 2, case1);
        // R9 = li(b̄)
        a.pair(7, 8, 0);
        a.universal();
        a.copy(0, 9);
        // li(b̄)↓_a and φ_e(li(b̄))↓_a, else freeze on y_ā
        a.call_bounded(7, 8, 3, 1);
        a.jz(0, 2, case2);
        a.call_bounded(6, 9, 3, 1);
        a.jz(0, 2, case2);
        // g(b̄) = least c > ā with both bounded tests firing
        let next = a.fresh_label();
        a.copy(4, 10);
        a.inc(10);
        a.bind(loop_top);
        a.call_bounded(7, 8, 10, 1);
        a.jz(0, 2, next);
        a.call_bounded(6, 9, 10, 1);
        a.jnz(0, 2, found);
        a.bind(next);
        a.inc(10);
        a.jmp(loop_top);
        a.bind(found);
        // position in the resumed tail: ā + a ∸ g + 1
        a.pair(4, 3, 0);
        a.ext(slots::ADD);
        a.pair(0, 10, 0);
        a.ext(slots::MONUS);
        a.inc(0);
        a.pair(5, 0, 0);
        a.universal();
        a.halt();
        a.bind(case2);
        a.pair(5, 4, 0);
        a.universal();
        a.halt();
        a.bind(case1);
        a.pair(5, 3, 0);
        a.universal();
        a.halt();
        a.assemble().encode()
    });
    fixpoint(sp.machine(), &transformer)
}
