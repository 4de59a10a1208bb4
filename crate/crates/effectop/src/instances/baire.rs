//! Baire space at desk scale: points are machine programs denoting total
//! functions, the metric is `δ(f, g) = 2^{-μn. f(n) ≠ g(n)}`, and the
//! dense set is the eventually-zero functions coded as finite sequences.
//!
//! Membership of a program in a ball is semidecided by running the program
//! on the arguments the radius constrains; a differing value is a sound
//! refutation, which is what makes the space co-computable.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::kernel::machine::StageResult;
use crate::kernel::pairing::{nat, pair, unpair};
use crate::kernel::{slots, Asm, Machine, MemoResult};
use crate::spaces::{InstanceSem, Semi, SeqKind};

use super::{pow2_neg, EXP_CLAMP};

/// Decode a finite-sequence code: 0 is empty, `c+1 = ⟨head, tail⟩`.
pub fn seq_decode(c: &BigUint) -> Vec<BigUint> {
    let mut out = Vec::new();
    let mut c = c.clone();
    while !c.is_zero() {
        let (h, t) = unpair(&(c - BigUint::one()));
        out.push(h);
        c = t;
        if out.len() > 4096 {
            break; // degenerate giant codes are truncated, deterministically
        }
    }
    out
}

pub fn seq_encode(list: &[BigUint]) -> BigUint {
    let mut c = BigUint::zero();
    for x in list.iter().rev() {
        c = pair(x, &c) + BigUint::one();
    }
    c
}

fn seq_at(list: &[BigUint], b: usize) -> BigUint {
    list.get(b).cloned().unwrap_or_default()
}

/// Exact distance between two eventually-zero functions.
fn delta_dense(a: &[BigUint], b: &[BigUint]) -> BigRational {
    let len = a.len().max(b.len());
    for i in 0..len {
        if seq_at(a, i) != seq_at(b, i) {
            return pow2_neg(&nat(i as u64));
        }
    }
    BigRational::zero()
}

/// Program computing the finite sequence extended by zeros.
pub fn dense_point_program(list: &[BigUint]) -> BigUint {
    let mut a = Asm::new();
    let mut labels = Vec::new();
    a.copy(0, 3);
    for (idx, _) in list.iter().enumerate() {
        let l = a.fresh_label();
        a.const_u64(1, idx as u64);
        a.pair(3, 1, 0);
        a.ext(slots::EQ);
        a.jnz(0, 2, l);
        labels.push(l);
    }
    a.halt_zero();
    for (l, v) in labels.into_iter().zip(list.iter()) {
        a.bind(l);
        a.const_reg(0, v.clone());
        a.halt();
    }
    a.assemble().encode()
}

pub struct BaireSem;

impl BaireSem {
    /// Run `φ_p(b)` for `b = 0..=upto`, comparing against the dense list.
    /// Returns `(agree-so-far, cost)`; `None` value inside means timeout.
    fn compare_prefix(
        mach: &Machine,
        p: &BigUint,
        list: &[BigUint],
        upto: u64,
        budget: u64,
    ) -> Result<(bool, u64), u64> {
        let mut cost = 0u64;
        for b in 0..=upto {
            if cost >= budget {
                return Err(cost);
            }
            match mach.probe(p, &nat(b), budget - cost) {
                MemoResult::Halted { steps, value } if steps <= budget - cost => {
                    cost += steps + 1;
                    if value != seq_at(list, b as usize) {
                        return Ok((false, cost));
                    }
                }
                _ => return Err(budget),
            }
        }
        Ok((true, cost))
    }

    fn prefix_of(
        mach: &Machine,
        p: &BigUint,
        len: u64,
        budget: u64,
    ) -> Result<(Vec<BigUint>, u64), ()> {
        let mut cost = 0u64;
        let mut out = Vec::new();
        for b in 0..len {
            if cost >= budget {
                return Err(());
            }
            match mach.probe(p, &nat(b), budget - cost) {
                MemoResult::Halted { steps, value } if steps <= budget - cost => {
                    cost += steps + 1;
                    out.push(value);
                }
                _ => return Err(()),
            }
        }
        Ok((out, cost))
    }
}

impl InstanceSem for BaireSem {
    fn label(&self) -> &str {
        "baire"
    }

    fn si(&self, m: &BigUint, n: &BigUint) -> bool {
        let (ci, cm) = unpair(m);
        let (cj, cn) = unpair(n);
        delta_dense(&seq_decode(&ci), &seq_decode(&cj)) + pow2_neg(&cm) < pow2_neg(&cn)
    }

    fn code_membership(&self, mach: &Machine, p: &BigUint, n: &BigUint, budget: u64) -> Semi {
        let (cj, cn) = unpair(n);
        let list = seq_decode(&cj);
        let upto = cn.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        match Self::compare_prefix(mach, p, &list, upto, budget) {
            Ok((true, cost)) => Semi::Accept { cost: cost.max(1) },
            Ok((false, _)) => Semi::Reject,
            Err(_) => Semi::NeedsMore,
        }
    }

    fn canon_stage(&self, mach: &Machine, p: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        let (prec, g) = unpair(k);
        let prec_u = prec.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        if g.is_zero() {
            // The ball around the point's own prefix.
            match Self::prefix_of(mach, p, prec_u + 2, budget) {
                Ok((prefix, cost)) => StageResult::Emit {
                    value: pair(&seq_encode(&prefix), &prec),
                    cost: cost.max(1),
                },
                Err(()) => StageResult::NeedsMore,
            }
        } else {
            let center = g - BigUint::one();
            let ball = pair(&center, &prec);
            match self.code_membership(mach, p, &ball, budget) {
                Semi::Accept { cost } => StageResult::Emit {
                    value: ball,
                    cost,
                },
                Semi::Reject => StageResult::Skip { cost: 1 },
                Semi::NeedsMore => StageResult::NeedsMore,
            }
        }
    }

    fn basis_candidate(&self, rank: u64) -> BigUint {
        let (m, g) = unpair(&nat(rank));
        pair(&g, &m)
    }

    fn basis_disjoint(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        let (ci, cm) = unpair(m);
        let (cj, cn) = unpair(n);
        let d = delta_dense(&seq_decode(&ci), &seq_decode(&cj));
        // Ultrametric: open balls either nest or are disjoint.
        let rmax = pow2_neg(&cm).max(pow2_neg(&cn));
        Some(d >= rmax)
    }

    fn basis_subset(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        let (ci, cm) = unpair(m);
        let (cj, cn) = unpair(n);
        let d = delta_dense(&seq_decode(&ci), &seq_decode(&cj));
        // Nesting in an ultrametric: centre inside and radius no larger.
        Some(d < pow2_neg(&cn) && pow2_neg(&cm) <= pow2_neg(&cn))
    }

    fn hull_envelope(&self, n: &BigUint, k: u64) -> Option<BigUint> {
        let (ci, cm) = unpair(n);
        let m = cm.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        if k >= m {
            return None;
        }
        let np = m - 1 - k;
        let list = seq_decode(&ci);
        let trunc: Vec<BigUint> = list.into_iter().take(np as usize + 2).collect();
        let a = pair(&seq_encode(&trunc), &nat(np));
        self.si(n, &a).then_some(a)
    }

    fn dense_code(&self, k: u64) -> Option<BigUint> {
        Some(dense_point_program(&seq_decode(&nat(k))))
    }

    fn normed_stage(&self, mach: &Machine, p: &BigUint, a: &BigUint, budget: u64) -> StageResult {
        let a_u = a.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        match Self::prefix_of(mach, p, a_u + 3, budget) {
            Ok((prefix, cost)) => StageResult::Emit {
                value: pair(&seq_encode(&prefix), &nat(a_u + 1)),
                cost: cost.max(1),
            },
            Err(()) => StageResult::NeedsMore,
        }
    }

    fn t3_shrink_code(
        &self,
        mach: &Machine,
        p: &BigUint,
        m: &BigUint,
        budget: u64,
    ) -> StageResult {
        let (cj, cn) = unpair(m);
        let n_u = cn.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        // Verify the precondition on the constrained prefix, then use the
        // point's own prefix one level deeper: in an ultrametric the closed
        // ball of radius 2^-(n+1) sits inside the open ball of radius 2^-n.
        match Self::compare_prefix(mach, p, &seq_decode(&cj), n_u, budget) {
            Ok((true, c1)) => match Self::prefix_of(mach, p, n_u + 3, budget.saturating_sub(c1)) {
                Ok((prefix, c2)) => StageResult::Emit {
                    value: pair(&seq_encode(&prefix), &nat(n_u + 1)),
                    cost: (c1 + c2).max(1),
                },
                Err(()) => StageResult::NeedsMore,
            },
            Ok((false, _)) => StageResult::NeedsMore,
            Err(_) => StageResult::NeedsMore,
        }
    }

    fn code_valid(&self, _p: &BigUint) -> bool {
        true
    }

    fn seq_kind(&self) -> SeqKind {
        SeqKind::RegularCauchy
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::externs::standard_machine;
    use crate::kernel::{EvalOutcome, GoedelIndex};

    #[test]
    fn seq_codes_round_trip() {
        for c in 0u64..200 {
            let c = nat(c);
            let list = seq_decode(&c);
            // Codes are not canonical (trailing zeros drop), but decoding the
            // re-encoding is stable.
            let c2 = seq_encode(&list);
            assert_eq!(seq_decode(&c2), list);
        }
    }

    #[test]
    fn dense_point_program_computes_extension() {
        let m = standard_machine();
        let list = vec![nat(3), nat(0), nat(7)];
        let p = GoedelIndex(dense_point_program(&list));
        assert_eq!(m.eval(&p, &nat(0), 1000), EvalOutcome::Halted(nat(3)));
        assert_eq!(m.eval(&p, &nat(1), 1000), EvalOutcome::Halted(nat(0)));
        assert_eq!(m.eval(&p, &nat(2), 1000), EvalOutcome::Halted(nat(7)));
        assert_eq!(m.eval(&p, &nat(9), 1000), EvalOutcome::Halted(nat(0)));
    }

    #[test]
    fn ultrametric_on_dense_codes() {
        let a = seq_decode(&nat(17));
        let b = seq_decode(&nat(23));
        let c = seq_decode(&nat(99));
        let ab = delta_dense(&a, &b);
        let bc = delta_dense(&b, &c);
        let ac = delta_dense(&a, &c);
        assert!(ac <= ab.clone().max(bc.clone()), "ultrametric inequality");
    }
}
