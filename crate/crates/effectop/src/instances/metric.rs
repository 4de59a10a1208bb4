//! Constructive metric instances: the dyadic segment [0,1] and discrete ω.
//!
//! Basis index `⟨i, m⟩` is the open ball of radius `2^-m` around the dense
//! point `β_i`; `⟨i, m⟩ ≺_B ⟨j, n⟩ ⟺ δ(β_i, β_j) + 2^-m < 2^-n`, decided
//! with exact rationals.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::kernel::machine::StageResult;
use crate::kernel::pairing::{nat, pair, unpair};
use crate::kernel::Machine;
use crate::spaces::{InstanceSem, Semi, SeqKind};

use super::{dyadic_trunc_code, dyadic_value, pow2_neg, rational_abs_diff, EXP_CLAMP};

fn ball(n: &BigUint) -> (BigUint, BigUint) {
    unpair(n)
}

/// The dyadic rationals in [0,1] with the euclidean metric; point codes
/// are dense codes, so every canonical point is a dyadic rational and
/// constructed indices reach the rest of the completion's computable core.
pub struct DyadicSem;

impl DyadicSem {
    fn delta(i: &BigUint, j: &BigUint) -> BigRational {
        rational_abs_diff(&dyadic_value(i), &dyadic_value(j))
    }
}

impl InstanceSem for DyadicSem {
    fn label(&self) -> &str {
        "dyadic01"
    }

    fn si(&self, m: &BigUint, n: &BigUint) -> bool {
        let (ci, cm) = ball(m);
        let (cj, cn) = ball(n);
        Self::delta(&ci, &cj) + pow2_neg(&cm) < pow2_neg(&cn)
    }

    fn code_membership(&self, _mach: &Machine, p: &BigUint, n: &BigUint, _budget: u64) -> Semi {
        let (cj, cn) = ball(n);
        if rational_abs_diff(&dyadic_value(p), &dyadic_value(&cj)) < pow2_neg(&cn) {
            Semi::Accept { cost: 1 }
        } else {
            Semi::Reject
        }
    }

    fn canon_stage(&self, _mach: &Machine, p: &BigUint, k: &BigUint, _budget: u64) -> StageResult {
        // Stage ⟨prec, 0⟩ is the truncation-centred ball at radius 2^-prec,
        // always in the trace; stage ⟨prec, g+1⟩ tests the raw centre g.
        let (prec, g) = unpair(k);
        let v = dyadic_value(p);
        if g.is_zero() {
            let prec_u = prec.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
            let code = dyadic_trunc_code(&v, prec_u + 1);
            StageResult::Emit {
                value: pair(&code, &prec),
                cost: 1,
            }
        } else {
            let center = g - BigUint::one();
            if rational_abs_diff(&v, &dyadic_value(&center)) < pow2_neg(&prec) {
                StageResult::Emit {
                    value: pair(&center, &prec),
                    cost: 1,
                }
            } else {
                StageResult::Skip { cost: 1 }
            }
        }
    }

    fn basis_candidate(&self, rank: u64) -> BigUint {
        // Rank ⟨m, r⟩ is the ball of radius 2^-m at dense code r, so every
        // basis index occurs and simple centres occur early.
        let (m, r) = unpair(&nat(rank));
        pair(&r, &m)
    }

    fn basis_disjoint(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        let (ci, cm) = ball(m);
        let (cj, cn) = ball(n);
        Some(Self::delta(&ci, &cj) >= pow2_neg(&cm) + pow2_neg(&cn))
    }

    fn basis_subset(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        let (ci, cm) = ball(m);
        let (cj, cn) = ball(n);
        Some(Self::delta(&ci, &cj) + pow2_neg(&cm) <= pow2_neg(&cn))
    }

    fn hull_envelope(&self, n: &BigUint, k: u64) -> Option<BigUint> {
        let (ci, cm) = ball(n);
        let m = cm.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        if k >= m {
            return None;
        }
        // Radius 2^-n' with n' = m-1-k, centred on a truncation of β_i.
        let np = m - 1 - k;
        let code = dyadic_trunc_code(&dyadic_value(&ci), np + 2);
        let a = pair(&code, &nat(np));
        self.si(n, &a).then_some(a)
    }

    fn dense_code(&self, k: u64) -> Option<BigUint> {
        Some(nat(k))
    }

    fn normed_stage(&self, _mach: &Machine, p: &BigUint, a: &BigUint, _budget: u64) -> StageResult {
        let a_u = a.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        let code = dyadic_trunc_code(&dyadic_value(p), a_u + 3);
        StageResult::Emit {
            value: pair(&code, &nat(a_u + 1)),
            cost: 1,
        }
    }

    fn t3_shrink_code(
        &self,
        _mach: &Machine,
        p: &BigUint,
        m: &BigUint,
        _budget: u64,
    ) -> StageResult {
        let (cj, cn) = ball(m);
        let v = dyadic_value(p);
        let gap = pow2_neg(&cn) - rational_abs_diff(&v, &dyadic_value(&cj));
        if gap <= BigRational::zero() {
            return StageResult::NeedsMore;
        }
        let n_u = cn.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        for prec in (n_u + 1)..=(EXP_CLAMP + 2) {
            let margin = pow2_neg(&nat(prec.min(EXP_CLAMP)))
                * BigRational::new(5.into(), 4.into());
            if margin < gap {
                let code = dyadic_trunc_code(&v, prec + 2);
                return StageResult::Emit {
                    value: pair(&code, &nat(prec)),
                    cost: 1,
                };
            }
        }
        StageResult::NeedsMore
    }

    fn code_valid(&self, _p: &BigUint) -> bool {
        true
    }

    fn seq_kind(&self) -> SeqKind {
        SeqKind::RegularCauchy
    }
}

/// ω with the discrete metric: every basis set is a singleton.
pub struct DiscreteSem;

impl DiscreteSem {
    fn delta(i: &BigUint, j: &BigUint) -> BigRational {
        if i == j {
            BigRational::zero()
        } else {
            BigRational::one()
        }
    }
}

impl InstanceSem for DiscreteSem {
    fn label(&self) -> &str {
        "discrete-omega"
    }

    fn si(&self, m: &BigUint, n: &BigUint) -> bool {
        let (ci, cm) = ball(m);
        let (cj, cn) = ball(n);
        Self::delta(&ci, &cj) + pow2_neg(&cm) < pow2_neg(&cn)
    }

    fn code_membership(&self, _mach: &Machine, p: &BigUint, n: &BigUint, _budget: u64) -> Semi {
        let (cj, cn) = ball(n);
        if Self::delta(p, &cj) < pow2_neg(&cn) {
            Semi::Accept { cost: 1 }
        } else {
            Semi::Reject
        }
    }

    fn canon_stage(&self, _mach: &Machine, p: &BigUint, k: &BigUint, _budget: u64) -> StageResult {
        // The trace of p is {⟨p, m⟩ : m ∈ ω} plus coarse balls around p
        // only at radius 1 — with the discrete metric every ball is the
        // singleton of its centre, so emitting ⟨p, k⟩ covers the trace.
        StageResult::Emit {
            value: pair(p, k),
            cost: 1,
        }
    }

    fn basis_candidate(&self, rank: u64) -> BigUint {
        nat(rank)
    }

    fn basis_disjoint(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        let (ci, _) = ball(m);
        let (cj, _) = ball(n);
        Some(ci != cj)
    }

    fn basis_subset(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        // Balls are singletons of their centres.
        let (ci, _) = ball(m);
        let (cj, _) = ball(n);
        Some(ci == cj)
    }

    fn hull_envelope(&self, n: &BigUint, k: u64) -> Option<BigUint> {
        let (ci, cm) = ball(n);
        let m = cm.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP);
        if k >= m {
            return None;
        }
        Some(pair(&ci, &nat(m - 1 - k)))
    }

    fn dense_code(&self, k: u64) -> Option<BigUint> {
        Some(nat(k))
    }

    fn normed_stage(&self, _mach: &Machine, p: &BigUint, a: &BigUint, _budget: u64) -> StageResult {
        StageResult::Emit {
            value: pair(p, &(a + BigUint::one())),
            cost: 1,
        }
    }

    fn t3_shrink_code(
        &self,
        mach: &Machine,
        p: &BigUint,
        m: &BigUint,
        budget: u64,
    ) -> StageResult {
        let (_, cn) = ball(m);
        match self.code_membership(mach, p, m, budget) {
            Semi::Accept { .. } => StageResult::Emit {
                value: pair(p, &(cn + BigUint::one())),
                cost: 1,
            },
            _ => StageResult::NeedsMore,
        }
    }

    fn code_valid(&self, _p: &BigUint) -> bool {
        true
    }

    fn seq_kind(&self) -> SeqKind {
        SeqKind::RegularCauchy
    }
}
