//! The truncated interval domain: closed dyadic subintervals of [0,1] at a
//! fixed grid depth, ordered by reverse inclusion.
//!
//! Way-below is strict containment, with strictness read relative to the
//! boundary of [0,1] (the whole segment is way below everything). The
//! strong inclusion is the reflexive extension of the way-below identity,
//! which keeps normed enumerations available at the grid floor.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::kernel::machine::StageResult;
use crate::kernel::pairing::{nat, pair, unpair};
use crate::kernel::Machine;
use crate::spaces::{InstanceSem, Semi, SeqKind};

/// A grid interval: endpoint numerators over denominator `2^depth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Iv {
    pub lo: u64,
    pub hi: u64,
}

pub struct IntervalSem {
    depth: u32,
    den: u64,
}

impl IntervalSem {
    pub fn new(depth: u32) -> Self {
        IntervalSem {
            depth,
            den: 1u64 << depth,
        }
    }

    pub fn decode(&self, n: &BigUint) -> Iv {
        let (u, v) = unpair(n);
        let u = u.to_u64().unwrap_or(self.den).min(self.den);
        let v = v.to_u64().unwrap_or(self.den).min(self.den);
        Iv {
            lo: u.min(v),
            hi: u.max(v),
        }
    }

    pub fn encode(&self, iv: Iv) -> BigUint {
        pair(&nat(iv.lo), &nat(iv.hi))
    }

    /// `I ≪ J`: J sits in the interior of I relative to [0,1].
    pub fn way_below(&self, i: Iv, j: Iv) -> bool {
        (i.lo < j.lo || (i.lo == 0 && j.lo == 0)) && (j.hi < i.hi || (j.hi == self.den && i.hi == self.den))
    }

    fn expand(&self, p: Iv, a: u64) -> Iv {
        let margin = 1u64 << (self.depth as u64).saturating_sub(a + 1).min(self.depth as u64);
        Iv {
            lo: p.lo.saturating_sub(margin.max(1)),
            hi: (p.hi + margin.max(1)).min(self.den),
        }
    }
}

impl InstanceSem for IntervalSem {
    fn label(&self) -> &str {
        "interval"
    }

    fn si(&self, m: &BigUint, n: &BigUint) -> bool {
        let im = self.decode(m);
        let in_ = self.decode(n);
        self.way_below(in_, im) || im == in_
    }

    fn code_membership(&self, _mach: &Machine, p: &BigUint, n: &BigUint, _budget: u64) -> Semi {
        if self.way_below(self.decode(n), self.decode(p)) {
            Semi::Accept { cost: 1 }
        } else {
            Semi::Reject
        }
    }

    fn canon_stage(&self, mach: &Machine, p: &BigUint, k: &BigUint, budget: u64) -> StageResult {
        let (j, odd) = {
            let two = nat(2);
            ((k / &two), (k % &two))
        };
        if odd == nat(0) {
            self.normed_stage(mach, p, &j, budget)
        } else {
            let cand = self.decode(&j);
            if self.way_below(cand, self.decode(p)) {
                StageResult::Emit {
                    value: self.encode(cand),
                    cost: 1,
                }
            } else {
                StageResult::Skip { cost: 1 }
            }
        }
    }

    fn basis_candidate(&self, rank: u64) -> BigUint {
        nat(rank)
    }

    fn basis_subset(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        // B_m ⊆ B_n ⟺ I_n ≪ I_m or the intervals coincide.
        let im = self.decode(m);
        let in_ = self.decode(n);
        Some(self.way_below(in_, im) || im == in_)
    }

    fn hull_envelope(&self, n: &BigUint, k: u64) -> Option<BigUint> {
        let mut seen = 0u64;
        let bound = ((self.den + 1) * (self.den + 2)).saturating_mul(k + 2);
        for a in 0..bound {
            let a = nat(a);
            if self.si(n, &a) {
                if seen == k {
                    return Some(a);
                }
                seen += 1;
            }
        }
        None
    }

    fn pd_code(&self, n: &BigUint) -> Option<BigUint> {
        Some(self.encode(self.decode(n)))
    }

    fn dense_code(&self, k: u64) -> Option<BigUint> {
        Some(self.encode(self.decode(&nat(k))))
    }

    fn normed_stage(&self, _mach: &Machine, p: &BigUint, a: &BigUint, _budget: u64) -> StageResult {
        let p = self.decode(p);
        let a = a.to_u64().unwrap_or(self.depth as u64);
        StageResult::Emit {
            value: self.encode(self.expand(p, a)),
            cost: 1,
        }
    }

    fn code_valid(&self, _p: &BigUint) -> bool {
        true
    }

    fn seq_kind(&self) -> SeqKind {
        SeqKind::MonotoneIncreasing
    }

    fn finite_basis(&self) -> Option<Vec<BigUint>> {
        if self.depth > 3 {
            return None;
        }
        let mut out = Vec::new();
        for lo in 0..=self.den {
            for hi in lo..=self.den {
                out.push(self.encode(Iv { lo, hi }));
            }
        }
        Some(out)
    }

    fn finite_codes(&self) -> Option<Vec<BigUint>> {
        self.finite_basis()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_segment_is_way_below_everything() {
        let sem = IntervalSem::new(3);
        let bot = Iv { lo: 0, hi: 8 };
        for lo in 0..=8 {
            for hi in lo..=8 {
                assert!(sem.way_below(bot, Iv { lo, hi }));
            }
        }
    }

    #[test]
    fn expansion_chain_shrinks_toward_point() {
        let sem = IntervalSem::new(4);
        let p = Iv { lo: 5, hi: 7 };
        let mut prev: Option<Iv> = None;
        for a in 0..8 {
            let e = sem.expand(p, a);
            assert!(sem.way_below(e, p), "expansion must stay way below p");
            if let Some(q) = prev {
                assert!(
                    sem.way_below(q, e) || q == e,
                    "chain must be ≺-decreasing at a = {a}"
                );
            }
            prev = Some(e);
        }
    }
}
