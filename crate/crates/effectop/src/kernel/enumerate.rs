//! Dovetailed enumeration of c.e. sets: `W_i` as a budgeted prefix.

use num_bigint::BigUint;

use super::machine::{GoedelIndex, Machine, MemoResult};
use super::pairing::{nat, to_u64_clamped, unpair};

/// Enumerate `{ a : φ_i(a)↓_s for some (a, s) with ⟨a, s⟩ < budget }` in the
/// Cantor dovetail order, each element listed once at its first witness.
///
/// The enumeration is monotone in `budget` and complete: every `a ∈ W_i`
/// with halting step count `s` appears once `budget > ⟨a, s⟩`.
pub fn we_enumerate(mach: &Machine, i: &GoedelIndex, budget: u64) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = Vec::new();
    let mut seen: std::collections::HashSet<BigUint> = std::collections::HashSet::new();
    for n in 0..budget {
        let (a, s) = unpair(&nat(n));
        if seen.contains(&a) {
            continue;
        }
        let s = to_u64_clamped(&s);
        if let MemoResult::Halted { steps, .. } = mach.probe(i.value(), &a, s) {
            if steps <= s {
                seen.insert(a.clone());
                out.push(a);
            }
        }
    }
    out
}

/// Whether `a` shows up in the budgeted enumeration of `W_i`.
pub fn we_contains(mach: &Machine, i: &GoedelIndex, a: &BigUint, budget: u64) -> bool {
    if let MemoResult::Halted { steps, .. } = mach.probe(i.value(), a, budget) {
        // a ∈ W_i with witness s appears once budget > ⟨a, s⟩.
        super::pairing::pair(a, &nat(steps)) < nat(budget)
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::asm::Asm;
    use crate::kernel::externs::standard_machine;
    use crate::kernel::pairing::pair;
    use crate::kernel::program::{Inst, Program, ZERO_REG};

    #[test]
    fn loop_forever_enumerates_nothing() {
        let m = standard_machine();
        let i = GoedelIndex(Program::new(vec![Inst::DecJz(ZERO_REG, 0)]).encode());
        assert!(we_enumerate(&m, &i, 100_000).is_empty());
    }

    #[test]
    fn identity_enumerates_growing_prefix() {
        let m = standard_machine();
        let id = GoedelIndex(nat(0)); // empty program
        let small = we_enumerate(&m, &id, 1_000);
        let large = we_enumerate(&m, &id, 10_000);
        assert!(small.len() < large.len());
        assert_eq!(&large[..small.len()], &small[..]);
        // Identity halts in 0 steps, so a appears exactly when ⟨a,0⟩ < budget.
        for a in 0u64..30 {
            let appears = large.contains(&nat(a));
            let expected = pair(&nat(a), &nat(0)) < nat(10_000);
            assert_eq!(appears, expected, "a = {a}");
        }
    }

    #[test]
    fn dovetail_complete_for_halting_witness() {
        let m = standard_machine();
        // Halts after a few steps on every input.
        let mut a = Asm::new();
        a.inc(1);
        a.inc(1);
        a.halt_zero();
        let i = GoedelIndex(a.assemble().encode());
        let (_, steps) = m.eval_counted(&i, &nat(5), 100);
        let witness = pair(&nat(5), &nat(steps));
        let budget = to_u64_clamped(&witness) + 1;
        assert!(we_enumerate(&m, &i, budget).contains(&nat(5)));
    }
}
