//! Standard externs present on every machine.
//!
//! Externs are numbered machine citizens: programs reach host functionality
//! only through `CallExtern`, so the recursion theorem can close over them
//! like over any other index. The standard table carries the s-m-n builder
//! and natural-number arithmetic; spaces and maps append their own entries
//! during construction.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::machine::{Extern, ExternOutcome, Machine};
use super::pairing::unpair;
use super::recursion::smn;

/// Slots of the standard externs, fixed by [`standard_machine`].
pub mod slots {
    pub const SMN: u16 = 0;
    pub const LE: u16 = 1;
    pub const EQ: u16 = 2;
    pub const ADD: u16 = 3;
    pub const MONUS: u16 = 4;
    /// Recursion-theorem fixpoint of an index-backed transformer.
    pub const FIX: u16 = 5;
    /// Parametric-program builder: `⟨slot, c⟩ ↦ param_prog(slot, c)`.
    pub const PARAM: u16 = 6;
}

/// A machine with the standard extern table installed.
pub fn standard_machine() -> Arc<Machine> {
    let m = Machine::new();
    assert_eq!(m.register_extern(Arc::new(SmnExtern)), slots::SMN);
    assert_eq!(m.register_extern(Arc::new(LeExtern)), slots::LE);
    assert_eq!(m.register_extern(Arc::new(EqExtern)), slots::EQ);
    assert_eq!(m.register_extern(Arc::new(AddExtern)), slots::ADD);
    assert_eq!(m.register_extern(Arc::new(MonusExtern)), slots::MONUS);
    assert_eq!(m.register_extern(Arc::new(FixExtern)), slots::FIX);
    assert_eq!(m.register_extern(Arc::new(ParamExtern)), slots::PARAM);
    Arc::new(m)
}

macro_rules! pure_extern {
    ($name:ident, $label:expr, $f:expr) => {
        pub struct $name;
        impl Extern for $name {
            fn call(&self, _mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
                if budget < 1 {
                    return ExternOutcome::NeedsMore;
                }
                #[allow(clippy::redundant_closure_call)]
                ExternOutcome::value(($f)(input), 1)
            }
            fn name(&self) -> &str {
                $label
            }
        }
    };
}

pure_extern!(SmnExtern, "smn", |input: &BigUint| {
    let (e, a) = unpair(input);
    smn(&e, &a)
});

pure_extern!(LeExtern, "le", |input: &BigUint| {
    let (a, b) = unpair(input);
    if a <= b {
        BigUint::one()
    } else {
        BigUint::zero()
    }
});

pure_extern!(EqExtern, "eq", |input: &BigUint| {
    let (a, b) = unpair(input);
    if a == b {
        BigUint::one()
    } else {
        BigUint::zero()
    }
});

pure_extern!(AddExtern, "add", |input: &BigUint| {
    let (a, b) = unpair(input);
    a + b
});

pure_extern!(MonusExtern, "monus", |input: &BigUint| {
    let (a, b) = unpair(input);
    if a >= b {
        a - b
    } else {
        BigUint::zero()
    }
});

pure_extern!(FixExtern, "fixpoint", |input: &BigUint| {
    super::recursion::fixpoint_index(input)
});

pure_extern!(ParamExtern, "param-prog", |input: &BigUint| {
    let (slot, c) = unpair(input);
    use num_traits::ToPrimitive;
    let slot = slot.to_u16().unwrap_or(u16::MAX);
    super::program::param_prog(slot, &c)
});

/// Extern wrapping a deterministic host function of cost 1.
pub struct HostFnExtern {
    pub f: Arc<dyn Fn(&Machine, &BigUint) -> BigUint + Send + Sync>,
    pub label: String,
}

impl HostFnExtern {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&Machine, &BigUint) -> BigUint + Send + Sync + 'static,
    ) -> Arc<Self> {
        Arc::new(HostFnExtern {
            f: Arc::new(f),
            label: label.into(),
        })
    }
}

impl Extern for HostFnExtern {
    fn call(&self, mach: &Machine, input: &BigUint, budget: u64) -> ExternOutcome {
        if budget < 1 {
            return ExternOutcome::NeedsMore;
        }
        ExternOutcome::value((self.f)(mach, input), 1)
    }

    fn name(&self) -> &str {
        &self.label
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::asm::Asm;
    use crate::kernel::machine::{EvalOutcome, GoedelIndex};
    use crate::kernel::pairing::{nat, pair};

    #[test]
    fn arithmetic_externs() {
        let m = standard_machine();
        let call = |slot: u16, input: BigUint| {
            let mut a = Asm::new();
            a.ext(slot);
            a.halt();
            m.eval(&GoedelIndex(a.assemble().encode()), &input, 100)
        };
        assert_eq!(
            call(slots::ADD, pair(&nat(3), &nat(4))),
            EvalOutcome::Halted(nat(7))
        );
        assert_eq!(
            call(slots::MONUS, pair(&nat(3), &nat(4))),
            EvalOutcome::Halted(nat(0))
        );
        assert_eq!(
            call(slots::LE, pair(&nat(3), &nat(4))),
            EvalOutcome::Halted(nat(1))
        );
        assert_eq!(
            call(slots::EQ, pair(&nat(4), &nat(4))),
            EvalOutcome::Halted(nat(1))
        );
    }
}
