//! Parametrisation and self-reference: s-m-n and the Kleene fixed point.

use std::sync::Arc;

use num_bigint::BigUint;

use super::asm::Asm;
use super::externs::{slots, HostFnExtern};
use super::machine::Machine;

/// `smn(i, a)`: an index `j` with `φ_j(b) = φ_i(⟨a, b⟩)` for all `b`.
///
/// The construction is a fixed six-instruction wrapper, so the parametrised
/// program runs within a small constant overhead of the original.
pub fn smn(i: &BigUint, a: &BigUint) -> BigUint {
    let mut asm = Asm::new();
    asm.const_reg(1, a.clone());
    asm.pair(1, 0, 0); // R0 = ⟨a, b⟩
    asm.const_reg(1, i.clone());
    asm.pair(1, 0, 0); // R0 = ⟨i, ⟨a, b⟩⟩
    asm.universal();
    asm.halt();
    asm.assemble().encode()
}

/// A total transformer on indices, either itself an index or a host function
/// that is lifted into the extern table on use.
#[derive(Clone)]
pub enum Transformer {
    Index(BigUint),
    Host {
        label: String,
        f: Arc<dyn Fn(&BigUint) -> BigUint + Send + Sync>,
    },
}

impl Transformer {
    pub fn host(
        label: impl Into<String>,
        f: impl Fn(&BigUint) -> BigUint + Send + Sync + 'static,
    ) -> Self {
        Transformer::Host {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn apply(&self, mach: &Machine, e: &BigUint, fuel: u64) -> Option<BigUint> {
        match self {
            Transformer::Index(i) => mach
                .eval(&super::machine::GoedelIndex(i.clone()), e, fuel)
                .halted_value()
                .cloned(),
            Transformer::Host { f, .. } => Some(f(e)),
        }
    }
}

/// Kleene's recursion theorem for an index-backed transformer: an index
/// `n` with `φ_n = φ_{f(n)}`, built purely from program text.
///
/// With `d(e) = smn(e, e)`, take `v` computing `ψ(⟨e, x⟩) = φ_{f(d(e))}(x)`
/// and return `d(v)`.
pub fn fixpoint_index(f_index: &BigUint) -> BigUint {
    let mut a = Asm::new();
    a.unpair(0, 1, 2); // R1 = e, R2 = x
    a.pair(1, 1, 0); // R0 = ⟨e, e⟩
    a.ext(slots::SMN); // R0 = d(e)
    a.const_reg(1, f_index.clone());
    a.pair(1, 0, 0);
    a.universal(); // R0 = φ_f(d(e))
    a.pair(0, 2, 0); // R0 = ⟨f(d(e)), x⟩
    a.universal();
    a.halt();
    let v = a.assemble().encode();
    smn(&v, &v)
}

/// Kleene's recursion theorem; host transformers are lifted into the
/// extern table first.
pub fn fixpoint(mach: &Machine, f: &Transformer) -> BigUint {
    match f {
        Transformer::Index(fi) => fixpoint_index(fi),
        Transformer::Host { label, f } => {
            let f = f.clone();
            let slot = mach.register_extern(HostFnExtern::new(label.clone(), move |_m, e| f(e)));
            let mut a = Asm::new();
            a.ext(slot);
            a.halt();
            fixpoint_index(&a.assemble().encode())
        }
    }
}

/// Index of the program `φ(b) = c` for every `b`.
pub fn const_index(c: &BigUint) -> BigUint {
    let mut a = Asm::new();
    a.const_reg(0, c.clone());
    a.halt();
    a.assemble().encode()
}

/// A stock of total transformers used by the kernel soundness checks.
pub fn transformer_catalog() -> Vec<(String, Transformer)> {
    let mut out: Vec<(String, Transformer)> = Vec::new();
    out.push((
        "host-identity".into(),
        Transformer::host("tf-identity", |e| e.clone()),
    ));
    out.push((
        "host-quine-const".into(),
        Transformer::host("tf-quine-const", |e| const_index(e)),
    ));
    out.push((
        "host-smn-self".into(),
        Transformer::host("tf-smn-self", |e| smn(e, e)),
    ));
    for k in [0u64, 1, 7, 23] {
        let c = BigUint::from(k);
        out.push((
            format!("host-smn-curry-{k}"),
            Transformer::host(format!("tf-smn-curry-{k}"), move |e| smn(e, &c)),
        ));
    }
    for k in [0u64, 3, 11] {
        let c = BigUint::from(k);
        out.push((
            format!("host-const-{k}"),
            Transformer::host(format!("tf-const-{k}"), move |_| const_index(&c)),
        ));
    }
    // Index-backed transformers: plain programs mapping indices to indices.
    out.push(("prog-identity".into(), {
        let mut a = Asm::new();
        a.halt();
        Transformer::Index(a.assemble().encode())
    }));
    out.push(("prog-succ".into(), {
        let mut a = Asm::new();
        a.inc(0);
        a.halt();
        Transformer::Index(a.assemble().encode())
    }));
    for k in [2u64, 5, 9] {
        let mut a = Asm::new();
        for _ in 0..k {
            a.inc(0);
        }
        a.halt();
        out.push((format!("prog-add-{k}"), Transformer::Index(a.assemble().encode())));
    }
    // φ_f(e) = smn(c, e) computed in-machine through the smn extern.
    for c in [0u64, 4, 10, 64, 200] {
        let mut a = Asm::new();
        a.const_u64(1, c);
        a.pair(1, 0, 0);
        a.ext(slots::SMN);
        a.halt();
        out.push((
            format!("prog-smn-paramed-{c}"),
            Transformer::Index(a.assemble().encode()),
        ));
    }
    out.push(("prog-zero".into(), {
        let mut a = Asm::new();
        a.halt_zero();
        Transformer::Index(a.assemble().encode())
    }));
    out
}
