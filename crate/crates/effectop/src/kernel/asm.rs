//! Small assembler for building machine programs with labels.
//!
//! The constructions in the space and continuity layers generate program
//! text at runtime (parametrised by indices baked in as constants); this
//! builder keeps the jump arithmetic out of them.

use num_bigint::BigUint;

use super::program::{Inst, Program, ZERO_REG};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Label(usize);

#[derive(Default)]
pub struct Asm {
    insts: Vec<Inst>,
    // label -> resolved pc
    labels: Vec<Option<u16>>,
    // (inst position, label) pairs to patch
    fixups: Vec<(usize, Label)>,
}

impl Asm {
    pub fn new() -> Self {
        Asm::default()
    }

    pub fn fresh_label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn bind(&mut self, l: Label) {
        let pc = u16::try_from(self.insts.len()).expect("program too long");
        self.labels[l.0] = Some(pc);
    }

    pub fn halt(&mut self) {
        self.insts.push(Inst::Halt);
    }

    pub fn halt_zero(&mut self) {
        self.insts.push(Inst::HaltZero);
    }

    pub fn inc(&mut self, r: u8) {
        self.insts.push(Inst::Inc(r));
    }

    /// If R\[r\] == 0 jump to `l`, else decrement and fall through.
    pub fn dec_jz(&mut self, r: u8, l: Label) {
        self.fixups.push((self.insts.len(), l));
        self.insts.push(Inst::DecJz(r, u16::MAX));
    }

    /// Unconditional jump via the reserved always-zero register.
    pub fn jmp(&mut self, l: Label) {
        self.dec_jz(ZERO_REG, l);
    }

    /// Jump to `l` when R\[r\] == 0, preserving R\[r\]. Uses `scratch`.
    pub fn jz(&mut self, r: u8, scratch: u8, l: Label) {
        self.copy(r, scratch);
        self.dec_jz(scratch, l);
    }

    /// Jump to `l` when R\[r\] != 0, preserving R\[r\]. Uses `scratch`.
    pub fn jnz(&mut self, r: u8, scratch: u8, l: Label) {
        let after = self.fresh_label();
        self.jz(r, scratch, after);
        self.jmp(l);
        self.bind(after);
    }

    pub fn copy(&mut self, s: u8, d: u8) {
        self.insts.push(Inst::Copy(s, d));
    }

    pub fn const_reg(&mut self, r: u8, v: BigUint) {
        self.insts.push(Inst::Const(r, v));
    }

    pub fn const_u64(&mut self, r: u8, v: u64) {
        self.const_reg(r, BigUint::from(v));
    }

    /// R\[d\] = ⟨R\[a\], R\[b\]⟩.
    pub fn pair(&mut self, a: u8, b: u8, d: u8) {
        self.insts.push(Inst::Pair(a, b, d));
    }

    pub fn unpair(&mut self, s: u8, d1: u8, d2: u8) {
        self.insts.push(Inst::Unpair(s, d1, d2));
    }

    pub fn ext(&mut self, slot: u16) {
        self.insts.push(Inst::CallExtern(slot));
    }

    pub fn universal(&mut self) {
        self.insts.push(Inst::CallUniversal);
    }

    pub fn bounded(&mut self) {
        self.insts.push(Inst::CallBounded);
    }

    /// R0 = φ_{R\[i\]}(R\[x\]), clobbering R0.
    pub fn call_univ(&mut self, i: u8, x: u8) {
        self.pair(i, x, 0);
        self.universal();
    }

    /// R0 = bounded test of φ_{R\[i\]}(R\[x\]) within R\[s\] steps.
    pub fn call_bounded(&mut self, i: u8, x: u8, s: u8, scratch: u8) {
        self.pair(x, s, scratch);
        self.pair(i, scratch, 0);
        self.bounded();
    }

    pub fn assemble(mut self) -> Program {
        for (pos, l) in self.fixups {
            let target = self.labels[l.0].expect("unbound label");
            if let Inst::DecJz(_, t) = &mut self.insts[pos] {
                *t = target;
            } else {
                unreachable!("fixup on non-jump");
            }
        }
        Program::new(self.insts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::machine::{EvalOutcome, GoedelIndex, Machine};
    use crate::kernel::pairing::nat;

    #[test]
    fn loop_counts_down() {
        // φ(x) = 0 by decrementing x to zero.
        let mut a = Asm::new();
        let top = a.fresh_label();
        let done = a.fresh_label();
        a.bind(top);
        a.dec_jz(0, done);
        a.jmp(top);
        a.bind(done);
        a.halt();
        let m = Machine::new();
        let i = GoedelIndex(a.assemble().encode());
        assert_eq!(m.eval(&i, &nat(5), 100), EvalOutcome::Halted(nat(0)));
    }

    #[test]
    fn jz_preserves_register() {
        // φ(x) = x if x == 0 is false path... returns x unchanged via jnz.
        let mut a = Asm::new();
        let nonzero = a.fresh_label();
        a.jnz(0, 1, nonzero);
        a.halt_zero();
        a.bind(nonzero);
        a.halt();
        let m = Machine::new();
        let i = GoedelIndex(a.assemble().encode());
        assert_eq!(m.eval(&i, &nat(5), 100), EvalOutcome::Halted(nat(5)));
        assert_eq!(m.eval(&i, &nat(0), 100), EvalOutcome::Halted(nat(0)));
    }
}
