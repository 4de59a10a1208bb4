//! Register-machine programs and the total Gödel numbering.
//!
//! Programs are byte strings; the index of a program is the byte string read
//! as a little-endian natural with a `0x01` sentinel appended so trailing
//! zero bytes survive the round trip. Decoding is total: every natural
//! denotes a program. Bytes that do not parse as a known instruction decode
//! to [`Inst::HaltZero`], so junk indices denote the constant-zero function
//! rather than being rejected.

use num_bigint::BigUint;

/// Number of addressable registers. Register operands decode modulo this.
pub const REG_COUNT: usize = 64;

/// A register never written by generated code; used for unconditional jumps.
pub const ZERO_REG: u8 = 63;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Inst {
    /// Stop; the value of the computation is register 0.
    Halt,
    /// Stop with value 0. Also the decoding of any malformed instruction.
    HaltZero,
    /// R\[r\] += 1.
    Inc(u8),
    /// If R\[r\] == 0 jump to `target`, else R\[r\] -= 1 and fall through.
    DecJz(u8, u16),
    /// R\[dst\] = R\[src\].
    Copy(u8, u8),
    /// R\[r\] = constant.
    Const(u8, BigUint),
    /// R\[dst\] = ⟨R\[a\], R\[b\]⟩.
    Pair(u8, u8, u8),
    /// (R\[d1\], R\[d2\]) = unpair(R\[src\]).
    Unpair(u8, u8, u8),
    /// R\[0\] = extern_k(R\[0\]); costs 1 + the extern's cost on that input.
    CallExtern(u16),
    /// R\[0\] = ⟨i, x⟩ ⟹ R\[0\] = φ_i(x); divergence propagates, steps are
    /// charged to the caller.
    CallUniversal,
    /// R\[0\] = ⟨i, ⟨x, s⟩⟩ ⟹ R\[0\] = 0 if φ_i(x) does not stop within s
    /// steps, else 1 + (steps taken). The bounded test itself costs
    /// 1 + min(s, steps taken).
    CallBounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub insts: Vec<Inst>,
}

impl Program {
    pub fn new(insts: Vec<Inst>) -> Self {
        Program { insts }
    }

    pub fn len(&self) -> usize {
        self.insts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.insts.is_empty()
    }

    /// Highest extern slot referenced, if any.
    pub fn max_extern_slot(&self) -> Option<u16> {
        self.insts
            .iter()
            .filter_map(|i| match i {
                Inst::CallExtern(k) => Some(*k),
                _ => None,
            })
            .max()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for inst in &self.insts {
            encode_inst(inst, &mut out);
        }
        out
    }

    /// Total decoding of a byte string as an instruction list.
    pub fn from_bytes(bytes: &[u8]) -> Program {
        let mut insts = Vec::new();
        let mut pos = 0usize;
        while pos < bytes.len() {
            let (inst, next) = decode_inst(bytes, pos);
            insts.push(inst);
            pos = next;
        }
        Program { insts }
    }

    /// Gödel index of this program.
    pub fn encode(&self) -> BigUint {
        let mut bytes = self.to_bytes();
        bytes.push(0x01); // sentinel keeps trailing zero bytes
        BigUint::from_bytes_le(&bytes)
    }

    /// Total decoding of an arbitrary natural.
    pub fn decode(index: &BigUint) -> Program {
        let mut bytes = index.to_bytes_le();
        // A zero index yields `[0]` from num-bigint; treat it as empty.
        if bytes == [0] {
            bytes.clear();
        }
        if bytes.last() == Some(&0x01) {
            bytes.pop();
        }
        Program::from_bytes(&bytes)
    }
}

/// Build the parametric program `φ(a) = extern_slot(⟨c, a⟩)`. This fixed
/// four-instruction shape is the machine-level face of host-backed
/// enumerations; searches recognise it via [`match_param_prog`].
pub fn param_prog(slot: u16, c: &BigUint) -> BigUint {
    Program::new(vec![
        Inst::Const(1, c.clone()),
        Inst::Pair(1, 0, 0),
        Inst::CallExtern(slot),
        Inst::Halt,
    ])
    .encode()
}

/// Recognise [`param_prog`] shapes, returning `(slot, c)`.
pub fn match_param_prog(p: &Program) -> Option<(u16, BigUint)> {
    match p.insts.as_slice() {
        [Inst::Const(1, c), Inst::Pair(1, 0, 0), Inst::CallExtern(slot), Inst::Halt] => {
            Some((*slot, c.clone()))
        }
        _ => None,
    }
}

const OP_HALT: u8 = 0;
const OP_INC: u8 = 1;
const OP_DECJZ: u8 = 2;
const OP_COPY: u8 = 3;
const OP_CONST: u8 = 4;
const OP_PAIR: u8 = 5;
const OP_UNPAIR: u8 = 6;
const OP_EXTERN: u8 = 7;
const OP_UNIVERSAL: u8 = 8;
const OP_BOUNDED: u8 = 9;

fn encode_inst(inst: &Inst, out: &mut Vec<u8>) {
    match inst {
        Inst::Halt => out.push(OP_HALT),
        // 10 is the smallest invalid opcode, hence the canonical HaltZero.
        Inst::HaltZero => out.push(10),
        Inst::Inc(r) => {
            out.push(OP_INC);
            out.push(*r);
        }
        Inst::DecJz(r, t) => {
            out.push(OP_DECJZ);
            out.push(*r);
            out.extend_from_slice(&t.to_le_bytes());
        }
        Inst::Copy(s, d) => {
            out.push(OP_COPY);
            out.push(*s);
            out.push(*d);
        }
        Inst::Const(r, v) => {
            out.push(OP_CONST);
            out.push(*r);
            let bytes = if v == &BigUint::default() {
                Vec::new()
            } else {
                v.to_bytes_le()
            };
            let len = u16::try_from(bytes.len()).expect("constant too large to encode");
            out.extend_from_slice(&len.to_le_bytes());
            out.extend_from_slice(&bytes);
        }
        Inst::Pair(a, b, d) => {
            out.push(OP_PAIR);
            out.push(*a);
            out.push(*b);
            out.push(*d);
        }
        Inst::Unpair(s, d1, d2) => {
            out.push(OP_UNPAIR);
            out.push(*s);
            out.push(*d1);
            out.push(*d2);
        }
        Inst::CallExtern(k) => {
            out.push(OP_EXTERN);
            out.extend_from_slice(&k.to_le_bytes());
        }
        Inst::CallUniversal => out.push(OP_UNIVERSAL),
        Inst::CallBounded => out.push(OP_BOUNDED),
    }
}

fn reg(b: u8) -> u8 {
    b % REG_COUNT as u8
}

/// Decode one instruction starting at `pos`; truncated operands decode to
/// `HaltZero` and consume the rest of the input.
fn decode_inst(bytes: &[u8], pos: usize) -> (Inst, usize) {
    let bail = (Inst::HaltZero, bytes.len());
    let op = bytes[pos];
    let mut p = pos + 1;
    let mut take = |n: usize| -> Option<&[u8]> {
        if p + n <= bytes.len() {
            let s = &bytes[p..p + n];
            p += n;
            Some(s)
        } else {
            None
        }
    };
    let inst = match op {
        OP_HALT => Inst::Halt,
        OP_INC => match take(1) {
            Some(s) => Inst::Inc(reg(s[0])),
            None => return bail,
        },
        OP_DECJZ => match take(3) {
            Some(s) => Inst::DecJz(reg(s[0]), u16::from_le_bytes([s[1], s[2]])),
            None => return bail,
        },
        OP_COPY => match take(2) {
            Some(s) => Inst::Copy(reg(s[0]), reg(s[1])),
            None => return bail,
        },
        OP_CONST => {
            let (r, len) = match take(3) {
                Some(s) => (reg(s[0]), u16::from_le_bytes([s[1], s[2]]) as usize),
                None => return bail,
            };
            match take(len) {
                Some(s) => Inst::Const(r, BigUint::from_bytes_le(if s.is_empty() { &[0] } else { s })),
                None => return bail,
            }
        }
        OP_PAIR => match take(3) {
            Some(s) => Inst::Pair(reg(s[0]), reg(s[1]), reg(s[2])),
            None => return bail,
        },
        OP_UNPAIR => match take(3) {
            Some(s) => Inst::Unpair(reg(s[0]), reg(s[1]), reg(s[2])),
            None => return bail,
        },
        OP_EXTERN => match take(2) {
            Some(s) => Inst::CallExtern(u16::from_le_bytes([s[0], s[1]])),
            None => return bail,
        },
        OP_UNIVERSAL => Inst::CallUniversal,
        OP_BOUNDED => Inst::CallBounded,
        _ => Inst::HaltZero,
    };
    (inst, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::pairing::nat;

    #[test]
    fn decode_total_and_encode_section() {
        for n in 0u64..5_000 {
            let p = Program::decode(&nat(n));
            let q = Program::decode(&p.encode());
            assert_eq!(p, q, "decode(encode(decode({n}))) differs");
        }
    }

    #[test]
    fn index_zero_is_empty_program() {
        assert!(Program::decode(&nat(0)).is_empty());
    }

    #[test]
    fn index_ten_is_halt_zero() {
        assert_eq!(Program::decode(&nat(10)).insts, vec![Inst::HaltZero]);
    }

    #[test]
    fn trailing_zero_constants_survive() {
        let p = Program::new(vec![Inst::Const(0, nat(0)), Inst::Halt]);
        assert_eq!(Program::decode(&p.encode()), p);
    }
}
