//! Named program catalog: mnemonic sources, declared totality, pinned
//! indices. Tests and the counterexample demos address machine programs
//! through this file rather than by raw index.

use num_bigint::BigUint;
use num_traits::Num;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::asm::Asm;
use super::program::{Inst, Program};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad mnemonic in {name}: {detail}")]
    BadMnemonic { name: String, detail: String },
    #[error("program {name}: expected index {expected}, encoded to {actual}")]
    IndexMismatch {
        name: String,
        expected: String,
        actual: String,
    },
    #[error("duplicate program name {0}")]
    DuplicateName(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogFile {
    pub schema: u32,
    pub programs: Vec<CatalogProgram>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CatalogProgram {
    pub name: String,
    pub source: String,
    pub total: bool,
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_index: Option<String>,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub program: Program,
    pub index: BigUint,
    pub total: bool,
    pub description: String,
}

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn get(&self, name: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn index_of(&self, name: &str) -> Option<BigUint> {
        self.get(name).map(|e| e.index.clone())
    }

    pub fn from_json(json: &str) -> Result<Catalog, CatalogError> {
        let file: CatalogFile = serde_json::from_str(json)?;
        let mut entries = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for p in file.programs {
            if !seen.insert(p.name.clone()) {
                return Err(CatalogError::DuplicateName(p.name));
            }
            let program = parse_mnemonics(&p.source).map_err(|detail| {
                CatalogError::BadMnemonic {
                    name: p.name.clone(),
                    detail,
                }
            })?;
            let index = program.encode();
            if let Some(expected) = &p.expected_index {
                let want = BigUint::from_str_radix(expected, 10).map_err(|e| {
                    CatalogError::BadMnemonic {
                        name: p.name.clone(),
                        detail: format!("bad expected_index: {e}"),
                    }
                })?;
                if want != index {
                    return Err(CatalogError::IndexMismatch {
                        name: p.name,
                        expected: expected.clone(),
                        actual: index.to_string(),
                    });
                }
            }
            entries.push(CatalogEntry {
                name: p.name,
                program,
                index,
                total: p.total,
                description: p.description,
            });
        }
        Ok(Catalog { entries })
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            schema: 1,
            programs: self
                .entries
                .iter()
                .map(|e| CatalogProgram {
                    name: e.name.clone(),
                    source: print_mnemonics(&e.program),
                    total: e.total,
                    description: e.description.clone(),
                    expected_index: Some(e.index.to_string()),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serialization")
    }
}

/// The bundled catalog, also shipped as `data/catalog.json`.
pub fn default_catalog() -> Catalog {
    let mut entries: Vec<CatalogEntry> = Vec::new();
    let mut add = |name: &str, total: bool, description: &str, program: Program| {
        entries.push(CatalogEntry {
            name: name.to_string(),
            index: program.encode(),
            program,
            total,
            description: description.to_string(),
        });
    };

    add("identity", true, "phi(a) = a", {
        Program::new(vec![Inst::Halt])
    });
    add("zero", true, "phi(a) = 0", {
        Program::new(vec![Inst::HaltZero])
    });
    add("succ", true, "phi(a) = a + 1", {
        Program::new(vec![Inst::Inc(0), Inst::Halt])
    });
    add("const7", true, "phi(a) = 7", {
        let mut a = Asm::new();
        a.const_u64(0, 7);
        a.halt();
        a.assemble()
    });
    add("double", true, "phi(a) = 2a", {
        let mut a = Asm::new();
        let top = a.fresh_label();
        let done = a.fresh_label();
        a.bind(top);
        a.dec_jz(0, done);
        a.inc(1);
        a.inc(1);
        a.jmp(top);
        a.bind(done);
        a.copy(1, 0);
        a.halt();
        a.assemble()
    });
    add("loop-forever", false, "diverges on every input", {
        Program::new(vec![Inst::DecJz(crate::kernel::program::ZERO_REG, 0)])
    });
    add(
        "halt-iff-even",
        false,
        "halts exactly on even inputs, with value 0",
        {
            let mut a = Asm::new();
            let top = a.fresh_label();
            let even = a.fresh_label();
            let odd = a.fresh_label();
            a.bind(top);
            a.jz(0, 1, even);
            a.dec_jz(0, odd); // r0 >= 1 here, so this decrements
            a.jz(0, 1, odd);
            a.dec_jz(0, even); // r0 >= 1 here, so this decrements
            a.jmp(top);
            a.bind(odd);
            a.jmp(odd);
            a.bind(even);
            a.halt();
            a.assemble()
        },
    );
    add("add-projector", true, "phi(<a, b>) = a + b", {
        let mut a = Asm::new();
        let top = a.fresh_label();
        let done = a.fresh_label();
        a.unpair(0, 1, 2);
        a.bind(top);
        a.dec_jz(1, done);
        a.inc(2);
        a.jmp(top);
        a.bind(done);
        a.copy(2, 0);
        a.halt();
        a.assemble()
    });
    add("proj1", true, "phi(<a, b>) = a", {
        let mut a = Asm::new();
        a.unpair(0, 1, 2);
        a.copy(1, 0);
        a.halt();
        a.assemble()
    });
    add("proj2", true, "phi(<a, b>) = b", {
        let mut a = Asm::new();
        a.unpair(0, 1, 2);
        a.copy(2, 0);
        a.halt();
        a.assemble()
    });
    add(
        "diverge-on-zero",
        false,
        "phi(a) = a for a > 0, diverges at 0",
        {
            let mut a = Asm::new();
            let pos = a.fresh_label();
            let spin = a.fresh_label();
            a.jnz(0, 1, pos);
            a.bind(spin);
            a.jmp(spin);
            a.bind(pos);
            a.halt();
            a.assemble()
        },
    );
    add("pair-self", true, "phi(a) = <a, a>", {
        let mut a = Asm::new();
        a.pair(0, 0, 0);
        a.halt();
        a.assemble()
    });

    Catalog { entries }
}

fn parse_mnemonics(source: &str) -> Result<Program, String> {
    let mut insts = Vec::new();
    for raw in source.split(&[';', '\n'][..]) {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let op = parts.next().expect("nonempty line");
        let mut arg = |what: &str| -> Result<String, String> {
            parts
                .next()
                .map(str::to_string)
                .ok_or_else(|| format!("{op}: missing {what}"))
        };
        let inst = match op {
            "halt" => Inst::Halt,
            "haltz" => Inst::HaltZero,
            "inc" => Inst::Inc(parse_u8(&arg("register")?)?),
            "decjz" => Inst::DecJz(parse_u8(&arg("register")?)?, parse_u16(&arg("target")?)?),
            "copy" => Inst::Copy(parse_u8(&arg("src")?)?, parse_u8(&arg("dst")?)?),
            "const" => Inst::Const(
                parse_u8(&arg("register")?)?,
                BigUint::from_str_radix(&arg("value")?, 10).map_err(|e| e.to_string())?,
            ),
            "pair" => Inst::Pair(
                parse_u8(&arg("a")?)?,
                parse_u8(&arg("b")?)?,
                parse_u8(&arg("dst")?)?,
            ),
            "unpair" => Inst::Unpair(
                parse_u8(&arg("src")?)?,
                parse_u8(&arg("d1")?)?,
                parse_u8(&arg("d2")?)?,
            ),
            "ext" => Inst::CallExtern(parse_u16(&arg("slot")?)?),
            "univ" => Inst::CallUniversal,
            "bounded" => Inst::CallBounded,
            other => return Err(format!("unknown mnemonic {other}")),
        };
        insts.push(inst);
    }
    Ok(Program::new(insts))
}

fn print_mnemonics(p: &Program) -> String {
    p.insts
        .iter()
        .map(|i| match i {
            Inst::Halt => "halt".to_string(),
            Inst::HaltZero => "haltz".to_string(),
            Inst::Inc(r) => format!("inc {r}"),
            Inst::DecJz(r, t) => format!("decjz {r} {t}"),
            Inst::Copy(s, d) => format!("copy {s} {d}"),
            Inst::Const(r, v) => format!("const {r} {v}"),
            Inst::Pair(a, b, d) => format!("pair {a} {b} {d}"),
            Inst::Unpair(s, a, b) => format!("unpair {s} {a} {b}"),
            Inst::CallExtern(k) => format!("ext {k}"),
            Inst::CallUniversal => "univ".to_string(),
            Inst::CallBounded => "bounded".to_string(),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn parse_u8(s: &str) -> Result<u8, String> {
    s.parse::<u8>().map_err(|e| e.to_string())
}

fn parse_u16(s: &str) -> Result<u16, String> {
    s.parse::<u16>().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::externs::standard_machine;
    use crate::kernel::machine::{EvalOutcome, GoedelIndex};
    use crate::kernel::pairing::{nat, pair};

    #[test]
    fn round_trip_through_json() {
        let cat = default_catalog();
        let json = cat.to_json();
        let back = Catalog::from_json(&json).expect("parse generated catalog");
        assert_eq!(back.entries.len(), cat.entries.len());
        for (a, b) in cat.entries.iter().zip(back.entries.iter()) {
            assert_eq!(a.index, b.index, "{} index drifted", a.name);
        }
    }

    #[test]
    fn catalog_semantics() {
        let m = standard_machine();
        let cat = default_catalog();
        let idx = |n: &str| GoedelIndex(cat.index_of(n).unwrap());
        assert_eq!(m.eval(&idx("const7"), &nat(3), 100), EvalOutcome::Halted(nat(7)));
        assert_eq!(m.eval(&idx("succ"), &nat(3), 100), EvalOutcome::Halted(nat(4)));
        assert_eq!(m.eval(&idx("double"), &nat(5), 100), EvalOutcome::Halted(nat(10)));
        assert_eq!(
            m.eval(&idx("add-projector"), &pair(&nat(5), &nat(3)), 1000),
            EvalOutcome::Halted(nat(8))
        );
        assert!(m.eval(&idx("halt-iff-even"), &nat(4), 1000).is_halted());
        assert!(!m.eval(&idx("halt-iff-even"), &nat(5), 1000).is_halted());
        assert!(!m.eval(&idx("loop-forever"), &nat(0), 1000).is_halted());
        assert!(!m.eval(&idx("diverge-on-zero"), &nat(0), 1000).is_halted());
        assert!(m.eval(&idx("diverge-on-zero"), &nat(2), 1000).is_halted());
    }

    #[test]
    fn declared_totals_halt_on_samples() {
        let m = standard_machine();
        for e in default_catalog().entries {
            if e.total {
                for a in 0u64..20 {
                    assert!(
                        m.halts_within(&GoedelIndex(e.index.clone()), &pair(&nat(a), &nat(a)), 100_000)
                            || m.halts_within(&GoedelIndex(e.index.clone()), &nat(a), 100_000),
                        "{} not total at {a}",
                        e.name
                    );
                }
            }
        }
    }
}
