//! Finite constructive domains: an arbitrary finite poset with least
//! element, Scott topology generated by the up-sets of its elements.
//!
//! Every finite poset with a bottom is constructively d-complete (finite
//! directed sets contain their joins) and is its own basis, with the
//! way-below relation coinciding with the order.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Deserialize;

use crate::kernel::machine::StageResult;
use crate::kernel::pairing::nat;
use crate::kernel::Machine;
use crate::spaces::{InstanceSem, Semi, SeqKind};

use super::InstanceError;

/// Reflexive, antisymmetric, transitive order table with a least element.
#[derive(Debug, Clone)]
pub struct FinitePoset {
    pub elements: Vec<String>,
    pub leq: Vec<Vec<bool>>,
    pub bottom: usize,
}

#[derive(Debug, Deserialize)]
pub struct PosetParams {
    pub elements: Vec<String>,
    /// Pairs `[a, b]` meaning `a ⊑ b`; the reflexive-transitive closure is
    /// taken before validation.
    pub order: Vec<(String, String)>,
    pub bottom: String,
}

impl FinitePoset {
    pub fn from_params(params: &PosetParams) -> Result<FinitePoset, InstanceError> {
        let k = params.elements.len();
        if k == 0 {
            return Err(InstanceError::BadParams("empty element list".into()));
        }
        let index_of = |name: &str| -> Result<usize, InstanceError> {
            params
                .elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| InstanceError::BadParams(format!("unknown element {name}")))
        };
        let mut leq = vec![vec![false; k]; k];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in &params.order {
            leq[index_of(a)?][index_of(b)?] = true;
        }
        // Transitive closure.
        for m in 0..k {
            for a in 0..k {
                for b in 0..k {
                    if leq[a][m] && leq[m][b] {
                        leq[a][b] = true;
                    }
                }
            }
        }
        for a in 0..k {
            for b in 0..k {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(InstanceError::BadParams(format!(
                        "antisymmetry violated between {} and {}",
                        params.elements[a], params.elements[b]
                    )));
                }
            }
        }
        let bottom = index_of(&params.bottom)?;
        for b in 0..k {
            if !leq[bottom][b] {
                return Err(InstanceError::BadParams(format!(
                    "{} is not below {}",
                    params.bottom, params.elements[b]
                )));
            }
        }
        Ok(FinitePoset {
            elements: params.elements.clone(),
            leq,
            bottom,
        })
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn le(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }
}

/// How basis indices name poset elements.
#[derive(Debug, Clone, Copy)]
pub enum BasisMap {
    /// `β_n = elements[n mod size]`.
    Cyclic,
    /// `β_0 = ⊥`, `β_{n+1}` = the other element (the two-point space).
    Sierpinski,
}

pub struct PosetSem {
    pub label: String,
    pub poset: FinitePoset,
    pub basis_map: BasisMap,
}

impl PosetSem {
    pub fn basis_elem(&self, n: &BigUint) -> usize {
        match self.basis_map {
            BasisMap::Cyclic => (n % nat(self.poset.size() as u64))
                .to_usize()
                .expect("mod keeps it small"),
            BasisMap::Sierpinski => {
                if n == &nat(0) {
                    self.poset.bottom
                } else {
                    1 - self.poset.bottom
                }
            }
        }
    }

    fn code_elem(&self, p: &BigUint) -> Option<usize> {
        let p = p.to_usize()?;
        (p < self.poset.size()).then_some(p)
    }

    /// In a finite poset the way-below relation is the order itself.
    fn member(&self, p: usize, n: &BigUint) -> bool {
        self.poset.le(self.basis_elem(n), p)
    }
}

impl InstanceSem for PosetSem {
    fn label(&self) -> &str {
        &self.label
    }

    fn si(&self, m: &BigUint, n: &BigUint) -> bool {
        // m ≺_B n ⟺ β_n ≪ β_m ⟺ β_n ⊑ β_m.
        self.poset.le(self.basis_elem(n), self.basis_elem(m))
    }

    fn code_membership(&self, _mach: &Machine, p: &BigUint, n: &BigUint, _budget: u64) -> Semi {
        match self.code_elem(p) {
            Some(p) if self.member(p, n) => Semi::Accept { cost: 1 },
            Some(_) => Semi::Reject,
            None => Semi::NeedsMore,
        }
    }

    fn canon_stage(&self, _mach: &Machine, p: &BigUint, k: &BigUint, _budget: u64) -> StageResult {
        match self.code_elem(p) {
            Some(pe) if self.member(pe, k) => StageResult::Emit {
                value: k.clone(),
                cost: 1,
            },
            Some(_) => StageResult::Skip { cost: 1 },
            None => StageResult::NeedsMore,
        }
    }

    fn basis_candidate(&self, rank: u64) -> BigUint {
        nat(rank)
    }

    fn basis_subset(&self, m: &BigUint, n: &BigUint) -> Option<bool> {
        Some(self.poset.le(self.basis_elem(n), self.basis_elem(m)))
    }

    fn hull_envelope(&self, n: &BigUint, k: u64) -> Option<BigUint> {
        // k-th a with n ≺_B a, scanning naturals.
        let mut seen = 0u64;
        let period = match self.basis_map {
            BasisMap::Cyclic => self.poset.size() as u64,
            BasisMap::Sierpinski => 2,
        };
        for a in 0..(k + 1) * period {
            if self.si(n, &nat(a)) {
                if seen == k {
                    return Some(nat(a));
                }
                seen += 1;
            }
        }
        None
    }

    fn pd_code(&self, n: &BigUint) -> Option<BigUint> {
        Some(nat(self.basis_elem(n) as u64))
    }

    fn dense_code(&self, k: u64) -> Option<BigUint> {
        Some(nat(k % self.poset.size() as u64))
    }

    fn normed_stage(&self, _mach: &Machine, p: &BigUint, _a: &BigUint, _budget: u64) -> StageResult {
        // The principal basic open of p refines its whole filter; the
        // constant chain is ≺_B-decreasing because ⊑ is reflexive.
        match self.code_elem(p) {
            Some(pe) => {
                let idx = match self.basis_map {
                    BasisMap::Cyclic => nat(pe as u64),
                    BasisMap::Sierpinski => {
                        if pe == self.poset.bottom {
                            nat(0)
                        } else {
                            nat(1)
                        }
                    }
                };
                StageResult::Emit {
                    value: idx,
                    cost: 1,
                }
            }
            None => StageResult::NeedsMore,
        }
    }

    fn code_valid(&self, p: &BigUint) -> bool {
        self.code_elem(p).is_some()
    }

    fn seq_kind(&self) -> SeqKind {
        SeqKind::MonotoneIncreasing
    }

    fn finite_basis(&self) -> Option<Vec<BigUint>> {
        let period = match self.basis_map {
            BasisMap::Cyclic => self.poset.size() as u64,
            BasisMap::Sierpinski => 2,
        };
        Some((0..period).map(nat).collect())
    }

    fn finite_codes(&self) -> Option<Vec<BigUint>> {
        Some((0..self.poset.size() as u64).map(nat).collect())
    }
}

/// The two-point space with `⊥ ⊑ 0`, `β_0 = ⊥`, `β_{n+1} = 0`, so
/// `B_0` is the whole space and `B_{n+1} = {0}`.
pub fn sierpinski_sem() -> PosetSem {
    PosetSem {
        label: "sierpinski".into(),
        poset: FinitePoset {
            elements: vec!["bot".into(), "zero".into()],
            leq: vec![vec![true, true], vec![false, true]],
            bottom: 0,
        },
        basis_map: BasisMap::Sierpinski,
    }
}

/// Point code of ⊥ in the Sierpinski space.
pub const SIERPINSKI_BOT: u64 = 0;
/// Point code of the top point `0` in the Sierpinski space.
pub const SIERPINSKI_ZERO: u64 = 1;
