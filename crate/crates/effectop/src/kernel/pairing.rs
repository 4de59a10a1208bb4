//! Cantor pairing on arbitrary-size naturals.
//!
//! `pair` is a bijection ω² → ω; every composite argument the machine and
//! the space layer exchange (ball indices, dovetail positions, curried
//! arguments) goes through it, so it has to be exact on big numbers.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// `pair(a, b) = (a + b)(a + b + 1)/2 + b`.
pub fn pair(a: &BigUint, b: &BigUint) -> BigUint {
    let s = a + b;
    (&s * (&s + BigUint::one())) / BigUint::from(2u8) + b
}

/// Inverse of [`pair`].
pub fn unpair(n: &BigUint) -> (BigUint, BigUint) {
    // w = floor((sqrt(8n + 1) - 1) / 2) is the diagonal index.
    let eight_n_plus_one = n * BigUint::from(8u8) + BigUint::one();
    let w = (eight_n_plus_one.sqrt() - BigUint::one()) / BigUint::from(2u8);
    let t = (&w * (&w + BigUint::one())) / BigUint::from(2u8);
    let b = n - &t;
    let a = &w - &b;
    (a, b)
}

pub fn pair_u64(a: u64, b: u64) -> BigUint {
    pair(&BigUint::from(a), &BigUint::from(b))
}

/// Projection helpers matching the component order of [`unpair`].
pub fn proj1(n: &BigUint) -> BigUint {
    unpair(n).0
}

pub fn proj2(n: &BigUint) -> BigUint {
    unpair(n).1
}

/// Right-nested triple ⟨a, ⟨b, c⟩⟩.
pub fn triple(a: &BigUint, b: &BigUint, c: &BigUint) -> BigUint {
    pair(a, &pair(b, c))
}

pub fn untriple(n: &BigUint) -> (BigUint, BigUint, BigUint) {
    let (a, rest) = unpair(n);
    let (b, c) = unpair(&rest);
    (a, b, c)
}

pub fn nat(v: u64) -> BigUint {
    BigUint::from(v)
}

pub fn to_u64_clamped(n: &BigUint) -> u64 {
    u64::try_from(n).unwrap_or(u64::MAX)
}

pub fn is_zero(n: &BigUint) -> bool {
    n.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Hand-checked against (a+b)(a+b+1)/2 + b.
    #[test]
    fn base_and_hand_values() {
        assert_eq!(pair_u64(0, 0), nat(0));
        assert_eq!(pair_u64(1, 1), nat(4));
        assert_eq!(unpair(&nat(4)), (nat(1), nat(1)));
        assert_eq!(pair_u64(2, 1), nat(7));
        assert_eq!(pair_u64(0, 2), nat(5));
    }

    #[test]
    fn round_trip_exhaustive_small() {
        for n in 0u64..10_000 {
            let n = nat(n);
            let (a, b) = unpair(&n);
            assert_eq!(pair(&a, &b), n);
        }
        for a in 0u64..100 {
            for b in 0u64..100 {
                let p = pair_u64(a, b);
                assert_eq!(unpair(&p), (nat(a), nat(b)));
            }
        }
    }

    #[test]
    fn round_trip_big() {
        let a = BigUint::from(u64::MAX) * BigUint::from(u64::MAX);
        let b = BigUint::from(12345678901234567890u64);
        let p = pair(&a, &b);
        assert_eq!(unpair(&p), (a, b));
    }
}
