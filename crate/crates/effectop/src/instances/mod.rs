//! Bundled concrete spaces: the two-point space, finite constructive
//! domains, a truncated rational-interval domain, the dyadic metric space
//! on [0,1], Baire space over machine programs, and discrete ω.

pub mod baire;
pub mod interval;
pub mod metric;
pub mod poset;

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Deserialize;
use thiserror::Error;

use crate::spaces::externs::build_space;
use crate::spaces::{Capabilities, Ctx, Space};

pub use poset::{sierpinski_sem, FinitePoset, PosetParams, PosetSem, SIERPINSKI_BOT, SIERPINSKI_ZERO};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed instance parameters: {0}")]
    BadParams(String),
    #[error("unknown instance kind {0}")]
    UnknownKind(String),
    #[error("parameter parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Sierpinski,
    FiniteDomain,
    Interval,
    Baire,
    Dyadic01,
    DiscreteOmega,
}

impl InstanceKind {
    pub fn parse(s: &str) -> Result<Self, InstanceError> {
        Ok(match s {
            "sierpinski" => InstanceKind::Sierpinski,
            "finite-domain" => InstanceKind::FiniteDomain,
            "interval" => InstanceKind::Interval,
            "baire" => InstanceKind::Baire,
            "dyadic01" => InstanceKind::Dyadic01,
            "discrete-omega" => InstanceKind::DiscreteOmega,
            other => return Err(InstanceError::UnknownKind(other.to_string())),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            InstanceKind::Sierpinski => "sierpinski",
            InstanceKind::FiniteDomain => "finite-domain",
            InstanceKind::Interval => "interval",
            InstanceKind::Baire => "baire",
            InstanceKind::Dyadic01 => "dyadic01",
            InstanceKind::DiscreteOmega => "discrete-omega",
        }
    }
}

#[derive(Debug, Deserialize, Default)]
pub struct IntervalParams {
    pub depth: u32,
}

/// Capability bundles: domains are effectively pointed with the monotone
/// sequence family; metric instances are effectively T₃, co-computable and
/// carry the regular-Cauchy family. Both are recursively separable and get
/// the matching limit algorithm.
fn domain_caps() -> Capabilities {
    Capabilities {
        pointed: true,
        t3: false,
        co_computable: false,
        dense: true,
        limit_algorithm: true,
        maximal_limits: true,
    }
}

fn metric_caps() -> Capabilities {
    Capabilities {
        pointed: false,
        t3: true,
        co_computable: true,
        dense: true,
        limit_algorithm: true,
        maximal_limits: true,
    }
}

pub const DEFAULT_EQUALITY_BUDGET: u64 = 50;

/// Build a bundled instance from its kind and JSON parameters.
pub fn build_instance(
    ctx: &Arc<Ctx>,
    kind: InstanceKind,
    params: &serde_json::Value,
) -> Result<Arc<Space>, InstanceError> {
    let space = match kind {
        InstanceKind::Sierpinski => build_space(
            ctx,
            Arc::new(sierpinski_sem()),
            domain_caps(),
            DEFAULT_EQUALITY_BUDGET,
        ),
        InstanceKind::FiniteDomain => {
            let p: PosetParams = serde_json::from_value(params.clone())?;
            let poset = FinitePoset::from_params(&p)?;
            build_space(
                ctx,
                Arc::new(PosetSem {
                    label: "finite-domain".into(),
                    poset,
                    basis_map: poset::BasisMap::Cyclic,
                }),
                domain_caps(),
                DEFAULT_EQUALITY_BUDGET,
            )
        }
        InstanceKind::Interval => {
            let p: IntervalParams = if params.is_null() {
                IntervalParams { depth: 4 }
            } else {
                serde_json::from_value(params.clone())?
            };
            if p.depth == 0 || p.depth > 12 {
                return Err(InstanceError::BadParams(
                    "interval depth must be within 1..=12".into(),
                ));
            }
            build_space(
                ctx,
                Arc::new(interval::IntervalSem::new(p.depth)),
                domain_caps(),
                DEFAULT_EQUALITY_BUDGET,
            )
        }
        InstanceKind::Baire => build_space(
            ctx,
            Arc::new(baire::BaireSem),
            metric_caps(),
            DEFAULT_EQUALITY_BUDGET,
        ),
        InstanceKind::Dyadic01 => build_space(
            ctx,
            Arc::new(metric::DyadicSem),
            metric_caps(),
            DEFAULT_EQUALITY_BUDGET,
        ),
        InstanceKind::DiscreteOmega => build_space(
            ctx,
            Arc::new(metric::DiscreteSem),
            metric_caps(),
            DEFAULT_EQUALITY_BUDGET,
        ),
    };
    Ok(space)
}

/// Named instances for the CLI and the test suites.
pub fn build_named(ctx: &Arc<Ctx>, name: &str) -> Result<Arc<Space>, InstanceError> {
    match name {
        "sierpinski" | "baire" | "dyadic01" | "discrete-omega" | "interval" => {
            build_instance(ctx, InstanceKind::parse(name)?, &serde_json::Value::Null)
        }
        "chain3" => build_instance(ctx, InstanceKind::FiniteDomain, &chain_params(3)),
        "chain4" => build_instance(ctx, InstanceKind::FiniteDomain, &chain_params(4)),
        "diamond5" => build_instance(
            ctx,
            InstanceKind::FiniteDomain,
            &serde_json::json!({
                "elements": ["bot", "p", "q", "top", "s"],
                "order": [["bot", "p"], ["bot", "q"], ["p", "top"], ["q", "top"], ["bot", "s"]],
                "bottom": "bot"
            }),
        ),
        other => Err(InstanceError::UnknownKind(other.to_string())),
    }
}

pub fn named_instances() -> &'static [&'static str] {
    &[
        "sierpinski",
        "chain3",
        "chain4",
        "diamond5",
        "interval",
        "dyadic01",
        "baire",
        "discrete-omega",
    ]
}

/// Parameters of a linear order `bot = c0 ⊑ c1 ⊑ … ⊑ c(k-1)`.
pub fn chain_params(k: usize) -> serde_json::Value {
    let elements: Vec<String> = (0..k).map(|i| format!("c{i}")).collect();
    let order: Vec<(String, String)> = (0..k - 1)
        .map(|i| (format!("c{i}"), format!("c{}", i + 1)))
        .collect();
    serde_json::json!({
        "elements": elements,
        "order": order,
        "bottom": "c0"
    })
}

// Exact dyadic-rational helpers shared by the metric instances.

/// Exponents are clamped at this value when decoding radii and dense
/// codes, keeping every comparison exact while bounding numerator sizes.
pub const EXP_CLAMP: u64 = 64;

pub fn pow2_neg(m: &BigUint) -> BigRational {
    let e = m.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP) as u32;
    BigRational::new(BigInt::one(), BigInt::from(2u8).pow(e))
}

/// The dense dyadic `β_n`: with `(k, l) = unpair(n)`, the value
/// `min(k, 2^l) / 2^l` (exponent clamped at desk scale).
pub fn dyadic_value(n: &BigUint) -> BigRational {
    let (k, l) = crate::kernel::unpair(n);
    let e = l.to_u64().unwrap_or(EXP_CLAMP).min(EXP_CLAMP) as u32;
    let den = BigUint::from(2u8).pow(e);
    let num = k.min(den.clone());
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Dense code of `floor(v · 2^prec) / 2^prec`.
pub fn dyadic_trunc_code(v: &BigRational, prec: u64) -> BigUint {
    let prec = prec.min(EXP_CLAMP);
    let scale = BigInt::from(2u8).pow(prec as u32);
    let scaled = (v * BigRational::from_integer(scale)).floor().to_integer();
    let k = scaled
        .to_biguint()
        .expect("values in [0,1] scale to nonnegative integers");
    crate::kernel::pair(&k, &BigUint::from(prec))
}

pub fn rational_abs_diff(a: &BigRational, b: &BigRational) -> BigRational {
    (a - b).abs()
}

pub fn rat_zero() -> BigRational {
    BigRational::zero()
}
