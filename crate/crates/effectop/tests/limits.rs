//! Sequence families, delaying, limit algorithms, convergence modules and
//! membership propagation, checked against finite tables and exact
//! rationals.

use num_bigint::BigUint;
use num_rational::BigRational;

use effectop::instances::{build_named, dyadic_value, pow2_neg, rational_abs_diff};
use effectop::kernel::machine::StageResult;
use effectop::kernel::{nat, pair, unpair, GoedelIndex};
use effectop::seqlim::{
    conv_module_from_enum, delay, dyadic_code_of, li_metric, li_pointed, propagate_membership,
    seq_const, seq_dyadic_approach, seq_family, seq_from_enum, seq_table, PropagationVerdict,
    SeqError,
};
use effectop::spaces::externs::WindexDriver;
use effectop::spaces::stage::DriveOutcome;
use effectop::spaces::{
    hull_refute, indistinguishable_at, is_member, limit_pass, normed_enum, spec_leq, CeSet, Ctx,
    HullVerdict, Obs, SpecLeqVerdict,
};

const FUEL: u64 = 400_000;

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn collect_emissions(
    sp: &effectop::spaces::Space,
    windex: &BigUint,
    max: usize,
    budget: u64,
) -> Vec<BigUint> {
    let driver = WindexDriver::new(sp.machine(), sp.ctx.range_member, windex);
    let mut out = Vec::new();
    let outcome = driver.drive(budget, |m| {
        out.push(m.clone());
        (out.len() >= max).then_some(())
    });
    let _ = matches!(outcome, DriveOutcome::Accepted { .. });
    out
}

#[test]
fn li_pointed_recovers_chain_limits() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let bot = sp.cp(&nat(0));
    let zero = sp.cp(&nat(1));
    let m = seq_table(&sp, vec![bot.clone(), zero.clone(), zero.clone()]);
    let li = li_pointed(&sp, m.value()).unwrap();
    assert_eq!(is_member(&sp, &li, &nat(1), FUEL), Obs::Observed);
    assert!(
        indistinguishable_at(&sp, &li, &zero, 10, FUEL).is_none(),
        "limit of ⊥,0,0,… must observe like 0"
    );

    // Eventually constant sequences map to the constant's observations.
    let chain = build_named(&ctx, "chain3").unwrap();
    let codes = chain.sem.finite_codes().unwrap();
    for code in &codes {
        let p = chain.cp(code);
        let m = seq_table(&chain, vec![chain.cp(&codes[0]), p.clone(), p.clone()]);
        let li = li_pointed(&chain, m.value()).unwrap();
        assert!(
            indistinguishable_at(&chain, &li, &p, 10, FUEL).is_none(),
            "eventually-constant sequence at {code} has wrong limit"
        );
    }
}

#[test]
fn li_pointed_interleavings_agree() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "chain4").unwrap();
    let codes = sp.sem.finite_codes().unwrap();
    let cp: Vec<BigUint> = codes.iter().map(|c| sp.cp(c)).collect();
    let m1 = seq_table(
        &sp,
        vec![cp[0].clone(), cp[1].clone(), cp[2].clone(), cp[3].clone()],
    );
    let m2 = seq_table(
        &sp,
        vec![
            cp[0].clone(),
            cp[0].clone(),
            cp[1].clone(),
            cp[1].clone(),
            cp[2].clone(),
            cp[3].clone(),
        ],
    );
    let l1 = li_pointed(&sp, m1.value()).unwrap();
    let l2 = li_pointed(&sp, m2.value()).unwrap();
    assert!(
        indistinguishable_at(&sp, &l1, &l2, 10, FUEL).is_none(),
        "interleavings of one chain must have indistinguishable limits"
    );
}

#[test]
fn li_metric_constant_and_approaching() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "dyadic01").unwrap();
    let target = half();

    let const_seq = seq_const(&sp, &sp.cp(&dyadic_code_of(&target).unwrap()));
    let approach = seq_dyadic_approach(&sp, target.clone(), true, 2).unwrap();

    for (name, m) in [("constant", const_seq), ("approaching", approach)] {
        let li = li_metric(&sp, m.value()).unwrap();
        let emissions = collect_emissions(&sp, &li, usize::MAX, 3_000_000);
        assert!(!emissions.is_empty(), "{name}: no enumerated balls");
        let mut finest = 0u64;
        for d in &emissions {
            let (c, r) = unpair(d);
            let radius_exp = effectop::kernel::pairing::to_u64_clamped(&r);
            finest = finest.max(radius_exp);
            // Exact rational oracle: every enumerated ball contains 1/2.
            assert!(
                rational_abs_diff(&dyadic_value(&c), &target) < pow2_neg(&r),
                "{name}: enumerated ball misses the limit"
            );
        }
        assert!(
            finest >= 10,
            "{name}: expected some radius below 2^-10, finest exponent {finest} over {} balls",
            emissions.len()
        );
        // Membership pipeline agrees: li lies in a tight ball around 1/2.
        let tight = pair(&dyadic_code_of(&target).unwrap(), &nat(10));
        assert_eq!(
            is_member(&sp, &li, &tight, 3_000_000),
            Obs::Observed,
            "{name}: limit not observed within radius 2^-10"
        );
    }
}

#[test]
fn li_metric_enumeration_satisfies_paper_identity() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "dyadic01").unwrap();
    let m = seq_dyadic_approach(&sp, half(), true, 2).unwrap();
    let li = li_metric(&sp, m.value()).unwrap();
    let emissions = collect_emissions(&sp, &li, 20, 3_000_000);
    assert!(emissions.len() >= 10);
    for d in &emissions {
        let (i, a_prev) = unpair(d);
        let a = &a_prev + nat(1);
        // Oracle: some ball in the a-th element's canonical trace strongly
        // includes into ⟨i, a⟩.
        let elt = sp.seq_at(m.value(), effectop::kernel::pairing::to_u64_clamped(&a), FUEL)
            .expect("sequence total");
        let code = sp.decode_canonical(&elt).expect("canonical element");
        let target = pair(&i, &a);
        let mut found = false;
        for k in 0..400u64 {
            if let StageResult::Emit { value, .. } =
                sp.sem.canon_stage(sp.machine(), &code, &nat(k), 10_000)
            {
                if sp.si_host(&value, &target) {
                    found = true;
                    break;
                }
            }
        }
        assert!(found, "no enumerated d ≺ ⟨i, a⟩ for emission {d}");
    }
}

#[test]
fn delay_preserves_monotone_sequences() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "chain3").unwrap();
    let fam = seq_family(&sp);
    let codes = sp.sem.finite_codes().unwrap();
    let cp: Vec<BigUint> = codes.iter().map(|c| sp.cp(c)).collect();
    let m = seq_table(&sp, vec![cp[0].clone(), cp[1].clone(), cp[2].clone()]);
    let d = delay(&fam, &sp, m.value(), 1, 3).unwrap();
    // Elementwise shape of the delaying transform.
    for a in 0..10u64 {
        let expect = if a < 1 {
            sp.seq_at(m.value(), a, FUEL)
        } else if a <= 1 + 3 {
            sp.seq_at(m.value(), 1, FUEL)
        } else {
            sp.seq_at(m.value(), a - 3 + 1, FUEL)
        }
        .unwrap();
        assert_eq!(sp.seq_at(d.value(), a, FUEL).unwrap(), expect, "at {a}");
    }
    // Still monotone: consecutive elements never separate downward.
    for a in 0..8u64 {
        let ya = sp.seq_at(d.value(), a, FUEL).unwrap();
        let yb = sp.seq_at(d.value(), a + 1, FUEL).unwrap();
        assert_eq!(
            spec_leq(&sp, &ya, &yb, 10, FUEL),
            SpecLeqVerdict::ConsistentSoFar
        );
    }
    // Same limit observations as the undelayed chain.
    let l1 = li_pointed(&sp, m.value()).unwrap();
    let l2 = li_pointed(&sp, d.value()).unwrap();
    assert!(indistinguishable_at(&sp, &l1, &l2, 10, FUEL).is_none());
    // Boundary case k = 0: pure freeze-then-resume reindexing.
    let d0 = delay(&fam, &sp, m.value(), 1, 0).unwrap();
    for a in 0..8u64 {
        let expect = if a < 1 {
            sp.seq_at(m.value(), a, FUEL)
        } else if a == 1 {
            sp.seq_at(m.value(), 1, FUEL)
        } else {
            sp.seq_at(m.value(), a + 1, FUEL)
        }
        .unwrap();
        assert_eq!(sp.seq_at(d0.value(), a, FUEL).unwrap(), expect);
    }
}

#[test]
fn delay_rejected_for_regular_cauchy() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "dyadic01").unwrap();
    let fam = seq_family(&sp);
    let m = seq_dyadic_approach(&sp, half(), true, 2).unwrap();
    match delay(&fam, &sp, m.value(), 1, 5) {
        Err(SeqError::DelayingNotAllowed(_)) => {}
        other => panic!("expected rejection, got {other:?}"),
    }
    // Counterexample radius check: repeating y_1 for five steps breaks the
    // regular gap bound δ(y'_4, y'_n) < 2^-4 because δ(y_1, 1/2) = 2^-3.
    let y1 = rational_abs_diff(&(half() - pow2_neg(&nat(3))), &half());
    assert!(y1 >= pow2_neg(&nat(4)));
}

#[test]
fn convergence_module_from_enum() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "dyadic01").unwrap();
    let three_eighths = dyadic_code_of(&BigRational::new(3.into(), 8.into())).unwrap();
    let point = sp.cp(&three_eighths);
    let m = normed_enum(&sp, &point);
    let module = conv_module_from_enum(&sp, m.value());

    let inside = pair(&three_eighths, &nat(2));
    let cutoff = module
        .query(&sp, &inside, FUEL)
        .expect("limit is in B_n, cutoff must exist");
    // All later elements of the associated point sequence lie inside,
    // checked with exact rationals on the enumerated centres.
    let p = seq_from_enum(&sp, m.value());
    for c in cutoff..cutoff + 20 {
        let elt = sp.seq_at(p.value(), c, FUEL).expect("sequence total");
        let code = sp.decode_canonical(&elt).expect("canonical centre");
        assert!(
            rational_abs_diff(&dyadic_value(&code), &BigRational::new(3.into(), 8.into()))
                < pow2_neg(&nat(2)),
            "element {c} outside the ball"
        );
    }

    // A ball avoiding the limit: the module must stay silent.
    let outside = pair(&dyadic_code_of(&BigRational::new(7.into(), 8.into())).unwrap(), &nat(3));
    for fuel in [10_000u64, 100_000, 400_000] {
        assert_eq!(module.query(&sp, &outside, fuel), None);
    }

    // The two-point space: cutoff at the stabilization point.
    let si = build_named(&ctx, "sierpinski").unwrap();
    let m2 = normed_enum(&si, &si.cp(&nat(1)));
    let module2 = conv_module_from_enum(&si, m2.value());
    let cut = module2.query(&si, &nat(1), FUEL).expect("limit in B_1");
    assert!(cut >= 1);
    let p2 = seq_from_enum(&si, m2.value());
    for c in cut..cut + 10 {
        let elt = si.seq_at(p2.value(), c, FUEL).unwrap();
        assert_eq!(is_member(&si, &elt, &nat(1), FUEL), Obs::Observed);
    }
}

#[test]
fn seq_from_enum_elements_stay_in_hulls() {
    let ctx = Ctx::new();
    for name in ["sierpinski", "chain3", "dyadic01"] {
        let sp = build_named(&ctx, name).unwrap();
        let code = sp
            .sem
            .finite_codes()
            .map(|v| v.last().unwrap().clone())
            .unwrap_or_else(|| dyadic_code_of(&half()).unwrap());
        let m = normed_enum(&sp, &sp.cp(&code));
        let p = seq_from_enum(&sp, m.value());
        for a in 0..6u64 {
            let elt = sp.seq_at(p.value(), a, FUEL).expect("p total");
            let ball = sp
                .machine()
                .eval(&m, &nat(a), FUEL)
                .halted_value()
                .cloned()
                .expect("normed enum total");
            assert_eq!(
                hull_refute(&sp, &elt, &ball, 15, FUEL),
                HullVerdict::Unknown,
                "{name}: element {a} refuted from its hull"
            );
        }
    }
}

#[test]
fn propagation_on_contract_cases() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let fam = seq_family(&sp);
    let bot = sp.cp(&nat(0));
    let zero = sp.cp(&nat(1));
    let m = seq_table(&sp, vec![bot.clone(), zero.clone()]);
    let x_set = CeSet::basic_open(&sp, &nat(1));
    let verdict = propagate_membership(&sp, &fam, &x_set, m.value(), 1, FUEL).unwrap();
    match verdict {
        PropagationVerdict::Positive { li_b_observed } => {
            assert!(li_b_observed, "the self-referential limit must land in X");
        }
        other => panic!("expected positive verdict, got {other:?}"),
    }

    // Constant-⊥ sequence: no ā qualifies, the precondition is unmet.
    let m_bot = seq_const(&sp, &bot);
    match propagate_membership(&sp, &fam, &x_set, m_bot.value(), 0, FUEL) {
        Err(SeqError::Precondition(_)) => {}
        other => panic!("expected precondition error, got {other:?}"),
    }

    // Exhaustive contract cases on a 5-element domain.
    let d5 = build_named(&ctx, "diamond5").unwrap();
    let fam5 = seq_family(&d5);
    let codes = d5.sem.finite_codes().unwrap();
    let basis = d5.sem.finite_basis().unwrap();
    for lo in &codes {
        for hi in &codes {
            let ilo = d5.cp(lo);
            let ihi = d5.cp(hi);
            if spec_leq(&d5, &ilo, &ihi, 10, FUEL) != SpecLeqVerdict::ConsistentSoFar {
                continue;
            }
            let m = seq_table(&d5, vec![ilo.clone(), ihi.clone()]);
            for n in &basis {
                if !is_member(&d5, &ilo, n, FUEL).observed() {
                    continue;
                }
                let x = CeSet::basic_open(&d5, n);
                let v = propagate_membership(&d5, &fam5, &x, m.value(), 0, FUEL).unwrap();
                assert_eq!(
                    v,
                    PropagationVerdict::Positive { li_b_observed: true },
                    "lo={lo} hi={hi} n={n}"
                );
            }
        }
    }
}

#[test]
fn ce_sets_upward_closed_along_specialization() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "diamond5").unwrap();
    let codes = sp.sem.finite_codes().unwrap();
    let basis = sp.sem.finite_basis().unwrap();
    let sets: Vec<CeSet> = basis.iter().map(|n| CeSet::basic_open(&sp, n)).collect();
    for u in &codes {
        for z in &codes {
            let iu = sp.cp(u);
            let iz = sp.cp(z);
            if spec_leq(&sp, &iu, &iz, 10, FUEL) == SpecLeqVerdict::ConsistentSoFar {
                for x in &sets {
                    if x.accepts(&sp, &iu, FUEL) {
                        assert!(
                            x.accepts(&sp, &iz, FUEL),
                            "{} not closed upward at ({u}, {z})",
                            x.label
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn li_after_p_acts_as_limit_passing() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "chain3").unwrap();
    for code in sp.sem.finite_codes().unwrap() {
        let i = sp.cp(&code);
        let m = normed_enum(&sp, &i);
        let p = seq_from_enum(&sp, m.value());
        let via_li = li_pointed(&sp, p.value()).unwrap();
        let via_pt = limit_pass(&sp, m.value());
        assert!(
            indistinguishable_at(&sp, &via_li, &via_pt, 10, FUEL).is_none(),
            "pt and li∘p disagree at {code}"
        );
    }
}

#[test]
fn seq_property_2b_finitely_many_outside() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "chain3").unwrap();
    // Enumeration converging to the middle element c1.
    let mid = sp.cp(&nat(1));
    let m = normed_enum(&sp, &mid);
    let p = seq_from_enum(&sp, m.value());
    // B_2 = up(c2) does not contain c1; no element of the canonical
    // sequence may be observed there (they are all ≤ the limit).
    let li = li_pointed(&sp, p.value()).unwrap();
    assert!(!is_member(&sp, &li, &nat(2), FUEL).observed());
    for a in 0..12u64 {
        let elt = sp.seq_at(p.value(), a, FUEL).unwrap();
        assert!(
            !is_member(&sp, &elt, &nat(2), FUEL).observed(),
            "element {a} observed outside the limit's filter"
        );
    }
}

#[test]
fn cor_5_6_no_element_separates_above_limit() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "chain4").unwrap();
    let codes = sp.sem.finite_codes().unwrap();
    let cp: Vec<BigUint> = codes.iter().map(|c| sp.cp(c)).collect();
    let m = seq_table(&sp, cp.clone());
    let li = li_pointed(&sp, m.value()).unwrap();
    for a in 0..8u64 {
        let elt = sp.seq_at(m.value(), a, FUEL).unwrap();
        assert_eq!(
            spec_leq(&sp, &elt, &li, 12, FUEL),
            SpecLeqVerdict::ConsistentSoFar,
            "element {a} separated above the limit"
        );
    }
}
