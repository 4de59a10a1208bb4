//! Effective maps, continuity conversions and the convergence-module
//! extractors, validated against finite tables and exact rationals.

use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;

use effectop::continuity::{
    build_map, cont_from_ptcont, effective_from_cont, finite_monotone_map, identity_map,
    map_monotone_on, pointed_witness, ptcont_from_cont, ptcont_from_seqcont, seqcont_from_ptcont,
    seqcont_module_delaying, seqcont_module_t3, tracking_extensional, validate_tail, BasisStage,
    EffectiveMap, ExtractError,
};
use effectop::continuity::extract::{kprime_delaying, pointwise_contract_holds, race_liveness};
use effectop::instances::{build_named, dyadic_value, pow2_neg, rational_abs_diff};
use effectop::kernel::{nat, pair, unpair, GoedelIndex};
use effectop::seqlim::{
    conv_module_from_enum, dyadic_code_of, li_pointed, seq_dyadic_approach, seq_table,
    seq_from_enum,
};
use effectop::spaces::{indistinguishable_at, is_member, normed_enum, Ctx, Space};

const FUEL: u64 = 2_000_000;

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

fn dyadic_halving(sp: &Arc<Space>) -> Arc<EffectiveMap> {
    let subset_into_halved = |m: &BigUint, n: &BigUint| -> bool {
        let (c, r) = unpair(m);
        let (c2, r2) = unpair(n);
        let image_center = dyadic_value(&c) / BigRational::from_integer(2.into());
        rational_abs_diff(&image_center, &dyadic_value(&c2))
            + pow2_neg(&(r + BigUint::from(1u8)))
            <= pow2_neg(&r2)
    };
    let sem_c = sp.sem.clone();
    build_map(
        "dyadic-halving",
        sp,
        sp,
        |code| {
            let (k, l) = unpair(code);
            pair(&k, &(l + BigUint::from(1u8)))
        },
        |m| {
            // image of ball(c, 2^-r) is exactly ball(c/2, 2^-(r+1))
            let (c, r) = unpair(m);
            let (k, l) = unpair(&c);
            Some(pair(
                &pair(&k, &(l + BigUint::from(1u8))),
                &(r + BigUint::from(1u8)),
            ))
        },
        move |n, k| {
            if k == 0 {
                // exact preimage: ball(2c', 2^{-(r'-1)}) when r' >= 1
                let (c2, r2) = unpair(n);
                let (kk, ll) = unpair(&c2);
                if ll > BigUint::from(0u8) && r2 > BigUint::from(0u8) {
                    let pre_center = pair(&kk, &(ll - BigUint::from(1u8)));
                    return Some(BasisStage::Emit(pair(
                        &pre_center,
                        &(r2 - BigUint::from(1u8)),
                    )));
                }
                return Some(BasisStage::Skip);
            }
            let cand = sem_c.basis_candidate(k - 1);
            if subset_into_halved(&cand, n) {
                Some(BasisStage::Emit(cand))
            } else {
                Some(BasisStage::Skip)
            }
        },
    )
}

/// F : dyadic01 → Sierpinski, x ↦ 0 iff x ∈ (1/4, 3/4).
fn in_interval_map(dy: &Arc<Space>, si: &Arc<Space>) -> Arc<EffectiveMap> {
    let lo = BigRational::new(1.into(), 4.into());
    let hi = BigRational::new(3.into(), 4.into());
    let ball_inside = {
        let (lo, hi) = (lo.clone(), hi.clone());
        move |m: &BigUint| -> bool {
            let (c, r) = unpair(m);
            let v = dyadic_value(&c);
            let rad = pow2_neg(&r);
            v.clone() - rad.clone() >= lo && v + rad <= hi
        }
    };
    let inside_b = ball_inside.clone();
    let inside_c = ball_inside;
    let dy_sem_c = dy.sem.clone();
    let (lo_p, hi_p) = (lo, hi);
    build_map(
        "dyadic-in-interval",
        dy,
        si,
        move |code| {
            let v = dyadic_value(code);
            if v > lo_p && v < hi_p {
                nat(1)
            } else {
                nat(0)
            }
        },
        move |m| {
            // balls inside (1/4, 3/4) land in {0}; everything else only in T
            Some(if inside_b(m) { nat(1) } else { nat(0) })
        },
        move |n, k| {
            let cand = dy_sem_c.basis_candidate(k);
            if n == &nat(0) || inside_c(&cand) {
                Some(BasisStage::Emit(cand))
            } else {
                Some(BasisStage::Skip)
            }
        },
    )
}

#[test]
fn trackers_are_extensional() {
    let ctx = Ctx::new();
    let dy = build_named(&ctx, "dyadic01").unwrap();
    let id = identity_map(&dy);
    let i = dy.cp(&dyadic_code_of(&half()).unwrap());
    // canonical route
    let fi = id.apply(&i, FUEL).expect("tracker total on canonicals");
    assert!(indistinguishable_at(&dy, &i, &fi, 20, FUEL).is_none());
    // constructed route: the limit of a sequence approaching 1/2
    let m = seq_dyadic_approach(&dy, half(), true, 2).unwrap();
    let li = effectop::seqlim::li_metric(&dy, m.value()).unwrap();
    let fli = id.apply(&li, FUEL).expect("tracker total on constructed");
    assert!(effectop::continuity::is_transformed_index(&id, &fli));
    assert!(
        indistinguishable_at(&dy, &li, &fli, 12, FUEL).is_none(),
        "identity tracker must preserve observations on constructed indices"
    );
    assert!(tracking_extensional(&id, &i, &i, 15, FUEL));
}

#[test]
fn maps_monotone_along_specialization() {
    let ctx = Ctx::new();
    let d5 = build_named(&ctx, "diamond5").unwrap();
    let f = finite_monotone_map("d5-up", &d5, vec![0, 3, 3, 3, 0]);
    let codes = d5.sem.finite_codes().unwrap();
    let mut pairs = Vec::new();
    for u in &codes {
        for z in &codes {
            pairs.push((d5.cp(u), d5.cp(z)));
        }
    }
    assert!(map_monotone_on(&f, &pairs, 10, FUEL));
}

#[test]
fn delaying_extractor_on_sierpinski_identity() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let id = identity_map(&sp);
    let bot = sp.cp(&nat(0));
    let zero = sp.cp(&nat(1));
    let m = seq_table(&sp, vec![bot, zero.clone(), zero]);
    let n = nat(1);
    let cut = seqcont_module_delaying(&id, m.value(), &n, FUEL).expect("contract holds");
    assert!(cut.value >= 1, "stabilization happens at position 1");
    let bad = validate_tail(&id, m.value(), &n, cut.value, 50, FUEL);
    assert!(bad.is_empty(), "tail violations at {bad:?}");
    // The identity-map corollary: the cutoff is a convergence module for
    // the input sequence itself, which is what validate_tail just checked
    // through the identity tracker.
}

#[test]
fn delaying_extractor_exhaustive_on_chains() {
    let ctx = Ctx::new();
    for name in ["chain3", "chain4", "diamond5"] {
        let sp = build_named(&ctx, name).unwrap();
        let codes: Vec<BigUint> = match name {
            // a monotone path through the diamond; the raw code order is
            // not a chain there
            "diamond5" => [0u64, 1, 3].iter().map(|v| nat(*v)).collect(),
            _ => sp.sem.finite_codes().unwrap(),
        };
        let cp: Vec<BigUint> = codes.iter().map(|c| sp.cp(c)).collect();
        let id = identity_map(&sp);
        let m = seq_table(&sp, cp.clone());
        let li_m = li_pointed(&sp, m.value()).unwrap();
        for n in sp.sem.finite_basis().unwrap() {
            if !is_member(&sp, &li_m, &n, FUEL).observed() {
                continue; // off contract: F(limit) ∉ B'_n
            }
            let cut = seqcont_module_delaying(&id, m.value(), &n, FUEL)
                .unwrap_or_else(|e| panic!("{name}: extraction failed at {n}: {e}"));
            let bad = validate_tail(&id, m.value(), &n, cut.value, 50, FUEL);
            assert!(bad.is_empty(), "{name}: violations at n={n}: {bad:?}");
        }
    }
}

#[test]
fn delaying_extractor_monotone_step_maps() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "chain4").unwrap();
    let actions: Vec<Vec<u64>> = vec![
        vec![0, 0, 1, 2],
        vec![0, 1, 1, 2],
        vec![0, 0, 0, 3],
        vec![1, 1, 2, 3],
        vec![0, 1, 2, 3],
    ];
    let codes = sp.sem.finite_codes().unwrap();
    let cp: Vec<BigUint> = codes.iter().map(|c| sp.cp(c)).collect();
    for (idx, action) in actions.into_iter().enumerate() {
        let f = finite_monotone_map(format!("chain4-f{idx}"), &sp, action.clone());
        let m = seq_table(&sp, cp.clone());
        let li_m = li_pointed(&sp, m.value()).unwrap();
        let f_li = f.apply(&li_m, FUEL).expect("tracker total");
        for n in sp.sem.finite_basis().unwrap() {
            if !is_member(&sp, &f_li, &n, FUEL).observed() {
                continue;
            }
            let cut = seqcont_module_delaying(&f, m.value(), &n, FUEL)
                .unwrap_or_else(|e| panic!("f{idx}: extraction failed at {n}: {e}"));
            let bad = validate_tail(&f, m.value(), &n, cut.value, 50, FUEL);
            assert!(bad.is_empty(), "f{idx}: violations at n={n}: {bad:?}");
        }
    }
}

#[test]
fn delaying_extractor_uniform_in_sequence_index() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let id = identity_map(&sp);
    let bot = sp.cp(&nat(0));
    let zero = sp.cp(&nat(1));
    // Three distinct indices of the same sequence.
    let m1 = seq_table(&sp, vec![bot.clone(), zero.clone()]);
    let m2 = seq_table(&sp, vec![bot.clone(), zero.clone(), zero.clone()]);
    let fam = effectop::seqlim::seq_family(&sp);
    let m3 = effectop::seqlim::delay(&fam, &sp, m1.value(), 0, 0).unwrap();
    for (tag, m) in [("m1", m1.value().clone()), ("m2", m2.value().clone()), ("m3", m3.value().clone())] {
        let cut = seqcont_module_delaying(&id, &m, &nat(1), FUEL)
            .unwrap_or_else(|e| panic!("{tag}: {e}"));
        let bad = validate_tail(&id, &m, &nat(1), cut.value, 50, FUEL);
        assert!(bad.is_empty(), "{tag}: {bad:?}");
    }
}

#[test]
fn t3_extractor_on_dyadic() {
    let ctx = Ctx::new();
    let dy = build_named(&ctx, "dyadic01").unwrap();
    let id = identity_map(&dy);
    let halving = dyadic_halving(&dy);
    let m = seq_dyadic_approach(&dy, half(), true, 2).unwrap();

    // Identity: targets containing 1/2.
    for r in [2u64, 3, 4] {
        let n = pair(&dyadic_code_of(&half()).unwrap(), &nat(r));
        let cut = seqcont_module_t3(&id, m.value(), &n, FUEL)
            .unwrap_or_else(|e| panic!("identity r={r}: {e}"));
        let bad = validate_tail(&id, m.value(), &n, cut.value, 50, FUEL);
        assert!(bad.is_empty(), "identity r={r}: {bad:?}");
        assert!(
            race_liveness(&id, m.value(), &n, &cut.li_b, cut.value, 25, FUEL),
            "identity r={r}: race starved"
        );
    }

    // Halving: the image limit is 1/4.
    for r in [3u64, 4] {
        let n = pair(
            &dyadic_code_of(&BigRational::new(1.into(), 4.into())).unwrap(),
            &nat(r),
        );
        let cut = seqcont_module_t3(&halving, m.value(), &n, FUEL)
            .unwrap_or_else(|e| panic!("halving r={r}: {e}"));
        let bad = validate_tail(&halving, m.value(), &n, cut.value, 50, FUEL);
        assert!(bad.is_empty(), "halving r={r}: {bad:?}");
        assert!(
            race_liveness(&halving, m.value(), &n, &cut.li_b, cut.value, 25, FUEL),
            "halving r={r}: race starved"
        );
    }

    // Off contract: a target missing the image limit diverges.
    let off = pair(
        &dyadic_code_of(&BigRational::new(7.into(), 8.into())).unwrap(),
        &nat(3),
    );
    match seqcont_module_t3(&id, m.value(), &off, 400_000) {
        Err(e) => assert!(effectop::continuity::extract::expect_off_contract(&e)),
        Ok(c) => panic!("expected off-contract divergence, got cutoff {}", c.value),
    }

    // Discrete ω: the constant sequence has cutoff 0-ish immediately.
    let disc = build_named(&ctx, "discrete-omega").unwrap();
    let id_d = identity_map(&disc);
    let five = disc.cp(&nat(5));
    let mc = effectop::seqlim::seq_const(&disc, &five);
    let n = pair(&nat(5), &nat(1));
    let cut = seqcont_module_t3(&id_d, mc.value(), &n, FUEL).expect("constant in own ball");
    let bad = validate_tail(&id_d, mc.value(), &n, cut.value, 25, FUEL);
    assert!(bad.is_empty());
}

#[test]
fn pointed_witness_shape() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let id = identity_map(&sp);
    let w = pointed_witness(&id).unwrap();
    assert!(w.appropriate);
    let mach = sp.machine();
    // s(i, m) = m.
    for n in 0u64..4 {
        let s = w.s_value(mach, &sp.cp(&nat(1)), &nat(n), FUEL).unwrap();
        assert_eq!(s, nat(n));
    }
    // r(i, e, n) = pd(e): for e = 0 the bottom point.
    let r = w
        .r_value(mach, &sp.cp(&nat(1)), &nat(0), &nat(1), FUEL)
        .unwrap();
    assert!(indistinguishable_at(&sp, &r, &sp.pd_index(&nat(0)).unwrap(), 10, FUEL).is_none());
}

#[test]
fn theorem_6_8_pointwise_from_sequential() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let id = identity_map(&sp);
    let kprime = kprime_delaying(&id).unwrap();
    let witness = pointed_witness(&id).unwrap();
    let h = ptcont_from_seqcont(&id, &kprime, &witness);
    let zero = sp.cp(&nat(1));
    let h_val = (h.query)(&zero, &nat(1), FUEL).expect("h defined on contract");
    assert!(
        pointwise_contract_holds(&id, &zero, &nat(1), &h_val, FUEL),
        "h' = {h_val} fails the pointwise contract"
    );

    // A monotone step map on chain3, exhaustively.
    let c3 = build_named(&ctx, "chain3").unwrap();
    let f = finite_monotone_map("c3-step", &c3, vec![0, 0, 2]);
    let kprime = kprime_delaying(&f).unwrap();
    let witness = pointed_witness(&f).unwrap();
    let h = ptcont_from_seqcont(&f, &kprime, &witness);
    for p in c3.sem.finite_codes().unwrap() {
        let i = c3.cp(&p);
        let fi = f.apply(&i, FUEL).unwrap();
        for n in c3.sem.finite_basis().unwrap() {
            if !is_member(&c3, &fi, &n, FUEL).observed() {
                continue;
            }
            let h_val = (h.query)(&i, &n, FUEL)
                .unwrap_or_else(|| panic!("h undefined at ({p}, {n})"));
            assert!(
                pointwise_contract_holds(&f, &i, &n, &h_val, FUEL),
                "contract fails at ({p}, {n}) with h' = {h_val}"
            );
        }
    }
}

#[test]
fn prop_6_6_pointwise_from_enumerator() {
    let ctx = Ctx::new();
    let dy = build_named(&ctx, "dyadic01").unwrap();
    let id = identity_map(&dy);
    let g = id.enumerator().unwrap();
    let h = ptcont_from_cont(&id, &g);
    let i = dy.cp(&dyadic_code_of(&half()).unwrap());
    let n = pair(&dyadic_code_of(&half()).unwrap(), &nat(2));
    let a = (h.query)(&i, &n, FUEL).expect("h defined");
    // Exact rationals: the certificate ball contains 1/2 and sits inside n.
    let (ca, ra) = unpair(&a);
    assert!(rational_abs_diff(&dyadic_value(&ca), &half()) < pow2_neg(&ra));
    assert!(
        rational_abs_diff(&dyadic_value(&ca), &half()) + pow2_neg(&ra) <= pow2_neg(&nat(2)),
        "certificate ball leaks out of the target"
    );

    let si = build_named(&ctx, "sierpinski").unwrap();
    let ids = identity_map(&si);
    let gs = ids.enumerator().unwrap();
    let hs = ptcont_from_cont(&ids, &gs);
    let a = (hs.query)(&si.cp(&nat(1)), &nat(1), FUEL).expect("h defined");
    assert!(a >= nat(1), "certificate must be the {{0}} set");
}

#[test]
fn prop_6_7_enumerator_from_pointwise() {
    let ctx = Ctx::new();
    let dy = build_named(&ctx, "dyadic01").unwrap();
    let si = build_named(&ctx, "sierpinski").unwrap();
    let f = in_interval_map(&dy, &si);
    let g0 = f.enumerator().unwrap();
    let h = ptcont_from_cont(&f, &g0);
    let g = cont_from_ptcont(&f, &h).unwrap();

    // Soundness + completeness at the sampled level for n = {0}.
    let e1 = (g.build)(&nat(1));
    let driver = effectop::spaces::externs::WindexDriver::new(
        dy.machine(),
        dy.ctx.range_member,
        &dy.ctx.t_form(&e1),
    );
    let mut emitted = Vec::new();
    let _ = driver.drive(3_000_000, |a| {
        emitted.push(a.clone());
        (emitted.len() >= 12).then_some(())
    });
    assert!(!emitted.is_empty(), "preimage cover must be nonempty");
    for a in &emitted {
        let (c, r) = unpair(a);
        let v = dyadic_value(&c);
        let rad = pow2_neg(&r);
        assert!(
            v.clone() - rad.clone() >= BigRational::new(1.into(), 4.into())
                && v + rad <= BigRational::new(3.into(), 4.into()),
            "emitted ball {a} leaks out of (1/4, 3/4)"
        );
    }
    // Sampled dense points of the preimage are covered.
    for num in [3u64, 4, 5] {
        let v = BigRational::new(num.into(), 8.into());
        let covered = emitted.iter().any(|a| {
            let (c, r) = unpair(a);
            rational_abs_diff(&dyadic_value(&c), &v) < pow2_neg(&r)
        });
        assert!(covered, "dense point {num}/8 not covered by the first emissions");
    }
}

#[test]
fn prop_6_8_tracker_from_enumerator() {
    let ctx = Ctx::new();
    let dy = build_named(&ctx, "dyadic01").unwrap();
    let id = identity_map(&dy);
    let g = id.enumerator().unwrap();
    let f2 = effective_from_cont(&dy, &dy, &g);
    for code in [
        dyadic_code_of(&half()).unwrap(),
        dyadic_code_of(&BigRational::new(3.into(), 8.into())).unwrap(),
        dyadic_code_of(&BigRational::new(0.into(), 1.into())).unwrap(),
    ] {
        let i = dy.cp(&code);
        let fi = dy
            .machine()
            .eval(&GoedelIndex(f2.clone()), &i, FUEL)
            .halted_value()
            .cloned()
            .expect("reconstructed tracker total");
        assert!(
            indistinguishable_at(&dy, &i, &fi, 8, 40_000_000).is_none(),
            "reconstructed tracker disagrees at {code}"
        );
    }

    let si = build_named(&ctx, "sierpinski").unwrap();
    let ids = identity_map(&si);
    let gsi = ids.enumerator().unwrap();
    let f3 = effective_from_cont(&si, &si, &gsi);
    for p in [nat(0), nat(1)] {
        let i = si.cp(&p);
        let fi = si
            .machine()
            .eval(&GoedelIndex(f3.clone()), &i, FUEL)
            .halted_value()
            .cloned()
            .unwrap();
        assert!(
            indistinguishable_at(&si, &i, &fi, 6, 40_000_000).is_none(),
            "two-point tracker disagrees at {p}"
        );
    }
}

#[test]
fn prop_6_9_sequential_from_pointwise() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let id = identity_map(&sp);
    let g = id.enumerator().unwrap();
    let h = ptcont_from_cont(&id, &g);
    // A sequence from a converging normed enumeration, with its module.
    let zero = sp.cp(&nat(1));
    let m_enum = normed_enum(&sp, &zero);
    let p = seq_from_enum(&sp, m_enum.value());
    let module = conv_module_from_enum(&sp, m_enum.value());
    let cut = seqcont_from_ptcont(&id, &h, &module, p.value(), &nat(1), FUEL)
        .expect("cutoff defined on contract");
    let bad = validate_tail(&id, p.value(), &nat(1), cut, 25, FUEL);
    assert!(bad.is_empty(), "{bad:?}");
}

#[test]
fn off_contract_delaying_extractor_times_out() {
    let ctx = Ctx::new();
    let sp = build_named(&ctx, "sierpinski").unwrap();
    let id = identity_map(&sp);
    let bot = sp.cp(&nat(0));
    let m = seq_table(&sp, vec![bot]);
    // The constant-⊥ sequence never enters {0}.
    match seqcont_module_delaying(&id, m.value(), &nat(1), 300_000) {
        Err(ExtractError::OffContract { .. }) => {}
        other => panic!("expected off-contract, got {other:?}"),
    }
}
