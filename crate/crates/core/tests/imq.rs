mod common;

use kei_core::imq::{
    check_main3, check_orbit_bound, compute_imq, imq_surjection_to_qa, longitude_fixes_orbit, Imq,
    ImqCaps,
};
use kei_core::linkdiag::LinkDiagram;
use kei_core::numodule::NuModule;
use kei_core::qa::build_qa;
use kei_core::quandle::{build_partition_quandle, group_from_quandle, is_isomorphic};
use kei_core::Error;
use num_bigint::BigInt;
use proptest::prelude::*;

fn imq_of(d: &LinkDiagram) -> (NuModule, Imq) {
    let m = NuModule::build(d).unwrap();
    let imq = compute_imq(d, &m, &ImqCaps::for_module(&m)).unwrap();
    (m, imq)
}

#[test]
fn fixture_sizes() {
    let expected = [
        ("HOPF2", 6),
        ("SIXTHREE", 6),
        ("TREFOIL", 3),
        ("FIGURE8", 5),
        ("T22T24", 12),
        ("UNKNOT", 1),
        ("HOPF", 2),
        ("T24", 4),
    ];
    for (name, size) in expected {
        let (_, imq) = imq_of(&common::load(name));
        assert_eq!(imq.quandle.n(), size, "{name}");
    }
}

#[test]
fn determinant_zero_is_rejected() {
    for name in ["FIG5L", "FIGT", "LPRIME", "LDPRIME"] {
        let d = common::load(name);
        let m = NuModule::build(&d).unwrap();
        assert!(matches!(
            compute_imq(&d, &m, &ImqCaps::for_module(&m)),
            Err(Error::InfiniteQuandle)
        ));
    }
}

#[test]
fn element_cap_is_reported() {
    let d = common::load("T22T24");
    let m = NuModule::build(&d).unwrap();
    let caps = ImqCaps {
        max_elements: 5,
        ..ImqCaps::for_module(&m)
    };
    assert!(matches!(
        compute_imq(&d, &m, &caps),
        Err(Error::ResourceCap(_))
    ));
}

#[test]
fn two_hopf_and_chain_models() {
    let (_, hopf) = imq_of(&common::load("HOPF2"));
    let (_, chain) = imq_of(&common::load("SIXTHREE"));
    assert!(!hopf.quandle.is_semiregular().unwrap());
    assert_eq!(hopf.orbit_sizes(&common::load("HOPF2")), vec![2, 2, 2]);
    let identities = (0..6)
        .filter(|&y| hopf.quandle.fixed_points(y) == 6)
        .count();
    assert_eq!(identities, 2);
    assert!((0..6).all(|y| chain.quandle.fixed_points(y) == 2));
    assert!(is_isomorphic(&hopf.quandle, &chain.quandle).is_none());

    let blocks = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
    let ta = vec![(2, 3), (4, 5)];
    let tb = vec![(0, 1), (4, 5)];
    let tc = vec![(0, 1), (2, 3)];
    let hopf_model = build_partition_quandle(
        6,
        &blocks,
        &[
            ta.clone(),
            ta.clone(),
            vec![],
            vec![],
            tc.clone(),
            tc.clone(),
        ],
    )
    .unwrap();
    let chain_model = build_partition_quandle(
        6,
        &blocks,
        &[ta.clone(), ta, tb.clone(), tb, tc.clone(), tc],
    )
    .unwrap();
    assert!(is_isomorphic(&hopf.quandle, &hopf_model).is_some());
    assert!(is_isomorphic(&chain.quandle, &chain_model).is_some());
}

#[test]
fn connected_sum_orbits() {
    let d = common::load("T22T24");
    let (_, imq) = imq_of(&d);
    assert_eq!(imq.orbit_sizes(&d), vec![4, 4, 4]);
}

/// Every statement about a finite `IMQ(L)` that can be checked directly.
fn check_imq(d: &LinkDiagram, tie_breaks: &[u64]) -> Result<(), String> {
    let m = NuModule::build(d).map_err(|e| e.to_string())?;
    if m.det_is_zero() {
        return Ok(());
    }
    let caps = ImqCaps::for_module(&m);
    let imq = compute_imq(d, &m, &caps).map_err(|e| e.to_string())?;
    let q = &imq.quandle;
    if !q.check_axioms().is_empty() || !q.check_translation_identities().is_empty() {
        return Err("axioms".into());
    }
    if !q
        .displacement_group()
        .map_err(|e| e.to_string())?
        .is_abelian()
    {
        return Err("Dis not abelian".into());
    }
    if !check_main3(q.n(), m.det(), m.mu()) {
        return Err(format!(
            "size {} out of bounds for det {} and mu {}",
            q.n(),
            m.det(),
            m.mu()
        ));
    }
    if !check_orbit_bound(&imq.orbit_sizes(d), m.det()) {
        return Err("orbit bound".into());
    }
    if q.orbits().len() != m.mu() {
        return Err("orbit count".into());
    }
    let qa = build_qa(&m).map_err(|e| e.to_string())?;
    imq_surjection_to_qa(&imq, &qa, &m).map_err(|e| e.to_string())?;
    if m.mu() <= 2 && q.n() != qa.quandle.n() {
        return Err("surjection is not a bijection".into());
    }
    if group_from_quandle(q) != *m.group() {
        return Err("reconstructed group".into());
    }
    let e = d.make_even();
    let even = compute_imq(&e, &NuModule::build(&e).unwrap(), &caps).map_err(|x| x.to_string())?;
    if !longitude_fixes_orbit(&e, &even).map_err(|x| x.to_string())? {
        return Err("longitude moves its orbit".into());
    }
    if is_isomorphic(q, &even.quandle).is_none() {
        return Err("even diagram gives a different quandle".into());
    }
    for &t in tie_breaks {
        let other = compute_imq(
            d,
            &m,
            &ImqCaps {
                tie_break: t,
                ..caps.clone()
            },
        )
        .map_err(|x| x.to_string())?;
        if is_isomorphic(q, &other.quandle).is_none() {
            return Err(format!("tie break {t} changes the result"));
        }
    }
    Ok(())
}

#[test]
fn fixture_imq_properties() {
    for (name, d) in common::all() {
        check_imq(&d, &[1, 2, 7]).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn bound_checks() {
    assert!(check_main3(3, &BigInt::from(3), 1));
    assert!(!check_main3(4, &BigInt::from(3), 1));
    assert!(check_main3(6, &BigInt::from(4), 3));
    assert!(check_main3(3, &BigInt::from(4), 3));
    assert!(!check_main3(7, &BigInt::from(4), 3));
    assert!(!check_main3(1, &BigInt::from(0), 2));
    assert!(check_orbit_bound(&[2, 2, 2], &BigInt::from(4)));
    assert!(!check_orbit_bound(&[3, 2], &BigInt::from(4)));
    assert!(check_orbit_bound(&[5], &BigInt::from(5)));
}

#[test]
fn odd_diagram_longitude_is_rejected() {
    let d = common::load("HOPF2");
    let (_, imq) = imq_of(&d);
    assert!(matches!(
        longitude_fixes_orbit(&d, &imq),
        Err(Error::NotEven)
    ));
}

fn braid() -> impl Strategy<Value = LinkDiagram> {
    (2usize..=4)
        .prop_flat_map(|n| {
            let letter = (1..n as i32).prop_flat_map(|i| prop_oneof![Just(i), Just(-i)]);
            (Just(n), proptest::collection::vec(letter, 0..=7))
        })
        .prop_map(|(n, word)| common::braid_closure(n, &word))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn random_link_imq(d in braid(), t in 1u64..100) {
        prop_assume!(NuModule::build(&d).unwrap().det() <= &BigInt::from(40));
        let r = check_imq(&d, &[t]);
        prop_assert!(r.is_ok(), "{:?}", r);
    }
}
