//! The ten acceptance criteria, one PASS/FAIL line each.

use std::collections::HashSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use kei_cli::compare::compare;
use kei_cli::report::{longitude_theorem, rows_are_redundant, Options};
use kei_core::abgroup::{subgroup_quotient, FgAbGroup};
use kei_core::imq::{check_main3, check_orbit_bound, compute_imq, Imq, ImqCaps};
use kei_core::linkdiag::{parse_diagram, LinkDiagram};
use kei_core::numodule::{build_r_matrix, det_by_minors, NuModule};
use kei_core::qa::{
    build_qa, characteristic_compatibility, phi_equivalent, reindexing_sensitivity, Compatibility,
    Equivalence,
};
use kei_core::quandle::{
    characteristic_subquandle, core_quandle, group_from_quandle, is_isomorphic, FiniteQuandle,
};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, what: impl Into<String>) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn load(name: &str) -> LinkDiagram {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let path = [
        dir.join(format!("{name}.json")),
        dir.join("extra").join(format!("{name}.json")),
    ]
    .into_iter()
    .find(|p| p.exists())
    .unwrap_or_else(|| panic!("fixture {name} missing"));
    parse_diagram(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const FIXTURES: [&str; 12] = [
    "HOPF2", "SIXTHREE", "TREFOIL", "FIGURE8", "FIG5L", "FIGT", "LPRIME", "LDPRIME", "T22T24",
    "UNKNOT", "HOPF", "T24",
];

fn module(name: &str) -> NuModule {
    NuModule::build(&load(name)).unwrap()
}

fn group(free: usize, torsion: &[i64]) -> FgAbGroup {
    FgAbGroup::new(free, torsion.iter().map(|&t| BigInt::from(t)).collect()).unwrap()
}

fn imq(name: &str) -> Result<(LinkDiagram, NuModule, Imq), String> {
    let d = load(name);
    let m = NuModule::build(&d).map_err(|e| e.to_string())?;
    let q = compute_imq(&d, &m, &ImqCaps::for_module(&m)).map_err(|e| e.to_string())?;
    Ok((d, m, q))
}

fn identity_translations(q: &FiniteQuandle) -> usize {
    (0..q.n()).filter(|&y| q.fixed_points(y) == q.n()).count()
}

fn criterion_1() -> Outcome {
    let (d, m, q) = imq("HOPF2")?;
    ensure(
        *m.group() == group(1, &[2, 2]),
        format!("M = {}", m.group()),
    )?;
    ensure(*m.det() == BigInt::from(4), format!("det = {}", m.det()))?;
    let qa = build_qa(&m).map_err(|e| e.to_string())?;
    let trivial =
        (0..qa.quandle.n()).all(|x| (0..qa.quandle.n()).all(|y| qa.quandle.op(x, y) == x));
    ensure(
        qa.quandle.n() == 3 && trivial,
        "Q_A is not the 3-element trivial quandle",
    )?;
    let mut sizes = q.orbit_sizes(&d);
    sizes.sort();
    ensure(
        q.quandle.n() == 6 && sizes == [2, 2, 2],
        format!("|IMQ| = {}, orbits {sizes:?}", q.quandle.n()),
    )?;
    let b = q.generator[d.arc_id("b").unwrap()];
    ensure(
        q.quandle.fixed_points(b) == 6,
        "translation by q_b is not the identity",
    )?;
    ensure(!q.quandle.is_semiregular().unwrap(), "IMQ is semiregular")
}

fn criterion_2() -> Outcome {
    let (_, m, q) = imq("SIXTHREE")?;
    let (_, m0, q0) = imq("HOPF2")?;
    ensure(
        m.group() == m0.group() && m.det() == m0.det(),
        "module differs from HOPF2",
    )?;
    ensure(q.quandle.n() == 6, format!("|IMQ| = {}", q.quandle.n()))?;
    ensure(
        identity_translations(&q.quandle) == 0,
        "an identity translation exists",
    )?;
    ensure(
        is_isomorphic(&q.quandle, &q0.quandle).is_none(),
        "IMQs are isomorphic",
    )?;
    let e = phi_equivalent(&m0, &m).map_err(|e| e.to_string())?;
    ensure(
        e.is_equivalent(),
        format!("phi_equivalent = {}", e.verdict()),
    )
}

fn criterion_3() -> Outcome {
    for (name, det) in [("TREFOIL", 3), ("FIGURE8", 5)] {
        let (d, m, q) = imq(name)?;
        ensure(
            *m.det() == BigInt::from(det),
            format!("{name}: det {}", m.det()),
        )?;
        ensure(
            q.quandle.n() == det as usize,
            format!("{name}: |IMQ| = {}", q.quandle.n()),
        )?;
        let core = core_quandle(&m.ker_w(0).group).map_err(|e| e.to_string())?;
        ensure(
            is_isomorphic(&q.quandle, &core).is_some(),
            format!("{name}: IMQ not Core(ker w)"),
        )?;
        let r = build_r_matrix(&d);
        let minors: HashSet<BigInt> = (0..r.cols()).map(|c| det_by_minors(&r, c)).collect();
        ensure(
            minors == HashSet::from([BigInt::from(det)]),
            format!("{name}: minor oracle {minors:?}"),
        )?;
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let m = module("FIG5L");
    ensure(
        *m.group() == group(2, &[8, 8]),
        format!("M = {}", m.group()),
    )?;
    match characteristic_compatibility(&m).map_err(|e| e.to_string())? {
        Compatibility::No { indexings: 24 } => {}
        other => return Err(format!("compatibility {other:?}")),
    }
    ensure(
        start.elapsed() < Duration::from_secs(10),
        format!("took {:?}", start.elapsed()),
    )
}

fn criterion_5() -> Outcome {
    let m = module("FIGT");
    ensure(
        *m.group() == group(2, &[8, 8]),
        format!("M = {}", m.group()),
    )?;
    let Compatibility::Yes(w) = characteristic_compatibility(&m).map_err(|e| e.to_string())? else {
        return Err("compatibility is not yes".into());
    };
    ensure(w.verify(&m), "witness does not verify")?;
    let images = w.phi_images(&m);
    // In (w, p_2, p_3, p_4) coordinates generator l goes to the l-th unit vector.
    let units = images.iter().enumerate().all(|(l, (wv, p))| {
        *wv == BigInt::from(u8::from(l == 0))
            && p.iter()
                .enumerate()
                .all(|(i, &b)| b == u8::from(i + 1 == l))
    });
    ensure(images.len() == 4 && units, format!("images {images:?}"))
}

fn criterion_6() -> Outcome {
    let c =
        compare(&load("FIG5L"), &load("FIGT"), &Options::default()).map_err(|e| e.to_string())?;
    let (k1, k2) = (
        module("FIG5L").ker_w(0).group,
        module("FIGT").ker_w(0).group,
    );
    ensure(
        k1 == group(1, &[8, 8]) && k1 == k2 && c.h1_isomorphic,
        format!("ker w {k1} vs {k2}"),
    )?;
    ensure(
        c.phi_equivalent == "not-equivalent",
        format!("phi_equivalent = {}", c.phi_equivalent),
    )
}

fn criterion_7() -> Outcome {
    let (a, b) = (module("LPRIME"), module("LDPRIME"));
    ensure(
        *a.group() == group(2, &[2, 2]) && a.group() == b.group(),
        "modules differ from Z^2 + Z/2 + Z/2",
    )?;
    let ones = vec![1u8; 4];
    let pa = a.torsion_parity_profile().map_err(|e| e.to_string())?;
    let pb = b.torsion_parity_profile().map_err(|e| e.to_string())?;
    ensure(
        pa.contains(&ones) && !pb.contains(&ones),
        "all-ones vector not separating the profiles",
    )?;
    let e = phi_equivalent(&a, &b).map_err(|e| e.to_string())?;
    ensure(
        matches!(e, Equivalence::NotEquivalent(_)),
        format!("phi_equivalent = {}", e.verdict()),
    )
}

fn criterion_8() -> Outcome {
    let m = module("T22T24");
    let k = m.ker_w(0).group;
    ensure(k == group(0, &[2, 4]), format!("ker w = {k}"))?;
    let prime = characteristic_subquandle(&k).map_err(|e| e.to_string())?;
    let mut fixed: Vec<usize> = (0..prime.n()).map(|y| prime.fixed_points(y)).collect();
    fixed.sort();
    ensure(
        fixed == [2, 2, 4, 4, 4, 4],
        format!("fixed points {fixed:?}"),
    )?;
    let r = reindexing_sensitivity(&m).map_err(|e| e.to_string())?;
    ensure(
        r.singled_out().len() == 1,
        format!("classes {:?}", r.classes),
    )
}

fn quandle_suite(q: &FiniteQuandle, what: &str) -> Outcome {
    ensure(q.check_axioms().is_empty(), format!("{what}: axioms"))?;
    ensure(
        q.check_translation_identities().is_empty(),
        format!("{what}: translation identities"),
    )?;
    let dis = q.displacement_group().map_err(|e| e.to_string())?;
    ensure(dis.is_abelian(), format!("{what}: Dis not abelian"))
}

fn random_groups(count: usize) -> Vec<FgAbGroup> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b6569);
    let mut out = Vec::new();
    while out.len() < count {
        let k = rng.gen_range(0..=3);
        let orders: Vec<u64> = (0..k).map(|_| rng.gen_range(2..=16)).collect();
        if orders.iter().product::<u64>() <= 64 {
            out.push(FgAbGroup::from_cyclic_orders(&orders));
        }
    }
    out
}

fn all_groups(max: u64) -> Vec<FgAbGroup> {
    fn extend(chain: &mut Vec<u64>, product: u64, max: u64, out: &mut Vec<FgAbGroup>) {
        out.push(FgAbGroup::from_cyclic_orders(chain));
        let mut d = chain.last().copied().unwrap_or(2);
        while product * d <= max {
            if chain.last().is_none_or(|&last| d % last == 0) {
                chain.push(d);
                extend(chain, product * d, max, out);
                chain.pop();
            }
            d += 1;
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), 1, max, &mut out);
    out
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    for a in random_groups(200) {
        let core = core_quandle(&a).map_err(|e| e.to_string())?;
        let prime = characteristic_subquandle(&a).map_err(|e| e.to_string())?;
        quandle_suite(&core, &format!("Core({a})"))?;
        quandle_suite(&prime, &format!("Core'({a})"))?;
        let (quotient, _) = subgroup_quotient(&a, &a.elements_of_order_dividing_2());
        let dis = core.displacement_group().map_err(|e| e.to_string())?.group;
        ensure(dis == quotient, format!("Dis(Core({a})) = {dis}"))?;
        let dis_prime = prime.displacement_group().map_err(|e| e.to_string())?.group;
        ensure(dis_prime == dis, format!("Dis(Core'({a})) = {dis_prime}"))?;
        let k = a.two_rank();
        ensure(
            core.orbits().len() == 1 << k,
            format!("Core({a}) orbit count"),
        )?;
        ensure(
            prime.orbits().len() == k + 1,
            format!("Core'({a}) orbit count"),
        )?;
    }
    let groups = all_groups(64);
    let primes: Vec<FiniteQuandle> = groups
        .iter()
        .map(|g| characteristic_subquandle(g).unwrap())
        .collect();
    for i in 0..groups.len() {
        for j in i..groups.len() {
            if primes[i].n() == primes[j].n() {
                let iso = is_isomorphic(&primes[i], &primes[j]).is_some();
                ensure(
                    iso == (groups[i] == groups[j]),
                    format!("classification {} {}", groups[i], groups[j]),
                )?;
            }
        }
    }
    for name in FIXTURES {
        let d = load(name);
        let m = NuModule::build(&d).map_err(|e| e.to_string())?;
        let e = d.make_even();
        let me = NuModule::build(&e).map_err(|e| e.to_string())?;
        let lambda = me.longitudes(&e).map_err(|e| e.to_string())?;
        let zero = if m.mu() > 1 {
            me.longitude_zero_subset(&lambda)
                .map_err(|e| e.to_string())?
        } else {
            None
        };
        ensure(
            longitude_theorem(&me, &lambda, &zero),
            format!("{name}: longitude theorem"),
        )?;
        ensure(rows_are_redundant(&d), format!("{name}: row redundancy"))?;
        let same = m.group() == me.group()
            && m.det() == me.det()
            && m.torsion_parity_profile().ok() == me.torsion_parity_profile().ok();
        ensure(same, format!("{name}: make_even changed an invariant"))?;
        if m.det_is_zero() {
            continue;
        }
        let qa = build_qa(&m).map_err(|e| e.to_string())?;
        let want = BigInt::from(m.mu()) * m.det() / (BigInt::from(1) << (m.mu() - 1));
        ensure(
            BigInt::from(qa.quandle.n()) == want,
            format!("{name}: |Q_A| formula"),
        )?;
        quandle_suite(&qa.quandle, &format!("{name} Q_A"))?;
        ensure(
            group_from_quandle(&qa.quandle) == *m.group(),
            format!("{name}: group from Q_A"),
        )?;
        let (_, _, q) = imq(name)?;
        quandle_suite(&q.quandle, &format!("{name} IMQ"))?;
        ensure(
            group_from_quandle(&q.quandle) == *m.group(),
            format!("{name}: group from IMQ"),
        )?;
    }
    ensure(
        start.elapsed() < Duration::from_secs(120),
        format!("took {:?}", start.elapsed()),
    )
}

fn criterion_10() -> Outcome {
    let mut checked = 0;
    for name in FIXTURES {
        let d = load(name);
        let m = NuModule::build(&d).map_err(|e| e.to_string())?;
        if m.det_is_zero() {
            continue;
        }
        let (_, _, q) = imq(name)?;
        ensure(
            check_main3(q.quandle.n(), m.det(), m.mu()),
            format!("{name}: size bounds"),
        )?;
        ensure(
            check_orbit_bound(&q.orbit_sizes(&d), m.det()),
            format!("{name}: orbit bound"),
        )?;
        checked += 1;
    }
    ensure(checked == 8, format!("{checked} finite fixtures"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("two Hopf links: module, Q_A, IMQ", criterion_1),
        (
            "three-chain: same module, different IMQ, equivalent",
            criterion_2,
        ),
        (
            "trefoil and figure-eight: |IMQ| = det, IMQ = Core(ker w)",
            criterion_3,
        ),
        ("FIG5L: module and no compatible indexing", criterion_4),
        ("FIGT: module and unit-vector witness", criterion_5),
        ("FIG5L vs FIGT: same ker w, not equivalent", criterion_6),
        ("LPRIME vs LDPRIME: parity profiles separate", criterion_7),
        (
            "T22T24: ker w, fixed points, singled-out component",
            criterion_8,
        ),
        ("property suites", criterion_9),
        ("IMQ size and orbit bounds", criterion_10),
    ];
    let mut failed = 0;
    for (i, (what, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(()) => println!("criterion {:>2} PASS  {what}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {what}: {why}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
