//! Per-diagram reports.

use std::collections::BTreeMap;

use kei_core::abgroup::{cokernel_group, subgroup_membership, FgAbGroup};
use kei_core::imq::{
    check_main3, check_orbit_bound, compute_imq, imq_surjection_to_qa, longitude_fixes_orbit, Imq,
    ImqCaps,
};
use kei_core::linkdiag::LinkDiagram;
use kei_core::numodule::{build_r_matrix, NuModule};
use kei_core::qa::{
    build_qa, characteristic_compatibility, compare_qa_with_characteristic, dis_structure_check,
};
use kei_core::quandle::{group_from_quandle, FiniteQuandle};
use kei_core::{Error, Result};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Quandles above this size skip the reconstruction check, whose relation
/// matrix has one row per ordered pair.
pub const RECONSTRUCTION_LIMIT: usize = 256;

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub no_imq: bool,
    pub imq_cap: Option<usize>,
}

impl Options {
    /// The part of the options that changes a report, for cache keys.
    pub fn fingerprint(&self) -> String {
        format!("no_imq={};imq_cap={:?}", self.no_imq, self.imq_cap)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupReport {
    pub display: String,
    pub invariant_factors: Vec<String>,
}

impl GroupReport {
    fn new(g: &FgAbGroup) -> Self {
        GroupReport {
            display: g.to_string(),
            invariant_factors: g
                .invariant_factors()
                .iter()
                .map(|x| x.to_string())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LongitudeReport {
    pub orders: Vec<String>,
    /// A proper set of components whose longitudes sum to zero; absent for knots.
    pub zero_subset: Option<Vec<usize>>,
    pub has_zero_subset: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuandleSize {
    /// `finite`, `infinite`, `skipped` or `capped`.
    pub status: String,
    pub size: Option<usize>,
    pub orbit_sizes: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Report {
    pub components: usize,
    pub arcs: usize,
    pub crossings: usize,
    pub evenized: bool,
    pub det: String,
    pub module: GroupReport,
    pub ker_w: GroupReport,
    pub longitudes: LongitudeReport,
    pub qa: QuandleSize,
    pub imq: QuandleSize,
    pub characteristic: String,
    /// Canonical parity vectors of nonzero torsion elements, with multiplicity.
    pub parity_profile: Option<BTreeMap<String, usize>>,
    pub main3: Option<bool>,
    pub orbit_bound: Option<bool>,
    /// For a finite IMQ with several components: its size equals neither
    /// `mu*det/2` nor `mu*det/2^(mu-1)`.
    pub strictly_between_bounds: Option<bool>,
    /// `pass`, `fail`, `n/a` or `skipped` for each consistency check.
    pub checks: BTreeMap<String, String>,
}

impl Report {
    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, v)| v.as_str() == "fail")
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn capped(&self) -> bool {
        self.imq.status == "capped"
            || self.characteristic == "unknown"
            || self.parity_profile.is_none()
    }
}

/// A report together with the finite quandle chosen for `--dump-quandle`.
pub struct Computed {
    pub report: Report,
    pub dump: Option<FiniteQuandle>,
}

fn verdict(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn check(r: Result<bool>) -> Result<String> {
    match r {
        Ok(ok) => Ok(verdict(ok)),
        Err(Error::Internal(_)) => Ok(verdict(false)),
        Err(e) => Err(e),
    }
}

pub fn rows_are_redundant(d: &LinkDiagram) -> bool {
    let r = build_r_matrix(d);
    let full = cokernel_group(&r);
    (0..r.rows()).all(|i| cokernel_group(&r.without_row(i)) == full)
}

/// All items of the longitude theorem, given the module of an even diagram,
/// its longitudes, and a proper zero-sum subset when one exists.
pub fn longitude_theorem(
    m: &NuModule,
    lambda: &[kei_core::abgroup::GroupElt],
    zero: &Option<Vec<usize>>,
) -> bool {
    let g = m.group();
    let mu = m.mu();
    let basic = lambda
        .iter()
        .all(|l| m.w(l).is_zero() && g.add(l, l).is_zero());
    let knot = mu != 1 || lambda[0].is_zero();
    let pair = mu != 2 || lambda[0] == lambda[1];
    let redundant = mu < 2
        || (0..mu).any(|i| {
            let rest: Vec<_> = (0..mu)
                .filter(|&j| j != i)
                .map(|j| lambda[j].clone())
                .collect();
            subgroup_membership(g, &rest, &lambda[i])
        });
    let det_zero = mu < 2 || zero.is_some() == m.det_is_zero();
    basic && knot && pair && redundant && det_zero
}

fn orbit_sizes(q: &FiniteQuandle) -> Vec<usize> {
    let mut v: Vec<usize> = q.orbits().iter().map(Vec::len).collect();
    v.sort_unstable();
    v
}

fn caps_for(m: &NuModule, opts: &Options) -> ImqCaps {
    let mut caps = ImqCaps::for_module(m);
    if let Some(n) = opts.imq_cap {
        caps.max_elements = n;
    }
    caps
}

pub fn compute_report(d: &LinkDiagram, opts: &Options) -> Result<Computed> {
    let m = NuModule::build(d)?;
    let e = d.make_even();
    let me = NuModule::build(&e)?;
    let mut checks = BTreeMap::new();

    let lambda = me.longitudes(&e)?;
    let zero = if m.mu() > 1 {
        me.longitude_zero_subset(&lambda)?
    } else {
        None
    };
    let orders = lambda
        .iter()
        .map(|l| {
            me.group()
                .order_of(l)
                .map_or("infinite".into(), |o| o.to_string())
        })
        .collect();
    checks.insert(
        "longitude_theorem".into(),
        verdict(longitude_theorem(&me, &lambda, &zero)),
    );
    checks.insert("row_redundancy".into(), verdict(rows_are_redundant(d)));

    let profile = match m.torsion_parity_profile() {
        Ok(p) => Some(p),
        Err(Error::ResourceCap(_)) => None,
        Err(x) => return Err(x),
    };
    let even_profile = match (&profile, me.torsion_parity_profile()) {
        (Some(_), Ok(p)) => Some(p),
        _ => None,
    };
    let invariant = m.group() == me.group() && m.det() == me.det() && profile == even_profile;
    checks.insert("make_even_invariance".into(), verdict(invariant));
    let parity_profile = profile.map(|p| {
        let mut counts = BTreeMap::new();
        for v in p {
            let key: String = v.iter().map(|b| char::from(b'0' + b)).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
        counts
    });

    let characteristic = characteristic_compatibility(&m)?.verdict().to_string();

    let mut dump = None;
    let qa_keys = [
        "qa_cardinality",
        "qa_displacements",
        "qa_characteristic",
        "qa_reconstruction",
    ];
    let not_built = |status: &str| QuandleSize {
        status: status.into(),
        size: None,
        orbit_sizes: vec![],
    };
    let (qa, qa_report) = if m.det_is_zero() {
        for k in qa_keys {
            checks.insert(k.into(), "n/a".into());
        }
        (None, not_built("infinite"))
    } else {
        match build_qa(&m) {
            Err(Error::Internal(_)) => {
                for k in qa_keys {
                    checks.insert(k.into(), verdict(false));
                }
                (None, not_built("failed"))
            }
            Err(x) => return Err(x),
            Ok(qa) => {
                checks.insert("qa_cardinality".into(), verdict(true));
                checks.insert(
                    "qa_displacements".into(),
                    check(dis_structure_check(&qa, &m).map(|c| c.passed()))?,
                );
                checks.insert(
                    "qa_characteristic".into(),
                    check(compare_qa_with_characteristic(&m).map(|_| true))?,
                );
                let reconstruction = if qa.quandle.n() <= RECONSTRUCTION_LIMIT {
                    verdict(group_from_quandle(&qa.quandle) == *m.group())
                } else {
                    "skipped".into()
                };
                checks.insert("qa_reconstruction".into(), reconstruction);
                let report = QuandleSize {
                    status: "finite".into(),
                    size: Some(qa.quandle.n()),
                    orbit_sizes: orbit_sizes(&qa.quandle),
                };
                (Some(qa), report)
            }
        }
    };

    let imq_keys = ["imq_surjection", "imq_reconstruction", "imq_longitudes"];
    let mut main3 = None;
    let mut orbit_bound = None;
    let mut strictly_between_bounds = None;
    let imq_report = if m.det_is_zero() || opts.no_imq {
        for k in imq_keys {
            checks.insert(k.into(), "n/a".into());
        }
        not_built(if m.det_is_zero() {
            "infinite"
        } else {
            "skipped"
        })
    } else {
        let caps = caps_for(&m, opts);
        match compute_imq(d, &m, &caps) {
            Err(Error::ResourceCap(_)) => {
                for k in imq_keys {
                    checks.insert(k.into(), "skipped".into());
                }
                not_built("capped")
            }
            Err(Error::Internal(_)) => {
                checks.insert("imq_saturation".into(), verdict(false));
                not_built("failed")
            }
            Err(x) => return Err(x),
            Ok(imq) => {
                let surjection = match &qa {
                    Some(qa) => check(imq_surjection_to_qa(&imq, qa, &m).map(|_| true))?,
                    None => verdict(false),
                };
                checks.insert("imq_surjection".into(), surjection);
                let reconstruction = if imq.quandle.n() <= RECONSTRUCTION_LIMIT {
                    verdict(group_from_quandle(&imq.quandle) == *m.group())
                } else {
                    "skipped".into()
                };
                checks.insert("imq_reconstruction".into(), reconstruction);
                checks.insert(
                    "imq_longitudes".into(),
                    imq_longitudes(&e, &me, &imq, d.is_even(), &caps)?,
                );
                main3 = Some(check_main3(imq.quandle.n(), m.det(), m.mu()));
                orbit_bound = Some(check_orbit_bound(&imq.orbit_sizes(d), m.det()));
                strictly_between_bounds =
                    between_bounds(imq.quandle.n(), m.det().to_usize(), m.mu());
                let report = QuandleSize {
                    status: "finite".into(),
                    size: Some(imq.quandle.n()),
                    orbit_sizes: orbit_sizes(&imq.quandle),
                };
                dump = Some(imq.quandle);
                report
            }
        }
    };
    if dump.is_none() {
        dump = qa.map(|q| q.quandle);
    }
    if let Some(ok) = main3 {
        checks.insert("main3".into(), verdict(ok));
    }
    if let Some(ok) = orbit_bound {
        checks.insert("orbit_bound".into(), verdict(ok));
    }

    let report = Report {
        components: d.mu(),
        arcs: d.n_arcs(),
        crossings: d.crossings().len(),
        evenized: !d.is_even(),
        det: m.det().to_string(),
        module: GroupReport::new(m.group()),
        ker_w: GroupReport::new(&m.ker_w(0).group),
        longitudes: LongitudeReport {
            orders,
            has_zero_subset: (m.mu() > 1).then_some(zero.is_some()),
            zero_subset: zero,
        },
        qa: qa_report,
        imq: imq_report,
        characteristic,
        parity_profile,
        main3,
        orbit_bound,
        strictly_between_bounds,
        checks,
    };
    Ok(Computed { report, dump })
}

fn between_bounds(size: usize, det: Option<usize>, mu: usize) -> Option<bool> {
    if mu < 2 {
        return None;
    }
    let total = det?.checked_mul(mu)?;
    let upper = total / 2;
    let lower = total.checked_shr(mu as u32 - 1).unwrap_or(0);
    Some(size != upper && size != lower)
}

fn imq_longitudes(
    e: &LinkDiagram,
    me: &NuModule,
    imq: &Imq,
    even: bool,
    caps: &ImqCaps,
) -> Result<String> {
    let fixed = if even {
        longitude_fixes_orbit(e, imq)?
    } else {
        match compute_imq(e, me, caps) {
            Ok(other) => longitude_fixes_orbit(e, &other)?,
            Err(Error::ResourceCap(_)) => return Ok("skipped".into()),
            Err(x) => return Err(x),
        }
    };
    Ok(verdict(fixed))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn size_line(q: &QuandleSize) -> String {
    match q.size {
        Some(n) => format!("{n} elements, orbits {}", join(&q.orbit_sizes)),
        None => q.status.clone(),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn render_text(name: &str, r: &Report) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<18}{v}\n"));
    line("diagram", name.to_string());
    line(
        "size",
        format!(
            "{} components, {} arcs, {} crossings{}",
            r.components,
            r.arcs,
            r.crossings,
            if r.evenized {
                " (evenized for longitudes)"
            } else {
                ""
            }
        ),
    );
    line("det", r.det.clone());
    line("M", r.module.display.clone());
    line("ker w", r.ker_w.display.clone());
    let zero = match (&r.longitudes.has_zero_subset, &r.longitudes.zero_subset) {
        (None, _) => String::new(),
        (Some(false), _) => "; no proper zero sum".into(),
        (Some(true), Some(z)) => format!("; components {} sum to zero", join(z)),
        (Some(true), None) => unreachable!("zero subset present"),
    };
    line(
        "longitude orders",
        format!("{}{zero}", join(&r.longitudes.orders)),
    );
    line("Q_A", size_line(&r.qa));
    line("IMQ", size_line(&r.imq));
    line("characteristic", r.characteristic.clone());
    let profile = match &r.parity_profile {
        None => "capped".into(),
        Some(p) if p.is_empty() => "no torsion".into(),
        Some(p) => p
            .iter()
            .map(|(k, n)| format!("{k}x{n}"))
            .collect::<Vec<_>>()
            .join(" "),
    };
    line("parity profile", profile);
    if let (Some(a), Some(b)) = (r.main3, r.orbit_bound) {
        line(
            "size bounds",
            format!("main {}, per orbit {}", yes_no(a), yes_no(b)),
        );
    }
    if r.strictly_between_bounds == Some(true) {
        line("note", "IMQ size attains neither bound".into());
    }
    let failed = r.failed_checks();
    let summary = if failed.is_empty() {
        format!(
            "{} pass",
            r.checks.values().filter(|v| v.as_str() == "pass").count()
        )
    } else {
        format!("FAILED {}", failed.join(", "))
    };
    line("checks", summary);
    s
}

/// The report as one line of JSON with sorted keys.
pub fn render_machine(name: &str, r: &Report) -> String {
    let mut v = serde_json::to_value(r).expect("serializable");
    v.as_object_mut().expect("object").insert(
        "diagram".into(),
        serde_json::Value::String(name.to_string()),
    );
    serde_json::to_string(&v).expect("serializable")
}
