//! The finite quandle `Q_A` inside `Core(M)`, and the comparisons built on
//! the structure maps `(w, p)` of a module.
//!
//! Component re-indexings act on parity vectors by `out[perm[c]] = p[c]`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::abgroup::{
    cokernel_group, left_kernel, subgroup_quotient, FgAbGroup, GroupElt, IntMatrix,
};
use crate::error::{Error, Result};
use crate::numodule::{permutations, unit, NuModule, Parity};
use crate::quandle::{
    characteristic_subquandle, core_on, is_isomorphic, isomorphism_with, FiniteQuandle, UnionFind,
};

/// Default bound on candidate tests in the decomposition searches.
pub const SEARCH_CAP: u64 = 10_000_000;

#[derive(Clone, Debug)]
pub struct QaQuandle {
    pub quandle: FiniteQuandle,
    pub elements: Vec<GroupElt>,
    /// Component of each element.
    pub component: Vec<usize>,
    /// Component of each orbit, in the orbit numbering of `quandle`.
    pub orbit_component: Vec<usize>,
}

/// `Q_A = ∪_i (s(rep_i) + ker φ)`, with `ker φ = 2 ker w`.
pub fn build_qa(m: &NuModule) -> Result<QaQuandle> {
    if m.det_is_zero() {
        return Err(Error::InfiniteQuandle);
    }
    let g = m.group();
    let kphi = m.ker_phi_elements()?;
    let mut elements = Vec::with_capacity(m.mu() * kphi.len());
    let mut component = Vec::with_capacity(elements.capacity());
    for (i, &a) in m.representatives().iter().enumerate() {
        for k in &kphi {
            elements.push(g.add(m.s(a), k));
            component.push(i);
        }
    }
    let quandle = core_on(g, &elements)?;
    let expected = BigInt::from(m.mu()) * m.det() / (BigInt::one() << (m.mu() - 1));
    if BigInt::from(elements.len()) != expected {
        return Err(Error::Internal(format!(
            "Q_A has {} elements, expected {expected}",
            elements.len()
        )));
    }
    let orbits = quandle.orbits();
    if orbits.len() != m.mu() {
        return Err(Error::Internal(format!(
            "Q_A has {} orbits for {} components",
            orbits.len(),
            m.mu()
        )));
    }
    let orbit_component: Vec<usize> = orbits.iter().map(|o| component[o[0]]).collect();
    for o in &orbits {
        if o.iter().any(|&x| component[x] != component[o[0]]) {
            return Err(Error::Internal(
                "an orbit of Q_A meets two components".into(),
            ));
        }
    }
    Ok(QaQuandle {
        quandle,
        elements,
        component,
        orbit_component,
    })
}

#[derive(Clone, Debug)]
pub struct DisCheck {
    pub dis: FgAbGroup,
    pub ker_phi: FgAbGroup,
    pub isomorphic: bool,
    /// Every displacement is `x ↦ x + k` for some `k ∈ ker φ`.
    pub translations: bool,
}

impl DisCheck {
    pub fn passed(&self) -> bool {
        self.isomorphic && self.translations
    }
}

pub fn dis_structure_check(qa: &QaQuandle, m: &NuModule) -> Result<DisCheck> {
    let g = m.group();
    let dis = qa.quandle.displacement_group()?;
    let kphi = m.ker_phi_elements()?;
    let kset: HashSet<&GroupElt> = kphi.iter().collect();
    let translations = dis.perms.iter().all(|d| {
        let k = g.sub(&qa.elements[d[0]], &qa.elements[0]);
        kset.contains(&k)
            && (0..qa.elements.len()).all(|x| qa.elements[d[x]] == g.add(&qa.elements[x], &k))
    });
    let doubled: Vec<GroupElt> = m.ker_w_generators().iter().map(|x| g.add(x, x)).collect();
    let ker_phi = crate::abgroup::subgroup_structure(g, &doubled);
    Ok(DisCheck {
        isomorphic: dis.group == ker_phi && dis.order() == kphi.len(),
        dis: dis.group,
        ker_phi,
        translations,
    })
}

pub fn permute_parity(p: &[u8], perm: &[usize]) -> Parity {
    let mut out = vec![0u8; p.len()];
    for (c, &b) in p.iter().enumerate() {
        out[perm[c]] = b;
    }
    out
}

fn xor(a: &[u8], b: &[u8]) -> Parity {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

mod gf2 {
    use super::{xor, Parity};

    /// Echelon basis; each entry keeps its pivot and its combination of the inputs.
    pub struct Echelon {
        rows: Vec<(usize, Parity, Vec<u8>)>,
        n_inputs: usize,
    }

    impl Echelon {
        pub fn new(vecs: &[Parity]) -> Echelon {
            let mut e = Echelon {
                rows: Vec::new(),
                n_inputs: vecs.len(),
            };
            for (i, v) in vecs.iter().enumerate() {
                let mut comb = vec![0u8; vecs.len()];
                comb[i] = 1;
                let (v, comb) = e.reduce_with(v.clone(), comb);
                if let Some(pivot) = v.iter().position(|&b| b == 1) {
                    e.rows.push((pivot, v, comb));
                }
            }
            e
        }

        fn reduce_with(&self, mut v: Parity, mut comb: Vec<u8>) -> (Parity, Vec<u8>) {
            for (pivot, row, c) in &self.rows {
                if v[*pivot] == 1 {
                    v = xor(&v, row);
                    comb = xor(&comb, c);
                }
            }
            (v, comb)
        }

        /// Canonical representative modulo the span.
        pub fn reduce(&self, v: &[u8]) -> Parity {
            self.reduce_with(v.to_vec(), vec![0u8; self.n_inputs]).0
        }

        /// Coefficients over the inputs summing to `v`.
        pub fn solve(&self, v: &[u8]) -> Option<Vec<u8>> {
            let (rest, comb) = self.reduce_with(v.to_vec(), vec![0u8; self.n_inputs]);
            rest.iter().all(|&b| b == 0).then_some(comb)
        }
    }

    #[derive(Clone, Copy, Debug)]
    pub enum Op {
        /// Row `.1` += row `.0`.
        Add(usize, usize),
        Swap(usize, usize),
    }

    fn apply(rows: &mut [Parity], op: Op) {
        match op {
            Op::Add(a, b) => rows[b] = xor(&rows[b], &rows[a]),
            Op::Swap(a, b) => rows.swap(a, b),
        }
    }

    /// Ops bringing `rows` to independent rows followed by zero rows.
    fn echelon_ops(rows: &mut [Parity]) -> (Vec<Op>, usize) {
        let mut ops = Vec::new();
        let mut rank = 0;
        for i in 0..rows.len() {
            for j in 0..rank {
                let pivot = rows[j]
                    .iter()
                    .position(|&b| b == 1)
                    .expect("independent row");
                if rows[i][pivot] == 1 {
                    let op = Op::Add(j, i);
                    apply(rows, op);
                    ops.push(op);
                }
            }
            if rows[i].contains(&1) {
                if i != rank {
                    let op = Op::Swap(rank, i);
                    apply(rows, op);
                    ops.push(op);
                }
                rank += 1;
            }
        }
        (ops, rank)
    }

    /// Row operations turning the tuple `from` into the tuple `to`; they
    /// exist exactly when both tuples span the same space.
    pub fn transform(from: &[Parity], to: &[Parity]) -> Option<Vec<Op>> {
        let mut a = from.to_vec();
        let mut b = to.to_vec();
        let (ops_a, rank_a) = echelon_ops(&mut a);
        let (ops_b, rank_b) = echelon_ops(&mut b);
        if rank_a != rank_b {
            return None;
        }
        // b[l] = Σ_j m[l][j] a[j] on the first rank rows.
        let basis = Echelon::new(&a[..rank_a]);
        let mut m: Vec<Parity> = Vec::with_capacity(rank_a);
        for row in &b[..rank_b] {
            m.push(basis.solve(row)?);
        }
        // Reduce m to the identity; the same ops reversed build m from the identity.
        let mut reduce_ops = Vec::new();
        for col in 0..rank_a {
            let r = (col..rank_a).find(|&r| m[r][col] == 1).expect("invertible");
            if r != col {
                reduce_ops.push(Op::Swap(col, r));
                apply(&mut m, Op::Swap(col, r));
            }
            for r in 0..rank_a {
                if r != col && m[r][col] == 1 {
                    reduce_ops.push(Op::Add(col, r));
                    apply(&mut m, Op::Add(col, r));
                }
            }
        }
        let mut ops = ops_a;
        ops.extend(reduce_ops.into_iter().rev());
        ops.extend(ops_b.into_iter().rev());
        let mut check = from.to_vec();
        for &op in &ops {
            apply(&mut check, op);
        }
        debug_assert_eq!(check, to);
        Some(ops)
    }
}

fn apply_ops(g: &FgAbGroup, rows: &mut [GroupElt], ops: &[gf2::Op]) {
    for &op in ops {
        match op {
            gf2::Op::Add(a, b) => rows[b] = g.add(&rows[b], &rows[a]),
            gf2::Op::Swap(a, b) => rows.swap(a, b),
        }
    }
}

struct Budget {
    used: u64,
    cap: u64,
}

impl Budget {
    fn tick(&mut self) -> std::result::Result<(), Capped> {
        self.used += 1;
        if self.used > self.cap {
            Err(Capped)
        } else {
            Ok(())
        }
    }
}

struct Capped;

/// The 2-primary part of the torsion of `M`, with parities and orders.
struct TwoPrimary {
    elems: Vec<GroupElt>,
    parity: Vec<Parity>,
    order: Vec<BigInt>,
    exps: Vec<u32>,
}

impl TwoPrimary {
    fn new(m: &NuModule) -> Result<TwoPrimary> {
        let elems = m.two_primary_elements()?;
        let g = m.group();
        Ok(TwoPrimary {
            parity: elems.iter().map(|x| m.p(x)).collect(),
            order: elems
                .iter()
                .map(|x| g.order_of(x).expect("torsion"))
                .collect(),
            elems,
            exps: g.two_primary_exponents(),
        })
    }

    /// Elements `t_j` of order `2^{exps[j]}` with `p(t_j) = targets[j]` that
    /// generate the 2-primary part.
    fn find_basis(
        &self,
        g: &FgAbGroup,
        targets: &[Parity],
        budget: &mut Budget,
    ) -> std::result::Result<Option<Vec<GroupElt>>, Capped> {
        let mut span: HashSet<GroupElt> = HashSet::from([g.zero()]);
        let mut chosen = Vec::new();
        self.extend(g, targets, &mut span, &mut chosen, budget)
    }

    fn extend(
        &self,
        g: &FgAbGroup,
        targets: &[Parity],
        span: &mut HashSet<GroupElt>,
        chosen: &mut Vec<GroupElt>,
        budget: &mut Budget,
    ) -> std::result::Result<Option<Vec<GroupElt>>, Capped> {
        let j = chosen.len();
        if j == self.exps.len() {
            return Ok(Some(chosen.clone()));
        }
        let ord = BigInt::one() << self.exps[j];
        let half = BigInt::one() << (self.exps[j] - 1);
        for i in 0..self.elems.len() {
            budget.tick()?;
            if self.order[i] != ord || self.parity[i] != targets[j] {
                continue;
            }
            let t = &self.elems[i];
            // Independent iff the order-2 element of <t> is new.
            if span.contains(&g.smul(&half, t)) {
                continue;
            }
            let mut next = HashSet::with_capacity(span.len() << self.exps[j]);
            let mut mult = g.zero();
            for _ in 0..(1u64 << self.exps[j]) {
                next.extend(span.iter().map(|s| g.add(s, &mult)));
                mult = g.add(&mult, t);
            }
            chosen.push(t.clone());
            std::mem::swap(span, &mut next);
            let found = self.extend(g, targets, span, chosen, budget)?;
            std::mem::swap(span, &mut next);
            chosen.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}

/// A basis `h` of the `w`-kernel in the free coordinates and an element `f`
/// with `w(f) = 1`, both with zero torsion coordinates.
fn free_frame(m: &NuModule) -> (GroupElt, Vec<GroupElt>) {
    let g = m.group();
    let nt = g.torsion().len();
    let r = g.free_rank();
    let wcol: Vec<Vec<BigInt>> = (0..r).map(|j| vec![m.w(&g.basis(nt + j))]).collect();
    let ker = left_kernel(&IntMatrix::from_rows(1, &wcol));
    let embed = |free: Vec<BigInt>| {
        let mut c = vec![BigInt::zero(); nt];
        c.extend(free);
        g.reduce(c)
    };
    let h = (0..ker.rows())
        .map(|i| embed((0..r).map(|j| ker[(i, j)].clone()).collect()))
        .collect();
    let f = embed(m.s(0).0[nt..].to_vec());
    (f, h)
}

/// Adds torsion generators so that `p(x)` becomes exactly `target`.
fn fix_parity(
    m: &NuModule,
    x: &GroupElt,
    target: &[u8],
    tors: &[GroupElt],
    tors_span: &gf2::Echelon,
) -> Option<GroupElt> {
    let coeffs = tors_span.solve(&xor(&m.p(x), target))?;
    let g = m.group();
    Some(
        tors.iter()
            .zip(&coeffs)
            .filter(|(_, &c)| c == 1)
            .fold(x.clone(), |acc, (t, _)| g.add(&acc, t)),
    )
}

/// Generators of the odd part of the torsion, one per coordinate.
fn odd_generators(g: &FgAbGroup) -> Vec<(GroupElt, BigInt)> {
    g.torsion()
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let two = BigInt::one() << t.trailing_zeros().expect("nonzero");
            let odd = t / &two;
            (!odd.is_one()).then(|| (g.smul(&two, &g.basis(i)), odd))
        })
        .collect()
}

/// True when `gens` with the given orders (`None` for infinite) form a
/// direct-sum basis of `g`.
fn is_direct_basis(g: &FgAbGroup, gens: &[GroupElt], orders: &[Option<BigInt>]) -> bool {
    let (q, _) = subgroup_quotient(g, gens);
    if !q.is_trivial() {
        return false;
    }
    for (x, o) in gens.iter().zip(orders) {
        match (o, g.order_of(x)) {
            (None, None) => {}
            (Some(a), Some(b)) if *a == b => {}
            _ => return false,
        }
    }
    let diag: Vec<Vec<BigInt>> = orders
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let mut row = vec![BigInt::zero(); orders.len()];
            row[i] = o.clone().unwrap_or_else(BigInt::zero);
            row
        })
        .collect();
    cokernel_group(&IntMatrix::from_rows(orders.len(), &diag)) == *g
}

/// A decomposition `M = Z f_1 ⊕ ... ⊕ Z f_r ⊕ Z/2^{n_1} t_1 ⊕ ... ⊕ B` whose
/// generator `l` belongs to component `indexing[l]`.
#[derive(Clone, Debug)]
pub struct CharacteristicWitness {
    pub indexing: Vec<usize>,
    /// `f_1..f_r` then `t_1..t_k`.
    pub generators: Vec<GroupElt>,
    /// `None` for the free generators.
    pub orders: Vec<Option<BigInt>>,
    /// Generators of the odd-order part.
    pub odd_generators: Vec<GroupElt>,
}

impl CharacteristicWitness {
    /// `φ` of each generator after re-indexing, in the form `(w, p_2, ..., p_mu)`.
    pub fn phi_images(&self, m: &NuModule) -> Vec<(BigInt, Parity)> {
        self.generators
            .iter()
            .map(|x| {
                let p = m.p(x);
                (m.w(x), self.indexing[1..].iter().map(|&c| p[c]).collect())
            })
            .collect()
    }

    pub fn verify(&self, m: &NuModule) -> bool {
        let mu = m.mu();
        let phi_ok = self.phi_images(m).iter().enumerate().all(|(l, (w, p))| {
            let want_w = if l == 0 {
                BigInt::one()
            } else {
                BigInt::zero()
            };
            *w == want_w && (1..mu).all(|i| p[i - 1] == u8::from(i == l))
        });
        let odd = odd_generators(m.group());
        let mut gens = self.generators.clone();
        let mut orders = self.orders.clone();
        for (x, o) in odd {
            gens.push(x);
            orders.push(Some(o));
        }
        phi_ok && self.generators.len() == mu && is_direct_basis(m.group(), &gens, &orders)
    }
}

#[derive(Clone, Debug)]
pub enum Compatibility {
    Yes(CharacteristicWitness),
    /// Every indexing was tried.
    No {
        indexings: usize,
    },
    Unknown(String),
}

impl Compatibility {
    pub fn verdict(&self) -> &'static str {
        match self {
            Compatibility::Yes(_) => "yes",
            Compatibility::No { .. } => "no",
            Compatibility::Unknown(_) => "unknown",
        }
    }
}

pub fn characteristic_compatibility(m: &NuModule) -> Result<Compatibility> {
    characteristic_compatibility_capped(m, SEARCH_CAP)
}

pub fn characteristic_compatibility_capped(m: &NuModule, cap: u64) -> Result<Compatibility> {
    let g = m.group();
    let mu = m.mu();
    let r = g.free_rank();
    let two = TwoPrimary::new(m)?;
    let (fstar, h) = free_frame(m);
    let mut budget = Budget { used: 0, cap };
    let perms = permutations(mu);
    for sigma in &perms {
        let c0 = sigma[0];
        let e0 = unit(mu, c0);
        let targets_t: Vec<Parity> = (r..mu).map(|l| xor(&unit(mu, sigma[l]), &e0)).collect();
        let targets_f: Vec<Parity> = (1..r).map(|l| xor(&unit(mu, sigma[l]), &e0)).collect();
        let pt = gf2::Echelon::new(&targets_t);
        let psi = |x: &[u8]| pt.reduce(x);
        let psi_h: Vec<Parity> = h.iter().map(|x| psi(&m.p(x))).collect();
        let psi_targets: Vec<Parity> = targets_f.iter().map(|x| psi(x)).collect();
        if budget.tick().is_err() {
            return Ok(Compatibility::Unknown(format!("search cap {cap} reached")));
        }
        let Some(ops) = gf2::transform(&psi_h, &psi_targets) else {
            continue;
        };
        let span_h = gf2::Echelon::new(&psi_h);
        let Some(c) = span_h.solve(&psi(&xor(&e0, &m.p(&fstar)))) else {
            continue;
        };
        let tors = match two.find_basis(g, &targets_t, &mut budget) {
            Ok(Some(t)) => t,
            Ok(None) => continue,
            Err(Capped) => return Ok(Compatibility::Unknown(format!("search cap {cap} reached"))),
        };
        let tors_span = gf2::Echelon::new(&tors.iter().map(|t| m.p(t)).collect::<Vec<_>>());
        let internal = || Error::Internal("characteristic witness construction failed".into());
        let mut f1 = fstar.clone();
        for (hi, &ci) in h.iter().zip(&c) {
            if ci == 1 {
                f1 = g.add(&f1, hi);
            }
        }
        let mut gens = vec![fix_parity(m, &f1, &e0, &tors, &tors_span).ok_or_else(internal)?];
        let mut hs = h.clone();
        apply_ops(g, &mut hs, &ops);
        for (x, t) in hs.iter().zip(&targets_f) {
            gens.push(fix_parity(m, x, t, &tors, &tors_span).ok_or_else(internal)?);
        }
        let mut orders: Vec<Option<BigInt>> = vec![None; r];
        for (t, &e) in tors.iter().zip(&two.exps) {
            gens.push(t.clone());
            orders.push(Some(BigInt::one() << e));
        }
        let witness = CharacteristicWitness {
            indexing: sigma.clone(),
            generators: gens,
            orders,
            odd_generators: odd_generators(g).into_iter().map(|(x, _)| x).collect(),
        };
        if !witness.verify(m) {
            return Err(Error::Internal(
                "characteristic witness failed verification".into(),
            ));
        }
        return Ok(Compatibility::Yes(witness));
    }
    Ok(Compatibility::No {
        indexings: perms.len(),
    })
}

/// Whether `Q_A ≅ Core'(ker w)`, cross-checked against the decomposition search.
pub fn compare_qa_with_characteristic(m: &NuModule) -> Result<bool> {
    let qa = build_qa(m)?;
    let core = characteristic_subquandle(&m.group().torsion_subgroup())?;
    if core.n() != qa.quandle.n() {
        return Err(Error::Internal(format!(
            "|Core'(ker w)| = {} but |Q_A| = {}",
            core.n(),
            qa.quandle.n()
        )));
    }
    let iso = is_isomorphic(&qa.quandle, &core).is_some();
    match characteristic_compatibility(m)? {
        Compatibility::Yes(_) if !iso => Err(Error::Internal(
            "a compatible decomposition exists but Q_A is not isomorphic to Core'(ker w)".into(),
        )),
        Compatibility::No { .. } if iso => Err(Error::Internal(
            "Q_A is isomorphic to Core'(ker w) but no compatible decomposition exists".into(),
        )),
        _ => Ok(iso),
    }
}

/// A module isomorphism given on a direct-sum basis of the source, carrying
/// `(w, p)` to `(w, p)` after re-indexing the source components by `indexing`.
#[derive(Clone, Debug)]
pub struct PhiIso {
    pub indexing: Vec<usize>,
    pub domain: Vec<GroupElt>,
    pub domain_orders: Vec<Option<BigInt>>,
    pub images: Vec<GroupElt>,
}

impl PhiIso {
    pub fn verify(&self, m1: &NuModule, m2: &NuModule) -> bool {
        let (g1, g2) = (m1.group(), m2.group());
        if g1 != g2 || !is_direct_basis(g1, &self.domain, &self.domain_orders) {
            return false;
        }
        let maps_ok = self
            .domain
            .iter()
            .zip(&self.images)
            .zip(&self.domain_orders)
            .all(|((x, y), o)| {
                let order_ok = match o {
                    Some(o) => g2.smul(o, y).is_zero(),
                    None => true,
                };
                order_ok
                    && m1.w(x) == m2.w(y)
                    && permute_parity(&m1.p(x), &self.indexing) == m2.p(y)
            });
        let (q, _) = subgroup_quotient(g2, &self.images);
        maps_ok && q.is_trivial()
    }
}

#[derive(Clone, Debug)]
pub enum Obstruction {
    ComponentCount,
    Group,
    ParityProfile,
    Characteristic,
    QaNotIsomorphic,
    /// No indexing admits a compatible isomorphism.
    Exhausted {
        indexings: usize,
    },
}

#[derive(Clone, Debug)]
pub enum Equivalence {
    Equivalent {
        module_iso: Option<PhiIso>,
        qa_iso: Option<Vec<usize>>,
    },
    NotEquivalent(Obstruction),
    Unknown(String),
}

impl Equivalence {
    pub fn verdict(&self) -> &'static str {
        match self {
            Equivalence::Equivalent { .. } => "equivalent",
            Equivalence::NotEquivalent(_) => "not-equivalent",
            Equivalence::Unknown(_) => "unknown",
        }
    }

    pub fn is_equivalent(&self) -> bool {
        matches!(self, Equivalence::Equivalent { .. })
    }
}

/// Search for a compatible isomorphism over every re-indexing. Complete: the
/// torsion part is searched exhaustively, and the free part reduces to linear
/// algebra mod 2 because integer matrices of determinant ±1 reduce onto every
/// invertible matrix over `Z/2`.
pub fn find_phi_iso(
    m1: &NuModule,
    m2: &NuModule,
    cap: u64,
) -> Result<std::result::Result<Option<PhiIso>, usize>> {
    let (g1, g2) = (m1.group(), m2.group());
    if m1.mu() != m2.mu() || g1 != g2 {
        return Ok(Ok(None));
    }
    let mu = m1.mu();
    let two2 = TwoPrimary::new(m2)?;
    let (f1, h1) = free_frame(m1);
    let (f2, h2) = free_frame(m2);
    // Canonical 2-primary generators of the source, one per even coordinate.
    let even: Vec<(usize, u32, BigInt)> = g1
        .torsion()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_even())
        .map(|(i, t)| {
            let e = t.trailing_zeros().expect("nonzero") as u32;
            (i, e, t >> e)
        })
        .collect();
    let u: Vec<GroupElt> = even
        .iter()
        .map(|(i, _, odd)| g1.smul(odd, &g1.basis(*i)))
        .collect();
    let mut budget = Budget { used: 0, cap };
    let perms = permutations(mu);
    for pi in &perms {
        if budget.tick().is_err() {
            return Ok(Err(budget.used as usize));
        }
        let targets: Vec<Parity> = u.iter().map(|x| permute_parity(&m1.p(x), pi)).collect();
        let pt = gf2::Echelon::new(&targets);
        let psi1 = |x: &GroupElt| pt.reduce(&permute_parity(&m1.p(x), pi));
        let psi2 = |x: &GroupElt| pt.reduce(&m2.p(x));
        let from: Vec<Parity> = h2.iter().map(psi2).collect();
        let to: Vec<Parity> = h1.iter().map(psi1).collect();
        let Some(ops) = gf2::transform(&from, &to) else {
            continue;
        };
        let span2 = gf2::Echelon::new(&from);
        let Some(c) = span2.solve(&xor(&psi1(&f1), &psi2(&f2))) else {
            continue;
        };
        let v = match two2.find_basis(g2, &targets, &mut budget) {
            Ok(Some(v)) => v,
            Ok(None) => continue,
            Err(Capped) => return Ok(Err(budget.used as usize)),
        };
        let internal = || Error::Internal("compatible isomorphism construction failed".into());
        let tors_span = gf2::Echelon::new(&v.iter().map(|t| m2.p(t)).collect::<Vec<_>>());
        let mut domain = vec![f1.clone()];
        let mut images = Vec::new();
        let mut img_f = f2.clone();
        for (hj, &cj) in h2.iter().zip(&c) {
            if cj == 1 {
                img_f = g2.add(&img_f, hj);
            }
        }
        images.push(
            fix_parity(m2, &img_f, &permute_parity(&m1.p(&f1), pi), &v, &tors_span)
                .ok_or_else(internal)?,
        );
        let mut hs = h2.clone();
        apply_ops(g2, &mut hs, &ops);
        for (x, y) in h1.iter().zip(&hs) {
            domain.push(x.clone());
            images.push(
                fix_parity(m2, y, &permute_parity(&m1.p(x), pi), &v, &tors_span)
                    .ok_or_else(internal)?,
            );
        }
        let mut domain_orders = vec![None; domain.len()];
        for (i, t) in g1.torsion().iter().enumerate() {
            domain.push(g1.basis(i));
            domain_orders.push(Some(t.clone()));
            let e = t.trailing_zeros().expect("nonzero") as u32;
            let odd_part = g2.smul(&(BigInt::one() << e), &g2.basis(i));
            let image = match even.iter().position(|(j, _, _)| *j == i) {
                None => odd_part,
                Some(slot) => {
                    // 1 = a·odd + b·2^e splits the coordinate into its two parts.
                    let ext = (t >> e).extended_gcd(&(BigInt::one() << e));
                    g2.add(&g2.smul(&ext.x, &v[slot]), &g2.smul(&ext.y, &odd_part))
                }
            };
            images.push(image);
        }
        let iso = PhiIso {
            indexing: pi.clone(),
            domain,
            domain_orders,
            images,
        };
        if !iso.verify(m1, m2) {
            return Err(Error::Internal(
                "compatible isomorphism failed verification".into(),
            ));
        }
        return Ok(Ok(Some(iso)));
    }
    Ok(Ok(None))
}

pub fn phi_equivalent(m1: &NuModule, m2: &NuModule) -> Result<Equivalence> {
    phi_equivalent_capped(m1, m2, SEARCH_CAP)
}

pub fn phi_equivalent_capped(m1: &NuModule, m2: &NuModule, cap: u64) -> Result<Equivalence> {
    use Equivalence::*;
    if m1.mu() != m2.mu() {
        return Ok(NotEquivalent(Obstruction::ComponentCount));
    }
    if m1.group() != m2.group() {
        return Ok(NotEquivalent(Obstruction::Group));
    }
    if m1.torsion_parity_profile()? != m2.torsion_parity_profile()? {
        return Ok(NotEquivalent(Obstruction::ParityProfile));
    }
    let c1 = characteristic_compatibility_capped(m1, cap)?;
    let c2 = characteristic_compatibility_capped(m2, cap)?;
    if matches!(
        (&c1, &c2),
        (Compatibility::Yes(_), Compatibility::No { .. })
            | (Compatibility::No { .. }, Compatibility::Yes(_))
    ) {
        return Ok(NotEquivalent(Obstruction::Characteristic));
    }
    let search = find_phi_iso(m1, m2, cap)?;
    if !m1.det_is_zero() {
        let qa_iso = is_isomorphic(&build_qa(m1)?.quandle, &build_qa(m2)?.quandle);
        return match (qa_iso, search) {
            (Some(f), Ok(Some(iso))) => Ok(Equivalent {
                module_iso: Some(iso),
                qa_iso: Some(f),
            }),
            (Some(f), Err(_)) => Ok(Equivalent {
                module_iso: None,
                qa_iso: Some(f),
            }),
            (None, Ok(None) | Err(_)) => Ok(NotEquivalent(Obstruction::QaNotIsomorphic)),
            _ => Err(Error::Internal(
                "quandle isomorphism and module search disagree".into(),
            )),
        };
    }
    Ok(match search {
        Ok(Some(iso)) => Equivalent {
            module_iso: Some(iso),
            qa_iso: None,
        },
        Ok(None) => NotEquivalent(Obstruction::Exhausted {
            indexings: permutations(m1.mu()).len(),
        }),
        Err(used) => Unknown(format!("search cap reached after {used} steps")),
    })
}

/// Components grouped by whether an automorphism of `Q_A` carries one orbit to the other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reindexing {
    pub classes: Vec<Vec<usize>>,
}

impl Reindexing {
    /// Components alone in their class, when others exist.
    pub fn singled_out(&self) -> Vec<usize> {
        if self.classes.len() < 2 {
            return Vec::new();
        }
        self.classes
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .collect()
    }
}

pub fn reindexing_sensitivity(m: &NuModule) -> Result<Reindexing> {
    let mu = m.mu();
    if mu == 1 {
        return Ok(Reindexing {
            classes: vec![vec![0]],
        });
    }
    let qa = build_qa(m)?;
    let q = &qa.quandle;
    let anchor: Vec<usize> = (0..mu)
        .map(|c| {
            qa.component
                .iter()
                .position(|&x| x == c)
                .expect("nonempty orbit")
        })
        .collect();
    let mut uf = UnionFind::new(mu);
    for (i, &a) in anchor.iter().enumerate() {
        for j in i + 1..mu {
            if uf.find(i) == uf.find(j) {
                continue;
            }
            // Some automorphism sends orbit i to orbit j iff one sends anchor i into orbit j.
            let hit = (0..q.n())
                .filter(|&y| qa.component[y] == j)
                .any(|y| isomorphism_with(q, q, &[(a, y)]).is_some());
            if hit {
                uf.union(i, j);
            }
        }
    }
    let roots: Vec<usize> = (0..mu).map(|c| uf.find(c)).collect();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for c in 0..mu {
        match classes.iter_mut().find(|cl| roots[cl[0]] == roots[c]) {
            Some(cl) => cl.push(c),
            None => classes.push(vec![c]),
        }
    }
    Ok(Reindexing { classes })
}
