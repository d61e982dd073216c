//! Finite involutory medial quandles given by operation tables.
//!
//! `op(x, y)` is `x ▷ y`; the translation `β_y` is `x ↦ x ▷ y`. Permutations
//! are vectors of images and compose right to left.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use crate::abgroup::{cokernel_group, FgAbGroup, GroupElt, IntMatrix};
use crate::error::{Error, Result};

pub type Perm = Vec<usize>;

/// Default bound on the size of a displacement group closure.
pub const DIS_CAP: usize = 1_000_000;

pub fn compose(f: &[usize], g: &[usize]) -> Perm {
    g.iter().map(|&x| f[x]).collect()
}

pub fn is_identity(f: &[usize]) -> bool {
    f.iter().enumerate().all(|(i, &x)| i == x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axiom {
    Idempotent,
    Involutory,
    RightDistributive,
    Medial,
}

/// A failing instance: the elements bound to the axiom's variables in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub elems: Vec<usize>,
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} fails at {:?}", self.axiom, self.elems)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteQuandle {
    n: usize,
    op: Vec<usize>,
    labels: Vec<String>,
}

impl FiniteQuandle {
    /// Row-major table: `op[x * n + y] = x ▷ y`.
    pub fn from_table(n: usize, op: Vec<usize>) -> Result<Self> {
        if op.len() != n * n || op.iter().any(|&v| v >= n) {
            return Err(Error::Precondition(
                "table is not an n by n table over 0..n".into(),
            ));
        }
        Ok(FiniteQuandle {
            n,
            op,
            labels: (0..n).map(|i| i.to_string()).collect(),
        })
    }

    pub fn trivial(n: usize) -> Self {
        let op = (0..n).flat_map(|x| std::iter::repeat_n(x, n)).collect();
        Self::from_table(n, op).expect("well formed")
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n, "one label per element");
        self.labels = labels;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn op(&self, x: usize, y: usize) -> usize {
        self.op[x * self.n + y]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn translation(&self, y: usize) -> Perm {
        (0..self.n).map(|x| self.op(x, y)).collect()
    }

    pub fn fixed_points(&self, y: usize) -> usize {
        (0..self.n).filter(|&x| self.op(x, y) == x).count()
    }

    /// At most `limit` violations, in lexicographic order of instances.
    pub fn check_axioms_limited(&self, limit: usize) -> Vec<AxiomViolation> {
        let n = self.n;
        let mut out = Vec::new();
        let mut push = |axiom: Axiom, elems: Vec<usize>| {
            if out.len() < limit {
                out.push(AxiomViolation { axiom, elems });
            }
        };
        for x in 0..n {
            if self.op(x, x) != x {
                push(Axiom::Idempotent, vec![x]);
            }
        }
        for x in 0..n {
            for y in 0..n {
                if self.op(self.op(x, y), y) != x {
                    push(Axiom::Involutory, vec![x, y]);
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let xy = self.op(x, y);
                for z in 0..n {
                    if self.op(xy, z) != self.op(self.op(x, z), self.op(y, z)) {
                        push(Axiom::RightDistributive, vec![x, y, z]);
                    }
                }
            }
        }
        for y in 0..n {
            for z in 0..n {
                let yz = self.op(y, z);
                for x in 0..n {
                    let xz = self.op(x, z);
                    let row_l = &self.op[..];
                    for w in 0..n {
                        let l = row_l[self.op(w, x) * n + yz];
                        let r = row_l[self.op(w, y) * n + xz];
                        if l != r {
                            push(Axiom::Medial, vec![w, x, y, z]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Empty iff the table is an involutory medial quandle.
    pub fn check_axioms(&self) -> Vec<AxiomViolation> {
        self.check_axioms_limited(16)
    }

    pub fn is_valid(&self) -> bool {
        self.check_axioms_limited(1).is_empty()
    }

    /// Failures of `β_{y▷z} = β_z β_y β_z`, `β_y β_z β_x = β_x β_z β_y` and
    /// commutation of displacements, as messages.
    pub fn check_translation_identities(&self) -> Vec<String> {
        let n = self.n;
        let beta: Vec<Perm> = (0..n).map(|y| self.translation(y)).collect();
        let mut out = Vec::new();
        for y in 0..n {
            for z in 0..n {
                let lhs = &beta[self.op(y, z)];
                let rhs = compose(&beta[z], &compose(&beta[y], &beta[z]));
                if *lhs != rhs {
                    out.push(format!("conjugation identity fails at ({y}, {z})"));
                }
                for x in 0..n {
                    let a = compose(&beta[y], &compose(&beta[z], &beta[x]));
                    let b = compose(&beta[x], &compose(&beta[z], &beta[y]));
                    if a != b {
                        out.push(format!("triple identity fails at ({x}, {y}, {z})"));
                    }
                }
            }
        }
        if let Some(z0) = (0..n).next() {
            let gens: Vec<Perm> = (0..n).map(|y| compose(&beta[y], &beta[z0])).collect();
            for a in &gens {
                for b in &gens {
                    if compose(a, b) != compose(b, a) {
                        out.push("displacements do not commute".into());
                        return out;
                    }
                }
            }
        }
        out
    }

    /// Orbit index of each element; orbits are numbered by least member.
    pub fn orbit_ids(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.n);
        for x in 0..self.n {
            for y in 0..self.n {
                uf.union(x, self.op(x, y));
            }
        }
        let mut ids = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut by_root = HashMap::new();
        for (x, id) in ids.iter_mut().enumerate() {
            let r = uf.find(x);
            *id = *by_root.entry(r).or_insert_with(|| {
                next += 1;
                next - 1
            });
        }
        ids
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let ids = self.orbit_ids();
        let k = ids.iter().copied().max().map_or(0, |m| m + 1);
        let mut out = vec![Vec::new(); k];
        for (x, &i) in ids.iter().enumerate() {
            out[i].push(x);
        }
        out
    }

    pub fn displacement_group(&self) -> Result<DisGroup> {
        self.displacement_group_capped(DIS_CAP)
    }

    pub fn displacement_group_capped(&self, cap: usize) -> Result<DisGroup> {
        DisGroup::build(self, cap)
    }

    pub fn is_semiregular(&self) -> Result<bool> {
        let dis = self.displacement_group()?;
        Ok(dis
            .perms
            .iter()
            .filter(|d| !is_identity(d))
            .all(|d| d.iter().enumerate().all(|(i, &x)| i != x)))
    }

    /// Restriction to `elems`, renumbered in the given order.
    pub fn subquandle(&self, elems: &[usize]) -> Result<FiniteQuandle> {
        let pos: HashMap<usize, usize> = elems.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let k = elems.len();
        let mut op = Vec::with_capacity(k * k);
        for &x in elems {
            for &y in elems {
                let v = pos
                    .get(&self.op(x, y))
                    .ok_or_else(|| Error::Precondition("subset is not closed".into()))?;
                op.push(*v);
            }
        }
        Ok(FiniteQuandle::from_table(k, op)?
            .with_labels(elems.iter().map(|&x| self.labels[x].clone()).collect()))
    }

    /// Element `x` becomes `perm[x]`.
    pub fn relabel(&self, perm: &[usize]) -> FiniteQuandle {
        let n = self.n;
        let mut op = vec![0; n * n];
        let mut labels = vec![String::new(); n];
        for x in 0..n {
            labels[perm[x]] = self.labels[x].clone();
            for y in 0..n {
                op[perm[x] * n + perm[y]] = perm[self.op(x, y)];
            }
        }
        FiniteQuandle { n, op, labels }
    }

    /// First line `n`, then `n` rows of `n` element indices.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for x in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|y| self.op(x, y).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<FiniteQuandle> {
        let mut tokens = text.split_whitespace().enumerate();
        let bad = |i: usize, m: &str| Error::Syntax {
            line: 0,
            column: i,
            message: m.to_string(),
        };
        let n: usize = tokens
            .next()
            .ok_or_else(|| bad(0, "empty table"))?
            .1
            .parse()
            .map_err(|_| bad(0, "bad element count"))?;
        let op = tokens
            .map(|(i, t)| t.parse::<usize>().map_err(|_| bad(i, "bad entry")))
            .collect::<Result<Vec<_>>>()?;
        FiniteQuandle::from_table(n, op)
    }
}

#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    /// Adds a singleton and returns it.
    pub fn push(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.parent.len() - 1
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Keeps the smaller root; returns false if already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = (ra.min(rb), ra.max(rb));
        self.parent[hi] = lo;
        true
    }
}

/// Displacements as permutations, with an abstract isomorph.
#[derive(Clone, Debug)]
pub struct DisGroup {
    /// `perms[0]` is the identity.
    pub perms: Vec<Perm>,
    pub generators: Vec<Perm>,
    /// Exponent vector over `generators` reaching each member.
    pub words: Vec<Vec<i64>>,
    pub group: FgAbGroup,
}

impl DisGroup {
    fn build(q: &FiniteQuandle, cap: usize) -> Result<DisGroup> {
        let n = q.n;
        let id: Perm = (0..n).collect();
        let mut generators: Vec<Perm> = Vec::new();
        if n > 0 {
            let b0 = q.translation(0);
            let mut seen = HashSet::new();
            for y in 0..n {
                let g = compose(&q.translation(y), &b0);
                if !is_identity(&g) && seen.insert(g.clone()) {
                    generators.push(g);
                }
            }
        }
        let k = generators.len();
        let mut index: HashMap<Perm, usize> = HashMap::new();
        index.insert(id.clone(), 0);
        let mut perms = vec![id];
        let mut words = vec![vec![0i64; k]];
        let mut relations: Vec<Vec<i64>> = Vec::new();
        let mut i = 0;
        while i < perms.len() {
            for (gi, g) in generators.iter().enumerate() {
                let next = compose(g, &perms[i]);
                let mut word = words[i].clone();
                word[gi] += 1;
                match index.get(&next) {
                    Some(&j) => {
                        let rel: Vec<i64> =
                            word.iter().zip(&words[j]).map(|(a, b)| a - b).collect();
                        if rel.iter().any(|&x| x != 0) {
                            relations.push(rel);
                        }
                    }
                    None => {
                        if perms.len() >= cap {
                            return Err(Error::ResourceCap(format!(
                                "displacement group exceeds {cap} elements"
                            )));
                        }
                        index.insert(next.clone(), perms.len());
                        perms.push(next);
                        words.push(word);
                    }
                }
            }
            i += 1;
        }
        relations.sort();
        relations.dedup();
        let group = cokernel_group(&IntMatrix::from_rows(k, &relations));
        Ok(DisGroup {
            perms,
            generators,
            words,
            group,
        })
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().all(|a| {
            self.generators
                .iter()
                .all(|b| compose(a, b) == compose(b, a))
        })
    }
}

fn index_elements(elems: &[GroupElt]) -> HashMap<GroupElt, usize> {
    elems
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, e)| (e, i))
        .collect()
}

/// The table `a ▷ b = 2b - a` on the listed elements of `g`, which must be
/// closed under the operation.
pub fn core_on(g: &FgAbGroup, elems: &[GroupElt]) -> Result<FiniteQuandle> {
    let index = index_elements(elems);
    let k = elems.len();
    let two = BigInt::from(2);
    let mut op = Vec::with_capacity(k * k);
    for a in elems {
        for b in elems {
            let c = g.sub(&g.smul(&two, b), a);
            op.push(
                *index.get(&c).ok_or_else(|| {
                    Error::Precondition("subset of the core is not closed".into())
                })?,
            );
        }
    }
    Ok(
        FiniteQuandle::from_table(k, op)?
            .with_labels(elems.iter().map(|e| e.to_string()).collect()),
    )
}

/// `Core(A)` over all of `A`, elements in lexicographic coordinate order.
pub fn core_quandle(a: &FgAbGroup) -> Result<FiniteQuandle> {
    core_on(a, &a.elements()?)
}

/// Elements of `A` with at most one odd coordinate among the even invariant
/// factors; these form the union of the cosets of `2A` making up `Core'(A)`.
pub fn characteristic_elements(a: &FgAbGroup) -> Result<Vec<GroupElt>> {
    let even: Vec<usize> = (0..a.torsion().len())
        .filter(|&i| a.torsion()[i].is_even())
        .collect();
    Ok(a.elements()?
        .into_iter()
        .filter(|e| even.iter().filter(|&&i| e.0[i].is_odd()).count() <= 1)
        .collect())
}

pub fn characteristic_subquandle(a: &FgAbGroup) -> Result<FiniteQuandle> {
    core_on(a, &characteristic_elements(a)?)
}

/// `Z^Q / <2y - x - (x ▷ y)>`.
pub fn group_from_quandle(q: &FiniteQuandle) -> FgAbGroup {
    let n = q.n;
    let mut rows: HashSet<Vec<i64>> = HashSet::new();
    for x in 0..n {
        for y in 0..n {
            let mut row = vec![0i64; n];
            row[y] += 2;
            row[x] -= 1;
            row[q.op(x, y)] -= 1;
            if row.iter().any(|&v| v != 0) {
                rows.insert(row);
            }
        }
    }
    let mut rows: Vec<Vec<i64>> = rows.into_iter().collect();
    rows.sort();
    cokernel_group(&IntMatrix::from_rows(n, &rows))
}

/// Quandle on `n` elements whose translations are products of disjoint
/// transpositions. Every block of `partition` has one or two elements, each
/// translation maps blocks to blocks, fixes its own element, and the two
/// members of a block share a translation.
pub fn build_partition_quandle(
    n: usize,
    partition: &[Vec<usize>],
    translations: &[Vec<(usize, usize)>],
) -> Result<FiniteQuandle> {
    let bad = |m: String| Err(Error::Precondition(m));
    if translations.len() != n {
        return bad("one translation per element required".into());
    }
    let mut block = vec![usize::MAX; n];
    for (bi, b) in partition.iter().enumerate() {
        if b.is_empty() || b.len() > 2 {
            return bad(format!("block {bi} has {} elements", b.len()));
        }
        for &x in b {
            if x >= n || block[x] != usize::MAX {
                return bad(format!("element {x} is not placed in exactly one block"));
            }
            block[x] = bi;
        }
    }
    if block.contains(&usize::MAX) {
        return bad("partition does not cover every element".into());
    }
    let mut perms: Vec<Perm> = Vec::with_capacity(n);
    for (q, ts) in translations.iter().enumerate() {
        let mut p: Perm = (0..n).collect();
        for &(a, b) in ts {
            if a >= n || b >= n || p[a] != a || p[b] != b || a == b {
                return bad(format!(
                    "translation of {q} is not a product of disjoint transpositions"
                ));
            }
            p.swap(a, b);
        }
        if p[q] != q {
            return bad(format!("translation of {q} moves {q}"));
        }
        for b in partition {
            let image: HashSet<usize> = b.iter().map(|&x| block[p[x]]).collect();
            if image.len() != 1
                || partition[*image.iter().next().expect("nonempty")].len() != b.len()
            {
                return bad(format!("translation of {q} does not respect the partition"));
            }
        }
        perms.push(p);
    }
    for b in partition {
        if b.len() == 2 && perms[b[0]] != perms[b[1]] {
            return bad(format!(
                "paired elements {} and {} have different translations",
                b[0], b[1]
            ));
        }
    }
    let mut op = vec![0; n * n];
    for x in 0..n {
        for y in 0..n {
            op[x * n + y] = perms[y][x];
        }
    }
    let q = FiniteQuandle::from_table(n, op)?;
    if let Some(v) = q.check_axioms_limited(1).first() {
        return Err(Error::Precondition(format!(
            "not an involutory medial quandle: {v}"
        )));
    }
    Ok(q)
}

/// Colour refinement shared between quandles so colours are comparable.
fn refine(qs: &[&FiniteQuandle]) -> Vec<Vec<usize>> {
    let mut colors: Vec<Vec<usize>> = Vec::new();
    let mut dict: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    for q in qs {
        let orbit = q.orbit_ids();
        let sizes = q.orbits().iter().map(Vec::len).collect::<Vec<_>>();
        let c: Vec<usize> = (0..q.n)
            .map(|x| {
                let key = vec![
                    q.fixed_points(x),
                    sizes[orbit[x]],
                    (0..q.n).filter(|&y| q.op(x, y) == x).count(),
                ];
                let len = dict.len();
                *dict.entry(key).or_insert(len)
            })
            .collect();
        colors.push(c);
    }
    loop {
        let classes_before: usize = colors
            .iter()
            .map(|c| c.iter().collect::<HashSet<_>>().len())
            .sum();
        let mut dict: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut next_colors = Vec::new();
        for (q, c) in qs.iter().zip(&colors) {
            let nc: Vec<usize> = (0..q.n)
                .map(|x| {
                    let mut profile: Vec<(usize, usize, usize)> = (0..q.n)
                        .map(|y| (c[y], c[q.op(x, y)], c[q.op(y, x)]))
                        .collect();
                    profile.sort_unstable();
                    let mut key = vec![c[x]];
                    key.extend(profile.iter().flat_map(|&(a, b, d)| [a, b, d]));
                    let len = dict.len();
                    *dict.entry(key).or_insert(len)
                })
                .collect();
            next_colors.push(nc);
        }
        let classes_after: usize = next_colors
            .iter()
            .map(|c| c.iter().collect::<HashSet<_>>().len())
            .sum();
        colors = next_colors;
        if classes_after == classes_before {
            return colors;
        }
    }
}

struct Search<'a> {
    q1: &'a FiniteQuandle,
    q2: &'a FiniteQuandle,
    c1: Vec<usize>,
    c2: Vec<usize>,
    f: Vec<usize>,
    g: Vec<usize>,
    assigned: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Search<'_> {
    /// Assigns `x ↦ y` and closes under the operation; false on conflict.
    fn assign(&mut self, x: usize, y: usize) -> bool {
        let mut queue = VecDeque::from([(x, y)]);
        while let Some((x, y)) = queue.pop_front() {
            if self.f[x] != NONE {
                if self.f[x] != y {
                    return false;
                }
                continue;
            }
            if self.g[y] != NONE || self.c1[x] != self.c2[y] {
                return false;
            }
            self.f[x] = y;
            self.g[y] = x;
            self.assigned.push(x);
            let done = self.assigned.clone();
            for &a in &done {
                let fa = self.f[a];
                for (p, fp) in [((a, x), (fa, y)), ((x, a), (y, fa))] {
                    let img = self.q2.op(fp.0, fp.1);
                    let src = self.q1.op(p.0, p.1);
                    match self.f[src] {
                        NONE => queue.push_back((src, img)),
                        v if v != img => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, mark: usize) {
        while self.assigned.len() > mark {
            let x = self.assigned.pop().expect("nonempty");
            self.g[self.f[x]] = NONE;
            self.f[x] = NONE;
        }
    }

    fn next_unassigned(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for x in 0..self.q1.n {
            if self.f[x] != NONE {
                continue;
            }
            let class = self.c1.iter().filter(|&&c| c == self.c1[x]).count();
            if best.is_none_or(|(b, _)| class < b) {
                best = Some((class, x));
            }
        }
        best.map(|(_, x)| x)
    }

    fn run(&mut self, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let Some(x) = self.next_unassigned() else {
            return visit(&self.f);
        };
        for y in 0..self.q2.n {
            if self.g[y] != NONE || self.c2[y] != self.c1[x] {
                continue;
            }
            let mark = self.assigned.len();
            if self.assign(x, y) && !self.run(visit) {
                return false;
            }
            self.undo(mark);
        }
        true
    }
}

/// Calls `visit` on every isomorphism `q1 → q2` until it returns false.
pub fn isomorphisms(
    q1: &FiniteQuandle,
    q2: &FiniteQuandle,
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    isomorphisms_with(q1, q2, &[], visit);
}

/// An isomorphism sending each `x` to `y` for the given pairs, if one exists.
pub fn isomorphism_with(
    q1: &FiniteQuandle,
    q2: &FiniteQuandle,
    pins: &[(usize, usize)],
) -> Option<Vec<usize>> {
    let mut found = None;
    isomorphisms_with(q1, q2, pins, &mut |f| {
        found = Some(f.to_vec());
        false
    });
    found
}

fn isomorphisms_with(
    q1: &FiniteQuandle,
    q2: &FiniteQuandle,
    pins: &[(usize, usize)],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) {
    if q1.n != q2.n {
        return;
    }
    let colors = refine(&[q1, q2]);
    let (c1, c2) = (colors[0].clone(), colors[1].clone());
    let mut h1 = c1.clone();
    let mut h2 = c2.clone();
    h1.sort_unstable();
    h2.sort_unstable();
    if h1 != h2 {
        return;
    }
    let mut s = Search {
        q1,
        q2,
        c1,
        c2,
        f: vec![NONE; q1.n],
        g: vec![NONE; q2.n],
        assigned: Vec::new(),
    };
    if pins.iter().all(|&(x, y)| s.assign(x, y)) {
        s.run(visit);
    }
}

/// A bijection `f` with `f(x ▷ y) = f(x) ▷ f(y)`, or `None` after exhaustive search.
pub fn is_isomorphic(q1: &FiniteQuandle, q2: &FiniteQuandle) -> Option<Vec<usize>> {
    isomorphism_with(q1, q2, &[])
}

pub fn is_homomorphism(q1: &FiniteQuandle, q2: &FiniteQuandle, f: &[usize]) -> bool {
    (0..q1.n).all(|x| (0..q1.n).all(|y| f[q1.op(x, y)] == q2.op(f[x], f[y])))
}

/// `|A| / |2A|`.
pub fn index_of_doubles(a: &FgAbGroup) -> BigInt {
    a.torsion()
        .iter()
        .map(|t| {
            if t.is_even() {
                BigInt::from(2)
            } else {
                BigInt::one()
            }
        })
        .product()
}
