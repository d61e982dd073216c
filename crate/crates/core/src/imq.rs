//! The presented quandle `IMQ(L)`, computed by coset-enumeration style
//! saturation: products are defined only when nothing can be deduced, and
//! elements are merged only when an axiom instance forces it.
//!
//! Mediality is enforced through the equivalent condition that displacements
//! commute: `β_x β_z β_y β_z = β_y β_z β_x β_z` for a fixed `z`.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linkdiag::LinkDiagram;
use crate::numodule::NuModule;
use crate::qa::QaQuandle;
use crate::quandle::{compose, FiniteQuandle, UnionFind};

const NONE: usize = usize::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImqCaps {
    pub max_elements: usize,
    pub max_steps: u64,
    /// Rotates every scan order; different values must give isomorphic results.
    pub tie_break: u64,
}

impl ImqCaps {
    /// `max(64 · μ·det/2, 10000)` elements.
    pub fn for_module(m: &NuModule) -> ImqCaps {
        let bound = BigInt::from(m.mu()) * m.det() / 2u32;
        let scaled = (bound * 64u32).to_usize().unwrap_or(usize::MAX);
        ImqCaps {
            max_elements: scaled.max(10_000),
            max_steps: 2_000_000_000,
            tie_break: 0,
        }
    }
}

/// `IMQ(L)` with the element of each arc generator.
#[derive(Clone, Debug)]
pub struct Imq {
    pub quandle: FiniteQuandle,
    pub generator: Vec<usize>,
    /// Elements created during saturation, merged ones included.
    pub created: usize,
}

impl Imq {
    /// Orbit sizes indexed by component.
    pub fn orbit_sizes(&self, d: &LinkDiagram) -> Vec<usize> {
        let ids = self.quandle.orbit_ids();
        (0..d.mu())
            .map(|i| {
                let o = ids[self.generator[d.components()[i].arcs[0]]];
                ids.iter().filter(|&&x| x == o).count()
            })
            .collect()
    }
}

struct State {
    uf: UnionFind,
    table: Vec<Vec<usize>>,
    merges: VecDeque<(usize, usize)>,
    steps: u64,
    caps: ImqCaps,
}

impl State {
    fn new(caps: ImqCaps) -> State {
        State {
            uf: UnionFind::new(0),
            table: Vec::new(),
            merges: VecDeque::new(),
            steps: 0,
            caps,
        }
    }

    fn n(&self) -> usize {
        self.table.len()
    }

    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.caps.max_steps {
            return Err(Error::ResourceCap(format!(
                "IMQ saturation exceeded {} steps",
                self.caps.max_steps
            )));
        }
        Ok(())
    }

    fn create(&mut self) -> Result<usize> {
        let n = self.n();
        if n >= self.caps.max_elements {
            return Err(Error::ResourceCap(format!(
                "IMQ saturation exceeded {} elements",
                self.caps.max_elements
            )));
        }
        for row in &mut self.table {
            row.push(NONE);
        }
        self.table.push(vec![NONE; n + 1]);
        self.uf.push();
        self.table[n][n] = n;
        Ok(n)
    }

    fn find(&mut self, x: usize) -> usize {
        self.uf.find(x)
    }

    fn get(&mut self, x: usize, y: usize) -> usize {
        if x == NONE || y == NONE {
            return NONE;
        }
        let (x, y) = (self.find(x), self.find(y));
        match self.table[x][y] {
            NONE => NONE,
            v => self.find(v),
        }
    }

    /// Records `x ▷ y = z` and `z ▷ y = x`.
    fn set(&mut self, x: usize, y: usize, z: usize) {
        let (x, y, z) = (self.find(x), self.find(y), self.find(z));
        for (a, c) in [(x, z), (z, x)] {
            match self.table[a][y] {
                NONE => self.table[a][y] = c,
                v => {
                    if self.find(v) != c {
                        self.merges.push_back((v, c));
                    }
                }
            }
        }
    }

    /// Merges pending coincidences, moving the dead element's entries onto the survivor.
    fn process_merges(&mut self) -> Result<bool> {
        let mut any = false;
        while let Some((a, b)) = self.merges.pop_front() {
            self.tick()?;
            let (ra, rb) = (self.find(a), self.find(b));
            if ra == rb {
                continue;
            }
            any = true;
            self.uf.union(ra, rb);
            let (live, dead) = (ra.min(rb), ra.max(rb));
            let n = self.n();
            let row = std::mem::replace(&mut self.table[dead], vec![NONE; n]);
            for (y, v) in row.into_iter().enumerate() {
                if v != NONE {
                    self.set(live, y, v);
                }
            }
            for x in 0..n {
                let v = std::mem::replace(&mut self.table[x][dead], NONE);
                if v != NONE && self.find(x) == x {
                    self.set(x, live, v);
                }
            }
        }
        Ok(any)
    }

    fn live(&mut self) -> Vec<usize> {
        let n = self.n();
        let mut v: Vec<usize> = (0..n).filter(|&x| self.uf.find(x) == x).collect();
        let k = v.len();
        if k > 0 {
            v.rotate_left((self.caps.tie_break % k as u64) as usize);
        }
        v
    }

    /// Either defines `lhs` or `rhs` from the other, or merges them.
    fn equate(
        &mut self,
        lhs: usize,
        rhs: usize,
        lhs_at: (usize, usize),
        rhs_at: (usize, usize),
    ) -> bool {
        match (lhs, rhs) {
            (NONE, NONE) => false,
            (NONE, v) if lhs_at.0 != NONE && lhs_at.1 != NONE => {
                self.set(lhs_at.0, lhs_at.1, v);
                true
            }
            (v, NONE) if rhs_at.0 != NONE && rhs_at.1 != NONE => {
                self.set(rhs_at.0, rhs_at.1, v);
                true
            }
            (a, b) if a != NONE && b != NONE && a != b => {
                self.merges.push_back((a, b));
                true
            }
            _ => false,
        }
    }

    /// One pass of right distributivity and displacement commutation.
    fn deduce(&mut self) -> Result<bool> {
        let live = self.live();
        let z0 = self.find(0);
        let mut changed = false;
        for &x in &live {
            for &y in &live {
                let xy = self.get(x, y);
                for &z in &live {
                    self.tick()?;
                    // (x▷y)▷z = (x▷z)▷(y▷z)
                    let (xz, yz) = (self.get(x, z), self.get(y, z));
                    let lhs = self.get(xy, z);
                    let rhs = self.get(xz, yz);
                    changed |= self.equate(lhs, rhs, (xy, z), (xz, yz));
                    // (((x▷z0)▷y)▷z0)▷z = (((x▷z0)▷z)▷z0)▷y
                    let a = self.get(x, z0);
                    let (ay, az) = (self.get(a, y), self.get(a, z));
                    let c1 = self.get(ay, z0);
                    let c2 = self.get(az, z0);
                    let d1 = self.get(c1, z);
                    let d2 = self.get(c2, y);
                    changed |= self.equate(d1, d2, (c1, z), (c2, y));
                }
            }
            changed |= self.process_merges()?;
        }
        Ok(changed)
    }

    /// The undefined product with the least `(max(x, y), x, y)`, if any.
    fn oldest_undefined(&mut self) -> Option<(usize, usize)> {
        let live: Vec<usize> = {
            let n = self.n();
            (0..n).filter(|&x| self.uf.find(x) == x).collect()
        };
        for (k, &m) in live.iter().enumerate() {
            for &x in &live[..=k] {
                if self.table[x][m] == NONE {
                    return Some((x, m));
                }
                if self.table[m][x] == NONE {
                    return Some((m, x));
                }
            }
        }
        None
    }
}

/// Saturates the presentation of `IMQ(L)`; rejects determinant zero, where the quandle is infinite.
pub fn compute_imq(d: &LinkDiagram, m: &NuModule, caps: &ImqCaps) -> Result<Imq> {
    if m.det_is_zero() {
        return Err(Error::InfiniteQuandle);
    }
    let mut st = State::new(caps.clone());
    let n = d.n_arcs();
    for _ in 0..n {
        st.create()?;
    }
    let k = d.crossings().len().max(1);
    let offset = (caps.tie_break % k as u64) as usize;
    for i in 0..d.crossings().len() {
        let c = &d.crossings()[(i + offset) % k];
        st.set(c.under.0, c.over, c.under.1);
    }
    st.process_merges()?;
    loop {
        while st.deduce()? {}
        match st.oldest_undefined() {
            None => break,
            Some((x, y)) => {
                let z = st.create()?;
                st.set(x, y, z);
                st.process_merges()?;
            }
        }
    }
    let created = st.n();
    let live: Vec<usize> = (0..created).filter(|&x| st.find(x) == x).collect();
    let mut index = vec![NONE; created];
    for (i, &x) in live.iter().enumerate() {
        index[x] = i;
    }
    let size = live.len();
    let mut op = Vec::with_capacity(size * size);
    for &x in &live {
        for &y in &live {
            let v = st.get(x, y);
            op.push(index[v]);
        }
    }
    let generator: Vec<usize> = (0..n).map(|a| index[st.find(a)]).collect();
    let mut labels: Vec<String> = (0..size).map(|i| format!("e{i}")).collect();
    for a in (0..n).rev() {
        labels[generator[a]] = format!("q_{}", d.name(a));
    }
    let quandle = FiniteQuandle::from_table(size, op)?.with_labels(labels);
    if let Some(v) = quandle.check_axioms_limited(1).first() {
        return Err(Error::Internal(format!(
            "saturated table violates an axiom: {v}"
        )));
    }
    for c in d.crossings() {
        if quandle.op(generator[c.under.0], generator[c.over]) != generator[c.under.1] {
            return Err(Error::Internal(
                "saturated table violates a crossing relation".into(),
            ));
        }
    }
    Ok(Imq {
        quandle,
        generator,
        created,
    })
}

/// The homomorphism `q_a ↦ s(a)` onto `Q_A`, checked to be a surjection that
/// sends the orbit of each component onto the orbit of the same component.
pub fn imq_surjection_to_qa(imq: &Imq, qa: &QaQuandle, m: &NuModule) -> Result<Vec<usize>> {
    let bug = |msg: &str| Error::Internal(format!("IMQ to Q_A map: {msg}"));
    let q = &imq.quandle;
    let target = &qa.quandle;
    let mut f = vec![NONE; q.n()];
    let mut queue = VecDeque::new();
    for (a, &x) in imq.generator.iter().enumerate() {
        let y = qa
            .elements
            .iter()
            .position(|e| e == m.s(a))
            .ok_or_else(|| bug("arc image missing from Q_A"))?;
        if f[x] != NONE && f[x] != y {
            return Err(bug("generators disagree"));
        }
        if f[x] == NONE {
            f[x] = y;
            queue.push_back(x);
        }
    }
    while let Some(x) = queue.pop_front() {
        for y in 0..q.n() {
            if f[y] == NONE {
                continue;
            }
            for (a, b) in [(x, y), (y, x)] {
                let v = q.op(a, b);
                let img = target.op(f[a], f[b]);
                if f[v] == NONE {
                    f[v] = img;
                    queue.push_back(v);
                } else if f[v] != img {
                    return Err(bug("not well defined"));
                }
            }
        }
    }
    if f.contains(&NONE) {
        return Err(bug("generators do not reach every element"));
    }
    if !crate::quandle::is_homomorphism(q, target, &f) {
        return Err(bug("not a homomorphism"));
    }
    let mut hit = vec![false; target.n()];
    for &y in &f {
        hit[y] = true;
    }
    if hit.contains(&false) {
        return Err(bug("not surjective"));
    }
    let src = q.orbit_ids();
    let dst = target.orbit_ids();
    for (a, &x) in imq.generator.iter().enumerate() {
        let c = m.kappa(a);
        let want = dst[qa
            .component
            .iter()
            .position(|&k| k == c)
            .expect("component present")];
        if (0..q.n()).any(|y| src[y] == src[x] && dst[f[y]] != want) {
            return Err(bug("an orbit is sent to the wrong component"));
        }
    }
    Ok(f)
}

/// The bounds `μ·det/2 ≥ |IMQ| ≥ μ·det/2^{μ-1}`, or `|IMQ| = det` for a knot.
pub fn check_main3(imq_size: usize, det: &BigInt, mu: usize) -> bool {
    if det.is_zero() || mu == 0 {
        return false;
    }
    let size = BigInt::from(imq_size);
    let total = BigInt::from(mu) * det;
    if mu == 1 {
        return size == *det;
    }
    &total / 2u32 >= size && size >= &total / (BigInt::from(1u32) << (mu - 1))
}

/// Every orbit has at most `det/2` elements when there are several components.
pub fn check_orbit_bound(orbit_sizes: &[usize], det: &BigInt) -> bool {
    orbit_sizes.len() < 2 || orbit_sizes.iter().all(|&s| BigInt::from(2 * s) <= *det)
}

/// Whether the product of translations by the over-arcs along each walk fixes that component's orbit.
pub fn longitude_fixes_orbit(d: &LinkDiagram, imq: &Imq) -> Result<bool> {
    if !d.is_even() {
        return Err(Error::NotEven);
    }
    let q = &imq.quandle;
    let ids = q.orbit_ids();
    for i in 0..d.mu() {
        let walk = d.component_walk(i)?;
        let mut p: Vec<usize> = (0..q.n()).collect();
        for &(_, over) in &walk {
            p = compose(&q.translation(imq.generator[over]), &p);
        }
        let orbit = ids[imq.generator[d.components()[i].arcs[0]]];
        if (0..q.n()).any(|x| ids[x] == orbit && p[x] != x) {
            return Ok(false);
        }
    }
    Ok(true)
}
