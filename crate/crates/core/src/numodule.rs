//! The module `M = Z^arcs / <2a - b - b'>` of a diagram, with the augmentation
//! `w` (every arc to 1) and the component-parity map `p` (arc `a` to the unit
//! vector of its component).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::abgroup::{
    cokernel, determinant, left_kernel, FgAbGroup, GroupElt, IntMatrix, Presentation,
};
use crate::error::{Error, Result};
use crate::linkdiag::{ArcId, LinkDiagram};

/// One row per crossing; repeated arcs coalesce by addition.
pub fn build_r_matrix(d: &LinkDiagram) -> IntMatrix {
    let n = d.n_arcs();
    let mut m = IntMatrix::zeros(0, n);
    for c in d.crossings() {
        let mut row = vec![BigInt::zero(); n];
        row[c.over] += 2;
        row[c.under.0] -= 1;
        row[c.under.1] -= 1;
        m.push_row(row);
    }
    m
}

/// Parity vectors are stored as one byte (0 or 1) per component.
pub type Parity = Vec<u8>;

#[derive(Clone, Debug)]
pub struct NuModule {
    group: FgAbGroup,
    pres: Presentation,
    s: Vec<GroupElt>,
    kappa: Vec<usize>,
    reps: Vec<ArcId>,
    mu: usize,
    /// `w` on each canonical coordinate; zero on torsion coordinates.
    w: Vec<BigInt>,
    /// `p` on each canonical coordinate; zero on odd torsion coordinates.
    p: Vec<Parity>,
    det: BigInt,
}

/// `ker w` presented over the arcs by `R` plus the unit row of `base_arc`;
/// arc `a` stands for `s(a) - s(base_arc)`.
#[derive(Clone, Debug)]
pub struct KerW {
    pub group: FgAbGroup,
    pub pres: Presentation,
    pub base_arc: ArcId,
}

impl KerW {
    /// Image in `M` of an element of `ker w`.
    pub fn embed(&self, m: &NuModule, e: &GroupElt) -> GroupElt {
        let x = self.pres.lift(e);
        let total: BigInt = x.iter().sum();
        let lifted = m.pres.lift(&m.s[self.base_arc]);
        let mut v: Vec<BigInt> = x;
        for (vi, li) in v.iter_mut().zip(&lifted) {
            *vi -= &total * li;
        }
        m.pres.project(&m.group, &v)
    }
}

/// Gcd of the maximal minors of `R` with column `skip` removed.
pub fn det_by_minors(r: &IntMatrix, skip: usize) -> BigInt {
    let n = r.cols();
    let cols: Vec<usize> = (0..n).filter(|&j| j != skip).collect();
    let k = cols.len();
    if k == 0 {
        return BigInt::one();
    }
    let mut g = BigInt::zero();
    let mut rows: Vec<usize> = (0..k).collect();
    if k > r.rows() {
        return g;
    }
    loop {
        g = g.gcd(&determinant(&r.select(&rows, &cols)));
        let Some(i) = (0..k).rev().find(|&i| rows[i] != i + r.rows() - k) else {
            break;
        };
        rows[i] += 1;
        for j in i + 1..k {
            rows[j] = rows[j - 1] + 1;
        }
    }
    g
}

impl NuModule {
    pub fn build(d: &LinkDiagram) -> Result<NuModule> {
        let r = build_r_matrix(d);
        let mu = d.mu();
        let n = d.n_arcs();
        let kappa: Vec<usize> = (0..n).map(|a| d.kappa(a)).collect();
        for row in 0..r.rows() {
            let sums = (0..n).fold(vec![BigInt::zero(); mu + 1], |mut acc, a| {
                acc[0] += &r[(row, a)];
                acc[1 + kappa[a]] += &r[(row, a)];
                acc
            });
            if !sums[0].is_zero() || sums[1..].iter().any(|s| s.is_odd()) {
                return Err(Error::Internal(format!(
                    "relation row {row} is not killed by (w, p)"
                )));
            }
        }
        let (group, pres) = cokernel(&r);
        let s: Vec<GroupElt> = (0..n).map(|a| pres.project_gen(&group, a)).collect();
        let ntors = group.torsion().len();
        let mut w = Vec::with_capacity(group.ncoords());
        let mut p = Vec::with_capacity(group.ncoords());
        for j in 0..group.ncoords() {
            let row = pres.from_canonical.row(j);
            let wj: BigInt = row.iter().sum();
            let mut pj = vec![0u8; mu];
            for (a, x) in row.iter().enumerate() {
                if x.is_odd() {
                    pj[kappa[a]] ^= 1;
                }
            }
            if j < ntors {
                let t = &group.torsion()[j];
                if !wj.is_zero() || (t.is_odd() && pj.contains(&1)) {
                    return Err(Error::Internal(format!(
                        "(w, p) not well defined on coordinate {j}"
                    )));
                }
            }
            w.push(wj);
            p.push(pj);
        }
        let mut m = NuModule {
            group,
            pres,
            s,
            kappa,
            reps: d.components().iter().map(|c| c.arcs[0]).collect(),
            mu,
            w,
            p,
            det: BigInt::zero(),
        };
        for a in 0..n {
            if !m.w(&m.s[a]).is_one() || m.p(&m.s[a]) != unit(mu, m.kappa[a]) {
                return Err(Error::Internal(format!("structure maps fail on arc {a}")));
            }
        }
        let r_free = m.group.free_rank();
        let k = m.group.torsion().iter().filter(|t| t.is_even()).count();
        if r_free < 1 || r_free > mu || r_free + k != mu {
            return Err(Error::Internal(format!(
                "module {} has the wrong shape for {mu} components",
                m.group
            )));
        }
        let kw = m.ker_w(0);
        let det = kw.group.order().unwrap_or_else(BigInt::zero);
        if det != det_by_minors(&r, 0) {
            return Err(Error::Internal(
                "determinant disagrees with the minor gcd".into(),
            ));
        }
        m.det = det;
        Ok(m)
    }

    pub fn group(&self) -> &FgAbGroup {
        &self.group
    }

    pub fn presentation(&self) -> &Presentation {
        &self.pres
    }

    pub fn mu(&self) -> usize {
        self.mu
    }

    pub fn n_arcs(&self) -> usize {
        self.s.len()
    }

    pub fn kappa(&self, a: ArcId) -> usize {
        self.kappa[a]
    }

    /// Image of arc `a`.
    pub fn s(&self, a: ArcId) -> &GroupElt {
        &self.s[a]
    }

    /// First arc of each component, in component order.
    pub fn representatives(&self) -> &[ArcId] {
        &self.reps
    }

    pub fn w(&self, x: &GroupElt) -> BigInt {
        x.0.iter().zip(&self.w).map(|(a, b)| a * b).sum()
    }

    pub fn p(&self, x: &GroupElt) -> Parity {
        let mut out = vec![0u8; self.mu];
        for (c, pj) in x.0.iter().zip(&self.p) {
            if c.is_odd() {
                for (o, b) in out.iter_mut().zip(pj) {
                    *o ^= b;
                }
            }
        }
        out
    }

    /// The asymmetric form `(w(x), p_2(x), ..., p_mu(x))`.
    pub fn phi(&self, x: &GroupElt) -> (BigInt, Parity) {
        (self.w(x), self.p(x)[1..].to_vec())
    }

    /// `0` encodes determinant zero.
    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn det_is_zero(&self) -> bool {
        self.det.is_zero()
    }

    pub fn ker_w(&self, base_arc: ArcId) -> KerW {
        let mut r = self.pres.relations.clone();
        let mut row = vec![BigInt::zero(); self.n_arcs()];
        row[base_arc] = BigInt::one();
        r.push_row(row);
        let (group, pres) = cokernel(&r);
        KerW {
            group,
            pres,
            base_arc,
        }
    }

    /// Generators of `ker w` inside `M`.
    pub fn ker_w_generators(&self) -> Vec<GroupElt> {
        let nt = self.group.torsion().len();
        let mut out: Vec<GroupElt> = (0..nt).map(|i| self.group.basis(i)).collect();
        let free = self.group.free_rank();
        let col = IntMatrix::from_rows(
            1,
            &self.w[nt..]
                .iter()
                .map(|x| vec![x.clone()])
                .collect::<Vec<_>>(),
        );
        let ker = left_kernel(&col);
        for i in 0..ker.rows() {
            let mut c = vec![BigInt::zero(); nt];
            c.extend((0..free).map(|j| ker[(i, j)].clone()));
            out.push(self.group.reduce(c));
        }
        out
    }

    /// Elements of `ker w` when it is finite, which is when the determinant is nonzero.
    pub fn ker_w_elements(&self) -> Result<Vec<GroupElt>> {
        if self.det_is_zero() {
            return Err(Error::InfiniteEnumeration);
        }
        self.group.torsion_elements()
    }

    /// `ker (w, p) = 2 ker w`, enumerated when finite.
    pub fn ker_phi_elements(&self) -> Result<Vec<GroupElt>> {
        let mut out: Vec<GroupElt> = self
            .ker_w_elements()?
            .iter()
            .map(|x| self.group.add(x, x))
            .collect();
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Alternating sums of over-arc images along each walk.
    pub fn longitudes(&self, d: &LinkDiagram) -> Result<Vec<GroupElt>> {
        if !d.is_even() {
            return Err(Error::NotEven);
        }
        (0..d.mu())
            .map(|i| {
                let walk = d.component_walk(i)?;
                Ok(walk
                    .iter()
                    .enumerate()
                    .fold(self.group.zero(), |acc, (j, &(_, over))| {
                        if j % 2 == 0 {
                            self.group.add(&acc, &self.s[over])
                        } else {
                            self.group.sub(&acc, &self.s[over])
                        }
                    }))
            })
            .collect()
    }

    /// Smallest nonempty proper subset (by size, then lexicographically) whose
    /// longitudes sum to zero.
    pub fn longitude_zero_subset(&self, lambda: &[GroupElt]) -> Result<Option<Vec<usize>>> {
        let mu = lambda.len();
        if mu < 2 {
            return Err(Error::Precondition("needs at least two components".into()));
        }
        for size in 1..mu {
            let mut idx: Vec<usize> = (0..size).collect();
            loop {
                let sum = idx.iter().fold(self.group.zero(), |acc, &i| {
                    self.group.add(&acc, &lambda[i])
                });
                if sum.is_zero() {
                    return Ok(Some(idx));
                }
                let Some(i) = (0..size).rev().find(|&i| idx[i] != i + mu - size) else {
                    break;
                };
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
        Ok(None)
    }

    /// Least multiset, over all permutations of the component coordinates, of
    /// `p(t)` for nonzero torsion `t`.
    pub fn torsion_parity_profile(&self) -> Result<Vec<Parity>> {
        let raw: Vec<Parity> = self
            .group
            .torsion_elements()?
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| self.p(t))
            .collect();
        Ok(canonical_profile(&raw, self.mu))
    }

    /// Elements of the 2-primary part of the torsion subgroup.
    pub fn two_primary_elements(&self) -> Result<Vec<GroupElt>> {
        Ok(self
            .group
            .torsion_elements()?
            .into_iter()
            .filter(|t| {
                let o = self.group.order_of(t).expect("torsion");
                (&o & (&o - 1u32)).is_zero()
            })
            .collect())
    }
}

pub fn unit(mu: usize, i: usize) -> Parity {
    let mut v = vec![0u8; mu];
    v[i] = 1;
    v
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

pub fn canonical_profile(raw: &[Parity], mu: usize) -> Vec<Parity> {
    let mut best: Option<Vec<Parity>> = None;
    for perm in permutations(mu) {
        let mut v: Vec<Parity> = raw
            .iter()
            .map(|x| perm.iter().map(|&i| x[i]).collect())
            .collect();
        v.sort();
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    }
    best.unwrap_or_default()
}
