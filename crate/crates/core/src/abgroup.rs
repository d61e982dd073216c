//! Exact integer linear algebra and finitely generated abelian groups.
//!
//! Groups are held in invariant-factor form: coordinates list the torsion
//! factors `t1 | t2 | ...` first, then the free coordinates.

use std::fmt;
use std::ops::Index;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest finite set the enumerators will materialize.
pub const ENUMERATION_CAP: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// `cols` fixes the width when `rows` is empty.
    pub fn from_rows<T: Clone + Into<BigInt>>(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut m = Self::zeros(0, cols);
        for r in rows {
            m.push_row(r.iter().cloned().map(Into::into).collect());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn push_row(&mut self, row: Vec<BigInt>) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend(row);
        self.rows += 1;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut out = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut out = IntMatrix::zeros(0, cols.len());
        for &i in rows {
            out.push_row(cols.iter().map(|&j| self[(i, j)].clone()).collect());
        }
        out
    }

    pub fn without_row(&self, r: usize) -> IntMatrix {
        let keep: Vec<usize> = (0..self.rows).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..self.cols).collect();
        self.select(&keep, &cols)
    }

    /// Row vector times matrix.
    pub fn left_apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.rows, "dimension mismatch");
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                let a = &self[(i, j)];
                if !a.is_zero() {
                    *o += xi * a;
                }
            }
        }
        out
    }

    fn at_mut(&mut self, i: usize, j: usize) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row `dst` += q * row `src`
    fn add_row_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j];
            if !s.is_zero() {
                let delta = q * s;
                *self.at_mut(dst, j) += delta;
            }
        }
    }

    /// col `dst` += q * col `src`
    fn add_col_multiple(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src];
            if !s.is_zero() {
                let delta = q * s;
                *self.at_mut(i, dst) += delta;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = self.at_mut(r, j);
            *v = -std::mem::take(v);
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

/// `u * a * v == diag(d)`, with `d` of length `min(rows, cols)`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub d: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

struct Reduction {
    d: Vec<BigInt>,
    u: Option<IntMatrix>,
    v: Option<IntMatrix>,
    v_inv: Option<IntMatrix>,
}

fn min_abs_entry(b: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..b.rows {
        for j in t..b.cols {
            let x = &b[(i, j)];
            if x.is_zero() {
                continue;
            }
            match best {
                Some(p) if b[p].magnitude() <= x.magnitude() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

fn non_divisible_row(b: &IntMatrix, t: usize) -> Option<usize> {
    let p = &b[(t, t)];
    (t + 1..b.rows).find(|&i| (t + 1..b.cols).any(|j| !b[(i, j)].is_multiple_of(p)))
}

fn reduce(a: &IntMatrix, track_u: bool, track_v: bool) -> Reduction {
    let (m, n) = (a.rows, a.cols);
    let mut b = a.clone();
    let mut u = track_u.then(|| IntMatrix::identity(m));
    let mut v = track_v.then(|| IntMatrix::identity(n));
    let mut v_inv = track_v.then(|| IntMatrix::identity(n));
    let steps = m.min(n);
    let mut d = Vec::with_capacity(steps);
    'outer: for t in 0..steps {
        loop {
            let Some((pi, pj)) = min_abs_entry(&b, t) else {
                d.resize(steps, BigInt::zero());
                break 'outer;
            };
            b.swap_rows(t, pi);
            if let Some(u) = u.as_mut() {
                u.swap_rows(t, pi);
            }
            b.swap_cols(t, pj);
            if let (Some(v), Some(vi)) = (v.as_mut(), v_inv.as_mut()) {
                v.swap_cols(t, pj);
                vi.swap_rows(t, pj);
            }
            let mut clean = true;
            for i in t + 1..m {
                if b[(i, t)].is_zero() {
                    continue;
                }
                let q = -b[(i, t)].div_floor(&b[(t, t)]);
                b.add_row_multiple(i, t, &q);
                if let Some(u) = u.as_mut() {
                    u.add_row_multiple(i, t, &q);
                }
                clean &= b[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if b[(t, j)].is_zero() {
                    continue;
                }
                let q = -b[(t, j)].div_floor(&b[(t, t)]);
                b.add_col_multiple(j, t, &q);
                if let (Some(v), Some(vi)) = (v.as_mut(), v_inv.as_mut()) {
                    v.add_col_multiple(j, t, &q);
                    vi.add_row_multiple(t, j, &-&q);
                }
                clean &= b[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            if let Some(i) = non_divisible_row(&b, t) {
                b.add_row_multiple(t, i, &BigInt::one());
                if let Some(u) = u.as_mut() {
                    u.add_row_multiple(t, i, &BigInt::one());
                }
                continue;
            }
            break;
        }
        if b[(t, t)].is_negative() {
            b.negate_row(t);
            if let Some(u) = u.as_mut() {
                u.negate_row(t);
            }
        }
        d.push(b[(t, t)].clone());
    }
    Reduction { d, u, v, v_inv }
}

/// Pivots on the entry of least absolute value, ties broken by lowest
/// row-major index.
pub fn smith_normal_form(a: &IntMatrix) -> SmithForm {
    let r = reduce(a, true, true);
    SmithForm {
        d: r.d,
        u: r.u.expect("tracked"),
        v: r.v.expect("tracked"),
    }
}

/// Diagonal of the Smith form without the transforms.
pub fn invariant_factors(a: &IntMatrix) -> Vec<BigInt> {
    reduce(a, false, false).d
}

/// `Z^cols / rowspace(a)` without coordinates.
pub fn cokernel_group(a: &IntMatrix) -> FgAbGroup {
    let d = invariant_factors(a);
    let torsion: Vec<BigInt> = d
        .iter()
        .filter(|x| !x.is_zero() && !x.is_one())
        .cloned()
        .collect();
    let rank = d.iter().filter(|x| !x.is_zero()).count();
    FgAbGroup {
        free_rank: a.cols() - rank,
        torsion,
    }
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(a: &IntMatrix) -> BigInt {
    assert_eq!(a.rows, a.cols, "determinant of a non-square matrix");
    let n = a.rows;
    if n == 0 {
        return BigInt::one();
    }
    let mut m = a.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[(i, k)].is_zero()) else {
                return BigInt::zero();
            };
            m.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                m.set(i, j, num / &prev);
            }
        }
        prev = m[(k, k)].clone();
    }
    sign * &m[(n - 1, n - 1)]
}

/// Maps between generator coordinates and the canonical coordinates of a
/// cokernel. `relations * to_canonical` vanishes in the canonical group and
/// `lift` is a right inverse of `project`.
#[derive(Clone, Debug)]
pub struct Presentation {
    pub n_gens: usize,
    pub relations: IntMatrix,
    pub to_canonical: IntMatrix,
    pub from_canonical: IntMatrix,
}

impl Presentation {
    pub fn project(&self, group: &FgAbGroup, x: &[BigInt]) -> GroupElt {
        group.reduce(self.to_canonical.left_apply(x))
    }

    pub fn project_gen(&self, group: &FgAbGroup, g: usize) -> GroupElt {
        group.reduce(self.to_canonical.row(g).to_vec())
    }

    pub fn lift(&self, e: &GroupElt) -> Vec<BigInt> {
        self.from_canonical.left_apply(&e.0)
    }
}

/// `Z^cols / rowspace(a)`.
pub fn cokernel(a: &IntMatrix) -> (FgAbGroup, Presentation) {
    let n = a.cols;
    let r = reduce(a, false, true);
    let mut diag = r.d;
    diag.resize(n, BigInt::zero());
    let keep: Vec<usize> = (0..n).filter(|&k| !diag[k].is_one()).collect();
    let torsion: Vec<BigInt> = keep
        .iter()
        .filter(|&&k| !diag[k].is_zero())
        .map(|&k| diag[k].clone())
        .collect();
    let free_rank = keep.len() - torsion.len();
    let all: Vec<usize> = (0..n).collect();
    let v = r.v.expect("tracked");
    let v_inv = r.v_inv.expect("tracked");
    let group = FgAbGroup { free_rank, torsion };
    let pres = Presentation {
        n_gens: n,
        relations: a.clone(),
        to_canonical: v.select(&all, &keep),
        from_canonical: v_inv.select(&keep, &all),
    };
    (group, pres)
}

/// Element in canonical coordinates: torsion coordinates reduced into
/// `[0, t_i)`, then free coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupElt(pub Vec<BigInt>);

impl GroupElt {
    pub fn coords(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }
}

impl fmt::Display for GroupElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FgAbGroup {
    free_rank: usize,
    torsion: Vec<BigInt>,
}

impl FgAbGroup {
    pub fn new(free_rank: usize, torsion: Vec<BigInt>) -> Result<Self> {
        if torsion.iter().any(|t| t < &BigInt::from(2)) {
            return Err(Error::Precondition(
                "torsion factors must be at least 2".into(),
            ));
        }
        if torsion.windows(2).any(|w| !w[1].is_multiple_of(&w[0])) {
            return Err(Error::Precondition(
                "torsion factors must form a divisibility chain".into(),
            ));
        }
        Ok(FgAbGroup { free_rank, torsion })
    }

    pub fn trivial() -> Self {
        FgAbGroup {
            free_rank: 0,
            torsion: Vec::new(),
        }
    }

    /// Direct sum of cyclic groups of the given orders (0 means `Z`).
    pub fn from_cyclic_orders(orders: &[u64]) -> Self {
        let n = orders.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, &o) in orders.iter().enumerate() {
            m.set(i, i, BigInt::from(o));
        }
        cokernel(&m).0
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[BigInt] {
        &self.torsion
    }

    pub fn ncoords(&self) -> usize {
        self.torsion.len() + self.free_rank
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }

    /// `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion_order())
    }

    pub fn torsion_subgroup(&self) -> FgAbGroup {
        FgAbGroup {
            free_rank: 0,
            torsion: self.torsion.clone(),
        }
    }

    pub fn two_rank(&self) -> usize {
        self.free_rank + self.torsion.iter().filter(|t| t.is_even()).count()
    }

    /// Exponents `n` of the cyclic 2-primary summands `Z/2^n`, ascending.
    pub fn two_primary_exponents(&self) -> Vec<u32> {
        self.torsion
            .iter()
            .filter(|t| t.is_even())
            .map(|t| t.trailing_zeros().expect("nonzero") as u32)
            .collect()
    }

    /// Invariant factors followed by one `0` per free coordinate.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        let mut out = self.torsion.clone();
        out.extend(std::iter::repeat_n(BigInt::zero(), self.free_rank));
        out
    }

    pub fn zero(&self) -> GroupElt {
        GroupElt(vec![BigInt::zero(); self.ncoords()])
    }

    /// Unit vector of canonical coordinate `i`.
    pub fn basis(&self, i: usize) -> GroupElt {
        let mut c = vec![BigInt::zero(); self.ncoords()];
        c[i] = BigInt::one();
        self.reduce(c)
    }

    pub fn reduce(&self, mut coords: Vec<BigInt>) -> GroupElt {
        assert_eq!(coords.len(), self.ncoords(), "coordinate count mismatch");
        for (c, t) in coords.iter_mut().zip(&self.torsion) {
            *c = c.mod_floor(t);
        }
        GroupElt(coords)
    }

    pub fn elt<T: Into<BigInt>>(&self, coords: Vec<T>) -> GroupElt {
        self.reduce(coords.into_iter().map(Into::into).collect())
    }

    pub fn add(&self, x: &GroupElt, y: &GroupElt) -> GroupElt {
        self.reduce(x.0.iter().zip(&y.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, x: &GroupElt, y: &GroupElt) -> GroupElt {
        self.reduce(x.0.iter().zip(&y.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self, x: &GroupElt) -> GroupElt {
        self.reduce(x.0.iter().map(|a| -a).collect())
    }

    pub fn smul(&self, n: &BigInt, x: &GroupElt) -> GroupElt {
        self.reduce(x.0.iter().map(|a| n * a).collect())
    }

    pub fn is_torsion(&self, x: &GroupElt) -> bool {
        x.0[self.torsion.len()..].iter().all(Zero::is_zero)
    }

    /// `None` for elements of infinite order.
    pub fn order_of(&self, x: &GroupElt) -> Option<BigInt> {
        if !self.is_torsion(x) {
            return None;
        }
        Some(
            x.0.iter()
                .zip(&self.torsion)
                .fold(BigInt::one(), |acc, (c, t)| acc.lcm(&(t / c.gcd(t)))),
        )
    }

    fn enumerate(&self, radices: &[BigInt]) -> Result<Vec<GroupElt>> {
        let total: BigInt = radices.iter().product();
        let total = total
            .to_u64()
            .filter(|&t| t <= ENUMERATION_CAP)
            .ok_or_else(|| {
                Error::ResourceCap(format!(
                    "enumerating {} elements",
                    radices.iter().product::<BigInt>()
                ))
            })?;
        let small: Vec<u64> = radices
            .iter()
            .map(|r| r.to_u64().expect("bounded"))
            .collect();
        let mut out = Vec::with_capacity(total as usize);
        let mut digits = vec![0u64; small.len()];
        for _ in 0..total {
            let mut coords: Vec<BigInt> = digits.iter().map(|&d| BigInt::from(d)).collect();
            coords.resize(self.ncoords(), BigInt::zero());
            out.push(GroupElt(coords));
            for (d, r) in digits.iter_mut().zip(&small).rev() {
                *d += 1;
                if *d < *r {
                    break;
                }
                *d = 0;
            }
        }
        Ok(out)
    }

    /// Lexicographic in the torsion coordinates.
    pub fn torsion_elements(&self) -> Result<Vec<GroupElt>> {
        self.enumerate(&self.torsion)
    }

    pub fn elements(&self) -> Result<Vec<GroupElt>> {
        if !self.is_finite() {
            return Err(Error::InfiniteEnumeration);
        }
        self.torsion_elements()
    }

    /// The subgroup `{x : 2x = 0}`.
    pub fn elements_of_order_dividing_2(&self) -> Vec<GroupElt> {
        let halves: Vec<Option<BigInt>> = self
            .torsion
            .iter()
            .map(|t| t.is_even().then(|| t / 2))
            .collect();
        let even = halves.iter().filter(|h| h.is_some()).count();
        let mut out = Vec::with_capacity(1 << even);
        for mask in 0u64..(1 << even) {
            let mut coords = vec![BigInt::zero(); self.ncoords()];
            let mut bit = 0;
            for (c, h) in coords.iter_mut().zip(&halves) {
                if let Some(h) = h {
                    if mask >> bit & 1 == 1 {
                        *c = h.clone();
                    }
                    bit += 1;
                }
            }
            out.push(GroupElt(coords));
        }
        out
    }

    /// One row `t_i e_i` per torsion coordinate.
    pub fn relation_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.torsion.len(), self.ncoords());
        for (i, t) in self.torsion.iter().enumerate() {
            m.set(i, i, t.clone());
        }
        m
    }
}

impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        write!(f, "{}", parts.join(" + "))
    }
}

fn stacked(g: &FgAbGroup, gens: &[GroupElt]) -> IntMatrix {
    let mut m = g.relation_matrix();
    for x in gens {
        m.push_row(x.0.clone());
    }
    m
}

/// `G / <gens>` with its projection from the canonical coordinates of `G`.
pub fn subgroup_quotient(g: &FgAbGroup, gens: &[GroupElt]) -> (FgAbGroup, Presentation) {
    cokernel(&stacked(g, gens))
}

pub fn subgroup_membership(g: &FgAbGroup, gens: &[GroupElt], x: &GroupElt) -> bool {
    let (q, pres) = subgroup_quotient(g, gens);
    pres.project(&q, &x.0).is_zero()
}

/// Rows form a basis of `{x : x * a = 0}`.
pub fn left_kernel(a: &IntMatrix) -> IntMatrix {
    let r = reduce(a, true, false);
    let u = r.u.expect("tracked");
    let rank = r.d.iter().filter(|x| !x.is_zero()).count();
    let rows: Vec<usize> = (rank..a.rows()).collect();
    let cols: Vec<usize> = (0..a.rows()).collect();
    u.select(&rows, &cols)
}

/// The subgroup generated by `gens`, as an abstract group.
pub fn subgroup_structure(g: &FgAbGroup, gens: &[GroupElt]) -> FgAbGroup {
    let k = gens.len();
    if k == 0 {
        return FgAbGroup::trivial();
    }
    let mut m = IntMatrix::zeros(0, g.ncoords());
    for x in gens {
        m.push_row(x.0.clone());
    }
    for i in 0..g.torsion.len() {
        let mut row = vec![BigInt::zero(); g.ncoords()];
        row[i] = g.torsion[i].clone();
        m.push_row(row);
    }
    let kernel = left_kernel(&m);
    let all: Vec<usize> = (0..kernel.rows()).collect();
    let gen_cols: Vec<usize> = (0..k).collect();
    cokernel(&kernel.select(&all, &gen_cols)).0
}
