#![allow(dead_code)]

use std::path::PathBuf;

use kei_core::abgroup::FgAbGroup;
use kei_core::linkdiag::{parse_diagram, LinkDiagram};
use num_bigint::BigInt;

pub const BUNDLED: [&str; 9] = [
    "HOPF2", "SIXTHREE", "TREFOIL", "FIGURE8", "FIG5L", "FIGT", "LPRIME", "LDPRIME", "T22T24",
];

pub const EXTRA: [&str; 3] = ["UNKNOT", "HOPF", "T24"];

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn load(name: &str) -> LinkDiagram {
    let dir = fixture_dir();
    let path = [
        dir.join(format!("{name}.json")),
        dir.join("extra").join(format!("{name}.json")),
    ]
    .into_iter()
    .find(|p| p.exists())
    .unwrap_or_else(|| panic!("no fixture {name}"));
    parse_diagram(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn all() -> Vec<(&'static str, LinkDiagram)> {
    BUNDLED
        .iter()
        .chain(EXTRA.iter())
        .map(|&n| (n, load(n)))
        .collect()
}

/// Free rank and torsion factors.
pub fn group(free: usize, torsion: &[i64]) -> FgAbGroup {
    FgAbGroup::new(free, torsion.iter().map(|&t| BigInt::from(t)).collect()).unwrap()
}

/// A random valid (possibly non-planar) diagram: `sizes[i]` arcs on component
/// `i`, and over-arcs drawn from `overs` cyclically.
pub fn random_diagram(sizes: &[usize], overs: &[usize]) -> LinkDiagram {
    use kei_core::linkdiag::{Component, Crossing};
    let n: usize = sizes.iter().sum();
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut crossings = Vec::new();
    let mut components = Vec::new();
    let mut next = 0;
    let mut k = 0;
    for &s in sizes {
        let arcs: Vec<usize> = (next..next + s).collect();
        next += s;
        let mut cs = Vec::new();
        for j in 0..s {
            let over = overs[k % overs.len()] % n;
            k += 1;
            cs.push(crossings.len());
            crossings.push(Crossing::new(over, arcs[j], arcs[(j + 1) % s]));
        }
        components.push(Component {
            arcs,
            crossings: cs,
        });
    }
    LinkDiagram::new(names, crossings, components).expect("valid by construction")
}

/// Closure of a braid on `strands` strands. Letter `±(i + 1)` crosses
/// positions `i` and `i + 1`; the sign picks which strand passes over.
/// Always a classical diagram.
pub fn braid_closure(strands: usize, word: &[i32]) -> LinkDiagram {
    use kei_core::linkdiag::{Component, Crossing};
    let mut parent: Vec<usize> = (0..strands).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    // Position -> (top position the strand entered at, current arc).
    let mut at: Vec<(usize, usize)> = (0..strands).map(|i| (i, i)).collect();
    let mut raw: Vec<(usize, usize, usize)> = Vec::new();
    let mut unders: Vec<Vec<usize>> = vec![Vec::new(); strands];
    for &letter in word {
        let i = letter.unsigned_abs() as usize - 1;
        let (over_pos, under_pos) = if letter > 0 { (i, i + 1) } else { (i + 1, i) };
        let fresh = parent.len();
        parent.push(fresh);
        let (top, arc) = at[under_pos];
        unders[top].push(raw.len());
        raw.push((at[over_pos].1, arc, fresh));
        at[under_pos].1 = fresh;
        at.swap(i, i + 1);
    }
    let mut perm = vec![0; strands];
    for (pos, &(top, arc)) in at.iter().enumerate() {
        perm[top] = pos;
        let (a, b) = (find(&mut parent, arc), find(&mut parent, pos));
        parent[a] = b;
    }
    let mut index = std::collections::HashMap::new();
    let mut components = Vec::new();
    let mut done = vec![false; strands];
    let mut crossing_order = Vec::new();
    for start in 0..strands {
        if done[start] {
            continue;
        }
        let (mut arcs, mut cs) = (Vec::new(), Vec::new());
        let mut t = start;
        while !done[t] {
            done[t] = true;
            let mut walk = vec![t];
            for &c in &unders[t] {
                walk.push(raw[c].2);
                cs.push(crossing_order.len());
                crossing_order.push(c);
            }
            for a in walk {
                let r = find(&mut parent, a);
                if !index.contains_key(&r) {
                    index.insert(r, index.len());
                    arcs.push(index[&r]);
                }
            }
            t = perm[t];
        }
        components.push(Component {
            arcs,
            crossings: cs,
        });
    }
    let crossings = crossing_order
        .iter()
        .map(|&c| {
            let (o, u1, u2) = raw[c];
            let mut id = |x| index[&find(&mut parent, x)];
            Crossing::new(id(o), id(u1), id(u2))
        })
        .collect();
    let names = (0..index.len()).map(|i| format!("b{i}")).collect();
    LinkDiagram::new(names, crossings, components).expect("braid closures are valid")
}

/// The same diagram with components listed in the order `order` and arcs
/// renumbered by a rotation.
pub fn reindexed(d: &LinkDiagram, order: &[usize], rotate: usize) -> LinkDiagram {
    let n = d.n_arcs();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.rotate_left(rotate % n.max(1));
    let r = d.relabel_arcs(&perm);
    let comps = order.iter().map(|&i| r.components()[i].clone()).collect();
    LinkDiagram::new(r.names().to_vec(), r.crossings().to_vec(), comps)
        .expect("reordering keeps validity")
}
