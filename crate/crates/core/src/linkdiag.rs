//! Unoriented link diagrams: arcs, crossings and components as cyclic walks.
//!
//! A component lists its arcs in walk order together with the crossings met
//! between consecutive arcs: `crossings[j]` lies between `arcs[j]` and
//! `arcs[(j + 1) % k]`, and its under-pair is that pair of arcs as a multiset.
//! A single arc with no crossings is a closed curve with no underpasses.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ArcId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub over: ArcId,
    /// Stored order is kept for round-tripping only.
    pub under: (ArcId, ArcId),
}

impl Crossing {
    pub fn new(over: ArcId, u1: ArcId, u2: ArcId) -> Self {
        Crossing {
            over,
            under: (u1, u2),
        }
    }

    pub fn under_multiset(&self) -> (ArcId, ArcId) {
        let (a, b) = self.under;
        (a.min(b), a.max(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub arcs: Vec<ArcId>,
    pub crossings: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    UnknownArc,
    BadName,
    DuplicateArc,
    EmptyComponent,
    ArcInMultipleComponents,
    ArcInNoComponent,
    CrossingIndexOutOfRange,
    CrossingInMultipleComponents,
    CrossingInNoComponent,
    Alignment,
    UnderPairMismatch,
    NoComponents,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::UnknownArc => "D01",
            Rule::BadName => "D02",
            Rule::DuplicateArc => "D03",
            Rule::EmptyComponent => "D04",
            Rule::ArcInMultipleComponents => "D05",
            Rule::ArcInNoComponent => "D06",
            Rule::CrossingIndexOutOfRange => "D07",
            Rule::CrossingInMultipleComponents => "D08",
            Rule::CrossingInNoComponent => "D09",
            Rule::Alignment => "D10",
            Rule::UnderPairMismatch => "D11",
            Rule::NoComponents => "D12",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.rule.code(), self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkDiagram {
    names: Vec<String>,
    crossings: Vec<Crossing>,
    components: Vec<Component>,
    /// `usize::MAX` marks an arc outside every component (invalid diagrams only).
    kappa: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiagram {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    arcs: Option<Vec<String>>,
    #[serde(default)]
    crossings: Vec<[String; 3]>,
    components: Vec<RawComponent>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    arcs: Vec<String>,
    #[serde(default)]
    crossings: Vec<usize>,
}

fn valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Parses and validates the JSON diagram format.
pub fn parse_diagram(text: &str) -> Result<LinkDiagram> {
    let raw: RawDiagram = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut violations = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, ArcId> = HashMap::new();
    let declared = raw.arcs.is_some();
    if let Some(list) = &raw.arcs {
        for n in list {
            if ids.contains_key(n) {
                violations.push(Violation {
                    rule: Rule::DuplicateArc,
                    message: format!("arc '{n}' declared twice"),
                });
                continue;
            }
            ids.insert(n.clone(), names.len());
            names.push(n.clone());
        }
    }
    let mut resolve = |n: &str, violations: &mut Vec<Violation>| -> ArcId {
        if let Some(&id) = ids.get(n) {
            return id;
        }
        if declared {
            violations.push(Violation {
                rule: Rule::UnknownArc,
                message: format!("arc '{n}' is not declared"),
            });
        }
        ids.insert(n.to_string(), names.len());
        names.push(n.to_string());
        names.len() - 1
    };
    let components: Vec<Component> = raw
        .components
        .iter()
        .map(|c| Component {
            arcs: c.arcs.iter().map(|n| resolve(n, &mut violations)).collect(),
            crossings: c.crossings.clone(),
        })
        .collect();
    let crossings: Vec<Crossing> = raw
        .crossings
        .iter()
        .map(|[o, u1, u2]| {
            let o = resolve(o, &mut violations);
            let u1 = resolve(u1, &mut violations);
            let u2 = resolve(u2, &mut violations);
            Crossing::new(o, u1, u2)
        })
        .collect();
    for n in &names {
        if !valid_name(n) {
            violations.push(Violation {
                rule: Rule::BadName,
                message: format!("arc name '{n}' is not of the form [A-Za-z0-9_']+"),
            });
        }
    }
    let d = LinkDiagram::from_parts(names, crossings, components);
    violations.extend(d.validate());
    if violations.is_empty() {
        Ok(d)
    } else {
        Err(Error::Validation(violations))
    }
}

impl LinkDiagram {
    /// Builds a diagram without validating it.
    pub fn from_parts(
        names: Vec<String>,
        crossings: Vec<Crossing>,
        components: Vec<Component>,
    ) -> Self {
        let mut kappa = vec![usize::MAX; names.len()];
        for (i, c) in components.iter().enumerate() {
            for &a in &c.arcs {
                if a < kappa.len() && kappa[a] == usize::MAX {
                    kappa[a] = i;
                }
            }
        }
        LinkDiagram {
            names,
            crossings,
            components,
            kappa,
        }
    }

    /// Builds and validates.
    pub fn new(
        names: Vec<String>,
        crossings: Vec<Crossing>,
        components: Vec<Component>,
    ) -> Result<Self> {
        let d = Self::from_parts(names, crossings, components);
        let v = d.validate();
        if v.is_empty() {
            Ok(d)
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn n_arcs(&self) -> usize {
        self.names.len()
    }

    pub fn mu(&self) -> usize {
        self.components.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, a: ArcId) -> &str {
        &self.names[a]
    }

    pub fn arc_id(&self, name: &str) -> Option<ArcId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn kappa(&self, a: ArcId) -> usize {
        self.kappa[a]
    }

    pub fn is_even(&self) -> bool {
        self.components.iter().all(|c| c.arcs.len() % 2 == 0)
    }

    /// Empty iff the diagram is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n_arcs();
        let mut push = |rule: Rule, message: String| out.push(Violation { rule, message });
        if self.components.is_empty() {
            push(Rule::NoComponents, "diagram has no components".into());
        }
        let name = |a: ArcId| -> String {
            self.names
                .get(a)
                .cloned()
                .unwrap_or_else(|| format!("#{a}"))
        };
        for (i, c) in self.crossings.iter().enumerate() {
            for a in [c.over, c.under.0, c.under.1] {
                if a >= n {
                    push(
                        Rule::UnknownArc,
                        format!("crossing {i} references arc #{a}"),
                    );
                }
            }
        }
        let mut arc_owner: Vec<Option<usize>> = vec![None; n];
        let mut crossing_owner: Vec<Option<usize>> = vec![None; self.crossings.len()];
        for (ci, comp) in self.components.iter().enumerate() {
            if comp.arcs.is_empty() {
                push(Rule::EmptyComponent, format!("component {ci} has no arcs"));
                continue;
            }
            for &a in &comp.arcs {
                if a >= n {
                    push(
                        Rule::UnknownArc,
                        format!("component {ci} references arc #{a}"),
                    );
                    continue;
                }
                match arc_owner[a] {
                    Some(prev) if prev != ci => push(
                        Rule::ArcInMultipleComponents,
                        format!("arc '{}' in multiple components ({prev} and {ci})", name(a)),
                    ),
                    Some(_) => push(
                        Rule::ArcInMultipleComponents,
                        format!("arc '{}' appears twice in component {ci}", name(a)),
                    ),
                    None => arc_owner[a] = Some(ci),
                }
            }
            for &x in &comp.crossings {
                if x >= self.crossings.len() {
                    push(
                        Rule::CrossingIndexOutOfRange,
                        format!(
                            "component {ci} references crossing {x} of {}",
                            self.crossings.len()
                        ),
                    );
                    continue;
                }
                match crossing_owner[x] {
                    Some(prev) => push(
                        Rule::CrossingInMultipleComponents,
                        format!("crossing {x} consumed by components {prev} and {ci}"),
                    ),
                    None => crossing_owner[x] = Some(ci),
                }
            }
            let k = comp.arcs.len();
            let aligned = comp.crossings.len() == k || (k == 1 && comp.crossings.is_empty());
            if !aligned {
                push(
                    Rule::Alignment,
                    format!(
                        "component {ci} has {k} arcs but {} crossings",
                        comp.crossings.len()
                    ),
                );
                continue;
            }
            for (j, &x) in comp.crossings.iter().enumerate() {
                let Some(c) = self.crossings.get(x) else {
                    continue;
                };
                let (b0, b1) = (comp.arcs[j], comp.arcs[(j + 1) % k]);
                let want = (b0.min(b1), b0.max(b1));
                if c.under_multiset() != want {
                    push(
                        Rule::UnderPairMismatch,
                        format!(
                            "component {ci}: crossing {x} passes under by ({}, {}) but the walk needs ({}, {})",
                            name(c.under.0),
                            name(c.under.1),
                            name(b0),
                            name(b1)
                        ),
                    );
                }
            }
        }
        for (a, o) in arc_owner.iter().enumerate() {
            if o.is_none() {
                push(
                    Rule::ArcInNoComponent,
                    format!("arc '{}' belongs to no component", name(a)),
                );
            }
        }
        for (x, o) in crossing_owner.iter().enumerate() {
            if o.is_none() {
                push(
                    Rule::CrossingInNoComponent,
                    format!("crossing {x} is not consumed by any component"),
                );
            }
        }
        out
    }

    /// JSON with an explicit arc list; `parse_diagram` inverts it exactly.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.raw()).expect("serializable")
    }

    /// Compact form used for content hashing.
    pub fn canonical_serialization(&self) -> String {
        serde_json::to_string(&self.raw()).expect("serializable")
    }

    fn raw(&self) -> RawDiagram {
        RawDiagram {
            arcs: Some(self.names.clone()),
            crossings: self
                .crossings
                .iter()
                .map(|c| {
                    [
                        self.names[c.over].clone(),
                        self.names[c.under.0].clone(),
                        self.names[c.under.1].clone(),
                    ]
                })
                .collect(),
            components: self
                .components
                .iter()
                .map(|c| RawComponent {
                    arcs: c.arcs.iter().map(|&a| self.names[a].clone()).collect(),
                    crossings: c.crossings.clone(),
                })
                .collect(),
        }
    }

    /// Multiset of crossings in terms of arc names.
    pub fn crossing_multiset(&self) -> Vec<(String, BTreeSet<(String, usize)>)> {
        let mut out: Vec<(String, BTreeSet<(String, usize)>)> = self
            .crossings
            .iter()
            .map(|c| {
                let (a, b) = c.under;
                let mut s = BTreeSet::new();
                if a == b {
                    s.insert((self.names[a].clone(), 2));
                } else {
                    s.insert((self.names[a].clone(), 1));
                    s.insert((self.names[b].clone(), 1));
                }
                (self.names[c.over].clone(), s)
            })
            .collect();
        out.sort();
        out
    }

    /// Renumbers arcs: arc `a` becomes `perm[a]`. Names travel with their arcs.
    pub fn relabel_arcs(&self, perm: &[ArcId]) -> LinkDiagram {
        let mut names = vec![String::new(); self.n_arcs()];
        for (a, n) in self.names.iter().enumerate() {
            names[perm[a]] = n.clone();
        }
        let crossings = self
            .crossings
            .iter()
            .map(|c| Crossing::new(perm[c.over], perm[c.under.0], perm[c.under.1]))
            .collect();
        let components = self
            .components
            .iter()
            .map(|c| Component {
                arcs: c.arcs.iter().map(|&a| perm[a]).collect(),
                crossings: c.crossings.clone(),
            })
            .collect();
        LinkDiagram::from_parts(names, crossings, components)
    }

    fn fresh_name(&self, taken: &[String], base: &str) -> String {
        let stem = format!("{base}_k");
        if !taken.contains(&stem) {
            return stem;
        }
        (2..)
            .map(|i| format!("{stem}{i}"))
            .find(|s| !taken.contains(s))
            .expect("unbounded")
    }

    /// Inserts kinks until every component has an even number of arcs.
    pub fn make_even(&self) -> LinkDiagram {
        let mut names = self.names.clone();
        let mut crossings = self.crossings.clone();
        let mut components = self.components.clone();
        for comp in components.iter_mut() {
            if comp.arcs.len() % 2 == 0 {
                continue;
            }
            let x = comp.arcs[0];
            let fresh = self.fresh_name(&names, &names[x].clone());
            names.push(fresh);
            let x_new = names.len() - 1;
            if comp.crossings.is_empty() {
                crossings.push(Crossing::new(x, x, x_new));
                crossings.push(Crossing::new(x_new, x_new, x));
                comp.arcs = vec![x, x_new];
                comp.crossings = vec![crossings.len() - 2, crossings.len() - 1];
                continue;
            }
            let c0 = comp.crossings[0];
            let under = &mut crossings[c0].under;
            if under.0 == x {
                under.0 = x_new;
            } else {
                under.1 = x_new;
            }
            crossings.push(Crossing::new(x, x, x_new));
            comp.arcs.insert(1, x_new);
            comp.crossings.insert(0, crossings.len() - 1);
        }
        LinkDiagram::from_parts(names, crossings, components)
    }

    /// `(under arc b_ij, over arc a_ij)` for each crossing along component `i`.
    pub fn component_walk(&self, i: usize) -> Result<Vec<(ArcId, ArcId)>> {
        let comp = &self.components[i];
        if comp.crossings.is_empty() {
            return Err(Error::NoWalk(i));
        }
        Ok(comp
            .arcs
            .iter()
            .zip(&comp.crossings)
            .map(|(&b, &c)| (b, self.crossings[c].over))
            .collect())
    }
}
