//! Pairwise comparison along the chain
//! IMQ isomorphic ⇒ φ-equivalent ⟺ Q_A isomorphic ⇒ `ker w` isomorphic.

use kei_core::imq::{compute_imq, ImqCaps};
use kei_core::linkdiag::LinkDiagram;
use kei_core::numodule::NuModule;
use kei_core::qa::{build_qa, phi_equivalent, Equivalence, Obstruction};
use kei_core::quandle::is_isomorphic;
use kei_core::{Error, Result};
use serde::Serialize;

use crate::report::Options;

#[derive(Clone, Debug, Serialize)]
pub struct Comparison {
    pub groups_isomorphic: bool,
    pub h1_isomorphic: bool,
    /// `equivalent`, `not-equivalent` or `unknown`.
    pub phi_equivalent: String,
    pub obstruction: Option<String>,
    /// Absent when either quandle is infinite.
    pub qa_isomorphic: Option<bool>,
    /// Absent when either quandle is infinite, skipped, or capped.
    pub imq_isomorphic: Option<bool>,
}

fn obstruction_name(o: &Obstruction) -> String {
    match o {
        Obstruction::ComponentCount => "component count".into(),
        Obstruction::Group => "module groups differ".into(),
        Obstruction::ParityProfile => "torsion parity profiles differ".into(),
        Obstruction::Characteristic => "characteristic compatibility differs".into(),
        Obstruction::QaNotIsomorphic => "Q_A not isomorphic".into(),
        Obstruction::Exhausted { indexings } => {
            format!("no compatible isomorphism over {indexings} indexings")
        }
    }
}

fn imq_or_none(
    d: &LinkDiagram,
    m: &NuModule,
    opts: &Options,
) -> Result<Option<kei_core::imq::Imq>> {
    if opts.no_imq || m.det_is_zero() {
        return Ok(None);
    }
    let mut caps = ImqCaps::for_module(m);
    if let Some(n) = opts.imq_cap {
        caps.max_elements = n;
    }
    match compute_imq(d, m, &caps) {
        Ok(q) => Ok(Some(q)),
        Err(Error::ResourceCap(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn compare(d1: &LinkDiagram, d2: &LinkDiagram, opts: &Options) -> Result<Comparison> {
    let m1 = NuModule::build(d1)?;
    let m2 = NuModule::build(d2)?;
    let phi = phi_equivalent(&m1, &m2)?;
    let finite = !m1.det_is_zero() && !m2.det_is_zero();
    let qa_isomorphic = if finite {
        Some(is_isomorphic(&build_qa(&m1)?.quandle, &build_qa(&m2)?.quandle).is_some())
    } else {
        None
    };
    let imq_isomorphic = match (imq_or_none(d1, &m1, opts)?, imq_or_none(d2, &m2, opts)?) {
        (Some(a), Some(b)) => Some(is_isomorphic(&a.quandle, &b.quandle).is_some()),
        _ => None,
    };
    let c = Comparison {
        groups_isomorphic: m1.group() == m2.group(),
        h1_isomorphic: m1.ker_w(0).group == m2.ker_w(0).group,
        phi_equivalent: phi.verdict().to_string(),
        obstruction: match &phi {
            Equivalence::NotEquivalent(o) => Some(obstruction_name(o)),
            Equivalence::Unknown(why) => Some(why.clone()),
            Equivalence::Equivalent { .. } => None,
        },
        qa_isomorphic,
        imq_isomorphic,
    };
    if let Some(broken) = c.chain_violation() {
        return Err(Error::Internal(format!(
            "implication chain violated: {broken}"
        )));
    }
    Ok(c)
}

impl Comparison {
    /// The first implication that the computed values contradict.
    pub fn chain_violation(&self) -> Option<&'static str> {
        let phi_yes = self.phi_equivalent == "equivalent";
        let phi_no = self.phi_equivalent == "not-equivalent";
        if self.imq_isomorphic == Some(true) && phi_no {
            return Some("IMQ isomorphic but not phi-equivalent");
        }
        if phi_yes && self.qa_isomorphic == Some(false) {
            return Some("phi-equivalent but Q_A not isomorphic");
        }
        if phi_no && self.qa_isomorphic == Some(true) {
            return Some("Q_A isomorphic but not phi-equivalent");
        }
        if phi_yes && !(self.h1_isomorphic && self.groups_isomorphic) {
            return Some("phi-equivalent but groups differ");
        }
        if self.qa_isomorphic == Some(true) && !self.h1_isomorphic {
            return Some("Q_A isomorphic but ker w differs");
        }
        None
    }

    pub fn render_text(&self, a: &str, b: &str) -> String {
        let tri = |x: Option<bool>, why: &str| match x {
            Some(true) => "yes".to_string(),
            Some(false) => "no".to_string(),
            None => format!("n/a ({why})"),
        };
        let yn = |x: bool| if x { "yes" } else { "no" };
        let mut s = format!("{a} vs {b}\n");
        s.push_str(&format!("{:<18}{}\n", "groups", yn(self.groups_isomorphic)));
        s.push_str(&format!("{:<18}{}\n", "ker w", yn(self.h1_isomorphic)));
        let phi = match &self.obstruction {
            Some(o) => format!("{} ({o})", self.phi_equivalent),
            None => self.phi_equivalent.clone(),
        };
        s.push_str(&format!("{:<18}{}\n", "phi-equivalent", phi));
        s.push_str(&format!(
            "{:<18}{}\n",
            "Q_A",
            tri(self.qa_isomorphic, "infinite")
        ));
        s.push_str(&format!(
            "{:<18}{}\n",
            "IMQ",
            tri(self.imq_isomorphic, "infinite, skipped or capped")
        ));
        s
    }

    pub fn render_machine(&self, a: &str, b: &str) -> String {
        let mut v = serde_json::to_value(self).expect("serializable");
        let obj = v.as_object_mut().expect("object");
        obj.insert("first".into(), a.into());
        obj.insert("second".into(), b.into());
        serde_json::to_string(&v).expect("serializable")
    }
}
