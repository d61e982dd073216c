//! Exact invariants of unoriented link diagrams built from involutory medial
//! quandles and the module obtained by specializing every Alexander variable
//! to -1.
//!
//! The crate is layered bottom-up:
//!
//! * [`abgroup`]: integer matrices, Smith normal form, finitely generated
//!   abelian groups.
//! * [`linkdiag`]: diagram model, parser, validator, even-diagram normalizer.
//! * [`numodule`]: the relation matrix, its cokernel `M`, the augmentation `w`,
//!   component parities `p`, determinant and longitudes.
//! * [`quandle`]: finite involutory medial quandles, core quandles,
//!   displacement groups, isomorphism search.
//! * [`qa`]: the subquandle of `Core(M)` cut out by `(w, p)`, and the
//!   equivalence tests built on it.
//! * [`imq`]: the presented involutory medial quandle of a diagram, computed by
//!   saturation.

pub mod abgroup;
pub mod error;
pub mod imq;
pub mod linkdiag;
pub mod numodule;
pub mod qa;
pub mod quandle;

pub use error::{Error, Result};
