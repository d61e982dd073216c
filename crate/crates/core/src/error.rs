use thiserror::Error;

use crate::linkdiag::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid diagram: {}", join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("infinite enumeration")]
    InfiniteEnumeration,
    #[error("no walk: component {0} has no crossings")]
    NoWalk(usize),
    #[error("diagram not even")]
    NotEven,
    #[error("infinite quandle: the determinant is zero")]
    InfiniteQuandle,
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
