//! Library side of the `kei` command: reports, comparisons, corpus runs and
//! the report cache.

pub mod cache;
pub mod compare;
pub mod corpus;
pub mod report;

use kei_core::Error;

/// 1 usage or parse, 2 validation, 3 resource cap, 4 internal consistency.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } => 1,
        Error::Validation(_) => 2,
        Error::ResourceCap(_) => 3,
        Error::InfiniteEnumeration
        | Error::NoWalk(_)
        | Error::NotEven
        | Error::InfiniteQuandle
        | Error::Precondition(_)
        | Error::Internal(_) => 4,
    }
}
