//! Exact arithmetic and point counting for thin sets of integer points.

pub mod arith;
pub mod parse;
pub mod poly;
pub mod upoly;
pub mod counting;
pub mod sieve;
pub mod experiments;
pub mod report;
