//! Dynamic representative sets over additively idempotent semirings.
//!
//! A [`repset::Representation`] is a length-`r` vector that stands in for
//! a table indexed by all subsets of size at most `k`. Convolving an
//! element into it costs time linear in `r`.

pub mod error;
pub mod semiring;
pub mod subsets;
pub mod pseudorandom;
pub mod factorization;
pub mod repset;
pub mod oracle;
pub mod kpath;
pub mod circuit;
pub mod instances;
pub mod selftest;
pub mod bench;
