//! Iterated Carmichael lambda toolkit.
//!
//! `L(n)` is the number of times the Carmichael function must be applied to
//! `n` before reaching 1. This crate computes it pointwise and in bulk, builds
//! Pratt trees and their heights, and provides the counting and density
//! helpers used to study the distribution of `L` empirically.

pub mod analysis;
pub mod arith;
mod error;
pub mod lambda;
pub mod model;
pub mod pratt;
pub mod rangesieve;
pub mod verify;

pub use arith::{factorize, is_prime, lcm, Factorization, SpfTable};
pub use error::{Error, Result};
pub use lambda::{big_l, carmichael_lambda, lambda_chain, LambdaChain, LambdaVariant};
pub use pratt::{PrattNode, PrattTree};
pub use rangesieve::{RangeTable, SieveConfig, TableKind};
