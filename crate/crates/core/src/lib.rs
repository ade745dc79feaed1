//! Compositum discriminant calculus and counting harnesses for `S_n × A`
//! extensions of the rationals.

pub mod arith;
pub mod permgroup;
pub mod invariants;
pub mod tamecomp;
pub mod convolve;
pub mod fields;
pub mod counting;
pub mod sieve;
