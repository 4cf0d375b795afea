//! Operator spreading in one-dimensional brickwork random circuits.
//!
//! A local operator conjugated by alternating layers of random 2-site gates
//! grows into a superposition of Pauli strings whose support spreads
//! ballistically while its edges diffuse. When the squared string amplitudes
//! are tracked, each gate ensemble induces a Markov chain on Pauli strings,
//! and the edge of the string performs a (possibly state-dependent) random
//! walk. This crate provides
//!
//! * bit-packed Pauli strings and their parity/commutation classifiers
//!   ([`pauli`]),
//! * the exact 2-site transition kernels of five gate ensembles: Haar
//!   unitary, COE, CSE, real orthogonal and unitary symplectic ([`kernels`]),
//! * a seeded, trajectory-parallel Monte Carlo simulator with edge statistics
//!   and front fits ([`circuit`], [`fit`]),
//! * closed-form endpoint-walk solutions in exact rational arithmetic
//!   ([`walk`]),
//! * a Haar gate-sampling oracle that re-estimates each kernel from trace
//!   moments ([`haar`]),
//! * an exact small-system operator-growth computation under GUE Hamiltonian
//!   evolution ([`gue`]).
//!
//! The `symcirc` binary exposes all of this behind `simulate`, `kernels`,
//! `oracle`, `theory`, `gue` and `repro-table` subcommands.

pub mod circuit;
pub mod cli;
pub mod fit;
pub mod gue;
pub mod haar;
pub mod kernels;
pub mod pauli;
pub mod rng;
pub mod walk;

use num::BigRational;

/// Shorthand for small rational constants.
pub(crate) fn br(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Lossy conversion for display and float-side consumers.
pub(crate) fn ratf(r: &BigRational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().expect("rational out of f64 range")
}
