//! Weyl coefficient estimates for two-dimensional canonical systems
//! `y' = zJHy` on `[a, b)`.
//!
//! The crate is `no_std` (with `alloc`).  Its layers:
//!
//! * [`hamiltonian`]: Hamiltonians, their primitives `M = ∫H`, indivisible
//!   prefixes and structural transforms.
//! * [`estimator`]: the critical point `t̂(r)`, the quantities `A(r)`, `L(r)`
//!   and the angle-dependent bound envelope for `q_H(re^{iθ})`.
//! * [`weyl`]: fundamental solutions, Weyl discs, certified values of `q_H`,
//!   and the power-series coefficients `W_n` with their entrywise bounds.
//! * [`spectral`]: Poisson integrals of synthetic measures, Kac-class and
//!   tail criteria, Tauberian checks and regular variation.
//! * [`strings`]: generalised inverses, Krein strings, and Sturm–Liouville
//!   envelopes.
//! * [`corpus`]: the reference Hamiltonians used across tests and the CLI.

#![no_std]
// `Float` provides the float methods in no_std builds.  Whenever std is in
// the dependency graph (tests, or a std-enabled num-traits) the inherent
// methods win and the imports look unused.
#![allow(unused_imports)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod error;
pub mod estimator;
pub mod hamiltonian;
pub mod linalg;
pub mod quad;
pub mod spectral;
pub mod strings;
pub mod weyl;

pub use error::{Error, PrefixKind, Result};
pub use hamiltonian::{Hamiltonian, Interval};
pub use linalg::{CMat2, Mat2, Sym2, C64};
