//! Discretized Heun/BC1 elliptic Calogero-Moser operators `H(g)` and their
//! Hilbert-Schmidt companions `I(g)`.
//!
//! The crate is `no_std` (it needs `alloc`). IO, reports and the command line
//! live in the `heun-cli` crate.

#![no_std]

extern crate alloc;

pub mod couplings;
pub mod elliptic;
pub mod error;
pub mod kernelops;
pub mod linalg;
pub mod quadrature;
pub mod spectra;

pub use couplings::{CouplingVector, GroupElement, MembershipFlags};
pub use elliptic::{lattice_constants, EllipticParams};
pub use error::{Error, Result};
