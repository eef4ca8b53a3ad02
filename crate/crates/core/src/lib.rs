//! Exact symbolic kernel for infinitesimal computations over the rationals:
//! polynomial rings with Groebner machinery, Weil algebras and their disks,
//! formal Cartesian spaces and morphisms, Hadamard expansion, jet spaces of
//! trivial fibrations, and verified equivalence of plot factorizations.
//! Every identity the kernel claims is checked exactly; there is no floating
//! point anywhere.

pub mod error;
pub mod factor;
pub mod formal;
pub mod groebner;
pub mod hadamard;
pub mod jets;
pub mod json;
pub(crate) mod linalg;
pub mod monomial;
pub mod parse;
pub mod poly;
pub mod rational;
pub mod selftest;
pub mod weil;

pub use error::{KernelError, Result};
