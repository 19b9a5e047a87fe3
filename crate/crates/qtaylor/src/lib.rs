//! Quantum circuit construction and simulation for Fourier-basis arithmetic:
//! adders and subtractors built from controlled phase rotations, a
//! repeated-addition multiplier, and truncated power-series evaluation with
//! phase-estimation weight loading. Two backends share the same gate set: a
//! dense state vector and an exact product-state simulator over dyadic phases.

pub mod arith;
pub mod backend;
pub mod dyadic;
pub mod error;
pub mod gate;
pub mod layout;
pub mod product;
pub mod qft;
pub mod report;
pub mod series;
pub mod statevec;

pub use dyadic::Dyadic;
pub use error::{Result, SimError};
