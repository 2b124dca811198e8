//! Finite-dimensional simulator for the contextual (algebraic) formulation of
//! quantum mechanics.
//!
//! Observables live in a complex matrix algebra; a measurement context is a
//! maximal commutative subalgebra, represented by a joint orthonormal
//! eigenbasis.  A physical state assigns one outcome per context, a quantum
//! state is an equivalence class of such assignments anchored on one context,
//! and quantum averages arise from per-context Born sampling.  On top of that
//! sit unitary dynamics with time averaging, the GNS representation of a
//! state functional, a truncated-Fock harmonic oscillator with Wick-pairing
//! Green functions, and experiment drivers for CHSH and Kochen–Specker runs.
//!
//! Every operation is a pure function of its inputs and all randomness flows
//! through counter-based seeded streams, so results are reproducible down to
//! the byte.

pub mod algebra;
pub mod contexts;
pub mod dynamics;
pub mod error;
// pub mod experiments;
pub mod gns;
// pub mod io;
pub mod oscillator;
pub mod probability;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
