//! Nonclassicality witnesses for `|ψ⟩ ∝ (t a + r a†)|α⟩`.
//!
//! Closed-form moments come from exact normal ordering ([`algebra`],
//! [`moments`]); every witness built on them ([`witnesses`],
//! [`phase_space`]) can be cross-checked against a truncated Fock-space
//! [`oracle`]. [`herald`] simulates the optical scheme that prepares the
//! state, and [`sweep`] produces plot-ready tables.

pub mod algebra;
pub mod error;
pub mod herald;
pub mod moments;
pub mod oracle;
pub mod phase_space;
pub mod state;
pub mod sweep;
pub mod witnesses;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use state::{make_state, FockVector, StateParams};
pub use witnesses::{Verdict, WitnessKind, WitnessRecord};
