//! Three-qubit Bell operators that separate the bi-separable classes
//! `S_{1-23}`, `S_{2-13}` and `S_{12-3}`.
//!
//! For measurement settings `A_j = a_j·σ`, `B_j = b_j·σ` on each qubit, the
//! operator for qubit `i` is
//!
//! ```text
//! D^(i) = B2^(i) ⊗ (A_i + B_i)/2 + (A_i - B_i)/2
//! ```
//!
//! where `B2^(i)` is the two-qubit CHSH/2 combination on the remaining pair.
//! Fully separable states satisfy `|<D^(i)>| <= 1` for every `i`; states in
//! the class that splits off qubit `i` may reach `√2` on `D^(i)` only; and
//! every state satisfies `Σ_i <D^(i)>² <= 3` at any shared setting.
//!
//! Modules, bottom-up:
//!
//! * [`quantum_core`] dense 2/4/8-dimensional complex operators.
//! * [`states`] pure and mixed three-qubit states and samplers.
//! * [`pauli`] Pauli-basis correlation tensors and their invariants.
//! * [`bell`] settings, operator construction, and two expectation paths.
//! * [`optimize`] multi-start see-saw maximization over settings.
//! * [`classify`] separability-class exclusion and region sampling.
//! * [`cli`] the `tribell` command-line front end.

pub mod bell;
pub mod classify;
pub mod cli;
mod error;
pub mod optimize;
pub mod pauli;
pub mod quantum_core;
pub mod states;

pub use error::{Error, Result};
