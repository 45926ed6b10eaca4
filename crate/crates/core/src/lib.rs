//! Finite-dimensional kinematics of reciprocal relativity.
//!
//! * [`weyl_heisenberg`]: the Weyl-Heisenberg group, its algebra and automorphisms.
//! * [`phase_space`]: Born, Minkowski and Newton line elements on extended
//!   phase space, time dilation and the null hypersurface.
//! * [`transforms`]: U(1,n) transformations, the Hamilton group and the
//!   `b → ∞`, `c → ∞` contractions.
//! * [`planck`]: Planck scales from `{c, G, ħ}` or `{c, b, ħ}`.
//! * [`hamilton`]: Hamiltonian flows on extended phase space and checks that
//!   their Jacobians preserve `ω = -de∧dt + dpᵢ∧dqⁱ` and `dt²`.
//!
//! Extended phase space coordinates are always laid out as
//! `(t, q¹..qⁿ, e, p¹..pⁿ)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hamilton;
pub mod linalg;
pub mod phase_space;
pub mod planck;
pub mod rng;
pub mod transforms;
pub mod weyl_heisenberg;

pub use error::{Error, Result};
