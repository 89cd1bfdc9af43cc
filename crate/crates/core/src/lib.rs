//! Online doubly optimistic gradient (ODOG) method for finding approximate
//! stationary points of smooth nonconvex objectives.
//!
//! The method runs inside the online-to-nonconvex conversion loop: each update
//! direction `Δₙ` is the action of an online learner playing against linear
//! losses `⟨gₙ, Δ⟩`, where `gₙ` is a (stochastic) gradient at the midpoint of
//! the step. The learner is an optimistic gradient method whose hint is the
//! gradient at the extrapolated point `xₙ + ½Δₙ`.
//!
//! Modules:
//!
//! * [`problems`]: test objectives with known Lipschitz constants and
//!   seeded stochastic gradient oracles.
//! * [`engine`]: the conversion loop, episode bookkeeping, regret accounting
//!   and output selection.
//! * [`odog`]: the learner, its step-size schedules and the hyperparameter
//!   calculators.
//! * [`baselines`]: gradient descent, SGD and projected online gradient
//!   descent inside the same conversion loop.
//! * [`diagnostics`]: runtime checks of the regret and stationarity
//!   inequalities, local Lipschitz estimation and rate-slope fitting.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod diagnostics;
pub mod engine;
pub mod error;
pub mod odog;
pub mod problems;
pub mod vector;

pub use error::{Error, Result};
pub use vector::Vector;
