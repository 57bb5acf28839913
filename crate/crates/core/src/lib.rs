//! Generalized energy-time uncertainty bounds for driven quantum systems.
//!
//! The crate is split along the numerical pipeline:
//!
//! * [`qdyn`] holds states, time-dependent Hamiltonians and the unitary
//!   propagator that turns them into sampled [`qdyn::Trajectory`] values.
//! * [`geometry`] computes fidelities, Bures lengths, the Bures metric
//!   increment and the classical statistical distance / Fisher information.
//! * [`bounds`] evaluates the Mandelstam-Tamm and Margolus-Levitin type
//!   speed limit times and assembles a [`bounds::QslReport`].
//! * [`verify`] audits every intermediate inequality pointwise along a
//!   trajectory.
//! * [`corpus`] generates seeded random protocols and states for property
//!   style testing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod corpus;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod qdyn;
pub mod verify;

pub use error::{QslError, Result};
pub use linalg::{CMatrix, CVector, C64};
