//! Pulse-level toolkit for noncyclic nonadiabatic (NCNA) geometric quantum gates.
//!
//! The crate is organised around four stages:
//!
//! * [`geometry`] turns gate-level intent into three-segment pulse schedules
//!   (and composite dynamical comparators).
//! * [`propagation`] integrates those schedules under the rotating-frame
//!   qubit Hamiltonian, optionally with coherent errors, Lindblad noise, or a
//!   third transmon level.
//! * [`rb`] runs reference and interleaved Clifford randomized benchmarking on
//!   the propagated gates and fits the decay.
//! * [`entangler`] maps the same synthesis onto the parametric-modulation
//!   exchange Hamiltonian to prepare Bell states and reconstruct them by
//!   simulated tomography.
//!
//! [`export`] holds the text formats shared by the command-line front end.

pub mod entangler;
pub mod error;
pub mod export;
pub mod geometry;
pub mod linalg;
pub mod propagation;
pub mod rb;
pub mod seed;

pub use error::{Error, Result};
