//! Numerical propagation of pulse schedules and scoring against targets.

mod audit;
mod density;
mod fidelity;
pub(crate) mod integrator;
mod models;
mod qutrit;
mod unitary;

pub use audit::{phase_audit, solid_angle_phase, PhaseAudit};
pub use density::{channel, propagate_density, validate_density};
pub use fidelity::{channel_fidelity, gate_fidelity};
pub use integrator::{DEFAULT_STEP, MIN_SUBSTEPS};
pub use models::{qubit_field, transmon_hamiltonian, ErrorModel, QubitModel};
pub use qutrit::propagate_qutrit;
pub use unitary::{bloch_trajectory, propagate_unitary, OperatorKind, PropagationResult, TrajectoryPoint};
