use crate::error::{Error, Result};
use crate::geometry::PulseSchedule;
use crate::linalg::CMat;

use super::density::model_hamiltonian;
use super::integrator::{check_schedule, check_step, hamiltonian_step, substeps};
use super::models::{ErrorModel, QubitModel};
use super::unitary::{OperatorKind, PropagationResult};

/// Three-level transmon propagation with optional DRAG quadrature.
///
/// Leakage is the population left in level 2, averaged over the two
/// computational initial states.
pub fn propagate_qutrit(schedule: &PulseSchedule, err: &ErrorModel, qubit: &QubitModel, step: f64) -> Result<PropagationResult> {
    if qubit.level_count != 3 {
        return Err(Error::InvalidModel(format!("propagate_qutrit needs level_count = 3, got {}", qubit.level_count)));
    }
    qubit.validate()?;
    check_step(step)?;
    check_schedule(schedule)?;
    let offset = err.detuning_offset(schedule);
    let mut u = CMat::identity(3, 3);
    for sub in substeps(schedule, step) {
        let (n1, n2) = sub.nodes();
        let h1 = model_hamiltonian(schedule, err, qubit, offset, &n1);
        let h2 = model_hamiltonian(schedule, err, qubit, offset, &n2);
        u = hamiltonian_step(&h1, &h2, sub.h) * u;
    }
    let leakage = 0.5 * (u[(2, 0)].norm_sqr() + u[(2, 1)].norm_sqr());
    Ok(PropagationResult { kind: OperatorKind::Unitary, operator: u, state: None, trajectory: None, leakage: leakage.clamp(0.0, 1.0) })
}
