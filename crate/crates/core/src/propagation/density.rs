use crate::error::{Error, Result};
use crate::geometry::{DriveSample, PulseSchedule};
use crate::linalg::{eigh, lindblad_generator, mat2_to_dyn, trace, unitary_superop, unvectorize, vectorize, CMat};

use super::integrator::{check_schedule, check_step, generator_step, substeps};
use super::models::{transmon_hamiltonian, ErrorModel, QubitModel};
use super::unitary::{qubit_propagate_observed, OperatorKind, PropagationResult};

pub(crate) fn drag_quadrature(schedule: &PulseSchedule, qubit: &QubitModel, s: &DriveSample) -> f64 {
    match schedule.drag {
        Some(beta) if qubit.level_count == 3 => -beta * s.slope / qubit.anharmonicity,
        _ => 0.0,
    }
}

pub(crate) fn model_hamiltonian(schedule: &PulseSchedule, err: &ErrorModel, qubit: &QubitModel, offset: f64, s: &DriveSample) -> CMat {
    let q = drag_quadrature(schedule, qubit, s);
    transmon_hamiltonian(qubit.level_count, s, err.epsilon, offset, qubit.anharmonicity, q)
}

/// Superoperator of the schedule under the Lindblad equation with the
/// model's relaxation and dephasing channels.
pub fn channel(schedule: &PulseSchedule, err: &ErrorModel, qubit: &QubitModel, step: f64) -> Result<CMat> {
    qubit.validate()?;
    check_step(step)?;
    check_schedule(schedule)?;
    if qubit.level_count == 2 && qubit.is_noiseless() {
        let u = qubit_propagate_observed(schedule, err, step, |_, _, _| {})?;
        return Ok(unitary_superop(&mat2_to_dyn(&u)));
    }
    let d = qubit.level_count;
    let offset = err.detuning_offset(schedule);
    let collapse = qubit.collapse_operators();
    let mut s = CMat::identity(d * d, d * d);
    for sub in substeps(schedule, step) {
        let (n1, n2) = sub.nodes();
        let l1 = lindblad_generator(&model_hamiltonian(schedule, err, qubit, offset, &n1), &collapse);
        let l2 = lindblad_generator(&model_hamiltonian(schedule, err, qubit, offset, &n2), &collapse);
        s = generator_step(&l1, &l2, sub.h) * s;
    }
    Ok(s)
}

/// Hermiticity, unit trace and positivity to `tol`.
pub fn validate_density(rho: &CMat, d: usize, tol: f64) -> Result<()> {
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: rho.nrows() });
    }
    if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidState("non-finite entries".into()));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > tol {
        return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
    }
    let tr = trace(rho);
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidState(format!("trace {tr} != 1")));
    }
    let (vals, _) = eigh(rho);
    if vals[0] < -tol {
        return Err(Error::InvalidState(format!("negative eigenvalue {:e}", vals[0])));
    }
    Ok(())
}

/// Lindblad propagation of `rho0` through `schedule`.
pub fn propagate_density(
    schedule: &PulseSchedule,
    err: &ErrorModel,
    qubit: &QubitModel,
    rho0: &CMat,
    step: f64,
) -> Result<PropagationResult> {
    qubit.validate()?;
    validate_density(rho0, qubit.level_count, 1e-9)?;
    let sup = channel(schedule, err, qubit, step)?;
    let d = qubit.level_count;
    let rho = unvectorize(&(&sup * vectorize(rho0)), d);
    let leakage = if d == 3 { rho[(2, 2)].re.clamp(0.0, 1.0) } else { 0.0 };
    Ok(PropagationResult { kind: OperatorKind::Superoperator, operator: sup, state: Some(rho), trajectory: None, leakage })
}
