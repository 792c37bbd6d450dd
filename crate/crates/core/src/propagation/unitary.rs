use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::PulseSchedule;
use crate::linalg::{bloch_of_ket, mat2_to_dyn, CMat, CVec, C64};

use super::integrator::{check_schedule, check_step, qubit_step, substeps};
use super::models::ErrorModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Unitary,
    /// Column-stacked superoperator acting on `vec(ρ)`.
    Superoperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub bloch: [f64; 3],
    pub leakage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationResult {
    pub kind: OperatorKind,
    pub operator: CMat,
    /// Final density matrix when an initial state was supplied.
    pub state: Option<CMat>,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    pub leakage: f64,
}

/// Step through `schedule`, handing each node's cumulative propagator to
/// `observe` (including `t = 0`).
pub(crate) fn qubit_propagate_observed(
    schedule: &PulseSchedule,
    err: &ErrorModel,
    step: f64,
    mut observe: impl FnMut(f64, usize, &Matrix2<C64>),
) -> Result<Matrix2<C64>> {
    check_step(step)?;
    check_schedule(schedule)?;
    let offset = err.detuning_offset(schedule);
    let mut u = Matrix2::<C64>::identity();
    observe(0.0, 0, &u);
    for sub in substeps(schedule, step) {
        u = qubit_step(&sub, err, offset) * u;
        observe(sub.start + sub.h, sub.segment_index, &u);
    }
    Ok(u)
}

/// Time-ordered propagator of the two-level Hamiltonian driven by `schedule`.
///
/// `ErrorModel::ideal()` runs the same code path with ε = δ = 0.
pub fn propagate_unitary(schedule: &PulseSchedule, err: &ErrorModel, step: f64) -> Result<PropagationResult> {
    let u = qubit_propagate_observed(schedule, err, step, |_, _, _| {})?;
    Ok(PropagationResult {
        kind: OperatorKind::Unitary,
        operator: mat2_to_dyn(&u),
        state: None,
        trajectory: None,
        leakage: 0.0,
    })
}

/// Bloch vector of `psi0` sampled at every integration node.
pub fn bloch_trajectory(schedule: &PulseSchedule, psi0: &CVec, err: &ErrorModel, step: f64) -> Result<Vec<TrajectoryPoint>> {
    let psi0 = nalgebra::Vector2::new(psi0[0], psi0[1]);
    let mut out = Vec::new();
    qubit_propagate_observed(schedule, err, step, |t, _, u| {
        let psi = u * psi0;
        let psi = CVec::from_vec(vec![psi[0], psi[1]]);
        out.push(TrajectoryPoint { t, bloch: bloch_of_ket(&psi), leakage: 0.0 });
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{
        standard_gate, synthesize_ncna, target_unitary, EnvelopeSpec, GateRequest, StandardGate, TimingPolicy,
    };
    use crate::linalg::{basis_ket, identity, max_abs_diff, unitarity_defect};
    use crate::propagation::{gate_fidelity, DEFAULT_STEP};

    #[test]
    fn empty_schedule_is_identity() {
        let sched = PulseSchedule::empty("I", crate::geometry::ScheduleKind::Geometric);
        let r = propagate_unitary(&sched, &ErrorModel::ideal(), DEFAULT_STEP).unwrap();
        assert_eq!(r.operator, identity(2));
    }

    #[test]
    fn rejects_bad_step() {
        let sched = PulseSchedule::empty("I", crate::geometry::ScheduleKind::Geometric);
        assert!(propagate_unitary(&sched, &ErrorModel::ideal(), 0.0).is_err());
        assert!(propagate_unitary(&sched, &ErrorModel::ideal(), f64::NAN).is_err());
    }

    #[test]
    fn rejects_non_finite_controls() {
        let spec = standard_gate(GateRequest::Standard(StandardGate::S)).unwrap();
        let mut sched = synthesize_ncna(&spec, &EnvelopeSpec::default(), TimingPolicy::FixedPeak, "S").unwrap();
        sched.segments[0].envelope.scale = f64::INFINITY;
        assert!(matches!(
            propagate_unitary(&sched, &ErrorModel::ideal(), DEFAULT_STEP),
            Err(crate::Error::NonFinite(_))
        ));
    }

    #[test]
    fn ideal_h_matches_closed_form() {
        let spec = standard_gate(GateRequest::Standard(StandardGate::H)).unwrap();
        let sched = synthesize_ncna(&spec, &EnvelopeSpec::default(), TimingPolicy::FixedPeak, "H").unwrap();
        let r = propagate_unitary(&sched, &ErrorModel::ideal(), DEFAULT_STEP).unwrap();
        assert!(unitarity_defect(&r.operator) < 1e-10);
        let f = gate_fidelity(&target_unitary(&spec), &r.operator).unwrap();
        assert!(f >= 1.0 - 1e-6, "fidelity {f}");
        let psi = &r.operator * basis_ket(2, 0);
        let b = bloch_of_ket(&psi);
        assert!((b[0] - 1.0).abs() < 1e-6 && b[1].abs() < 1e-6 && b[2].abs() < 1e-6, "{b:?}");
    }

    #[test]
    fn zero_error_model_is_bit_identical() {
        let spec = standard_gate(GateRequest::Standard(StandardGate::T)).unwrap();
        let sched = synthesize_ncna(&spec, &EnvelopeSpec::default(), TimingPolicy::FixedPeak, "T").unwrap();
        let a = propagate_unitary(&sched, &ErrorModel::ideal(), DEFAULT_STEP).unwrap();
        let b = propagate_unitary(&sched, &ErrorModel { epsilon: 0.0, delta: 0.0, omega_m: Some(1.0) }, DEFAULT_STEP).unwrap();
        assert_eq!(a.operator, b.operator);
        assert!(max_abs_diff(&a.operator, &b.operator) == 0.0);
    }
}
