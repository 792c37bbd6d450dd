use std::f64::consts::PI;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{target_unitary, GateSpec, PulseSchedule};
use crate::linalg::{basis_ket, c, kron, ket_to_dm, lindblad_generator, sigma_z, unvectorize, vectorize, CMat, CVec, C64};
use crate::propagation::integrator::{check_schedule, check_step, field_step, generator_step, substeps, Substep};
use crate::propagation::{qubit_field, validate_density};

use super::drive::ParametricDrive;

/// Two-qubit basis index of `|01⟩` (qubit A first).
pub const KET_01: usize = 1;
/// Two-qubit basis index of `|10⟩`.
pub const KET_10: usize = 2;

/// Computational-basis start state of the exchange subspace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubspaceInput {
    #[serde(rename = "01")]
    Ket01,
    #[serde(rename = "10")]
    Ket10,
}

impl SubspaceInput {
    pub fn index(self) -> usize {
        match self {
            SubspaceInput::Ket01 => KET_01,
            SubspaceInput::Ket10 => KET_10,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SubspaceInput::Ket01 => "01",
            SubspaceInput::Ket10 => "10",
        }
    }
}

impl std::str::FromStr for SubspaceInput {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_start_matches('|').trim_end_matches('>').trim_end_matches('⟩') {
            "01" => Ok(Self::Ket01),
            "10" => Ok(Self::Ket10),
            other => Err(Error::InvalidConfig(format!("initial state must be 01 or 10, got `{other}`"))),
        }
    }
}

/// Per-qubit relaxation and dephasing times (seconds); infinite disables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitNoise {
    pub t1: [f64; 2],
    pub tphi: [f64; 2],
}

impl TwoQubitNoise {
    fn collapse_operators(&self) -> Result<Vec<CMat>> {
        let lower = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let id = CMat::identity(2, 2);
        let mut ops = Vec::new();
        for q in 0..2 {
            let (t1, tphi) = (self.t1[q], self.tphi[q]);
            if !(t1 > 0.0) || !(tphi > 0.0) {
                return Err(Error::InvalidModel(format!("qubit {q}: t1 = {t1}, tphi = {tphi} must be positive")));
            }
            let on = |op: &CMat| if q == 0 { kron(op, &id) } else { kron(&id, op) };
            if t1.is_finite() {
                ops.push(on(&lower).scale((1.0 / t1).sqrt()));
            }
            if tphi.is_finite() {
                ops.push(on(&sigma_z()).scale((0.5 / tphi).sqrt()));
            }
        }
        Ok(ops)
    }
}

/// Subspace Bloch field at one node with the drive's frame phase added.
fn subspace_field(schedule_sample: crate::geometry::DriveSample, drive: &ParametricDrive, t: f64) -> [f64; 3] {
    let mut s = schedule_sample;
    s.phase += drive.frame_phase(t);
    qubit_field(&s, 0.0, 0.0)
}

fn node_fields(sub: &Substep<'_>, drive: &ParametricDrive) -> ([f64; 3], [f64; 3]) {
    let (s1, s2) = sub.nodes();
    let (t1, t2) = sub.node_times();
    (subspace_field(s1, drive, t1), subspace_field(s2, drive, t2))
}

/// Propagator on `(|01⟩, |10⟩)`, with `|01⟩` playing the pseudo-qubit `|0⟩`.
pub fn subspace_propagator(schedule: &PulseSchedule, drive: &ParametricDrive, step: f64) -> Result<CMat> {
    drive.validate()?;
    check_step(step)?;
    check_schedule(schedule)?;
    let mut u = Matrix2::<C64>::identity();
    for sub in substeps(schedule, step) {
        let (b1, b2) = node_fields(&sub, drive);
        u = field_step(b1, b2, sub.h) * u;
    }
    Ok(CMat::from_iterator(2, 2, u.iter().copied()))
}

/// Embed a subspace operator into the four-level space, leaving `|00⟩` and
/// `|11⟩` fixed.
pub fn embed_subspace(u: &CMat) -> CMat {
    let idx = [KET_01, KET_10];
    let mut out = CMat::identity(4, 4);
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[(i, j)] = u[(a, b)];
        }
    }
    out
}

/// Four-level state after `schedule` from `|01⟩` or `|10⟩`.
///
/// Noiseless runs propagate the 2×2 subspace exactly; with `noise` the
/// embedded Hamiltonian is integrated under per-qubit Lindblad channels.
pub fn evolve_two_qubit(
    schedule: &PulseSchedule,
    drive: &ParametricDrive,
    initial: SubspaceInput,
    noise: Option<&TwoQubitNoise>,
    step: f64,
) -> Result<CMat> {
    let rho0 = ket_to_dm(&basis_ket(4, initial.index()));
    let Some(noise) = noise else {
        let u = embed_subspace(&subspace_propagator(schedule, drive, step)?);
        return Ok(&u * rho0 * u.adjoint());
    };
    drive.validate()?;
    check_step(step)?;
    check_schedule(schedule)?;
    let collapse = noise.collapse_operators()?;
    let hamiltonian = |b: [f64; 3]| {
        let h2 = CMat::from_row_slice(2, 2, &[c(b[2], 0.0), c(b[0], -b[1]), c(b[0], b[1]), c(-b[2], 0.0)]).scale(0.5);
        let mut h = embed_subspace(&h2);
        h[(0, 0)] = C64::default();
        h[(3, 3)] = C64::default();
        h
    };
    let mut v = vectorize(&rho0);
    for sub in substeps(schedule, step) {
        let (b1, b2) = node_fields(&sub, drive);
        let l1 = lindblad_generator(&hamiltonian(b1), &collapse);
        let l2 = lindblad_generator(&hamiltonian(b2), &collapse);
        v = generator_step(&l1, &l2, sub.h) * v;
    }
    let rho = unvectorize(&v, 4);
    Ok(crate::linalg::hermitian_part(&rho))
}

/// `⟨ψ|ρ|ψ⟩` for a pure target.
pub fn state_fidelity(rho: &CMat, psi: &CVec) -> Result<f64> {
    let d = psi.len();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, actual: rho.nrows() });
    }
    validate_density(rho, d, 1e-9)?;
    let norm = psi.norm_squared();
    Ok(((psi.adjoint() * rho * psi)[(0, 0)].re / norm).clamp(0.0, 1.0))
}

/// `(|10⟩ ∓ i|01⟩)/√2`; the minus sign is reached from `|10⟩`.
pub fn bell_target(initial: SubspaceInput) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = CVec::zeros(4);
    psi[KET_10] = c(s, 0.0);
    psi[KET_01] = match initial {
        SubspaceInput::Ket10 => c(0.0, -s),
        SubspaceInput::Ket01 => c(0.0, s),
    };
    psi
}

/// Bell path `χ₁ = χ₂ = chi`, `ξ₂ − ξ₁ = span`, with `ξ₁` chosen so that
/// `|10⟩` maps to a state whose `|01⟩` amplitude is `−i` times its `|10⟩`
/// amplitude in phase.
pub fn bell_spec(chi: f64, span: f64) -> Result<GateSpec> {
    let probe = GateSpec::from_path(chi, chi, 0.0, span)?;
    let u = target_unitary(&probe);
    // Column of the pseudo-qubit |1⟩ (= |10⟩): ratio (|01⟩ amp)/(|10⟩ amp).
    let ratio = u[(0, 1)] / u[(1, 1)];
    // Shifting both azimuths by θ multiplies that ratio by e^{−iθ}.
    let theta = (ratio.arg() + PI / 2.0).rem_euclid(2.0 * PI);
    GateSpec::from_path(chi, chi, theta, theta + span)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangler::drive::{effective_schedule, Ramp};
    use crate::linalg::trace;
    use crate::propagation::DEFAULT_STEP;

    fn setup() -> (PulseSchedule, ParametricDrive) {
        let spec = bell_spec(0.789, 1.5 * PI).unwrap();
        let drive = ParametricDrive::tuned(&spec, 2.0 * PI * 3.96e6, 0.0, 0.0);
        (effective_schedule(&spec, &drive, Ramp::solved(10e-9, 10e-9), "bell").unwrap(), drive)
    }

    #[test]
    fn bell_states_from_both_inputs() {
        let (sched, drive) = setup();
        for input in [SubspaceInput::Ket10, SubspaceInput::Ket01] {
            let rho = evolve_two_qubit(&sched, &drive, input, None, DEFAULT_STEP).unwrap();
            let f = state_fidelity(&rho, &bell_target(input)).unwrap();
            assert!(f >= 0.999, "{input:?}: {f}");
        }
    }

    #[test]
    fn outer_levels_are_untouched() {
        let (sched, drive) = setup();
        let u = embed_subspace(&subspace_propagator(&sched, &drive, DEFAULT_STEP).unwrap());
        for k in [0, 3] {
            assert_eq!(u[(k, k)], c(1.0, 0.0));
            for j in 0..4 {
                if j != k {
                    assert_eq!(u[(k, j)], C64::default());
                    assert_eq!(u[(j, k)], C64::default());
                }
            }
        }
    }

    #[test]
    fn empty_schedule_keeps_input() {
        let (_, drive) = setup();
        let rho = evolve_two_qubit(&PulseSchedule::empty("e", crate::geometry::ScheduleKind::Geometric), &drive, SubspaceInput::Ket01, None, DEFAULT_STEP)
            .unwrap();
        assert_eq!(rho, ket_to_dm(&basis_ket(4, KET_01)));
    }

    #[test]
    fn noise_reduces_fidelity_and_keeps_trace() {
        let (sched, drive) = setup();
        let noise = TwoQubitNoise { t1: [20e-6, 20e-6], tphi: [10e-6, 10e-6] };
        let clean = evolve_two_qubit(&sched, &drive, SubspaceInput::Ket10, None, DEFAULT_STEP).unwrap();
        let noisy = evolve_two_qubit(&sched, &drive, SubspaceInput::Ket10, Some(&noise), DEFAULT_STEP).unwrap();
        assert!((trace(&noisy).re - 1.0).abs() < 1e-10);
        let target = bell_target(SubspaceInput::Ket10);
        let (fc, fn_) = (state_fidelity(&clean, &target).unwrap(), state_fidelity(&noisy, &target).unwrap());
        assert!(fn_ < fc && fn_ > 0.98, "{fc} {fn_}");
        let huge = TwoQubitNoise { t1: [1e12; 2], tphi: [1e12; 2] };
        let near = evolve_two_qubit(&sched, &drive, SubspaceInput::Ket10, Some(&huge), DEFAULT_STEP).unwrap();
        assert!(crate::linalg::trace_distance(&near, &clean) < 1e-8);
    }

    #[test]
    fn fidelity_examples() {
        let psi = bell_target(SubspaceInput::Ket10);
        assert!((state_fidelity(&ket_to_dm(&psi), &psi).unwrap() - 1.0).abs() < 1e-15);
        assert!((state_fidelity(&CMat::identity(4, 4).scale(0.25), &psi).unwrap() - 0.25).abs() < 1e-15);
        assert!(state_fidelity(&CMat::identity(2, 2).scale(0.5), &psi).is_err());
    }
}
