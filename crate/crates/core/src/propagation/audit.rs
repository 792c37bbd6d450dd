use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{GateSpec, PulseSchedule, SegmentRole};
use crate::linalg::{bloch_of_ket, ket_from_angles, CVec, C64};

use super::integrator::{check_schedule, check_step, qubit_step, segment_substeps, Substep};
use super::models::{qubit_field, ErrorModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseAudit {
    /// `−∫⟨ψ₊|H|ψ₊⟩dt` over the latitude segment(s).
    pub dynamical_phase: f64,
    /// `−½∫ξ̇(1−cos χ)dt` along the propagated path.
    pub geometric_phase: f64,
}

struct Node {
    bloch: [f64; 3],
    energy: f64,
}

/// Propagate `|ψ₊(χ₁, ξ₁)⟩` through the ideal schedule and integrate both
/// phases numerically along the resulting path.
///
/// Each segment uses an even number of substeps no longer than `step` so
/// the dynamical phase can be integrated with Simpson's rule.
pub fn phase_audit(schedule: &PulseSchedule, spec: &GateSpec, step: f64) -> Result<PhaseAudit> {
    check_step(step)?;
    check_schedule(schedule)?;
    let err = ErrorModel::ideal();
    let psi0 = ket_from_angles(spec.chi1, spec.xi1);
    let mut psi = Vector2::new(psi0[0], psi0[1]);
    let energy = |psi: &Vector2<C64>, b: [f64; 3]| {
        let v = CVec::from_vec(vec![psi[0], psi[1]]);
        let n = bloch_of_ket(&v);
        0.5 * (b[0] * n[0] + b[1] * n[1] + b[2] * n[2])
    };

    let mut path: Vec<[f64; 3]> = vec![bloch_of_ket(&psi0)];
    let mut dynamical = 0.0;
    let mut start = 0.0;
    for (segment_index, segment) in schedule.segments.iter().enumerate() {
        let duration = segment.duration();
        if duration <= 0.0 {
            continue;
        }
        let n = 2 * segment_substeps(duration, step);
        let h = duration / n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        let node = |psi: &Vector2<C64>, t: f64| {
            let b = qubit_field(&segment.sample(t), 0.0, 0.0);
            let v = CVec::from_vec(vec![psi[0], psi[1]]);
            Node { bloch: bloch_of_ket(&v), energy: energy(psi, b) }
        };
        nodes.push(node(&psi, 0.0));
        for k in 0..n {
            let sub = Substep { segment_index, segment, local_start: k as f64 * h, start: start + k as f64 * h, h };
            psi = qubit_step(&sub, &err, 0.0) * psi;
            nodes.push(node(&psi, (k + 1) as f64 * h));
        }
        if segment.role == SegmentRole::Latitude {
            let mut s = nodes[0].energy + nodes[n].energy;
            for (k, nd) in nodes.iter().enumerate().take(n).skip(1) {
                s += nd.energy * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            dynamical -= s * h / 3.0;
        }
        path.extend(nodes.iter().skip(1).map(|nd| nd.bloch));
        start += duration;
    }
    Ok(PhaseAudit { dynamical_phase: dynamical, geometric_phase: solid_angle_phase(&path) })
}

/// `−½∫(1−cos χ)dξ` along a sampled Bloch path, trapezoidal in ξ with the
/// azimuth unwrapped between consecutive samples.
pub fn solid_angle_phase(path: &[[f64; 3]]) -> f64 {
    let mut total = 0.0;
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        let rho_a = (a[0] * a[0] + a[1] * a[1]).sqrt();
        let rho_b = (b[0] * b[0] + b[1] * b[1]).sqrt();
        if rho_a < 1e-9 || rho_b < 1e-9 {
            continue;
        }
        let mut dxi = b[1].atan2(b[0]) - a[1].atan2(a[0]);
        dxi -= std::f64::consts::TAU * (dxi / std::f64::consts::TAU).round();
        let cos_mean = 0.5 * (a[2] + b[2]);
        total += -0.5 * (1.0 - cos_mean) * dxi;
    }
    total
}
