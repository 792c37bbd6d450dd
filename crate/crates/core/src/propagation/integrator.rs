//! Fourth-order Magnus stepping over a pulse schedule.
//!
//! Each segment is split into `ceil(duration / step)` equal substeps, and never
//! fewer than [`MIN_SUBSTEPS`] so that sub-nanosecond legs still resolve their
//! envelope. Within a
//! substep the generator is sampled at the two Gauss–Legendre nodes and
//! exponentiated exactly, so the scheme is exact for piecewise-constant
//! controls and fourth-order for smooth ones.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::geometry::{DriveSample, PulseSchedule, PulseSegment};
use crate::linalg::{commutator, su2_exp, CMat, C64, I};

use super::models::{qubit_field, ErrorModel};

pub const DEFAULT_STEP: f64 = 1e-10;

/// Floor on substeps per segment.
pub const MIN_SUBSTEPS: usize = 16;

/// Substep count for one segment.
pub fn segment_substeps(duration: f64, step: f64) -> usize {
    ((duration / step).ceil() as usize).max(MIN_SUBSTEPS)
}

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// One substep within a segment.
#[derive(Debug, Clone, Copy)]
pub struct Substep<'a> {
    pub segment_index: usize,
    pub segment: &'a PulseSegment,
    /// Local start time within the segment.
    pub local_start: f64,
    /// Global start time.
    pub start: f64,
    pub h: f64,
}

impl Substep<'_> {
    pub fn nodes(&self) -> (DriveSample, DriveSample) {
        let off = SQRT3 / 6.0;
        let t1 = self.local_start + self.h * (0.5 - off);
        let t2 = self.local_start + self.h * (0.5 + off);
        (self.segment.sample(t1), self.segment.sample(t2))
    }

    /// Global times of the two Gauss nodes.
    pub fn node_times(&self) -> (f64, f64) {
        let off = SQRT3 / 6.0;
        (self.start + self.h * (0.5 - off), self.start + self.h * (0.5 + off))
    }
}

pub fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidStep(step));
    }
    Ok(())
}

/// Reject schedules with non-finite controls before integrating them.
pub fn check_schedule(schedule: &PulseSchedule) -> Result<()> {
    for (k, seg) in schedule.segments.iter().enumerate() {
        let e = &seg.envelope;
        let fields = [e.duration, e.scale, seg.detuning, seg.phase_at(0.0), seg.phase_at(e.duration)];
        if fields.iter().any(|v| !v.is_finite()) || e.duration < 0.0 {
            return Err(Error::NonFinite(format!("segment {k} of `{}` has non-finite controls", schedule.label)));
        }
    }
    Ok(())
}

pub fn substeps(schedule: &PulseSchedule, step: f64) -> Vec<Substep<'_>> {
    let mut out = Vec::new();
    let mut start = 0.0;
    for (segment_index, segment) in schedule.segments.iter().enumerate() {
        let duration = segment.duration();
        if duration > 0.0 {
            let n = segment_substeps(duration, step);
            let h = duration / n as f64;
            for k in 0..n {
                out.push(Substep { segment_index, segment, local_start: k as f64 * h, start: start + k as f64 * h, h });
            }
        }
        start += duration;
    }
    out
}

/// Two-level propagator of a single substep.
pub fn qubit_step(sub: &Substep<'_>, err: &ErrorModel, detuning_offset: f64) -> Matrix2<C64> {
    let (s1, s2) = sub.nodes();
    let b1 = qubit_field(&s1, err.epsilon, detuning_offset);
    let b2 = qubit_field(&s2, err.epsilon, detuning_offset);
    field_step(b1, b2, sub.h)
}

/// `exp(Ω₄)` for Bloch fields `b₁`, `b₂` (with `H = ½ b·σ`) at the Gauss nodes.
pub fn field_step(b1: [f64; 3], b2: [f64; 3], h: f64) -> Matrix2<C64> {
    // Ω₄ = −i[(h/4)(b₁+b₂) + (√3h²/24)(b₂×b₁)]·σ
    let cross = [b2[1] * b1[2] - b2[2] * b1[1], b2[2] * b1[0] - b2[0] * b1[2], b2[0] * b1[1] - b2[1] * b1[0]];
    let k = SQRT3 * h * h / 24.0;
    su2_exp([
        0.25 * h * (b1[0] + b2[0]) + k * cross[0],
        0.25 * h * (b1[1] + b2[1]) + k * cross[1],
        0.25 * h * (b1[2] + b2[2]) + k * cross[2],
    ])
}

/// `exp(Ω₄)` for Hamiltonians `H₁`, `H₂` sampled at the Gauss nodes.
pub fn hamiltonian_step(h1: &CMat, h2: &CMat, h: f64) -> CMat {
    let omega = (h1 + h2) * (-I * (0.5 * h)) - commutator(h2, h1).scale(SQRT3 * h * h / 12.0);
    omega.exp()
}

/// `exp(Ω₄)` for superoperator generators `L₁`, `L₂`.
pub fn generator_step(l1: &CMat, l2: &CMat, h: f64) -> CMat {
    let omega = (l1 + l2).scale(0.5 * h) + commutator(l2, l1).scale(SQRT3 * h * h / 12.0);
    omega.exp()
}
