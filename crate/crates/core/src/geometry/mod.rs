//! Gate-level intent to pulse schedules.

mod envelope;
mod gate_spec;
mod schedule;
mod synth;

pub use envelope::{Envelope, EnvelopeShape, EnvelopeSpec, Profile};
pub use gate_spec::{solve_chi2, standard_gate, target_unitary, GateRequest, GateSpec, StandardGate};
pub use schedule::{DriveSample, PhaseLaw, PulseSchedule, PulseSegment, ScheduleKind, SegmentRole};
pub use synth::{dynamical_rotations, rotation_schedule, synthesize_dynamical, synthesize_ncna, TimingPolicy};
