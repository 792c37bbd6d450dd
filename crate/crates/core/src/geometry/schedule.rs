use serde::{Deserialize, Serialize};

use super::envelope::{Envelope, Profile};

/// Drive phase as a function of time within a segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum PhaseLaw {
    Constant { value: f64 },
    /// `φ(t) = ξ(t) + offset` with
    /// `ξ(t) = xi_start − Δ t + cot_chi · sign · ∫₀ᵗ Ω`.
    ///
    /// `sign` is −1 when the requested segment area is negative; the envelope
    /// then stays nonnegative and `offset` absorbs an extra π.
    RunningXi { xi_start: f64, cot_chi: f64, sign: f64, offset: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentRole {
    /// Constant-azimuth leg of a geometric path.
    Meridian,
    /// Constant-latitude leg carrying the geometric phase.
    Latitude,
    /// Resonant rotation in a dynamical composite.
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub role: SegmentRole,
    pub envelope: Envelope,
    pub phase: PhaseLaw,
    /// Constant detuning Δ in rad/s.
    pub detuning: f64,
}

/// Instantaneous control values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub amplitude: f64,
    /// dΩ/dt, used for DRAG.
    pub slope: f64,
    pub phase: f64,
    pub detuning: f64,
}

impl PulseSegment {
    pub fn duration(&self) -> f64 {
        self.envelope.duration
    }

    /// Half pulse area `½∫Ω`.
    pub fn half_area(&self) -> f64 {
        0.5 * self.envelope.area()
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        match self.phase {
            PhaseLaw::Constant { value } => value,
            PhaseLaw::RunningXi { xi_start, cot_chi, sign, offset } => {
                xi_start - self.detuning * t + cot_chi * sign * self.envelope.integral(t) + offset
            }
        }
    }

    /// Sample at local time `t ∈ [0, duration]`.
    pub fn sample(&self, t: f64) -> DriveSample {
        DriveSample {
            amplitude: self.envelope.value(t),
            slope: self.envelope.derivative(t),
            phase: self.phase_at(t),
            detuning: self.detuning,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Geometric,
    Dynamical,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Geometric => "geometric",
            ScheduleKind::Dynamical => "dynamical",
        }
    }
}

impl std::str::FromStr for ScheduleKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "geometric" | "ncna" => Ok(Self::Geometric),
            "dynamical" => Ok(Self::Dynamical),
            other => Err(crate::Error::InvalidConfig(format!("unknown schedule kind `{other}`"))),
        }
    }
}

/// Ordered pulse segments realizing one gate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub label: String,
    pub kind: ScheduleKind,
    pub segments: Vec<PulseSegment>,
    /// DRAG coefficient carried from the envelope request; applied only by
    /// the three-level propagator.
    #[serde(default)]
    pub drag: Option<f64>,
}

impl PulseSchedule {
    pub fn empty(label: impl Into<String>, kind: ScheduleKind) -> Self {
        Self { label: label.into(), kind, segments: Vec::new(), drag: None }
    }

    /// A zero-amplitude wait of `duration` seconds.
    pub fn idle(label: impl Into<String>, kind: ScheduleKind, duration: f64) -> Self {
        let envelope = Envelope { profile: Profile::Flat, duration, scale: 0.0 };
        let segment = PulseSegment {
            role: SegmentRole::Rotation,
            envelope,
            phase: PhaseLaw::Constant { value: 0.0 },
            detuning: 0.0,
        };
        Self { label: label.into(), kind, segments: vec![segment], drag: None }
    }

    pub fn duration(&self) -> f64 {
        self.segments.iter().fold(0.0, |acc, s| acc + s.duration())
    }

    pub fn half_area(&self) -> f64 {
        0.5 * self.segments.iter().fold(0.0, |acc, s| acc + s.envelope.area())
    }

    /// Maximum of Ω(t) over the schedule.
    pub fn peak_amplitude(&self) -> f64 {
        self.segments.iter().map(|s| s.envelope.peak()).fold(0.0, f64::max)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// Segment start times.
    pub fn boundaries(&self) -> Vec<f64> {
        let mut t = 0.0;
        let mut out = Vec::with_capacity(self.segments.len() + 1);
        out.push(0.0);
        for s in &self.segments {
            t += s.duration();
            out.push(t);
        }
        out
    }

    /// Drive sample at global time `t`; zero outside the schedule.
    pub fn sample(&self, t: f64) -> DriveSample {
        let mut start = 0.0;
        for s in &self.segments {
            let end = start + s.duration();
            if t <= end {
                return s.sample((t - start).max(0.0));
            }
            start = end;
        }
        DriveSample { amplitude: 0.0, slope: 0.0, phase: 0.0, detuning: 0.0 }
    }

    /// This schedule followed by `next`.
    pub fn then(&self, next: &PulseSchedule, label: impl Into<String>) -> PulseSchedule {
        let mut segments = self.segments.clone();
        segments.extend(next.segments.iter().copied());
        PulseSchedule { label: label.into(), kind: self.kind, segments, drag: self.drag.or(next.drag) }
    }
}
