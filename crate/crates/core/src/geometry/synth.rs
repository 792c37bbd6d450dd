use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use super::envelope::{Envelope, EnvelopeSpec};
use super::gate_spec::{GateSpec, StandardGate};
use super::schedule::{PhaseLaw, PulseSchedule, PulseSegment, ScheduleKind, SegmentRole};
use crate::error::{Error, Result};

/// Areas below this are treated as empty segments.
const AREA_EPS: f64 = 1e-14;

/// How segment durations are derived from the required areas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "policy", rename_all = "kebab-case")]
pub enum TimingPolicy {
    /// Every segment peaks at the envelope's `peak_amplitude`; durations
    /// scale with area.
    #[default]
    FixedPeak,
    /// The whole schedule lasts `duration` seconds, split in proportion to
    /// area; the common peak must not exceed `max_amplitude`.
    FixedTotal { duration: f64, max_amplitude: f64 },
}

struct SegmentRequest {
    role: SegmentRole,
    /// Signed full area `∫Ω` demanded by the path.
    area: f64,
    /// Builds phase law and detuning once the duration is known.
    finish: Box<dyn Fn(f64, f64) -> (PhaseLaw, f64)>,
}

fn realize(
    label: &str,
    kind: ScheduleKind,
    requests: Vec<SegmentRequest>,
    env: &EnvelopeSpec,
    timing: TimingPolicy,
) -> Result<PulseSchedule> {
    env.validate()?;
    let requests: Vec<_> = requests.into_iter().filter(|r| r.area.abs() > AREA_EPS).collect();
    let fill = env.fill_factor();
    let total_area: f64 = requests.iter().map(|r| r.area.abs()).sum();
    let peak = match timing {
        TimingPolicy::FixedPeak => env.peak_amplitude,
        TimingPolicy::FixedTotal { duration, max_amplitude } => {
            if !(duration > 0.0 && duration.is_finite()) {
                return Err(Error::InfeasibleSchedule(format!("total duration {duration} must be positive")));
            }
            let peak = total_area / (duration * fill);
            if peak > max_amplitude {
                return Err(Error::InfeasibleSchedule(format!(
                    "area {total_area:.6} rad in {duration:e} s needs peak {peak:.6e} rad/s above the bound {max_amplitude:.6e}"
                )));
            }
            peak
        }
    };
    let mut segments = Vec::with_capacity(requests.len());
    for r in requests {
        let duration = r.area.abs() / (peak * fill);
        let envelope = Envelope::with_area(env.profile(duration), duration, r.area.abs())?;
        let sign = r.area.signum();
        let (phase, detuning) = (r.finish)(duration, sign);
        segments.push(PulseSegment { role: r.role, envelope, phase, detuning });
    }
    let drag = env.drag_enabled.then_some(env.drag_coefficient);
    Ok(PulseSchedule { label: label.to_string(), kind, segments, drag })
}

/// Reverse-engineer the three-segment NCNA schedule for `spec`.
///
/// Segments with zero area are dropped, so `chi1 == chi2` yields a single
/// latitude segment and the degenerate path yields an empty schedule.
pub fn synthesize_ncna(spec: &GateSpec, env: &EnvelopeSpec, timing: TimingPolicy, label: &str) -> Result<PulseSchedule> {
    if spec.is_identity_path() {
        return Ok(PulseSchedule::empty(label, ScheduleKind::Geometric));
    }
    spec.validate()?;
    let GateSpec { chi1, chi2, xi1, xi2, .. } = *spec;
    let dxi = xi2 - xi1;
    let meridian = chi2 - chi1;
    let latitude_area = 0.5 * dxi * (2.0 * chi2).sin();
    let detuning_integral = -dxi * chi2.sin().powi(2);
    if latitude_area.abs() <= AREA_EPS && detuning_integral.abs() > AREA_EPS {
        return Err(Error::InfeasibleSchedule(format!(
            "latitude chi2 = {chi2} needs a pure-detuning leg of ∫Δ = {detuning_integral} with zero drive area"
        )));
    }
    let cot_chi2 = chi2.cos() / chi2.sin();

    let flip = |sign: f64| if sign < 0.0 { PI } else { 0.0 };
    let requests = vec![
        SegmentRequest {
            role: SegmentRole::Meridian,
            area: meridian,
            finish: Box::new(move |_, sign| (PhaseLaw::Constant { value: xi1 + FRAC_PI_2 + flip(sign) }, 0.0)),
        },
        SegmentRequest {
            role: SegmentRole::Latitude,
            area: latitude_area,
            finish: Box::new(move |duration, sign| {
                (
                    PhaseLaw::RunningXi { xi_start: xi1, cot_chi: cot_chi2, sign, offset: PI + flip(sign) },
                    detuning_integral / duration,
                )
            }),
        },
        SegmentRequest {
            role: SegmentRole::Meridian,
            area: meridian,
            finish: Box::new(move |_, sign| (PhaseLaw::Constant { value: xi2 - FRAC_PI_2 + flip(sign) }, 0.0)),
        },
    ];
    realize(label, ScheduleKind::Geometric, requests, env, timing)
}

/// Resonant rotations `(angle, axis azimuth)` in time order.
pub fn rotation_schedule(
    label: &str,
    kind: ScheduleKind,
    rotations: &[(f64, f64)],
    env: &EnvelopeSpec,
    timing: TimingPolicy,
) -> Result<PulseSchedule> {
    let requests = rotations
        .iter()
        .map(|&(angle, axis)| SegmentRequest {
            role: SegmentRole::Rotation,
            area: angle,
            finish: Box::new(move |_, sign| {
                let value = if sign < 0.0 { axis + PI } else { axis };
                (PhaseLaw::Constant { value }, 0.0)
            }),
        })
        .collect();
    realize(label, kind, requests, env, timing)
}

/// Rotation sequence of the composite dynamical comparator, in time order.
///
/// Z(α) = R_y(π/2)·R_x(−α)·R_y(−π/2); H = R_x(π)·R_y(π/2) (= −i·H).
pub fn dynamical_rotations(gate: StandardGate) -> Vec<(f64, f64)> {
    let z = |alpha: f64| vec![(-FRAC_PI_2, FRAC_PI_2), (-alpha, 0.0), (FRAC_PI_2, FRAC_PI_2)];
    match gate {
        StandardGate::T => z(FRAC_PI_4),
        StandardGate::S => z(FRAC_PI_2),
        StandardGate::H => vec![(FRAC_PI_2, FRAC_PI_2), (PI, 0.0)],
    }
}

pub fn synthesize_dynamical(gate: StandardGate, env: &EnvelopeSpec, timing: TimingPolicy) -> Result<PulseSchedule> {
    rotation_schedule(gate.name(), ScheduleKind::Dynamical, &dynamical_rotations(gate), env, timing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::gate_spec::{standard_gate, GateRequest};
    use crate::linalg::{max_abs_diff, rotation, CMat};

    fn spec(g: StandardGate) -> GateSpec {
        standard_gate(GateRequest::Standard(g)).unwrap()
    }

    #[test]
    fn t_is_single_latitude_segment() {
        let sched = synthesize_ncna(&spec(StandardGate::T), &EnvelopeSpec::default(), TimingPolicy::FixedPeak, "T").unwrap();
        assert_eq!(sched.segments.len(), 1);
        assert_eq!(sched.segments[0].role, SegmentRole::Latitude);
        let expected = 9.0 * PI / 16.0 * (2.0 * (8.0f64 / 9.0).acos()).sin();
        assert!((sched.half_area() - expected).abs() < 1e-12);
        // rounds to the quoted "about 0.46π"
        assert!((sched.half_area() / PI - 0.46).abs() < 0.005);
    }

    #[test]
    fn h_segment_half_areas() {
        let sched = synthesize_ncna(&spec(StandardGate::H), &EnvelopeSpec::default(), TimingPolicy::FixedPeak, "H").unwrap();
        let halves: Vec<f64> = sched.segments.iter().map(|s| s.half_area()).collect();
        assert_eq!(halves.len(), 3);
        assert!((halves[0] - PI / 12.0).abs() < 1e-12);
        assert!((halves[1] - PI * 3f64.sqrt() / 8.0).abs() < 1e-12);
        assert!((halves[2] - PI / 12.0).abs() < 1e-12);
        assert!((sched.half_area() / PI - 0.3832).abs() < 1e-4);
    }

    #[test]
    fn latitude_detuning_cancels_dynamical_phase() {
        for g in StandardGate::ALL {
            let s = spec(g);
            let sched = synthesize_ncna(&s, &EnvelopeSpec::default(), TimingPolicy::FixedPeak, g.name()).unwrap();
            let lat = sched.segments.iter().find(|x| x.role == SegmentRole::Latitude).unwrap();
            let integral = lat.detuning * lat.duration();
            let expected = (s.xi1 - s.xi2) * s.chi2.sin().powi(2);
            assert!((integral - expected).abs() <= 1e-12 * expected.abs());
            // running phase lands on ξ₂ + π
            let end = lat.phase_at(lat.duration());
            assert!(((end - s.xi2 - PI).rem_euclid(2.0 * PI)).min((s.xi2 + PI - end).rem_euclid(2.0 * PI)) < 1e-12);
        }
    }

    #[test]
    fn degenerate_spec_is_empty() {
        let id = GateSpec::new(0.4, 1.0, 1.0, 0.0).unwrap();
        let sched = synthesize_ncna(&id, &EnvelopeSpec::default(), TimingPolicy::FixedPeak, "I").unwrap();
        assert!(sched.is_empty());
        assert_eq!(sched.half_area(), 0.0);
    }

    #[test]
    fn fixed_peak_and_fixed_total_policies() {
        let env = EnvelopeSpec::default();
        let s = spec(StandardGate::H);
        let a = synthesize_ncna(&s, &env, TimingPolicy::FixedPeak, "H").unwrap();
        assert!((a.peak_amplitude() - env.peak_amplitude).abs() < 1e-6 * env.peak_amplitude);
        let b = synthesize_ncna(&s, &env, TimingPolicy::FixedTotal { duration: 100e-9, max_amplitude: 1e9 }, "H").unwrap();
        assert!((b.duration() - 100e-9).abs() < 1e-18);
        assert!((b.half_area() - a.half_area()).abs() < 1e-12);
        let err = synthesize_ncna(&s, &env, TimingPolicy::FixedTotal { duration: 1e-9, max_amplitude: 1e8 }, "H");
        assert!(matches!(err, Err(Error::InfeasibleSchedule(_))));
    }

    #[test]
    fn dynamical_areas_and_products() {
        let env = EnvelopeSpec::default();
        let expected_area = [(StandardGate::T, 0.625), (StandardGate::S, 0.75), (StandardGate::H, 0.75)];
        for (g, area) in expected_area {
            let sched = synthesize_dynamical(g, &env, TimingPolicy::FixedPeak).unwrap();
            assert!((sched.half_area() / PI - area).abs() < 1e-12, "{g:?}");
            let mut u = CMat::identity(2, 2);
            for (angle, axis) in dynamical_rotations(g) {
                u = rotation(angle, axis) * u;
            }
            let overlap = crate::linalg::phase_free_overlap(&g.ideal(), &u);
            assert!((overlap - 1.0).abs() < 1e-14, "{g:?}: {overlap}");
        }
        assert_eq!(synthesize_dynamical(StandardGate::T, &env, TimingPolicy::FixedPeak).unwrap().segments.len(), 3);
        assert_eq!(synthesize_dynamical(StandardGate::H, &env, TimingPolicy::FixedPeak).unwrap().segments.len(), 2);
        // H composite is exactly −i·H
        let mut u = CMat::identity(2, 2);
        for (angle, axis) in dynamical_rotations(StandardGate::H) {
            u = rotation(angle, axis) * u;
        }
        assert!(max_abs_diff(&u, &(StandardGate::H.ideal() * crate::linalg::c(0.0, -1.0))) < 1e-14);
    }
}
