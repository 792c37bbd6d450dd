use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{synthesize_ncna, Envelope, EnvelopeSpec, GateSpec, Profile, PulseSchedule, ScheduleKind, SegmentRole, TimingPolicy};
use crate::linalg::C64;

/// Parametric flux modulation of the coupler and the exchange interaction
/// it induces in the `{|01⟩, |10⟩}` subspace.
///
/// Only `g_eff`, the detuning `ω_p − (ω₀₁ − ω₁₀)` and the frame phase
/// `η t + varphi` enter the effective model; the flux parameters are carried
/// for bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametricDrive {
    #[serde(default)]
    pub phi_dc: f64,
    #[serde(default)]
    pub eps_p: f64,
    pub omega_p: f64,
    #[serde(default)]
    pub phi_p: f64,
    pub g_eff: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub varphi: f64,
    pub omega_01: f64,
    pub omega_10: f64,
}

impl ParametricDrive {
    /// A drive whose modulation frequency is set to
    /// `ω_p = ω₀₁ − ω₁₀ + g_eff·cot χ₂` for `spec`.
    pub fn tuned(spec: &GateSpec, g_eff: f64, omega_01: f64, omega_10: f64) -> Self {
        Self {
            phi_dc: 0.0,
            eps_p: 0.0,
            omega_p: omega_01 - omega_10 + modulation_detuning(spec, g_eff),
            phi_p: PI,
            g_eff,
            eta: 0.0,
            varphi: 0.0,
            omega_01,
            omega_10,
        }
    }

    /// `Δ′ = ω_p − (ω₀₁ − ω₁₀)`.
    pub fn detuning(&self) -> f64 {
        self.omega_p - (self.omega_01 - self.omega_10)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.phi_dc, self.eps_p, self.omega_p, self.phi_p, self.g_eff, self.eta, self.varphi, self.omega_01, self.omega_10];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{self:?}")));
        }
        if self.g_eff < 0.0 {
            return Err(Error::InvalidSpec(format!("g_eff = {} must be nonnegative", self.g_eff)));
        }
        Ok(())
    }

    /// Extra phase `η t + varphi` on top of the synthesized phase law.
    pub fn frame_phase(&self, t: f64) -> f64 {
        self.eta * t + self.varphi
    }

    pub fn frame_factor(&self, t: f64) -> C64 {
        C64::from_polar(1.0, self.frame_phase(t))
    }
}

/// Detuning between modulation and the `|01⟩ ↔ |10⟩` splitting that keeps the
/// latitude leg stationary in the modulation frame: `g_eff·cot χ₂`.
pub fn modulation_detuning(spec: &GateSpec, g_eff: f64) -> f64 {
    g_eff * spec.chi2.cos() / spec.chi2.sin()
}

/// Cosine ramps around a flat top. With `flat = None` the flat time is
/// solved so the area matches the path at peak `g_eff`; with an explicit
/// flat time the peak is solved instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ramp {
    pub rise: f64,
    pub fall: f64,
    #[serde(default)]
    pub flat: Option<f64>,
}

impl Ramp {
    pub fn solved(rise: f64, fall: f64) -> Self {
        Self { rise, fall, flat: None }
    }

    pub fn explicit(rise: f64, flat: f64, fall: f64) -> Self {
        Self { rise, fall, flat: Some(flat) }
    }

    fn validate(&self) -> Result<()> {
        let vals = [Some(self.rise), Some(self.fall), self.flat];
        if vals.iter().flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InfeasibleSchedule(format!("ramp durations {self:?} must be finite and nonnegative")));
        }
        Ok(())
    }
}

/// Subspace schedule for `spec` with `g_eff(t)` shaped by `ramp`.
///
/// The geometric synthesis fixes each segment's area and `∫Δ`; the ramped
/// envelope is then fitted to that area and the segment detuning rescaled
/// to keep `∫Δ`.
pub fn effective_schedule(spec: &GateSpec, drive: &ParametricDrive, ramp: Ramp, label: &str) -> Result<PulseSchedule> {
    drive.validate()?;
    ramp.validate()?;
    let g = drive.g_eff;
    if g == 0.0 || spec.is_identity_path() {
        let duration = ramp.rise + ramp.flat.unwrap_or(0.0) + ramp.fall;
        return Ok(if duration > 0.0 {
            PulseSchedule::idle(label, ScheduleKind::Geometric, duration)
        } else {
            PulseSchedule::empty(label, ScheduleKind::Geometric)
        });
    }
    let base = synthesize_ncna(spec, &EnvelopeSpec::flat_top(g), TimingPolicy::FixedPeak, label)?;
    if ramp.flat.is_some() && base.segments.len() != 1 {
        return Err(Error::InfeasibleSchedule(format!(
            "an explicit flat time fixes one segment, but the path needs {}",
            base.segments.len()
        )));
    }
    let ramp_area_fraction = 0.5 * (ramp.rise + ramp.fall);
    let mut segments = Vec::with_capacity(base.segments.len());
    for mut seg in base.segments {
        let area = seg.envelope.area();
        let flat = match ramp.flat {
            Some(f) => f,
            None => {
                let f = area / g - ramp_area_fraction;
                if f < 0.0 {
                    return Err(Error::InfeasibleSchedule(format!(
                        "area {area:.6} rad is below the ramps' own area {:.6} rad at g_eff = {g:.6e} rad/s",
                        g * ramp_area_fraction
                    )));
                }
                f
            }
        };
        let duration = ramp.rise + flat + ramp.fall;
        let old = seg.envelope.duration;
        seg.envelope = Envelope::with_area(Profile::Ramped { rise: ramp.rise, fall: ramp.fall }, duration, area)?;
        if seg.role == SegmentRole::Latitude {
            seg.detuning *= old / duration;
        }
        segments.push(seg);
    }
    Ok(PulseSchedule { segments, ..base })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_spec() -> GateSpec {
        GateSpec::from_path(0.789, 0.789, 0.0, 1.5 * PI).unwrap()
    }

    fn drive() -> ParametricDrive {
        ParametricDrive::tuned(&bell_spec(), 2.0 * PI * 3.96e6, 2.0 * PI * 5.0e9, 2.0 * PI * 4.84e9)
    }

    #[test]
    fn tuned_detuning_is_g_cot_chi() {
        let d = drive();
        let expected = d.g_eff / 0.789f64.tan();
        assert!((d.detuning() - expected).abs() < 1e-6 * expected);
        assert!((d.detuning() / (2.0 * PI * 1e6) - 3.932).abs() < 1e-3);
    }

    #[test]
    fn solved_flat_keeps_peak() {
        let s = effective_schedule(&bell_spec(), &drive(), Ramp::solved(10e-9, 10e-9), "bell").unwrap();
        assert_eq!(s.segments.len(), 1);
        assert!((s.peak_amplitude() - drive().g_eff).abs() < 1e-6 * drive().g_eff);
        let area = 1.5 * PI * 0.789f64.sin() * 0.789f64.cos();
        assert!((2.0 * s.half_area() - area).abs() < 1e-9 * area);
        let flat = s.duration() - 20e-9;
        assert!((flat * 1e9 - 84.69).abs() < 0.01, "{}", flat * 1e9);
    }

    #[test]
    fn explicit_flat_fixes_duration() {
        let s = effective_schedule(&bell_spec(), &drive(), Ramp::explicit(10e-9, 78e-9, 10e-9), "bell").unwrap();
        assert!((s.duration() - 98e-9).abs() < 1e-18);
        let area = 1.5 * PI * 0.789f64.sin() * 0.789f64.cos();
        assert!((2.0 * s.half_area() - area).abs() < 1e-9 * area);
    }

    #[test]
    fn ramps_too_long_are_infeasible() {
        let r = effective_schedule(&bell_spec(), &drive(), Ramp::solved(200e-9, 200e-9), "bell");
        assert!(matches!(r, Err(Error::InfeasibleSchedule(_))));
        assert!(effective_schedule(&bell_spec(), &drive(), Ramp::solved(-1e-9, 0.0), "bell").is_err());
    }
}
