use std::f64::consts::{PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeShape {
    FlatTop,
    TruncatedGaussian,
    RaisedCosine,
}

impl std::str::FromStr for EnvelopeShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat-top" | "flat" => Ok(Self::FlatTop),
            "truncated-gaussian" | "gaussian" => Ok(Self::TruncatedGaussian),
            "raised-cosine" | "cosine" => Ok(Self::RaisedCosine),
            other => Err(Error::InvalidConfig(format!("unknown envelope shape `{other}`"))),
        }
    }
}

/// Amplitude envelope request shared by every segment of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    pub shape: EnvelopeShape,
    /// Peak drive amplitude Ω_m in rad/s.
    pub peak_amplitude: f64,
    /// Gaussian σ as a fraction of segment duration.
    pub gaussian_sigma_fraction: f64,
    /// Distance of each truncation point from the segment centre, as a
    /// fraction of segment duration.
    pub truncation_fraction: f64,
    pub drag_enabled: bool,
    /// DRAG quadrature is `-drag_coefficient · dΩ/dt / anharmonicity`.
    pub drag_coefficient: f64,
}

impl Default for EnvelopeSpec {
    fn default() -> Self {
        Self {
            shape: EnvelopeShape::TruncatedGaussian,
            peak_amplitude: TAU * 20e6,
            gaussian_sigma_fraction: 0.25,
            truncation_fraction: 0.5,
            drag_enabled: false,
            drag_coefficient: 0.5,
        }
    }
}

impl EnvelopeSpec {
    pub fn flat_top(peak_amplitude: f64) -> Self {
        Self { shape: EnvelopeShape::FlatTop, peak_amplitude, ..Self::default() }
    }

    pub fn gaussian(peak_amplitude: f64) -> Self {
        Self { shape: EnvelopeShape::TruncatedGaussian, peak_amplitude, ..Self::default() }
    }

    pub fn with_drag(mut self, coefficient: f64) -> Self {
        self.drag_enabled = true;
        self.drag_coefficient = coefficient;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_amplitude.is_finite() && self.peak_amplitude > 0.0) {
            return Err(Error::InfeasibleSchedule(format!(
                "peak amplitude must be positive, got {}",
                self.peak_amplitude
            )));
        }
        if self.shape == EnvelopeShape::TruncatedGaussian {
            if !(self.gaussian_sigma_fraction > 0.0) {
                return Err(Error::InvalidConfig("gaussian_sigma_fraction must be positive".into()));
            }
            if !(self.truncation_fraction > 0.0 && self.truncation_fraction <= 0.5) {
                return Err(Error::InvalidConfig("truncation_fraction must lie in (0, 0.5]".into()));
            }
        }
        if !self.drag_coefficient.is_finite() {
            return Err(Error::NonFinite("drag_coefficient".into()));
        }
        Ok(())
    }

    /// Unit-peak profile of this shape for a segment of `duration`.
    pub fn profile(&self, duration: f64) -> Profile {
        match self.shape {
            EnvelopeShape::FlatTop => Profile::Flat,
            EnvelopeShape::RaisedCosine => Profile::RaisedCosine,
            EnvelopeShape::TruncatedGaussian => Profile::Gaussian {
                sigma: self.gaussian_sigma_fraction * duration,
                half_window: self.truncation_fraction * duration,
            },
        }
    }

    /// Mean of the unit-peak profile over its segment. Independent of duration.
    pub fn fill_factor(&self) -> f64 {
        let p = self.profile(1.0);
        p.integral(1.0, 1.0)
    }
}

/// Unit-peak envelope profile on `[0, duration]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    Flat,
    RaisedCosine,
    /// Gaussian centred in the segment, offset so it vanishes at
    /// `centre ± half_window` and renormalized to unit peak.
    Gaussian { sigma: f64, half_window: f64 },
    /// Cosine rise, flat top, cosine fall.
    Ramped { rise: f64, fall: f64 },
}

impl Profile {
    pub fn value(&self, t: f64, duration: f64) -> f64 {
        if !(0.0..=duration).contains(&t) {
            return 0.0;
        }
        match *self {
            Profile::Flat => 1.0,
            Profile::RaisedCosine => 0.5 * (1.0 - (TAU * t / duration).cos()),
            Profile::Gaussian { sigma, half_window } => {
                let x = t - 0.5 * duration;
                if x.abs() > half_window {
                    return 0.0;
                }
                let edge = gauss_edge(sigma, half_window);
                ((-x * x / (2.0 * sigma * sigma)).exp() - edge) / (1.0 - edge)
            }
            Profile::Ramped { rise, fall } => {
                if t < rise {
                    0.5 * (1.0 - (PI * t / rise).cos())
                } else if t > duration - fall {
                    0.5 * (1.0 - (PI * (duration - t) / fall).cos())
                } else {
                    1.0
                }
            }
        }
    }

    pub fn derivative(&self, t: f64, duration: f64) -> f64 {
        if !(0.0..=duration).contains(&t) {
            return 0.0;
        }
        match *self {
            Profile::Flat => 0.0,
            Profile::RaisedCosine => 0.5 * TAU / duration * (TAU * t / duration).sin(),
            Profile::Gaussian { sigma, half_window } => {
                let x = t - 0.5 * duration;
                if x.abs() > half_window {
                    return 0.0;
                }
                let edge = gauss_edge(sigma, half_window);
                -x / (sigma * sigma) * (-x * x / (2.0 * sigma * sigma)).exp() / (1.0 - edge)
            }
            Profile::Ramped { rise, fall } => {
                if t < rise {
                    0.5 * PI / rise * (PI * t / rise).sin()
                } else if t > duration - fall {
                    -0.5 * PI / fall * (PI * (duration - t) / fall).sin()
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫₀ᵗ profile`.
    pub fn integral(&self, t: f64, duration: f64) -> f64 {
        let t = t.clamp(0.0, duration);
        match *self {
            Profile::Flat => t,
            Profile::RaisedCosine => 0.5 * (t - duration / TAU * (TAU * t / duration).sin()),
            Profile::Gaussian { sigma, half_window } => {
                let centre = 0.5 * duration;
                let a = centre - half_window;
                let b = (t).min(centre + half_window);
                if b <= a {
                    return 0.0;
                }
                let edge = gauss_edge(sigma, half_window);
                let s = sigma * SQRT_2;
                let g = sigma * (PI / 2.0).sqrt() * (erf((b - centre) / s) - erf((a - centre) / s));
                (g - edge * (b - a)) / (1.0 - edge)
            }
            Profile::Ramped { rise, fall } => {
                let ramp_area = |len: f64, x: f64| 0.5 * (x - len / PI * (PI * x / len).sin());
                let up = if rise > 0.0 { ramp_area(rise, t.min(rise)) } else { 0.0 };
                let flat_end = duration - fall;
                let flat = (t.min(flat_end) - rise).max(0.0);
                let down = if t > flat_end && fall > 0.0 {
                    // mirror of the rise
                    let full = 0.5 * fall;
                    full - ramp_area(fall, duration - t)
                } else {
                    0.0
                };
                up + flat + down
            }
        }
    }
}

fn gauss_edge(sigma: f64, half_window: f64) -> f64 {
    (-half_window * half_window / (2.0 * sigma * sigma)).exp()
}

/// A scaled profile on one segment: `Ω(t) = scale · profile(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub profile: Profile,
    pub duration: f64,
    pub scale: f64,
}

impl Envelope {
    /// Scale `profile` on `duration` so its integral is exactly `area`.
    pub fn with_area(profile: Profile, duration: f64, area: f64) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InfeasibleSchedule(format!("segment duration {duration} must be positive")));
        }
        let unit = profile.integral(duration, duration);
        if !(unit > 0.0) {
            return Err(Error::InfeasibleSchedule("envelope profile has zero area".into()));
        }
        Ok(Self { profile, duration, scale: area / unit })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.scale * self.profile.value(t, self.duration)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.scale * self.profile.derivative(t, self.duration)
    }

    pub fn integral(&self, t: f64) -> f64 {
        self.scale * self.profile.integral(t, self.duration)
    }

    pub fn area(&self) -> f64 {
        self.integral(self.duration)
    }

    pub fn peak(&self) -> f64 {
        self.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    fn profiles() -> Vec<(Profile, f64)> {
        vec![
            (Profile::Flat, 30e-9),
            (Profile::RaisedCosine, 30e-9),
            (Profile::Gaussian { sigma: 7.5e-9, half_window: 15e-9 }, 30e-9),
            (Profile::Gaussian { sigma: 5e-9, half_window: 10e-9 }, 30e-9),
            (Profile::Ramped { rise: 10e-9, fall: 10e-9 }, 98e-9),
            (Profile::Ramped { rise: 4e-9, fall: 7e-9 }, 20e-9),
        ]
    }

    #[test]
    fn analytic_integral_matches_quadrature() {
        for (p, d) in profiles() {
            for frac in [0.1, 0.37, 0.5, 0.81, 1.0] {
                let t = frac * d;
                let numeric = simpson(|s| p.value(s, d), 0.0, t, 20_000);
                let exact = p.integral(t, d);
                assert!((numeric - exact).abs() < 1e-9 * d, "{p:?} at {t}: {numeric} vs {exact}");
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for (p, d) in profiles() {
            for frac in [0.05, 0.3, 0.62, 0.93] {
                let t = frac * d;
                let h = d * 1e-6;
                let fd = (p.value(t + h, d) - p.value(t - h, d)) / (2.0 * h);
                assert!((fd - p.derivative(t, d)).abs() < 1e-5 / d, "{p:?} at {t}");
            }
        }
    }

    #[test]
    fn shaped_profiles_start_and_end_at_zero() {
        let spec = EnvelopeSpec::default();
        let p = spec.profile(40e-9);
        assert!(p.value(0.0, 40e-9).abs() < 1e-15);
        assert!(p.value(40e-9, 40e-9).abs() < 1e-15);
        assert!((p.value(20e-9, 40e-9) - 1.0).abs() < 1e-15);
        let rc = Profile::RaisedCosine;
        assert!(rc.value(0.0, 1.0).abs() < 1e-15 && rc.value(1.0, 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_area_scaling() {
        let spec = EnvelopeSpec::default();
        let env = Envelope::with_area(spec.profile(33e-9), 33e-9, 1.234).unwrap();
        assert!((env.area() - 1.234).abs() < 1e-12 * 1.234);
    }
}
