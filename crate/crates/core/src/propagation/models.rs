use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DriveSample, PulseSchedule};
use crate::linalg::{c, CMat, C64};

/// Rotating-frame transmon model. Only the level count, anharmonicity and
/// the two incoherent time scales matter here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitModel {
    pub level_count: usize,
    /// Anharmonicity α in rad/s (E₂ − 2E₁ in the rotating frame).
    #[serde(default)]
    pub anharmonicity: f64,
    /// Energy relaxation time in seconds; `f64::INFINITY` disables it.
    pub t1: f64,
    /// Pure dephasing time in seconds; `f64::INFINITY` disables it.
    pub tphi: f64,
}

impl QubitModel {
    pub fn ideal() -> Self {
        Self { level_count: 2, anharmonicity: 0.0, t1: f64::INFINITY, tphi: f64::INFINITY }
    }

    pub fn noisy(t1: f64, tphi: f64) -> Self {
        Self { t1, tphi, ..Self::ideal() }
    }

    pub fn qutrit(anharmonicity: f64) -> Self {
        Self { level_count: 3, anharmonicity, ..Self::ideal() }
    }

    pub fn is_noiseless(&self) -> bool {
        self.t1.is_infinite() && self.tphi.is_infinite()
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.level_count, 2 | 3) {
            return Err(Error::InvalidModel(format!("level_count must be 2 or 3, got {}", self.level_count)));
        }
        if !(self.t1 > 0.0) || !(self.tphi > 0.0) {
            return Err(Error::InvalidModel(format!("t1 = {}, tphi = {} must be positive", self.t1, self.tphi)));
        }
        if self.level_count == 3 && (self.anharmonicity == 0.0 || !self.anharmonicity.is_finite()) {
            return Err(Error::InvalidModel("a three-level model needs a finite nonzero anharmonicity".into()));
        }
        Ok(())
    }

    /// Lowering and dephasing operators for this model.
    ///
    /// Relaxation uses `√(1/T₁)·a`; dephasing uses `√(2/T_φ)·n̂`, which for a
    /// qubit equals the projector-difference form `√(1/(2T_φ))·σz` up to an
    /// irrelevant identity shift and gives coherence decay `e^{−t/T_φ}`.
    pub fn collapse_operators(&self) -> Vec<CMat> {
        let d = self.level_count;
        let mut ops = Vec::new();
        if self.t1.is_finite() {
            let rate = (1.0 / self.t1).sqrt();
            ops.push(CMat::from_fn(d, d, |i, j| if j == i + 1 { c(rate * (j as f64).sqrt(), 0.0) } else { C64::default() }));
        }
        if self.tphi.is_finite() {
            let rate = (2.0 / self.tphi).sqrt();
            ops.push(CMat::from_fn(d, d, |i, j| if i == j { c(rate * i as f64, 0.0) } else { C64::default() }));
        }
        ops
    }
}

impl Default for QubitModel {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Coherent control errors: `(1+ε)Ω` drive and `Δ + δ·Ω_m` detuning.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModel {
    pub epsilon: f64,
    pub delta: f64,
    /// Reference amplitude for δ; the schedule's own peak when absent.
    #[serde(default)]
    pub omega_m: Option<f64>,
}

impl ErrorModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn rabi(epsilon: f64) -> Self {
        Self { epsilon, ..Self::default() }
    }

    pub fn shift(delta: f64) -> Self {
        Self { delta, ..Self::default() }
    }

    pub fn detuning_offset(&self, schedule: &PulseSchedule) -> f64 {
        if self.delta == 0.0 {
            return 0.0;
        }
        self.delta * self.omega_m.unwrap_or_else(|| schedule.peak_amplitude())
    }
}

/// Bloch-field vector `b` with `H = ½ b·σ` for the two-level Hamiltonian
/// `½[[−Δ', (1+ε)Ω e^{−iφ}], [(1+ε)Ω e^{iφ}, Δ']]`, `Δ' = Δ + δΩ_m`.
pub fn qubit_field(s: &DriveSample, epsilon: f64, detuning_offset: f64) -> [f64; 3] {
    let amp = (1.0 + epsilon) * s.amplitude;
    [amp * s.phase.cos(), amp * s.phase.sin(), -(s.detuning + detuning_offset)]
}

/// Hamiltonian matrix for a `d`-level rotating-frame transmon.
///
/// Levels are `E_n = n·Δ' + α n(n−1)/2 − Δ'/2`, matching the two-level form
/// for `d = 2`. The drive couples `n ↔ n+1` with strength `√(n+1)` and complex
/// amplitude `(Ω + i·Ω_Q) e^{iφ}` where `Ω_Q` is the DRAG quadrature.
pub fn transmon_hamiltonian(d: usize, s: &DriveSample, epsilon: f64, detuning_offset: f64, anharmonicity: f64, quadrature: f64) -> CMat {
    let dp = s.detuning + detuning_offset;
    let amp = C64::new((1.0 + epsilon) * s.amplitude, (1.0 + epsilon) * quadrature) * C64::from_polar(1.0, s.phase);
    let mut h = CMat::zeros(d, d);
    for n in 0..d {
        let nf = n as f64;
        h[(n, n)] = c(nf * dp + 0.5 * anharmonicity * nf * (nf - 1.0) - 0.5 * dp, 0.0);
        if n + 1 < d {
            let g = 0.5 * ((n + 1) as f64).sqrt();
            h[(n + 1, n)] = amp * g;
            h[(n, n + 1)] = amp.conj() * g;
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, sigma_x, sigma_y, sigma_z};

    #[test]
    fn two_level_forms_agree() {
        let s = DriveSample { amplitude: 1.3, slope: 0.0, phase: 0.7, detuning: -0.4 };
        let b = qubit_field(&s, 0.1, 0.05);
        let from_field = (sigma_x().scale(b[0]) + sigma_y().scale(b[1]) + sigma_z().scale(b[2])).scale(0.5);
        let direct = transmon_hamiltonian(2, &s, 0.1, 0.05, 0.0, 0.0);
        assert!(max_abs_diff(&from_field, &direct) < 1e-15);
        assert!((direct[(1, 0)] - C64::from_polar(0.5 * 1.1 * 1.3, 0.7)).norm() < 1e-15);
    }

    #[test]
    fn model_validation() {
        assert!(QubitModel::ideal().validate().is_ok());
        assert!(QubitModel { level_count: 4, ..QubitModel::ideal() }.validate().is_err());
        assert!(QubitModel { level_count: 3, ..QubitModel::ideal() }.validate().is_err());
        assert!(QubitModel::noisy(0.0, 1.0).validate().is_err());
    }
}
