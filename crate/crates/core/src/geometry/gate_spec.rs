use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

/// Tolerance on the arccos argument when testing branch admissibility.
const BRANCH_TOL: f64 = 1e-12;

/// Path parameters of one NCNA geometric gate.
///
/// The state `|ψ₊⟩` starts at `(chi1, xi1)`, runs down a meridian to
/// `chi2`, along the `chi2` latitude to `xi2`, and back up to `(chi1, xi2)`.
/// `chi2` and `gamma_g` are derived from the other four.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    pub chi1: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub gamma_prime: f64,
    pub chi2: f64,
    pub gamma_g: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_winding: Option<i32>,
}

impl GateSpec {
    /// Build a spec from the four free parameters, solving for `chi2`.
    ///
    /// When `xi2 == xi1` the path has no latitude segment; `gamma_prime` must
    /// then vanish modulo 2π and the spec is the identity.
    pub fn new(chi1: f64, xi1: f64, xi2: f64, gamma_prime: f64) -> Result<Self> {
        for (name, v) in [("chi1", chi1), ("xi1", xi1), ("xi2", xi2), ("gamma_prime", gamma_prime)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
        }
        if !(0.0..=PI).contains(&chi1) {
            return Err(Error::InvalidSpec(format!("chi1 = {chi1} outside [0, π]")));
        }
        if xi2 == xi1 {
            let r = gamma_prime.rem_euclid(TAU);
            if r.min(TAU - r) > BRANCH_TOL {
                return Err(Error::InvalidSpec(format!(
                    "xi1 == xi2 leaves no geometric phase, but gamma_prime = {gamma_prime}"
                )));
            }
            return Ok(Self { chi1, xi1, xi2, gamma_prime, chi2: chi1, gamma_g: 0.0, n_winding: None });
        }
        let (gamma_g, chi2) = solve_chi2(gamma_prime, xi1, xi2)?;
        Ok(Self { chi1, xi1, xi2, gamma_prime, chi2, gamma_g, n_winding: None })
    }

    /// Spec with `chi1 = chi2`: the shortest path, a single latitude segment.
    pub fn on_latitude(xi1: f64, xi2: f64, gamma_prime: f64) -> Result<Self> {
        let (gamma_g, chi2) = solve_chi2(gamma_prime, xi1, xi2)?;
        Ok(Self { chi1: chi2, xi1, xi2, gamma_prime, chi2, gamma_g, n_winding: None })
    }

    /// Spec with an explicit latitude, bypassing the phase solve. `gamma_prime`
    /// is derived from the solid-angle identity.
    pub fn from_path(chi1: f64, chi2: f64, xi1: f64, xi2: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&chi1) || !(0.0..=PI).contains(&chi2) {
            return Err(Error::InvalidSpec(format!("polar angles ({chi1}, {chi2}) outside [0, π]")));
        }
        let gamma_g = -0.5 * (xi2 - xi1) * (1.0 - chi2.cos());
        let gamma_prime = gamma_g + 0.5 * (xi2 - xi1);
        Ok(Self { chi1, xi1, xi2, gamma_prime, chi2, gamma_g, n_winding: None })
    }

    pub fn identity() -> Self {
        Self { chi1: 0.0, xi1: 0.0, xi2: 0.0, gamma_prime: 0.0, chi2: 0.0, gamma_g: 0.0, n_winding: None }
    }

    pub fn xi_plus(&self) -> f64 {
        0.5 * (self.xi2 + self.xi1)
    }

    pub fn xi_minus(&self) -> f64 {
        0.5 * (self.xi2 - self.xi1)
    }

    pub fn is_identity_path(&self) -> bool {
        self.xi1 == self.xi2 && self.chi1 == self.chi2
    }

    /// Check the stored fields against the solid-angle identity and the
    /// `γ′ = γ_g + ξ₋` relation.
    pub fn validate(&self) -> Result<()> {
        for v in [self.chi1, self.chi2, self.xi1, self.xi2, self.gamma_prime, self.gamma_g] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{self:?}")));
            }
        }
        if !(0.0..=PI).contains(&self.chi1) || !(0.0..=PI).contains(&self.chi2) {
            return Err(Error::InvalidSpec("polar angles must lie in [0, π]".into()));
        }
        let solid = -0.5 * (self.xi2 - self.xi1) * (1.0 - self.chi2.cos());
        if (solid - self.gamma_g).abs() > 1e-9 * (1.0 + self.gamma_g.abs()) {
            return Err(Error::InvalidSpec(format!(
                "gamma_g = {} disagrees with the solid angle {}",
                self.gamma_g, solid
            )));
        }
        let r = (self.gamma_prime - self.gamma_g - self.xi_minus()).rem_euclid(TAU);
        if r.min(TAU - r) > 1e-9 {
            return Err(Error::InvalidSpec("gamma_prime != gamma_g + xi_minus (mod 2π)".into()));
        }
        Ok(())
    }

    /// The spec whose unitary is the inverse of this one (up to global phase):
    /// swap the azimuths and negate `γ′`.
    pub fn inverse(&self) -> Result<Self> {
        if self.xi1 == self.xi2 {
            return Ok(Self { gamma_prime: -self.gamma_prime, ..*self });
        }
        let mut inv = Self::new(self.chi1, self.xi2, self.xi1, -self.gamma_prime)?;
        inv.n_winding = self.n_winding;
        Ok(inv)
    }
}

/// Solve the solid-angle relation for the latitude `chi2`.
///
/// `γ_g = γ′ − (ξ₂−ξ₁)/2` is first reduced into `(−2π, 0]`, then shifted by
/// `0, +2π, −2π, +4π, …` until `1 + 2γ_g/(ξ₂−ξ₁)` lies in `[−1, 1]`.
pub fn solve_chi2(gamma_prime: f64, xi1: f64, xi2: f64) -> Result<(f64, f64)> {
    let dxi = xi2 - xi1;
    if dxi == 0.0 || !dxi.is_finite() || !gamma_prime.is_finite() {
        return Err(Error::InvalidSpec(format!("solve_chi2 needs xi2 != xi1 (got {xi1}, {xi2})")));
    }
    let base = gamma_prime - 0.5 * dxi;
    let mut reduced = base.rem_euclid(TAU);
    if reduced > 0.0 {
        reduced -= TAU;
    }
    let max_k = (dxi.abs() / TAU).ceil() as i64 + 2;
    let mut shifts = vec![0i64];
    for k in 1..=max_k {
        shifts.push(k);
        shifts.push(-k);
    }
    for k in shifts {
        let gamma_g = reduced + TAU * k as f64;
        let arg = 1.0 + 2.0 * gamma_g / dxi;
        if (-1.0 - BRANCH_TOL..=1.0 + BRANCH_TOL).contains(&arg) {
            return Ok((gamma_g, arg.clamp(-1.0, 1.0).acos()));
        }
    }
    let (lo, hi) = if dxi > 0.0 { (-dxi, 0.0) } else { (0.0, -dxi) };
    Err(Error::UnreachablePath { gamma_g_base: reduced, lo, hi })
}

/// Closed-form evolution operator of the three-segment path.
pub fn target_unitary(spec: &GateSpec) -> CMat {
    let (cg, sg) = (spec.gamma_prime.cos(), spec.gamma_prime.sin());
    let (cx, sx) = (spec.chi1.cos(), spec.chi1.sin());
    let xm = spec.xi_minus();
    let xp = spec.xi_plus();
    let e = |a: f64| c(a.cos(), a.sin());
    CMat::from_row_slice(
        2,
        2,
        &[
            c(cg, sg * cx) * e(-xm),
            c(0.0, sg * sx) * e(-xp),
            c(0.0, sg * sx) * e(xp),
            c(cg, -sg * cx) * e(xm),
        ],
    )
}

/// Named entries of the standard gate catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StandardGate {
    T,
    S,
    H,
}

impl StandardGate {
    pub const ALL: [StandardGate; 3] = [StandardGate::T, StandardGate::S, StandardGate::H];

    pub fn name(self) -> &'static str {
        match self {
            StandardGate::T => "T",
            StandardGate::S => "S",
            StandardGate::H => "H",
        }
    }

    /// Ideal matrix with the conventional phase.
    pub fn ideal(self) -> CMat {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            StandardGate::T => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(FRAC_PI_4.cos(), FRAC_PI_4.sin())]),
            StandardGate::S => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
            StandardGate::H => CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        }
    }
}

impl std::str::FromStr for StandardGate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T" => Ok(StandardGate::T),
            "S" => Ok(StandardGate::S),
            "H" => Ok(StandardGate::H),
            _ => Err(Error::UnknownGate(s.to_string())),
        }
    }
}

/// Gate request: a catalog entry or explicit path parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateRequest {
    Standard(StandardGate),
    Arbitrary { chi1: f64, xi1: f64, xi2: f64, gamma_prime: f64 },
}

/// Catalog parameters. T and S sit on a single latitude (`chi1 = chi2`);
/// H starts on the equator with winding `n = 0`.
pub fn standard_gate(request: GateRequest) -> Result<GateSpec> {
    match request {
        GateRequest::Standard(StandardGate::T) => GateSpec::on_latitude(0.0, 9.0 * PI / 4.0, PI),
        GateRequest::Standard(StandardGate::S) => GateSpec::on_latitude(0.0, 5.0 * PI / 2.0, PI),
        GateRequest::Standard(StandardGate::H) => {
            let n = 0;
            let xi1 = FRAC_PI_2;
            let mut spec = GateSpec::new(FRAC_PI_2, xi1, xi1 + (2 * n + 1) as f64 * PI, FRAC_PI_4)?;
            spec.n_winding = Some(n);
            Ok(spec)
        }
        GateRequest::Arbitrary { chi1, xi1, xi2, gamma_prime } => GateSpec::new(chi1, xi1, xi2, gamma_prime),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{phase_free_overlap, unitarity_defect};

    #[test]
    fn catalog_latitudes() {
        let t = standard_gate(GateRequest::Standard(StandardGate::T)).unwrap();
        assert!((t.gamma_g + PI / 8.0).abs() < 1e-14);
        assert!((t.chi2 - (8.0f64 / 9.0).acos()).abs() < 1e-14);
        assert!((t.chi2 - 0.47588).abs() < 1e-5);
        assert_eq!(t.chi1, t.chi2);

        let s = standard_gate(GateRequest::Standard(StandardGate::S)).unwrap();
        assert!((s.gamma_g + PI / 4.0).abs() < 1e-14);
        assert!((s.chi2 - 0.64350).abs() < 1e-5);

        let h = standard_gate(GateRequest::Standard(StandardGate::H)).unwrap();
        assert!((h.chi2 - PI / 3.0).abs() < 1e-14);
        assert!((h.gamma_g + PI / 4.0).abs() < 1e-14);
        assert_eq!((h.xi1, h.xi2), (FRAC_PI_2, 3.0 * FRAC_PI_2));
        assert_eq!(h.n_winding, Some(0));
    }

    #[test]
    fn unreachable_branch_names_interval() {
        match solve_chi2(FRAC_PI_2, 0.0, FRAC_PI_2) {
            Err(Error::UnreachablePath { lo, hi, .. }) => {
                assert!((lo + FRAC_PI_2).abs() < 1e-15);
                assert_eq!(hi, 0.0);
            }
            other => panic!("expected unreachable path, got {other:?}"),
        }
    }

    #[test]
    fn negative_winding_picks_shifted_branch() {
        // The T inverse needs the +2π shift from the reduced value.
        let t = standard_gate(GateRequest::Standard(StandardGate::T)).unwrap();
        let inv = t.inverse().unwrap();
        assert!((inv.gamma_g - PI / 8.0).abs() < 1e-12);
        assert!((inv.chi2 - t.chi2).abs() < 1e-12);
    }

    #[test]
    fn t_target_is_diagonal_with_quarter_phase() {
        let t = standard_gate(GateRequest::Standard(StandardGate::T)).unwrap();
        let u = target_unitary(&t);
        let e = |a: f64| c(a.cos(), a.sin());
        assert!((u[(0, 0)] + e(-9.0 * PI / 8.0)).norm() < 1e-14);
        assert!((u[(1, 1)] + e(9.0 * PI / 8.0)).norm() < 1e-14);
        assert!(u[(0, 1)].norm() < 1e-14 && u[(1, 0)].norm() < 1e-14);
        let rel = u[(1, 1)] / u[(0, 0)];
        assert!((rel - e(FRAC_PI_4)).norm() < 1e-14);
    }

    #[test]
    fn h_target_is_hadamard_times_minus_i() {
        let h = standard_gate(GateRequest::Standard(StandardGate::H)).unwrap();
        let u = target_unitary(&h);
        let expected = StandardGate::H.ideal() * c(0.0, -1.0);
        assert!(crate::linalg::max_abs_diff(&u, &expected) < 1e-14);
    }

    #[test]
    fn pi_gamma_prime_gives_diagonal() {
        for chi1 in [0.1, 0.9, 2.0] {
            for gp in [0.0, PI] {
                let spec = GateSpec::from_path(chi1, chi1, 0.0, 1.0).map(|s| GateSpec { gamma_prime: gp, ..s }).unwrap();
                let u = target_unitary(&spec);
                assert!(u[(0, 1)].norm() < 1e-15 && u[(1, 0)].norm() < 1e-15);
                assert!(unitarity_defect(&u) < 1e-14);
            }
        }
    }

    #[test]
    fn identity_spec() {
        let id = GateSpec::new(0.7, 0.3, 0.3, 0.0).unwrap();
        assert!(id.is_identity_path());
        let u = target_unitary(&id);
        assert!(phase_free_overlap(&u, &crate::linalg::identity(2)) > 1.0 - 1e-15);
        assert!(GateSpec::new(0.7, 0.3, 0.3, 0.5).is_err());
    }

    #[test]
    fn unknown_gate_name() {
        assert!(matches!("cnot".parse::<StandardGate>(), Err(Error::UnknownGate(_))));
    }
}
