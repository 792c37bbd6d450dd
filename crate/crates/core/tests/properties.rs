use std::f64::consts::{PI, TAU};

use ncna_core::entangler::{reconstruct, simulate_tomography, ReadoutWeights, Shots};
use ncna_core::geometry::*;
use ncna_core::linalg::{eigh, trace, trace_distance, unitarity_defect, CMat, C64};
use ncna_core::propagation::{gate_fidelity, propagate_density, propagate_unitary, ErrorModel, QubitModel, DEFAULT_STEP};
use ncna_core::rb::fit_decay;
use nalgebra::Matrix3;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

/// Path parameters that admit a latitude, or `None`.
fn spec_from(chi1: f64, xi1: f64, dxi: f64, gp: f64) -> Option<GateSpec> {
    GateSpec::new(chi1, xi1, xi1 + dxi, gp).ok().filter(|s| s.chi2.sin() > 0.05)
}

fn density(entries: &[f64], rank: usize) -> CMat {
    let g = CMat::from_fn(4, 4, |i, j| if j < rank { C64::new(entries[2 * (4 * i + j)], entries[2 * (4 * i + j) + 1]) } else { C64::new(0.0, 0.0) });
    let rho = &g * g.adjoint();
    let tr = trace(&rho).re;
    rho.unscale(tr)
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn target_is_unitary_with_unit_determinant(chi1 in 0.05..PI - 0.05, xi1 in -PI..PI, dxi in -3.0 * TAU..3.0 * TAU, gp in -PI..PI) {
        prop_assume!(dxi.abs() > 1e-3);
        if let Some(spec) = spec_from(chi1, xi1, dxi, gp) {
            let u = target_unitary(&spec);
            prop_assert!(unitarity_defect(&u) < 1e-12);
            prop_assert!((u.determinant().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn solid_angle_identity_holds(chi1 in 0.05..PI - 0.05, xi1 in -PI..PI, dxi in -3.0 * TAU..3.0 * TAU, gp in -PI..PI) {
        prop_assume!(dxi.abs() > 1e-3);
        if let Some(spec) = spec_from(chi1, xi1, dxi, gp) {
            let expected = -0.5 * dxi * (1.0 - spec.chi2.cos());
            prop_assert!((spec.gamma_g - expected).abs() < 1e-9 * expected.abs().max(1.0));
            // γ_g ≡ γ′ − Δξ/2 (mod 2π)
            let r = (spec.gamma_g - (gp - dxi / 2.0)) / TAU;
            prop_assert!((r - r.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn inverse_spec_undoes_the_gate(chi1 in 0.05..PI - 0.05, xi1 in -PI..PI, dxi in -3.0 * TAU..3.0 * TAU, gp in -PI..PI) {
        prop_assume!(dxi.abs() > 1e-3);
        if let Some(spec) = spec_from(chi1, xi1, dxi, gp) {
            if let Ok(inv) = spec.inverse() {
                let prod = target_unitary(&inv) * target_unitary(&spec);
                prop_assert!((trace(&prod).norm() / 2.0 - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn segment_areas_follow_the_path(chi1 in 0.1..PI - 0.1, xi1 in -PI..PI, dxi in -2.0 * TAU..2.0 * TAU, gp in -PI..PI, gaussian in any::<bool>()) {
        prop_assume!(dxi.abs() > 0.1);
        if let Some(spec) = spec_from(chi1, xi1, dxi, gp) {
            let env = if gaussian { EnvelopeSpec::gaussian(TAU * 20e6) } else { EnvelopeSpec::flat_top(TAU * 20e6) };
            let sched = synthesize_ncna(&spec, &env, TimingPolicy::FixedPeak, "p").unwrap();
            let mut want = vec![(spec.chi2 - spec.chi1).abs() / 2.0, (0.25 * dxi * (2.0 * spec.chi2).sin()).abs(), (spec.chi2 - spec.chi1).abs() / 2.0];
            if sched.segments.len() == 1 {
                want = vec![want[1]];
            }
            let got: Vec<f64> = sched.segments.iter().map(|s| s.half_area()).collect();
            prop_assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                prop_assert!((g - w).abs() <= 1e-9 * w.max(1e-3), "{} vs {}", g, w);
            }
            let total: f64 = got.iter().sum();
            prop_assert!((sched.half_area() - total).abs() < 1e-12);
            for seg in &sched.segments {
                prop_assert!(seg.envelope.value(0.5 * seg.duration()) >= 0.0);
            }
        }
    }

    #[test]
    fn planted_decays_are_recovered(a in 0.2..0.6f64, b in 0.3..0.6f64, p in 0.9..0.999f64) {
        let ms: Vec<f64> = [1, 2, 4, 8, 16, 32, 64, 128].iter().map(|&m| m as f64).collect();
        let ys: Vec<f64> = ms.iter().map(|&m| a * p.powf(m) + b).collect();
        let fit = fit_decay(&ms, &ys).unwrap();
        prop_assert!((fit.p - p).abs() < 1e-6, "p {} vs {}", fit.p, p);
        prop_assert!((fit.a - a).abs() < 1e-6 && (fit.b - b).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn exact_tomography_round_trips(entries in prop::collection::vec(-1.0..1.0f64, 32), rank in 1usize..=4) {
        let rho = density(&entries, rank);
        prop_assume!(trace(&(&rho * &rho)).re.is_finite());
        let w = ReadoutWeights::default();
        let rec = reconstruct(&simulate_tomography(&rho, &w, Shots::Exact).unwrap(), &w).unwrap();
        prop_assert!(trace_distance(&rec.rho, &rho) < 1e-10);
    }

    #[test]
    fn noisy_propagation_keeps_a_valid_state(t1_us in 1.0..100.0f64, tphi_us in 1.0..100.0f64, eps in -0.1..0.1f64, gate in 0usize..3) {
        let g = StandardGate::ALL[gate];
        let spec = standard_gate(GateRequest::Standard(g)).unwrap();
        let sched = synthesize_ncna(&spec, &EnvelopeSpec::default(), TimingPolicy::FixedPeak, g.name()).unwrap();
        let q = QubitModel::noisy(t1_us * 1e-6, tphi_us * 1e-6);
        let rho0 = CMat::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0), C64::new(0.5, 0.0)]);
        let rho = propagate_density(&sched, &ErrorModel::rabi(eps), &q, &rho0, DEFAULT_STEP).unwrap().state.unwrap();
        prop_assert!((trace(&rho).re - 1.0).abs() < 1e-9);
        prop_assert!(eigh(&rho).0[0] > -1e-9);
    }
}

#[test]
fn ideal_propagators_stay_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let eps = rng.random_range(-0.1..0.1);
        let delta = rng.random_range(-0.1..0.1);
        let g = StandardGate::ALL[rng.random_range(0..3)];
        let spec = standard_gate(GateRequest::Standard(g)).unwrap();
        let sched = synthesize_ncna(&spec, &EnvelopeSpec::default(), TimingPolicy::FixedPeak, g.name()).unwrap();
        let err = ErrorModel { epsilon: eps, delta, omega_m: None };
        let u = propagate_unitary(&sched, &err, DEFAULT_STEP).unwrap().operator;
        assert!(unitarity_defect(&u) < 1e-10);
        assert!(gate_fidelity(&g.ideal(), &u).unwrap() <= 1.0 + 1e-12);
    }
}

/// Sampling standard error of `p` for least squares on binomial means,
/// propagated from the true variances: `(JᵀJ)⁻¹ JᵀΣJ (JᵀJ)⁻¹`.
fn binomial_se_p(a: f64, b: f64, p: f64, ms: &[f64], shots: usize) -> f64 {
    let rows: Vec<[f64; 3]> = ms.iter().map(|&m| [p.powf(m), 1.0, a * m * p.powf(m - 1.0)]).collect();
    let jtj = Matrix3::from_fn(|i, j| rows.iter().map(|r| r[i] * r[j]).sum::<f64>());
    let meat = Matrix3::from_fn(|i, j| {
        rows.iter()
            .zip(ms)
            .map(|(r, &m)| {
                let q = a * p.powf(m) + b;
                r[i] * r[j] * q * (1.0 - q) / shots as f64
            })
            .sum::<f64>()
    });
    let inv = jtj.try_inverse().unwrap();
    (inv * meat * inv)[(2, 2)].sqrt()
}

#[test]
fn binomial_noise_keeps_p_within_three_standard_errors() {
    let (a, b, p): (f64, f64, f64) = (0.45, 0.5, 0.98);
    let shots = 500;
    let xs: Vec<f64> = [1usize, 2, 4, 8, 16, 32, 64, 128].iter().map(|&m| m as f64).collect();
    let se = binomial_se_p(a, b, p, &xs, shots);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 200;
    let mut inside = 0;
    for _ in 0..trials {
        let ys: Vec<f64> = xs
            .iter()
            .map(|&m| {
                let q = a * p.powf(m) + b;
                (0..shots).filter(|_| rng.random::<f64>() < q).count() as f64 / shots as f64
            })
            .collect();
        let fit = fit_decay(&xs, &ys).unwrap();
        if (fit.p - p).abs() <= 3.0 * se {
            inside += 1;
        }
    }
    let frac = inside as f64 / trials as f64;
    assert!(frac >= 0.97, "only {frac} of fits within 3 SE ({se:.2e})");
}
