//! Deterministic battery covering synthesis, propagation, RB and the Bell
//! pipeline. Outputs depend only on the configuration and seed.

use std::f64::consts::PI;

use ncna_core::entangler::{
    bell_target, effective_schedule, evolve_two_qubit, reconstruct, simulate_tomography, state_fidelity, ReadoutWeights,
    Shots,
};
use ncna_core::export::{rb_csv, tomography_csv};
use ncna_core::geometry::{standard_gate, synthesize_dynamical, synthesize_ncna, target_unitary, GateRequest, StandardGate};
use ncna_core::linalg::trace_distance;
use ncna_core::propagation::{gate_fidelity, phase_audit, propagate_qutrit, propagate_unitary, ErrorModel, QubitModel};
use ncna_core::rb::{clifford_table, fit_decay, run_rb_channels, RBConfig, RbChannels};
use ncna_core::seed::derive_seed;
use serde::Serialize;

use super::Ctx;
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct Check {
    name: String,
    value: f64,
    /// `value` must satisfy `relation bound`.
    relation: &'static str,
    bound: f64,
    pass: bool,
}

#[derive(Default)]
struct Battery {
    checks: Vec<Check>,
}

impl Battery {
    fn at_most(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check { name: name.into(), value, relation: "<=", bound, pass: value <= bound });
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, bound: f64) {
        self.checks.push(Check { name: name.into(), value, relation: ">=", bound, pass: value >= bound });
    }
}

// Rounded half-areas (in units of π) the catalog is meant to land near.
const ROUGH_AREAS: [(StandardGate, f64, f64); 3] =
    [(StandardGate::T, 0.46, 0.625), (StandardGate::S, 0.60, 0.75), (StandardGate::H, 0.38, 0.75)];

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg.clone();
    let env = cfg.envelope.spec();
    let timing = cfg.timing.policy();
    let step = cfg.step();
    let mut b = Battery::default();

    for (gate, rough, dynamical) in ROUGH_AREAS {
        let spec = standard_gate(GateRequest::Standard(gate))?;
        let geo = synthesize_ncna(&spec, &env, timing, gate.name())?;
        let dyn_ = synthesize_dynamical(gate, &env, timing)?;
        let n = gate.name();
        b.at_most(format!("{n} geometric half-area near {rough}π"), (geo.half_area() / PI - rough).abs(), 0.005);
        b.at_most(format!("{n} dynamical half-area {dynamical}π"), (dyn_.half_area() / PI - dynamical).abs(), 1e-12);
        let u = propagate_unitary(&geo, &ErrorModel::ideal(), step)?.operator;
        b.at_least(format!("{n} ideal propagation fidelity"), gate_fidelity(&target_unitary(&spec), &u)?, 1.0 - 1e-6);
        let audit = phase_audit(&geo, &spec, step)?;
        let expected = -0.5 * (spec.xi2 - spec.xi1) * (1.0 - spec.chi2.cos());
        b.at_most(format!("{n} latitude dynamical phase"), audit.dynamical_phase.abs(), 1e-6);
        b.at_most(format!("{n} geometric phase error"), (audit.geometric_phase - expected).abs(), 1e-6);

        let qutrit = QubitModel::qutrit(-2.0 * PI * 200e6);
        let leak_off = propagate_qutrit(&geo, &ErrorModel::ideal(), &qutrit, step)?.leakage;
        let with_drag = synthesize_ncna(&spec, &env.with_drag(env.drag_coefficient), timing, n)?;
        let leak_on = propagate_qutrit(&with_drag, &ErrorModel::ideal(), &qutrit, step)?.leakage;
        b.at_most(format!("{n} DRAG leakage minus plain leakage"), leak_on - leak_off, -f64::MIN_POSITIVE);
    }

    let table = clifford_table();
    let short = RBConfig { lengths: vec![1, 2, 4, 8, 16, 32], sequences_per_length: 10, seed: cfg.seed, ..RBConfig::default() };
    let ideal = run_rb_channels(&table, &RbChannels::ideal(&table), &short)?;
    b.at_least("ideal bank fitted p", ideal.reference.fit.map_or(f64::NAN, |f| f.p), 0.99999);

    let ms: Vec<f64> = short.lengths.iter().map(|&m| m as f64).collect();
    let planted: Vec<f64> = ms.iter().map(|&m| 0.5 * 0.99f64.powf(m) + 0.5).collect();
    let fit = fit_decay(&ms, &planted)?;
    b.at_most("planted decay p error", (fit.p - 0.99).abs(), 1e-6);

    let p0 = 0.98;
    let dep_cfg = RBConfig { lengths: vec![1, 2, 4, 8, 16, 32, 64], sequences_per_length: 100, seed: cfg.seed, ..RBConfig::default() };
    let dep = run_rb_channels(&table, &RbChannels::depolarizing(&table, p0), &dep_cfg)?;
    b.at_most("depolarizing p error", dep.reference.fit.map_or(f64::NAN, |f| (f.p - p0).abs()), 2e-3);
    ctx.write_text("selftest_rb.csv", &rb_csv(&dep.reference)?)?;

    let bell = &cfg.bell;
    let spec = bell.spec()?;
    let drive = bell.drive(&spec);
    let sched = effective_schedule(&spec, &drive, bell.ramp(), "bell")?;
    let weights = ReadoutWeights(bell.weights);
    for (k, input) in bell.init.inputs().into_iter().enumerate() {
        let rho = evolve_two_qubit(&sched, &drive, input, None, step)?;
        let target = bell_target(input);
        let lbl = input.label();
        b.at_least(format!("Bell fidelity from |{lbl}>"), state_fidelity(&rho, &target)?, 0.999);
        let exact = reconstruct(&simulate_tomography(&rho, &weights, Shots::Exact)?, &weights)?;
        b.at_most(format!("exact tomography trace distance |{lbl}>"), trace_distance(&exact.rho, &rho), 1e-10);
        let shots = Shots::Sampled { shots: 10_000, seed: derive_seed(cfg.seed, &[k as u64]) };
        let records = simulate_tomography(&rho, &weights, shots)?;
        let sampled = reconstruct(&records, &weights)?;
        let gap = (state_fidelity(&sampled.rho, &target)? - state_fidelity(&rho, &target)?).abs();
        b.at_most(format!("sampled tomography fidelity gap |{lbl}>"), gap, 0.01);
        ctx.write_text(&format!("selftest_tomography_{lbl}.csv"), &tomography_csv(&records)?)?;
    }

    let failed: Vec<&str> = b.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    for c in &b.checks {
        ctx.say(format!("{} {} = {:.6e} ({} {:.1e})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.value, c.relation, c.bound));
    }
    let failed_msg = (!failed.is_empty()).then(|| failed.join(", "));
    ctx.write_json("selftest.json", &b.checks)?;
    match failed_msg {
        None => Ok(()),
        Some(msg) => Err(CliError::Check(msg)),
    }
}
