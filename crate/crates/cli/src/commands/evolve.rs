use std::f64::consts::FRAC_1_SQRT_2;

use ncna_core::export::{matrix_export, trajectory_csv};
use ncna_core::linalg::{bloch_of_ket, c, ket_to_dm, CMat, CVec};
use ncna_core::propagation::{bloch_trajectory, channel, propagate_density, propagate_qutrit, propagate_unitary};
use ncna_core::rb::direct_infidelity;
use serde::Serialize;

use super::Ctx;
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct EvolveReport {
    gate: String,
    kind: &'static str,
    init: String,
    epsilon: f64,
    delta: f64,
    levels: usize,
    duration_ns: f64,
    gate_fidelity: f64,
    state_fidelity: f64,
    final_bloch: [f64; 3],
    leakage: f64,
}

fn initial_ket(label: &str) -> CliResult<CVec> {
    let s = FRAC_1_SQRT_2;
    let (a, b) = match label {
        "0" => (c(1.0, 0.0), c(0.0, 0.0)),
        "1" => (c(0.0, 0.0), c(1.0, 0.0)),
        "+" => (c(s, 0.0), c(s, 0.0)),
        "-" => (c(s, 0.0), c(-s, 0.0)),
        "+i" => (c(s, 0.0), c(0.0, s)),
        "-i" => (c(s, 0.0), c(0.0, -s)),
        other => return Err(CliError::Config(format!("initial state must be 0, 1, +, -, +i or -i, got `{other}`"))),
    };
    Ok(CVec::from_vec(vec![a, b]))
}

fn embed_ket(psi: &CVec, d: usize) -> CVec {
    CVec::from_fn(d, |i, _| if i < 2 { psi[i] } else { c(0.0, 0.0) })
}

/// Bloch vector of the qubit block of `rho` (unnormalized when leaked).
fn block_bloch(rho: &CMat) -> [f64; 3] {
    let r01 = rho[(0, 1)];
    [2.0 * r01.re, -2.0 * r01.im, (rho[(0, 0)] - rho[(1, 1)]).re]
}

pub fn run(ctx: &mut Ctx, init: &str) -> CliResult<()> {
    let cfg = ctx.cfg.clone();
    let env = cfg.envelope.spec();
    let (schedule, target, _) = cfg.gate.build(&env, cfg.timing.policy())?;
    let err = cfg.errors.model(&env);
    let qubit = cfg.qubit.model();
    let step = cfg.step();
    let psi0 = initial_ket(init)?;
    let psi_target = &target * &psi0;
    let d = qubit.level_count;

    let (operator_kind, operator) = if qubit.is_noiseless() && d == 2 {
        ("unitary", propagate_unitary(&schedule, &err, step)?.operator)
    } else if qubit.is_noiseless() {
        ("unitary", propagate_qutrit(&schedule, &err, &qubit, step)?.operator)
    } else {
        ("superoperator", channel(&schedule, &err, &qubit, step)?)
    };
    ctx.write_json("propagator.json", &matrix_export(operator_kind, &operator))?;

    let rho0 = ket_to_dm(&embed_ket(&psi0, d));
    let final_state = propagate_density(&schedule, &err, &qubit, &rho0, step)?;
    let rho = final_state.state.expect("initial state supplied");
    let tgt = embed_ket(&psi_target, d);
    let state_fidelity = (tgt.adjoint() * &rho * &tgt)[(0, 0)].re.clamp(0.0, 1.0);
    let gate_fidelity = 1.0 - direct_infidelity(&schedule, &target, &err, &qubit, step)?;

    if qubit.is_noiseless() && d == 2 {
        let traj = bloch_trajectory(&schedule, &psi0, &err, step)?;
        ctx.write_text("trajectory.csv", &trajectory_csv(&traj)?)?;
    } else {
        ctx.say("trajectory.csv is only written for noiseless two-level runs");
    }

    let final_bloch = if d == 2 && qubit.is_noiseless() {
        let u = &operator * &psi0;
        bloch_of_ket(&u)
    } else {
        block_bloch(&rho)
    };
    let report = EvolveReport {
        gate: cfg.gate.name.clone(),
        kind: schedule.kind.name(),
        init: init.to_string(),
        epsilon: cfg.errors.epsilon,
        delta: cfg.errors.delta,
        levels: d,
        duration_ns: schedule.duration() * 1e9,
        gate_fidelity,
        state_fidelity,
        final_bloch,
        leakage: final_state.leakage,
    };
    ctx.say(format!(
        "{} {} from |{}⟩: gate fidelity {:.9}, state fidelity {:.9}, Bloch ({:.4}, {:.4}, {:.4})",
        report.gate, report.kind, init, gate_fidelity, state_fidelity, final_bloch[0], final_bloch[1], final_bloch[2]
    ));
    ctx.write_json("evolve_report.json", &report)
}
