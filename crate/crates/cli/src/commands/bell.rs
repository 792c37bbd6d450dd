use ncna_core::entangler::{
    bell_target, effective_schedule, evolve_two_qubit, modulation_detuning, reconstruct, simulate_tomography,
    state_fidelity, ReadoutWeights,
};
use ncna_core::export::{density_bars_csv, matrix_export, schedule_export, tomography_csv, to_mhz, MatrixExport};
use ncna_core::linalg::trace_distance;
use ncna_core::seed::derive_seed;
use serde::Serialize;

use super::Ctx;
use crate::error::CliResult;

#[derive(Serialize)]
struct BellRun {
    init: &'static str,
    target: &'static str,
    fidelity: f64,
    tomography_fidelity: f64,
    trace_distance: f64,
    residual: f64,
    raw_min_eigenvalue: f64,
}

#[derive(Serialize)]
struct BellReport {
    chi: f64,
    xi1: f64,
    xi2: f64,
    g_eff_mhz: f64,
    detuning_mhz: f64,
    g_eff_cot_chi_mhz: f64,
    omega_p_mhz: f64,
    duration_ns: f64,
    flat_ns: f64,
    shots: Option<u64>,
    runs: Vec<BellRun>,
}

#[derive(Serialize)]
struct DensityFile {
    model: MatrixExport,
    reconstructed: MatrixExport,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let cfg = ctx.cfg.clone();
    let b = &cfg.bell;
    let spec = b.spec()?;
    let drive = b.drive(&spec);
    let ramp = b.ramp();
    let schedule = effective_schedule(&spec, &drive, ramp, "bell")?;
    ctx.write_json("bell_schedule.json", &schedule_export(&schedule, cfg.samples_per_ns)?)?;
    let noise = b.noise();
    let weights = ReadoutWeights(b.weights);

    let mut runs = Vec::new();
    for (k, input) in b.init.inputs().into_iter().enumerate() {
        let rho = evolve_two_qubit(&schedule, &drive, input, noise.as_ref(), cfg.step())?;
        let target = bell_target(input);
        let fidelity = state_fidelity(&rho, &target)?;
        let records = simulate_tomography(&rho, &weights, b.shots(derive_seed(cfg.seed, &[k as u64])))?;
        let rec = reconstruct(&records, &weights)?;
        let lbl = input.label();
        ctx.write_json(
            &format!("bell_{lbl}_density.json"),
            &DensityFile { model: matrix_export("density", &rho), reconstructed: matrix_export("density", &rec.rho) },
        )?;
        ctx.write_text(&format!("bell_{lbl}_bars.csv"), &density_bars_csv(&rec.rho)?)?;
        ctx.write_text(&format!("bell_{lbl}_tomography.csv"), &tomography_csv(&records)?)?;
        let run = BellRun {
            init: lbl,
            target: match lbl {
                "10" => "(|10> - i|01>)/sqrt2",
                _ => "(|10> + i|01>)/sqrt2",
            },
            fidelity,
            tomography_fidelity: state_fidelity(&rec.rho, &target)?,
            trace_distance: trace_distance(&rec.rho, &rho),
            residual: rec.residual,
            raw_min_eigenvalue: rec.raw_min_eigenvalue,
        };
        ctx.say(format!(
            "|{lbl}⟩ → {}: fidelity {:.6}, reconstructed {:.6}",
            run.target, run.fidelity, run.tomography_fidelity
        ));
        runs.push(run);
    }

    let duration = schedule.duration();
    let report = BellReport {
        chi: spec.chi2,
        xi1: spec.xi1,
        xi2: spec.xi2,
        g_eff_mhz: b.g_eff_mhz,
        detuning_mhz: to_mhz(drive.detuning()),
        g_eff_cot_chi_mhz: to_mhz(modulation_detuning(&spec, drive.g_eff)),
        omega_p_mhz: to_mhz(drive.omega_p),
        duration_ns: duration * 1e9,
        flat_ns: (duration - ramp.rise - ramp.fall) * 1e9,
        shots: b.shots,
        runs,
    };
    ctx.say(format!(
        "modulation detuning {:.4} MHz, pulse {:.3} ns (flat {:.3} ns)",
        report.detuning_mhz, report.duration_ns, report.flat_ns
    ));
    ctx.write_json("bell_report.json", &report)
}
