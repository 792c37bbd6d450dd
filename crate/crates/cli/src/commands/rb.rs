use ncna_core::export::{fit_summary, rb_csv, FitSummary};
use ncna_core::geometry::StandardGate;
use ncna_core::rb::{clifford_table, fit_decay, interleaved_gate, interleaved_label, run_rb, GateBank};
use ncna_core::Error;
use serde::Serialize;

use super::Ctx;
use crate::config::{GateChoice, RbMode};
use crate::error::{CliError, CliResult};

const PLANTED: (f64, f64, f64) = (0.5, 0.5, 0.99);
const PLANTED_TOL: f64 = 1e-6;

#[derive(Serialize)]
#[allow(non_snake_case)]
struct RbReport {
    mode: RbMode,
    seed: u64,
    reference: FitSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    interleaved_gate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    interleaved: Option<FitSummary>,
    /// Mean interleaved survival over all lengths.
    #[serde(skip_serializing_if = "Option::is_none")]
    interleaved_mean_F: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    F_itl_clamped: Option<bool>,
}

#[derive(Serialize)]
struct PlantedReport {
    planted: [f64; 3],
    recovered: [f64; 3],
    max_error: f64,
    tolerance: f64,
}

fn planted_check(ctx: &mut Ctx) -> CliResult<()> {
    let ms: Vec<f64> = ctx.cfg.rb.lengths.iter().map(|&m| m as f64).collect();
    let (a, b, p) = PLANTED;
    let ys: Vec<f64> = ms.iter().map(|&m| a * p.powf(m) + b).collect();
    let fit = fit_decay(&ms, &ys)?;
    let max_error = [(fit.a - a).abs(), (fit.b - b).abs(), (fit.p - p).abs()].into_iter().fold(0.0, f64::max);
    ctx.write_json(
        "rb_planted.json",
        &PlantedReport { planted: [a, b, p], recovered: [fit.a, fit.b, fit.p], max_error, tolerance: PLANTED_TOL },
    )?;
    ctx.say(format!("planted decay: recovered p = {:.9}, max parameter error {max_error:.2e}", fit.p));
    if max_error > PLANTED_TOL {
        return Err(CliError::Check(format!("planted decay recovered only to {max_error:.2e}")));
    }
    Ok(())
}

pub fn run(ctx: &mut Ctx, planted: bool) -> CliResult<()> {
    let cfg = ctx.cfg.clone();
    let env = cfg.envelope.spec();
    let timing = cfg.timing.policy();
    let table = clifford_table();
    let mut bank = GateBank::standard(&env, timing)?;
    let mut label = None;
    if cfg.rb.mode == RbMode::Interleaved {
        let (sched, ideal, name) = match cfg.gate.choice()? {
            GateChoice::Standard(g) => {
                let (s, u) = interleaved_gate(g, cfg.gate.kind, &env, timing)?;
                (s, u, interleaved_label(g).to_string())
            }
            _ => {
                let (s, u, _) = cfg.gate.build(&env, timing)?;
                (s, u, cfg.gate.name.clone())
            }
        };
        if cfg.gate.name.eq_ignore_ascii_case(StandardGate::T.name()) {
            ctx.say("T is not a Clifford; interleaving two T pulses (2T = S)");
        }
        bank = bank.with_interleaved(sched, ideal);
        label = Some(name);
    }
    let result = run_rb(
        &cfg.rb.config(cfg.seed),
        &table,
        &bank,
        &cfg.errors.model(&env),
        &cfg.qubit.model(),
        cfg.rb.scope,
        cfg.step(),
    )?;

    ctx.write_text("rb_reference.csv", &rb_csv(&result.reference)?)?;
    if let Some(curve) = &result.interleaved {
        ctx.write_text("rb_interleaved.csv", &rb_csv(curve)?)?;
    }
    let report = RbReport {
        mode: cfg.rb.mode,
        seed: cfg.seed,
        reference: fit_summary(&result.reference, None),
        interleaved_gate: label,
        interleaved: result.interleaved.as_ref().map(|c| fit_summary(c, result.f_itl.map(|f| f.value))),
        interleaved_mean_F: result.interleaved.as_ref().map(|c| c.mean_f()),
        F_itl_clamped: result.f_itl.map(|f| f.clamped),
    };
    ctx.write_json("rb_fit.json", &report)?;
    if let (Some(p), Some(f)) = (report.reference.p, report.reference.F) {
        ctx.say(format!("reference: p = {p:.8}, F_ref = {f:.8}"));
    }
    if let Some(s) = &report.interleaved {
        if let (Some(p), Some(f)) = (s.p, s.F) {
            ctx.say(format!("interleaved {}: p = {p:.8}, F_itl = {f:.8}", report.interleaved_gate.as_deref().unwrap_or("")));
        }
    }

    if planted {
        planted_check(ctx)?;
    }
    for (name, curve) in [("reference", Some(&result.reference)), ("interleaved", result.interleaved.as_ref())] {
        if let Some(msg) = curve.and_then(|c| c.fit_error.clone()) {
            return Err(CliError::Core(Error::FitDiverged(format!("{name} curve: {msg}"))));
        }
    }
    Ok(())
}
