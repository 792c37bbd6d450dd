use std::f64::consts::PI;

use ncna_core::export::schedule_export;
use serde::Serialize;

use super::Ctx;
use crate::error::CliResult;

#[derive(Serialize)]
struct SynthReport {
    gate: String,
    kind: &'static str,
    segments: usize,
    duration_ns: f64,
    half_area_over_pi: f64,
    segment_half_areas_over_pi: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chi2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_g: Option<f64>,
}

pub fn run(ctx: &mut Ctx) -> CliResult<()> {
    let env = ctx.cfg.envelope.spec();
    let (schedule, _, spec) = ctx.cfg.gate.build(&env, ctx.cfg.timing.policy())?;
    let export = schedule_export(&schedule, ctx.cfg.samples_per_ns)?;
    ctx.write_json("schedule.json", &export)?;
    let report = SynthReport {
        gate: ctx.cfg.gate.name.clone(),
        kind: schedule.kind.name(),
        segments: schedule.segments.len(),
        duration_ns: export.duration_ns,
        half_area_over_pi: schedule.half_area() / PI,
        segment_half_areas_over_pi: schedule.segments.iter().map(|s| s.half_area() / PI).collect(),
        chi2: spec.filter(|_| !schedule.is_empty()).map(|s| s.chi2),
        gamma_g: spec.filter(|_| !schedule.is_empty()).map(|s| s.gamma_g),
    };
    ctx.say(format!(
        "{} {}: {} segment(s), {:.3} ns, total half-area {:.4}π",
        report.gate, report.kind, report.segments, report.duration_ns, report.half_area_over_pi
    ));
    ctx.write_json("synth_report.json", &report)
}
