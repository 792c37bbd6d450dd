use ncna_core::export::sweep_csv;
use ncna_core::geometry::{ScheduleKind, StandardGate};
use ncna_core::rb::{central_curvature, clifford_table, error_sweep, RBConfig, SweepAxis, SweepConfig, SweepRow};
use serde::Serialize;

use super::Ctx;
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct GateSummary {
    axis: SweepAxis,
    gate: String,
    curvature_geometric: Option<f64>,
    curvature_dynamical: Option<f64>,
    violations: Vec<String>,
}

/// Points where the geometric gate is worse than the dynamical one by more
/// than `tol`, in sequence fidelity, direct infidelity or flatness.
pub fn ordering_violations(rows: &[SweepRow], tol: f64) -> Vec<String> {
    let mut out = Vec::new();
    let find = |kind: ScheduleKind, v: f64| rows.iter().find(|r| r.kind == kind && r.axis_value == v);
    for geo in rows.iter().filter(|r| r.kind == ScheduleKind::Geometric) {
        let Some(dyn_) = find(ScheduleKind::Dynamical, geo.axis_value) else { continue };
        if geo.mean_f < dyn_.mean_f - tol {
            out.push(format!(
                "{} at {:+.3}: sequence fidelity {:.9} < {:.9}",
                geo.gate, geo.axis_value, geo.mean_f, dyn_.mean_f
            ));
        }
        if geo.gate_infidelity > dyn_.gate_infidelity + tol {
            out.push(format!(
                "{} at {:+.3}: gate infidelity {:.3e} > {:.3e}",
                geo.gate, geo.axis_value, geo.gate_infidelity, dyn_.gate_infidelity
            ));
        }
    }
    if let (Some(g), Some(d)) = (central_curvature(rows, ScheduleKind::Geometric), central_curvature(rows, ScheduleKind::Dynamical)) {
        if g > d + tol {
            out.push(format!("curvature {g:.4} > {d:.4}"));
        }
    }
    out
}

pub fn run(ctx: &mut Ctx, check_ordering: bool) -> CliResult<()> {
    let cfg = ctx.cfg.clone();
    let s = &cfg.sweep;
    if check_ordering && !(s.kinds.contains(&ScheduleKind::Geometric) && s.kinds.contains(&ScheduleKind::Dynamical)) {
        return Err(CliError::Config("--check-ordering needs both geometric and dynamical kinds".into()));
    }
    let table = clifford_table();
    let mut summaries = Vec::new();
    for &axis in &s.axes {
        let mut all_rows = Vec::new();
        for name in &s.gates {
            let gate: StandardGate = name.parse()?;
            let sc = SweepConfig {
                grid: s.grid.clone(),
                kinds: s.kinds.clone(),
                rb: RBConfig {
                    lengths: s.lengths.clone(),
                    sequences_per_length: s.sequences,
                    seed: cfg.seed,
                    readout_error: cfg.rb.readout_error,
                    interleaved: true,
                },
                envelope: cfg.envelope.spec(),
                timing: cfg.timing.policy(),
                qubit: cfg.qubit.model(),
                scope: cfg.rb.scope,
                mode: s.mode,
                step: cfg.step(),
                ..SweepConfig::new(axis, gate)
            };
            let rows = error_sweep(&table, &sc)?;
            let violations = if check_ordering { ordering_violations(&rows, s.tolerance) } else { Vec::new() };
            let summary = GateSummary {
                axis,
                gate: rows.first().map_or_else(|| name.clone(), |r| r.gate.clone()),
                curvature_geometric: central_curvature(&rows, ScheduleKind::Geometric),
                curvature_dynamical: central_curvature(&rows, ScheduleKind::Dynamical),
                violations,
            };
            ctx.say(format!(
                "{} {}: {} rows, curvature geometric {:?} dynamical {:?}{}",
                axis.name(),
                summary.gate,
                rows.len(),
                summary.curvature_geometric,
                summary.curvature_dynamical,
                if check_ordering { format!(", {} ordering violation(s)", summary.violations.len()) } else { String::new() }
            ));
            summaries.push(summary);
            all_rows.extend(rows);
        }
        ctx.write_text(&format!("sweep_{}.csv", axis.name()), &sweep_csv(&all_rows)?)?;
    }
    ctx.write_json("sweep_summary.json", &summaries)?;
    if check_ordering {
        let bad: Vec<String> = summaries
            .iter()
            .flat_map(|s| s.violations.iter().map(move |v| format!("{}: {v}", s.axis.name())))
            .collect();
        if !bad.is_empty() {
            for v in &bad {
                ctx.say(format!("  {v}"));
            }
            return Err(CliError::Check(format!("{} ordering violation(s)", bad.len())));
        }
    }
    Ok(())
}
