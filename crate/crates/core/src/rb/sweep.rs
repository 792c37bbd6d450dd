use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    standard_gate, synthesize_dynamical, synthesize_ncna, EnvelopeSpec, GateRequest, PulseSchedule, ScheduleKind,
    StandardGate, TimingPolicy,
};
use crate::linalg::CMat;
use crate::propagation::{
    channel, channel_fidelity, gate_fidelity, propagate_qutrit, propagate_unitary, ErrorModel, QubitModel,
};

use super::clifford::CliffordTable;
use super::harness::{run_interleaved_curve, run_rb_channels, two_t_schedule, ErrorScope, GateBank, RBConfig, RbChannels};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Rabi amplitude error ε.
    Epsilon,
    /// Frequency shift δ in units of Ω_m.
    Delta,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Delta => "delta",
        }
    }

    pub fn error_model(self, value: f64, omega_m: f64) -> ErrorModel {
        match self {
            SweepAxis::Epsilon => ErrorModel { epsilon: value, delta: 0.0, omega_m: Some(omega_m) },
            SweepAxis::Delta => ErrorModel { epsilon: 0.0, delta: value, omega_m: Some(omega_m) },
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "epsilon" | "eps" => Ok(Self::Epsilon),
            "delta" => Ok(Self::Delta),
            other => Err(Error::InvalidConfig(format!("unknown sweep axis `{other}`"))),
        }
    }
}

/// How each grid point is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    /// Mean interleaved survival over the configured lengths.
    #[default]
    FixedLengths,
    /// Also fit reference and interleaved decays and report `F_itl`.
    Refit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub gate: StandardGate,
    pub kinds: Vec<ScheduleKind>,
    pub rb: RBConfig,
    pub envelope: EnvelopeSpec,
    pub timing: TimingPolicy,
    pub qubit: QubitModel,
    pub scope: ErrorScope,
    pub mode: SweepMode,
    pub step: f64,
}

impl SweepConfig {
    /// Desk-scale defaults: lengths up to 64 with 20 sequences each.
    pub fn new(axis: SweepAxis, gate: StandardGate) -> Self {
        Self {
            axis,
            grid: default_grid(),
            gate,
            kinds: vec![ScheduleKind::Geometric, ScheduleKind::Dynamical],
            rb: RBConfig { lengths: vec![1, 2, 4, 8, 16, 32, 64], sequences_per_length: 20, interleaved: true, ..RBConfig::default() },
            envelope: EnvelopeSpec::default(),
            timing: TimingPolicy::FixedPeak,
            qubit: QubitModel::ideal(),
            scope: ErrorScope::default(),
            mode: SweepMode::default(),
            step: crate::propagation::DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub kind: ScheduleKind,
    pub gate: String,
    pub mean_f: f64,
    pub gate_infidelity: f64,
    pub per_length: Vec<f64>,
    pub f_itl: Option<f64>,
}

/// −0.1 to 0.1 in steps of 0.025.
pub fn default_grid() -> Vec<f64> {
    (-4..=4).map(|k| k as f64 * 0.025).collect()
}

/// Label used in sweep tables; T is benchmarked as 2T.
pub fn interleaved_label(gate: StandardGate) -> &'static str {
    match gate {
        StandardGate::T => "2T",
        other => other.name(),
    }
}

/// Schedule and ideal Clifford for the interleaved version of `gate`.
pub fn interleaved_gate(
    gate: StandardGate,
    kind: ScheduleKind,
    env: &EnvelopeSpec,
    timing: TimingPolicy,
) -> Result<(PulseSchedule, CMat)> {
    let single = match kind {
        ScheduleKind::Geometric => {
            let spec = standard_gate(GateRequest::Standard(gate))?;
            synthesize_ncna(&spec, env, timing, gate.name())?
        }
        ScheduleKind::Dynamical => synthesize_dynamical(gate, env, timing)?,
    };
    Ok(match gate {
        StandardGate::T => (two_t_schedule(&single), StandardGate::S.ideal()),
        _ => (single, gate.ideal()),
    })
}

/// Direct infidelity of a schedule against a qubit target under `qubit`.
pub fn direct_infidelity(schedule: &PulseSchedule, target: &CMat, err: &ErrorModel, qubit: &QubitModel, step: f64) -> Result<f64> {
    let f = if qubit.is_noiseless() && qubit.level_count == 2 {
        gate_fidelity(target, &propagate_unitary(schedule, err, step)?.operator)?
    } else if qubit.is_noiseless() {
        gate_fidelity(target, &propagate_qutrit(schedule, err, qubit, step)?.operator)?
    } else {
        let d = qubit.level_count;
        let mut embedded = CMat::identity(d, d);
        embedded.view_mut((0, 0), (2, 2)).copy_from(target);
        channel_fidelity(&embedded, &channel(schedule, err, qubit, step)?)?
    };
    Ok(1.0 - f)
}

/// Interleaved-RB sequence fidelity and direct infidelity across an error grid.
///
/// Both kinds share the Clifford channels and the seed, so any difference
/// comes from the interleaved gate alone.
pub fn error_sweep(table: &CliffordTable, cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidConfig("sweep grid must be finite".into()));
    }
    let rb = RBConfig { interleaved: true, ..cfg.rb.clone() };
    rb.validate()?;
    let bank = GateBank::standard(&cfg.envelope, cfg.timing)?;
    let omega_m = cfg.envelope.peak_amplitude;
    let gates: Vec<(ScheduleKind, PulseSchedule, CMat)> = cfg
        .kinds
        .iter()
        .map(|&k| interleaved_gate(cfg.gate, k, &cfg.envelope, cfg.timing).map(|(s, u)| (k, s, u)))
        .collect::<Result<_>>()?;
    let shared = match cfg.scope {
        ErrorScope::InterleavedOnly => {
            Some(RbChannels::from_bank(table, &bank, &ErrorModel::ideal(), &cfg.qubit, cfg.scope, cfg.step)?)
        }
        ErrorScope::All => None,
    };

    let mut rows = Vec::new();
    for &value in &cfg.grid {
        let err = cfg.axis.error_model(value, omega_m);
        let base = match &shared {
            Some(c) => c.clone(),
            None => RbChannels::from_bank(table, &bank, &err, &cfg.qubit, cfg.scope, cfg.step)?,
        };
        for (kind, sched, ideal) in &gates {
            let index = table
                .find(ideal)
                .ok_or_else(|| Error::InvalidSpec(format!("interleaved `{}` is not a Clifford", sched.label)))?;
            let chan = channel(sched, &err, &cfg.qubit, cfg.step)?;
            let channels = base.clone().with_interleaved(index, chan);
            let run_cfg = &rb;
            let (per_length, f_itl): (Vec<f64>, Option<f64>) = if cfg.mode == SweepMode::Refit {
                let r = run_rb_channels(table, &channels, run_cfg)?;
                let curve = r.interleaved.expect("interleaved curve requested");
                (curve.points.iter().map(|p| p.mean_f).collect(), r.f_itl.map(|f| f.value))
            } else {
                let curve = run_interleaved_curve(table, &channels, run_cfg)?;
                (curve.points.iter().map(|p| p.mean_f).collect(), None)
            };
            let mean_f = per_length.iter().sum::<f64>() / per_length.len() as f64;
            rows.push(SweepRow {
                axis_value: value,
                kind: *kind,
                gate: interleaved_label(cfg.gate).to_string(),
                mean_f,
                gate_infidelity: direct_infidelity(sched, ideal, &err, &cfg.qubit, cfg.step)?,
                per_length,
                f_itl,
            });
        }
    }
    Ok(rows)
}

/// `|f(h) − 2f(0) + f(−h)| / h²` of `mean_f` at the origin for one kind.
pub fn central_curvature(rows: &[SweepRow], kind: ScheduleKind) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.kind == kind).map(|r| (r.axis_value, r.mean_f)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let zero = pts.iter().position(|p| p.0.abs() < 1e-15)?;
    if zero == 0 || zero + 1 >= pts.len() {
        return None;
    }
    let (lo, mid, hi) = (pts[zero - 1], pts[zero], pts[zero + 1]);
    let h = hi.0 - mid.0;
    if ((mid.0 - lo.0) - h).abs() > 1e-12 {
        return None;
    }
    Some((hi.1 - 2.0 * mid.1 + lo.1).abs() / (h * h))
}
