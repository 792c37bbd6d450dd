//! Text formats for schedules, trajectories, operators, RB curves and sweeps.
//!
//! Structured documents are JSON; tabular data is CSV. Frequencies are
//! written in MHz (`Ω/2π`) and times in ns, matching AWG conventions.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{PhaseLaw, PulseSchedule, SegmentRole};
use crate::linalg::CMat;
use crate::propagation::TrajectoryPoint;
use crate::entangler::TomographyRecord;
use crate::rb::{reference_fidelity, RbCurve, SweepRow};

const NS: f64 = 1e9;

/// rad/s → MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

/// MHz → rad/s.
pub fn from_mhz(mhz: f64) -> f64 {
    mhz * 2.0 * PI * 1e6
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentExport {
    pub role: SegmentRole,
    pub duration_ns: f64,
    pub detuning_mhz: f64,
    pub half_area_over_pi: f64,
    pub phase_law: PhaseLaw,
    pub envelope_mhz: Vec<f64>,
    pub phase_rad: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleExport {
    pub label: String,
    pub kind: &'static str,
    pub duration_ns: f64,
    pub half_area_over_pi: f64,
    pub samples_per_ns: f64,
    pub drag: Option<f64>,
    pub segments: Vec<SegmentExport>,
}

/// Per-segment samples at `samples_per_ns`, both ends included.
pub fn schedule_export(schedule: &PulseSchedule, samples_per_ns: f64) -> Result<ScheduleExport> {
    if !(samples_per_ns > 0.0 && samples_per_ns.is_finite()) {
        return Err(Error::InvalidConfig(format!("sample rate {samples_per_ns} per ns must be positive")));
    }
    let segments = schedule
        .segments
        .iter()
        .map(|seg| {
            let dur_ns = seg.duration() * NS;
            let n = (dur_ns * samples_per_ns).floor() as usize;
            let times: Vec<f64> = (0..=n).map(|k| k as f64 / samples_per_ns / NS).collect();
            SegmentExport {
                role: seg.role,
                duration_ns: dur_ns,
                detuning_mhz: to_mhz(seg.detuning),
                half_area_over_pi: seg.half_area() / PI,
                phase_law: seg.phase,
                envelope_mhz: times.iter().map(|&t| to_mhz(seg.envelope.value(t))).collect(),
                phase_rad: times.iter().map(|&t| seg.phase_at(t)).collect(),
            }
        })
        .collect();
    Ok(ScheduleExport {
        label: schedule.label.clone(),
        kind: schedule.kind.name(),
        duration_ns: schedule.duration() * NS,
        half_area_over_pi: schedule.half_area() / PI,
        samples_per_ns,
        drag: schedule.drag,
        segments,
    })
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidConfig(format!("serialization failed: {e}")))
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(format!("csv: {e}")))
}

#[derive(Serialize)]
struct TrajectoryRow {
    t_ns: f64,
    x: f64,
    y: f64,
    z: f64,
    leakage: f64,
}

/// `t_ns,x,y,z,leakage`.
pub fn trajectory_csv(points: &[TrajectoryPoint]) -> Result<String> {
    csv_string(points.iter().map(|p| TrajectoryRow {
        t_ns: p.t * NS,
        x: p.bloch[0],
        y: p.bloch[1],
        z: p.bloch[2],
        leakage: p.leakage,
    }))
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixExport {
    pub kind: String,
    pub rows: usize,
    pub cols: usize,
    /// Row-major `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

pub fn matrix_export(kind: &str, m: &CMat) -> MatrixExport {
    let mut entries = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            entries.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    MatrixExport { kind: kind.to_string(), rows: m.nrows(), cols: m.ncols(), entries }
}

#[derive(Serialize)]
struct BarRow {
    basis: String,
    amplitude: f64,
    argument: f64,
}

/// One row per density-matrix element: `basis,amplitude,argument` with basis
/// labels such as `10,01` for `⟨10|ρ|01⟩`.
pub fn density_bars_csv(rho: &CMat) -> Result<String> {
    let n = rho.nrows();
    let bits = (n as f64).log2().round() as usize;
    let label = |k: usize| format!("{k:0bits$b}");
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = rho[(i, j)];
            let argument = if z.norm() < 1e-12 { 0.0 } else { z.arg() };
            rows.push(BarRow { basis: format!("{},{}", label(i), label(j)), amplitude: z.norm(), argument });
        }
    }
    csv_string(rows)
}

#[derive(Serialize)]
struct RbRow {
    m: usize,
    #[serde(rename = "mean_F")]
    mean_f: f64,
    #[serde(rename = "sem_F")]
    sem_f: f64,
    n_seq: usize,
}

/// `m,mean_F,sem_F,n_seq`.
pub fn rb_csv(curve: &RbCurve) -> Result<String> {
    csv_string(curve.points.iter().map(|p| RbRow { m: p.m, mean_f: p.mean_f, sem_f: p.sem_f, n_seq: p.n_seq }))
}

#[derive(Debug, Clone, Serialize)]
#[allow(non_snake_case)]
pub struct FitSummary {
    pub A: Option<f64>,
    pub B: Option<f64>,
    pub p: Option<f64>,
    pub F: Option<f64>,
    pub residual_rms: Option<f64>,
    pub error: Option<String>,
}

/// `{A, B, p, F, residual_rms}`; `F` is `fidelity` when given, otherwise the
/// reference-RB average Clifford-generator fidelity.
pub fn fit_summary(curve: &RbCurve, fidelity: Option<f64>) -> FitSummary {
    match curve.fit {
        Some(f) => FitSummary {
            A: Some(f.a),
            B: Some(f.b),
            p: Some(f.p),
            F: Some(fidelity.unwrap_or_else(|| reference_fidelity(f.p))),
            residual_rms: Some(f.residual_rms),
            error: None,
        },
        None => FitSummary { A: None, B: None, p: None, F: None, residual_rms: None, error: curve.fit_error.clone() },
    }
}

#[derive(Serialize)]
struct SweepCsvRow<'a> {
    axis_value: f64,
    kind: &'static str,
    gate: &'a str,
    #[serde(rename = "mean_F")]
    mean_f: f64,
    gate_infidelity: f64,
}

/// `axis_value,kind,gate,mean_F,gate_infidelity`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    csv_string(rows.iter().map(|r| SweepCsvRow {
        axis_value: r.axis_value,
        kind: r.kind.name(),
        gate: &r.gate,
        mean_f: r.mean_f,
        gate_infidelity: r.gate_infidelity,
    }))
}

#[derive(Serialize)]
struct TomographyRow {
    pre_a: &'static str,
    pre_b: &'static str,
    expectation: f64,
}

/// `pre_a,pre_b,expectation`, one row per pre-rotation setting.
pub fn tomography_csv(records: &[TomographyRecord]) -> Result<String> {
    csv_string(records.iter().map(|r| TomographyRow { pre_a: r.pre_a.label(), pre_b: r.pre_b.label(), expectation: r.expectation }))
}
