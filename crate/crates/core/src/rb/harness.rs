use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rotation_schedule, EnvelopeSpec, PulseSchedule, ScheduleKind, TimingPolicy};
use crate::linalg::{basis_ket, ket_to_dm, unitary_superop, vectorize, CMat, CVec};
use crate::propagation::{channel, ErrorModel, QubitModel};

use super::clifford::{CliffordTable, Generator};
use super::fit::{fit_decay, DecayFit};
use super::sequence::{draw_sequence, sequence_seed};

const QUBIT_DIM: usize = 2;

/// Schedules realizing every generator, plus an optional interleaved gate.
#[derive(Debug, Clone)]
pub struct GateBank {
    pub generators: BTreeMap<Generator, PulseSchedule>,
    pub interleaved: Option<InterleavedGate>,
}

#[derive(Debug, Clone)]
pub struct InterleavedGate {
    pub schedule: PulseSchedule,
    /// Ideal qubit unitary; must be a Clifford.
    pub ideal: CMat,
}

impl GateBank {
    /// Resonant pulses for each generator; `I` idles for as long as a π/2 pulse.
    pub fn standard(env: &EnvelopeSpec, timing: TimingPolicy) -> Result<Self> {
        let mut generators = BTreeMap::new();
        for g in Generator::ALL {
            let sched = match g {
                Generator::I => {
                    let half = rotation_schedule("X/2", ScheduleKind::Dynamical, &[Generator::X2.rotation()], env, timing)?;
                    PulseSchedule::idle("I", ScheduleKind::Dynamical, half.duration())
                }
                _ => rotation_schedule(g.label(), ScheduleKind::Dynamical, &[g.rotation()], env, timing)?,
            };
            generators.insert(g, sched);
        }
        Ok(Self { generators, interleaved: None })
    }

    pub fn with_interleaved(mut self, schedule: PulseSchedule, ideal: CMat) -> Self {
        self.interleaved = Some(InterleavedGate { schedule, ideal });
        self
    }
}

/// Which schedules the coherent error model is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorScope {
    /// Only the interleaved gate sees ε/δ; Clifford generators stay ideal.
    #[default]
    InterleavedOnly,
    All,
}

/// Superoperators for the 24 Cliffords and the interleaved gate.
#[derive(Debug, Clone)]
pub struct RbChannels {
    pub dim: usize,
    pub cliffords: Vec<CMat>,
    /// Clifford index of the ideal interleaved gate and its noisy channel.
    pub interleaved: Option<(usize, CMat)>,
}

/// Embed a qubit unitary into `d` levels, leaving the rest untouched.
fn embed(u: &CMat, d: usize) -> CMat {
    let mut out = CMat::identity(d, d);
    out.view_mut((0, 0), (2, 2)).copy_from(u);
    out
}

impl RbChannels {
    pub fn ideal(table: &CliffordTable) -> Self {
        let cliffords = table.elements.iter().map(|e| unitary_superop(&e.matrix)).collect();
        Self { dim: QUBIT_DIM, cliffords, interleaved: None }
    }

    /// Every Clifford followed by a depolarizing channel with parameter `p0`.
    pub fn depolarizing(table: &CliffordTable, p0: f64) -> Self {
        let d = QUBIT_DIM;
        let vec_id = vectorize(&CMat::identity(d, d));
        let mixed = vec_id.scale(1.0 / d as f64);
        let dep = CMat::identity(d * d, d * d).scale(p0) + (&mixed * vec_id.transpose()).scale(1.0 - p0);
        let cliffords = table.elements.iter().map(|e| &dep * unitary_superop(&e.matrix)).collect();
        Self { dim: d, cliffords, interleaved: None }
    }

    /// Propagate every generator once and compose the Clifford channels.
    pub fn from_bank(
        table: &CliffordTable,
        bank: &GateBank,
        err: &ErrorModel,
        qubit: &QubitModel,
        scope: ErrorScope,
        step: f64,
    ) -> Result<Self> {
        qubit.validate()?;
        let d = qubit.level_count;
        let gen_err = match scope {
            ErrorScope::InterleavedOnly => ErrorModel::ideal(),
            ErrorScope::All => *err,
        };
        let mut gen_channels = BTreeMap::new();
        for g in Generator::ALL {
            let sched = bank
                .generators
                .get(&g)
                .ok_or_else(|| Error::InvalidConfig(format!("gate bank has no schedule for `{}`", g.label())))?;
            gen_channels.insert(g, channel(sched, &gen_err, qubit, step)?);
        }
        let cliffords = table
            .elements
            .iter()
            .map(|e| e.generator_word.iter().fold(CMat::identity(d * d, d * d), |acc, g| &gen_channels[g] * acc))
            .collect();
        let interleaved = match &bank.interleaved {
            None => None,
            Some(gate) => {
                let index = table
                    .find(&gate.ideal)
                    .ok_or_else(|| Error::InvalidSpec(format!("interleaved gate `{}` is not a Clifford", gate.schedule.label)))?;
                Some((index, channel(&gate.schedule, err, qubit, step)?))
            }
        };
        Ok(Self { dim: d, cliffords, interleaved })
    }

    pub fn with_interleaved(mut self, index: usize, channel: CMat) -> Self {
        self.interleaved = Some((index, channel));
        self
    }

    /// The ideal interleaved gate's channel, for a given Clifford index.
    pub fn ideal_interleaved(table: &CliffordTable, index: usize, d: usize) -> CMat {
        unitary_superop(&embed(&table.elements[index].matrix, d))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RBConfig {
    pub lengths: Vec<usize>,
    pub sequences_per_length: usize,
    pub seed: u64,
    /// Symmetric assignment error applied to the |0⟩ readout.
    #[serde(default)]
    pub readout_error: f64,
    #[serde(default)]
    pub interleaved: bool,
}

impl Default for RBConfig {
    fn default() -> Self {
        Self {
            lengths: vec![1, 2, 4, 8, 16, 32, 64, 128],
            sequences_per_length: 30,
            seed: 0,
            readout_error: 0.0,
            interleaved: false,
        }
    }
}

impl RBConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lengths.is_empty() || self.lengths.contains(&0) {
            return Err(Error::InvalidConfig("sequence lengths must be nonempty and ≥ 1".into()));
        }
        if self.sequences_per_length == 0 {
            return Err(Error::InvalidConfig("sequences_per_length must be ≥ 1".into()));
        }
        if !(0.0..=0.5).contains(&self.readout_error) {
            return Err(Error::InvalidConfig(format!("readout_error {} outside [0, 0.5]", self.readout_error)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbPoint {
    pub m: usize,
    pub mean_f: f64,
    pub sem_f: f64,
    pub n_seq: usize,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbCurve {
    pub points: Vec<RbPoint>,
    pub fit: Option<DecayFit>,
    /// Why the fit failed, when it did; the raw points are kept either way.
    pub fit_error: Option<String>,
}

impl RbCurve {
    fn from_points(points: Vec<RbPoint>) -> Self {
        let ms: Vec<f64> = points.iter().map(|p| p.m as f64).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.mean_f).collect();
        match fit_decay(&ms, &ys) {
            Ok(fit) => Self { points, fit: Some(fit), fit_error: None },
            Err(e) => Self { points, fit: None, fit_error: Some(e.to_string()) },
        }
    }

    /// Mean sequence fidelity over all lengths.
    pub fn mean_f(&self) -> f64 {
        self.points.iter().map(|p| p.mean_f).sum::<f64>() / self.points.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterleavedFidelity {
    pub value: f64,
    /// Set when `p_itl > p_ref`, which is unphysical; `value` is then 1.
    pub clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RBResult {
    pub reference: RbCurve,
    pub interleaved: Option<RbCurve>,
    pub f_ref: Option<f64>,
    pub f_itl: Option<InterleavedFidelity>,
}

/// `F_ref = 1 − (1 − p)(d − 1)/d / 1.875` for a qubit.
pub fn reference_fidelity(p_ref: f64) -> f64 {
    let d = QUBIT_DIM as f64;
    1.0 - (1.0 - p_ref) * (d - 1.0) / d / 1.875
}

/// `F_itl = 1 − (1 − p_itl/p_ref)(d − 1)/d`, clamped when the ratio exceeds 1.
pub fn interleaved_fidelity(p_itl: f64, p_ref: f64) -> InterleavedFidelity {
    let d = QUBIT_DIM as f64;
    let ratio = p_itl / p_ref;
    if ratio > 1.0 {
        return InterleavedFidelity { value: 1.0, clamped: true };
    }
    InterleavedFidelity { value: 1.0 - (1.0 - ratio) * (d - 1.0) / d, clamped: false }
}

fn survival(channels: &RbChannels, seq: &[usize], recovery: usize, interleaved: Option<&CMat>, readout: f64) -> f64 {
    let d = channels.dim;
    let mut v: CVec = vectorize(&ket_to_dm(&basis_ket(d, 0)));
    for &c in seq {
        v = &channels.cliffords[c] * v;
        if let Some(g) = interleaved {
            v = g * v;
        }
    }
    v = &channels.cliffords[recovery] * v;
    let p0 = v[0].re.clamp(0.0, 1.0);
    (1.0 - readout) * p0 + readout * (1.0 - p0)
}

fn run_curve(table: &CliffordTable, channels: &RbChannels, config: &RBConfig, interleaved: Option<(usize, &CMat)>) -> RbCurve {
    let points = config
        .lengths
        .iter()
        .map(|&m| {
            let samples: Vec<f64> = (0..config.sequences_per_length)
                .into_par_iter()
                .map(|i| {
                    let seq = draw_sequence(table, m, sequence_seed(config.seed, m, i), interleaved.map(|(k, _)| k));
                    survival(channels, &seq.cliffords, seq.recovery, interleaved.map(|(_, c)| c), config.readout_error)
                })
                .collect();
            let n = samples.len();
            let mean = samples.iter().sum::<f64>() / n as f64;
            let sem = if n > 1 {
                let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            RbPoint { m, mean_f: mean, sem_f: sem, n_seq: n, samples }
        })
        .collect();
    RbCurve::from_points(points)
}

/// Reference RB and, when configured, interleaved RB with the same seeds.
pub fn run_rb_channels(table: &CliffordTable, channels: &RbChannels, config: &RBConfig) -> Result<RBResult> {
    config.validate()?;
    if channels.cliffords.len() != table.len() {
        return Err(Error::DimensionMismatch { expected: table.len(), actual: channels.cliffords.len() });
    }
    let reference = run_curve(table, channels, config, None);
    let f_ref = reference.fit.map(|f| reference_fidelity(f.p));
    let (interleaved, f_itl) = if config.interleaved {
        let curve = run_interleaved_curve(table, channels, config)?;
        let f_itl = match (curve.fit, reference.fit) {
            (Some(i), Some(r)) => Some(interleaved_fidelity(i.p, r.p)),
            _ => None,
        };
        (Some(curve), f_itl)
    } else {
        (None, None)
    };
    Ok(RBResult { reference, interleaved, f_ref, f_itl })
}

/// Interleaved curve alone, seeded exactly as in [`run_rb_channels`].
pub fn run_interleaved_curve(table: &CliffordTable, channels: &RbChannels, config: &RBConfig) -> Result<RbCurve> {
    config.validate()?;
    let (index, chan) = channels
        .interleaved
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("interleaved RB requested without an interleaved gate".into()))?;
    Ok(run_curve(table, channels, config, Some((*index, chan))))
}

/// Build channels from `bank` and run RB.
pub fn run_rb(
    config: &RBConfig,
    table: &CliffordTable,
    bank: &GateBank,
    err: &ErrorModel,
    qubit: &QubitModel,
    scope: ErrorScope,
    step: f64,
) -> Result<RBResult> {
    config.validate()?;
    let channels = RbChannels::from_bank(table, bank, err, qubit, scope, step)?;
    run_rb_channels(table, &channels, config)
}

/// Interleaved stand-in for T, which is not a Clifford: two T pulses back to
/// back, equal to S up to phase.
pub fn two_t_schedule(t: &PulseSchedule) -> PulseSchedule {
    t.then(t, "2T")
}
