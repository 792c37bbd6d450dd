//! Run configuration, read from TOML.
//!
//! Frequencies are ordinary frequencies in MHz and times are in ns; angles
//! are radians unless written as strings such as `"45deg"`. Everything is
//! converted to SI (rad/s, s, rad) before it reaches the core crate.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ncna_core::entangler::{ParametricDrive, Ramp, ReadoutWeights, Shots, SubspaceInput, TwoQubitNoise};
use ncna_core::export::from_mhz;
use ncna_core::geometry::{
    standard_gate, synthesize_dynamical, synthesize_ncna, target_unitary, EnvelopeShape, EnvelopeSpec, GateRequest,
    GateSpec, PulseSchedule, ScheduleKind, StandardGate, TimingPolicy,
};
use ncna_core::linalg::{identity, CMat};
use ncna_core::propagation::{ErrorModel, QubitModel};
use ncna_core::rb::{default_grid, ErrorScope, RBConfig, SweepAxis, SweepMode};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

const NS: f64 = 1e-9;
const US: f64 = 1e-6;

/// An angle in radians; parses plain numbers as radians and strings with a
/// `deg` or `rad` suffix. The suffix `pi` multiplies by π (`"1.5pi"`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let parse = |body: &str| body.trim().parse::<f64>().map_err(|e| format!("bad angle `{s}`: {e}"));
        let rad = if let Some(body) = s.strip_suffix("deg") {
            parse(body)?.to_radians()
        } else if let Some(body) = s.strip_suffix("pi") {
            parse(body)? * PI
        } else {
            parse(s.strip_suffix("rad").unwrap_or(s))?
        };
        if !rad.is_finite() {
            return Err(format!("angle `{s}` is not finite"));
        }
        Ok(Angle(rad))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle(v)),
            Raw::Int(v) => Ok(Angle(v as f64)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Integration step in ns.
    pub step_ns: f64,
    /// Export sample rate per ns.
    pub samples_per_ns: f64,
    pub envelope: EnvelopeConfig,
    pub timing: TimingConfig,
    pub gate: GateConfig,
    pub errors: ErrorConfig,
    pub qubit: QubitConfig,
    pub rb: RbSection,
    pub sweep: SweepSection,
    pub bell: BellSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            step_ns: 0.1,
            samples_per_ns: 1.0,
            envelope: EnvelopeConfig::default(),
            timing: TimingConfig::default(),
            gate: GateConfig::default(),
            errors: ErrorConfig::default(),
            qubit: QubitConfig::default(),
            rb: RbSection::default(),
            sweep: SweepSection::default(),
            bell: BellSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvelopeConfig {
    pub shape: EnvelopeShape,
    pub peak_mhz: f64,
    pub sigma_fraction: f64,
    pub truncation_fraction: f64,
    pub drag: bool,
    pub drag_coefficient: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        let e = EnvelopeSpec::default();
        Self {
            shape: e.shape,
            peak_mhz: 20.0,
            sigma_fraction: e.gaussian_sigma_fraction,
            truncation_fraction: e.truncation_fraction,
            drag: e.drag_enabled,
            drag_coefficient: e.drag_coefficient,
        }
    }
}

impl EnvelopeConfig {
    pub fn spec(&self) -> EnvelopeSpec {
        EnvelopeSpec {
            shape: self.shape,
            peak_amplitude: from_mhz(self.peak_mhz),
            gaussian_sigma_fraction: self.sigma_fraction,
            truncation_fraction: self.truncation_fraction,
            drag_enabled: self.drag,
            drag_coefficient: self.drag_coefficient,
        }
    }
}

/// Fixed peak by default; setting `total_ns` switches to a fixed total
/// duration capped at `max_amplitude_mhz`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimingConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_ns: Option<f64>,
    pub max_amplitude_mhz: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self { total_ns: None, max_amplitude_mhz: 50.0 }
    }
}

impl TimingConfig {
    pub fn policy(&self) -> TimingPolicy {
        match self.total_ns {
            None => TimingPolicy::FixedPeak,
            Some(t) => TimingPolicy::FixedTotal { duration: t * NS, max_amplitude: from_mhz(self.max_amplitude_mhz) },
        }
    }
}

/// `name` is T, S, H, identity or custom; custom paths take the four path
/// angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateConfig {
    pub name: String,
    pub kind: ScheduleKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi1: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi1: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi2: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_prime: Option<Angle>,
}

impl Default for GateConfig {
    fn default() -> Self {
        Self { name: "H".into(), kind: ScheduleKind::Geometric, chi1: None, xi1: None, xi2: None, gamma_prime: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateChoice {
    Standard(StandardGate),
    Identity,
    Custom(GateSpec),
}

impl GateConfig {
    pub fn choice(&self) -> CliResult<GateChoice> {
        match self.name.to_ascii_lowercase().as_str() {
            "identity" | "id" | "i" => Ok(GateChoice::Identity),
            "custom" => {
                let need = |v: Option<Angle>, n: &str| v.map(|a| a.0).ok_or_else(|| CliError::Config(format!("custom gate needs `{n}`")));
                let request = GateRequest::Arbitrary {
                    chi1: need(self.chi1, "chi1")?,
                    xi1: need(self.xi1, "xi1")?,
                    xi2: need(self.xi2, "xi2")?,
                    gamma_prime: need(self.gamma_prime, "gamma_prime")?,
                };
                Ok(GateChoice::Custom(standard_gate(request)?))
            }
            _ => Ok(GateChoice::Standard(self.name.parse()?)),
        }
    }

    /// Schedule, ideal target and (for geometric gates) the path spec.
    pub fn build(&self, env: &EnvelopeSpec, timing: TimingPolicy) -> CliResult<(PulseSchedule, CMat, Option<GateSpec>)> {
        let choice = self.choice()?;
        match (self.kind, choice) {
            (_, GateChoice::Identity) => Ok((PulseSchedule::empty("identity", self.kind), identity(2), Some(GateSpec::identity()))),
            (ScheduleKind::Geometric, GateChoice::Standard(g)) => {
                let spec = standard_gate(GateRequest::Standard(g))?;
                Ok((synthesize_ncna(&spec, env, timing, g.name())?, target_unitary(&spec), Some(spec)))
            }
            (ScheduleKind::Geometric, GateChoice::Custom(spec)) => {
                Ok((synthesize_ncna(&spec, env, timing, "custom")?, target_unitary(&spec), Some(spec)))
            }
            (ScheduleKind::Dynamical, GateChoice::Standard(g)) => Ok((synthesize_dynamical(g, env, timing)?, g.ideal(), None)),
            (ScheduleKind::Dynamical, GateChoice::Custom(_)) => {
                Err(CliError::Config("dynamical composites exist only for T, S and H".into()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorConfig {
    pub epsilon: f64,
    /// Detuning error in units of the envelope peak.
    pub delta: f64,
}

impl ErrorConfig {
    pub fn model(&self, env: &EnvelopeSpec) -> ErrorModel {
        ErrorModel { epsilon: self.epsilon, delta: self.delta, omega_m: Some(env.peak_amplitude) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QubitConfig {
    pub levels: usize,
    pub anharmonicity_mhz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tphi_us: Option<f64>,
}

impl Default for QubitConfig {
    fn default() -> Self {
        Self { levels: 2, anharmonicity_mhz: -200.0, t1_us: None, tphi_us: None }
    }
}

impl QubitConfig {
    pub fn model(&self) -> QubitModel {
        QubitModel {
            level_count: self.levels,
            anharmonicity: if self.levels == 3 { from_mhz(self.anharmonicity_mhz) } else { 0.0 },
            t1: self.t1_us.map_or(f64::INFINITY, |t| t * US),
            tphi: self.tphi_us.map_or(f64::INFINITY, |t| t * US),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RbMode {
    #[default]
    Reference,
    Interleaved,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RbSection {
    pub mode: RbMode,
    pub lengths: Vec<usize>,
    pub sequences: usize,
    pub readout_error: f64,
    pub scope: ErrorScope,
}

impl Default for RbSection {
    fn default() -> Self {
        let d = RBConfig::default();
        Self {
            mode: RbMode::Reference,
            lengths: d.lengths,
            sequences: d.sequences_per_length,
            readout_error: d.readout_error,
            scope: ErrorScope::default(),
        }
    }
}

impl RbSection {
    pub fn config(&self, seed: u64) -> RBConfig {
        RBConfig {
            lengths: self.lengths.clone(),
            sequences_per_length: self.sequences,
            seed,
            readout_error: self.readout_error,
            interleaved: self.mode == RbMode::Interleaved,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axes: Vec<SweepAxis>,
    /// Error values; the default grid runs −0.1 to 0.1 in steps of 0.025.
    pub grid: Vec<f64>,
    pub gates: Vec<String>,
    pub kinds: Vec<ScheduleKind>,
    pub lengths: Vec<usize>,
    pub sequences: usize,
    pub mode: SweepMode,
    /// Slack allowed before a geometric point counts as worse.
    pub tolerance: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            axes: vec![SweepAxis::Epsilon, SweepAxis::Delta],
            grid: default_grid(),
            gates: vec!["T".into(), "S".into(), "H".into()],
            kinds: vec![ScheduleKind::Geometric, ScheduleKind::Dynamical],
            lengths: vec![1, 2, 4, 8, 16, 32, 64],
            sequences: 20,
            mode: SweepMode::FixedLengths,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BellInit {
    #[default]
    Both,
    #[serde(rename = "10")]
    #[value(name = "10")]
    Ket10,
    #[serde(rename = "01")]
    #[value(name = "01")]
    Ket01,
}

impl BellInit {
    pub fn inputs(self) -> Vec<SubspaceInput> {
        match self {
            BellInit::Both => vec![SubspaceInput::Ket10, SubspaceInput::Ket01],
            BellInit::Ket10 => vec![SubspaceInput::Ket10],
            BellInit::Ket01 => vec![SubspaceInput::Ket01],
        }
    }
}

/// Two-qubit exchange run. Only `omega_01_mhz − omega_10_mhz` enters the
/// effective model; the absolute values are bookkeeping for `ω_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BellSection {
    pub init: BellInit,
    pub chi: Angle,
    pub span: Angle,
    pub g_eff_mhz: f64,
    pub rise_ns: f64,
    pub fall_ns: f64,
    /// Fixed flat-top time; when absent it is solved at peak `g_eff`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_ns: Option<f64>,
    pub omega_01_mhz: f64,
    pub omega_10_mhz: f64,
    pub eta_mhz: f64,
    pub varphi: Angle,
    /// Readout shots per setting; exact expectations when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    pub weights: [f64; 4],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1_us: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tphi_us: Option<[f64; 2]>,
}

impl Default for BellSection {
    fn default() -> Self {
        Self {
            init: BellInit::Both,
            chi: Angle(0.789),
            span: Angle(1.5 * PI),
            g_eff_mhz: 3.96,
            rise_ns: 10.0,
            fall_ns: 10.0,
            flat_ns: None,
            omega_01_mhz: 5000.0,
            omega_10_mhz: 4840.0,
            eta_mhz: 0.0,
            varphi: Angle(0.0),
            shots: None,
            weights: ReadoutWeights::default().0,
            t1_us: None,
            tphi_us: None,
        }
    }
}

impl BellSection {
    pub fn spec(&self) -> CliResult<GateSpec> {
        Ok(ncna_core::entangler::bell_spec(self.chi.0, self.span.0)?)
    }

    pub fn drive(&self, spec: &GateSpec) -> ParametricDrive {
        let mut d = ParametricDrive::tuned(spec, from_mhz(self.g_eff_mhz), from_mhz(self.omega_01_mhz), from_mhz(self.omega_10_mhz));
        d.eta = from_mhz(self.eta_mhz);
        d.varphi = self.varphi.0;
        d
    }

    pub fn ramp(&self) -> Ramp {
        match self.flat_ns {
            None => Ramp::solved(self.rise_ns * NS, self.fall_ns * NS),
            Some(f) => Ramp::explicit(self.rise_ns * NS, f * NS, self.fall_ns * NS),
        }
    }

    pub fn noise(&self) -> Option<TwoQubitNoise> {
        if self.t1_us.is_none() && self.tphi_us.is_none() {
            return None;
        }
        let conv = |v: Option<[f64; 2]>| v.map_or([f64::INFINITY; 2], |[a, b]| [a * US, b * US]);
        Some(TwoQubitNoise { t1: conv(self.t1_us), tphi: conv(self.tphi_us) })
    }

    pub fn shots(&self, seed: u64) -> Shots {
        match self.shots {
            None => Shots::Exact,
            Some(shots) => Shots::Sampled { shots, seed },
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot echo config: {e}")))
    }

    pub fn step(&self) -> f64 {
        self.step_ns * NS
    }

    /// Checks that do not need any computation.
    pub fn validate(&self) -> CliResult<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.step_ns > 0.0 && self.step_ns.is_finite()) {
            return bad(format!("step_ns = {} must be positive", self.step_ns));
        }
        if !(self.samples_per_ns > 0.0 && self.samples_per_ns.is_finite()) {
            return bad(format!("samples_per_ns = {} must be positive", self.samples_per_ns));
        }
        self.envelope.spec().validate()?;
        for v in [self.errors.epsilon, self.errors.delta] {
            if !v.is_finite() {
                return bad("error amplitudes must be finite".into());
            }
        }
        if let Some(t) = self.timing.total_ns {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("timing.total_ns = {t} must be positive"));
            }
        }
        self.qubit.model().validate()?;
        self.rb.config(self.seed).validate()?;
        let sweep_rb = RBConfig { lengths: self.sweep.lengths.clone(), sequences_per_length: self.sweep.sequences, ..RBConfig::default() };
        sweep_rb.validate()?;
        if self.sweep.grid.is_empty() || self.sweep.grid.iter().any(|v| !v.is_finite()) {
            return bad("sweep.grid must be a nonempty list of finite values".into());
        }
        for g in &self.sweep.gates {
            g.parse::<StandardGate>()?;
        }
        if !(self.sweep.tolerance >= 0.0) {
            return bad("sweep.tolerance must be nonnegative".into());
        }
        let b = &self.bell;
        for (name, v) in [("g_eff_mhz", b.g_eff_mhz), ("rise_ns", b.rise_ns), ("fall_ns", b.fall_ns)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("bell.{name} = {v} must be finite and nonnegative"));
            }
        }
        if b.shots == Some(0) {
            return bad("bell.shots must be at least 1".into());
        }
        Ok(())
    }
}
