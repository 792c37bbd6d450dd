//! Geometric exchange gates in the `{|01⟩, |10⟩}` subspace of two transmons
//! coupled by a parametrically modulated coupler, Bell-state preparation and
//! simulated joint-readout tomography.

mod drive;
mod evolve;
mod tomography;

pub use drive::{effective_schedule, modulation_detuning, ParametricDrive, Ramp};
pub use evolve::{
    bell_spec, bell_target, embed_subspace, evolve_two_qubit, state_fidelity, subspace_propagator, SubspaceInput,
    TwoQubitNoise, KET_01, KET_10,
};
pub use tomography::{
    check_informational_completeness, project_to_state, reconstruct, simulate_tomography, ReadoutWeights,
    Reconstruction, Shots, TomographyRecord, PRE_ROTATIONS,
};
