//! Single-qubit Clifford randomized benchmarking on simulated channels.

mod clifford;
mod fit;
mod harness;
mod sequence;
mod sweep;

pub use clifford::{clifford_table, word_matrix, CliffordElement, CliffordTable, Generator};
pub use fit::{fit_decay, DecayFit};
pub use harness::{
    interleaved_fidelity, reference_fidelity, run_interleaved_curve, run_rb, run_rb_channels, two_t_schedule,
    ErrorScope, GateBank, InterleavedFidelity, InterleavedGate, RBConfig, RBResult, RbChannels, RbCurve, RbPoint,
};
pub use sequence::{draw_sequence, generate_sequence, sequence_seed, Sequence};
pub use sweep::{
    central_curvature, default_grid, direct_infidelity, error_sweep, interleaved_gate, interleaved_label, SweepAxis,
    SweepConfig, SweepMode, SweepRow,
};
