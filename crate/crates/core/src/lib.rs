// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin-star open quantum system toolkit: model construction, controlled
//! Schrödinger propagation, BLP non-Markovianity, GRAPE entangling control
//! on a single central spin, and parameter sweeps.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod nonmarkov;
pub mod spinstar;
pub mod sweep;

pub use control::{
    fidelity_gradient, optimize, state_fidelity, GrapeProblem, OptimizationConfig,
    OptimizationResult, StepRule,
};
pub use dynamics::{evolve, reduced_trajectory, slice_propagators, ControlProtocol, Trajectory};
pub use error::{Error, Result};
pub use hilbert::{
    fidelity_pure, herm_eig, kron, partial_trace, propagator, trace_distance, DensityMatrix,
    Operator, PureState, C64,
};
pub use nonmarkov::{blp_measure, nm_window_curve, NmResult};
pub use spinstar::{
    control_generator, free_hamiltonian, initial_state_pair, target_state, CouplingMode,
    Representation, SpinStarModel, SpinStarSystem, TargetKind,
};
pub use sweep::{
    emit_results, find_matched_coupling, run, run_grid, run_matched_nm, run_nm_family, run_single,
    Experiment, OutputFormat, SweepOutcome, SweepRecord, SweepSpec,
};
