//! Simulation kernels for separating adiabatic from beating contributions
//! to quantum transitions in a fixed basis.
//!
//! The crate propagates small time-dependent quantum systems (optionally
//! coupled to classical nuclear motion), tracks the instantaneous eigenbasis
//! in a parallel-transport gauge, and evaluates the phase-stripped
//! population rate field `t_n(t)` together with the cumulative adiabaticity
//! measures `T1` and `T2`. Two model families are built in: an abstract
//! three-level system with constant or ramped couplings, and a 1D
//! molecular-aggregate chain with Morse binding, dipole-dipole excitation
//! exchange, site-energy disorder and thermal initial conditions.

pub mod constants;
pub mod dynamics;
pub mod measure;
pub mod models;
pub mod spectral;
pub mod validate;

pub use dynamics::{
    adiabatic_rhs, hellmann_feynman_forces, project_adiabatic, run_trajectory, schrodinger_rhs,
    step_classical, step_quantum, AdiabaticDecomposition, ClassicalState, DynamicsError,
    QuantumState, RunMetadata, StepLimits, SurfacePolicy, TimeGrid, TrajectoryOptions,
    TrajectoryRecord,
};
pub use measure::{
    amplitude_rates, beating_closed_form, transition_rate_field, MeasureAccumulator, MeasureError,
    RateField,
};
pub use models::{
    AggregateModel, AggregateParams, CouplingMode, FixedHamiltonian, Model, ModelError,
    ThreeLevelModel, ThreeLevelParams,
};
pub use spectral::{
    align_gauge, eigensolve, eigenvector_rates, eigenvector_rates_finite_diff, fix_initial_gauge,
    EigenDerivatives, EigenSystem, GaugeReport, HermitianOperator, SpectralError,
};
