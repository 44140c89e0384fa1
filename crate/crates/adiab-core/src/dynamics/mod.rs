//! Propagation of the diabatic Schrödinger equation and Newton's equations,
//! with synchronized eigenbasis tracking and measure accumulation.
//!
//! Quantum amplitudes are always propagated in the fixed diabatic basis;
//! adiabatic quantities are obtained by projection at each step. The
//! adiabatic equation of motion is evaluated pointwise only, to supply the
//! moduli rates that feed the measure, never integrated directly -- that
//! keeps the propagation gauge-insensitive.

mod classical;
mod quantum;
mod trajectory;

pub use classical::{hellmann_feynman_forces, step_classical};
pub use quantum::{adiabatic_rhs, project_adiabatic, schrodinger_rhs, step_quantum, StepLimits};
pub use trajectory::{
    run_trajectory, RunMetadata, SurfacePolicy, TimeGrid, TrajectoryOptions, TrajectoryRecord,
};

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::measure::MeasureError;
use crate::models::ModelError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("state norm {norm} deviates from unity beyond tolerance")]
    NotNormalized { norm: f64 },
    #[error("step rejected: {reason}")]
    StepTooLarge { reason: String },
    #[error("monomer ordering violated at pair ({a}, {b}): {xa} >= {xb}")]
    MonomerCollision { a: usize, b: usize, xa: f64, xb: f64 },
    #[error("surface index {surface} out of range for dimension {dim}")]
    SurfaceOutOfRange { surface: usize, dim: usize },
    #[error("classical mass must be positive, got {0}")]
    NonPositiveMass(f64),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Complex amplitude vector in the diabatic basis, unit norm.
#[derive(Debug, Clone)]
pub struct QuantumState {
    pub amplitudes: DVector<C64>,
    pub time: f64,
}

impl QuantumState {
    /// Requires the amplitudes to be normalized within 1e-9.
    pub fn new(amplitudes: DVector<C64>, time: f64) -> Result<Self, DynamicsError> {
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-9 {
            return Err(DynamicsError::NotNormalized { norm: norm_sq.sqrt() });
        }
        Ok(Self { amplitudes, time })
    }

    /// Rescale to unit norm, then construct.
    pub fn normalized(amplitudes: DVector<C64>, time: f64) -> Result<Self, DynamicsError> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(DynamicsError::NotNormalized { norm: 0.0 });
        }
        Self::new(amplitudes.scale(1.0 / norm), time)
    }

    /// Basis state |n> (0-based).
    pub fn site(dim: usize, n: usize, time: f64) -> Self {
        assert!(n < dim);
        let mut v = DVector::zeros(dim);
        v[n] = C64::new(1.0, 0.0);
        Self { amplitudes: v, time }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// Diabatic populations |c_n|^2.
    pub fn populations(&self) -> DVector<f64> {
        self.amplitudes.map(|z| z.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Adiabatic expansion of a state: coefficients `c~_k = <phi_k|psi>` with
/// their polar decomposition, and (once computed) the moduli rates.
#[derive(Debug, Clone)]
pub struct AdiabaticDecomposition {
    pub coeffs: DVector<C64>,
    /// Moduli `a~_k >= 0`.
    pub moduli: DVector<f64>,
    /// Polar phases `b~_k` in (-pi, pi]; persisted externally for emptied
    /// states via [`AdiabaticDecomposition::inherit_phases`].
    pub phases: DVector<f64>,
    /// `d a~_k / dt`, filled by the trajectory loop.
    pub moduli_rates: Option<DVector<f64>>,
    pub stamp: u64,
}

impl AdiabaticDecomposition {
    pub fn from_coeffs(coeffs: DVector<C64>, stamp: u64) -> Self {
        let moduli = coeffs.map(|z| z.norm());
        let phases = coeffs.map(|z| if z.norm() > 0.0 { z.arg() } else { 0.0 });
        Self { coeffs, moduli, phases, moduli_rates: None, stamp }
    }

    /// Adiabatic populations `p~_k = a~_k^2`.
    pub fn populations(&self) -> DVector<f64> {
        self.moduli.map(|a| a * a)
    }

    /// Replace the phases of states below `amp_floor` with their previous
    /// values and record the surviving phases back into `memory`. The polar
    /// phase is undefined at zero modulus; persisting the last defined
    /// value keeps the rate field continuous as states empty and refill.
    pub fn inherit_phases(&mut self, memory: &mut [f64], amp_floor: f64) {
        assert_eq!(memory.len(), self.phases.len());
        for k in 0..self.phases.len() {
            if self.moduli[k] < amp_floor {
                self.phases[k] = memory[k];
            } else {
                memory[k] = self.phases[k];
            }
        }
    }
}

/// Classical chain configuration: strictly increasing positions.
#[derive(Debug, Clone)]
pub struct ClassicalState {
    pub positions: Vec<f64>,
    pub velocities: Vec<f64>,
    pub mass: f64,
    /// Adiabatic surface driving the nuclear forces.
    pub surface_index: usize,
}

impl ClassicalState {
    pub fn new(positions: Vec<f64>, velocities: Vec<f64>, mass: f64) -> Result<Self, DynamicsError> {
        if velocities.len() != positions.len() {
            return Err(DynamicsError::DimensionMismatch {
                expected: positions.len(),
                actual: velocities.len(),
            });
        }
        if !(mass > 0.0) {
            return Err(DynamicsError::NonPositiveMass(mass));
        }
        check_ordering(&positions)?;
        Ok(Self { positions, velocities, mass, surface_index: 0 })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Copy with different positions; used for interpolated configurations
    /// inside a step, where the ordering check is deferred to assembly.
    pub(crate) fn at_positions(&self, positions: Vec<f64>) -> Self {
        Self {
            positions,
            velocities: self.velocities.clone(),
            mass: self.mass,
            surface_index: self.surface_index,
        }
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.velocities.iter().map(|v| v * v).sum::<f64>()
    }
}

pub(crate) fn check_ordering(positions: &[f64]) -> Result<(), DynamicsError> {
    for (i, w) in positions.windows(2).enumerate() {
        if !(w[0] < w[1]) {
            return Err(DynamicsError::MonomerCollision { a: i, b: i + 1, xa: w[0], xb: w[1] });
        }
    }
    Ok(())
}
