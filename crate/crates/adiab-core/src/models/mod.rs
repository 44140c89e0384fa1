//! Model families: the abstract three-level system with constant or ramped
//! couplings, the 1D molecular-aggregate chain, and a fixed-Hamiltonian
//! diagnostic model.

mod aggregate;
mod three_level;

pub use aggregate::{derive_seed, AggregateModel, AggregateParams, DEFAULT_R_MIN};
pub use three_level::{CouplingMode, ThreeLevelModel, ThreeLevelParams};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::dynamics::ClassicalState;
use crate::spectral::{HermitianOperator, SpectralError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("monomers {a} and {b} closer than {min_separation} (separation {separation})")]
    MonomerCollision { a: usize, b: usize, separation: f64, min_separation: f64 },
    #[error("thermal sampling failed to produce an ordered chain after {retries} retries")]
    ThermalSamplingFailure { retries: usize },
    #[error("model requires a classical state but none was supplied")]
    MissingClassicalState,
    #[error("model has no position dependence")]
    NotPositionDependent,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// A quantum system whose Hamiltonian may depend on time and on classical
/// coordinates. All methods are pure; models are safe to share across
/// trajectory workers.
pub trait Model: Sync {
    fn dim(&self) -> usize;

    /// H at the given time and classical configuration.
    fn hamiltonian(
        &self,
        t: f64,
        classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError>;

    /// Total time derivative dH/dt along the current trajectory; for
    /// position-dependent models this is the chain rule over coordinates.
    fn hamiltonian_rate(
        &self,
        t: f64,
        classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError>;

    /// Whether the Hamiltonian depends on classical coordinates.
    fn position_dependent(&self) -> bool {
        false
    }

    /// Coordinate gradients dH/dX_p (real symmetric), one matrix per
    /// coordinate. Only position-dependent models implement this.
    fn position_gradients(&self, _positions: &[f64]) -> Result<Vec<DMatrix<f64>>, ModelError> {
        Err(ModelError::NotPositionDependent)
    }

    /// Pairwise binding potential energy at the given coordinates.
    fn binding_potential(&self, _positions: &[f64]) -> f64 {
        0.0
    }

    /// Forces from the binding potential alone, one per coordinate.
    fn binding_forces(&self, positions: &[f64]) -> Vec<f64> {
        vec![0.0; positions.len()]
    }
}

/// Time-independent Hamiltonian wrapped as a model; useful for beating
/// references and the nullity diagnostics.
#[derive(Debug, Clone)]
pub struct FixedHamiltonian {
    h: HermitianOperator,
}

impl FixedHamiltonian {
    pub fn new(h: HermitianOperator) -> Self {
        Self { h }
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.h
    }
}

impl Model for FixedHamiltonian {
    fn dim(&self) -> usize {
        self.h.dim()
    }

    fn hamiltonian(
        &self,
        _t: f64,
        _classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError> {
        Ok(self.h.clone())
    }

    fn hamiltonian_rate(
        &self,
        _t: f64,
        _classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError> {
        Ok(HermitianOperator::zero(self.h.dim()))
    }
}
