//! Three-level ladder |A>, |B>, |C> with nearest-level couplings.
//!
//! The ramped mode drives a counterintuitive pulse order: the B-C coupling
//! starts at its maximum and is exchanged for the A-B coupling over the
//! ramp duration,
//!
//! ```text
//! J1(t) = J10 sin^2(pi t / 2 t_ramp),   J2(t) = J20 cos^2(pi t / 2 t_ramp),
//! ```
//!
//! so the zero-energy eigenstate deforms from |A> into |C| and a slow ramp
//! transfers the population with near-unit fidelity. Everything here is
//! dimensionless with hbar = 1.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{Model, ModelError};
use crate::dynamics::ClassicalState;
use crate::spectral::HermitianOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingMode {
    Constant { j0: f64 },
    Ramped { j10: f64, j20: f64, t_ramp: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelParams {
    /// Site energies (E_A, E_B, E_C).
    pub energies: [f64; 3],
    pub mode: CouplingMode,
}

impl ThreeLevelParams {
    pub fn constant(energies: [f64; 3], j0: f64) -> Result<Self, ModelError> {
        if j0 < 0.0 {
            return Err(ModelError::InvalidParams(format!("j0 must be >= 0, got {j0}")));
        }
        Ok(Self { energies, mode: CouplingMode::Constant { j0 } })
    }

    pub fn ramped(energies: [f64; 3], j10: f64, j20: f64, t_ramp: f64) -> Result<Self, ModelError> {
        if !(t_ramp > 0.0) {
            return Err(ModelError::InvalidParams(format!("t_ramp must be > 0, got {t_ramp}")));
        }
        if j10 < 0.0 || j20 < 0.0 {
            return Err(ModelError::InvalidParams(format!(
                "coupling maxima must be >= 0, got j10 = {j10}, j20 = {j20}"
            )));
        }
        Ok(Self { energies, mode: CouplingMode::Ramped { j10, j20, t_ramp } })
    }

    /// (J1, J2) at time t; outside [0, t_ramp] the ramp is clamped to its
    /// endpoint values.
    pub fn couplings(&self, t: f64) -> (f64, f64) {
        match self.mode {
            CouplingMode::Constant { j0 } => (j0, j0),
            CouplingMode::Ramped { j10, j20, t_ramp } => {
                let tc = t.clamp(0.0, t_ramp);
                let arg = PI * tc / (2.0 * t_ramp);
                (j10 * arg.sin().powi(2), j20 * arg.cos().powi(2))
            }
        }
    }

    /// (dJ1/dt, dJ2/dt); zero in constant mode and outside the ramp.
    pub fn coupling_rates(&self, t: f64) -> (f64, f64) {
        match self.mode {
            CouplingMode::Constant { .. } => (0.0, 0.0),
            CouplingMode::Ramped { j10, j20, t_ramp } => {
                if !(0.0..=t_ramp).contains(&t) {
                    return (0.0, 0.0);
                }
                let s = (PI * t / t_ramp).sin();
                let rate = PI / (2.0 * t_ramp) * s;
                (j10 * rate, -j20 * rate)
            }
        }
    }

    pub fn hamiltonian(&self, t: f64) -> HermitianOperator {
        let (j1, j2) = self.couplings(t);
        let e = self.energies;
        HermitianOperator::from_real_rows(
            3,
            &[e[0], j1, 0.0, j1, e[1], j2, 0.0, j2, e[2]],
        )
        .expect("three-level assembly is symmetric by construction")
    }

    pub fn hamiltonian_rate(&self, t: f64) -> HermitianOperator {
        let (r1, r2) = self.coupling_rates(t);
        HermitianOperator::from_real_rows(3, &[0.0, r1, 0.0, r1, 0.0, r2, 0.0, r2, 0.0])
            .expect("rate assembly is symmetric by construction")
    }
}

#[derive(Debug, Clone)]
pub struct ThreeLevelModel {
    pub params: ThreeLevelParams,
}

impl ThreeLevelModel {
    pub fn new(params: ThreeLevelParams) -> Self {
        Self { params }
    }
}

impl Model for ThreeLevelModel {
    fn dim(&self) -> usize {
        3
    }

    fn hamiltonian(
        &self,
        t: f64,
        _classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError> {
        Ok(self.params.hamiltonian(t))
    }

    fn hamiltonian_rate(
        &self,
        t: f64,
        _classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError> {
        Ok(self.params.hamiltonian_rate(t))
    }

    fn position_gradients(&self, _positions: &[f64]) -> Result<Vec<DMatrix<f64>>, ModelError> {
        Err(ModelError::NotPositionDependent)
    }
}

#[allow(dead_code)]
fn complex(re: f64) -> C64 {
    C64::new(re, 0.0)
}
