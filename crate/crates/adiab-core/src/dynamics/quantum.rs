//! Quantum-side kernels: Schrödinger right-hand side, fixed-step
//! fourth-order Runge-Kutta, and projection onto the adiabatic basis.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::{AdiabaticDecomposition, ClassicalState, DynamicsError, QuantumState};
use crate::models::Model;
use crate::spectral::{EigenDerivatives, EigenSystem, HermitianOperator};

/// Step guards for the quantum integrator.
#[derive(Debug, Clone, Copy)]
pub struct StepLimits {
    /// Largest step accepted; None leaves it unbounded.
    pub dt_max: Option<f64>,
    /// Per-step norm-square drift that aborts the run. Norm drift is a
    /// diagnostic -- it is never silently repaired by renormalizing.
    pub norm_drift_abort: f64,
}

impl Default for StepLimits {
    fn default() -> Self {
        Self { dt_max: None, norm_drift_abort: 1e-6 }
    }
}

/// `-i H c` with H supplied by the model at the state's time and the given
/// classical configuration.
pub fn schrodinger_rhs<M: Model>(
    model: &M,
    state: &QuantumState,
    classical: Option<&ClassicalState>,
) -> Result<DVector<C64>, DynamicsError> {
    let h = model.hamiltonian(state.time, classical)?;
    if h.dim() != state.dim() {
        return Err(DynamicsError::DimensionMismatch { expected: h.dim(), actual: state.dim() });
    }
    Ok(h.apply_rhs(&state.amplitudes))
}

/// One fixed-step RK4 update with H evaluated through `h_at` at the stage
/// times (offsets from the state's current time).
pub(crate) fn rk4_step<F>(
    state: &QuantumState,
    mut h_at: F,
    dt: f64,
    limits: &StepLimits,
) -> Result<QuantumState, DynamicsError>
where
    F: FnMut(f64) -> Result<HermitianOperator, DynamicsError>,
{
    assert!(dt > 0.0, "step must be positive");
    if let Some(dt_max) = limits.dt_max {
        if dt > dt_max {
            return Err(DynamicsError::StepTooLarge {
                reason: format!("dt = {dt} exceeds dt_max = {dt_max}"),
            });
        }
    }

    let h0 = h_at(0.0)?;
    let h_half = h_at(0.5 * dt)?;
    let h1 = h_at(dt)?;
    let c = &state.amplitudes;

    let k1 = h0.apply_rhs(c);
    let k2 = h_half.apply_rhs(&(c + k1.scale(0.5 * dt)));
    let k3 = h_half.apply_rhs(&(c + k2.scale(0.5 * dt)));
    let k4 = h1.apply_rhs(&(c + k3.scale(dt)));

    let next = c + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0);

    let norm_before: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let norm_after: f64 = next.iter().map(|z| z.norm_sqr()).sum();
    let drift = (norm_after - norm_before).abs();
    if drift > limits.norm_drift_abort {
        return Err(DynamicsError::StepTooLarge {
            reason: format!("norm drift {drift:.3e} exceeds abort threshold"),
        });
    }

    Ok(QuantumState { amplitudes: next, time: state.time + dt })
}

/// Advance the quantum state one step with the classical configuration held
/// fixed across the stage evaluations.
pub fn step_quantum<M: Model>(
    state: &QuantumState,
    model: &M,
    classical: Option<&ClassicalState>,
    dt: f64,
    limits: &StepLimits,
) -> Result<QuantumState, DynamicsError> {
    let t0 = state.time;
    rk4_step(state, |tau| Ok(model.hamiltonian(t0 + tau, classical)?), dt, limits)
}

/// Project a diabatic state onto the (gauge-fixed) adiabatic basis.
pub fn project_adiabatic(
    state: &QuantumState,
    eig: &EigenSystem,
) -> Result<AdiabaticDecomposition, DynamicsError> {
    if eig.dim() != state.dim() {
        return Err(DynamicsError::DimensionMismatch { expected: eig.dim(), actual: state.dim() });
    }
    let coeffs = eig.project(&state.amplitudes);
    let decomp = AdiabaticDecomposition::from_coeffs(coeffs, eig.stamp);
    debug_assert!(
        (decomp.moduli.iter().map(|a| a * a).sum::<f64>() - state.norm_sqr()).abs() <= 1e-10,
        "projection must be unitary"
    );
    Ok(decomp)
}

/// Pointwise adiabatic equation of motion,
/// `c~'_k = -i U_k c~_k - sum_m kappa_{km} c~_m`.
///
/// Used only to extract moduli rates; the propagation itself stays diabatic.
pub fn adiabatic_rhs(
    decomp: &AdiabaticDecomposition,
    eig: &EigenSystem,
    derivs: &EigenDerivatives,
) -> Result<DVector<C64>, DynamicsError> {
    let n = eig.dim();
    if decomp.coeffs.len() != n {
        return Err(DynamicsError::DimensionMismatch { expected: n, actual: decomp.coeffs.len() });
    }
    if derivs.kappa.nrows() != n {
        return Err(DynamicsError::DimensionMismatch { expected: n, actual: derivs.kappa.nrows() });
    }
    let coupling = &derivs.kappa * &decomp.coeffs;
    Ok(DVector::from_fn(n, |k, _| {
        C64::new(0.0, -eig.energies[k]) * decomp.coeffs[k] - coupling[k]
    }))
}
