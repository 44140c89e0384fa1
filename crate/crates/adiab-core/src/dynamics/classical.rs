//! Classical-side kernels: Hellmann-Feynman surface forces and the velocity
//! Verlet step.

use super::{check_ordering, ClassicalState, DynamicsError};
use crate::models::Model;
use crate::spectral::EigenSystem;

/// Force on each coordinate from one adiabatic surface plus the binding
/// potential:
///
/// `F_p = -<phi_s| dH/dX_p |phi_s> - d/dX_p sum_pairs V_morse`.
///
/// The electronic part is the Hellmann-Feynman expectation with the
/// analytic coupling gradients; no finite differencing is involved.
pub fn hellmann_feynman_forces<M: Model>(
    model: &M,
    eig: &EigenSystem,
    surface: usize,
    positions: &[f64],
) -> Result<Vec<f64>, DynamicsError> {
    let dim = eig.dim();
    if surface >= dim {
        return Err(DynamicsError::SurfaceOutOfRange { surface, dim });
    }
    let grads = model.position_gradients(positions)?;
    let phi = eig.vectors.column(surface);
    let mut forces = model.binding_forces(positions);
    for (p, g) in grads.iter().enumerate() {
        let mut expectation = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let gij = g[(i, j)];
                if gij != 0.0 {
                    expectation += gij * (phi[i].conj() * phi[j]).re;
                }
            }
        }
        forces[p] -= expectation;
    }
    Ok(forces)
}

/// One velocity Verlet step.
///
/// Takes the forces at the step start and recomputes end-of-step forces
/// internally: positions advance first, `eig_at` supplies the (aligned)
/// eigensystem at the new configuration for the surface force, then the
/// velocities complete with the force average. Returns the new state, the
/// end-of-step forces and the end-of-step eigensystem so the caller can
/// reuse both.
pub fn step_classical<M, E>(
    cl: &ClassicalState,
    forces_begin: &[f64],
    model: &M,
    eig_at: E,
    dt: f64,
) -> Result<(ClassicalState, Vec<f64>, EigenSystem), DynamicsError>
where
    M: Model,
    E: FnOnce(&[f64]) -> Result<EigenSystem, DynamicsError>,
{
    assert!(dt > 0.0, "step must be positive");
    let n = cl.len();
    assert_eq!(forces_begin.len(), n, "force vector length must match coordinates");

    let inv_2m = 0.5 / cl.mass;
    let positions: Vec<f64> = (0..n)
        .map(|i| cl.positions[i] + cl.velocities[i] * dt + forces_begin[i] * inv_2m * dt * dt)
        .collect();
    check_ordering(&positions)?;

    let eig_end = eig_at(&positions)?;
    let forces_end = hellmann_feynman_forces(model, &eig_end, cl.surface_index, &positions)?;

    let velocities: Vec<f64> = (0..n)
        .map(|i| cl.velocities[i] + (forces_begin[i] + forces_end[i]) * inv_2m * dt)
        .collect();

    let next = ClassicalState {
        positions,
        velocities,
        mass: cl.mass,
        surface_index: cl.surface_index,
    };
    Ok((next, forces_end, eig_end))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{ANGSTROM_TO_BOHR, CM1_TO_HARTREE};
    use crate::models::{AggregateModel, AggregateParams};
    use crate::spectral::{eigensolve, DEFAULT_DEGENERACY_TOL};

    fn dimer_params(de_cm: f64, alpha_inv_angstrom: f64) -> AggregateParams {
        AggregateParams {
            n: 2,
            mu: 1.12,
            mass: 902_330.0,
            de: de_cm * CM1_TO_HARTREE,
            alpha: alpha_inv_angstrom / ANGSTROM_TO_BOHR,
            x0: 12.0 * ANGSTROM_TO_BOHR,
            sigma_e: 0.0,
            e0: 0.0,
            dd_exponent: 3,
            thermal_energy: 0.0,
            mobile: true,
            r_min: crate::models::DEFAULT_R_MIN,
        }
    }

    #[test]
    fn morse_dimer_zero_force_at_equilibrium_without_coupling() {
        // Tiny dipole kills the electronic force; Morse force vanishes at x0.
        let mut p = dimer_params(3000.0, 0.5);
        p.mu = 1e-9;
        let model = AggregateModel::new(p.clone(), vec![0.0, 0.0]).unwrap();
        let x = vec![0.0, p.x0];
        let h = model.hamiltonian_at(&x).unwrap();
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let f = hellmann_feynman_forces(&model, &eig, 0, &x).unwrap();
        for v in &f {
            assert!(v.abs() < 1e-15, "force at the Morse minimum must vanish, got {v}");
        }
    }

    #[test]
    fn dipole_gradient_matches_finite_difference() {
        let p = dimer_params(3000.0, 0.5);
        let model = AggregateModel::new(p.clone(), vec![0.0, 0.0]).unwrap();
        let x = vec![0.0, 20.0];
        let grads = model.position_gradients_at(&x);
        let h = 1e-4;
        let hp = model.hamiltonian_at(&[0.0, 20.0 + h]).unwrap();
        let hm = model.hamiltonian_at(&[0.0, 20.0 - h]).unwrap();
        let fd = (hp.entries() - hm.entries()).scale(1.0 / (2.0 * h));
        let analytic = &grads[1];
        for i in 0..2 {
            for j in 0..2 {
                let a = analytic[(i, j)];
                let b = fd[(i, j)].re;
                if a.abs() > 0.0 {
                    assert!(
                        ((a - b) / a).abs() < 1e-8,
                        "gradient mismatch at ({i},{j}): analytic {a}, fd {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn middle_monomer_force_vanishes_by_symmetry() {
        let mut p = dimer_params(3000.0, 0.5);
        p.n = 3;
        let model = AggregateModel::new(p.clone(), vec![0.0; 3]).unwrap();
        let x = vec![0.0, p.x0, 2.0 * p.x0];
        let h = model.hamiltonian_at(&x).unwrap();
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        // Every eigenstate of the symmetric trimer gives zero middle force.
        for s in 0..3 {
            let f = hellmann_feynman_forces(&model, &eig, s, &x).unwrap();
            assert!(f[1].abs() < 1e-12, "middle force must vanish by symmetry, got {}", f[1]);
        }
    }

    #[test]
    fn free_flight_without_forces() {
        let mut p = dimer_params(3000.0, 0.5);
        p.mu = 1e-12;
        p.de = 1e-30;
        let model = AggregateModel::new(p.clone(), vec![0.0, 0.0]).unwrap();
        let cl = ClassicalState::new(vec![0.0, 30.0], vec![1e-4, -1e-4], p.mass).unwrap();
        let x = cl.positions.clone();
        let h = model.hamiltonian_at(&x).unwrap();
        let eig0 = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let f0 = hellmann_feynman_forces(&model, &eig0, 0, &x).unwrap();
        let dt = 10.0;
        let (next, _, _) = step_classical(&cl, &f0, &model, |xs| {
            let h = model.hamiltonian_at(xs)?;
            Ok(eigensolve(&h, DEFAULT_DEGENERACY_TOL)?)
        }, dt)
        .unwrap();
        for i in 0..2 {
            let expected = cl.positions[i] + cl.velocities[i] * dt;
            assert!((next.positions[i] - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_energy_drift_is_bounded() {
        // Dimer oscillating near the Morse minimum with negligible coupling:
        // energy drift over 1e4 velocity Verlet steps at T_period/200 stays
        // below 1e-5 relative.
        let mut p = dimer_params(3000.0, 0.5);
        p.mu = 1e-9;
        let model = AggregateModel::new(p.clone(), vec![0.0, 0.0]).unwrap();
        let omega_pair = p.morse_frequency() * std::f64::consts::SQRT_2;
        let period = std::f64::consts::TAU / omega_pair;
        let dt = period / 200.0;

        let offset = 0.3;
        let mut cl =
            ClassicalState::new(vec![0.0, p.x0 + offset], vec![0.0, 0.0], p.mass).unwrap();
        let energy = |cl: &ClassicalState| {
            cl.kinetic_energy() + model.binding_potential(&cl.positions)
        };
        let e0 = energy(&cl);

        let h = model.hamiltonian_at(&cl.positions).unwrap();
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let mut forces =
            hellmann_feynman_forces(&model, &eig, 0, &cl.positions).unwrap();
        for _ in 0..10_000 {
            let (next, f_end, _) = step_classical(&cl, &forces, &model, |xs| {
                let h = model.hamiltonian_at(xs)?;
                Ok(eigensolve(&h, DEFAULT_DEGENERACY_TOL)?)
            }, dt)
            .unwrap();
            cl = next;
            forces = f_end;
        }
        let drift = ((energy(&cl) - e0) / e0).abs();
        assert!(drift < 1e-5, "energy drift {drift:.3e} exceeds 1e-5");
    }
}
