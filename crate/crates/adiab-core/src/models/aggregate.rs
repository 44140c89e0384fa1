//! 1D molecular-aggregate chain: classical point monomers bound by Morse
//! potentials, carrying a single electronic excitation that hops through
//! long-range dipole-dipole coupling.
//!
//! Basis state |n> puts the excitation on monomer n. The electronic
//! Hamiltonian at chain configuration X is
//!
//! ```text
//! H_nn = E_n,   H_nm = mu^2 / |X_m - X_n|^eta   (n != m, all pairs),
//! ```
//!
//! with site energies optionally drawn from a Gaussian disorder
//! distribution. All quantities are in Hartree atomic units.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use super::{Model, ModelError};
use crate::dynamics::ClassicalState;
use crate::spectral::HermitianOperator;

/// Default minimum monomer separation accepted when assembling H (Bohr);
/// anything closer is treated as a collision. 0.1 angstrom.
pub const DEFAULT_R_MIN: f64 = 0.1 * crate::constants::ANGSTROM_TO_BOHR;

const STREAM_DISORDER: u64 = 1;
const STREAM_VELOCITIES: u64 = 2;
const STREAM_OFFSETS: u64 = 3;
const MAX_THERMAL_RETRIES: usize = 100;

/// splitmix64; used to derive independent per-purpose seeds from one root.
pub fn derive_seed(root: u64, purpose: u64) -> u64 {
    let mut z = root ^ purpose.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Chain parameters, all in internal atomic units.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateParams {
    /// Monomer count, >= 2.
    pub n: usize,
    /// Transition dipole moment.
    pub mu: f64,
    /// Monomer mass.
    pub mass: f64,
    /// Morse well depth.
    pub de: f64,
    /// Morse inverse width.
    pub alpha: f64,
    /// Equilibrium nearest-neighbour spacing.
    pub x0: f64,
    /// Gaussian site-energy disorder width (0 disables disorder).
    pub sigma_e: f64,
    /// Unperturbed transition energy; a uniform shift, kept configurable.
    pub e0: f64,
    /// Dipole-dipole power law, 2 or 3.
    pub dd_exponent: u32,
    /// k_B T for thermal initial conditions.
    pub thermal_energy: f64,
    /// When false the chain is frozen (the infinite-mass limit).
    pub mobile: bool,
    /// Collision radius for Hamiltonian assembly.
    pub r_min: f64,
}

impl AggregateParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut problems = Vec::new();
        if self.n < 2 {
            problems.push(format!("n must be >= 2, got {}", self.n));
        }
        for (name, v) in [
            ("mu", self.mu),
            ("mass", self.mass),
            ("de", self.de),
            ("alpha", self.alpha),
            ("x0", self.x0),
        ] {
            if !(v > 0.0) {
                problems.push(format!("{name} must be > 0, got {v}"));
            }
        }
        if self.sigma_e < 0.0 {
            problems.push(format!("sigma_e must be >= 0, got {}", self.sigma_e));
        }
        if self.thermal_energy < 0.0 {
            problems.push(format!("thermal energy must be >= 0, got {}", self.thermal_energy));
        }
        if !matches!(self.dd_exponent, 2 | 3) {
            problems.push(format!("dd_exponent must be 2 or 3, got {}", self.dd_exponent));
        }
        if !(self.r_min > 0.0) {
            problems.push(format!("r_min must be > 0, got {}", self.r_min));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidParams(problems.join("; ")))
        }
    }

    /// Morse pair potential at separation r.
    pub fn morse(&self, r: f64) -> f64 {
        let u = -self.alpha * (r - self.x0);
        self.de * ((2.0 * u).exp() - 2.0 * u.exp())
    }

    /// Radial force -dV/dr of the Morse pair potential.
    pub fn morse_force(&self, r: f64) -> f64 {
        let u = -self.alpha * (r - self.x0);
        2.0 * self.alpha * self.de * ((2.0 * u).exp() - u.exp())
    }

    /// Small-oscillation frequency about the Morse minimum,
    /// `omega = alpha sqrt(2 De / M)`.
    pub fn morse_frequency(&self) -> f64 {
        self.alpha * (2.0 * self.de / self.mass).sqrt()
    }

    /// Equilibrium chain `X_n = n * x0`, n = 1..=N.
    pub fn equilibrium_positions(&self) -> Vec<f64> {
        (1..=self.n).map(|i| i as f64 * self.x0).collect()
    }

    /// Dipole-dipole coupling magnitude at separation r.
    pub fn dipole_coupling(&self, r: f64) -> f64 {
        self.mu * self.mu / r.powi(self.dd_exponent as i32)
    }

    /// Site energies `E_n ~ Normal(E0, sigma_e^2)` from the seeded
    /// generator; `sigma_e = 0` returns E0 exactly.
    pub fn sample_disorder(&self, seed: u64) -> Vec<f64> {
        if self.sigma_e == 0.0 {
            return vec![self.e0; self.n];
        }
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_DISORDER));
        let dist = Normal::new(self.e0, self.sigma_e).expect("sigma_e validated nonnegative");
        (0..self.n).map(|_| dist.sample(&mut rng)).collect()
    }

    /// Thermal initial conditions: velocities `~ Normal(0, kT/M)` and
    /// position offsets `~ Normal(0, kT/(M omega^2))` about the equilibrium
    /// chain, with `omega` the Morse small-oscillation frequency. Offset
    /// vectors that break the chain ordering are redrawn a bounded number
    /// of times.
    pub fn sample_thermal(&self, seed: u64) -> Result<ClassicalState, ModelError> {
        if !self.mobile {
            return Err(ModelError::InvalidParams(
                "thermal sampling requires a mobile chain".into(),
            ));
        }
        let kt = self.thermal_energy;
        let v_std = (kt / self.mass).sqrt();
        let omega = self.morse_frequency();
        let x_std = if kt == 0.0 { 0.0 } else { (kt / (self.mass * omega * omega)).sqrt() };

        let mut vel_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_VELOCITIES));
        let v_dist = Normal::new(0.0, v_std).expect("velocity std validated");
        let velocities: Vec<f64> = (0..self.n).map(|_| v_dist.sample(&mut vel_rng)).collect();

        let equilibrium = self.equilibrium_positions();
        let mut off_rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, STREAM_OFFSETS));
        let x_dist = Normal::new(0.0, x_std).expect("offset std validated");
        for _ in 0..MAX_THERMAL_RETRIES {
            let positions: Vec<f64> = equilibrium
                .iter()
                .map(|&x| x + x_dist.sample(&mut off_rng))
                .collect();
            if positions.windows(2).all(|w| w[0] < w[1]) {
                return ClassicalState::new(positions, velocities, self.mass)
                    .map_err(|e| ModelError::InvalidParams(e.to_string()));
            }
        }
        Err(ModelError::ThermalSamplingFailure { retries: MAX_THERMAL_RETRIES })
    }
}

/// An aggregate with its (possibly disordered) site energies frozen in.
#[derive(Debug, Clone)]
pub struct AggregateModel {
    params: AggregateParams,
    site_energies: Vec<f64>,
}

impl AggregateModel {
    pub fn new(params: AggregateParams, site_energies: Vec<f64>) -> Result<Self, ModelError> {
        params.validate()?;
        if site_energies.len() != params.n {
            return Err(ModelError::InvalidParams(format!(
                "expected {} site energies, got {}",
                params.n,
                site_energies.len()
            )));
        }
        Ok(Self { params, site_energies })
    }

    pub fn params(&self) -> &AggregateParams {
        &self.params
    }

    pub fn site_energies(&self) -> &[f64] {
        &self.site_energies
    }

    /// Electronic Hamiltonian at chain configuration X.
    pub fn hamiltonian_at(&self, positions: &[f64]) -> Result<HermitianOperator, ModelError> {
        let n = self.params.n;
        assert_eq!(positions.len(), n, "position count must match monomer count");
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.site_energies[i];
            for j in (i + 1)..n {
                let r = (positions[j] - positions[i]).abs();
                if r < self.params.r_min {
                    return Err(ModelError::MonomerCollision {
                        a: i,
                        b: j,
                        separation: r,
                        min_separation: self.params.r_min,
                    });
                }
                let v = self.params.dipole_coupling(r);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let flat: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m[(i, j)]).collect();
        Ok(HermitianOperator::from_real_rows(n, &flat).expect("assembled symmetric"))
    }

    /// dH/dX_p for every coordinate p; real symmetric matrices.
    pub fn position_gradients_at(&self, positions: &[f64]) -> Vec<DMatrix<f64>> {
        let n = self.params.n;
        let eta = self.params.dd_exponent as i32;
        let mu2 = self.params.mu * self.params.mu;
        let mut grads = vec![DMatrix::<f64>::zeros(n, n); n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = positions[j] - positions[i];
                let r = dx.abs();
                let sign = dx.signum();
                // d/dX_j of mu^2 r^-eta; the X_i derivative is its negative.
                let dv = -(eta as f64) * mu2 / r.powi(eta + 1) * sign;
                grads[j][(i, j)] += dv;
                grads[j][(j, i)] += dv;
                grads[i][(i, j)] -= dv;
                grads[i][(j, i)] -= dv;
            }
        }
        grads
    }
}

impl Model for AggregateModel {
    fn dim(&self) -> usize {
        self.params.n
    }

    fn hamiltonian(
        &self,
        _t: f64,
        classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError> {
        let cl = classical.ok_or(ModelError::MissingClassicalState)?;
        self.hamiltonian_at(&cl.positions)
    }

    fn hamiltonian_rate(
        &self,
        _t: f64,
        classical: Option<&ClassicalState>,
    ) -> Result<HermitianOperator, ModelError> {
        let cl = classical.ok_or(ModelError::MissingClassicalState)?;
        let n = self.params.n;
        let grads = self.position_gradients_at(&cl.positions);
        let mut rate = DMatrix::<f64>::zeros(n, n);
        for (g, &v) in grads.iter().zip(cl.velocities.iter()) {
            if v != 0.0 {
                rate += g * v;
            }
        }
        let flat: Vec<f64> =
            (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| rate[(i, j)]).collect();
        Ok(HermitianOperator::from_real_rows(n, &flat).expect("chain rule keeps symmetry"))
    }

    fn position_dependent(&self) -> bool {
        true
    }

    fn position_gradients(&self, positions: &[f64]) -> Result<Vec<DMatrix<f64>>, ModelError> {
        Ok(self.position_gradients_at(positions))
    }

    fn binding_potential(&self, positions: &[f64]) -> f64 {
        let n = positions.len();
        let mut v = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                v += self.params.morse((positions[j] - positions[i]).abs());
            }
        }
        v
    }

    fn binding_forces(&self, positions: &[f64]) -> Vec<f64> {
        let n = positions.len();
        let mut f = vec![0.0; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = positions[j] - positions[i];
                let radial = self.params.morse_force(dx.abs());
                // Radial force > 0 pushes the pair apart.
                f[j] += radial * dx.signum();
                f[i] -= radial * dx.signum();
            }
        }
        f
    }
}
