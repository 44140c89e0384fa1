//! Adiabaticity measures built on the phase-stripped population rate.
//!
//! Populations in a fixed (diabatic) basis change for two distinct reasons:
//! beating between simultaneously occupied eigenstates of the Hamiltonian,
//! and deformation of the eigenstates themselves. The field `t_n(t)`
//! computed here keeps only the second kind of contribution. It is obtained
//! from the exact rate `dp_n/dt` written through the polar decomposition of
//! the adiabatic coefficients, `c~_k = a~_k exp(i b~_k)`, with every phase
//! rate `db~_k/dt` discarded:
//!
//! ```text
//! t_n = sum_{k,k'} [ ( a~'_{k'} e^{-i b~_{k'}} c~_k + c~*_{k'} a~'_k e^{i b~_k} ) d^(k)_n d^(k')*_n
//!                  +  c~*_{k'} c~_k ( d'^(k)_n d^(k')*_n + d^(k)_n d'^(k')*_n ) ]
//! ```
//!
//! For a time-independent Hamiltonian all `a~'_k` and `d'^(k)_n` vanish and
//! `t_n` is identically zero: beating never contributes. Two cumulative
//! measures condense the field into single numbers:
//!
//! * `T1(t) = 1/2 sum_n int_0^t |t_n|` -- basis-agnostic, counts transfer
//!   into and out of every state, nondecreasing;
//! * `T2(t) = int_0^t t_X` -- signed transfer into one target state `X`.
//!
//! Both reach one for a complete transfer driven purely by adiabatic
//! following of a single eigenstate.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::dynamics::AdiabaticDecomposition;
use crate::dynamics::QuantumState;
use crate::spectral::{EigenDerivatives, EigenSystem};

/// Absolute bound on the imaginary residue of the `t_n` double sum; the
/// expression is real by construction, so anything larger signals a
/// gauge or conditioning problem.
pub const REALITY_TOL: f64 = 1e-10;

/// Default modulus below which the polar phase is treated as undefined.
pub const DEFAULT_AMP_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("inputs carry mismatched step stamps: decomposition {decomp}, eigensystem {eig}, derivatives {derivs}")]
    GaugeInconsistency { decomp: u64, eig: u64, derivs: u64 },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("imaginary residue {residual:.3e} of the rate field exceeds {REALITY_TOL:.1e}")]
    RealityViolation { residual: f64 },
    #[error("beating closed form premise violated: {0}")]
    PremiseViolation(String),
}

/// Moduli rates `a~'_k = d|c~_k|/dt` from the adiabatic coefficient rates.
///
/// For `a~_k >= amp_floor` this is `Re[c~_k* c~'_k] / a~_k`; below the
/// floor the polar decomposition is singular and the modulus growth rate
/// `|c~'_k|` is used instead, which keeps the rate field finite and
/// continuous as states empty out.
pub fn amplitude_rates(
    decomp: &AdiabaticDecomposition,
    cdot: &DVector<C64>,
    amp_floor: f64,
) -> DVector<f64> {
    let n = decomp.coeffs.len();
    assert_eq!(cdot.len(), n, "coefficient rate dimension mismatch");
    DVector::from_fn(n, |k, _| {
        let a = decomp.moduli[k];
        if a >= amp_floor {
            (decomp.coeffs[k].conj() * cdot[k]).re / a
        } else {
            cdot[k].norm()
        }
    })
}

/// The evaluated rate field together with its numerical residues.
#[derive(Debug, Clone)]
pub struct RateField {
    pub values: DVector<f64>,
    /// Largest `|Im|` seen across components before taking the real part.
    pub imag_residual: f64,
    /// `|sum_n t_n|`; zero analytically by orthonormality.
    pub sum_residual: f64,
}

/// Evaluate the phase-stripped population rate field `t_n`.
///
/// All inputs must come from the same trajectory step (matching stamps) and
/// the same parallel-transport gauge. The real part is returned per
/// component; an imaginary residue above [`REALITY_TOL`] is an error.
pub fn transition_rate_field(
    decomp: &AdiabaticDecomposition,
    eig: &EigenSystem,
    derivs: &EigenDerivatives,
    adot: &DVector<f64>,
) -> Result<RateField, MeasureError> {
    if decomp.stamp != eig.stamp || eig.stamp != derivs.stamp {
        return Err(MeasureError::GaugeInconsistency {
            decomp: decomp.stamp,
            eig: eig.stamp,
            derivs: derivs.stamp,
        });
    }
    let n = eig.dim();
    if decomp.coeffs.len() != n {
        return Err(MeasureError::DimensionMismatch { expected: n, actual: decomp.coeffs.len() });
    }
    if adot.len() != n {
        return Err(MeasureError::DimensionMismatch { expected: n, actual: adot.len() });
    }

    // Unit phase factors e^{i b~_k}; for emptied states the phase memory in
    // `decomp.phases` keeps these well defined.
    let phase: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0, decomp.phases[k])).collect();

    let mut values = DVector::zeros(n);
    let mut imag_residual = 0.0f64;
    let mut sum = 0.0f64;
    for site in 0..n {
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..n {
            let d_k = eig.vectors[(site, k)];
            let ddot_k = derivs.vec_dot[(site, k)];
            let c_k = decomp.coeffs[k];
            for kp in 0..n {
                let d_kp_conj = eig.vectors[(site, kp)].conj();
                let ddot_kp_conj = derivs.vec_dot[(site, kp)].conj();
                let c_kp_conj = decomp.coeffs[kp].conj();

                let amplitude_term = (phase[kp].conj() * adot[kp] * c_k
                    + c_kp_conj * adot[k] * phase[k])
                    * d_k
                    * d_kp_conj;
                let deformation_term = c_kp_conj * c_k * (ddot_k * d_kp_conj + d_k * ddot_kp_conj);
                acc += amplitude_term + deformation_term;
            }
        }
        imag_residual = imag_residual.max(acc.im.abs());
        values[site] = acc.re;
        sum += acc.re;
    }

    if imag_residual > REALITY_TOL {
        return Err(MeasureError::RealityViolation { residual: imag_residual });
    }
    Ok(RateField { values, imag_residual, sum_residual: sum.abs() })
}

/// Trapezoidal accumulator for the cumulative measures `T1` and `T2`.
///
/// Feed it the rate field at every integrator step, in order; the first
/// call only primes the quadrature state. `target_index` selects the state
/// whose signed transfer defines `T2`.
#[derive(Debug, Clone)]
pub struct MeasureAccumulator {
    pub t1: f64,
    pub t2: f64,
    pub target_index: usize,
    /// Rate field from the previous step (the quadrature state).
    prev_field: Option<DVector<f64>>,
}

impl MeasureAccumulator {
    pub fn new(target_index: usize) -> Self {
        Self { t1: 0.0, t2: 0.0, target_index, prev_field: None }
    }

    /// Most recent rate field supplied, if any.
    pub fn last_field(&self) -> Option<&DVector<f64>> {
        self.prev_field.as_ref()
    }

    /// Advance both integrals by one trapezoidal panel of width `dt`.
    pub fn accumulate(&mut self, t_field: &DVector<f64>, dt: f64) {
        if let Some(prev) = &self.prev_field {
            let g1_prev: f64 = 0.5 * prev.iter().map(|v| v.abs()).sum::<f64>();
            let g1_cur: f64 = 0.5 * t_field.iter().map(|v| v.abs()).sum::<f64>();
            let g2_prev = prev[self.target_index];
            let g2_cur = t_field[self.target_index];
            self.t1 += dt * 0.5 * (g1_prev + g1_cur);
            self.t2 += dt * 0.5 * (g2_prev + g2_cur);
        }
        self.prev_field = Some(t_field.clone());
    }
}

/// Closed-form diabatic population for a two-eigenstate equal superposition
/// under a time-independent Hamiltonian.
///
/// With `|psi(0)> = (|phi_a> + |phi_b>)/sqrt(2)` (arbitrary fixed phases on
/// the two coefficients are allowed) the population of basis state `n`
/// beats at the single frequency `U_b - U_a`:
///
/// `p_n(t) = |w_a|^2 + |w_b|^2 + 2 Re[w_a w_b*] cos((U_b-U_a) t)
///           - 2 Im[w_a w_b*] sin((U_b-U_a) t)`
///
/// with `w_k = c~_k(0) <n|phi_k>`. This is the independent reference the
/// propagated dynamics is validated against.
pub fn beating_closed_form(
    eig: &EigenSystem,
    initial: &QuantumState,
    site: usize,
    t: f64,
) -> Result<f64, MeasureError> {
    let n = eig.dim();
    if initial.amplitudes.len() != n {
        return Err(MeasureError::DimensionMismatch {
            expected: n,
            actual: initial.amplitudes.len(),
        });
    }
    if site >= n {
        return Err(MeasureError::DimensionMismatch { expected: n, actual: site });
    }

    let coeffs = eig.project(&initial.amplitudes);
    let occupied: Vec<usize> = (0..n).filter(|&k| coeffs[k].norm() > 1e-9).collect();
    if occupied.len() != 2 {
        return Err(MeasureError::PremiseViolation(format!(
            "expected exactly two occupied eigenstates, found {}",
            occupied.len()
        )));
    }
    let target = std::f64::consts::FRAC_1_SQRT_2;
    for &k in &occupied {
        let a = coeffs[k].norm();
        if (a - target).abs() > 1e-9 {
            return Err(MeasureError::PremiseViolation(format!(
                "eigenstate {k} carries modulus {a}, expected 1/sqrt(2)"
            )));
        }
    }

    let (ka, kb) = (occupied[0], occupied[1]);
    let w_a = coeffs[ka] * eig.vectors[(site, ka)];
    let w_b = coeffs[kb] * eig.vectors[(site, kb)];
    let omega = eig.energies[kb] - eig.energies[ka];
    let cross = w_a * w_b.conj();
    Ok(w_a.norm_sqr() + w_b.norm_sqr() + 2.0 * cross.re * (omega * t).cos()
        - 2.0 * cross.im * (omega * t).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::project_adiabatic;
    use crate::spectral::{eigensolve, HermitianOperator, DEFAULT_DEGENERACY_TOL};
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn static_decomp_and_rates(
        h: &HermitianOperator,
        state: &QuantumState,
    ) -> (AdiabaticDecomposition, EigenSystem, EigenDerivatives, DVector<f64>) {
        let eig = eigensolve(h, DEFAULT_DEGENERACY_TOL).unwrap();
        let decomp = project_adiabatic(state, &eig).unwrap();
        let derivs =
            crate::spectral::eigenvector_rates(&HermitianOperator::zero(h.dim()), &eig, 1e-12)
                .unwrap();
        // Static H: cdot_k = -i U_k c~_k.
        let cdot = DVector::from_fn(h.dim(), |k, _| {
            C64::new(0.0, -eig.energies[k]) * decomp.coeffs[k]
        });
        let adot = amplitude_rates(&decomp, &cdot, DEFAULT_AMP_FLOOR);
        (decomp, eig, derivs, adot)
    }

    #[test]
    fn amplitude_rates_vanish_for_pure_phase_evolution() {
        let h = crate::validate::random_hermitian(4, 11);
        let state = crate::validate::random_state(4, 12);
        let (_, _, _, adot) = static_decomp_and_rates(&h, &state);
        for k in 0..4 {
            assert!(adot[k].abs() < 1e-14, "adot[{k}] = {}", adot[k]);
        }
    }

    #[test]
    fn amplitude_rates_growth_from_zero() {
        let coeffs = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let decomp = AdiabaticDecomposition::from_coeffs(coeffs, 0);
        let kappa = 0.3;
        let cdot = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(0.0, kappa)]);
        let adot = amplitude_rates(&decomp, &cdot, DEFAULT_AMP_FLOOR);
        assert_abs_diff_eq!(adot[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(adot[1], kappa, epsilon = 1e-15);
    }

    #[test]
    fn rate_field_zero_for_static_hamiltonian() {
        let h = crate::validate::random_hermitian(5, 21);
        let state = crate::validate::random_state(5, 22);
        let (decomp, eig, derivs, adot) = static_decomp_and_rates(&h, &state);
        let field = transition_rate_field(&decomp, &eig, &derivs, &adot).unwrap();
        for v in field.values.iter() {
            assert!(v.abs() < 1e-13, "static Hamiltonian must give t_n = 0, got {v}");
        }
    }

    #[test]
    fn rate_field_single_eigenstate_reduces_to_population_derivative() {
        // One occupied eigenstate, a~ = 1, adot = 0: t_n = d/dt |d^(k)_n|^2.
        let p = crate::models::ThreeLevelParams::ramped([0.0, 3.0, 0.0], 8.0, 8.0, 50.0).unwrap();
        let t = 20.0;
        let eig = eigensolve(&p.hamiltonian(t), DEFAULT_DEGENERACY_TOL).unwrap();
        let derivs = crate::spectral::eigenvector_rates(&p.hamiltonian_rate(t), &eig, 1e-9).unwrap();
        let k_occ = 1;
        let mut coeffs = DVector::zeros(3);
        coeffs[k_occ] = C64::new(1.0, 0.0);
        let decomp = AdiabaticDecomposition::from_coeffs(coeffs, 0);
        let adot = DVector::zeros(3);
        let field = transition_rate_field(&decomp, &eig, &derivs, &adot).unwrap();
        for site in 0..3 {
            let expected = 2.0
                * (derivs.vec_dot[(site, k_occ)] * eig.vectors[(site, k_occ)].conj()).re;
            assert_abs_diff_eq!(field.values[site], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn rate_field_sum_rule_on_ramp() {
        let p = crate::models::ThreeLevelParams::ramped([0.0, 3.0, 0.0], 8.0, 8.0, 50.0).unwrap();
        for &t in &[5.0, 17.5, 25.0, 40.0] {
            let eig = eigensolve(&p.hamiltonian(t), DEFAULT_DEGENERACY_TOL).unwrap();
            let derivs =
                crate::spectral::eigenvector_rates(&p.hamiltonian_rate(t), &eig, 1e-9).unwrap();
            let state = crate::validate::random_state(3, 33 + t as u64);
            let decomp = project_adiabatic(&state, &eig).unwrap();
            let cdot = crate::dynamics::adiabatic_rhs(&decomp, &eig, &derivs).unwrap();
            let adot = amplitude_rates(&decomp, &cdot, DEFAULT_AMP_FLOOR);
            let field = transition_rate_field(&decomp, &eig, &derivs, &adot).unwrap();
            assert!(field.sum_residual < 1e-8, "sum rule violated: {}", field.sum_residual);
            assert!(field.imag_residual < 1e-10);
        }
    }

    #[test]
    fn stamp_mismatch_is_rejected() {
        let h = crate::validate::random_hermitian(3, 40);
        let state = crate::validate::random_state(3, 41);
        let (decomp, mut eig, derivs, adot) = static_decomp_and_rates(&h, &state);
        eig.stamp = 5;
        match transition_rate_field(&decomp, &eig, &derivs, &adot) {
            Err(MeasureError::GaugeInconsistency { .. }) => {}
            other => panic!("expected GaugeInconsistency, got {other:?}"),
        }
    }

    #[test]
    fn accumulator_zero_field_and_monotonicity() {
        let mut acc = MeasureAccumulator::new(0);
        let zero = DVector::zeros(3);
        for _ in 0..10 {
            acc.accumulate(&zero, 0.1);
        }
        assert_eq!(acc.t1, 0.0);
        assert_eq!(acc.t2, 0.0);

        let mut acc = MeasureAccumulator::new(1);
        let mut t1_prev = 0.0;
        for step in 0..50 {
            let x = step as f64 * 0.1;
            let field = DVector::from_vec(vec![-x.sin(), x.sin() * 0.4, x.sin() * 0.6]);
            acc.accumulate(&field, 0.1);
            assert!(acc.t1 >= t1_prev, "T1 must be nondecreasing");
            assert!(acc.t2.abs() <= 2.0 * acc.t1 + 1e-15, "|T2| <= 2 T1 must hold");
            t1_prev = acc.t1;
        }
    }

    #[test]
    fn beating_initial_value_and_degenerate_case() {
        let h = crate::validate::random_hermitian(3, 55);
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi0 = (eig.vectors.column(0) * C64::new(s, 0.0))
            + (eig.vectors.column(1) * C64::new(s, 0.0));
        let state = QuantumState::new(psi0.clone_owned(), 0.0).unwrap();
        for site in 0..3 {
            let p0 = beating_closed_form(&eig, &state, site, 0.0).unwrap();
            let direct = psi0[site].norm_sqr();
            assert_abs_diff_eq!(p0, direct, epsilon = 1e-12);
        }

        // Exactly degenerate pair: constant populations.
        let m = DMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(2.0, 0.0),
            ],
        );
        let h = HermitianOperator::new(m).unwrap();
        let eig = eigensolve(&h, 1e-15).unwrap();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let psi0 = (eig.vectors.column(0) * C64::new(s2, 0.0))
            + (eig.vectors.column(1) * C64::new(s2, 0.0));
        let state = QuantumState::new(psi0, 0.0).unwrap();
        let p_at_0 = beating_closed_form(&eig, &state, 0, 0.0).unwrap();
        for &t in &[1.0, 5.0, 20.0] {
            let p = beating_closed_form(&eig, &state, 0, t).unwrap();
            assert_abs_diff_eq!(p, p_at_0, epsilon = 1e-12);
        }
    }

    #[test]
    fn beating_premise_violations() {
        let h = crate::validate::random_hermitian(3, 60);
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        // Single eigenstate occupied.
        let state =
            QuantumState::new(eig.vectors.column(0).clone_owned(), 0.0).unwrap();
        assert!(matches!(
            beating_closed_form(&eig, &state, 0, 1.0),
            Err(MeasureError::PremiseViolation(_))
        ));
        // Unequal weights.
        let psi = (eig.vectors.column(0) * C64::new(0.9, 0.0))
            + (eig.vectors.column(1) * C64::new((1.0f64 - 0.81).sqrt(), 0.0));
        let state = QuantumState::new(psi, 0.0).unwrap();
        assert!(matches!(
            beating_closed_form(&eig, &state, 0, 1.0),
            Err(MeasureError::PremiseViolation(_))
        ));
    }
}
