//! Instantaneous Hermitian eigenproblem with smooth gauge tracking.
//!
//! Eigenvectors of `H(t)` carry an arbitrary phase per column. Propagating
//! quantities that involve eigenvector time derivatives only makes sense in
//! a fixed gauge, so this module enforces a parallel-transport convention:
//! along a trajectory each fresh eigendecomposition is rephased so that its
//! overlap with the previous step is real and non-negative, which makes the
//! diagonal non-adiabatic couplings vanish. Eigenvalues are always labelled
//! by ascending energy; the gauge chain never reorders states across
//! avoided crossings.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use thiserror::Error;

/// Default adjacent-gap threshold below which a spectrum is flagged
/// degenerate and the perturbative derivative path is refused.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// Default minimum diagonal overlap magnitude in [`align_gauge`]; anything
/// smaller is flagged as a suspected label swap.
pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.5;

/// Relative tolerance on `max |H - H†|` accepted by [`HermitianOperator::new`].
pub const HERMITICITY_RTOL: f64 = 1e-12;

/// Phase corrections with `|z - 1|` below this are skipped entirely, which
/// makes gauge alignment bit-exactly idempotent.
const PHASE_SNAP: f64 = 1e-12;

const MAX_EIGEN_ITERS: usize = 20_000;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix is not Hermitian: max |H - H^dag| = {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NonHermitianInput { asymmetry: f64, tolerance: f64 },
    #[error("eigensolver failed to converge for dimension {dim}")]
    ConvergenceFailure { dim: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("near-degenerate spectrum: adjacent gap {gap:.3e} below tolerance {tolerance:.3e}")]
    NearDegeneracy { gap: f64, tolerance: f64 },
    #[error("operator dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
}

/// Dense Hermitian matrix in the diabatic basis, energy units.
///
/// Construction symmetrizes `H <- (H + H†)/2` to absorb floating-point
/// drift from model assembly; asymmetry above [`HERMITICITY_RTOL`]
/// (relative to the largest entry) is an error instead.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    entries: DMatrix<C64>,
}

impl HermitianOperator {
    pub fn new(entries: DMatrix<C64>) -> Result<Self, SpectralError> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(SpectralError::NotSquare { rows, cols });
        }
        if rows < 2 {
            return Err(SpectralError::DimensionTooSmall(rows));
        }
        let mut scale = 0.0f64;
        let mut asym = 0.0f64;
        for i in 0..rows {
            for j in 0..cols {
                scale = scale.max(entries[(i, j)].norm());
                asym = asym.max((entries[(i, j)] - entries[(j, i)].conj()).norm());
            }
        }
        if scale > 0.0 && asym > HERMITICITY_RTOL * scale {
            return Err(SpectralError::NonHermitianInput {
                asymmetry: asym,
                tolerance: HERMITICITY_RTOL * scale,
            });
        }
        let adjoint = entries.adjoint();
        let symmetrized = (entries + adjoint).scale(0.5);
        Ok(Self { entries: symmetrized })
    }

    /// Build from a real symmetric matrix given row by row.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self, SpectralError> {
        assert_eq!(rows.len(), dim * dim, "row slice must hold dim*dim entries");
        let m = DMatrix::from_fn(dim, dim, |i, j| C64::new(rows[i * dim + j], 0.0));
        Self::new(m)
    }

    /// Zero operator of the given dimension (e.g. the rate of a constant H).
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 2);
        Self { entries: DMatrix::zeros(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    /// Largest entry magnitude; the scale used for residual tolerances.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// −i H c, the Schrödinger right-hand side for this operator.
    pub fn apply_rhs(&self, amplitudes: &DVector<C64>) -> DVector<C64> {
        let hc = &self.entries * amplitudes;
        hc.map(|z| C64::new(z.im, -z.re))
    }
}

/// Instantaneous eigensystem: ascending energies `U_k` and orthonormal
/// eigenvector columns holding `d^(k)_n = <n|phi_k>`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub energies: DVector<f64>,
    pub vectors: DMatrix<C64>,
    /// Smallest adjacent eigenvalue spacing.
    pub min_gap: f64,
    /// True iff `min_gap` is below the degeneracy tolerance used at solve time.
    pub degenerate: bool,
    /// Step index used to detect mixed-step inputs downstream.
    pub stamp: u64,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `<phi_k|psi>` for every k.
    pub fn project(&self, amplitudes: &DVector<C64>) -> DVector<C64> {
        self.vectors.adjoint() * amplitudes
    }

    /// Reassemble diabatic amplitudes from adiabatic coefficients.
    pub fn synthesize(&self, coeffs: &DVector<C64>) -> DVector<C64> {
        &self.vectors * coeffs
    }
}

/// Eigenvector time derivatives and non-adiabatic couplings.
///
/// `kappa[(k, m)] = <phi_k | d/dt phi_m>`; in the parallel-transport gauge
/// the diagonal vanishes and `kappa` is anti-Hermitian.
#[derive(Debug, Clone)]
pub struct EigenDerivatives {
    pub vec_dot: DMatrix<C64>,
    pub kappa: DMatrix<C64>,
    pub stamp: u64,
}

/// Diagnostics from one gauge-alignment step.
#[derive(Debug, Clone, Default)]
pub struct GaugeReport {
    /// Smallest diagonal overlap magnitude across columns.
    pub min_overlap: f64,
    /// Columns whose overlap fell below the threshold: candidate label swaps.
    pub suspected_swaps: Vec<usize>,
    /// Set when the incoming system was flagged degenerate; the gauge is
    /// then ambiguous within the degenerate subspace (warning, not fatal).
    pub degenerate_ambiguity: bool,
}

impl GaugeReport {
    pub fn flagged(&self) -> bool {
        !self.suspected_swaps.is_empty() || self.degenerate_ambiguity
    }
}

/// Solve the instantaneous eigenproblem of a Hermitian operator.
///
/// Energies come back ascending; each eigenvector is canonicalized so its
/// first component of magnitude above 1e-12 is real positive. That phase is
/// arbitrary but deterministic; trajectories replace it via gauge alignment.
pub fn eigensolve(h: &HermitianOperator, degeneracy_tol: f64) -> Result<EigenSystem, SpectralError> {
    let dim = h.dim();
    let se = h
        .entries
        .clone()
        .try_symmetric_eigen(f64::EPSILON, MAX_EIGEN_ITERS)
        .ok_or(SpectralError::ConvergenceFailure { dim })?;

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));

    let energies = DVector::from_fn(dim, |k, _| se.eigenvalues[order[k]]);
    let mut vectors = DMatrix::zeros(dim, dim);
    for (k, &src) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(src));
    }
    canonicalize_phases(&mut vectors);

    let min_gap = (1..dim)
        .map(|k| energies[k] - energies[k - 1])
        .fold(f64::INFINITY, f64::min);
    let degenerate = min_gap < degeneracy_tol;

    Ok(EigenSystem { energies, vectors, min_gap, degenerate, stamp: 0 })
}

fn canonicalize_phases(vectors: &mut DMatrix<C64>) {
    let (n, cols) = vectors.shape();
    for k in 0..cols {
        let mut pivot = None;
        for i in 0..n {
            if vectors[(i, k)].norm() > 1e-12 {
                pivot = Some(i);
                break;
            }
        }
        if let Some(i) = pivot {
            let z = vectors[(i, k)];
            let phase = z.conj() / z.norm();
            if (phase - C64::new(1.0, 0.0)).norm() > PHASE_SNAP {
                for r in 0..n {
                    vectors[(r, k)] *= phase;
                }
            }
        }
    }
}

/// Rephase the t = 0 eigensystem: in each column the first component of
/// largest magnitude is made real positive. This fixes the gauge at the
/// start of a trajectory; later steps chain through [`align_gauge`].
pub fn fix_initial_gauge(eig: &mut EigenSystem) {
    let n = eig.dim();
    for k in 0..n {
        let mut best = 0;
        let mut best_mag = 0.0;
        for i in 0..n {
            let mag = eig.vectors[(i, k)].norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        let z = eig.vectors[(best, k)];
        if best_mag > 0.0 {
            let phase = z.conj() / best_mag;
            if (phase - C64::new(1.0, 0.0)).norm() > PHASE_SNAP {
                for r in 0..n {
                    eig.vectors[(r, k)] *= phase;
                }
            }
        }
    }
}

/// Parallel-transport one step: rephase each column of `cur` so that
/// `<phi_k(prev)|phi_k(cur)>` is real and non-negative.
///
/// Overlap magnitudes below `overlap_threshold` are reported as suspected
/// label swaps; a degenerate incoming spectrum is reported as a gauge
/// ambiguity. Neither aborts the run -- callers record the flags.
pub fn align_gauge(
    prev: &EigenSystem,
    cur: &EigenSystem,
    overlap_threshold: f64,
) -> Result<(EigenSystem, GaugeReport), SpectralError> {
    let n = prev.dim();
    if cur.dim() != n {
        return Err(SpectralError::DimensionMismatch { expected: n, actual: cur.dim() });
    }

    let mut out = cur.clone();
    let mut report = GaugeReport { min_overlap: f64::INFINITY, ..Default::default() };
    report.degenerate_ambiguity = cur.degenerate;

    for k in 0..n {
        let overlap = prev.vectors.column(k).dotc(&cur.vectors.column(k));
        let mag = overlap.norm();
        report.min_overlap = report.min_overlap.min(mag);
        if mag < overlap_threshold {
            report.suspected_swaps.push(k);
        }
        if mag == 0.0 {
            continue;
        }
        let phase = overlap.conj() / mag;
        if (phase - C64::new(1.0, 0.0)).norm() > PHASE_SNAP {
            for r in 0..n {
                out.vectors[(r, k)] *= phase;
            }
        }
    }
    Ok((out, report))
}

/// Eigenvector rates and non-adiabatic couplings from first-order
/// perturbation theory:
///
/// `kappa[(m, k)] = <phi_m|dH/dt|phi_k> / (U_k - U_m)` for `m != k`,
/// `kappa[(k, k)] = 0`, and `d/dt phi_k = sum_m kappa[(m, k)] phi_m`.
///
/// Refuses near-degenerate spectra; callers fall back to
/// [`eigenvector_rates_finite_diff`] with a gauge-aligned stencil.
pub fn eigenvector_rates(
    h_dot: &HermitianOperator,
    eig: &EigenSystem,
    degeneracy_tol: f64,
) -> Result<EigenDerivatives, SpectralError> {
    let n = eig.dim();
    if h_dot.dim() != n {
        return Err(SpectralError::DimensionMismatch { expected: n, actual: h_dot.dim() });
    }
    if eig.min_gap < degeneracy_tol {
        return Err(SpectralError::NearDegeneracy { gap: eig.min_gap, tolerance: degeneracy_tol });
    }

    // M = V† (dH/dt) V, re-Hermitized so the anti-Hermiticity of kappa is
    // exact in floating point.
    let m = eig.vectors.adjoint() * h_dot.entries() * &eig.vectors;
    let m_adj = m.adjoint();
    let m = (m + m_adj).scale(0.5);

    let mut kappa = DMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            if r != c {
                kappa[(r, c)] = m[(r, c)] / C64::new(eig.energies[c] - eig.energies[r], 0.0);
            }
        }
    }
    let vec_dot = &eig.vectors * &kappa;
    Ok(EigenDerivatives { vec_dot, kappa, stamp: eig.stamp })
}

/// Central-difference eigenvector rates for (near-)degenerate spectra.
///
/// `minus` and `plus` are fresh eigensolves at `t ∓ delta`; both are
/// gauge-aligned onto `center` before differencing. The coupling matrix is
/// projected onto its anti-Hermitian part with the diagonal zeroed, which
/// is exact for the parallel-transport gauge and removes O(delta^2) noise.
pub fn eigenvector_rates_finite_diff(
    minus: &EigenSystem,
    plus: &EigenSystem,
    center: &EigenSystem,
    delta: f64,
    overlap_threshold: f64,
) -> Result<(EigenDerivatives, GaugeReport), SpectralError> {
    let n = center.dim();
    if minus.dim() != n || plus.dim() != n {
        return Err(SpectralError::DimensionMismatch {
            expected: n,
            actual: if minus.dim() != n { minus.dim() } else { plus.dim() },
        });
    }
    let (minus_aligned, rep_m) = align_gauge(center, minus, overlap_threshold)?;
    let (plus_aligned, rep_p) = align_gauge(center, plus, overlap_threshold)?;

    let vec_dot = (&plus_aligned.vectors - &minus_aligned.vectors).scale(1.0 / (2.0 * delta));
    let kappa_raw = center.vectors.adjoint() * &vec_dot;
    let kappa_adj = kappa_raw.adjoint();
    let mut kappa = (kappa_raw - kappa_adj).scale(0.5);
    for k in 0..n {
        kappa[(k, k)] = C64::new(0.0, 0.0);
    }

    let mut report = GaugeReport {
        min_overlap: rep_m.min_overlap.min(rep_p.min_overlap),
        suspected_swaps: rep_m.suspected_swaps,
        degenerate_ambiguity: rep_m.degenerate_ambiguity || rep_p.degenerate_ambiguity,
    };
    report.suspected_swaps.extend(rep_p.suspected_swaps);
    report.suspected_swaps.dedup();

    Ok((EigenDerivatives { vec_dot, kappa, stamp: center.stamp }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coupling_two_level(j: f64) -> HermitianOperator {
        HermitianOperator::from_real_rows(2, &[0.0, j, j, 0.0]).unwrap()
    }

    #[test]
    fn symmetric_two_level() {
        let eig = eigensolve(&coupling_two_level(2.0), DEFAULT_DEGENERACY_TOL).unwrap();
        assert_abs_diff_eq!(eig.energies[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.energies[1], 2.0, epsilon = 1e-12);
        // Ground state (1, -1)/sqrt(2) up to gauge.
        let g = eig.vectors.column(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(g[0].re.abs(), s, epsilon = 1e-12);
        assert_abs_diff_eq!(g[1].re.abs(), s, epsilon = 1e-12);
        assert!((g[0] + g[1]).norm() < 1e-12 || (g[0] - g[1]).norm() < 1e-12);
        assert!((g[0].re * g[1].re) < 0.0, "components must differ in sign");
    }

    #[test]
    fn diagonal_input_sorts_site_energies() {
        let h = HermitianOperator::from_real_rows(
            3,
            &[2.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.5],
        )
        .unwrap();
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert_eq!(
            eig.energies.as_slice(),
            &[-1.0, 0.5, 2.0],
            "diagonal H keeps its site energies, sorted"
        );
        // Columns are permuted identity columns.
        for k in 0..3 {
            let col = eig.vectors.column(k);
            let mut ones = 0;
            for i in 0..3 {
                let m = col[i].norm();
                assert!(m < 1e-12 || (m - 1.0).abs() < 1e-12);
                if (m - 1.0).abs() < 1e-12 {
                    ones += 1;
                }
            }
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let h = crate::validate::random_hermitian(6, 1);
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let n = 6;
        let mut recon = DMatrix::<C64>::zeros(n, n);
        for k in 0..n {
            let v = eig.vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    recon[(i, j)] += v[i] * v[j].conj() * C64::new(eig.energies[k], 0.0);
                }
            }
        }
        let err = (recon - h.entries()).norm();
        let scale = h.entries().norm();
        assert!(err <= 1e-10 * scale, "reconstruction error {err:.3e} vs scale {scale:.3e}");
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(0.0, 0.0)],
        );
        match HermitianOperator::new(m) {
            Err(SpectralError::NonHermitianInput { .. }) => {}
            other => panic!("expected NonHermitianInput, got {other:?}"),
        }
    }

    #[test]
    fn symmetrizes_small_drift() {
        let eps = 1e-14;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.5 + eps, 0.0),
                C64::new(0.5, 0.0),
                C64::new(-1.0, 0.0),
            ],
        );
        let h = HermitianOperator::new(m).unwrap();
        let e = h.entries();
        assert_abs_diff_eq!(e[(0, 1)].re, 0.5 + eps / 2.0, epsilon = 1e-16);
        assert_eq!(e[(0, 1)], e[(1, 0)].conj());
    }

    #[test]
    fn gauge_alignment_removes_pure_phase() {
        let h = coupling_two_level(1.5);
        let prev = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let mut cur = prev.clone();
        let theta = 0.77;
        let z = C64::new(theta.cos(), theta.sin());
        for k in 0..2 {
            for r in 0..2 {
                cur.vectors[(r, k)] *= z;
            }
        }
        let (aligned, report) = align_gauge(&prev, &cur, DEFAULT_OVERLAP_THRESHOLD).unwrap();
        assert!((aligned.vectors.clone() - prev.vectors.clone()).norm() < 1e-14);
        assert!(report.suspected_swaps.is_empty());
    }

    #[test]
    fn gauge_alignment_identity_and_idempotence() {
        let h = crate::validate::random_hermitian(4, 7);
        let prev = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let (same, _) = align_gauge(&prev, &prev, DEFAULT_OVERLAP_THRESHOLD).unwrap();
        assert_eq!(same.vectors, prev.vectors, "aligning a system to itself is the identity");

        let hp = crate::validate::random_hermitian(4, 8);
        let mix =
            HermitianOperator::new(h.entries().scale(0.9) + hp.entries().scale(0.1)).unwrap();
        let cur = eigensolve(&mix, DEFAULT_DEGENERACY_TOL).unwrap();
        let (once, _) = align_gauge(&prev, &cur, DEFAULT_OVERLAP_THRESHOLD).unwrap();
        let (twice, _) = align_gauge(&prev, &once, DEFAULT_OVERLAP_THRESHOLD).unwrap();
        assert_eq!(once.vectors, twice.vectors, "alignment must be bit-exactly idempotent");
    }

    #[test]
    fn aligned_overlaps_real_positive_across_sweep() {
        // Slowly rotating 2x2 avoided-crossing family sampled densely.
        let delta = 1.0;
        let mut prev: Option<EigenSystem> = None;
        for i in 0..200 {
            let t = -2.0 + 4.0 * (i as f64) / 199.0;
            let j = 0.4 + 0.3 * (1.3 * t).sin();
            let h = HermitianOperator::from_real_rows(
                2,
                &[-delta / 2.0 + 0.2 * t, j, j, delta / 2.0],
            )
            .unwrap();
            let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
            if let Some(p) = prev {
                let (aligned, _) = align_gauge(&p, &eig, DEFAULT_OVERLAP_THRESHOLD).unwrap();
                for k in 0..2 {
                    let o = p.vectors.column(k).dotc(&aligned.vectors.column(k));
                    assert!(o.re > 0.0, "overlap must be positive, got {o}");
                    assert!(o.im.abs() <= 1e-10 * o.re.max(1e-300), "overlap must be real");
                }
                prev = Some(aligned);
            } else {
                prev = Some(eig);
            }
        }
    }

    #[test]
    fn zero_rate_for_static_hamiltonian() {
        let h = crate::validate::random_hermitian(4, 3);
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        let derivs = eigenvector_rates(&HermitianOperator::zero(4), &eig, 1e-9).unwrap();
        assert!(derivs.kappa.norm() == 0.0);
        assert!(derivs.vec_dot.norm() == 0.0);
    }

    #[test]
    fn perturbative_rates_match_finite_difference_two_level() {
        // H(t) = [[-D/2, J(t)], [J(t), D/2]] with J(t) = 0.5 + 0.3 t.
        let build = |t: f64| {
            let j = 0.5 + 0.3 * t;
            HermitianOperator::from_real_rows(2, &[-0.6, j, j, 0.6]).unwrap()
        };
        let t0 = 0.4;
        let eig = eigensolve(&build(t0), DEFAULT_DEGENERACY_TOL).unwrap();
        let h_dot = HermitianOperator::from_real_rows(2, &[0.0, 0.3, 0.3, 0.0]).unwrap();
        let derivs = eigenvector_rates(&h_dot, &eig, 1e-9).unwrap();

        let dt = 1e-6;
        let em = eigensolve(&build(t0 - dt), DEFAULT_DEGENERACY_TOL).unwrap();
        let ep = eigensolve(&build(t0 + dt), DEFAULT_DEGENERACY_TOL).unwrap();
        let (fd, _) =
            eigenvector_rates_finite_diff(&em, &ep, &eig, dt, DEFAULT_OVERLAP_THRESHOLD).unwrap();

        let k12 = derivs.kappa[(0, 1)];
        let k12_fd = fd.kappa[(0, 1)];
        let rel = (k12 - k12_fd).norm() / k12.norm();
        assert!(rel < 1e-5, "kappa mismatch: pt {k12}, fd {k12_fd}, rel {rel:.3e}");
    }

    #[test]
    fn kappa_antisymmetric_on_ramped_three_level() {
        let p = crate::models::ThreeLevelParams::ramped([0.0, 3.0, 0.0], 8.0, 8.0, 50.0).unwrap();
        let t = 25.0;
        let eig = eigensolve(&p.hamiltonian(t), DEFAULT_DEGENERACY_TOL).unwrap();
        let derivs = eigenvector_rates(&p.hamiltonian_rate(t), &eig, 1e-9).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let s = derivs.kappa[(r, c)] + derivs.kappa[(c, r)].conj();
                assert!(s.norm() <= 1e-10, "kappa not antisymmetric at ({r},{c}): {s}");
            }
        }
        assert_eq!(derivs.kappa[(0, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn near_degeneracy_is_refused() {
        let h = HermitianOperator::from_real_rows(2, &[1.0, 1e-12, 1e-12, 1.0]).unwrap();
        let eig = eigensolve(&h, DEFAULT_DEGENERACY_TOL).unwrap();
        assert!(eig.degenerate);
        let hd = HermitianOperator::from_real_rows(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        match eigenvector_rates(&hd, &eig, DEFAULT_DEGENERACY_TOL) {
            Err(SpectralError::NearDegeneracy { .. }) => {}
            other => panic!("expected NearDegeneracy, got {other:?}"),
        }
    }
}
