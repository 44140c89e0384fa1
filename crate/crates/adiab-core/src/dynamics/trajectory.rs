//! Full trajectory orchestration: synchronized quantum and classical
//! stepping, eigenbasis tracking, measure accumulation and recording.

use std::collections::BTreeMap;
use std::fmt::Display;

use nalgebra::DVector;

use super::classical::{hellmann_feynman_forces, step_classical};
use super::quantum::{project_adiabatic, rk4_step, StepLimits};
use super::{ClassicalState, DynamicsError, QuantumState};
use crate::measure::{amplitude_rates, transition_rate_field, MeasureAccumulator};
use crate::models::Model;
use crate::spectral::{
    align_gauge, eigensolve, eigenvector_rates, eigenvector_rates_finite_diff, fix_initial_gauge,
    EigenSystem, SpectralError,
};

/// Uniform time grid: `steps` intervals of width `dt`, rows recorded every
/// `record_stride` steps (the final step is always recorded).
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
    pub record_stride: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize, record_stride: usize) -> Result<Self, DynamicsError> {
        if !(dt > 0.0) {
            return Err(DynamicsError::InvalidGrid(format!("dt must be > 0, got {dt}")));
        }
        if steps == 0 {
            return Err(DynamicsError::InvalidGrid("steps must be >= 1".into()));
        }
        if record_stride == 0 {
            return Err(DynamicsError::InvalidGrid("record_stride must be >= 1".into()));
        }
        Ok(Self { dt, steps, record_stride })
    }

    /// Grid spanning `[0, t_end]` with the step count rounded to cover it.
    pub fn spanning(dt: f64, t_end: f64, record_stride: usize) -> Result<Self, DynamicsError> {
        if !(t_end > 0.0) {
            return Err(DynamicsError::InvalidGrid(format!("t_end must be > 0, got {t_end}")));
        }
        let steps = (t_end / dt).round().max(1.0) as usize;
        Self::new(dt, steps, record_stride)
    }

    pub fn t_end(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

/// Which adiabatic surface drives the nuclear forces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SurfacePolicy {
    /// Chosen at t = 0 by maximal overlap with the initial electronic
    /// state, then held fixed under energy-ordered labelling.
    #[default]
    Fixed,
    /// Re-selected every step as the most populated adiabatic state.
    MostPopulated,
}

#[derive(Debug, Clone)]
pub struct TrajectoryOptions {
    /// Target state (0-based) for the signed measure.
    pub target_index: usize,
    /// Modulus floor for the polar decomposition.
    pub amp_floor: f64,
    /// Adjacent-gap threshold for the perturbative derivative path.
    pub degeneracy_tol: f64,
    /// Diagonal-overlap threshold below which a gauge step is flagged.
    pub overlap_threshold: f64,
    /// Per-step norm-square drift that aborts the run.
    pub norm_drift_abort: f64,
    /// Optional hard cap on dt.
    pub dt_max: Option<f64>,
    pub surface_policy: SurfacePolicy,
    /// Record classical positions into the trajectory.
    pub record_positions: bool,
    /// Advance the classical subsystem; false freezes the chain.
    pub mobile: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            target_index: 0,
            amp_floor: crate::measure::DEFAULT_AMP_FLOOR,
            degeneracy_tol: crate::spectral::DEFAULT_DEGENERACY_TOL,
            overlap_threshold: crate::spectral::DEFAULT_OVERLAP_THRESHOLD,
            norm_drift_abort: 1e-6,
            dt_max: None,
            surface_policy: SurfacePolicy::Fixed,
            record_positions: false,
            mobile: true,
        }
    }
}

/// Key-value run metadata with deterministic ordering.
#[derive(Debug, Clone, Default)]
pub struct RunMetadata {
    pub entries: BTreeMap<String, String>,
}

impl RunMetadata {
    pub fn insert(&mut self, key: &str, value: impl Display) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Recorded trajectory: one row per recorded step plus run diagnostics.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    /// Diabatic populations p_n per recorded step.
    pub diabatic_pops: Vec<Vec<f64>>,
    /// Adiabatic populations p~_k per recorded step.
    pub adiabatic_pops: Vec<Vec<f64>>,
    /// Phase-stripped rate field t_n per recorded step.
    pub t_field: Vec<Vec<f64>>,
    pub t1_series: Vec<f64>,
    pub t2_series: Vec<f64>,
    /// Classical positions per recorded step, when requested.
    pub classical_positions: Option<Vec<Vec<f64>>>,
    /// Cumulative maximum of the target-state population, tracked at every
    /// integrator step, and the time it was first attained.
    pub max_target_pop: f64,
    pub time_of_max_target_pop: f64,
    pub metadata: RunMetadata,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_t1(&self) -> f64 {
        *self.t1_series.last().unwrap_or(&0.0)
    }

    pub fn final_t2(&self) -> f64 {
        *self.t2_series.last().unwrap_or(&0.0)
    }
}

/// Propagate one trajectory on the given grid.
///
/// Per integrator step: solve and gauge-align the instantaneous
/// eigenproblem, evaluate the eigenvector rates (perturbative, with a
/// gauge-aligned finite-difference fallback at near-degeneracies), project
/// the state, evaluate the rate field and advance the cumulative measures;
/// then advance the quantum amplitudes (RK4) and, for mobile chains, the
/// classical coordinates (velocity Verlet) with the same dt. Quantum stage
/// Hamiltonians see the Verlet quadratic position interpolant, so both
/// subsystems stay synchronized within the step.
pub fn run_trajectory<M: Model>(
    model: &M,
    q0: &QuantumState,
    cl0: Option<ClassicalState>,
    grid: TimeGrid,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryRecord, DynamicsError> {
    let dim = model.dim();
    if q0.dim() != dim {
        return Err(DynamicsError::DimensionMismatch { expected: dim, actual: q0.dim() });
    }
    if opts.target_index >= dim {
        return Err(DynamicsError::DimensionMismatch { expected: dim, actual: opts.target_index });
    }
    if let Some(dt_max) = opts.dt_max {
        if grid.dt > dt_max {
            return Err(DynamicsError::StepTooLarge {
                reason: format!("grid dt = {} exceeds dt_max = {dt_max}", grid.dt),
            });
        }
    }

    let dt = grid.dt;
    let limits = StepLimits { dt_max: opts.dt_max, norm_drift_abort: opts.norm_drift_abort };

    let mut q = q0.clone();
    let mut cl = cl0;
    let mut t = q0.time;

    // Initial eigensystem fixes the gauge for the whole trajectory.
    let mut eig = eigensolve(&model.hamiltonian(t, cl.as_ref())?, opts.degeneracy_tol)?;
    fix_initial_gauge(&mut eig);
    eig.stamp = 0;

    // Surface selection by maximal initial overlap.
    if let Some(cl_state) = cl.as_mut() {
        let overlaps = eig.project(&q.amplitudes);
        let mut best = 0;
        let mut best_mag = -1.0;
        for k in 0..dim {
            let m = overlaps[k].norm_sqr();
            if m > best_mag {
                best_mag = m;
                best = k;
            }
        }
        cl_state.surface_index = best;
    }

    let mut forces: Option<Vec<f64>> = match (&cl, opts.mobile) {
        (Some(cl_state), true) => {
            Some(hellmann_feynman_forces(model, &eig, cl_state.surface_index, &cl_state.positions)?)
        }
        _ => None,
    };

    let mut phase_memory = vec![0.0f64; dim];
    let mut accumulator = MeasureAccumulator::new(opts.target_index);

    let recorded_capacity = grid.steps / grid.record_stride + 2;
    let mut record = TrajectoryRecord {
        times: Vec::with_capacity(recorded_capacity),
        diabatic_pops: Vec::with_capacity(recorded_capacity),
        adiabatic_pops: Vec::with_capacity(recorded_capacity),
        t_field: Vec::with_capacity(recorded_capacity),
        t1_series: Vec::with_capacity(recorded_capacity),
        t2_series: Vec::with_capacity(recorded_capacity),
        classical_positions: if cl.is_some() && opts.record_positions {
            Some(Vec::with_capacity(recorded_capacity))
        } else {
            None
        },
        max_target_pop: 0.0,
        time_of_max_target_pop: q0.time,
        metadata: RunMetadata::default(),
    };

    let mut gauge_flag_count: u64 = 0;
    let mut degeneracy_fallback_count: u64 = 0;
    let mut max_sum_residual = 0.0f64;
    let mut max_imag_residual = 0.0f64;
    let mut max_norm_deviation = 0.0f64;
    let mut max_unitarity_residual = 0.0f64;
    let initial_surface = cl.as_ref().map(|c| c.surface_index);

    for step in 0..=grid.steps {
        eig.stamp = step as u64;

        // Derivatives of the eigenbasis at this point.
        let h_dot = model.hamiltonian_rate(t, cl.as_ref())?;
        let derivs = match eigenvector_rates(&h_dot, &eig, opts.degeneracy_tol) {
            Ok(d) => d,
            Err(SpectralError::NearDegeneracy { .. }) => {
                degeneracy_fallback_count += 1;
                let delta = 1e-3 * dt;
                let eval = |tau: f64| -> Result<EigenSystem, DynamicsError> {
                    let shifted = cl.as_ref().map(|c| {
                        let positions = c
                            .positions
                            .iter()
                            .zip(c.velocities.iter())
                            .map(|(x, v)| x + v * tau)
                            .collect();
                        c.at_positions(positions)
                    });
                    Ok(eigensolve(
                        &model.hamiltonian(t + tau, shifted.as_ref())?,
                        opts.degeneracy_tol,
                    )?)
                };
                let minus = eval(-delta)?;
                let plus = eval(delta)?;
                let (d, rep) = eigenvector_rates_finite_diff(
                    &minus,
                    &plus,
                    &eig,
                    delta,
                    opts.overlap_threshold,
                )?;
                if rep.flagged() {
                    gauge_flag_count += 1;
                }
                d
            }
            Err(e) => return Err(e.into()),
        };

        // Projection, rates and the measure update.
        let mut decomp = project_adiabatic(&q, &eig)?;
        decomp.inherit_phases(&mut phase_memory, opts.amp_floor);
        let unitarity =
            (decomp.populations().sum() - q.norm_sqr()).abs();
        max_unitarity_residual = max_unitarity_residual.max(unitarity);

        let cdot = super::quantum::adiabatic_rhs(&decomp, &eig, &derivs)?;
        let adot = amplitude_rates(&decomp, &cdot, opts.amp_floor);
        decomp.moduli_rates = Some(adot.clone());
        let field = transition_rate_field(&decomp, &eig, &derivs, &adot)?;
        max_sum_residual = max_sum_residual.max(field.sum_residual);
        max_imag_residual = max_imag_residual.max(field.imag_residual);
        accumulator.accumulate(&field.values, dt);

        let pops = q.populations();
        let target_pop = pops[opts.target_index];
        if target_pop > record.max_target_pop {
            record.max_target_pop = target_pop;
            record.time_of_max_target_pop = t;
        }
        max_norm_deviation = max_norm_deviation.max((q.norm_sqr() - 1.0).abs());

        if step % grid.record_stride == 0 || step == grid.steps {
            record.times.push(t);
            record.diabatic_pops.push(pops.iter().copied().collect());
            record.adiabatic_pops.push(decomp.populations().iter().copied().collect());
            record.t_field.push(field.values.iter().copied().collect());
            record.t1_series.push(accumulator.t1);
            record.t2_series.push(accumulator.t2);
            if let Some(rows) = record.classical_positions.as_mut() {
                rows.push(cl.as_ref().expect("positions recorded only with classical state").positions.clone());
            }
        }

        if step == grid.steps {
            break;
        }

        // Advance both subsystems by dt.
        let next_eig;
        match (&mut cl, &mut forces) {
            (Some(cl_state), Some(f)) if opts.mobile => {
                // Quantum stages see the Verlet position interpolant
                // X(tau) = X + V tau + F tau^2 / 2M built from step-start data.
                let cl_snapshot = cl_state.clone();
                let f_snapshot = f.clone();
                let inv_2m = 0.5 / cl_snapshot.mass;
                q = rk4_step(
                    &q,
                    |tau| {
                        let positions: Vec<f64> = cl_snapshot
                            .positions
                            .iter()
                            .zip(cl_snapshot.velocities.iter())
                            .zip(f_snapshot.iter())
                            .map(|((x, v), fc)| x + v * tau + fc * inv_2m * tau * tau)
                            .collect();
                        let interp = cl_snapshot.at_positions(positions);
                        Ok(model.hamiltonian(t + tau, Some(&interp))?)
                    },
                    dt,
                    &limits,
                )?;

                let eig_ref = &eig;
                let (cl_next, f_next, eig_end) = step_classical(
                    &cl_snapshot,
                    &f_snapshot,
                    model,
                    |positions| {
                        let temp = cl_snapshot.at_positions(positions.to_vec());
                        let raw = eigensolve(
                            &model.hamiltonian(t + dt, Some(&temp))?,
                            opts.degeneracy_tol,
                        )?;
                        let (aligned, rep) = align_gauge(eig_ref, &raw, opts.overlap_threshold)?;
                        if rep.flagged() {
                            gauge_flag_count += 1;
                        }
                        Ok(aligned)
                    },
                    dt,
                )?;
                cl = Some(cl_next);
                forces = Some(f_next);
                next_eig = eig_end;

                if opts.surface_policy == SurfacePolicy::MostPopulated {
                    let decomp_next = project_adiabatic(&q, &next_eig)?;
                    let pops_next = decomp_next.populations();
                    let mut best = 0;
                    let mut best_val = -1.0;
                    for k in 0..dim {
                        if pops_next[k] > best_val {
                            best_val = pops_next[k];
                            best = k;
                        }
                    }
                    if let Some(c) = cl.as_mut() {
                        c.surface_index = best;
                    }
                }
            }
            _ => {
                q = rk4_step(
                    &q,
                    |tau| Ok(model.hamiltonian(t + tau, cl.as_ref())?),
                    dt,
                    &limits,
                )?;
                let raw = eigensolve(
                    &model.hamiltonian(t + dt, cl.as_ref())?,
                    opts.degeneracy_tol,
                )?;
                let (aligned, rep) = align_gauge(&eig, &raw, opts.overlap_threshold)?;
                if rep.flagged() {
                    gauge_flag_count += 1;
                }
                next_eig = aligned;
            }
        }

        eig = next_eig;
        t += dt;
    }

    let meta = &mut record.metadata;
    meta.insert("grid.dt", dt);
    meta.insert("grid.steps", grid.steps);
    meta.insert("grid.record_stride", grid.record_stride);
    meta.insert("grid.t_end", grid.t_end());
    meta.insert("measure.target_index", opts.target_index);
    meta.insert("measure.amp_floor", opts.amp_floor);
    meta.insert("tolerances.degeneracy", opts.degeneracy_tol);
    meta.insert("tolerances.overlap_threshold", opts.overlap_threshold);
    meta.insert("tolerances.norm_drift_abort", opts.norm_drift_abort);
    meta.insert(
        "dynamics.surface_policy",
        match opts.surface_policy {
            SurfacePolicy::Fixed => "fixed",
            SurfacePolicy::MostPopulated => "most_populated_each_step",
        },
    );
    meta.insert("dynamics.mobile", opts.mobile);
    if let Some(s) = initial_surface {
        meta.insert("dynamics.initial_surface", s);
    }
    meta.insert("diagnostics.gauge_flag_count", gauge_flag_count);
    meta.insert("diagnostics.degeneracy_fallback_count", degeneracy_fallback_count);
    meta.insert("diagnostics.max_sum_rule_residual", format!("{max_sum_residual:e}"));
    meta.insert("diagnostics.max_imag_residual", format!("{max_imag_residual:e}"));
    meta.insert("diagnostics.max_norm_deviation", format!("{max_norm_deviation:e}"));
    meta.insert("diagnostics.max_unitarity_residual", format!("{max_unitarity_residual:e}"));
    meta.insert("integrator.quantum", "rk4 fixed step");
    meta.insert("integrator.classical", "velocity verlet");

    Ok(record)
}

/// Suggest a step from the model's spectral range: 1/200 of the shortest
/// relevant period, `min(2 pi / dU_max, 2 pi / omega_morse) / 200`.
///
/// The spectral spread is probed by Gershgorin bounds on sampled
/// Hamiltonians; `extra_spread` widens the estimate (e.g. for site-energy
/// disorder not present in the probe configuration).
pub fn suggest_dt<M: Model>(
    model: &M,
    samples: &[(f64, Option<&ClassicalState>)],
    omega_classical: Option<f64>,
    extra_spread: f64,
) -> Result<f64, DynamicsError> {
    let mut spread: f64 = 0.0;
    for (t, cl) in samples {
        let h = model.hamiltonian(*t, *cl)?;
        let e = h.entries();
        let n = h.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let radius: f64 = (0..n).filter(|&j| j != i).map(|j| e[(i, j)].norm()).sum();
            lo = lo.min(e[(i, i)].re - radius);
            hi = hi.max(e[(i, i)].re + radius);
        }
        spread = spread.max(hi - lo);
    }
    spread += extra_spread;
    if spread <= 0.0 {
        return Err(DynamicsError::InvalidGrid("cannot suggest dt for a zero-spread model".into()));
    }
    let quantum_period = std::f64::consts::TAU / spread;
    let period = match omega_classical {
        Some(w) if w > 0.0 => quantum_period.min(std::f64::consts::TAU / w),
        _ => quantum_period,
    };
    Ok(period / 200.0)
}
