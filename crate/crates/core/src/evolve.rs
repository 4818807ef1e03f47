// SPDX-License-Identifier: Apache-2.0

//! Fixed-step integration of `i d psi / d tau = H(tau) psi`.
//!
//! Two steppers are provided. [`Method::Rk4Fixed`] is the production
//! method. [`Method::PiecewiseExpmMidpoint`] freezes the Hamiltonian at the
//! step midpoint and applies its exact exponential; it is second order but
//! unitary to rounding and serves as the cross-check. The state is never
//! renormalized: drift is measured and reported.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::hamiltonian::{Hamiltonian, ModelSpec};
use crate::hilbert::{BasisIndex, StateVector, NORM_TOLERANCE};
use crate::observables::{ObservableSeries, Observer};

/// Default step is the fastest phase period divided by this.
pub const STEPS_PER_PERIOD: f64 = 50.0;

/// Default number of recorded rows per run.
pub const DEFAULT_RECORD_ROWS: usize = 5000;

/// Successive final populations closer than this count as converged.
pub const CONVERGENCE_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Rk4Fixed,
    PiecewiseExpmMidpoint,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rk4Fixed => "rk4_fixed",
            Self::PiecewiseExpmMidpoint => "piecewise_expm_midpoint",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" | "rk4_fixed" => Ok(Self::Rk4Fixed),
            "expm" | "piecewise_expm_midpoint" => Ok(Self::PiecewiseExpmMidpoint),
            other => domain(format!(
                "unknown integration method '{other}' (expected rk4_fixed or piecewise_expm_midpoint)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Target step; `None` selects [`default_dt`]. The span is divided into
    /// a whole number of steps no longer than this.
    pub dt: Option<f64>,
    /// Steps between recorded rows; `None` targets [`DEFAULT_RECORD_ROWS`].
    pub record_stride: Option<usize>,
    /// Largest tolerated `| ||psi|| - 1 |`.
    pub norm_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rk4Fixed,
            dt: None,
            record_stride: None,
            norm_tolerance: 1e-8,
        }
    }
}

impl IntegratorConfig {
    pub fn with_method(self, method: Method) -> Self {
        Self { method, ..self }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self {
            dt: Some(dt),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return domain(format!("time step must be positive, got {dt}"));
            }
        }
        if self.record_stride == Some(0) {
            return domain("record stride must be at least 1");
        }
        if !(self.norm_tolerance > 0.0) {
            return domain(format!(
                "norm tolerance must be positive, got {}",
                self.norm_tolerance
            ));
        }
        Ok(())
    }
}

/// `(2 pi / omega_fast) / 50` with `omega_fast` from
/// [`ModelSpec::fastest_frequency`].
pub fn default_dt(model: &ModelSpec, tau0: f64, tau1: f64) -> Result<f64> {
    let fast = model.fastest_frequency(tau0, tau1)?;
    if !(fast > 0.0 && fast.is_finite()) {
        return domain(format!(
            "cannot derive a time step from fastest frequency {fast}"
        ));
    }
    Ok(TAU / fast / STEPS_PER_PERIOD)
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub observables: Vec<ObservableSeries>,
    pub final_state: StateVector,
    /// Largest `| ||psi(tau)|| - 1 |` over every step.
    pub norm_drift: f64,
    /// Largest `max |U†U - I|` over the exponential steps, if any.
    pub max_unitarity_defect: Option<f64>,
    pub dt: f64,
    pub steps: usize,
}

impl EvolutionResult {
    pub fn series(&self, name: &str) -> Option<&[f64]> {
        self.observables
            .iter()
            .find(|s| s.name == name)
            .map(|s| s.values.as_slice())
    }
}

/// Reusable single-step integrator state.
struct Stepper {
    hamiltonian: Hamiltonian,
    method: Method,
    factors_start: Vec<(Complex64, Complex64)>,
    factors_mid: Vec<(Complex64, Complex64)>,
    factors_end: Vec<(Complex64, Complex64)>,
    start_valid_at: Option<f64>,
    k: [Vec<Complex64>; 4],
    tmp: Vec<Complex64>,
    max_unitarity_defect: f64,
}

impl Stepper {
    fn new(model: &ModelSpec, method: Method) -> Self {
        let dim = model.space().dim();
        let zeros = || vec![Complex64::new(0.0, 0.0); dim];
        Self {
            hamiltonian: Hamiltonian::new(model),
            method,
            factors_start: Vec::new(),
            factors_mid: Vec::new(),
            factors_end: Vec::new(),
            start_valid_at: None,
            k: [zeros(), zeros(), zeros(), zeros()],
            tmp: zeros(),
            max_unitarity_defect: 0.0,
        }
    }

    /// Advances `psi` from `t` to `t + h` (`h` may be negative).
    fn step(&mut self, psi: &mut [Complex64], t: f64, h: f64) -> Result<()> {
        match self.method {
            Method::Rk4Fixed => self.rk4(psi, t, h),
            Method::PiecewiseExpmMidpoint => {
                let u = propagator(&self.hamiltonian, t, h)?;
                self.max_unitarity_defect = self.max_unitarity_defect.max(unitarity_defect(&u));
                let out = &u * DVector::from_column_slice(psi);
                psi.copy_from_slice(out.as_slice());
                Ok(())
            }
        }
    }

    fn rk4(&mut self, psi: &mut [Complex64], t: f64, h: f64) -> Result<()> {
        let ham = &self.hamiltonian;
        if self.start_valid_at != Some(t) {
            ham.phase_factors(t, &mut self.factors_start)?;
        }
        ham.phase_factors(t + 0.5 * h, &mut self.factors_mid)?;
        ham.phase_factors(t + h, &mut self.factors_end)?;

        let minus_i = Complex64::new(0.0, -1.0);
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;

        ham.apply_with(&self.factors_start, psi, k1);
        k1.iter_mut().for_each(|v| *v *= minus_i);
        for ((x, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k1.iter()) {
            *x = p + k * (0.5 * h);
        }
        ham.apply_with(&self.factors_mid, tmp, k2);
        k2.iter_mut().for_each(|v| *v *= minus_i);
        for ((x, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k2.iter()) {
            *x = p + k * (0.5 * h);
        }
        ham.apply_with(&self.factors_mid, tmp, k3);
        k3.iter_mut().for_each(|v| *v *= minus_i);
        for ((x, p), k) in tmp.iter_mut().zip(psi.iter()).zip(k3.iter()) {
            *x = p + k * h;
        }
        ham.apply_with(&self.factors_end, tmp, k4);
        k4.iter_mut().for_each(|v| *v *= minus_i);

        let w = h / 6.0;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
        }

        std::mem::swap(&mut self.factors_start, &mut self.factors_end);
        self.start_valid_at = Some(t + h);
        Ok(())
    }
}

fn propagator(ham: &Hamiltonian, t: f64, h: f64) -> Result<DMatrix<Complex64>> {
    let frozen = ham.matrix(t + 0.5 * h)?;
    let eig = frozen.symmetric_eigen();
    let v = eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::cis(-e * h)));
    Ok(&v * phases * v.adjoint())
}

/// `max |U†U - I|` entrywise.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let prod = u.adjoint() * u;
    prod.iter()
        .enumerate()
        .map(|(k, z)| {
            let (r, c) = (k % prod.nrows(), k / prod.nrows());
            let id = if r == c { 1.0 } else { 0.0 };
            (z - id).norm()
        })
        .fold(0.0, f64::max)
}

/// `exp(-i H(tau + dt/2) dt)`: one midpoint-frozen step from `tau`.
pub fn propagator_step_expm(model: &ModelSpec, tau: f64, dt: f64) -> Result<DMatrix<Complex64>> {
    if !dt.is_finite() {
        return domain("time step must be finite");
    }
    propagator(&Hamiltonian::new(model), tau, dt)
}

fn check_initial(model: &ModelSpec, initial: &StateVector) -> Result<()> {
    if initial.space() != model.space() {
        return domain("initial state does not live in the model's Hilbert space");
    }
    let n2 = initial.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOLERANCE {
        return domain(format!("initial state is not normalized: ||psi||^2 = {n2}"));
    }
    Ok(())
}

/// Propagates `state` from `tau0` to `tau1` in `steps` equal steps; `tau1`
/// may precede `tau0`, which integrates the equation backwards.
pub fn propagate(
    model: &ModelSpec,
    state: &StateVector,
    (tau0, tau1): (f64, f64),
    method: Method,
    steps: usize,
) -> Result<StateVector> {
    if state.space() != model.space() {
        return domain("state does not live in the model's Hilbert space");
    }
    if steps == 0 {
        return domain("at least one step is required");
    }
    let mut stepper = Stepper::new(model, method);
    let mut psi = state.clone();
    let h = (tau1 - tau0) / steps as f64;
    for k in 0..steps {
        stepper.step(psi.amplitudes_mut(), tau0 + k as f64 * h, h)?;
    }
    Ok(psi)
}

/// Integrates from `tau_span.0` to `tau_span.1`, recording `observers` at
/// the configured stride (always including both endpoints).
pub fn evolve(
    model: &ModelSpec,
    initial: &StateVector,
    (tau0, tau1): (f64, f64),
    config: &IntegratorConfig,
    observers: &[Observer],
) -> Result<EvolutionResult> {
    config.validate()?;
    check_initial(model, initial)?;
    if !(tau1 > tau0) || !tau0.is_finite() || !tau1.is_finite() {
        return domain(format!(
            "evolution span [{tau0}, {tau1}] must be finite with tau1 > tau0"
        ));
    }
    let target = match config.dt {
        Some(dt) => dt,
        None => default_dt(model, tau0, tau1)?,
    };
    let span = tau1 - tau0;
    let steps = ((span / target).ceil() as usize).max(1);
    let dt = span / steps as f64;
    let stride = config
        .record_stride
        .unwrap_or_else(|| steps.div_ceil(DEFAULT_RECORD_ROWS).max(1));

    let mut stepper = Stepper::new(model, config.method);
    let mut psi = initial.clone();
    let rows = steps / stride + 2;
    let mut times = Vec::with_capacity(rows);
    let mut values: Vec<Vec<f64>> = observers.iter().map(|_| Vec::with_capacity(rows)).collect();
    let mut record = |tau: f64, psi: &StateVector| -> Result<()> {
        times.push(tau);
        for (obs, series) in observers.iter().zip(values.iter_mut()) {
            series.push(obs.measure(psi)?);
        }
        Ok(())
    };

    record(tau0, &psi)?;
    let mut norm_drift = (psi.norm() - 1.0).abs();
    for k in 0..steps {
        let t = tau0 + k as f64 * dt;
        stepper.step(psi.amplitudes_mut(), t, dt)?;
        let tau = if k + 1 == steps {
            tau1
        } else {
            tau0 + (k + 1) as f64 * dt
        };
        let drift = (psi.norm() - 1.0).abs();
        norm_drift = norm_drift.max(drift);
        if !(drift <= config.norm_tolerance) {
            return Err(Error::IntegrationAccuracy {
                tau,
                drift,
                tolerance: config.norm_tolerance,
            });
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            record(tau, &psi)?;
        }
    }

    let observables = observers
        .iter()
        .zip(values)
        .map(|(o, values)| ObservableSeries {
            name: o.name(),
            values,
        })
        .collect();
    let max_unitarity_defect =
        (config.method == Method::PiecewiseExpmMidpoint).then_some(stepper.max_unitarity_defect);
    Ok(EvolutionResult {
        times,
        observables,
        final_state: psi,
        norm_drift,
        max_unitarity_defect,
        dt,
        steps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_max: usize,
    /// Final ground population of each detector.
    pub final_ground: Vec<f64>,
    /// Largest change against the previous row; `None` on the first row.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub threshold: f64,
}

impl ConvergenceReport {
    /// Every successive difference is below the threshold.
    pub fn converged(&self) -> bool {
        self.rows.len() >= 2
            && self
                .rows
                .iter()
                .filter_map(|r| r.delta)
                .all(|d| d < self.threshold)
    }
}

/// Re-runs the evolution at each truncation (applied to every mode) and
/// tabulates the final ground populations.
pub fn convergence_check(
    model: &ModelSpec,
    initial: &BasisIndex,
    tau_span: (f64, f64),
    config: &IntegratorConfig,
    truncations: &[usize],
) -> Result<ConvergenceReport> {
    if truncations.is_empty() {
        return domain("at least one truncation is required");
    }
    if truncations.windows(2).any(|w| w[1] <= w[0]) {
        return domain(format!(
            "truncations must be strictly increasing, got {truncations:?}"
        ));
    }
    let observers: Vec<Observer> = (0..model.detectors().len())
        .map(Observer::GroundPopulation)
        .collect();
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(truncations.len());
    for &n_max in truncations {
        let truncated = model.with_truncation(n_max)?;
        let psi0 = StateVector::basis(truncated.space().clone(), initial)?;
        let result = evolve(&truncated, &psi0, tau_span, config, &observers)?;
        let final_ground: Vec<f64> = result
            .observables
            .iter()
            .map(|s| {
                *s.values
                    .last()
                    .expect("series always holds the start point")
            })
            .collect();
        let delta = rows.last().map(|prev| {
            prev.final_ground
                .iter()
                .zip(&final_ground)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        });
        rows.push(ConvergenceRow {
            n_max,
            final_ground,
            delta,
        });
    }
    Ok(ConvergenceReport {
        rows,
        threshold: CONVERGENCE_THRESHOLD,
    })
}
