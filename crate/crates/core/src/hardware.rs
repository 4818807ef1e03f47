// SPDX-License-Identifier: Apache-2.0

//! Compilation of a target single-mode model onto trapped-ion Raman lasers
//! or circuit-QED flux drives.
//!
//! All frequencies here share whatever unit the caller picks (the CLI uses
//! Hz). Every "much less than" condition of the effective-model derivation
//! becomes a dimensionless ratio graded against [`THRESHOLDS`].

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::trajectory::{ModeSpec, Worldline};

/// The ion coupling is `g_j = i |g_j|`; the factor `i` is a constant phase
/// absorbed into the mode operators.
pub const ION_COUPLING_PHASE: f64 = std::f64::consts::FRAC_PI_2;

/// Ratio grading: `ratio <= pass` passes, `ratio <= warn` warns, anything
/// larger (or NaN) fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub pass: f64,
    pub warn: f64,
}

pub const THRESHOLDS: Thresholds = Thresholds {
    pass: 0.2,
    warn: 0.5,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Warn,
    Fail,
}

impl Status {
    pub fn grade(ratio: f64, thresholds: Thresholds) -> Self {
        if ratio <= thresholds.pass {
            Self::Pass
        } else if ratio <= thresholds.warn {
            Self::Warn
        } else {
            Self::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Warn => "warn",
            Self::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    /// Left side over right side of the inequality.
    pub ratio: f64,
    pub thresholds: Thresholds,
    pub status: Status,
}

impl Check {
    fn new(name: impl Into<String>, numerator: f64, denominator: f64) -> Self {
        let ratio = ratio(numerator, denominator);
        Self {
            name: name.into(),
            ratio,
            thresholds: THRESHOLDS,
            status: Status::grade(ratio, THRESHOLDS),
        }
    }
}

/// `|num| / |den|`, with `0 / 0 = 0` and `x / 0 = inf`.
fn ratio(numerator: f64, denominator: f64) -> f64 {
    if numerator == 0.0 {
        0.0
    } else if denominator == 0.0 {
        f64::INFINITY
    } else {
        numerator.abs() / denominator.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidityReport {
    pub checks: Vec<Check>,
    /// Informational lines and warnings that do not affect grading.
    pub notes: Vec<String>,
}

impl ValidityReport {
    /// Worst status over all checks; `Pass` for an empty report.
    pub fn overall(&self) -> Status {
        self.checks
            .iter()
            .map(|c| c.status)
            .max()
            .unwrap_or(Status::Pass)
    }

    pub fn all_pass(&self) -> bool {
        self.overall() == Status::Pass
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(4)
            .max(5);
        writeln!(
            f,
            "{:<width$}  {:>12}  {:>5}  {:>5}  status",
            "check", "ratio", "pass", "warn"
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<width$}  {:>12.5e}  {:>5}  {:>5}  {}",
                c.name, c.ratio, c.thresholds.pass, c.thresholds.warn, c.status
            )?;
        }
        writeln!(f, "overall: {}", self.overall())?;
        for note in &self.notes {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}

/// A chain of trapped ions driven on the center-of-mass sidebands.
#[derive(Debug, Clone, PartialEq)]
pub struct IonChainSpec {
    pub n_ions: usize,
    /// Normal-mode frequencies; entry 0 is the center-of-mass mode.
    pub mode_freqs: Vec<f64>,
    /// Lamb-Dicke factor `k x0` of the center-of-mass mode. Other modes
    /// scale as `k x_n = k x0 sqrt(omega_0 / omega_n)` since
    /// `x_n = 1 / sqrt(2 M omega_n)`.
    pub lamb_dicke: f64,
    /// Raman Rabi amplitude `Omega_L,j` per ion.
    pub rabi_amplitudes: Vec<f64>,
    /// Target detector gap `W`.
    pub detuning: f64,
}

impl IonChainSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return domain("ion chain needs at least one ion");
        }
        if self.mode_freqs.is_empty() || self.mode_freqs.iter().any(|w| !(*w > 0.0)) {
            return domain("ion chain needs positive mode frequencies, center-of-mass first");
        }
        for (i, a) in self.mode_freqs.iter().enumerate() {
            if self.mode_freqs[..i].contains(a) {
                return domain(format!("mode frequency {a} appears twice"));
            }
        }
        if !(self.lamb_dicke > 0.0) {
            return domain(format!(
                "Lamb-Dicke factor must be positive, got {}",
                self.lamb_dicke
            ));
        }
        if self.rabi_amplitudes.len() != self.n_ions {
            return domain(format!(
                "{} Rabi amplitudes given for {} ions",
                self.rabi_amplitudes.len(),
                self.n_ions
            ));
        }
        if self.rabi_amplitudes.iter().any(|a| !(*a >= 0.0)) {
            return domain("Rabi amplitudes must be >= 0");
        }
        if !(self.detuning >= 0.0) {
            return domain(format!("detuning must be >= 0, got {}", self.detuning));
        }
        Ok(())
    }

    pub fn com_frequency(&self) -> f64 {
        self.mode_freqs[0]
    }

    /// `k x_n` for mode `n`.
    pub fn lamb_dicke_of(&self, mode: usize) -> f64 {
        self.lamb_dicke * (self.com_frequency() / self.mode_freqs[mode]).sqrt()
    }
}

/// `|g_j| = Omega_L,j k x0 / (2 sqrt(N))`, the center-of-mass mode having
/// amplitude `1 / sqrt(N)` on every ion.
pub fn ion_effective_coupling(spec: &IonChainSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let sqrt_n = (spec.n_ions as f64).sqrt();
    Ok(spec
        .rabi_amplitudes
        .iter()
        .map(|a| 0.5 * a * spec.lamb_dicke / sqrt_n)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaserPair {
    pub omega_l1: f64,
    pub omega_l2: f64,
    pub warning: Option<String>,
}

/// `(-omega0 - W, omega0 - W)`; warns unless `W < omega0`.
pub fn ion_laser_frequencies(omega0: f64, gap: f64) -> LaserPair {
    let warning = (gap >= omega0)
        .then(|| format!("detuning {gap} is not below the center-of-mass frequency {omega0}"));
    LaserPair {
        omega_l1: -omega0 - gap,
        omega_l2: omega0 - gap,
        warning,
    }
}

pub fn ion_validity(spec: &IonChainSpec) -> Result<ValidityReport> {
    spec.validate()?;
    let omega0 = spec.com_frequency();
    let mut report = ValidityReport::default();
    for n in 0..spec.mode_freqs.len() {
        report.checks.push(Check::new(
            format!("lamb_dicke[mode {n}]"),
            spec.lamb_dicke_of(n),
            1.0,
        ));
    }
    let worst_ld = (0..spec.mode_freqs.len())
        .map(|n| spec.lamb_dicke_of(n))
        .fold(0.0, f64::max);
    for (j, a) in spec.rabi_amplitudes.iter().enumerate() {
        let half = 0.5 * a;
        report
            .checks
            .push(Check::new(format!("carrier[ion {j}]"), half, omega0));
        report.checks.push(Check::new(
            format!("sideband[ion {j}]"),
            half * worst_ld,
            omega0,
        ));
        let spectator = (1..spec.mode_freqs.len())
            .map(|n| ratio(half * spec.lamb_dicke_of(n), omega0 - spec.mode_freqs[n]))
            .fold(0.0, f64::max);
        report.checks.push(Check {
            name: format!("spectator_modes[ion {j}]"),
            ratio: spectator,
            thresholds: THRESHOLDS,
            status: Status::grade(spectator, THRESHOLDS),
        });
    }
    if let Some(w) = ion_laser_frequencies(omega0, spec.detuning).warning {
        report.notes.push(w);
    }
    if spec.mode_freqs.len() > 1 {
        report.notes.push(
            "only the center-of-mass mode is compiled; more modes need additional lasers on \
             resonance with them"
                .to_string(),
        );
    }
    Ok(report)
}

/// Rabi amplitudes realizing couplings `g` on a chain with Lamb-Dicke
/// factor `lamb_dicke`; inverse of [`ion_effective_coupling`].
pub fn compile_ion(
    couplings: &[f64],
    gap: f64,
    mode_freqs: Vec<f64>,
    lamb_dicke: f64,
) -> Result<IonChainSpec> {
    let n_ions = couplings.len();
    let sqrt_n = (n_ions as f64).sqrt();
    let spec = IonChainSpec {
        n_ions,
        mode_freqs,
        lamb_dicke,
        rabi_amplitudes: couplings
            .iter()
            .map(|g| 2.0 * g * sqrt_n / lamb_dicke)
            .collect(),
        detuning: gap,
    };
    spec.validate()?;
    Ok(spec)
}

/// Flux-modulated qubits coupled to one cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct CqedSpec {
    pub qubit_energy: f64,
    pub cavity_freq: f64,
    pub bare_coupling: f64,
    pub modulation_depths: Vec<f64>,
    pub target_gaps: Vec<f64>,
}

impl CqedSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("qubit energy", self.qubit_energy),
            ("cavity frequency", self.cavity_freq),
            ("bare coupling", self.bare_coupling),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        if self.modulation_depths.len() != self.target_gaps.len() || self.target_gaps.is_empty() {
            return domain("one modulation depth and one target gap per qubit are required");
        }
        if let Some(eta) = self
            .modulation_depths
            .iter()
            .find(|e| !(**e >= 0.0 && **e < 1.0))
        {
            return domain(format!("modulation depth must lie in [0, 1), got {eta}"));
        }
        if let Some(w) = self.target_gaps.iter().find(|w| !(**w >= 0.0)) {
            return domain(format!("target gaps must be >= 0, got {w}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivePair {
    pub omega_d1: f64,
    pub omega_d2: f64,
    pub warnings: Vec<String>,
}

/// Per qubit `(eps - W_j - omega0, eps - W_j + omega0)`, applied verbatim;
/// negative or zero results are flagged, not rejected.
pub fn cqed_drive_frequencies(spec: &CqedSpec) -> Result<Vec<DrivePair>> {
    spec.validate()?;
    Ok(spec
        .target_gaps
        .iter()
        .enumerate()
        .map(|(j, w)| {
            let base = spec.qubit_energy - w;
            let omega_d1 = base - spec.cavity_freq;
            let omega_d2 = base + spec.cavity_freq;
            let mut warnings = Vec::new();
            for (label, f) in [("d1", omega_d1), ("d2", omega_d2)] {
                if f < 0.0 {
                    warnings.push(format!(
                        "qubit {j}: negative drive frequency omega_{label} = {f}"
                    ));
                } else if f == 0.0 {
                    warnings.push(format!("qubit {j}: zero drive frequency omega_{label}"));
                }
            }
            DrivePair {
                omega_d1,
                omega_d2,
                warnings,
            }
        })
        .collect())
}

/// `g_j = g0 eta_j`.
pub fn cqed_effective_coupling(spec: &CqedSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    Ok(spec
        .modulation_depths
        .iter()
        .map(|eta| spec.bare_coupling * eta)
        .collect())
}

/// Ratios `eta_j`, `g0/eps`, `g0/omega0`, `g0/|eps - omega0|` and
/// `alpha / min |omega_d|` (the drive phase varies at rate `alpha`).
pub fn cqed_validity(spec: &CqedSpec, alpha: f64) -> Result<ValidityReport> {
    let drives = cqed_drive_frequencies(spec)?;
    let mut report = ValidityReport::default();
    for (j, eta) in spec.modulation_depths.iter().enumerate() {
        report
            .checks
            .push(Check::new(format!("eta[qubit {j}]"), *eta, 1.0));
    }
    let g0 = spec.bare_coupling;
    report
        .checks
        .push(Check::new("g0/epsilon", g0, spec.qubit_energy));
    report
        .checks
        .push(Check::new("g0/omega0", g0, spec.cavity_freq));
    report.checks.push(Check::new(
        "g0/|epsilon-omega0|",
        g0,
        spec.qubit_energy - spec.cavity_freq,
    ));
    let slowest = drives
        .iter()
        .flat_map(|d| [d.omega_d1.abs(), d.omega_d2.abs()])
        .fold(f64::INFINITY, f64::min);
    report
        .checks
        .push(Check::new("alpha/omega_d_min", alpha, slowest));
    report
        .notes
        .extend(drives.into_iter().flat_map(|d| d.warnings));
    Ok(report)
}

/// Modulation depths and gaps realizing couplings `g` with bare coupling
/// `g0`; inverse of [`cqed_effective_coupling`].
pub fn compile_cqed(
    couplings: &[f64],
    gaps: &[f64],
    qubit_energy: f64,
    cavity_freq: f64,
    bare_coupling: f64,
) -> Result<CqedSpec> {
    let spec = CqedSpec {
        qubit_energy,
        cavity_freq,
        bare_coupling,
        modulation_depths: couplings.iter().map(|g| g / bare_coupling).collect(),
        target_gaps: gaps.to_vec(),
    };
    spec.validate()?;
    Ok(spec)
}

/// Sampled control phases `phi1 = Phi`, `phi2 = -Phi`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    pub tau: Vec<f64>,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    /// Carrier frequencies the phases ride on, labelled.
    pub drive_frequencies: Vec<(String, f64)>,
}

impl PhaseSchedule {
    pub fn with_drive_frequencies(mut self, drives: Vec<(String, f64)>) -> Self {
        self.drive_frequencies = drives;
        self
    }
}

/// Largest grid spacing accepted for a phase rotating at `max_rate`:
/// a tenth of its period.
pub fn required_spacing(max_rate: f64) -> f64 {
    std::f64::consts::TAU / max_rate / 10.0
}

pub fn phase_schedule(
    worldline: &Worldline,
    mode: &ModeSpec,
    tau_grid: &[f64],
) -> Result<PhaseSchedule> {
    if tau_grid.len() < 2 {
        return domain("phase schedule needs at least two grid points");
    }
    if let Some(i) = tau_grid.windows(2).position(|w| !(w[1] > w[0])) {
        return domain(format!(
            "schedule grid not strictly increasing at index {}",
            i + 1
        ));
    }
    let mut max_rate = 0.0_f64;
    let mut phi1 = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        max_rate = max_rate.max(worldline.effective_frequency(mode, tau)?.abs());
        phi1.push(worldline.phase(mode, tau)?);
    }
    let spacing = tau_grid.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if max_rate > 0.0 {
        let required = required_spacing(max_rate);
        if spacing > required {
            return Err(Error::Sampling { spacing, required });
        }
    }
    let phi2 = phi1.iter().map(|p| -p).collect();
    Ok(PhaseSchedule {
        tau: tau_grid.to_vec(),
        phi1,
        phi2,
        drive_frequencies: Vec::new(),
    })
}

/// Time over which an exponential phase ramp at rate `alpha` changes by a
/// factor `e`.
pub fn characteristic_time(alpha: f64) -> f64 {
    1.0 / alpha
}
