// SPDX-License-Identifier: Apache-2.0

//! Detector worldlines and the field phase `Phi_m(tau) = omega_m t(tau) - k_m x(tau)`
//! they induce on each mode.
//!
//! The dynamical core works in units with `hbar = c = 1` and frequencies
//! measured in a reference frequency; `c` only appears explicitly in the
//! kinematic helpers [`rindler_to_minkowski`] and [`alpha_from_black_hole`].

use std::path::Path;

use crate::error::{domain, Error, Result};
use crate::interp::MonotoneCubic;

/// Smallest redshift factor accepted by [`alpha_from_black_hole`].
pub const MIN_REDSHIFT_FACTOR: f64 = 1e-12;

/// One bosonic field mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpec {
    pub omega: f64,
    pub k: f64,
    pub n_max: usize,
}

impl ModeSpec {
    pub fn new(omega: f64, k: f64, n_max: usize) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return domain(format!(
                "mode frequency must be positive and finite, got {omega}"
            ));
        }
        if !k.is_finite() {
            return domain(format!("mode wavenumber must be finite, got {k}"));
        }
        if n_max == 0 {
            return domain("mode truncation n_max must be at least 1");
        }
        Ok(Self { omega, k, n_max })
    }

    /// Massless mode, `k = omega / c` with `c = 1`.
    pub fn massless(omega: f64, n_max: usize) -> Result<Self> {
        Self::new(omega, omega, n_max)
    }

    pub fn is_massless(&self) -> bool {
        (self.k - self.omega).abs() <= 4.0 * f64::EPSILON * self.omega
    }

    pub fn with_truncation(self, n_max: usize) -> Self {
        Self { n_max, ..self }
    }
}

/// Sampled trajectory stored in light-cone coordinates `u = t - x`,
/// `v = t + x`; both are strictly increasing along a timelike path, so
/// monotone interpolation keeps every interpolated segment timelike.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWorldline {
    u: MonotoneCubic,
    v: MonotoneCubic,
}

impl SampledWorldline {
    /// Builds from proper-time samples of Minkowski coordinates.
    pub fn new(tau: Vec<f64>, t: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if tau.len() < 2 || tau.len() != t.len() || tau.len() != x.len() {
            return domain(format!(
                "sampled worldline needs >= 2 samples of equal length (got tau {}, t {}, x {})",
                tau.len(),
                t.len(),
                x.len()
            ));
        }
        if tau.iter().chain(&t).chain(&x).any(|v| !v.is_finite()) {
            return domain("sampled worldline contains non-finite values");
        }
        for i in 1..tau.len() {
            if tau[i] <= tau[i - 1] {
                return domain(format!(
                    "proper-time grid not strictly increasing at sample {i}"
                ));
            }
            let (dt, dx) = (t[i] - t[i - 1], x[i] - x[i - 1]);
            if dt <= dx.abs() {
                return domain(format!(
                    "segment {} -> {i} is not timelike (dt = {dt}, dx = {dx})",
                    i - 1
                ));
            }
        }
        let u = t.iter().zip(&x).map(|(t, x)| t - x).collect();
        let v = t.iter().zip(&x).map(|(t, x)| t + x).collect();
        Ok(Self {
            u: MonotoneCubic::new(tau.clone(), u),
            v: MonotoneCubic::new(tau, v),
        })
    }

    /// Builds from coordinate-time samples `(t, x)`, assigning proper time
    /// along the piecewise-linear path: `dtau = sqrt(dt^2 - dx^2)`.
    pub fn from_coordinate_samples(t: Vec<f64>, x: Vec<f64>) -> Result<Self> {
        if t.len() != x.len() || t.is_empty() {
            return domain("coordinate samples must be nonempty and of equal length");
        }
        let mut tau = Vec::with_capacity(t.len());
        tau.push(0.0);
        for i in 1..t.len() {
            let (dt, dx) = (t[i] - t[i - 1], x[i] - x[i - 1]);
            if dt <= dx.abs() {
                return domain(format!(
                    "segment {} -> {i} is not timelike (dt = {dt}, dx = {dx})",
                    i - 1
                ));
            }
            tau.push(tau[i - 1] + ((dt - dx) * (dt + dx)).sqrt());
        }
        Self::new(tau, t, x)
    }

    /// Reads a comma-separated file of `tau,t,x` rows, or `t,x` rows (proper
    /// time then follows from [`Self::from_coordinate_samples`]). Blank lines
    /// and lines starting with `#` are skipped.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {line}: {message}"),
        };
        let mut columns: Option<usize> = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| parse_err(lineno + 1, e.to_string()))?;
            match (columns, row.len()) {
                (_, n) if n != 2 && n != 3 => {
                    return Err(parse_err(
                        lineno + 1,
                        format!("expected 2 or 3 columns, found {n}"),
                    ))
                }
                (Some(c), n) if c != n => {
                    return Err(parse_err(
                        lineno + 1,
                        format!("expected {c} columns, found {n}"),
                    ))
                }
                _ => columns = Some(row.len()),
            }
            rows.push(row);
        }
        let column = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
        let built = match columns {
            Some(3) => Self::new(column(0), column(1), column(2)),
            Some(_) => Self::from_coordinate_samples(column(0), column(1)),
            None => return Err(parse_err(0, "no samples".into())),
        };
        built.map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn tau_range(&self) -> (f64, f64) {
        (self.u.start(), self.u.end())
    }

    fn check(&self, tau: f64) -> Result<()> {
        let (start, end) = self.tau_range();
        if !(start..=end).contains(&tau) {
            return Err(Error::Extrapolation { tau, start, end });
        }
        Ok(())
    }

    /// Interpolated `(t, x)` at proper time `tau`.
    pub fn coordinates(&self, tau: f64) -> Result<(f64, f64)> {
        self.check(tau)?;
        let (u, v) = (self.u.eval(tau), self.v.eval(tau));
        Ok((0.5 * (u + v), 0.5 * (v - u)))
    }

    fn phase(&self, mode: &ModeSpec, tau: f64) -> Result<f64> {
        self.check(tau)?;
        // omega t - k x = (omega + k)/2 u + (omega - k)/2 v
        let u = self.u.eval(tau);
        let cu = 0.5 * (mode.omega + mode.k);
        let cv = 0.5 * (mode.omega - mode.k);
        Ok(if cv == 0.0 {
            cu * u
        } else {
            cu * u + cv * self.v.eval(tau)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Worldline {
    /// Hyperbolic motion with proper acceleration `alpha = a / c`. With
    /// `xi = None` the detector sits at the Rindler position `xi = c^2 / a`
    /// and the phase takes its closed form for massless modes.
    UniformAcceleration {
        alpha: f64,
        xi: Option<f64>,
    },
    /// Constant velocity (fraction of `c`) through `x0` at `t = 0`.
    Inertial {
        velocity: f64,
        x0: f64,
    },
    CustomSampled(SampledWorldline),
}

impl Worldline {
    pub fn uniform(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!(
                "acceleration frequency alpha must be positive, got {alpha}"
            ));
        }
        Ok(Self::UniformAcceleration { alpha, xi: None })
    }

    /// Hyperbolic worldline at an arbitrary Rindler position `xi`.
    pub fn rindler(alpha: f64, xi: f64) -> Result<Self> {
        Self::uniform(alpha)?;
        if !(xi > 0.0 && xi.is_finite()) {
            return domain(format!("Rindler position xi must be positive, got {xi}"));
        }
        Ok(Self::UniformAcceleration {
            alpha,
            xi: Some(xi),
        })
    }

    pub fn inertial(velocity: f64, x0: f64) -> Result<Self> {
        if !(velocity.abs() < 1.0) || !x0.is_finite() {
            return domain(format!(
                "inertial worldline needs |velocity| < 1, got {velocity}"
            ));
        }
        Ok(Self::Inertial { velocity, x0 })
    }

    pub fn at_rest() -> Self {
        Self::Inertial {
            velocity: 0.0,
            x0: 0.0,
        }
    }

    /// `(t, x)` at proper time `tau`, with `c = 1`.
    pub fn coordinates(&self, tau: f64) -> Result<(f64, f64)> {
        match self {
            Self::UniformAcceleration { alpha, xi } => {
                rindler_to_minkowski(tau, xi.unwrap_or(1.0 / alpha), *alpha, 1.0)
            }
            Self::Inertial { velocity, x0 } => {
                let gamma = lorentz_gamma(*velocity);
                Ok((gamma * tau, x0 + velocity * gamma * tau))
            }
            Self::CustomSampled(s) => s.coordinates(tau),
        }
    }

    /// Field phase `Phi_m(tau)` seen by a detector on this worldline.
    pub fn phase(&self, mode: &ModeSpec, tau: f64) -> Result<f64> {
        match self {
            Self::UniformAcceleration { alpha, xi: None } if mode.is_massless() => {
                Ok(-(mode.omega / alpha) * (-alpha * tau).exp())
            }
            Self::CustomSampled(s) => s.phase(mode, tau),
            _ => {
                let (t, x) = self.coordinates(tau)?;
                Ok(mode.omega * t - mode.k * x)
            }
        }
    }

    /// `d Phi_m / d tau`.
    pub fn effective_frequency(&self, mode: &ModeSpec, tau: f64) -> Result<f64> {
        match self {
            Self::UniformAcceleration { alpha, xi: None } if mode.is_massless() => {
                Ok(mode.omega * (-alpha * tau).exp())
            }
            Self::UniformAcceleration { alpha, xi } => {
                let xi = xi.unwrap_or(1.0 / alpha);
                let (s, c) = ((alpha * tau).sinh(), (alpha * tau).cosh());
                Ok(xi * alpha * (mode.omega * c - mode.k * s))
            }
            Self::Inertial { velocity, .. } => {
                Ok(lorentz_gamma(*velocity) * (mode.omega - mode.k * velocity))
            }
            Self::CustomSampled(s) => {
                let (start, end) = s.tau_range();
                s.check(tau)?;
                let h = 1e-6 * tau.abs().max(1.0);
                let lo = (tau - h).max(start);
                let hi = (tau + h).min(end);
                Ok((s.phase(mode, hi)? - s.phase(mode, lo)?) / (hi - lo))
            }
        }
    }

    /// Largest `|d Phi / d tau|` over `[tau0, tau1]`. Exact at the endpoint
    /// for the monotone closed-form and inertial cases; sampled otherwise.
    pub fn max_effective_frequency(&self, mode: &ModeSpec, tau0: f64, tau1: f64) -> Result<f64> {
        let at = |t: f64| self.effective_frequency(mode, t).map(f64::abs);
        match self {
            Self::UniformAcceleration { xi: None, .. } if mode.is_massless() => at(tau0),
            Self::Inertial { .. } => at(tau0),
            _ => {
                const SAMPLES: usize = 1024;
                (0..=SAMPLES).try_fold(0.0_f64, |acc, i| {
                    let t = tau0 + (tau1 - tau0) * i as f64 / SAMPLES as f64;
                    Ok(acc.max(at(t.min(tau1))?))
                })
            }
        }
    }
}

fn lorentz_gamma(velocity: f64) -> f64 {
    1.0 / ((1.0 - velocity) * (1.0 + velocity)).sqrt()
}

/// Minkowski `(t, x)` of the Rindler point `(tau, xi)`:
/// `c t = xi sinh(alpha tau)`, `x = xi cosh(alpha tau)`.
pub fn rindler_to_minkowski(tau: f64, xi: f64, alpha: f64, c: f64) -> Result<(f64, f64)> {
    if !(xi > 0.0) {
        return domain(format!("Rindler position xi must be positive, got {xi}"));
    }
    if !(c > 0.0) {
        return domain(format!("speed of light must be positive, got {c}"));
    }
    let eta = alpha * tau;
    Ok((xi * eta.sinh() / c, xi * eta.cosh()))
}

/// Small-acceleration expansion of the uniform-acceleration phase,
/// `-omega/alpha + omega tau - omega alpha tau^2 / 2`. The constant term is
/// dropped when `absorb_constant` is set.
pub fn nonrelativistic_phase(
    mode: &ModeSpec,
    alpha: f64,
    tau: f64,
    absorb_constant: bool,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return domain(format!(
            "acceleration frequency alpha must be positive, got {alpha}"
        ));
    }
    let constant = if absorb_constant {
        0.0
    } else {
        -mode.omega / alpha
    };
    Ok(constant + mode.omega * tau - 0.5 * mode.omega * alpha * tau * tau)
}

/// Acceleration frequency of a static detector near a horizon,
/// `alpha = kappa / (c sqrt(f0))`.
pub fn alpha_from_black_hole(kappa: f64, f0: f64, c: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return domain(format!("surface gravity must be positive, got {kappa}"));
    }
    if !(c > 0.0) {
        return domain(format!("speed of light must be positive, got {c}"));
    }
    if !(f0 > 0.0 && f0 <= 1.0) {
        return domain(format!("redshift factor must lie in (0, 1], got {f0}"));
    }
    if f0 < MIN_REDSHIFT_FACTOR {
        return domain(format!(
            "redshift factor {f0} below {MIN_REDSHIFT_FACTOR}: acceleration diverges at the horizon"
        ));
    }
    Ok(kappa / (c * f0.sqrt()))
}
