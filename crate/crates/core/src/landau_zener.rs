// SPDX-License-Identifier: Apache-2.0

//! Effective two-level picture of a single accelerated detector.
//!
//! In the frame rotating with the field phase, the mode frequency chirps as
//! `omega_eff(tau) = omega0 e^{-alpha tau}`, so the gap between `|e 0>` and
//! `|g 1>` is `dE(tau) = omega0 e^{-alpha tau} - W`. It closes at
//! `tau_c = ln(omega0 / W) / alpha` with sweep rate `|dE'(tau_c)| = alpha W`,
//! and the Landau-Zener exponent is `Gamma = g^2 / (alpha W)`.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::evolve::{evolve, IntegratorConfig};
use crate::hamiltonian::ModelSpec;
use crate::hilbert::{BasisIndex, StateVector};
use crate::observables::Observer;
use crate::trajectory::Worldline;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzSetup {
    pub g: f64,
    pub omega0: f64,
    pub gap: f64,
    pub alpha: f64,
}

impl LzSetup {
    /// `g >= 0`; the remaining parameters must be positive. The crossing
    /// condition `omega0 > gap` is checked by the operations that need it.
    pub fn new(g: f64, omega0: f64, gap: f64, alpha: f64) -> Result<Self> {
        if !(g >= 0.0 && g.is_finite()) {
            return domain(format!("coupling must be finite and >= 0, got {g}"));
        }
        for (name, v) in [("omega0", omega0), ("gap", gap), ("alpha", alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive and finite, got {v}"));
            }
        }
        Ok(Self {
            g,
            omega0,
            gap,
            alpha,
        })
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::new(self.g, self.omega0, self.gap, alpha)
    }

    /// Single-detector, single-mode model on the uniformly accelerated
    /// worldline.
    pub fn model(&self, n_max: usize) -> Result<ModelSpec> {
        ModelSpec::single(
            self.gap,
            self.omega0,
            self.g,
            n_max,
            Worldline::uniform(self.alpha)?,
        )
    }
}

/// `omega0 e^{-alpha tau} - W`.
pub fn energy_gap(setup: &LzSetup, tau: f64) -> f64 {
    setup.omega0 * (-setup.alpha * tau).exp() - setup.gap
}

/// `d/dtau` of [`energy_gap`].
pub fn energy_gap_slope(setup: &LzSetup, tau: f64) -> f64 {
    -setup.alpha * setup.omega0 * (-setup.alpha * tau).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub tau: f64,
    /// Set when `omega0 == gap`: the levels touch at `tau = 0` and
    /// separate immediately.
    pub degenerate: bool,
}

/// Crossing time `ln(omega0 / W) / alpha`. `omega0 == W` yields
/// `tau_c = 0` flagged as degenerate; `omega0 < W` has no crossing.
pub fn crossing(setup: &LzSetup) -> Result<Crossing> {
    if setup.omega0 < setup.gap {
        return Err(Error::NoCrossing {
            omega0: setup.omega0,
            gap: setup.gap,
        });
    }
    Ok(Crossing {
        tau: (setup.omega0 / setup.gap).ln() / setup.alpha,
        degenerate: setup.omega0 == setup.gap,
    })
}

/// Crossing time; requires `omega0 > W` strictly.
pub fn crossing_time(setup: &LzSetup) -> Result<f64> {
    match crossing(setup)? {
        Crossing {
            degenerate: true, ..
        } => Err(Error::NoCrossing {
            omega0: setup.omega0,
            gap: setup.gap,
        }),
        c => Ok(c.tau),
    }
}

/// `g^2 / |dE'(tau_c)| = g^2 / (alpha W)`.
pub fn lz_gamma(setup: &LzSetup) -> Result<f64> {
    crossing_time(setup)?;
    Ok(setup.g * setup.g / (setup.alpha * setup.gap))
}

/// `(P_excited, P_ground) = (e^{-2 pi Gamma}, 1 - e^{-2 pi Gamma})`.
pub fn lz_probability(gamma: f64) -> Result<(f64, f64)> {
    if !(gamma >= 0.0) {
        return domain(format!("Landau-Zener exponent must be >= 0, got {gamma}"));
    }
    let excited = (-std::f64::consts::TAU * gamma).exp();
    Ok((excited, 1.0 - excited))
}

/// End of an "asymptotic" run:
/// `max(tau_c + 10 / sqrt(alpha W), 3 tau_c)`.
pub fn asymptotic_end_time(setup: &LzSetup) -> Result<f64> {
    let tc = crossing_time(setup)?;
    Ok((tc + 10.0 / (setup.alpha * setup.gap).sqrt()).max(3.0 * tc))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub n_max: usize,
    pub integrator: IntegratorConfig,
    /// Worker threads; `None` uses every available processor.
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_max: 3,
            integrator: IntegratorConfig::default(),
            workers: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub gamma: f64,
    pub p_excited_sim: f64,
    pub p_excited_lz: f64,
    pub abs_dev: f64,
}

/// Evolves `|e 0>` over `[0, asymptotic_end_time]` for one acceleration and
/// compares the final excited population with the Landau-Zener value.
pub fn sweep_point(base: &LzSetup, alpha: f64, config: &SweepConfig) -> Result<SweepRow> {
    let setup = base.with_alpha(alpha)?;
    let gamma = lz_gamma(&setup)?;
    let (p_excited_lz, _) = lz_probability(gamma)?;
    let model = setup.model(config.n_max)?;
    let psi0 = StateVector::basis(model.space().clone(), &BasisIndex::excited_vacuum(1, 1))?;
    let tau_end = asymptotic_end_time(&setup)?;
    let result = evolve(
        &model,
        &psi0,
        (0.0, tau_end),
        &config.integrator,
        &[Observer::ExcitedPopulation(0)],
    )?;
    let p_excited_sim = *result.observables[0]
        .values
        .last()
        .expect("series always holds the start point");
    Ok(SweepRow {
        alpha,
        gamma,
        p_excited_sim,
        p_excited_lz,
        abs_dev: (p_excited_sim - p_excited_lz).abs(),
    })
}

/// [`sweep_point`] for every `alpha`, run in parallel; rows keep input
/// order.
pub fn sweep_acceleration(
    base: &LzSetup,
    alphas: &[f64],
    config: &SweepConfig,
) -> Result<Vec<SweepRow>> {
    if alphas.is_empty() {
        return domain("acceleration sweep needs at least one alpha");
    }
    let run = || {
        alphas
            .par_iter()
            .map(|&alpha| sweep_point(base, alpha, config))
            .collect::<Result<Vec<_>>>()
    };
    match config.workers {
        None => Ok(run()?),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::RejectedConfig(format!("cannot start worker pool: {e}")))?
            .install(run),
    }
}
