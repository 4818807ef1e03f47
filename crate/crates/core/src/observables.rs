// SPDX-License-Identifier: Apache-2.0

//! Populations and occupations read off a [`StateVector`]. Values are never
//! clamped here; integrator drift stays visible.

use crate::error::Result;
use crate::hilbert::StateVector;

/// Probability that `detector` is found in its ground state.
pub fn ground_population(state: &StateVector, detector: usize) -> Result<f64> {
    spin_population(state, detector, false)
}

pub fn excited_population(state: &StateVector, detector: usize) -> Result<f64> {
    spin_population(state, detector, true)
}

fn spin_population(state: &StateVector, detector: usize, excited: bool) -> Result<f64> {
    let space = state.space();
    space.check_detector(detector)?;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| space.spin_bit(*i, detector) == excited)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// `<a†_m a_m>`.
pub fn mode_occupation(state: &StateVector, mode: usize) -> Result<f64> {
    let space = state.space();
    space.check_mode(mode)?;
    Ok(state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| space.occupation(i, mode) as f64 * a.norm_sqr())
        .sum())
}

/// Probability of each spin configuration, indexed with detector 0 as the
/// most significant bit (1 = excited).
pub fn joint_spin_distribution(state: &StateVector) -> Vec<f64> {
    let space = state.space();
    let mut table = vec![0.0; space.n_spin_configs()];
    for (i, a) in state.amplitudes().iter().enumerate() {
        table[space.spin_config(i)] += a.norm_sqr();
    }
    table
}

/// `<sum_j s+_j s-_j + sum_m a†_m a_m>`; conserved only under the
/// rotating-wave diagnostic Hamiltonian.
pub fn excitation_number(state: &StateVector) -> f64 {
    let space = state.space();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let spins = (0..space.n_detectors())
                .filter(|&j| space.spin_bit(i, j))
                .count();
            let quanta: usize = (0..space.n_modes()).map(|m| space.occupation(i, m)).sum();
            (spins + quanta) as f64 * a.norm_sqr()
        })
        .sum()
}

/// A quantity recorded during evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Observer {
    GroundPopulation(usize),
    ExcitedPopulation(usize),
    ModeOccupation(usize),
    Norm,
}

impl Observer {
    pub fn name(&self) -> String {
        match self {
            Self::GroundPopulation(j) => format!("p_ground_{j}"),
            Self::ExcitedPopulation(j) => format!("p_excited_{j}"),
            Self::ModeOccupation(m) => format!("n_mode_{m}"),
            Self::Norm => "norm".to_string(),
        }
    }

    pub fn measure(&self, state: &StateVector) -> Result<f64> {
        match *self {
            Self::GroundPopulation(j) => ground_population(state, j),
            Self::ExcitedPopulation(j) => excited_population(state, j),
            Self::ModeOccupation(m) => mode_occupation(state, m),
            Self::Norm => Ok(state.norm()),
        }
    }

    /// The evolve CSV column set: ground population of every detector,
    /// occupation of every mode, then the norm.
    pub fn standard_set(n_detectors: usize, n_modes: usize) -> Vec<Observer> {
        (0..n_detectors)
            .map(Self::GroundPopulation)
            .chain((0..n_modes).map(Self::ModeOccupation))
            .chain(std::iter::once(Self::Norm))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{BasisIndex, SpaceSpec};
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ket(e: bool, n: usize) -> BasisIndex {
        BasisIndex::new(vec![e], vec![n])
    }

    #[test]
    fn ground_population_examples() {
        let space = SpaceSpec::new(1, vec![2]).unwrap();
        let e0 = StateVector::basis(space.clone(), &ket(true, 0)).unwrap();
        assert_eq!(ground_population(&e0, 0).unwrap(), 0.0);
        let g1 = StateVector::basis(space.clone(), &ket(false, 1)).unwrap();
        assert_eq!(ground_population(&g1, 0).unwrap(), 1.0);
        let sup =
            StateVector::superposition(space, &[(c(1.0), ket(true, 0)), (c(1.0), ket(false, 1))])
                .unwrap();
        let p = ground_population(&sup, 0).unwrap();
        assert!((p - 0.5).abs() < 1e-15);
        assert!((p + excited_population(&sup, 0).unwrap() - 1.0).abs() < 1e-12);
        assert!(ground_population(&sup, 1).is_err());
    }

    #[test]
    fn mode_occupation_examples() {
        let space = SpaceSpec::new(1, vec![2]).unwrap();
        let e0 = StateVector::basis(space.clone(), &ket(true, 0)).unwrap();
        assert_eq!(mode_occupation(&e0, 0).unwrap(), 0.0);
        let g2 = StateVector::basis(space.clone(), &ket(false, 2)).unwrap();
        assert_eq!(mode_occupation(&g2, 0).unwrap(), 2.0);
        let sup =
            StateVector::superposition(space, &[(c(1.0), ket(false, 0)), (c(1.0), ket(false, 2))])
                .unwrap();
        assert!((mode_occupation(&sup, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(mode_occupation(&sup, 1).is_err());
    }

    #[test]
    fn joint_distribution_examples() {
        let space = SpaceSpec::new(2, vec![1]).unwrap();
        let prod = StateVector::basis(space.clone(), &BasisIndex::new(vec![true, false], vec![1]))
            .unwrap();
        assert_eq!(joint_spin_distribution(&prod), vec![0.0, 0.0, 1.0, 0.0]);

        let bell = StateVector::superposition(
            space,
            &[
                (c(1.0), BasisIndex::new(vec![false, true], vec![0])),
                (c(1.0), BasisIndex::new(vec![true, false], vec![0])),
            ],
        )
        .unwrap();
        let table = joint_spin_distribution(&bell);
        assert!((table[0b01] - 0.5).abs() < 1e-15 && (table[0b10] - 0.5).abs() < 1e-15);
        assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // marginal of detector 0 (most significant bit)
        let ground0: f64 = table
            .iter()
            .enumerate()
            .filter(|(k, _)| k & 0b10 == 0)
            .map(|(_, p)| p)
            .sum();
        assert!((ground0 - ground_population(&bell, 0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn observer_names() {
        let set = Observer::standard_set(2, 1);
        let names: Vec<_> = set.iter().map(Observer::name).collect();
        assert_eq!(names, ["p_ground_0", "p_ground_1", "n_mode_0", "norm"]);
    }

    #[test]
    fn excitation_number_counts_spins_and_quanta() {
        let space = SpaceSpec::new(2, vec![3]).unwrap();
        let s = StateVector::basis(space, &BasisIndex::new(vec![true, true], vec![2])).unwrap();
        assert_eq!(excitation_number(&s), 4.0);
    }
}
