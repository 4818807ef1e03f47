// SPDX-License-Identifier: Apache-2.0

//! Composite detector ⊗ mode Hilbert space with hard Fock truncation.
//!
//! Basis kets are ordered lexicographically over
//! `(s_0, .., s_{N-1}, n_0, .., n_{M-1})`: spins are the major digits
//! (detector 0 most significant), mode occupations the minor digits
//! (mode 0 most significant among modes). A spin digit is 0 for the ground
//! state `g` and 1 for the excited state `e`. For one detector and one mode
//! with `n_max = 1` this gives `|g0>, |g1>, |e0>, |e1>` at indices 0..4.
//!
//! Truncation is hard: `a† |n_max> = 0`. The canonical commutator
//! `[a, a†] = 1` therefore holds on occupations below `n_max` and fails on
//! `|n_max>`, where it evaluates to `-n_max`.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

/// Largest composite dimension accepted by [`SpaceSpec::new`].
pub const DIMENSION_CAP: usize = 1 << 18;

/// Tolerance on `| ||psi||^2 - 1 |` enforced by [`StateVector::new`].
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceSpec {
    n_detectors: usize,
    mode_truncations: Vec<usize>,
    mode_block: usize,
    dim: usize,
}

impl SpaceSpec {
    /// Builds a space of `n_detectors` qubits and one bosonic factor per
    /// entry of `mode_truncations` (occupations `0..=n_max`).
    pub fn new(n_detectors: usize, mode_truncations: Vec<usize>) -> Result<Self> {
        if n_detectors == 0 {
            return domain("at least one detector is required");
        }
        if let Some(m) = mode_truncations.iter().position(|&n| n == 0) {
            return domain(format!(
                "mode {m} has truncation n_max = 0; need n_max >= 1"
            ));
        }
        let dim = dimension(n_detectors, &mode_truncations)?;
        let mode_block = dim >> n_detectors;
        Ok(Self {
            n_detectors,
            mode_truncations,
            mode_block,
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    pub fn n_modes(&self) -> usize {
        self.mode_truncations.len()
    }

    pub fn mode_truncations(&self) -> &[usize] {
        &self.mode_truncations
    }

    pub fn n_max(&self, mode: usize) -> usize {
        self.mode_truncations[mode]
    }

    /// Number of spin configurations, `2^N`.
    pub fn n_spin_configs(&self) -> usize {
        1 << self.n_detectors
    }

    /// Size of the bosonic factor, `prod_m (n_max,m + 1)`.
    pub fn mode_block(&self) -> usize {
        self.mode_block
    }

    pub(crate) fn spin_stride(&self, detector: usize) -> usize {
        self.mode_block << (self.n_detectors - 1 - detector)
    }

    pub(crate) fn mode_stride(&self, mode: usize) -> usize {
        self.mode_truncations[mode + 1..]
            .iter()
            .map(|n| n + 1)
            .product()
    }

    pub(crate) fn check_detector(&self, detector: usize) -> Result<()> {
        if detector >= self.n_detectors {
            return domain(format!(
                "detector index {detector} out of range (N = {})",
                self.n_detectors
            ));
        }
        Ok(())
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return domain(format!(
                "mode index {mode} out of range (M = {})",
                self.n_modes()
            ));
        }
        Ok(())
    }

    /// Spin bit of `detector` in basis ket `index`.
    pub fn spin_bit(&self, index: usize, detector: usize) -> bool {
        (index / self.spin_stride(detector)) & 1 == 1
    }

    /// Occupation of `mode` in basis ket `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.mode_stride(mode)) % (self.mode_truncations[mode] + 1)
    }

    /// Spin configuration of basis ket `index`, packed with detector 0 as
    /// the most significant bit.
    pub fn spin_config(&self, index: usize) -> usize {
        index / self.mode_block
    }

    pub fn flat_index(&self, basis: &BasisIndex) -> Result<usize> {
        if basis.spins.len() != self.n_detectors || basis.occupations.len() != self.n_modes() {
            return domain(format!(
                "basis ket has {} spins and {} occupations; space has {} detectors and {} modes",
                basis.spins.len(),
                basis.occupations.len(),
                self.n_detectors,
                self.n_modes()
            ));
        }
        let mut spin = 0;
        for &s in &basis.spins {
            spin = (spin << 1) | usize::from(s);
        }
        let mut modes = 0;
        for (m, (&n, &n_max)) in basis
            .occupations
            .iter()
            .zip(&self.mode_truncations)
            .enumerate()
        {
            if n > n_max {
                return domain(format!(
                    "occupation {n} of mode {m} exceeds n_max = {n_max}"
                ));
            }
            modes = modes * (n_max + 1) + n;
        }
        Ok(spin * self.mode_block + modes)
    }

    pub fn unflatten(&self, index: usize) -> Result<BasisIndex> {
        if index >= self.dim {
            return domain(format!(
                "flat index {index} out of range (dim = {})",
                self.dim
            ));
        }
        Ok(BasisIndex {
            spins: (0..self.n_detectors)
                .map(|j| self.spin_bit(index, j))
                .collect(),
            occupations: (0..self.n_modes())
                .map(|m| self.occupation(index, m))
                .collect(),
        })
    }

    /// Same space with every mode truncated at `n_max`.
    pub fn with_uniform_truncation(&self, n_max: usize) -> Result<Self> {
        Self::new(self.n_detectors, vec![n_max; self.n_modes()])
    }
}

/// `2^N * prod_m (n_max,m + 1)`, rejecting anything above [`DIMENSION_CAP`].
pub fn dimension(n_detectors: usize, mode_truncations: &[usize]) -> Result<usize> {
    let too_big = || {
        Error::RejectedConfig(format!(
            "Hilbert space of {n_detectors} detectors and truncations {mode_truncations:?} \
             exceeds the dimension cap of {DIMENSION_CAP}"
        ))
    };
    let spins = u32::try_from(n_detectors)
        .ok()
        .and_then(|n| 1usize.checked_shl(n))
        .filter(|&s| s <= DIMENSION_CAP)
        .ok_or_else(too_big)?;
    mode_truncations
        .iter()
        .try_fold(spins, |acc, &n| {
            acc.checked_mul(n.checked_add(1)?)
                .filter(|&d| d <= DIMENSION_CAP)
        })
        .ok_or_else(too_big)
}

/// A product basis ket `|s_0 .. s_{N-1}; n_0 .. n_{M-1}>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    /// `true` = excited.
    pub spins: Vec<bool>,
    pub occupations: Vec<usize>,
}

impl BasisIndex {
    pub fn new(spins: Vec<bool>, occupations: Vec<usize>) -> Self {
        Self { spins, occupations }
    }

    /// All detectors excited, every mode in vacuum: the `|e 0>` initial
    /// condition generalized to N detectors.
    pub fn excited_vacuum(n_detectors: usize, n_modes: usize) -> Self {
        Self::new(vec![true; n_detectors], vec![0; n_modes])
    }
}

/// Complex amplitudes over a [`SpaceSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    space: SpaceSpec,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Normalized state; rejects amplitudes whose squared norm is off by
    /// more than [`NORM_TOLERANCE`].
    pub fn new(space: SpaceSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self::from_amplitudes(space, amplitudes)?;
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOLERANCE {
            return domain(format!("state is not normalized: ||psi||^2 = {n2}"));
        }
        Ok(state)
    }

    /// Arbitrary (possibly unnormalized) vector; only the length is checked.
    pub fn from_amplitudes(space: SpaceSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return domain(format!(
                "{} amplitudes given for a space of dimension {}",
                amplitudes.len(),
                space.dim()
            ));
        }
        Ok(Self { space, amplitudes })
    }

    pub fn zeros(space: SpaceSpec) -> Self {
        let amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        Self { space, amplitudes }
    }

    pub fn basis(space: SpaceSpec, ket: &BasisIndex) -> Result<Self> {
        let index = space.flat_index(ket)?;
        let mut state = Self::zeros(space);
        state.amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(state)
    }

    /// Normalized superposition `sum_k c_k |ket_k> / norm`.
    pub fn superposition(space: SpaceSpec, terms: &[(Complex64, BasisIndex)]) -> Result<Self> {
        let mut state = Self::zeros(space);
        for (c, ket) in terms {
            let index = state.space.flat_index(ket)?;
            state.amplitudes[index] += c;
        }
        state.normalize()?;
        Ok(state)
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn amplitude(&self, ket: &BasisIndex) -> Result<Complex64> {
        Ok(self.amplitudes[self.space.flat_index(ket)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return domain("cannot normalize a zero or non-finite vector");
        }
        self.amplitudes.iter_mut().for_each(|a| *a /= n);
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        if self.space != other.space {
            return domain("inner product of states from different spaces");
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply_sigma_plus(&self, detector: usize) -> Result<StateVector> {
        self.apply_spin(detector, false)
    }

    pub fn apply_sigma_minus(&self, detector: usize) -> Result<StateVector> {
        self.apply_spin(detector, true)
    }

    /// Flips `from -> !from` on `detector`; kets not in `from` are annihilated.
    fn apply_spin(&self, detector: usize, from: bool) -> Result<StateVector> {
        self.space.check_detector(detector)?;
        let stride = self.space.spin_stride(detector);
        let mut out = Self::zeros(self.space.clone());
        for (i, a) in self.amplitudes.iter().enumerate() {
            if self.space.spin_bit(i, detector) == from {
                let target = if from { i - stride } else { i + stride };
                out.amplitudes[target] = *a;
            }
        }
        Ok(out)
    }

    /// `a†_m` with hard truncation: `a† |n_max> = 0`.
    pub fn apply_create(&self, mode: usize) -> Result<StateVector> {
        self.space.check_mode(mode)?;
        let stride = self.space.mode_stride(mode);
        let n_max = self.space.n_max(mode);
        let mut out = Self::zeros(self.space.clone());
        for (i, a) in self.amplitudes.iter().enumerate() {
            let n = self.space.occupation(i, mode);
            if n < n_max {
                out.amplitudes[i + stride] = *a * ((n + 1) as f64).sqrt();
            }
        }
        Ok(out)
    }

    pub fn apply_annihilate(&self, mode: usize) -> Result<StateVector> {
        self.space.check_mode(mode)?;
        let stride = self.space.mode_stride(mode);
        let mut out = Self::zeros(self.space.clone());
        for (i, a) in self.amplitudes.iter().enumerate() {
            let n = self.space.occupation(i, mode);
            if n > 0 {
                out.amplitudes[i - stride] = *a * (n as f64).sqrt();
            }
        }
        Ok(out)
    }

    /// `self + other`; used by tests of operator identities.
    pub fn add(&self, other: &StateVector) -> Result<StateVector> {
        if self.space != other.space {
            return domain("cannot add states from different spaces");
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            space: self.space.clone(),
            amplitudes,
        })
    }

    pub fn scale(&self, factor: Complex64) -> StateVector {
        Self {
            space: self.space.clone(),
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
        }
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn single(n_max: usize) -> SpaceSpec {
        SpaceSpec::new(1, vec![n_max]).unwrap()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(1, &[1]).unwrap(), 4);
        assert_eq!(dimension(2, &[3]).unwrap(), 16);
        assert_eq!(dimension(1, &[2, 2]).unwrap(), 18);
    }

    #[test]
    fn dimension_cap_rejects() {
        assert!(dimension(18, &[]).is_ok());
        assert!(matches!(dimension(19, &[]), Err(Error::RejectedConfig(_))));
        assert!(matches!(
            SpaceSpec::new(10, vec![20, 20]),
            Err(Error::RejectedConfig(_))
        ));
        assert!(matches!(
            dimension(usize::MAX, &[1]),
            Err(Error::RejectedConfig(_))
        ));
    }

    #[test]
    fn invalid_spaces() {
        assert!(SpaceSpec::new(0, vec![1]).is_err());
        assert!(SpaceSpec::new(1, vec![2, 0]).is_err());
    }

    #[test]
    fn ordering_is_spin_major() {
        let space = single(1);
        let zero = BasisIndex::new(vec![false], vec![0]);
        assert_eq!(space.flat_index(&zero).unwrap(), 0);
        // |g0>, |g1>, |e0>, |e1>
        let e0 = BasisIndex::new(vec![true], vec![0]);
        assert_eq!(space.flat_index(&e0).unwrap(), 2);
        let g1 = BasisIndex::new(vec![false], vec![1]);
        assert_eq!(space.flat_index(&g1).unwrap(), 1);
    }

    #[test]
    fn flat_index_rejects_out_of_range() {
        let space = single(2);
        assert!(space
            .flat_index(&BasisIndex::new(vec![true], vec![3]))
            .is_err());
        assert!(space
            .flat_index(&BasisIndex::new(vec![true, true], vec![0]))
            .is_err());
        assert!(space.unflatten(6).is_err());
    }

    #[test]
    fn flat_index_bijection_exhaustive() {
        for (n, trunc) in [
            (1, vec![1]),
            (2, vec![3]),
            (3, vec![2, 4]),
            (2, vec![9, 9, 9]),
        ] {
            let space = SpaceSpec::new(n, trunc).unwrap();
            assert!(space.dim() <= 10_000);
            for i in 0..space.dim() {
                let b = space.unflatten(i).unwrap();
                assert_eq!(space.flat_index(&b).unwrap(), i);
            }
        }
    }

    #[test]
    fn ladder_examples() {
        let space = SpaceSpec::new(1, vec![3]).unwrap();
        let ket = |n| BasisIndex::new(vec![false], vec![n]);
        let vac = StateVector::basis(space.clone(), &ket(0)).unwrap();
        let up = vac.apply_create(0).unwrap();
        assert_eq!(up, StateVector::basis(space.clone(), &ket(1)).unwrap());
        let down = vac.apply_annihilate(0).unwrap();
        assert_eq!(down.norm(), 0.0);
        let two = StateVector::basis(space.clone(), &ket(2)).unwrap();
        let three = two.apply_create(0).unwrap();
        assert_eq!(three.amplitude(&ket(3)).unwrap(), c(3f64.sqrt()));
        assert!((three.norm_sqr() - 3.0).abs() < 1e-15);
        // hard truncation
        let top = StateVector::basis(space, &ket(3)).unwrap();
        assert_eq!(top.apply_create(0).unwrap().norm(), 0.0);
    }

    #[test]
    fn ladder_matrix_elements_exact() {
        let n_max = 12;
        let space = single(n_max);
        for n in 0..n_max {
            let ket =
                StateVector::basis(space.clone(), &BasisIndex::new(vec![true], vec![n])).unwrap();
            let bra = BasisIndex::new(vec![true], vec![n + 1]);
            let elem = ket.apply_create(0).unwrap().amplitude(&bra).unwrap();
            assert_eq!(elem, c(((n + 1) as f64).sqrt()));
        }
    }

    #[test]
    fn create_then_annihilate_and_commutator() {
        let n_max = 5;
        let space = single(n_max);
        for n in 0..=n_max {
            let ket =
                StateVector::basis(space.clone(), &BasisIndex::new(vec![false], vec![n])).unwrap();
            let aad = ket.apply_create(0).unwrap().apply_annihilate(0).unwrap();
            let ada = ket.apply_annihilate(0).unwrap().apply_create(0).unwrap();
            let comm = aad.add(&ada.scale(c(-1.0))).unwrap();
            let idx = space
                .flat_index(&BasisIndex::new(vec![false], vec![n]))
                .unwrap();
            if n < n_max {
                assert!((aad.amplitudes()[idx] - c((n + 1) as f64)).norm() < 1e-14);
                assert!((comm.amplitudes()[idx] - c(1.0)).norm() < 1e-14);
            } else {
                // truncation artefact: [a, a†] |n_max> = -n_max |n_max>
                assert!((comm.amplitudes()[idx] - c(-(n_max as f64))).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn spin_anticommutator_is_identity() {
        let space = SpaceSpec::new(3, vec![1]).unwrap();
        for i in 0..space.dim() {
            let mut amps = vec![c(0.0); space.dim()];
            amps[i] = c(1.0);
            let ket = StateVector::from_amplitudes(space.clone(), amps).unwrap();
            for j in 0..3 {
                let pm = ket
                    .apply_sigma_minus(j)
                    .unwrap()
                    .apply_sigma_plus(j)
                    .unwrap();
                let mp = ket
                    .apply_sigma_plus(j)
                    .unwrap()
                    .apply_sigma_minus(j)
                    .unwrap();
                assert_eq!(pm.add(&mp).unwrap(), ket);
            }
        }
    }

    #[test]
    fn sigma_action() {
        let space = SpaceSpec::new(2, vec![1]).unwrap();
        let gg = StateVector::basis(space.clone(), &BasisIndex::new(vec![false, false], vec![1]))
            .unwrap();
        let eg = gg.apply_sigma_plus(0).unwrap();
        assert_eq!(
            eg,
            StateVector::basis(space.clone(), &BasisIndex::new(vec![true, false], vec![1]))
                .unwrap()
        );
        assert_eq!(eg.apply_sigma_plus(0).unwrap().norm(), 0.0);
        assert_eq!(gg.apply_sigma_minus(1).unwrap().norm(), 0.0);
        assert!(gg.apply_sigma_plus(2).is_err());
        assert!(gg.apply_create(1).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let space = single(1);
        let e0 = BasisIndex::new(vec![true], vec![0]);
        let g1 = BasisIndex::new(vec![false], vec![1]);
        let ke0 = StateVector::basis(space.clone(), &e0).unwrap();
        let kg1 = StateVector::basis(space.clone(), &g1).unwrap();
        assert_eq!(ke0.inner_product(&ke0).unwrap(), c(1.0));
        assert_eq!(ke0.inner_product(&kg1).unwrap(), c(0.0));
        let sup = StateVector::superposition(space, &[(c(1.0), e0), (c(1.0), g1)]).unwrap();
        let p = sup.inner_product(&ke0).unwrap();
        assert!((p - c(std::f64::consts::FRAC_1_SQRT_2)).norm() < 1e-15);
        let other = StateVector::zeros(SpaceSpec::new(1, vec![2]).unwrap());
        assert!(sup.inner_product(&other).is_err());
    }

    #[test]
    fn conjugate_linearity() {
        let space = single(1);
        let a = StateVector::from_amplitudes(
            space.clone(),
            vec![
                Complex64::new(0.1, 0.2),
                c(0.3),
                Complex64::new(0.0, -0.5),
                c(0.7),
            ],
        )
        .unwrap();
        let b = StateVector::from_amplitudes(
            space,
            vec![
                c(0.4),
                Complex64::new(0.0, 0.6),
                c(-0.2),
                Complex64::new(0.3, 0.3),
            ],
        )
        .unwrap();
        let z = Complex64::new(0.3, -1.2);
        let lhs = a.scale(z).inner_product(&b).unwrap();
        let rhs = z.conj() * a.inner_product(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-15);
        assert!((a.inner_product(&a).unwrap().re.sqrt() - a.norm()).abs() < 1e-15);
    }

    #[test]
    fn new_checks_normalization() {
        let space = single(1);
        assert!(StateVector::new(space.clone(), vec![c(1.0), c(1.0), c(0.0), c(0.0)]).is_err());
        assert!(StateVector::new(space.clone(), vec![c(1.0); 3]).is_err());
        assert!(StateVector::new(space, vec![c(0.6), c(0.8), c(0.0), c(0.0)]).is_ok());
    }

    proptest! {
        #[test]
        fn unflatten_roundtrip(n in 1usize..4, t0 in 1usize..5, t1 in 1usize..4, seed in 0usize..10_000) {
            let space = SpaceSpec::new(n, vec![t0, t1]).unwrap();
            let i = seed % space.dim();
            let b = space.unflatten(i).unwrap();
            prop_assert_eq!(space.flat_index(&b).unwrap(), i);
        }
    }
}
