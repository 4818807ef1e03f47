// SPDX-License-Identifier: Apache-2.0

//! Interaction-picture Hamiltonian in detector proper time,
//!
//! ```text
//! H(tau) = sum_{jm} g_jm (s+_j e^{i W_j tau} + h.c.)(a†_m e^{i Phi_jm(tau)} + h.c.)
//! ```
//!
//! where `Phi_jm` is the phase of mode `m` along detector `j`'s worldline.
//! There is no free term. All four products are kept; [`Terms::RotatingWave`]
//! drops the two counter-rotating ones and exists for diagnostics only.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::hilbert::{SpaceSpec, StateVector};
use crate::trajectory::{ModeSpec, Worldline};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSpec {
    pub gap: f64,
    pub worldline: Arc<Worldline>,
}

impl DetectorSpec {
    pub fn new(gap: f64, worldline: Arc<Worldline>) -> Result<Self> {
        if !(gap > 0.0 && gap.is_finite()) {
            return domain(format!(
                "detector gap must be positive and finite, got {gap}"
            ));
        }
        Ok(Self { gap, worldline })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Terms {
    #[default]
    Full,
    /// Keeps only `s+ a` and `s- a†`.
    RotatingWave,
}

/// Detectors, modes and the real nonnegative coupling matrix `g[j][m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    detectors: Vec<DetectorSpec>,
    modes: Vec<ModeSpec>,
    couplings: Vec<Vec<f64>>,
    phase_offsets: Vec<f64>,
    terms: Terms,
    space: SpaceSpec,
}

impl ModelSpec {
    pub fn new(
        detectors: Vec<DetectorSpec>,
        modes: Vec<ModeSpec>,
        couplings: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if couplings.len() != detectors.len()
            || couplings.iter().any(|row| row.len() != modes.len())
        {
            return domain(format!(
                "coupling matrix must be {} x {}",
                detectors.len(),
                modes.len()
            ));
        }
        for (j, row) in couplings.iter().enumerate() {
            for (m, &g) in row.iter().enumerate() {
                if !(g >= 0.0 && g.is_finite()) {
                    return domain(format!(
                        "coupling g[{j}][{m}] = {g} must be finite and >= 0"
                    ));
                }
            }
        }
        let space = SpaceSpec::new(detectors.len(), modes.iter().map(|m| m.n_max).collect())?;
        let phase_offsets = vec![0.0; modes.len()];
        Ok(Self {
            detectors,
            modes,
            couplings,
            phase_offsets,
            terms: Terms::Full,
            space,
        })
    }

    /// One detector on `worldline`, one massless mode: the single-detector
    /// setting used by the Landau-Zener analysis.
    pub fn single(
        gap: f64,
        omega: f64,
        g: f64,
        n_max: usize,
        worldline: Worldline,
    ) -> Result<Self> {
        let detector = DetectorSpec::new(gap, Arc::new(worldline))?;
        Self::new(
            vec![detector],
            vec![ModeSpec::massless(omega, n_max)?],
            vec![vec![g]],
        )
    }

    /// Constant phase added to `Phi_m` for every detector. Complex couplings
    /// `|g| e^{i c}` are represented this way.
    pub fn with_phase_offsets(mut self, offsets: Vec<f64>) -> Result<Self> {
        if offsets.len() != self.modes.len() || offsets.iter().any(|o| !o.is_finite()) {
            return domain("one finite phase offset per mode is required");
        }
        self.phase_offsets = offsets;
        Ok(self)
    }

    pub fn with_terms(mut self, terms: Terms) -> Self {
        self.terms = terms;
        self
    }

    /// Same model with every mode truncated at `n_max`.
    pub fn with_truncation(&self, n_max: usize) -> Result<Self> {
        let modes = self
            .modes
            .iter()
            .map(|m| m.with_truncation(n_max))
            .collect();
        let mut model = Self::new(self.detectors.clone(), modes, self.couplings.clone())?;
        model.phase_offsets = self.phase_offsets.clone();
        model.terms = self.terms;
        Ok(model)
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn detectors(&self) -> &[DetectorSpec] {
        &self.detectors
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn couplings(&self) -> &[Vec<f64>] {
        &self.couplings
    }

    pub fn terms(&self) -> Terms {
        self.terms
    }

    /// `Phi_m` along detector `j`'s worldline, including the constant offset.
    pub fn phase(&self, detector: usize, mode: usize, tau: f64) -> Result<f64> {
        let phi = self.detectors[detector]
            .worldline
            .phase(&self.modes[mode], tau)?;
        Ok(phi + self.phase_offsets[mode])
    }

    /// Uniform bound `sum_jm 2 g_jm sqrt(n_max,m + 1)` on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.couplings
            .iter()
            .flat_map(|row| row.iter().zip(&self.modes))
            .map(|(g, m)| 2.0 * g * ((m.n_max + 1) as f64).sqrt())
            .sum()
    }

    /// Fastest phase rotation over `[tau0, tau1]`:
    /// `max_m |omega_eff,m| + max_j W_j`.
    pub fn fastest_frequency(&self, tau0: f64, tau1: f64) -> Result<f64> {
        let max_gap = self.detectors.iter().map(|d| d.gap).fold(0.0, f64::max);
        let mut max_eff = 0.0_f64;
        for d in &self.detectors {
            for m in &self.modes {
                max_eff = max_eff.max(d.worldline.max_effective_frequency(m, tau0, tau1)?);
            }
        }
        Ok(max_eff + max_gap)
    }
}

/// `s+_j` times `a†_m` (counter-rotating) or `a_m` (co-rotating) acting on
/// basis ket `col`, landing on `row > col` with real amplitude `amp`. The
/// Hermitian partner sits at `(col, row)`.
#[derive(Debug, Clone, Copy)]
struct Transition {
    row: usize,
    col: usize,
    amp: f64,
    pair: usize,
    counter: bool,
}

/// Precompiled transition table for a [`ModelSpec`], reusable across many
/// evaluation times.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    model: ModelSpec,
    pairs: Vec<(usize, usize)>,
    transitions: Vec<Transition>,
}

impl Hamiltonian {
    pub fn new(model: &ModelSpec) -> Self {
        let space = model.space();
        let mut pairs = Vec::new();
        let mut transitions = Vec::new();
        for (j, row) in model.couplings.iter().enumerate() {
            for (m, &g) in row.iter().enumerate() {
                if g == 0.0 {
                    continue;
                }
                let pair = pairs.len();
                pairs.push((j, m));
                let spin_stride = space.spin_stride(j);
                let mode_stride = space.mode_stride(m);
                let n_max = space.n_max(m);
                for col in 0..space.dim() {
                    if space.spin_bit(col, j) {
                        continue;
                    }
                    let n = space.occupation(col, m);
                    let up = col + spin_stride;
                    if n < n_max && model.terms == Terms::Full {
                        transitions.push(Transition {
                            row: up + mode_stride,
                            col,
                            amp: g * ((n + 1) as f64).sqrt(),
                            pair,
                            counter: true,
                        });
                    }
                    if n > 0 {
                        transitions.push(Transition {
                            row: up - mode_stride,
                            col,
                            amp: g * (n as f64).sqrt(),
                            pair,
                            counter: false,
                        });
                    }
                }
            }
        }
        Self {
            model: model.clone(),
            pairs,
            transitions,
        }
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn dim(&self) -> usize {
        self.model.space.dim()
    }

    /// Per coupled pair: `(e^{i(W tau + Phi)}, e^{i(W tau - Phi)})`.
    pub fn phase_factors(&self, tau: f64, out: &mut Vec<(Complex64, Complex64)>) -> Result<()> {
        out.clear();
        for &(j, m) in &self.pairs {
            let spin = Complex64::cis(self.model.detectors[j].gap * tau);
            let field = Complex64::cis(self.model.phase(j, m, tau)?);
            out.push((spin * field, spin * field.conj()));
        }
        Ok(())
    }

    /// `out = H psi` given factors from [`Self::phase_factors`].
    pub fn apply_with(
        &self,
        factors: &[(Complex64, Complex64)],
        psi: &[Complex64],
        out: &mut [Complex64],
    ) {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        for t in &self.transitions {
            let (plus, minus) = factors[t.pair];
            let f = if t.counter { plus } else { minus } * t.amp;
            out[t.row] += f * psi[t.col];
            out[t.col] += f.conj() * psi[t.row];
        }
    }

    pub fn apply(&self, tau: f64, psi: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let mut factors = Vec::with_capacity(self.pairs.len());
        self.phase_factors(tau, &mut factors)?;
        self.apply_with(&factors, psi, out);
        Ok(())
    }

    /// Dense `H(tau)`; the lower triangle is filled from the transition
    /// table and mirrored, so the result is exactly Hermitian.
    pub fn matrix(&self, tau: f64) -> Result<DMatrix<Complex64>> {
        let dim = self.dim();
        let mut factors = Vec::with_capacity(self.pairs.len());
        self.phase_factors(tau, &mut factors)?;
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.transitions {
            let (plus, minus) = factors[t.pair];
            h[(t.row, t.col)] += if t.counter { plus } else { minus } * t.amp;
        }
        for r in 0..dim {
            for c in r + 1..dim {
                h[(r, c)] = h[(c, r)].conj();
            }
        }
        Ok(h)
    }
}

pub fn hamiltonian_at(model: &ModelSpec, tau: f64) -> Result<DMatrix<Complex64>> {
    Hamiltonian::new(model).matrix(tau)
}

pub fn apply_hamiltonian(model: &ModelSpec, tau: f64, state: &StateVector) -> Result<StateVector> {
    if state.space() != model.space() {
        return domain("state does not live in the model's Hilbert space");
    }
    let mut out = StateVector::zeros(model.space().clone());
    Hamiltonian::new(model).apply(tau, state.amplitudes(), out.amplitudes_mut())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::BasisIndex;
    use proptest::prelude::*;

    const GAP: f64 = 1.0;
    const OMEGA0: f64 = 1.33;
    const ALPHA: f64 = 1e-3;

    fn single(g: f64, n_max: usize) -> ModelSpec {
        ModelSpec::single(GAP, OMEGA0, g, n_max, Worldline::uniform(ALPHA).unwrap()).unwrap()
    }

    fn idx(model: &ModelSpec, e: bool, n: usize) -> usize {
        model
            .space()
            .flat_index(&BasisIndex::new(vec![e], vec![n]))
            .unwrap()
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn random_state(space: &SpaceSpec, seed: u64) -> StateVector {
        // small LCG; tests only need reproducible variety
        let mut s = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let amps = (0..space.dim())
            .map(|_| Complex64::new(next(), next()))
            .collect();
        StateVector::from_amplitudes(space.clone(), amps).unwrap()
    }

    #[test]
    fn zero_coupling_gives_zero_matrix() {
        let model = single(0.0, 3);
        assert_eq!(max_abs(&hamiltonian_at(&model, 12.3).unwrap()), 0.0);
        let psi = StateVector::basis(model.space().clone(), &BasisIndex::new(vec![true], vec![0]))
            .unwrap();
        assert_eq!(apply_hamiltonian(&model, 4.0, &psi).unwrap().norm(), 0.0);
    }

    #[test]
    fn matrix_elements_by_hand() {
        let g = 0.01;
        let model = single(g, 1);
        let w = Worldline::uniform(ALPHA).unwrap();
        let m = ModeSpec::massless(OMEGA0, 1).unwrap();
        for tau in [0.0, 17.0, 285.2, 900.0] {
            let h = hamiltonian_at(&model, tau).unwrap();
            let phi = w.phase(&m, tau).unwrap();
            let rot = h[(idx(&model, false, 1), idx(&model, true, 0))];
            let want = Complex64::cis(phi - GAP * tau) * g;
            // |Phi| ~ 1e3: rounding of the phase argument dominates
            assert!((rot - want).norm() < 1e-12 * g);
            let counter = h[(idx(&model, true, 1), idx(&model, false, 0))];
            let want = Complex64::cis(GAP * tau + phi) * g;
            assert!((counter - want).norm() < 1e-12 * g);
            assert!(counter.norm() > 0.0);
            // no diagonal, no spin-preserving elements
            assert_eq!(h[(idx(&model, true, 0), idx(&model, true, 1))].norm(), 0.0);
        }
    }

    #[test]
    fn dense_is_exactly_hermitian() {
        let model = multi();
        for tau in [0.0, 3.3, 1e3] {
            let h = hamiltonian_at(&model, tau).unwrap();
            assert_eq!(max_abs(&(&h - h.adjoint())), 0.0);
        }
    }

    #[test]
    fn apply_on_basis_ket_matches_dense_column() {
        let model = single(0.02, 3);
        let h = hamiltonian_at(&model, 40.0).unwrap();
        let e0 = idx(&model, true, 0);
        let psi = StateVector::basis(model.space().clone(), &BasisIndex::new(vec![true], vec![0]))
            .unwrap();
        let out = apply_hamiltonian(&model, 40.0, &psi).unwrap();
        for r in 0..model.space().dim() {
            assert!((out.amplitudes()[r] - h[(r, e0)]).norm() < 1e-15);
        }
        // |e0> only reaches |g1> through s- a†
        let g1 = idx(&model, false, 1);
        assert!(out.amplitudes()[g1].norm() > 0.0);
        assert!((out.norm() - out.amplitudes()[g1].norm()).abs() < 1e-16);
    }

    fn multi() -> ModelSpec {
        let d0 = DetectorSpec::new(1.0, Arc::new(Worldline::uniform(1e-2).unwrap())).unwrap();
        let d1 = DetectorSpec::new(0.8, Arc::new(Worldline::inertial(0.3, 1.0).unwrap())).unwrap();
        let modes = vec![
            ModeSpec::massless(1.3, 3).unwrap(),
            ModeSpec::new(2.1, 1.9, 2).unwrap(),
        ];
        ModelSpec::new(vec![d0, d1], modes, vec![vec![0.05, 0.02], vec![0.0, 0.07]]).unwrap()
    }

    #[test]
    fn matrix_free_matches_dense_on_random_states() {
        let model = multi();
        assert!(model.space().dim() <= 256);
        for seed in 0..8 {
            let tau = 7.0 * seed as f64;
            let psi = random_state(model.space(), seed);
            let h = hamiltonian_at(&model, tau).unwrap();
            let dense = &h * nalgebra::DVector::from_column_slice(psi.amplitudes());
            let free = apply_hamiltonian(&model, tau, &psi).unwrap();
            let scale = dense.norm();
            let err = dense
                .iter()
                .zip(free.amplitudes())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-12 * scale, "{err} vs {scale}");
        }
    }

    #[test]
    fn apply_is_linear() {
        let model = multi();
        let psi = random_state(model.space(), 1);
        let phi = random_state(model.space(), 2);
        let (a, b) = (Complex64::new(0.3, -1.1), Complex64::new(-2.0, 0.4));
        let combo = psi.scale(a).add(&phi.scale(b)).unwrap();
        let lhs = apply_hamiltonian(&model, 5.0, &combo).unwrap();
        let rhs = apply_hamiltonian(&model, 5.0, &psi)
            .unwrap()
            .scale(a)
            .add(&apply_hamiltonian(&model, 5.0, &phi).unwrap().scale(b))
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs) <= 1e-13 * lhs.norm());
    }

    #[test]
    fn rejects_invalid_models() {
        let w = Arc::new(Worldline::at_rest());
        let d = DetectorSpec::new(1.0, w.clone()).unwrap();
        let m = ModeSpec::massless(1.0, 2).unwrap();
        assert!(ModelSpec::new(vec![d.clone()], vec![m], vec![vec![-0.1]]).is_err());
        assert!(ModelSpec::new(vec![d.clone()], vec![m], vec![vec![f64::NAN]]).is_err());
        assert!(ModelSpec::new(vec![d.clone()], vec![m], vec![vec![0.1, 0.2]]).is_err());
        assert!(DetectorSpec::new(0.0, w).is_err());
        let wide = vec![ModeSpec::massless(1.0, 63).unwrap(); 4];
        assert!(matches!(
            ModelSpec::new(vec![d], wide, vec![vec![0.1; 4]]),
            Err(crate::Error::RejectedConfig(_))
        ));
    }

    fn eigenvalues(h: DMatrix<Complex64>) -> Vec<f64> {
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn constant_phase_offsets_preserve_spectrum() {
        let model = multi();
        let shifted = model.clone().with_phase_offsets(vec![0.7, -2.3]).unwrap();
        for tau in [0.0, 11.0, 123.4] {
            let a = eigenvalues(hamiltonian_at(&model, tau).unwrap());
            let b = eigenvalues(hamiltonian_at(&shifted, tau).unwrap());
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spectral_norm_below_bound() {
        let model = multi();
        for tau in [0.0, 5.0, 50.0] {
            let ev = eigenvalues(hamiltonian_at(&model, tau).unwrap());
            let norm = ev.iter().map(|e| e.abs()).fold(0.0, f64::max);
            assert!(norm <= model.norm_bound());
        }
    }

    #[test]
    fn rotating_wave_drops_counter_terms() {
        let model = single(0.01, 2).with_terms(Terms::RotatingWave);
        let h = hamiltonian_at(&model, 3.0).unwrap();
        assert_eq!(h[(idx(&model, true, 1), idx(&model, false, 0))].norm(), 0.0);
        assert!(h[(idx(&model, false, 1), idx(&model, true, 0))].norm() > 0.0);
    }

    proptest! {
        #[test]
        fn hermitian_for_any_time(tau in -1e4f64..1e4, g in 0.0f64..1.0) {
            let h = hamiltonian_at(&single(g, 3), tau).unwrap();
            prop_assert_eq!(max_abs(&(&h - h.adjoint())), 0.0);
        }
    }
}
