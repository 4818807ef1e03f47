// SPDX-License-Identifier: Apache-2.0

//! Acceptance gate. Every criterion prints one `PASS`/`FAIL` line and then
//! asserts at its stated tolerance.
//!
//! Run with `cargo test -p rindler-validation --test acceptance -- --nocapture`.

use std::sync::OnceLock;

use rayon::prelude::*;
use rindler_core::evolve::{convergence_check, default_dt, Method};
use rindler_core::export::{numeric_rows, write_evolution_csv};
use rindler_core::hardware::{
    ion_effective_coupling, ion_laser_frequencies, ion_validity, IonChainSpec,
};
use rindler_core::landau_zener::{
    asymptotic_end_time, crossing_time, energy_gap, energy_gap_slope, lz_gamma, lz_probability,
};
use rindler_core::trajectory::nonrelativistic_phase;
use rindler_core::{
    evolve, BasisIndex, EvolutionResult, IntegratorConfig, LzSetup, ModeSpec, Observer,
    StateVector, Worldline,
};
use rindler_validation::{max_abs_diff, steepest_rise, tail_stats};

const G: f64 = 0.01;
const OMEGA0: f64 = 1.33;
const GAP: f64 = 1.0;
const ALPHAS: [f64; 5] = [2e-5, 5e-5, 1e-4, 2e-4, 5e-4];

fn report(id: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[acceptance {id:>2}] {verdict}  {detail}");
}

fn setup(alpha: f64) -> LzSetup {
    LzSetup::new(G, OMEGA0, GAP, alpha).unwrap()
}

/// The run is allowed to drift so that the drift itself can be graded;
/// the grading threshold lives in criterion 6.
fn loose() -> IntegratorConfig {
    IntegratorConfig {
        norm_tolerance: 1e-3,
        ..IntegratorConfig::default()
    }
}

fn run(alpha: f64, n_max: usize, config: &IntegratorConfig) -> EvolutionResult {
    let s = setup(alpha);
    let model = s.model(n_max).unwrap();
    let psi0 =
        StateVector::basis(model.space().clone(), &BasisIndex::excited_vacuum(1, 1)).unwrap();
    let tau_end = asymptotic_end_time(&s).unwrap();
    evolve(
        &model,
        &psi0,
        (0.0, tau_end),
        config,
        &[
            Observer::GroundPopulation(0),
            Observer::ExcitedPopulation(0),
            Observer::Norm,
        ],
    )
    .unwrap()
}

struct LzRun {
    alpha: f64,
    n3: EvolutionResult,
    n2_final_ground: f64,
}

fn lz_runs() -> &'static [LzRun] {
    static RUNS: OnceLock<Vec<LzRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        ALPHAS
            .par_iter()
            .map(|&alpha| {
                let n3 = run(alpha, 3, &loose());
                let n2 = run(alpha, 2, &loose());
                LzRun {
                    alpha,
                    n3,
                    n2_final_ground: *n2.series("p_ground_0").unwrap().last().unwrap(),
                }
            })
            .collect()
    })
}

#[test]
fn c01_landau_zener_agreement() {
    let mut worst: f64 = 0.0;
    for r in lz_runs() {
        let gamma = lz_gamma(&setup(r.alpha)).unwrap();
        let (pe_lz, _) = lz_probability(gamma).unwrap();
        let pe = *r.n3.series("p_excited_0").unwrap().last().unwrap();
        let dev = (pe - pe_lz).abs();
        println!(
            "    alpha = {:.0e}  Gamma = {gamma:.3}  P_e sim = {pe:.6}  LZ = {pe_lz:.6}  |dev| = {dev:.2e}",
            r.alpha
        );
        worst = worst.max(dev);
    }
    let ok = worst <= 0.05;
    report(
        1,
        ok,
        &format!("Landau-Zener |P_e - exp(-2 pi Gamma)| max = {worst:.3e} (<= 0.05)"),
    );
    assert!(ok);
}

#[test]
fn c02_crossing_time_localization() {
    let mut worst: f64 = 0.0;
    for r in lz_runs() {
        let tc = crossing_time(&setup(r.alpha)).unwrap();
        let tau = steepest_rise(&r.n3.times, r.n3.series("p_ground_0").unwrap()).unwrap();
        let rel = (tau - tc).abs() / tc;
        println!(
            "    alpha = {:.0e}  tau_c = {tc:.2}  steepest = {tau:.2}  rel = {rel:.3e}",
            r.alpha
        );
        worst = worst.max(rel);
    }
    let ok = worst <= 0.10;
    report(
        2,
        ok,
        &format!(
            "steepest rise within {:.2}% of tau_c (<= 10%)",
            100.0 * worst
        ),
    );
    assert!(ok);
}

#[test]
fn c03_asymptotic_stabilization() {
    let mut worst: f64 = 0.0;
    for r in lz_runs() {
        let tail = tail_stats(&r.n3.times, r.n3.series("p_ground_0").unwrap(), 0.1).unwrap();
        println!(
            "    alpha = {:.0e}  final-10% max - min = {:.3e}  (half-window mean shift {:.3e})",
            r.alpha, tail.range, tail.mean_shift
        );
        worst = worst.max(tail.range);
    }
    let ok = worst < 0.01;
    report(
        3,
        ok,
        &format!("P_Ag variation over final 10% max = {worst:.3e} (< 0.01)"),
    );
    assert!(ok);
}

#[test]
fn c04_zero_coupling_identity() {
    let s = LzSetup::new(0.0, OMEGA0, GAP, 1e-3).unwrap();
    let model = s.model(3).unwrap();
    let psi0 =
        StateVector::basis(model.space().clone(), &BasisIndex::excited_vacuum(1, 1)).unwrap();
    let tau_end = asymptotic_end_time(&s).unwrap();
    let out = evolve(
        &model,
        &psi0,
        (0.0, tau_end),
        &IntegratorConfig {
            record_stride: Some(1),
            ..IntegratorConfig::default()
        },
        &[Observer::GroundPopulation(0)],
    )
    .unwrap();
    let worst = out
        .series("p_ground_0")
        .unwrap()
        .iter()
        .fold(0.0_f64, |m, p| m.max(p.abs()));
    let ok = worst <= 1e-12;
    report(
        4,
        ok,
        &format!(
            "g = 0: max |P_Ag| = {worst:.3e} over {} steps (<= 1e-12)",
            out.steps
        ),
    );
    assert!(ok);
}

#[test]
fn c05_integrator_cross_validation() {
    let s = setup(1e-3);
    let model = s.model(3).unwrap();
    let psi0 =
        StateVector::basis(model.space().clone(), &BasisIndex::excited_vacuum(1, 1)).unwrap();
    let span = (0.0, 1000.0);
    // The midpoint exponential is second order; a step an eighth of the
    // default brings its error below the comparison tolerance.
    let dt = default_dt(&model, span.0, span.1).unwrap() / 8.0;
    let config = IntegratorConfig {
        record_stride: Some(1),
        ..IntegratorConfig::default().with_dt(dt)
    };
    let obs = [Observer::GroundPopulation(0)];
    let (rk4, expm) = rayon::join(
        || {
            evolve(
                &model,
                &psi0,
                span,
                &config.with_method(Method::Rk4Fixed),
                &obs,
            )
            .unwrap()
        },
        || {
            evolve(
                &model,
                &psi0,
                span,
                &config.with_method(Method::PiecewiseExpmMidpoint),
                &obs,
            )
            .unwrap()
        },
    );
    let a = rk4.series("p_ground_0").unwrap();
    let b = expm.series("p_ground_0").unwrap();
    assert_eq!(a.len(), b.len());
    let diff = max_abs_diff(a, b);
    let defect = expm.max_unitarity_defect.unwrap();
    let ok = diff <= 1e-6 && defect <= 1e-10;
    report(
        5,
        ok,
        &format!(
            "rk4 vs expm max |dP_Ag| = {diff:.3e} (<= 1e-6), max |U'U - I| = {defect:.3e} (<= 1e-10), dt = {dt:.4e}"
        ),
    );
    assert!(ok);
}

#[test]
fn c06_norm_conservation() {
    let longest = lz_runs()
        .iter()
        .max_by(|a, b| a.n3.steps.cmp(&b.n3.steps))
        .unwrap();
    let drift = longest.n3.norm_drift;
    let ok = drift <= 1e-8;
    report(
        6,
        ok,
        &format!(
            "alpha = {:.0e}, {} rk4 steps at dt = {:.4e}: max | ||psi|| - 1 | = {drift:.3e} (<= 1e-8)",
            longest.alpha, longest.n3.steps, longest.n3.dt
        ),
    );
    assert!(ok);
}

#[test]
fn c07_truncation_convergence() {
    let mut worst: f64 = 0.0;
    for r in lz_runs() {
        let p3 = *r.n3.series("p_ground_0").unwrap().last().unwrap();
        let d = (p3 - r.n2_final_ground).abs();
        println!(
            "    alpha = {:.0e}  |P(n_max=2) - P(n_max=3)| = {d:.3e}",
            r.alpha
        );
        worst = worst.max(d);
    }
    let ok = worst <= 1e-4;
    report(
        7,
        ok,
        &format!("truncation n_max 2 vs 3 max = {worst:.3e} (<= 1e-4)"),
    );
    assert!(ok);
}

#[test]
fn c07_convergence_check_agrees_with_direct_runs() {
    let s = setup(5e-4);
    let model = s.model(3).unwrap();
    let span = (0.0, asymptotic_end_time(&s).unwrap());
    let report = convergence_check(
        &model,
        &BasisIndex::excited_vacuum(1, 1),
        span,
        &loose(),
        &[2, 3],
    )
    .unwrap();
    let direct = lz_runs().iter().find(|r| r.alpha == 5e-4).unwrap();
    assert_eq!(report.rows[0].final_ground[0], direct.n2_final_ground);
    assert!(report.converged());
}

#[test]
fn c08_closed_forms() {
    let s = setup(1e-3);
    let tc = crossing_time(&s).unwrap();
    let (pe, pg) = lz_probability(1.0).unwrap();
    let slope = energy_gap_slope(&s, tc);
    let h = 1e-3;
    let fd = (energy_gap(&s, tc + h) - energy_gap(&s, tc - h)) / (2.0 * h);
    let slope_rel = (slope + s.alpha * s.gap).abs() / (s.alpha * s.gap);
    let fd_rel = (fd - slope).abs() / slope.abs();
    let ok_tc = (tc - 285.179).abs() <= 1e-3;
    let ok_lz = (pe - 1.8674e-3).abs() <= 1e-6 && (pg - 0.998133).abs() <= 1e-6;
    let ok_slope = slope_rel <= 1e-12 && fd_rel <= 1e-6;
    let ok = ok_tc && ok_lz && ok_slope;
    report(
        8,
        ok,
        &format!(
            "tau_c = {tc:.6}, LZ(1) = ({pe:.7e}, {pg:.7}), slope = {slope:.6e} (fd rel {fd_rel:.2e})"
        ),
    );
    assert!(ok);
}

#[test]
fn c09_hardware_reproduction() {
    const KHZ: f64 = 1e3;
    const MHZ: f64 = 1e6;
    let spec = IonChainSpec {
        n_ions: 1,
        mode_freqs: vec![1.0 * MHZ, 2.0 * MHZ],
        lamb_dicke: 0.2,
        rabi_amplitudes: vec![200.0 * KHZ],
        detuning: 100.0 * KHZ,
    };
    let g = ion_effective_coupling(&spec).unwrap()[0];
    let lasers = ion_laser_frequencies(1.0 * MHZ, 100.0 * KHZ);
    let validity = ion_validity(&spec).unwrap();
    let ok_g = g == 20.0 * KHZ;
    let ok_lasers = (lasers.omega_l1 + 1.1 * MHZ).abs() <= 1e-9 * MHZ
        && (lasers.omega_l2 - 0.9 * MHZ).abs() <= 1e-9 * MHZ
        && lasers.warning.is_none();
    let ok_validity = validity.all_pass();
    let ok = ok_g && ok_lasers && ok_validity;
    report(
        9,
        ok,
        &format!(
            "g = {:.1} kHz, lasers = ({:.3}, {:.3}) MHz, validity {:?}",
            g / KHZ,
            lasers.omega_l1 / MHZ,
            lasers.omega_l2 / MHZ,
            validity.overall()
        ),
    );
    if !ok_validity {
        println!("{validity}");
    }
    assert!(ok);
}

#[test]
fn c10_nonrelativistic_limit() {
    let mode = ModeSpec::massless(OMEGA0, 1).unwrap();
    let mut violations = 0;
    let mut checked = 0;
    for alpha in [1e-4, 1e-3, 1e-2, 1.0] {
        let w = Worldline::uniform(alpha).unwrap();
        for i in 0..1000 {
            let x = 0.1 * i as f64 / 999.0;
            let tau = x / alpha;
            let exact = w.phase(&mode, tau).unwrap();
            let expanded = nonrelativistic_phase(&mode, alpha, tau, false).unwrap();
            let bound = OMEGA0 / alpha * x.powi(3) / 6.0;
            // rounding of two terms of size omega/alpha
            let slack = 4.0 * f64::EPSILON * OMEGA0 / alpha;
            if (exact - expanded).abs() > bound + slack {
                violations += 1;
            }
            checked += 1;
        }
    }
    let ok = violations == 0;
    report(
        10,
        ok,
        &format!(
            "Taylor remainder bound holds at {}/{checked} grid points",
            checked - violations
        ),
    );
    assert!(ok);
}

#[test]
fn c11_determinism() {
    let alpha = *ALPHAS.last().unwrap();
    let csv = || {
        let r = run(alpha, 3, &loose());
        let mut buf = Vec::new();
        write_evolution_csv(&mut buf, &r, &[]).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let (a, b) = (csv(), csv());
    let (ra, rb) = (numeric_rows(&a), numeric_rows(&b));
    let ok = !ra.is_empty() && ra == rb;
    report(
        11,
        ok,
        &format!(
            "two runs at alpha = {alpha:.0e}: {} numeric rows byte-identical",
            ra.len()
        ),
    );
    assert!(ok);
}
