// SPDX-License-Identifier: Apache-2.0

//! The five run modes. Each validates its whole configuration before any
//! computation, then writes its artifacts into the output directory.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rindler_core::evolve::{convergence_check, ConvergenceReport, CONVERGENCE_THRESHOLD};
use rindler_core::export::{fmt_num, write_evolution_csv, write_schedule_csv, write_sweep_csv};
use rindler_core::hardware::{
    characteristic_time, compile_cqed, compile_ion, cqed_drive_frequencies,
    cqed_effective_coupling, cqed_validity, ion_effective_coupling, ion_laser_frequencies,
    ion_validity, phase_schedule, required_spacing, ValidityReport, ION_COUPLING_PHASE,
};
use rindler_core::landau_zener::{
    asymptotic_end_time, crossing, energy_gap_slope, lz_gamma, lz_probability, sweep_acceleration,
    SweepConfig,
};
use rindler_core::{evolve, LzSetup, Observer, StateVector, Worldline};

use crate::config::{LoadedConfig, RunConfig, DEFAULT_ALPHAS};
use crate::error::{CliError, CliResult};
use crate::units::{format_duration, format_frequency};

/// Largest phase-schedule grid written by `hardware`.
pub const MAX_SCHEDULE_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RunMode {
    Evolve,
    Sweep,
    Lz,
    Hardware,
    Convergence,
}

impl RunMode {
    pub fn name(&self) -> &'static str {
        match self {
            RunMode::Evolve => "evolve",
            RunMode::Sweep => "sweep",
            RunMode::Lz => "lz",
            RunMode::Hardware => "hardware",
            RunMode::Convergence => "convergence",
        }
    }
}

/// What a run produced.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Short human-readable summary for the terminal.
    pub summary: String,
}

struct Context<'a> {
    loaded: &'a LoadedConfig,
    mode: RunMode,
    out_dir: &'a Path,
    workers: Option<usize>,
    timestamp: String,
}

impl Context<'_> {
    fn config(&self) -> &RunConfig {
        &self.loaded.config
    }

    /// Comment block heading every artifact.
    fn provenance(&self) -> Vec<String> {
        let mut lines = vec![
            format!("rindler-sim {}", env!("CARGO_PKG_VERSION")),
            format!("generated {}", self.timestamp),
            format!("mode {}", self.mode.name()),
        ];
        if let Some(w) = self.workers {
            lines.push(format!("workers {w}"));
        }
        for o in &self.loaded.overrides {
            lines.push(format!("override {o}"));
        }
        lines.push("resolved config:".into());
        lines.extend(self.config().to_toml().lines().map(|l| format!("  {l}")));
        lines
    }

    fn create(&self, name: &str) -> CliResult<(PathBuf, BufWriter<File>)> {
        let path = self.out_dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        Ok((path, BufWriter::new(file)))
    }

    fn write_with(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> CliResult<PathBuf> {
        let (path, mut out) = self.create(name)?;
        body(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        let provenance = self.provenance();
        self.write_with(name, |out| {
            for line in &provenance {
                writeln!(out, "# {line}")?;
            }
            out.write_all(text.as_bytes())
        })
    }

    fn tau_span(&self) -> CliResult<(f64, f64)> {
        let cfg = self.config();
        let tau0 = cfg.evolve.tau0.unwrap_or(0.0);
        let tau1 = match cfg.evolve.tau_end {
            Some(t) => t,
            None => {
                let setup = cfg.lz_setup().map_err(|_| {
                    CliError::Config(
                        "missing key evolve.tau_end (only the single uniformly accelerated \
                         detector has a default end time)"
                            .into(),
                    )
                })?;
                asymptotic_end_time(&setup)?
            }
        };
        if !(tau0.is_finite() && tau1.is_finite()) || tau1 <= tau0 {
            return Err(CliError::Config(format!(
                "evolve.tau_end = {tau1} must exceed evolve.tau0 = {tau0}"
            )));
        }
        Ok((tau0, tau1))
    }
}

/// Runs `mode` and writes its artifacts under `out_dir`, which is created if
/// needed. `timestamp` is recorded in every provenance header.
pub fn execute(
    loaded: &LoadedConfig,
    mode: RunMode,
    out_dir: &Path,
    workers: Option<usize>,
    timestamp: String,
) -> CliResult<Outcome> {
    if workers == Some(0) {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    let cx = Context {
        loaded,
        mode,
        out_dir,
        workers: workers.or(loaded.config.sweep.workers),
        timestamp,
    };
    // validate everything this mode needs before touching the disk
    let plan = plan(&cx)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let config_path = cx.write_text("resolved_config.toml", &loaded.config.to_toml())?;
    let mut outcome = plan.run(&cx)?;
    outcome.files.insert(0, config_path);
    Ok(outcome)
}

enum Plan {
    Evolve,
    Sweep(LzSetup, Vec<f64>, SweepConfig),
    Lz(LzSetup),
    Hardware,
    Convergence(Vec<usize>),
}

fn plan(cx: &Context) -> CliResult<Plan> {
    let cfg = cx.config();
    let model = cfg.model()?;
    let integrator = cfg.integrator()?;
    Ok(match cx.mode {
        RunMode::Evolve => {
            cx.tau_span()?;
            StateVector::basis(model.space().clone(), &cfg.initial_state()?)?;
            Plan::Evolve
        }
        RunMode::Sweep => {
            let setup = cfg.lz_setup()?;
            crossing(&setup)?;
            let alphas = cfg
                .sweep
                .alphas
                .clone()
                .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
            if alphas.is_empty() {
                return Err(CliError::Config("sweep.alphas is empty".into()));
            }
            for &a in &alphas {
                crossing(&setup.with_alpha(a)?)?;
            }
            let config = SweepConfig {
                n_max: model.modes()[0].n_max,
                integrator,
                workers: cx.workers,
            };
            Plan::Sweep(setup, alphas, config)
        }
        RunMode::Lz => {
            let setup = cfg.lz_setup()?;
            crossing(&setup)?;
            Plan::Lz(setup)
        }
        RunMode::Hardware => {
            cfg.omega_ref()?;
            cx.tau_span()?;
            match cfg.hardware.platform.as_deref() {
                Some("ion") | Some("cqed") => {}
                Some(other) => {
                    return Err(CliError::Config(format!(
                        "hardware.platform = {other:?}; expected \"ion\" or \"cqed\""
                    )))
                }
                None => return Err(CliError::Config("missing key hardware.platform".into())),
            }
            Plan::Hardware
        }
        RunMode::Convergence => {
            cx.tau_span()?;
            cfg.initial_state()?;
            let truncations = cfg
                .convergence
                .truncations
                .clone()
                .unwrap_or_else(|| vec![2, 3]);
            if truncations.is_empty() || truncations.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Config(format!(
                    "convergence.truncations must be nonempty and strictly increasing, got {truncations:?}"
                )));
            }
            for &n in &truncations {
                model.with_truncation(n)?;
            }
            Plan::Convergence(truncations)
        }
    })
}

impl Plan {
    fn run(self, cx: &Context) -> CliResult<Outcome> {
        match self {
            Plan::Evolve => run_evolve(cx),
            Plan::Sweep(setup, alphas, config) => run_sweep(cx, &setup, &alphas, &config),
            Plan::Lz(setup) => run_lz(cx, &setup),
            Plan::Hardware => run_hardware(cx),
            Plan::Convergence(truncations) => run_convergence(cx, &truncations),
        }
    }
}

fn run_evolve(cx: &Context) -> CliResult<Outcome> {
    let cfg = cx.config();
    let model = cfg.model()?;
    let psi0 = StateVector::basis(model.space().clone(), &cfg.initial_state()?)?;
    let span = cx.tau_span()?;
    let observers = Observer::standard_set(model.detectors().len(), model.modes().len());
    let result = evolve(&model, &psi0, span, &cfg.integrator()?, &observers)?;

    let mut provenance = cx.provenance();
    provenance.push(format!("steps {} dt {}", result.steps, fmt_num(result.dt)));
    provenance.push(format!("max norm drift {}", fmt_num(result.norm_drift)));
    if let Some(d) = result.max_unitarity_defect {
        provenance.push(format!("max unitarity defect {}", fmt_num(d)));
    }
    let path = cx.write_with("evolve.csv", |out| {
        write_evolution_csv(out, &result, &provenance)
    })?;

    let mut summary = format!(
        "evolved tau in [{}, {}] with {} steps of {:.4e}; max norm drift {:.3e}\n",
        span.0, span.1, result.steps, result.dt, result.norm_drift
    );
    for s in &result.observables {
        let last = s.values.last().copied().unwrap_or(f64::NAN);
        let _ = writeln!(summary, "final {} = {last:.10}", s.name);
    }
    Ok(Outcome {
        files: vec![path],
        summary,
    })
}

fn run_sweep(
    cx: &Context,
    setup: &LzSetup,
    alphas: &[f64],
    config: &SweepConfig,
) -> CliResult<Outcome> {
    let rows = sweep_acceleration(setup, alphas, config)?;
    let provenance = cx.provenance();
    let path = cx.write_with("sweep.csv", |out| write_sweep_csv(out, &rows, &provenance))?;
    let mut summary = format!(
        "{:>10}  {:>10}  {:>12}  {:>12}  {:>10}\n",
        "alpha", "Gamma", "P_e sim", "P_e LZ", "|dev|"
    );
    for r in &rows {
        let _ = writeln!(
            summary,
            "{:>10.3e}  {:>10.4}  {:>12.6}  {:>12.6}  {:>10.3e}",
            r.alpha, r.gamma, r.p_excited_sim, r.p_excited_lz, r.abs_dev
        );
    }
    Ok(Outcome {
        files: vec![path],
        summary,
    })
}

fn run_lz(cx: &Context, setup: &LzSetup) -> CliResult<Outcome> {
    let c = crossing(setup)?;
    let gamma = lz_gamma(setup)?;
    let (pe, pg) = lz_probability(gamma)?;
    let mut text = String::new();
    let _ = writeln!(text, "g = {}", fmt_num(setup.g));
    let _ = writeln!(text, "omega0 = {}", fmt_num(setup.omega0));
    let _ = writeln!(text, "Omega = {}", fmt_num(setup.gap));
    let _ = writeln!(text, "alpha = {}", fmt_num(setup.alpha));
    let _ = writeln!(
        text,
        "tau_c = {}{}",
        fmt_num(c.tau),
        if c.degenerate {
            " (degenerate: omega0 = Omega)"
        } else {
            ""
        }
    );
    let _ = writeln!(
        text,
        "gap slope at tau_c = {}",
        fmt_num(energy_gap_slope(setup, c.tau))
    );
    let _ = writeln!(text, "Gamma = {}", fmt_num(gamma));
    let _ = writeln!(text, "P_e = exp(-2 pi Gamma) = {}", fmt_num(pe));
    let _ = writeln!(text, "P_g = 1 - P_e = {}", fmt_num(pg));
    if !c.degenerate {
        let _ = writeln!(
            text,
            "asymptotic end time = {}",
            fmt_num(asymptotic_end_time(setup)?)
        );
    }
    let path = cx.write_text("lz_report.txt", &text)?;
    Ok(Outcome {
        files: vec![path],
        summary: text,
    })
}

fn run_convergence(cx: &Context, truncations: &[usize]) -> CliResult<Outcome> {
    let cfg = cx.config();
    let model = cfg.model()?;
    let report = convergence_check(
        &model,
        &cfg.initial_state()?,
        cx.tau_span()?,
        &cfg.integrator()?,
        truncations,
    )?;
    let path = write_convergence(cx, &report)?;
    let mut summary = String::new();
    for r in &report.rows {
        let delta = r.delta.map_or("-".to_string(), |d| format!("{d:.3e}"));
        let _ = writeln!(
            summary,
            "n_max = {:>3}  final P_g = {:?}  delta = {delta}",
            r.n_max, r.final_ground
        );
    }
    if !report.converged() {
        return Err(CliError::Accuracy(format!(
            "truncation not converged: successive differences must be below {CONVERGENCE_THRESHOLD:e} \
             (table in {})\n{summary}",
            path.display()
        )));
    }
    let _ = writeln!(summary, "converged (threshold {CONVERGENCE_THRESHOLD:e})");
    Ok(Outcome {
        files: vec![path],
        summary,
    })
}

fn write_convergence(cx: &Context, report: &ConvergenceReport) -> CliResult<PathBuf> {
    let provenance = cx.provenance();
    let n = report.rows.first().map_or(0, |r| r.final_ground.len());
    cx.write_with("convergence.csv", |out| {
        for line in &provenance {
            writeln!(out, "# {line}")?;
        }
        let mut header = vec!["n_max".to_string()];
        header.extend((0..n).map(|j| format!("p_ground_{j}")));
        header.push("delta".into());
        writeln!(out, "{}", header.join(","))?;
        for r in &report.rows {
            let mut row = vec![r.n_max.to_string()];
            row.extend(r.final_ground.iter().map(|p| fmt_num(*p)));
            row.push(r.delta.map_or(String::new(), fmt_num));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    })
}

fn run_hardware(cx: &Context) -> CliResult<Outcome> {
    let cfg = cx.config();
    let model = cfg.model()?;
    let hz = cfg.omega_ref()?;
    let hw = &cfg.hardware;
    let omega0 = model.modes()[0].omega;
    let gaps: Vec<f64> = model.detectors().iter().map(|d| d.gap).collect();
    let g: Vec<f64> = model.couplings().iter().map(|row| row[0]).collect();
    let alpha = match model.detectors()[0].worldline.as_ref() {
        Worldline::UniformAcceleration { alpha, .. } => Some(*alpha),
        _ => None,
    };

    let mut text = String::new();
    let _ = writeln!(
        text,
        "reference frequency: 1 unit = {}",
        format_frequency(hz)
    );
    let validity: ValidityReport;
    let drives: Vec<(String, f64)>;
    match hw.platform.as_deref() {
        Some("ion") => {
            if gaps.iter().any(|w| *w != gaps[0]) {
                return Err(CliError::Config(
                    "the ion compiler drives every ion at one detuning; detector.gap must be uniform".into(),
                ));
            }
            let lamb_dicke = hw
                .lamb_dicke
                .ok_or_else(|| CliError::Config("missing key hardware.lamb_dicke".into()))?;
            let mut mode_freqs = vec![omega0 * hz];
            mode_freqs.extend(hw.spectator_modes.iter().flatten().map(|w| w * hz));
            let g_hz: Vec<f64> = g.iter().map(|g| g * hz).collect();
            let spec = compile_ion(&g_hz, gaps[0] * hz, mode_freqs, lamb_dicke)?;
            let realized = ion_effective_coupling(&spec)?;
            let lasers = ion_laser_frequencies(spec.com_frequency(), spec.detuning);

            let _ = writeln!(text, "platform: trapped ions, N = {}", spec.n_ions);
            let _ = writeln!(
                text,
                "center-of-mass mode: omega0 = {}",
                format_frequency(spec.com_frequency())
            );
            for (n, w) in spec.mode_freqs.iter().enumerate().skip(1) {
                let _ = writeln!(text, "spectator mode {n}: {}", format_frequency(*w));
            }
            let _ = writeln!(text, "Lamb-Dicke factor k x0 = {lamb_dicke}");
            let _ = writeln!(
                text,
                "detuning: Omega = {}",
                format_frequency(spec.detuning)
            );
            for (j, (rabi, g)) in spec.rabi_amplitudes.iter().zip(&realized).enumerate() {
                let _ = writeln!(
                    text,
                    "ion {j}: Omega_L = {} (Omega_L/2 = {}), g = {}",
                    format_frequency(*rabi),
                    format_frequency(rabi / 2.0),
                    format_frequency(*g)
                );
            }
            let _ = writeln!(
                text,
                "coupling phase: g_j carries a factor e^(i {:.6}) = i, absorbed as a gauge choice",
                ION_COUPLING_PHASE
            );
            let _ = writeln!(
                text,
                "lasers: omega_L1 = {}, omega_L2 = {}",
                format_frequency(lasers.omega_l1),
                format_frequency(lasers.omega_l2)
            );
            if let Some(w) = &lasers.warning {
                let _ = writeln!(text, "warning: {w}");
            }
            drives = vec![
                ("omega_L1".into(), lasers.omega_l1),
                ("omega_L2".into(), lasers.omega_l2),
            ];
            validity = ion_validity(&spec)?;
        }
        Some("cqed") => {
            let need = |v: Option<f64>, key: &str| {
                v.ok_or_else(|| CliError::Config(format!("missing key hardware.{key}")))
            };
            let eps = need(hw.qubit_energy, "qubit_energy")? * hz;
            let g0 = need(hw.bare_coupling, "bare_coupling")? * hz;
            let g_hz: Vec<f64> = g.iter().map(|g| g * hz).collect();
            let gaps_hz: Vec<f64> = gaps.iter().map(|w| w * hz).collect();
            let spec = compile_cqed(&g_hz, &gaps_hz, eps, omega0 * hz, g0)?;
            let realized = cqed_effective_coupling(&spec)?;
            let pairs = cqed_drive_frequencies(&spec)?;

            let _ = writeln!(
                text,
                "platform: circuit QED, {} qubits",
                spec.modulation_depths.len()
            );
            let _ = writeln!(text, "qubit energy epsilon = {}", format_frequency(eps));
            let _ = writeln!(
                text,
                "cavity omega0 = {}",
                format_frequency(spec.cavity_freq)
            );
            let _ = writeln!(text, "bare coupling g0 = {}", format_frequency(g0));
            let mut d = Vec::new();
            for (j, ((eta, g), p)) in spec
                .modulation_depths
                .iter()
                .zip(&realized)
                .zip(&pairs)
                .enumerate()
            {
                let _ = writeln!(
                    text,
                    "qubit {j}: eta = {eta:.6}, g = {}, omega_d1 = {}, omega_d2 = {}",
                    format_frequency(*g),
                    format_frequency(p.omega_d1),
                    format_frequency(p.omega_d2)
                );
                for w in &p.warnings {
                    let _ = writeln!(text, "warning: {w}");
                }
                d.push((format!("omega_d1[{j}]"), p.omega_d1));
                d.push((format!("omega_d2[{j}]"), p.omega_d2));
            }
            drives = d;
            validity = cqed_validity(&spec, alpha.unwrap_or(0.0) * hz)?;
        }
        _ => unreachable!("platform checked while planning"),
    }
    if let Some(a) = alpha {
        let t = characteristic_time(a * hz);
        let _ = writeln!(
            text,
            "phase ramp: alpha = {}, characteristic time 1/alpha = {}",
            format_frequency(a * hz),
            format_duration(t)
        );
    }
    if model.modes().len() > 1 {
        let _ = writeln!(text, "note: only mode 0 is compiled");
    }
    let _ = writeln!(text);
    let _ = write!(text, "{validity}");

    // the schedule itself: detector 0, mode 0, dimensionless proper time
    let (tau0, tau1) = cx.tau_span()?;
    let worldline = &model.detectors()[0].worldline;
    let mode = &model.modes()[0];
    let step = match hw.schedule_step {
        Some(s) if s > 0.0 => s,
        Some(s) => {
            return Err(CliError::Config(format!(
                "hardware.schedule_step must be positive, got {s}"
            )))
        }
        None => 0.5 * required_spacing(worldline.max_effective_frequency(mode, tau0, tau1)?),
    };
    let points = ((tau1 - tau0) / step).ceil() as usize + 1;
    if points > MAX_SCHEDULE_POINTS {
        return Err(CliError::Config(format!(
            "phase schedule would need {points} points (limit {MAX_SCHEDULE_POINTS}); shorten the span or raise hardware.schedule_step"
        )));
    }
    let h = (tau1 - tau0) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points)
        .map(|i| {
            if i + 1 == points {
                tau1
            } else {
                tau0 + i as f64 * h
            }
        })
        .collect();
    let schedule = phase_schedule(worldline, mode, &grid)?.with_drive_frequencies(drives);

    let mut provenance = cx.provenance();
    provenance.push("tau in units of 1/omega_ref; drive frequencies in Hz".to_string());
    let schedule_path = cx.write_with("schedule.csv", |out| {
        write_schedule_csv(out, &schedule, &provenance)
    })?;
    let report_path = cx.write_text("validity.txt", &text)?;
    Ok(Outcome {
        files: vec![schedule_path, report_path],
        summary: text,
    })
}
