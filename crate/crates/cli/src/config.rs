// SPDX-License-Identifier: Apache-2.0

//! Run configuration: a TOML document with dotted sections.
//!
//! Frequencies, couplings and accelerations are in units of a reference
//! frequency `units.omega_ref` (in Hz, only needed by `hardware`); proper
//! times are in units of its inverse. Layering, lowest precedence first:
//! named preset, config file, `--set key=value` overrides.
//!
//! ```toml
//! preset = "fig1"          # optional
//!
//! [units]
//! omega_ref = 1.0e5        # Hz
//!
//! [detector]
//! gap = 1.0                # one value for every detector, or a list
//! count = 1                # defaults to the length of `gap`
//!
//! [worldline]              # shared by all detectors
//! kind = "uniform"         # uniform | inertial | custom
//! alpha = 1.0e-4
//! # xi = ...               # uniform: Rindler position, default 1/alpha
//! # velocity, x0           # inertial
//! # file = "path.csv"      # custom: tau,t,x or t,x rows
//!
//! # [[detector.worldlines]] one table per detector overrides [worldline]
//!
//! [mode]
//! omega = 1.33             # one value or a list
//! n_max = 3                # one value or a list
//! # k = [...]              # default massless, k = omega
//! # phase_offset = [...]
//!
//! [coupling]
//! g = 0.01                 # every pair, or a detector x mode matrix
//! terms = "full"           # full | rotating_wave
//!
//! [initial]
//! spins = "e"              # one of e/g per detector
//! occupations = [0]
//!
//! [evolve]
//! tau0 = 0.0
//! # tau_end = ...          # default: asymptotic end of the crossing
//!
//! [integrator]
//! method = "rk4"           # rk4 | expm
//! # dt, record_stride
//! norm_tolerance = 1.0e-8
//!
//! [sweep]
//! alphas = [2.0e-5, 5.0e-5, 1.0e-4, 2.0e-4, 5.0e-4]
//! # workers = 4
//!
//! [convergence]
//! truncations = [2, 3]
//!
//! [hardware]
//! platform = "ion"         # ion | cqed
//! lamb_dicke = 0.2         # ion
//! spectator_modes = [20.0] # ion, non-center-of-mass mode frequencies
//! # qubit_energy, bare_coupling   cqed
//! # schedule_step          # default: half the largest safe spacing
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use rindler_core::evolve::Method;
use rindler_core::hamiltonian::Terms;
use rindler_core::trajectory::SampledWorldline;
use rindler_core::{
    BasisIndex, DetectorSpec, IntegratorConfig, LzSetup, ModeSpec, ModelSpec, Worldline,
};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{CliError, CliResult};

/// Names accepted by `preset`.
pub const PRESETS: &[&str] = &["fig1"];

/// Acceleration grid of the default sweep.
pub const DEFAULT_ALPHAS: [f64; 5] = [2e-5, 5e-5, 1e-4, 2e-4, 5e-4];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    /// Broadcasts a single value to `n` entries; a list must have length `n`.
    fn expand(&self, n: usize, key: &str) -> CliResult<Vec<T>> {
        match self {
            OneOrMany::One(v) => Ok(vec![v.clone(); n]),
            OneOrMany::Many(v) if v.len() == n => Ok(v.clone()),
            OneOrMany::Many(v) => Err(CliError::Config(format!(
                "{key} has {} entries, expected {n}",
                v.len()
            ))),
        }
    }

    fn len(&self) -> Option<usize> {
        match self {
            OneOrMany::One(_) => None,
            OneOrMany::Many(v) => Some(v.len()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CouplingValue {
    Uniform(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<String>,
    #[serde(default)]
    pub units: UnitsCfg,
    #[serde(default)]
    pub detector: DetectorCfg,
    #[serde(default)]
    pub worldline: WorldlineCfg,
    #[serde(default)]
    pub mode: ModeCfg,
    #[serde(default)]
    pub coupling: CouplingCfg,
    #[serde(default)]
    pub initial: InitialCfg,
    #[serde(default)]
    pub evolve: EvolveCfg,
    #[serde(default)]
    pub integrator: IntegratorCfg,
    #[serde(default)]
    pub sweep: SweepCfg,
    #[serde(default)]
    pub convergence: ConvergenceCfg,
    #[serde(default)]
    pub hardware: HardwareCfg,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsCfg {
    /// Hz per frequency unit.
    pub omega_ref: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorCfg {
    pub gap: Option<OneOrMany<f64>>,
    pub count: Option<usize>,
    pub worldlines: Option<Vec<WorldlineCfg>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldlineCfg {
    pub kind: Option<String>,
    pub alpha: Option<f64>,
    pub xi: Option<f64>,
    pub velocity: Option<f64>,
    pub x0: Option<f64>,
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeCfg {
    pub omega: Option<OneOrMany<f64>>,
    pub k: Option<OneOrMany<f64>>,
    pub n_max: Option<OneOrMany<usize>>,
    pub phase_offset: Option<OneOrMany<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingCfg {
    pub g: Option<CouplingValue>,
    pub terms: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCfg {
    pub spins: Option<String>,
    pub occupations: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveCfg {
    pub tau0: Option<f64>,
    pub tau_end: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorCfg {
    pub method: Option<String>,
    pub dt: Option<f64>,
    pub record_stride: Option<usize>,
    pub norm_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCfg {
    pub alphas: Option<Vec<f64>>,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceCfg {
    pub truncations: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareCfg {
    pub platform: Option<String>,
    pub lamb_dicke: Option<f64>,
    pub spectator_modes: Option<Vec<f64>>,
    pub qubit_energy: Option<f64>,
    pub bare_coupling: Option<f64>,
    pub schedule_step: Option<f64>,
}

/// A config together with where it came from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    /// Directory relative paths in the config are resolved against.
    pub base_dir: PathBuf,
    /// `key=value` overrides in the order applied.
    pub overrides: Vec<String>,
}

fn preset_table(name: &str) -> CliResult<Table> {
    let text = match name {
        // weak coupling, chirped mode starting above the detector gap
        "fig1" => {
            r#"
            [detector]
            gap = 1.0
            [worldline]
            kind = "uniform"
            alpha = 1.0e-4
            [mode]
            omega = 1.33
            n_max = 3
            [coupling]
            g = 0.01
            [initial]
            spins = "e"
            occupations = [0]
            [sweep]
            alphas = [2.0e-5, 5.0e-5, 1.0e-4, 2.0e-4, 5.0e-4]
            [convergence]
            truncations = [2, 3]
            "#
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown preset {other:?}; known presets: {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(toml::from_str(text).expect("built-in preset parses"))
}

fn merge(base: &mut Table, over: Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

/// Parses the right-hand side of `--set key=value` as a TOML value, falling
/// back to a bare string.
fn parse_override_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn apply_override(table: &mut Table, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::Config(format!(
            "override {assignment:?} is not of the form key=value"
        ))
    })?;
    let key = key.trim();
    let path: Vec<&str> = key.split('.').map(str::trim).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed override key {key:?}")));
    }
    let mut node = table;
    for part in &path[..path.len() - 1] {
        let entry = node
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry.as_table_mut().ok_or_else(|| {
            CliError::Config(format!("override {key:?}: {part:?} is not a section"))
        })?;
    }
    node.insert(
        path[path.len() - 1].to_string(),
        parse_override_value(raw.trim()),
    );
    Ok(())
}

/// Dotted paths of every occurrence of `field` in `table`.
fn find_key(table: &Table, field: &str, prefix: &str, out: &mut Vec<String>) {
    for (k, v) in table {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        if k == field {
            out.push(path.clone());
        }
        match v {
            Value::Table(t) => find_key(t, field, &path, out),
            Value::Array(items) => {
                for item in items {
                    if let Value::Table(t) = item {
                        find_key(t, field, &path, out);
                    }
                }
            }
            _ => {}
        }
    }
}

fn decode(table: Table) -> CliResult<RunConfig> {
    let keep = table.clone();
    table.try_into::<RunConfig>().map_err(|e| {
        let msg = e.to_string();
        let unknown = msg
            .split("unknown field `")
            .nth(1)
            .and_then(|rest| rest.split('`').next());
        match unknown {
            Some(field) => {
                let mut paths = Vec::new();
                find_key(&keep, field, "", &mut paths);
                let named = if paths.is_empty() {
                    field.to_string()
                } else {
                    paths.join(", ")
                };
                CliError::Config(format!("unknown key `{named}` ({})", msg.trim()))
            }
            None => CliError::Config(msg.trim().to_string()),
        }
    })
}

/// Reads `path` (if any), applies the preset it or the overrides name, then
/// the overrides, and validates that every required key is present.
pub fn load(path: Option<&Path>, overrides: &[String]) -> CliResult<LoadedConfig> {
    let (mut table, base_dir) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            let table: Table = toml::from_str(&text).map_err(|e| {
                CliError::Config(format!("{}: {}", p.display(), e.to_string().trim()))
            })?;
            let dir = p.parent().map(Path::to_path_buf).unwrap_or_default();
            (table, dir)
        }
        None => (Table::new(), PathBuf::from(".")),
    };
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(preset) = table.get("preset") {
        let name = preset
            .as_str()
            .ok_or_else(|| CliError::Config("preset must be a string".into()))?;
        let mut base = preset_table(name)?;
        merge(&mut base, table);
        table = base;
    }
    let mut config = decode(table)?;
    resolve_paths(&mut config, &base_dir);
    config.check_required()?;
    Ok(LoadedConfig {
        config,
        base_dir,
        overrides: overrides.to_vec(),
    })
}

fn resolve_paths(config: &mut RunConfig, base: &Path) {
    let fix = |w: &mut WorldlineCfg| {
        if let Some(f) = &w.file {
            if f.is_relative() {
                let joined = base.join(f);
                w.file = Some(std::fs::canonicalize(&joined).unwrap_or(joined));
            }
        }
    };
    fix(&mut config.worldline);
    for w in config.detector.worldlines.iter_mut().flatten() {
        fix(w);
    }
}

impl RunConfig {
    /// Keys without which no model can be built.
    pub fn missing_keys(&self) -> Vec<String> {
        let mut missing = Vec::new();
        if self.detector.gap.is_none() {
            missing.push("detector.gap".to_string());
        }
        if self.mode.omega.is_none() {
            missing.push("mode.omega".to_string());
        }
        if self.coupling.g.is_none() {
            missing.push("coupling.g".to_string());
        }
        match &self.detector.worldlines {
            Some(list) => {
                for (j, w) in list.iter().enumerate() {
                    missing.extend(
                        w.missing_keys()
                            .into_iter()
                            .map(|k| format!("detector.worldlines[{j}].{k}")),
                    );
                }
            }
            None => missing.extend(
                self.worldline
                    .missing_keys()
                    .into_iter()
                    .map(|k| format!("worldline.{k}")),
            ),
        }
        missing
    }

    fn check_required(&self) -> CliResult<()> {
        let missing = self.missing_keys();
        if missing.is_empty() {
            return Ok(());
        }
        Err(CliError::Config(format!(
            "missing required keys: {} (or set preset = \"fig1\")",
            missing.join(", ")
        )))
    }

    /// The config as TOML, every resolved value included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn n_detectors(&self) -> CliResult<usize> {
        let from_gap = self.detector.gap.as_ref().and_then(OneOrMany::len);
        let from_worldlines = self.detector.worldlines.as_ref().map(Vec::len);
        let from_matrix = match &self.coupling.g {
            Some(CouplingValue::Matrix(rows)) => Some(rows.len()),
            _ => None,
        };
        let candidates = [
            ("detector.count", self.detector.count),
            ("detector.gap", from_gap),
            ("detector.worldlines", from_worldlines),
            ("coupling.g", from_matrix),
        ];
        let mut n: Option<(usize, &str)> = None;
        for (key, value) in candidates {
            if let Some(v) = value {
                match n {
                    Some((m, other)) if m != v => {
                        return Err(CliError::Config(format!(
                            "{key} implies {v} detectors but {other} implies {m}"
                        )))
                    }
                    _ => n = Some((v, key)),
                }
            }
        }
        let n = n.map_or(1, |(n, _)| n);
        if n == 0 {
            return Err(CliError::Config("at least one detector is required".into()));
        }
        Ok(n)
    }

    pub fn n_modes(&self) -> usize {
        self.mode
            .omega
            .as_ref()
            .and_then(OneOrMany::len)
            .unwrap_or(1)
    }

    pub fn integrator(&self) -> CliResult<IntegratorConfig> {
        let mut cfg = IntegratorConfig::default();
        if let Some(m) = &self.integrator.method {
            cfg.method = m.parse::<Method>()?;
        }
        cfg.dt = self.integrator.dt;
        cfg.record_stride = self.integrator.record_stride;
        if let Some(t) = self.integrator.norm_tolerance {
            cfg.norm_tolerance = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn terms(&self) -> CliResult<Terms> {
        match self.coupling.terms.as_deref() {
            None | Some("full") => Ok(Terms::Full),
            Some("rotating_wave") => Ok(Terms::RotatingWave),
            Some(other) => Err(CliError::Config(format!(
                "coupling.terms = {other:?}; expected \"full\" or \"rotating_wave\""
            ))),
        }
    }

    fn worldlines(&self, n: usize) -> CliResult<Vec<Arc<Worldline>>> {
        match &self.detector.worldlines {
            Some(list) => list.iter().map(|w| w.build().map(Arc::new)).collect(),
            None => {
                let shared = Arc::new(self.worldline.build()?);
                Ok(vec![shared; n])
            }
        }
    }

    pub fn modes(&self) -> CliResult<Vec<ModeSpec>> {
        let m = self.n_modes();
        let omega = self
            .mode
            .omega
            .as_ref()
            .ok_or_else(|| CliError::Config("missing key mode.omega".into()))?
            .expand(m, "mode.omega")?;
        let n_max = match &self.mode.n_max {
            Some(v) => v.expand(m, "mode.n_max")?,
            None => vec![3; m],
        };
        let k = match &self.mode.k {
            Some(v) => Some(v.expand(m, "mode.k")?),
            None => None,
        };
        (0..m)
            .map(|i| {
                let mode = match &k {
                    Some(k) => ModeSpec::new(omega[i], k[i], n_max[i]),
                    None => ModeSpec::massless(omega[i], n_max[i]),
                };
                mode.map_err(CliError::from)
            })
            .collect()
    }

    pub fn gaps(&self) -> CliResult<Vec<f64>> {
        let n = self.n_detectors()?;
        self.detector
            .gap
            .as_ref()
            .ok_or_else(|| CliError::Config("missing key detector.gap".into()))?
            .expand(n, "detector.gap")
    }

    pub fn couplings(&self) -> CliResult<Vec<Vec<f64>>> {
        let (n, m) = (self.n_detectors()?, self.n_modes());
        match &self.coupling.g {
            None => Err(CliError::Config("missing key coupling.g".into())),
            Some(CouplingValue::Uniform(g)) => Ok(vec![vec![*g; m]; n]),
            Some(CouplingValue::Matrix(rows)) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != m) {
                    return Err(CliError::Config(format!(
                        "coupling.g must be a {n} x {m} matrix (detectors x modes)"
                    )));
                }
                Ok(rows.clone())
            }
        }
    }

    pub fn model(&self) -> CliResult<ModelSpec> {
        let n = self.n_detectors()?;
        let gaps = self.gaps()?;
        let detectors = gaps
            .into_iter()
            .zip(self.worldlines(n)?)
            .map(|(gap, w)| DetectorSpec::new(gap, w))
            .collect::<rindler_core::Result<Vec<_>>>()?;
        let modes = self.modes()?;
        let m = modes.len();
        let mut model =
            ModelSpec::new(detectors, modes, self.couplings()?)?.with_terms(self.terms()?);
        if let Some(offsets) = &self.mode.phase_offset {
            model = model.with_phase_offsets(offsets.expand(m, "mode.phase_offset")?)?;
        }
        Ok(model)
    }

    pub fn initial_state(&self) -> CliResult<BasisIndex> {
        let (n, m) = (self.n_detectors()?, self.n_modes());
        let spins = match &self.initial.spins {
            None => vec![true; n],
            Some(s) => {
                let spins = s
                    .chars()
                    .map(|c| match c {
                        'e' => Ok(true),
                        'g' => Ok(false),
                        other => Err(CliError::Config(format!(
                            "initial.spins: {other:?} is neither 'e' nor 'g'"
                        ))),
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                if spins.len() != n {
                    return Err(CliError::Config(format!(
                        "initial.spins has {} entries for {n} detectors",
                        spins.len()
                    )));
                }
                spins
            }
        };
        let occupations = self
            .initial
            .occupations
            .clone()
            .unwrap_or_else(|| vec![0; m]);
        if occupations.len() != m {
            return Err(CliError::Config(format!(
                "initial.occupations has {} entries for {m} modes",
                occupations.len()
            )));
        }
        Ok(BasisIndex::new(spins, occupations))
    }

    /// Single detector on the closed-form uniformly accelerated worldline
    /// coupled to one massless mode: the setting of the crossing analysis.
    pub fn lz_setup(&self) -> CliResult<LzSetup> {
        let model = self.model()?;
        let single = model.detectors().len() == 1 && model.modes().len() == 1;
        let alpha = match model.detectors().first().map(|d| d.worldline.as_ref()) {
            Some(Worldline::UniformAcceleration { alpha, xi: None }) => Some(*alpha),
            _ => None,
        };
        match (single, alpha) {
            (true, Some(alpha)) if model.modes()[0].is_massless() => Ok(LzSetup::new(
                model.couplings()[0][0],
                model.modes()[0].omega,
                model.detectors()[0].gap,
                alpha,
            )?),
            _ => Err(CliError::Config(
                "this mode needs one detector on a uniform worldline (no xi) and one massless mode"
                    .into(),
            )),
        }
    }

    pub fn omega_ref(&self) -> CliResult<f64> {
        match self.units.omega_ref {
            Some(w) if w > 0.0 && w.is_finite() => Ok(w),
            Some(w) => Err(CliError::Config(format!(
                "units.omega_ref must be positive, got {w}"
            ))),
            None => Err(CliError::Config(
                "missing key units.omega_ref (Hz per frequency unit)".into(),
            )),
        }
    }
}

impl WorldlineCfg {
    fn kind(&self) -> &str {
        self.kind.as_deref().unwrap_or("uniform")
    }

    fn missing_keys(&self) -> Vec<String> {
        match self.kind() {
            "uniform" if self.alpha.is_none() => vec!["alpha".into()],
            "custom" if self.file.is_none() => vec!["file".into()],
            _ => Vec::new(),
        }
    }

    pub fn build(&self) -> CliResult<Worldline> {
        let unused = |keys: &[(&str, bool)]| -> CliResult<()> {
            match keys.iter().find(|(_, set)| *set) {
                Some((k, _)) => Err(CliError::Config(format!(
                    "worldline key {k} does not apply to kind {:?}",
                    self.kind()
                ))),
                None => Ok(()),
            }
        };
        let w = match self.kind() {
            "uniform" => {
                unused(&[
                    ("velocity", self.velocity.is_some()),
                    ("x0", self.x0.is_some()),
                    ("file", self.file.is_some()),
                ])?;
                let alpha = self
                    .alpha
                    .ok_or_else(|| CliError::Config("missing key worldline.alpha".into()))?;
                match self.xi {
                    None => Worldline::uniform(alpha)?,
                    Some(xi) => Worldline::rindler(alpha, xi)?,
                }
            }
            "inertial" => {
                unused(&[
                    ("alpha", self.alpha.is_some()),
                    ("xi", self.xi.is_some()),
                    ("file", self.file.is_some()),
                ])?;
                Worldline::inertial(self.velocity.unwrap_or(0.0), self.x0.unwrap_or(0.0))?
            }
            "custom" => {
                unused(&[
                    ("alpha", self.alpha.is_some()),
                    ("xi", self.xi.is_some()),
                    ("velocity", self.velocity.is_some()),
                    ("x0", self.x0.is_some()),
                ])?;
                let file = self
                    .file
                    .as_ref()
                    .ok_or_else(|| CliError::Config("missing key worldline.file".into()))?;
                Worldline::CustomSampled(SampledWorldline::load(file)?)
            }
            other => {
                return Err(CliError::Config(format!(
                    "worldline.kind = {other:?}; expected uniform, inertial or custom"
                )))
            }
        };
        Ok(w)
    }
}
