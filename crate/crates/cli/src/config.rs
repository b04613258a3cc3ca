//! Experiment configuration. Every physical key carries its unit in the name;
//! unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use eoq_core::lattice::{DotId, GridSpec, PackObjective, PackSolver};
use eoq_core::noise::QuasiStaticNoise;
use eoq_core::pulse::{EnvelopePower, ExchangeModel, ReadoutMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Electron Larmor frequency per tesla for g = 2.
pub const DEFAULT_LARMOR_GHZ_PER_T: f64 = 27.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Enumerate,
    Place,
    Fingerprint,
    Nosc,
    Rb,
    Route,
    Validate,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Enumerate => "enumerate",
            Experiment::Place => "place",
            Experiment::Fingerprint => "fingerprint",
            Experiment::Nosc => "nosc",
            Experiment::Rb => "rb",
            Experiment::Route => "route",
            Experiment::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Optional; when present it must match the subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    #[serde(default = "default_spam_pair")]
    pub spam_pair: [String; 2],
    #[serde(default)]
    pub exchange: ExchangeConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub place: Option<PlaceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<FingerprintConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nosc: Option<NoscConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rb: Option<RbConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<RouteConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validate: Option<ValidateConfig>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("eoq-out")
}

fn default_spam_pair() -> [String; 2] {
    ["P2".into(), "P3".into()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Plunger names such as `P1`.
    #[serde(default)]
    pub dead_dots: Vec<String>,
    /// Axis labels such as `X1` or `Y5`.
    #[serde(default)]
    pub dead_axes: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeModelConfig {
    pub j0_mhz: f64,
    pub v_b0_mv: f64,
    pub eps0_mv: f64,
    #[serde(default = "default_barrier_min")]
    pub barrier_min_mv: f64,
    #[serde(default = "default_barrier_max")]
    pub barrier_max_mv: f64,
}

fn default_barrier_min() -> f64 {
    -1000.0
}

fn default_barrier_max() -> f64 {
    1000.0
}

impl Default for ExchangeModelConfig {
    fn default() -> Self {
        Self {
            j0_mhz: 1.0,
            v_b0_mv: 100.0,
            eps0_mv: 50.0,
            barrier_min_mv: default_barrier_min(),
            barrier_max_mv: default_barrier_max(),
        }
    }
}

impl ExchangeModelConfig {
    pub fn model(&self) -> Result<ExchangeModel, CliError> {
        ExchangeModel::new(self.j0_mhz * 1e6, self.v_b0_mv * 1e-3, self.eps0_mv * 1e-3)
            .and_then(|m| m.with_barrier_range(self.barrier_min_mv * 1e-3, self.barrier_max_mv * 1e-3))
            .map_err(|e| CliError::Config(format!("exchange model: {e}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExchangeConfig {
    #[serde(default)]
    pub default: ExchangeModelConfig,
    /// Per-axis overrides keyed by axis label.
    #[serde(default)]
    pub axes: BTreeMap<String, ExchangeModelConfig>,
}

impl ExchangeConfig {
    pub fn model_for(&self, axis: &str) -> Result<ExchangeModel, CliError> {
        self.axes.get(axis).unwrap_or(&self.default).model()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(default = "default_sigma_j")]
    pub sigma_j_rel: f64,
    #[serde(default = "default_sigma_bz")]
    pub sigma_bz_khz: f64,
    #[serde(default = "default_b_field")]
    pub b_field_mt: f64,
    #[serde(default = "default_larmor")]
    pub larmor_ghz_per_t: f64,
    #[serde(default)]
    pub sigma_j_rel_axis: BTreeMap<String, f64>,
    #[serde(default)]
    pub sigma_bz_khz_dot: BTreeMap<String, f64>,
}

pub const DEFAULT_SIGMA_J_REL: f64 = 0.02;
pub const DEFAULT_SIGMA_BZ_KHZ: f64 = 100.0;

fn default_sigma_j() -> f64 {
    DEFAULT_SIGMA_J_REL
}

fn default_sigma_bz() -> f64 {
    DEFAULT_SIGMA_BZ_KHZ
}

fn default_b_field() -> f64 {
    1.0
}

fn default_larmor() -> f64 {
    DEFAULT_LARMOR_GHZ_PER_T
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_j_rel: default_sigma_j(),
            sigma_bz_khz: default_sigma_bz(),
            b_field_mt: default_b_field(),
            larmor_ghz_per_t: default_larmor(),
            sigma_j_rel_axis: BTreeMap::new(),
            sigma_bz_khz_dot: BTreeMap::new(),
        }
    }
}

impl NoiseConfig {
    pub fn b_uniform_hz(&self) -> f64 {
        self.b_field_mt * 1e-3 * self.larmor_ghz_per_t * 1e9
    }

    pub fn quasi_static(&self) -> QuasiStaticNoise {
        QuasiStaticNoise {
            sigma_j_rel: self.sigma_j_rel,
            sigma_bz_hz: self.sigma_bz_khz * 1e3,
            b_uniform_hz: self.b_uniform_hz(),
            sigma_j_rel_axis: self.sigma_j_rel_axis.clone(),
            sigma_bz_hz_dot: self
                .sigma_bz_khz_dot
                .iter()
                .map(|(k, v)| (k.clone(), v * 1e3))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceConfig {
    #[serde(default = "default_objective")]
    pub objective: PackObjective,
    #[serde(default = "default_solver")]
    pub solver: PackSolver,
}

fn default_objective() -> PackObjective {
    PackObjective::MaxCountThenAdjacency
}

fn default_solver() -> PackSolver {
    PackSolver::Exact
}

impl Default for PlaceConfig {
    fn default() -> Self {
        Self {
            objective: default_objective(),
            solver: default_solver(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerprintConfig {
    /// Axes to map; all live axes when empty.
    #[serde(default)]
    pub axes: Vec<String>,
    pub barrier_mv: Sweep,
    pub detuning_mv: Sweep,
    pub t_evolve_ns: f64,
    #[serde(default = "one")]
    pub shots: usize,
    #[serde(default)]
    pub mode: ReadoutMode,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoscConfig {
    #[serde(default)]
    pub axes: Vec<String>,
    pub j_mhz: f64,
    #[serde(default = "default_periods")]
    pub periods: f64,
    #[serde(default = "default_ppp")]
    pub points_per_period: usize,
    #[serde(default = "default_nosc_shots")]
    pub shots: usize,
    #[serde(default)]
    pub envelope_power: EnvelopePower,
    #[serde(default)]
    pub mode: ReadoutMode,
}

fn default_periods() -> f64 {
    40.0
}

fn default_ppp() -> usize {
    16
}

fn default_nosc_shots() -> usize {
    2000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RbConfig {
    /// Qubit name such as `X4Y5`.
    pub qubit: String,
    #[serde(default = "default_lengths")]
    pub lengths: Vec<usize>,
    #[serde(default = "default_sequences")]
    pub n_sequences: usize,
    #[serde(default = "default_rb_shots")]
    pub shots: usize,
    #[serde(default = "default_t_pulse")]
    pub t_pulse_ns: f64,
    #[serde(default = "default_t_idle")]
    pub t_idle_ns: f64,
    #[serde(default)]
    pub readout_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected_depolarizing: Option<f64>,
    #[serde(default)]
    pub mode: ReadoutMode,
}

pub fn default_lengths() -> Vec<usize> {
    (0..=9).map(|k| 1 << k).collect()
}

fn default_sequences() -> usize {
    20
}

fn default_rb_shots() -> usize {
    50
}

fn default_t_pulse() -> f64 {
    5.0
}

fn default_t_idle() -> f64 {
    10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteConfig {
    /// Route into this qubit's singlet pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit: Option<String>,
    /// Or leave one singlet member on this axis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    #[serde(default = "default_oracle_p")]
    pub rb_oracle_p: f64,
    #[serde(default = "default_oracle_qubit")]
    pub rb_oracle_qubit: String,
    #[serde(default = "default_oracle_lengths")]
    pub rb_oracle_lengths: Vec<usize>,
    #[serde(default = "default_sequences")]
    pub rb_oracle_sequences: usize,
    #[serde(default = "default_oracle_shots")]
    pub rb_oracle_shots: usize,
}

fn default_oracle_p() -> f64 {
    2e-3
}

fn default_oracle_qubit() -> String {
    "X4Y5".into()
}

fn default_oracle_lengths() -> Vec<usize> {
    (1..=8).map(|k| 1 << k).collect()
}

fn default_oracle_shots() -> usize {
    1000
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self {
            rb_oracle_p: default_oracle_p(),
            rb_oracle_qubit: default_oracle_qubit(),
            rb_oracle_lengths: default_oracle_lengths(),
            rb_oracle_sequences: default_sequences(),
            rb_oracle_shots: default_oracle_shots(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let g = &self.grid;
        let mut grid = GridSpec::new(g.n_rows, g.n_cols).map_err(|e| CliError::Config(e.to_string()))?;
        for name in &g.dead_dots {
            let d = grid
                .dot_by_name(name)
                .ok_or_else(|| CliError::Config(format!("unknown dead dot {name}")))?;
            grid = grid.with_dead_dot(d).map_err(|e| CliError::Config(e.to_string()))?;
        }
        for label in &g.dead_axes {
            grid = grid
                .with_dead_axis(label)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(grid)
    }

    pub fn spam_pair(&self, grid: &GridSpec) -> Result<(DotId, DotId), CliError> {
        let dot = |n: &str| {
            grid.dot_by_name(n)
                .ok_or_else(|| CliError::Config(format!("unknown spam dot {n}")))
        };
        Ok((dot(&self.spam_pair[0])?, dot(&self.spam_pair[1])?))
    }

    /// Cross-field checks beyond what deserialization enforces.
    pub fn validate(&self, experiment: Experiment) -> Result<(), CliError> {
        if let Some(e) = self.experiment {
            if e != experiment {
                return Err(CliError::Config(format!(
                    "config is for `{}` but `{}` was requested",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        let grid = self.grid()?;
        self.spam_pair(&grid)?;
        self.exchange.default.model()?;
        for (label, m) in &self.exchange.axes {
            if grid.axis_by_label(label).is_none() {
                return Err(CliError::Config(format!("exchange override for unknown axis {label}")));
            }
            m.model()?;
        }
        let n = &self.noise;
        if !(n.b_field_mt >= 0.0 && n.larmor_ghz_per_t >= 0.0) {
            return Err(CliError::Config("b_field_mt and larmor_ghz_per_t must be >= 0".into()));
        }
        n.quasi_static()
            .validate(&grid)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let missing = |block: &str| CliError::Config(format!("`{}` needs a `{block}` block", experiment.name()));
        match experiment {
            Experiment::Fingerprint => {
                let f = self.fingerprint.as_ref().ok_or_else(|| missing("fingerprint"))?;
                if f.barrier_mv.steps == 0 || f.detuning_mv.steps == 0 || !(f.t_evolve_ns >= 0.0) {
                    return Err(CliError::Config("fingerprint sweeps need steps >= 1 and t_evolve_ns >= 0".into()));
                }
            }
            Experiment::Nosc => {
                let c = self.nosc.as_ref().ok_or_else(|| missing("nosc"))?;
                if !(c.j_mhz > 0.0) || c.periods < 8.0 || c.points_per_period < 8 {
                    return Err(CliError::Config(
                        "nosc needs j_mhz > 0, periods >= 8 and points_per_period >= 8".into(),
                    ));
                }
            }
            Experiment::Rb => {
                self.rb.as_ref().ok_or_else(|| missing("rb"))?;
            }
            Experiment::Route => {
                let r = self.route.as_ref().ok_or_else(|| missing("route"))?;
                if r.qubit.is_some() == r.axis.is_some() {
                    return Err(CliError::Config("route needs exactly one of `qubit` or `axis`".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }
}
