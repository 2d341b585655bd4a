//! Experiment configuration: one JSON document per run, unknown keys
//! rejected, every numeric parameter bounds-checked before anything heavy
//! starts.

use serde::Deserialize;

use schrodsim_core::fokker_planck::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "snake_case")]
pub enum Experiment {
    OdeSchrod,
    FpConservation1,
    FpConservation2,
    FpHeatSplit,
    FpFdCircuit,
    EigScan,
    ShiftVerify,
    SplittingVerify,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::OdeSchrod => "ode_schrod",
            Experiment::FpConservation1 => "fp_conservation1",
            Experiment::FpConservation2 => "fp_conservation2",
            Experiment::FpHeatSplit => "fp_heat_split",
            Experiment::FpFdCircuit => "fp_fd_circuit",
            Experiment::EigScan => "eig_scan",
            Experiment::ShiftVerify => "shift_verify",
            Experiment::SplittingVerify => "splitting_verify",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Quadratic,
    Cosine,
    Constant { value: f64 },
    Table { values: Vec<f64> },
}

impl PotentialSpec {
    pub fn to_potential(&self) -> Potential {
        match self {
            PotentialSpec::Quadratic => Potential::Quadratic,
            PotentialSpec::Cosine => Potential::Cosine,
            PotentialSpec::Constant { value } => Potential::Constant(*value),
            PotentialSpec::Table { values } => Potential::Table(values.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            PotentialSpec::Quadratic => "quadratic".into(),
            PotentialSpec::Cosine => "cosine".into(),
            PotentialSpec::Constant { value } => format!("constant({value})"),
            PotentialSpec::Table { values } => format!("table[{}]", values.len()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// du/dt = 0: restoration must reproduce u0 exactly.
    Zero { n: usize },
    /// H₁ = −B†B at unit spectral radius plus random Hermitian H₂.
    RandomStable { n: usize },
    /// Stable instance shifted so λ₊ = delta.
    RandomUnstable { n: usize, delta: f64 },
    /// Explicit complex matrix, row-major [re, im] pairs.
    Matrix { entries: Vec<Vec<[f64; 2]>> },
}

fn default_tail_tol() -> f64 {
    1e-9
}

fn default_l0() -> f64 {
    -1.0
}

fn default_t_final() -> f64 {
    1.0
}

fn default_stage_order() -> String {
    "transport_phase".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSchrodConfig {
    pub experiment: String,
    pub system: SystemSpec,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Dyadic spacings: each entry k gives dp = 2^-k.
    pub dp_exponents: Vec<i32>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_l0")]
    pub l0: f64,
    /// Restoration averaging window (1 = single point).
    #[serde(default)]
    pub window: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpEvolveConfig {
    pub experiment: String,
    pub m: usize,
    pub sigma: f64,
    pub potential: PotentialSpec,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    pub dp_exponents: Vec<i32>,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_l0")]
    pub l0: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpHeatSplitConfig {
    pub experiment: String,
    pub m: usize,
    pub sigma: f64,
    pub potential: PotentialSpec,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    pub steps_list: Vec<usize>,
    /// Reference runs at steps_list.max() * refinement.
    #[serde(default = "default_refinement")]
    pub reference_refinement: usize,
    pub np: usize,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_l0")]
    pub l0: f64,
    /// Sub-step order; only "transport_phase" is accepted.
    #[serde(default = "default_stage_order")]
    pub stage_order: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_refinement() -> usize {
    16
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpFdCircuitConfig {
    pub experiment: String,
    pub n_x: usize,
    pub n_p: usize,
    /// Spatial domain length; the mesh width is length / 2^{n_x}.
    pub length: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
    #[serde(default = "default_l0")]
    pub l0: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigScanConfig {
    pub experiment: String,
    pub potential: PotentialSpec,
    pub sigma: f64,
    pub m_list: Vec<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftVerifyConfig {
    pub experiment: String,
    pub n_x_max: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingVerifyConfig {
    pub experiment: String,
    pub instances: usize,
    pub n: usize,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    pub steps: usize,
    #[serde(default = "default_stage_order")]
    pub stage_order: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A configuration problem: reported with the offending key, exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse<T: serde::de::DeserializeOwned>(
    raw: &str,
    experiment: Experiment,
) -> Result<T, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(raw).map_err(|e| ConfigError(format!("not valid JSON: {e}")))?;
    match value.get("experiment").and_then(|v| v.as_str()) {
        Some(name) if name == experiment.name() => {}
        Some(name) => {
            return Err(ConfigError(format!(
                "config is for experiment {name:?} but {} was requested",
                experiment.name()
            )))
        }
        None => return Err(ConfigError("missing key \"experiment\"".into())),
    }
    serde_json::from_value(value).map_err(|e| ConfigError(e.to_string()))
}

pub fn check_stage_order(order: &str) -> Result<(), ConfigError> {
    if order != "transport_phase" {
        return Err(ConfigError(format!(
            "stage_order: only \"transport_phase\" is supported (the sub-flows do not \
             commute, so \"{order}\" would be a different scheme)"
        )));
    }
    Ok(())
}

pub fn check_dp_exponents(exps: &[i32]) -> Result<(), ConfigError> {
    if exps.is_empty() {
        return Err(ConfigError("dp_exponents: at least one entry required".into()));
    }
    if exps.iter().any(|&k| !(1..=14).contains(&k)) {
        return Err(ConfigError("dp_exponents: entries must lie in 1..=14".into()));
    }
    Ok(())
}
