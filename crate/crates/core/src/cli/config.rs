//! TOML configuration files.
//!
//! ```toml
//! [simulation]            # optional, defaults shown
//! dt = 0.001
//! t_end = 10.0
//! seed = 20190101
//! error_rate = "exact"    # or "backward"
//! trigger = "rule"        # or "every-step"
//! oracle_disturbance = false
//! reaching_band = 0.25
//!
//! [topology]
//! adjacency = [[0, 0, 1, 0], [0, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]
//! pinning = [1, 1, 0, 0]
//!
//! [agents]
//! leader_model = "leader"
//! follower_models = ["f1", "f2", "f3", "f4"]
//! leader_initial = 0.0
//! initial = [10, -7, 4, -9]
//! formation = [0, 0, 0, 0]          # optional
//!
//! [controller]
//! k = 15.0
//! tau = 0.5
//! gamma1 = 0.8
//! gamma2 = 0.8
//! c0 = 1e-4
//! c1 = 0.2499
//! beta = 1.0
//! assumed_disturbance = [0, 0, 0, 0]  # optional
//!
//! [disturbance]           # optional
//! kind = "matched"        # none | matched | mismatched
//! leader_amplitude = 0.0
//! amplitudes = [0.3, 0.3, 0.3, 0.3]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

use crate::controller::{ControllerError, ControllerParams, FormationSpec};
use crate::dynamics::DisturbanceKind;
use crate::engine::{
    ErrorRateMode, SimConfig, SimError, TopologySpec, TriggerPolicy, DEFAULT_DT, DEFAULT_REACHING_BAND, DEFAULT_T_END,
};
use crate::scenarios::DEFAULT_SEED;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("topology: {0}")]
    Topology(String),
}

impl From<SimError> for ConfigError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Invalid { key, reason } => ConfigError::Invalid {
                key: key.to_string(),
                reason,
            },
            SimError::Controller(ControllerError::Invalid { key, reason }) => ConfigError::Invalid {
                key: key.to_string(),
                reason,
            },
            SimError::Graph(g) => ConfigError::Topology(g.to_string()),
            SimError::Dynamics(d) => ConfigError::Invalid {
                key: "follower_models".into(),
                reason: d.to_string(),
            },
            other => ConfigError::Invalid {
                key: "config".into(),
                reason: other.to_string(),
            },
        }
    }
}

/// Accepts TOML integers wherever a float is expected.
#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Int(i64),
}

impl From<Number> for f64 {
    fn from(n: Number) -> f64 {
        match n {
            Number::Float(v) => v,
            Number::Int(v) => v as f64,
        }
    }
}

fn num<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Number::deserialize(d).map(f64::from)
}

fn num_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
    Ok(Vec::<Number>::deserialize(d)?.into_iter().map(f64::from).collect())
}

fn opt_num_vec<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    num_vec(d).map(Some)
}

fn num_matrix<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
    Ok(Vec::<Vec<Number>>::deserialize(d)?
        .into_iter()
        .map(|r| r.into_iter().map(f64::from).collect())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ErrorRateName {
    Exact,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum TriggerName {
    Rule,
    EveryStep,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulationSection {
    #[serde(default = "default_dt", deserialize_with = "num")]
    dt: f64,
    #[serde(default = "default_t_end", deserialize_with = "num")]
    t_end: f64,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_error_rate")]
    error_rate: ErrorRateName,
    #[serde(default = "default_trigger")]
    trigger: TriggerName,
    #[serde(default)]
    oracle_disturbance: bool,
    #[serde(default = "default_band", deserialize_with = "num")]
    reaching_band: f64,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_t_end() -> f64 {
    DEFAULT_T_END
}
fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_error_rate() -> ErrorRateName {
    ErrorRateName::Exact
}
fn default_trigger() -> TriggerName {
    TriggerName::Rule
}
fn default_band() -> f64 {
    DEFAULT_REACHING_BAND
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            seed: DEFAULT_SEED,
            error_rate: ErrorRateName::Exact,
            trigger: TriggerName::Rule,
            oracle_disturbance: false,
            reaching_band: DEFAULT_REACHING_BAND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologySection {
    #[serde(deserialize_with = "num_matrix")]
    adjacency: Vec<Vec<f64>>,
    #[serde(deserialize_with = "num_vec")]
    pinning: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentsSection {
    #[serde(default = "default_leader_model")]
    leader_model: String,
    follower_models: Vec<String>,
    #[serde(default, deserialize_with = "num")]
    leader_initial: f64,
    #[serde(deserialize_with = "num_vec")]
    initial: Vec<f64>,
    #[serde(default, deserialize_with = "opt_num_vec", skip_serializing_if = "Option::is_none")]
    formation: Option<Vec<f64>>,
}

fn default_leader_model() -> String {
    "leader".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ControllerSection {
    #[serde(deserialize_with = "num")]
    k: f64,
    #[serde(deserialize_with = "num")]
    tau: f64,
    #[serde(deserialize_with = "num")]
    gamma1: f64,
    #[serde(deserialize_with = "num")]
    gamma2: f64,
    #[serde(deserialize_with = "num")]
    c0: f64,
    #[serde(deserialize_with = "num")]
    c1: f64,
    #[serde(deserialize_with = "num")]
    beta: f64,
    #[serde(default, deserialize_with = "opt_num_vec", skip_serializing_if = "Option::is_none")]
    assumed_disturbance: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DisturbanceSection {
    #[serde(default)]
    kind: DisturbanceKind,
    #[serde(default, deserialize_with = "num")]
    leader_amplitude: f64,
    #[serde(default, deserialize_with = "opt_num_vec", skip_serializing_if = "Option::is_none")]
    amplitudes: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default)]
    simulation: SimulationSection,
    topology: TopologySection,
    agents: AgentsSection,
    controller: ControllerSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    disturbance: Option<DisturbanceSection>,
}

impl ConfigFile {
    fn into_sim_config(self) -> SimConfig {
        let n = self.agents.initial.len();
        let disturbance = self.disturbance.unwrap_or(DisturbanceSection {
            kind: DisturbanceKind::None,
            leader_amplitude: 0.0,
            amplitudes: None,
        });
        SimConfig {
            topology: TopologySpec {
                adjacency: self.topology.adjacency,
                pinning: self.topology.pinning,
            },
            leader_model: self.agents.leader_model,
            follower_models: self.agents.follower_models,
            params: ControllerParams {
                k: self.controller.k,
                tau: self.controller.tau,
                gamma1: self.controller.gamma1,
                gamma2: self.controller.gamma2,
                c0: self.controller.c0,
                c1: self.controller.c1,
                beta: self.controller.beta,
                assumed_disturbance: self.controller.assumed_disturbance.unwrap_or_else(|| vec![0.0; n]),
            },
            formation: FormationSpec::new(self.agents.formation.unwrap_or_else(|| vec![0.0; n])),
            disturbance_kind: disturbance.kind,
            leader_disturbance: disturbance.leader_amplitude,
            follower_disturbance: disturbance.amplitudes.unwrap_or_else(|| vec![0.0; n]),
            leader_initial: self.agents.leader_initial,
            initial_states: self.agents.initial,
            dt: self.simulation.dt,
            t_end: self.simulation.t_end,
            seed: self.simulation.seed,
            error_rate: match self.simulation.error_rate {
                ErrorRateName::Exact => ErrorRateMode::Exact,
                ErrorRateName::Backward => ErrorRateMode::Backward,
            },
            trigger: match self.simulation.trigger {
                TriggerName::Rule => TriggerPolicy::Rule,
                TriggerName::EveryStep => TriggerPolicy::EveryStep,
            },
            oracle_disturbance: self.simulation.oracle_disturbance,
            reaching_band: self.simulation.reaching_band,
        }
    }

    fn from_sim_config(c: &SimConfig) -> Self {
        Self {
            simulation: SimulationSection {
                dt: c.dt,
                t_end: c.t_end,
                seed: c.seed,
                error_rate: match c.error_rate {
                    ErrorRateMode::Exact => ErrorRateName::Exact,
                    ErrorRateMode::Backward => ErrorRateName::Backward,
                },
                trigger: match c.trigger {
                    TriggerPolicy::Rule => TriggerName::Rule,
                    TriggerPolicy::EveryStep => TriggerName::EveryStep,
                },
                oracle_disturbance: c.oracle_disturbance,
                reaching_band: c.reaching_band,
            },
            topology: TopologySection {
                adjacency: c.topology.adjacency.clone(),
                pinning: c.topology.pinning.clone(),
            },
            agents: AgentsSection {
                leader_model: c.leader_model.clone(),
                follower_models: c.follower_models.clone(),
                leader_initial: c.leader_initial,
                initial: c.initial_states.clone(),
                formation: Some(c.formation.offsets.clone()),
            },
            controller: ControllerSection {
                k: c.params.k,
                tau: c.params.tau,
                gamma1: c.params.gamma1,
                gamma2: c.params.gamma2,
                c0: c.params.c0,
                c1: c.params.c1,
                beta: c.params.beta,
                assumed_disturbance: Some(c.params.assumed_disturbance.clone()),
            },
            disturbance: Some(DisturbanceSection {
                kind: c.disturbance_kind,
                leader_amplitude: c.leader_disturbance,
                amplitudes: Some(c.follower_disturbance.clone()),
            }),
        }
    }
}

/// Full structural check of a configuration, including leader reachability.
pub fn validate_config(config: &SimConfig) -> Result<(), ConfigError> {
    config.validate()?;
    config.models()?;
    let topology = config.topology.build().map_err(SimError::from)?;
    if !topology.has_leader_rooted_spanning_tree() {
        return Err(ConfigError::Topology(
            "the leader does not reach every follower, so L+B is singular (Lemma 2 requires a leader-rooted spanning tree)"
                .into(),
        ));
    }
    Ok(())
}

pub fn parse_config_str(text: &str) -> Result<SimConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let config = file.into_sim_config();
    validate_config(&config)?;
    Ok(config)
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<SimConfig, ConfigError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text)
}

/// Serializes a configuration to the file format read by [`parse_config`].
pub fn to_toml(config: &SimConfig) -> String {
    toml::to_string(&ConfigFile::from_sim_config(config)).expect("config is always serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::ScenarioPreset;

    #[test]
    fn presets_round_trip_through_text() {
        for p in ScenarioPreset::ALL {
            let c = p.config();
            let text = to_toml(&c);
            assert_eq!(parse_config_str(&text).unwrap(), c, "{p}");
        }
    }

    const MINIMAL: &str = r#"
[topology]
adjacency = [[0, 1], [0, 0]]
pinning = [0, 1]

[agents]
follower_models = ["f1", "f2"]
initial = [1, -2]

[controller]
k = 15
tau = 0.5
gamma1 = 0.8
gamma2 = 0.8
c0 = 1e-4
c1 = 0.2499
beta = 1
"#;

    #[test]
    fn integers_and_defaults() {
        let c = parse_config_str(MINIMAL).unwrap();
        assert_eq!(c.initial_states, vec![1.0, -2.0]);
        assert_eq!(c.dt, DEFAULT_DT);
        assert_eq!(c.formation.offsets, vec![0.0, 0.0]);
        assert_eq!(c.follower_disturbance, vec![0.0, 0.0]);
        assert_eq!(c.params.k, 15.0);
    }

    #[test]
    fn tau_out_of_range_names_key() {
        let text = MINIMAL.replace("tau = 0.5", "tau = 1.5");
        match parse_config_str(&text) {
            Err(ConfigError::Invalid { key, reason }) => {
                assert_eq!(key, "tau");
                assert!(reason.contains("(0,1)"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_threshold_rejected() {
        let text = MINIMAL.replace("c0 = 1e-4", "c0 = 0").replace("c1 = 0.2499", "c1 = 0");
        assert!(matches!(parse_config_str(&text), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn unreachable_followers_cite_lemma() {
        let text = MINIMAL.replace("pinning = [0, 1]", "pinning = [0, 0]");
        match parse_config_str(&text) {
            Err(ConfigError::Topology(msg)) => assert!(msg.contains("Lemma 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("beta = 1", "beta = 1\ngain = 3");
        assert!(matches!(parse_config_str(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            parse_config("/nonexistent/etsmc.toml"),
            Err(ConfigError::Io { .. })
        ));
    }

    #[test]
    fn bad_model_name() {
        let text = MINIMAL.replace("\"f2\"", "\"f9\"");
        assert!(matches!(parse_config_str(&text), Err(ConfigError::Invalid { .. })));
    }
}
