//! The six reference experiments.

use std::fmt;
use std::str::FromStr;

use crate::controller::{ControllerParams, FormationSpec};
use crate::dynamics::DisturbanceKind;
use crate::engine::{
    ErrorRateMode, SimConfig, TopologySpec, TriggerPolicy, DEFAULT_DT, DEFAULT_REACHING_BAND, DEFAULT_T_END,
};
use crate::graph::paper_example;

pub const MATCHED_AMPLITUDE: f64 = 0.3;
pub const MISMATCHED_AMPLITUDE: f64 = 9.0;
pub const FORMATION_OFFSETS: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
pub const INITIAL_STATES: [f64; 4] = [10.0, -7.0, 4.0, -9.0];
pub const DEFAULT_SEED: u64 = 20_190_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioPreset {
    Consensus,
    ConsensusMatched,
    ConsensusMismatched,
    Formation,
    FormationMatched,
    FormationMismatched,
}

impl ScenarioPreset {
    pub const ALL: [ScenarioPreset; 6] = [
        Self::Consensus,
        Self::ConsensusMatched,
        Self::ConsensusMismatched,
        Self::Formation,
        Self::FormationMatched,
        Self::FormationMismatched,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Consensus => "consensus",
            Self::ConsensusMatched => "consensus-matched",
            Self::ConsensusMismatched => "consensus-mismatched",
            Self::Formation => "formation",
            Self::FormationMatched => "formation-matched",
            Self::FormationMismatched => "formation-mismatched",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Consensus => "consensus tracking, no disturbance",
            Self::ConsensusMatched => "consensus tracking, disturbance amplitude 0.3",
            Self::ConsensusMismatched => "consensus tracking, disturbance amplitude 9",
            Self::Formation => "formation with offsets (1, 2, 3, 4), no disturbance",
            Self::FormationMatched => "formation, disturbance amplitude 0.3",
            Self::FormationMismatched => "formation, disturbance amplitude 9",
        }
    }

    pub fn disturbance_kind(self) -> DisturbanceKind {
        match self {
            Self::Consensus | Self::Formation => DisturbanceKind::None,
            Self::ConsensusMatched | Self::FormationMatched => DisturbanceKind::Matched,
            Self::ConsensusMismatched | Self::FormationMismatched => DisturbanceKind::Mismatched,
        }
    }

    pub fn is_formation(self) -> bool {
        matches!(
            self,
            Self::Formation | Self::FormationMatched | Self::FormationMismatched
        )
    }

    pub fn config(self) -> SimConfig {
        let (adjacency, pinning) = paper_example();
        let n = INITIAL_STATES.len();
        let kind = self.disturbance_kind();
        let amplitude = match kind {
            DisturbanceKind::None => 0.0,
            DisturbanceKind::Matched => MATCHED_AMPLITUDE,
            DisturbanceKind::Mismatched => MISMATCHED_AMPLITUDE,
        };
        SimConfig {
            topology: TopologySpec { adjacency, pinning },
            leader_model: "leader".into(),
            follower_models: ["f1", "f2", "f3", "f4"].map(String::from).to_vec(),
            params: ControllerParams::paper(n),
            formation: if self.is_formation() {
                FormationSpec::new(FORMATION_OFFSETS.to_vec())
            } else {
                FormationSpec::consensus(n)
            },
            disturbance_kind: kind,
            leader_disturbance: 0.0,
            follower_disturbance: vec![amplitude; n],
            leader_initial: 0.0,
            initial_states: INITIAL_STATES.to_vec(),
            dt: DEFAULT_DT,
            t_end: DEFAULT_T_END,
            seed: DEFAULT_SEED,
            error_rate: ErrorRateMode::Exact,
            trigger: TriggerPolicy::Rule,
            oracle_disturbance: false,
            reaching_band: DEFAULT_REACHING_BAND,
        }
    }
}

impl fmt::Display for ScenarioPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioPreset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consensus_uses_table_values() {
        let c = ScenarioPreset::Consensus.config();
        assert_eq!(c.params.c0, 1e-4);
        assert_eq!(c.params.c1, 0.2499);
        assert_eq!(c.params.gamma1, 0.8);
        assert_eq!(c.params.gamma2, 0.8);
        assert_eq!(c.params.k, 15.0);
        assert_eq!(c.params.beta, 1.0);
        assert_eq!(c.params.tau, 0.5);
        assert_eq!(c.initial_states, vec![10.0, -7.0, 4.0, -9.0]);
        assert_eq!(c.leader_initial, 0.0);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn disturbance_amplitudes() {
        assert_eq!(ScenarioPreset::ConsensusMatched.config().follower_disturbance, vec![0.3; 4]);
        assert_eq!(ScenarioPreset::FormationMismatched.config().follower_disturbance, vec![9.0; 4]);
        assert_eq!(ScenarioPreset::Formation.config().leader_disturbance, 0.0);
    }

    #[test]
    fn names_parse_back() {
        for p in ScenarioPreset::ALL {
            assert_eq!(p.name().parse::<ScenarioPreset>().unwrap(), p);
        }
        assert!("bogus".parse::<ScenarioPreset>().is_err());
    }
}
