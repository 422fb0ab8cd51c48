use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baseline::BackoffConfig;
use crate::eval::EVAL_WINDOW;
use crate::medium::{AccessMode, SimConfig};
use crate::metrics::Fairness;
use crate::observation::ObservationKind;
use crate::reward::RewardKind;
use crate::trainer::{ActionMode, TrainConfig};

use super::RunError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Which agent drives every terminal of the BSS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgentFamily {
    /// Look-back observations with the window reward.
    #[serde(rename = "madrl-ht")]
    MadrlHt,
    /// Raw ACK-row observations with the window reward.
    #[serde(rename = "madrl-alt-obs")]
    MadrlAltObs,
    /// Look-back observations with the α-fairness reward.
    #[serde(rename = "madrl-alpha-reward")]
    MadrlAlphaReward,
    #[serde(rename = "csma")]
    Csma,
    #[serde(rename = "rtscts")]
    RtsCts,
}

impl AgentFamily {
    pub const ALL: [AgentFamily; 5] =
        [Self::MadrlHt, Self::MadrlAltObs, Self::MadrlAlphaReward, Self::Csma, Self::RtsCts];

    pub fn name(self) -> &'static str {
        match self {
            Self::MadrlHt => "madrl-ht",
            Self::MadrlAltObs => "madrl-alt-obs",
            Self::MadrlAlphaReward => "madrl-alpha-reward",
            Self::Csma => "csma",
            Self::RtsCts => "rtscts",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    pub fn is_learned(self) -> bool {
        matches!(self, Self::MadrlHt | Self::MadrlAltObs | Self::MadrlAlphaReward)
    }

    pub fn observation(self) -> ObservationKind {
        match self {
            Self::MadrlAltObs => ObservationKind::AckRow,
            _ => ObservationKind::LookBack,
        }
    }

    pub fn reward(self, fairness: Fairness) -> RewardKind {
        match self {
            Self::MadrlAlphaReward => RewardKind::Alpha { alpha: fairness.alpha, eps: fairness.eps },
            _ => RewardKind::Window,
        }
    }

    pub fn access_mode(self) -> AccessMode {
        match self {
            Self::RtsCts => AccessMode::RtsCts,
            _ => AccessMode::Basic,
        }
    }
}

/// The final evaluation of every seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    /// Slots per throughput window.
    pub window: u64,
    /// Measured slots.
    pub slots: u64,
    pub mode: ActionMode,
    /// Slots of the evaluation written to `trace.jsonl`.
    pub trace_slots: u64,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self { window: EVAL_WINDOW, slots: 10 * EVAL_WINDOW, mode: ActionMode::Sample, trace_slots: 200 }
    }
}

/// One experiment arm: a topology, an agent family and everything needed
/// to reproduce its runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Directory name of the arm inside the output directory.
    pub name: String,
    /// Short name such as `topo4p` or group notation such as `{A,B,C|D}`.
    pub topology: String,
    pub agent: AgentFamily,
    pub seeds: Vec<u64>,
    /// Save networks every this many epochs; the final networks are always saved.
    pub checkpoint_every: usize,
    pub sim: SimConfig,
    pub train: TrainConfig,
    pub backoff: BackoffConfig,
    pub fairness: Fairness,
    pub eval: EvalSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "run".into(),
            topology: "topo2".into(),
            agent: AgentFamily::MadrlHt,
            seeds: vec![1],
            checkpoint_every: 0,
            sim: SimConfig::default(),
            train: TrainConfig::default(),
            backoff: BackoffConfig::default(),
            fairness: Fairness::default(),
            eval: EvalSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        hex::encode(&digest[..8])
    }

    /// The training settings with reward and observation fixed by the family.
    pub fn train_config(&self) -> TrainConfig {
        let mut t = self.train.clone();
        t.reward = self.agent.reward(self.fairness);
        t.observation = self.agent.observation();
        t
    }
}
