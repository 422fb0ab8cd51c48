//! Learned agents and one training episode.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, SlotInputs};
use crate::bss::Bss;
use crate::ledger::TransmissionLedger;
use crate::medium::{AccessMode, ConfigError, Intent, SimConfig};
use crate::neural::{log_softmax_at, softmax, Net, Tape};
use crate::observation::ObservationKind;
use crate::reward::{reward_series, RewardKind};
use crate::topology::TopologyGraph;

/// How an actor turns its distribution into an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionMode {
    #[default]
    Sample,
    Argmax,
}

/// One decision slot of one terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub slot: u64,
    /// The medium dictated the outcome (mid-packet or listen-before-talk);
    /// the network was not consulted.
    pub forced: bool,
    pub transmit: bool,
    /// Behavior log-probability of the chosen action (0 when forced).
    pub logp: f32,
    /// Encoded observation the actor saw; empty when forced.
    pub observation: Vec<f32>,
}

impl Decision {
    pub fn probability(&self) -> f32 {
        self.logp.exp()
    }
}

/// An actor network driving one terminal.
pub struct PolicyAgent<'a> {
    net: &'a Net<f32>,
    rng: ChaCha8Rng,
    mode: ActionMode,
    record: bool,
    tape: Tape<f32>,
    input: Vec<f32>,
    decisions: Vec<Decision>,
}

impl<'a> PolicyAgent<'a> {
    pub fn new(net: &'a Net<f32>, rng: ChaCha8Rng, mode: ActionMode) -> Self {
        let len = net.shape().sample_len();
        Self { net, rng, mode, record: false, tape: Tape::new(), input: vec![0.0; len], decisions: Vec::new() }
    }

    /// Keep every decision for training.
    pub fn recording(mut self) -> Self {
        self.record = true;
        self
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    pub fn into_decisions(self) -> Vec<Decision> {
        self.decisions
    }

    /// `[Pr(idle), Pr(transmit)]` for an encoded observation.
    pub fn distribution(&mut self, observation: &[f32]) -> [f32; 2] {
        let logits = self.net.forward(observation, 1, &mut self.tape).expect("observation shape");
        let mut p = [0.0; 2];
        softmax(logits, &mut p);
        p
    }
}

impl Agent for PolicyAgent<'_> {
    fn decide(&mut self, inputs: &SlotInputs<'_>) -> Intent {
        if inputs.forced() {
            if self.record {
                self.decisions.push(Decision {
                    slot: inputs.slot,
                    forced: true,
                    transmit: false,
                    logp: 0.0,
                    observation: Vec::new(),
                });
            }
            return Intent::Idle;
        }
        inputs.observation.encode_into(&mut self.input);
        let logits = self.net.forward(&self.input, 1, &mut self.tape).expect("observation shape");
        let mut p = [0.0f32; 2];
        softmax(logits, &mut p);
        let transmit = match self.mode {
            ActionMode::Sample => self.rng.gen::<f32>() < p[1],
            ActionMode::Argmax => p[1] > p[0],
        };
        if self.record {
            let logp = log_softmax_at(logits, transmit as usize);
            self.decisions.push(Decision {
                slot: inputs.slot,
                forced: false,
                transmit,
                logp,
                observation: self.input.clone(),
            });
        }
        if transmit {
            Intent::Transmit
        } else {
            Intent::Idle
        }
    }
}

/// Everything one episode leaves behind for the update.
#[derive(Debug, Clone)]
pub struct Episode {
    /// First decision slot; equals the look-back width.
    pub first_slot: u64,
    /// Per terminal, one entry per decision slot.
    pub decisions: Vec<Vec<Decision>>,
    /// Encoded global states `S^t`, `W x N` each, for every rewarded slot.
    pub states: Vec<f32>,
    /// Rewards of decision slots `first_slot..=T_e - D`.
    pub rewards: Vec<f64>,
    pub ledger: TransmissionLedger,
    /// Mean unknown fraction at decision time.
    pub unknown_fraction: f64,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    /// Index into `rewards` for a decision slot, if that slot is rewarded.
    pub fn step_index(&self, slot: u64) -> Option<usize> {
        let i = slot.checked_sub(self.first_slot)? as usize;
        (i < self.rewards.len()).then_some(i)
    }
}

/// Plays one episode: `W` idle warmup slots, then decisions for
/// `t = W .. T_e - 1`. Rewards and states cover `t = W ..= T_e - D`.
pub fn run_episode(
    graph: &TopologyGraph,
    sim: &SimConfig,
    actors: &[Net<f32>],
    rngs: Vec<ChaCha8Rng>,
    observation: ObservationKind,
    reward: RewardKind,
) -> Result<Episode, ConfigError> {
    let agents: Vec<PolicyAgent> = actors
        .iter()
        .zip(rngs)
        .map(|(net, rng)| PolicyAgent::new(net, rng, ActionMode::Sample).recording())
        .collect();
    let mut bss = Bss::with_observations(graph, sim.clone(), AccessMode::Basic, agents, observation)?;
    let (w, end, d) = (sim.lookback as u64, sim.episode_len as u64, sim.packet_len as u64);
    let n = graph.terminal_count();
    bss.idle_slots(w as usize);
    let last_rewarded = end - d;
    let mut states = Vec::with_capacity((last_rewarded + 1 - w) as usize * n * sim.lookback);
    let mut state = vec![0.0f32; n * sim.lookback];
    let mut unknown = 0.0;
    for t in w..end {
        if t <= last_rewarded {
            bss.medium().global_state().encode_into(&mut state);
            states.extend_from_slice(&state);
        }
        unknown += bss.unknown_fraction();
        bss.step();
    }
    let (medium, agents) = bss.into_parts();
    let ledger = medium.into_ledger();
    let rewards = reward_series(&ledger, reward, w, last_rewarded, w);
    Ok(Episode {
        first_slot: w,
        decisions: agents.into_iter().map(PolicyAgent::into_decisions).collect(),
        states,
        rewards,
        ledger,
        unknown_fraction: unknown / (end - w) as f64,
    })
}
