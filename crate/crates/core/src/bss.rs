//! One basic service set: a medium, one agent per terminal, and the
//! terminals' observation buffers kept in step with the channel.

use crate::agent::{Agent, SlotInputs};
use crate::medium::{AccessMode, ConfigError, Intent, Medium, SimConfig, SlotRecord};
use crate::observation::{ObservationBuffer, ObservationKind, Revision};
use crate::topology::TopologyGraph;

pub struct Bss<A> {
    medium: Medium,
    agents: Vec<A>,
    observations: Vec<ObservationBuffer>,
    last: Option<SlotRecord>,
    revisions: Vec<Vec<Revision>>,
    record_revisions: bool,
}

impl<A: Agent> Bss<A> {
    pub fn new(graph: &TopologyGraph, sim: SimConfig, mode: AccessMode, agents: Vec<A>) -> Result<Self, ConfigError> {
        Self::with_observations(graph, sim, mode, agents, ObservationKind::LookBack)
    }

    pub fn with_observations(
        graph: &TopologyGraph,
        sim: SimConfig,
        mode: AccessMode,
        agents: Vec<A>,
        kind: ObservationKind,
    ) -> Result<Self, ConfigError> {
        assert_eq!(agents.len(), graph.terminal_count(), "one agent per terminal");
        let w = sim.lookback;
        let medium = Medium::new(graph, sim, mode)?;
        let n = agents.len();
        Ok(Self {
            medium,
            agents,
            observations: (0..n).map(|_| ObservationBuffer::new(kind, w)).collect(),
            last: None,
            revisions: vec![Vec::new(); n],
            record_revisions: false,
        })
    }

    /// Keep the look-back branch taken by every terminal in every slot.
    pub fn track_revisions(&mut self, on: bool) {
        self.record_revisions = on;
    }

    pub fn revisions(&self, n: usize) -> &[Revision] {
        &self.revisions[n]
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn agents(&self) -> &[A] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [A] {
        &mut self.agents
    }

    pub fn into_parts(self) -> (Medium, Vec<A>) {
        (self.medium, self.agents)
    }

    pub fn observation(&self, n: usize) -> &ObservationBuffer {
        &self.observations[n]
    }

    pub fn last_record(&self) -> Option<&SlotRecord> {
        self.last.as_ref()
    }

    /// Mean unknown fraction over all terminals' current observations.
    pub fn unknown_fraction(&self) -> f64 {
        self.observations.iter().map(|o| o.unknown_fraction()).sum::<f64>() / self.observations.len() as f64
    }

    /// Advances one slot with every agent deciding.
    pub fn step(&mut self) -> &SlotRecord {
        let slot = self.medium.slot();
        let previous = self.last.as_ref();
        let intents: Vec<Intent> = self
            .agents
            .iter_mut()
            .enumerate()
            .map(|(n, agent)| {
                let term = self.medium.terminal(n);
                let inputs = SlotInputs {
                    terminal: n,
                    slot,
                    previous,
                    mid_packet: self.medium.mid_packet(n),
                    idle_streak: term.sensed_idle_streak,
                    lbt_ok: self.medium.lbt_satisfied(n),
                    granted: self.medium.holds_grant(n),
                    observation: &self.observations[n],
                };
                agent.decide(&inputs)
            })
            .collect();
        self.apply(&intents)
    }

    /// Advances `slots` slots with everyone held idle and no agent consulted.
    pub fn idle_slots(&mut self, slots: usize) {
        let intents = vec![Intent::Idle; self.agents.len()];
        for _ in 0..slots {
            self.apply(&intents);
        }
    }

    fn apply(&mut self, intents: &[Intent]) -> &SlotRecord {
        let record = self.medium.step(intents);
        let ack = record.ack().is_some();
        let d = self.medium.config().packet_len;
        for (n, obs) in self.observations.iter_mut().enumerate() {
            let rev = obs.advance(record.transmitting(n), record.sense[n], ack, d);
            if self.record_revisions {
                self.revisions[n].push(rev);
            }
        }
        self.last.insert(record)
    }
}
