//! CSMA/CA with binary exponential backoff, and its RTS/CTS variant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, SlotInputs};
use crate::medium::{FeedbackKind, Intent, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackoffConfig {
    pub cw_min: u32,
    pub cw_max: u32,
}

impl Default for BackoffConfig {
    fn default() -> Self {
        Self { cw_min: 2, cw_max: 128 }
    }
}

/// Contention window and backoff counter of one terminal.
#[derive(Debug, Clone)]
pub struct CsmaState {
    pub cw: u32,
    pub backoff: u32,
    config: BackoffConfig,
    difs: usize,
    rng: ChaCha8Rng,
}

impl CsmaState {
    pub fn new(config: BackoffConfig, difs: usize, mut rng: ChaCha8Rng) -> Self {
        let cw = config.cw_min;
        let backoff = rng.gen_range(0..=cw);
        Self { cw, backoff, config, difs, rng }
    }

    pub fn config(&self) -> BackoffConfig {
        self.config
    }

    pub fn on_success(&mut self) {
        self.cw = self.config.cw_min;
        self.redraw();
    }

    pub fn on_failure(&mut self) {
        self.cw = (self.cw.saturating_mul(2)).min(self.config.cw_max);
        self.redraw();
    }

    fn redraw(&mut self) {
        self.backoff = self.rng.gen_range(0..=self.cw);
    }

    /// Counts down one idle slot beyond DIFS; returns whether access is due.
    fn tick(&mut self, inputs: &SlotInputs<'_>) -> bool {
        let last_idle = inputs.previous.map_or(true, |r| r.sense[inputs.terminal] == Sense::Idle);
        if last_idle && inputs.idle_streak > self.difs && self.backoff > 0 {
            self.backoff -= 1;
        }
        self.backoff == 0 && inputs.idle_streak >= self.difs
    }
}

/// Plain CSMA/CA: sense, wait DIFS plus a random backoff, transmit.
#[derive(Debug, Clone)]
pub struct CsmaAgent {
    pub state: CsmaState,
}

impl CsmaAgent {
    pub fn new(config: BackoffConfig, difs: usize, rng: ChaCha8Rng) -> Self {
        Self { state: CsmaState::new(config, difs, rng) }
    }
}

impl Agent for CsmaAgent {
    fn decide(&mut self, inputs: &SlotInputs<'_>) -> Intent {
        if let Some(kind) = inputs.previous.and_then(|r| r.own_feedback(inputs.terminal)) {
            match kind {
                FeedbackKind::Ack => self.state.on_success(),
                FeedbackKind::Nack => self.state.on_failure(),
            }
        }
        if inputs.mid_packet {
            return Intent::Transmit;
        }
        if self.state.tick(inputs) {
            Intent::Transmit
        } else {
            Intent::Idle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Handshake {
    Contending,
    /// RTS went out in the given slot; the CTS (if any) follows in the next.
    RtsSent(u64),
    /// CTS received; data goes out now.
    Cleared,
    /// Transmitting data.
    Sending,
}

/// CSMA/CA where channel access is reserved with a one-slot RTS answered by
/// a one-slot CTS from the AP. Terminals overhearing a CTS for someone else
/// stay quiet for one packet length.
#[derive(Debug, Clone)]
pub struct RtsCtsAgent {
    pub state: CsmaState,
    pub phase: Handshake,
    pub nav: usize,
    packet_len: usize,
}

impl RtsCtsAgent {
    pub fn new(config: BackoffConfig, difs: usize, packet_len: usize, rng: ChaCha8Rng) -> Self {
        Self { state: CsmaState::new(config, difs, rng), phase: Handshake::Contending, nav: 0, packet_len }
    }
}

impl Agent for RtsCtsAgent {
    fn decide(&mut self, inputs: &SlotInputs<'_>) -> Intent {
        let me = inputs.terminal;
        if let Some(prev) = inputs.previous {
            match prev.own_feedback(me) {
                Some(FeedbackKind::Ack) => {
                    self.state.on_success();
                    self.phase = Handshake::Contending;
                }
                Some(FeedbackKind::Nack) => {
                    self.state.on_failure();
                    self.phase = Handshake::Contending;
                }
                None => {}
            }
            match prev.cts {
                Some(n) if n == me => {
                    if matches!(self.phase, Handshake::RtsSent(_)) {
                        self.phase = Handshake::Cleared;
                    }
                }
                Some(_) if prev.actions[me] == 0 => self.nav = self.packet_len,
                _ => {}
            }
            if let Handshake::RtsSent(s) = self.phase {
                if prev.slot > s && prev.cts != Some(me) {
                    self.state.on_failure();
                    self.phase = Handshake::Contending;
                }
            }
        }
        if inputs.mid_packet {
            return Intent::Transmit;
        }
        match self.phase {
            Handshake::Cleared if inputs.granted => {
                self.phase = Handshake::Sending;
                return Intent::Transmit;
            }
            Handshake::RtsSent(_) | Handshake::Sending => return Intent::Idle,
            _ => {}
        }
        if self.nav > 0 {
            self.nav -= 1;
            return Intent::Idle;
        }
        if self.state.tick(inputs) {
            self.phase = Handshake::RtsSent(inputs.slot);
            Intent::SendRts
        } else {
            Intent::Idle
        }
    }
}
