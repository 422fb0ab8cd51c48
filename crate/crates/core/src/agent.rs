//! The decision interface shared by scripted, classical and learned agents.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use crate::medium::Intent;
use crate::medium::SlotRecord;
use crate::observation::ObservationBuffer;

/// What a terminal knows when it decides for `slot`.
#[derive(Debug, Clone, Copy)]
pub struct SlotInputs<'a> {
    pub terminal: usize,
    pub slot: u64,
    /// Outcome of the previous slot as seen by everyone: sense readings and
    /// the feedback delivered at the start of this slot.
    pub previous: Option<&'a SlotRecord>,
    /// Committed to an ongoing packet; the intent is ignored.
    pub mid_packet: bool,
    pub idle_streak: usize,
    /// Listen-before-talk currently allows a new transmission.
    pub lbt_ok: bool,
    /// Holds the AP's clearance to send data in this slot (handshake mode).
    pub granted: bool,
    pub observation: &'a ObservationBuffer,
}

impl SlotInputs<'_> {
    /// True when the medium would override any choice made now.
    pub fn forced(&self) -> bool {
        self.mid_packet || !self.lbt_ok
    }
}

pub trait Agent {
    fn decide(&mut self, inputs: &SlotInputs<'_>) -> Intent;
}

impl<A: Agent + ?Sized> Agent for Box<A> {
    fn decide(&mut self, inputs: &SlotInputs<'_>) -> Intent {
        (**self).decide(inputs)
    }
}

/// Never transmits.
#[derive(Debug, Clone, Copy, Default)]
pub struct Silent;

impl Agent for Silent {
    fn decide(&mut self, _: &SlotInputs<'_>) -> Intent {
        Intent::Idle
    }
}

/// Always asks to transmit; the medium gates it with listen-before-talk.
#[derive(Debug, Clone, Copy, Default)]
pub struct Greedy;

impl Agent for Greedy {
    fn decide(&mut self, _: &SlotInputs<'_>) -> Intent {
        Intent::Transmit
    }
}

/// Replays a periodic transmit pattern indexed by slot number.
#[derive(Debug, Clone)]
pub struct Scripted {
    pattern: Vec<bool>,
}

impl Scripted {
    pub fn new(pattern: Vec<bool>) -> Self {
        assert!(!pattern.is_empty());
        Self { pattern }
    }

    /// Parses `"1100"`-style strings.
    pub fn from_bits(bits: &str) -> Self {
        Self::new(bits.chars().map(|c| c == '1').collect())
    }
}

impl Agent for Scripted {
    fn decide(&mut self, inputs: &SlotInputs<'_>) -> Intent {
        if self.pattern[inputs.slot as usize % self.pattern.len()] {
            Intent::Transmit
        } else {
            Intent::Idle
        }
    }
}

/// Independent coin flips, handy for exercising the medium.
#[derive(Debug, Clone)]
pub struct Bernoulli {
    pub p: f64,
    rng: ChaCha8Rng,
}

impl Bernoulli {
    pub fn new(p: f64, rng: ChaCha8Rng) -> Self {
        Self { p, rng }
    }
}

impl Agent for Bernoulli {
    fn decide(&mut self, _: &SlotInputs<'_>) -> Intent {
        if self.rng.gen_bool(self.p) {
            Intent::Transmit
        } else {
            Intent::Idle
        }
    }
}
