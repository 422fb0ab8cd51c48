//! The slotted shared channel.
//!
//! One [`Medium::step`] call executes one slot: intents are coerced by TXOP
//! commitment and listen-before-talk, collisions are resolved, idle terminals
//! get their carrier-sense readings, and every packet whose window closes in
//! this slot is judged. Feedback produced at the end of slot `s` is delivered
//! to all terminals at the start of slot `s + 1`.
//!
//! A packet fails if any other terminal transmits in any slot of its window,
//! partial overlaps included. Hidden terminals still collide at the AP.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{PacketRecord, RtsRecord, TransmissionLedger};
use crate::topology::TopologyGraph;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("packet length must be at least 1 slot")]
    PacketLen,
    #[error("DIFS must be at least 1 slot")]
    Difs,
    #[error("look-back window ({lookback}) must exceed the packet length ({packet_len})")]
    Lookback { lookback: usize, packet_len: usize },
    #[error("episode length ({episode_len}) must exceed the look-back window ({lookback})")]
    EpisodeLen { episode_len: usize, lookback: usize },
    #[error("slot duration must be positive")]
    SlotDuration,
}

/// System timing. Defaults follow the 802.11-style setup: 9 µs slots,
/// 5-slot packets, 1-slot DIFS, 40-slot look-back, 100-slot episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub slot_duration_us: f64,
    pub packet_len: usize,
    pub difs: usize,
    pub lookback: usize,
    pub episode_len: usize,
    pub drop_deadline_ms: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            slot_duration_us: 9.0,
            packet_len: 5,
            difs: 1,
            lookback: 40,
            episode_len: 100,
            drop_deadline_ms: 100.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.packet_len < 1 {
            return Err(ConfigError::PacketLen);
        }
        if self.difs < 1 {
            return Err(ConfigError::Difs);
        }
        if self.lookback <= self.packet_len {
            return Err(ConfigError::Lookback { lookback: self.lookback, packet_len: self.packet_len });
        }
        if self.episode_len <= self.lookback {
            return Err(ConfigError::EpisodeLen { episode_len: self.episode_len, lookback: self.lookback });
        }
        if !(self.slot_duration_us > 0.0) {
            return Err(ConfigError::SlotDuration);
        }
        Ok(())
    }

    /// The drop deadline in whole slots (100 ms / 9 µs = 11111).
    pub fn drop_deadline_slots(&self) -> u64 {
        (self.drop_deadline_ms * 1000.0 / self.slot_duration_us).floor() as u64
    }

    pub fn slots_to_ms(&self, slots: f64) -> f64 {
        slots * self.slot_duration_us / 1000.0
    }

    /// Number of slots in `seconds` of simulated time.
    pub fn slots_in(&self, seconds: f64) -> u64 {
        (seconds * 1e6 / self.slot_duration_us).round() as u64
    }
}

/// Plain CSMA channel, or the RTS/CTS handshake variant where data needs a CTS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AccessMode {
    #[default]
    Basic,
    RtsCts,
}

/// What a terminal asks to do in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Intent {
    #[default]
    Idle,
    /// Start (or continue) a data packet.
    Transmit,
    /// Send a one-slot RTS (handshake mode only).
    SendRts,
}

/// Carrier-sense reading of a terminal for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Idle,
    Busy,
    /// The terminal was transmitting and could not sense.
    NotSensed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackKind {
    Ack,
    Nack,
}

/// AP verdict on the data packet that started at `packet_start`, emitted at
/// the end of `slot` and heard by everyone at the start of `slot + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackEvent {
    pub slot: u64,
    pub kind: FeedbackKind,
    pub packet_start: u64,
    /// Owner of the judged packet. Terminals only use this to recognize
    /// their own packets.
    pub terminal: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PacketKind {
    Data,
    Rts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Transmitting { kind: PacketKind, start: u64, remaining: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalState {
    pub phase: Phase,
    pub sensed_idle_streak: usize,
}

/// Everything that happened in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: u64,
    /// `a_n` for this slot: 1 while on the air (data or RTS).
    pub actions: Vec<u8>,
    /// Intents overridden by commitment or listen-before-talk.
    pub coerced: Vec<bool>,
    pub sense: Vec<Sense>,
    /// Verdicts for windows that closed in this slot.
    pub feedback: Vec<FeedbackEvent>,
    /// Terminal addressed by a CTS the AP broadcast during this slot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cts: Option<usize>,
}

impl SlotRecord {
    pub fn ack(&self) -> Option<&FeedbackEvent> {
        self.feedback.iter().find(|f| f.kind == FeedbackKind::Ack)
    }

    pub fn own_feedback(&self, n: usize) -> Option<FeedbackKind> {
        self.feedback.iter().find(|f| f.terminal == n).map(|f| f.kind)
    }

    /// Whether terminal `n` is transmitting in this slot.
    pub fn transmitting(&self, n: usize) -> bool {
        self.actions[n] == 1
    }
}

#[derive(Debug, Clone)]
struct ActivePacket {
    terminal: usize,
    kind: PacketKind,
    start: u64,
    end: u64,
    collided: bool,
}

/// The last `W` columns of the true action matrix, oldest first.
#[derive(Debug, Clone)]
pub struct GlobalState {
    terminal_count: usize,
    width: usize,
    columns: VecDeque<Vec<u8>>,
}

impl GlobalState {
    fn new(terminal_count: usize, width: usize) -> Self {
        Self { terminal_count, width, columns: VecDeque::with_capacity(width + 1) }
    }

    fn push(&mut self, column: Vec<u8>) {
        self.columns.push_back(column);
        if self.columns.len() > self.width {
            self.columns.pop_front();
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Action of `n`, `age` slots back (`age = 1` is the previous slot).
    /// Slots before the simulation started read as idle.
    pub fn action(&self, n: usize, age: usize) -> u8 {
        assert!(age >= 1 && age <= self.width, "age out of window");
        let len = self.columns.len();
        if age > len {
            0
        } else {
            self.columns[len - age][n]
        }
    }

    /// Time-major `W x N` encoding (oldest slot first) for the critic.
    pub fn encode_into<F: num_traits::Float>(&self, out: &mut [F]) {
        let n = self.terminal_count;
        assert_eq!(out.len(), self.width * n);
        let pad = self.width - self.columns.len();
        out[..pad * n].iter_mut().for_each(|x| *x = F::zero());
        for (t, column) in self.columns.iter().enumerate() {
            for (m, &a) in column.iter().enumerate() {
                out[(pad + t) * n + m] = if a == 1 { F::one() } else { F::zero() };
            }
        }
    }

    /// Rows are terminals, columns are slots oldest first.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let pad = self.width - self.columns.len();
        (0..self.terminal_count)
            .map(|m| {
                std::iter::repeat(0)
                    .take(pad)
                    .chain(self.columns.iter().map(|c| c[m]))
                    .collect()
            })
            .collect()
    }
}

/// The shared channel of one BSS.
#[derive(Debug, Clone)]
pub struct Medium {
    config: SimConfig,
    mode: AccessMode,
    oh: Vec<Vec<usize>>,
    terminals: Vec<TerminalState>,
    slot: u64,
    active: Vec<ActivePacket>,
    /// CTS the AP will broadcast in the given slot.
    cts_due: Option<(u64, usize)>,
    /// Terminal allowed to start data in the given slot.
    grant: Option<(u64, usize)>,
    state: GlobalState,
    ledger: TransmissionLedger,
}

impl Medium {
    pub fn new(graph: &TopologyGraph, config: SimConfig, mode: AccessMode) -> Result<Self, ConfigError> {
        config.validate()?;
        let n = graph.terminal_count();
        let oh = graph.partitions().into_iter().map(|p| p.oh_set).collect();
        Ok(Self {
            oh,
            mode,
            terminals: vec![TerminalState { phase: Phase::Idle, sensed_idle_streak: 0 }; n],
            slot: 0,
            active: Vec::new(),
            cts_due: None,
            grant: None,
            state: GlobalState::new(n, config.lookback),
            ledger: TransmissionLedger::new(n, config.packet_len),
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn mode(&self) -> AccessMode {
        self.mode
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    /// Index of the next slot to execute (= slots elapsed).
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn terminal(&self, n: usize) -> &TerminalState {
        &self.terminals[n]
    }

    pub fn global_state(&self) -> &GlobalState {
        &self.state
    }

    pub fn ledger(&self) -> &TransmissionLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> TransmissionLedger {
        self.ledger
    }

    pub fn mid_packet(&self, n: usize) -> bool {
        matches!(self.terminals[n].phase, Phase::Transmitting { .. })
    }

    /// Listen-before-talk: sensed idle for at least DIFS and not on the air.
    pub fn lbt_satisfied(&self, n: usize) -> bool {
        !self.mid_packet(n) && self.terminals[n].sensed_idle_streak >= self.config.difs
    }

    /// Whether `n` holds the CTS grant for the next slot.
    pub fn holds_grant(&self, n: usize) -> bool {
        self.grant == Some((self.slot, n))
    }

    /// Executes one slot.
    pub fn step(&mut self, intents: &[Intent]) -> SlotRecord {
        let n_terms = self.terminals.len();
        assert_eq!(intents.len(), n_terms, "one intent per terminal");
        let s = self.slot;
        let d = self.config.packet_len;

        let mut actions = vec![0u8; n_terms];
        let mut coerced = vec![false; n_terms];
        for n in 0..n_terms {
            match self.terminals[n].phase {
                Phase::Transmitting { .. } => {
                    actions[n] = 1;
                    coerced[n] = intents[n] != Intent::Transmit;
                }
                Phase::Idle => {
                    let start = match intents[n] {
                        Intent::Idle => None,
                        Intent::Transmit => {
                            let allowed = match self.mode {
                                AccessMode::Basic => self.lbt_satisfied(n),
                                AccessMode::RtsCts => self.grant == Some((s, n)),
                            };
                            allowed.then_some((PacketKind::Data, d))
                        }
                        Intent::SendRts => (self.mode == AccessMode::RtsCts && self.lbt_satisfied(n))
                            .then_some((PacketKind::Rts, 1)),
                    };
                    match start {
                        Some((kind, len)) => {
                            actions[n] = 1;
                            self.terminals[n].phase = Phase::Transmitting { kind, start: s, remaining: len };
                            self.active.push(ActivePacket {
                                terminal: n,
                                kind,
                                start: s,
                                end: s + len as u64 - 1,
                                collided: false,
                            });
                        }
                        None => coerced[n] = intents[n] != Intent::Idle,
                    }
                }
            }
        }
        if matches!(self.grant, Some((slot, _)) if slot <= s) {
            self.grant = None;
        }

        let cts = match self.cts_due {
            Some((slot, n)) if slot == s => {
                self.cts_due = None;
                Some(n)
            }
            _ => None,
        };

        let on_air = actions.iter().filter(|&&a| a == 1).count();
        if on_air >= 2 {
            for p in &mut self.active {
                p.collided = true;
            }
        }
        if cts.is_some() {
            // The AP cannot receive while it broadcasts the CTS.
            for p in &mut self.active {
                p.collided = true;
            }
        }

        let sense: Vec<Sense> = (0..n_terms)
            .map(|n| {
                if actions[n] == 1 {
                    Sense::NotSensed
                } else if cts.is_some() || self.oh[n].iter().any(|&m| actions[m] == 1) {
                    Sense::Busy
                } else {
                    Sense::Idle
                }
            })
            .collect();

        for (term, reading) in self.terminals.iter_mut().zip(&sense) {
            term.sensed_idle_streak = match reading {
                Sense::Idle => term.sensed_idle_streak + 1,
                _ => 0,
            };
            if let Phase::Transmitting { remaining, .. } = &mut term.phase {
                *remaining -= 1;
                if *remaining == 0 {
                    term.phase = Phase::Idle;
                }
            }
        }

        let mut feedback = Vec::new();
        let mut closed = Vec::new();
        self.active.retain(|p| {
            if p.end == s {
                closed.push(p.clone());
                false
            } else {
                true
            }
        });
        for p in closed {
            let success = !p.collided;
            match p.kind {
                PacketKind::Data => {
                    self.ledger.record_packet(PacketRecord { terminal: p.terminal, start: p.start, success });
                    feedback.push(FeedbackEvent {
                        slot: s,
                        kind: if success { FeedbackKind::Ack } else { FeedbackKind::Nack },
                        packet_start: p.start,
                        terminal: p.terminal,
                    });
                }
                PacketKind::Rts => {
                    self.ledger.record_rts(RtsRecord { terminal: p.terminal, slot: p.start, answered: success });
                    if success {
                        self.cts_due = Some((s + 1, p.terminal));
                        self.grant = Some((s + 2, p.terminal));
                    }
                }
            }
        }
        feedback.sort_by_key(|f| f.terminal);

        self.state.push(actions.clone());
        self.slot += 1;
        self.ledger.set_slots_elapsed(self.slot);

        SlotRecord { slot: s, actions, coerced, sense, feedback, cts }
    }

    /// Runs `slots` all-idle slots, e.g. to warm up observation windows.
    pub fn idle(&mut self, slots: usize) -> Vec<SlotRecord> {
        let intents = vec![Intent::Idle; self.terminals.len()];
        (0..slots).map(|_| self.step(&intents)).collect()
    }
}
