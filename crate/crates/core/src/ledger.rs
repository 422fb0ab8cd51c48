//! Record of every packet put on the air, judged at the end of its window.

use serde::{Deserialize, Serialize};

/// One data packet spanning `[start, start + len - 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketRecord {
    pub terminal: usize,
    pub start: u64,
    pub success: bool,
}

/// One single-slot RTS and whether the AP answered it with a CTS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RtsRecord {
    pub terminal: usize,
    pub slot: u64,
    pub answered: bool,
}

/// Completed packets per terminal, in start order, plus RTS attempts.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TransmissionLedger {
    packet_len: u64,
    slots_elapsed: u64,
    per_terminal: Vec<Vec<PacketRecord>>,
    rts: Vec<RtsRecord>,
}

impl TransmissionLedger {
    pub fn new(terminal_count: usize, packet_len: usize) -> Self {
        Self {
            packet_len: packet_len as u64,
            slots_elapsed: 0,
            per_terminal: vec![Vec::new(); terminal_count],
            rts: Vec::new(),
        }
    }

    pub fn terminal_count(&self) -> usize {
        self.per_terminal.len()
    }

    pub fn packet_len(&self) -> u64 {
        self.packet_len
    }

    pub fn slots_elapsed(&self) -> u64 {
        self.slots_elapsed
    }

    pub(crate) fn set_slots_elapsed(&mut self, slots: u64) {
        self.slots_elapsed = slots;
    }

    pub(crate) fn record_packet(&mut self, packet: PacketRecord) {
        let list = &mut self.per_terminal[packet.terminal];
        debug_assert!(list.last().map_or(true, |p| p.start < packet.start));
        list.push(packet);
    }

    pub(crate) fn record_rts(&mut self, rts: RtsRecord) {
        self.rts.push(rts);
    }

    /// Packets of terminal `n` in start order.
    pub fn packets(&self, n: usize) -> &[PacketRecord] {
        &self.per_terminal[n]
    }

    pub fn all_packets(&self) -> impl Iterator<Item = &PacketRecord> + '_ {
        self.per_terminal.iter().flatten()
    }

    pub fn rts_attempts(&self) -> &[RtsRecord] {
        &self.rts
    }

    /// Success flag for the packet terminal `n` started at `tau`.
    ///
    /// `None` while the window `[tau, tau + D - 1]` is still open; a terminal
    /// that did not start a packet at `tau` has flag `Some(false)`.
    pub fn success_flag(&self, n: usize, tau: u64) -> Option<bool> {
        if tau + self.packet_len > self.slots_elapsed {
            return None;
        }
        let list = &self.per_terminal[n];
        Some(
            list.binary_search_by_key(&tau, |p| p.start)
                .map(|i| list[i].success)
                .unwrap_or(false),
        )
    }

    /// Whether terminal `n` started a data packet at `tau`, judged or not.
    pub fn started_at(&self, n: usize, tau: u64) -> bool {
        self.per_terminal[n].binary_search_by_key(&tau, |p| p.start).is_ok()
    }

    /// Successful packets of `n` whose start lies in `[from, to)`.
    pub fn successes_started_in(&self, n: usize, from: u64, to: u64) -> usize {
        let list = &self.per_terminal[n];
        let lo = list.partition_point(|p| p.start < from);
        let hi = list.partition_point(|p| p.start < to);
        list[lo..hi].iter().filter(|p| p.success).count()
    }

    /// Successful packets of `n` lying entirely inside `[from, to)`.
    pub fn successes_within(&self, n: usize, from: u64, to: u64) -> usize {
        let last_start = to.saturating_sub(self.packet_len) + 1;
        if to < from + self.packet_len {
            return 0;
        }
        self.successes_started_in(n, from, last_start)
    }
}
