//! Global rewards computed at the AP from the transmission ledger.

use serde::{Deserialize, Serialize};

use crate::ledger::TransmissionLedger;
use crate::metrics::alpha_fairness;

/// Success counts over the look-back window of one decision slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowCounts {
    /// `M_n`: packets of terminal `n` that started in `[t - W, t - 1]` and succeeded.
    pub m: Vec<usize>,
}

impl WindowCounts {
    pub fn from_ledger(ledger: &TransmissionLedger, t: u64, w: u64) -> Self {
        let from = t.saturating_sub(w);
        Self { m: (0..ledger.terminal_count()).map(|n| ledger.successes_started_in(n, from, t)).collect() }
    }

    /// `G`: spread between the most and least served terminals.
    pub fn spread(&self) -> usize {
        let max = self.m.iter().copied().max().unwrap_or(0);
        let min = self.m.iter().copied().min().unwrap_or(0);
        max - min
    }

    pub fn min(&self) -> usize {
        self.m.iter().copied().min().unwrap_or(0)
    }
}

/// Which case of the window reward applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewardBranch {
    FairSuccess,
    CatchUpSuccess,
    UnfairSuccess,
    Failure,
    NoStart,
}

impl RewardBranch {
    pub fn value(self) -> f64 {
        match self {
            Self::FairSuccess | Self::CatchUpSuccess => 1.0,
            Self::UnfairSuccess | Self::Failure => -1.0,
            Self::NoStart => 0.0,
        }
    }
}

/// Window reward for one decision slot.
///
/// `delta[n]` says whether terminal `n`'s packet starting at `t` succeeded;
/// `any_start` whether any packet started at `t` at all. When several
/// terminals share the minimum count, success by any of them counts as
/// serving the least served terminal.
pub fn window_reward(counts: &WindowCounts, delta: &[bool], any_start: bool) -> RewardBranch {
    if !any_start {
        return RewardBranch::NoStart;
    }
    if !delta.iter().any(|&d| d) {
        return RewardBranch::Failure;
    }
    if counts.spread() <= 1 {
        return RewardBranch::FairSuccess;
    }
    let min = counts.min();
    let served = counts.m.iter().zip(delta).any(|(&m, &d)| m == min && d);
    if served {
        RewardBranch::CatchUpSuccess
    } else {
        RewardBranch::UnfairSuccess
    }
}

/// Sum of per-terminal α-fair utilities of window throughputs.
pub fn alpha_reward(throughputs: &[f64], alpha: f64, eps: f64) -> f64 {
    alpha_fairness(throughputs, alpha, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RewardKind {
    /// The ternary window reward.
    Window,
    /// α-fairness of window throughputs.
    Alpha { alpha: f64, eps: f64 },
}

impl Default for RewardKind {
    fn default() -> Self {
        Self::Window
    }
}

/// Reward of decision slot `t`, or `None` while its packet window is still open.
pub fn reward_at(ledger: &TransmissionLedger, kind: RewardKind, t: u64, w: u64) -> Option<f64> {
    let d = ledger.packet_len();
    if t + d > ledger.slots_elapsed() {
        return None;
    }
    let counts = WindowCounts::from_ledger(ledger, t, w);
    Some(match kind {
        RewardKind::Window => {
            let n = ledger.terminal_count();
            let delta: Vec<bool> = (0..n).map(|m| ledger.success_flag(m, t).unwrap_or(false)).collect();
            let any_start = (0..n).any(|m| ledger.started_at(m, t));
            window_reward(&counts, &delta, any_start).value()
        }
        RewardKind::Alpha { alpha, eps } => {
            let tp: Vec<f64> = counts.m.iter().map(|&m| (m as u64 * d) as f64 / w as f64).collect();
            alpha_reward(&tp, alpha, eps)
        }
    })
}

/// Rewards for decision slots `from..=to`.
pub fn reward_series(ledger: &TransmissionLedger, kind: RewardKind, from: u64, to: u64, w: u64) -> Vec<f64> {
    (from..=to).map(|t| reward_at(ledger, kind, t, w).expect("reward window still open")).collect()
}
