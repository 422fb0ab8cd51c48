//! Throughput, α-fairness, collision rate and delay statistics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::TransmissionLedger;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("α must be non-negative, got {0}")]
    NegativeAlpha(f64),
    #[error("ε must be positive, got {0}")]
    NonPositiveEps(f64),
}

/// `f(x)`: `log x` for α = 1, `x^(1-α) / (1-α)` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fairness {
    pub alpha: f64,
    pub eps: f64,
}

impl Default for Fairness {
    fn default() -> Self {
        Self { alpha: 1.0, eps: 0.001 }
    }
}

impl Fairness {
    pub fn new(alpha: f64, eps: f64) -> Result<Self, MetricsError> {
        if !(alpha >= 0.0) {
            return Err(MetricsError::NegativeAlpha(alpha));
        }
        if !(eps > 0.0) {
            return Err(MetricsError::NonPositiveEps(eps));
        }
        Ok(Self { alpha, eps })
    }

    pub fn utility(&self, throughput: f64) -> f64 {
        let x = throughput + self.eps;
        if self.alpha == 1.0 {
            x.ln()
        } else {
            x.powf(1.0 - self.alpha) / (1.0 - self.alpha)
        }
    }

    pub fn total(&self, throughputs: &[f64]) -> f64 {
        throughputs.iter().map(|&t| self.utility(t)).sum()
    }

    /// Value of the never-transmit policy.
    pub fn floor(&self, n: usize) -> f64 {
        n as f64 * self.utility(0.0)
    }

    /// `(F - F_LB) / (F_UB - F_LB)`.
    pub fn normalized(&self, value: f64, upper: f64, n: usize) -> f64 {
        let lower = self.floor(n);
        (value - lower) / (upper - lower)
    }
}

/// Sum of α-fair utilities. Panics on negative α.
pub fn alpha_fairness(throughputs: &[f64], alpha: f64, eps: f64) -> f64 {
    Fairness::new(alpha, eps).expect("invalid fairness parameters").total(throughputs)
}

/// Share of `[from, from + window)` spent on successful packets of `n`.
pub fn throughput(ledger: &TransmissionLedger, n: usize, from: u64, window: u64) -> f64 {
    assert!(window > 0);
    (ledger.successes_within(n, from, from + window) as u64 * ledger.packet_len()) as f64 / window as f64
}

/// Per-terminal throughput averaged over consecutive windows that fit
/// between `from` and the end of the ledger.
pub fn windowed_throughput(ledger: &TransmissionLedger, from: u64, window: u64) -> Vec<f64> {
    let end = ledger.slots_elapsed();
    let count = end.saturating_sub(from) / window;
    (0..ledger.terminal_count())
        .map(|n| {
            if count == 0 {
                return 0.0;
            }
            (0..count).map(|k| throughput(ledger, n, from + k * window, window)).sum::<f64>() / count as f64
        })
        .collect()
}

/// Failed packet starts over all packet starts since `from`, `None` without attempts.
pub fn pcr(ledger: &TransmissionLedger, from: u64) -> Option<f64> {
    let (mut total, mut failed) = (0usize, 0usize);
    for p in ledger.all_packets().filter(|p| p.start >= from) {
        total += 1;
        failed += (!p.success) as usize;
    }
    (total > 0).then(|| failed as f64 / total as f64)
}

/// Head-of-line delay statistics in slots.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DelayStats {
    pub delivered: usize,
    pub drops: usize,
    pub mean: f64,
    /// Standard deviation of delay.
    pub jitter: f64,
    /// Mean absolute difference between consecutive delays of a terminal.
    pub successive_jitter: f64,
}

impl DelayStats {
    pub fn scaled(&self, factor: f64) -> DelayStats {
        DelayStats {
            mean: self.mean * factor,
            jitter: self.jitter * factor,
            successive_jitter: self.successive_jitter * factor,
            ..self.clone()
        }
    }
}

/// Delay from a packet reaching the head of the queue to delivery of its
/// ACK. Under saturated traffic the next packet reaches the head the moment
/// the previous one is acknowledged or dropped; a packet still unacknowledged
/// `deadline` slots after reaching the head is dropped.
pub fn delay_stats(ledger: &TransmissionLedger, from: u64, deadline: u64) -> DelayStats {
    let d = ledger.packet_len();
    let end = ledger.slots_elapsed();
    let mut delays = Vec::new();
    let mut drops = 0;
    let (mut diff_sum, mut diff_count) = (0.0, 0usize);
    for n in 0..ledger.terminal_count() {
        let mut head = from;
        let mut last: Option<u64> = None;
        for p in ledger.packets(n).iter().filter(|p| p.success && p.start >= from) {
            if p.start < head {
                continue;
            }
            let acked = p.start + d;
            while acked > head + deadline {
                drops += 1;
                head += deadline;
                last = None;
            }
            if p.start < head {
                continue;
            }
            let delay = acked - head;
            if let Some(prev) = last {
                diff_sum += (delay as f64 - prev as f64).abs();
                diff_count += 1;
            }
            last = Some(delay);
            delays.push(delay as f64);
            head = acked;
        }
        while head + deadline <= end {
            drops += 1;
            head += deadline;
        }
    }
    let delivered = delays.len();
    if delivered == 0 {
        return DelayStats { drops, ..DelayStats::default() };
    }
    let mean = delays.iter().sum::<f64>() / delivered as f64;
    let var = delays.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / delivered as f64;
    DelayStats {
        delivered,
        drops,
        mean,
        jitter: var.sqrt(),
        successive_jitter: if diff_count > 0 { diff_sum / diff_count as f64 } else { 0.0 },
    }
}

/// Summary of one evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub throughput: Vec<f64>,
    pub bss_throughput: f64,
    pub fairness: f64,
    pub normalized_fairness: f64,
    pub pcr: Option<f64>,
    pub delay_ms: f64,
    pub jitter_ms: f64,
    pub successive_jitter_ms: f64,
    pub delivered: usize,
    pub drops: usize,
}

/// Evaluation settings shared by every report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalContext {
    pub fairness: Fairness,
    pub upper_bound: f64,
    pub window: u64,
    pub from: u64,
    pub deadline: u64,
    pub slot_ms: f64,
}

impl EvalReport {
    pub fn from_ledger(ledger: &TransmissionLedger, ctx: &EvalContext) -> Self {
        let throughput = windowed_throughput(ledger, ctx.from, ctx.window);
        let fairness = ctx.fairness.total(&throughput);
        let delays = delay_stats(ledger, ctx.from, ctx.deadline).scaled(ctx.slot_ms);
        Self {
            bss_throughput: throughput.iter().sum(),
            normalized_fairness: ctx.fairness.normalized(fairness, ctx.upper_bound, throughput.len()),
            fairness,
            throughput,
            pcr: pcr(ledger, ctx.from),
            delay_ms: delays.mean,
            jitter_ms: delays.jitter,
            successive_jitter_ms: delays.successive_jitter,
            delivered: delays.delivered,
            drops: delays.drops,
        }
    }
}
