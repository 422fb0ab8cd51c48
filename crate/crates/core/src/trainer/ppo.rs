//! Advantages, the clipped surrogate, and critic regression.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::neural::{softmax, Net, Tape};

#[derive(Debug, Error, PartialEq)]
#[error("{what}: expected {expected} values, got {got}")]
pub struct LengthMismatch {
    pub what: &'static str,
    pub expected: usize,
    pub got: usize,
}

/// Generalized advantage estimates with a zero bootstrap after the last step.
pub fn gae_advantages(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> Result<Vec<f64>, LengthMismatch> {
    if values.len() != rewards.len() {
        return Err(LengthMismatch { what: "values", expected: rewards.len(), got: values.len() });
    }
    let mut adv = vec![0.0; rewards.len()];
    let mut running = 0.0;
    for t in (0..rewards.len()).rev() {
        let next = values.get(t + 1).copied().unwrap_or(0.0);
        let td = rewards[t] + gamma * next - values[t];
        running = td + gamma * lambda * running;
        adv[t] = running;
    }
    Ok(adv)
}

/// Which rewards count toward the critic's regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReturnConvention {
    /// `sum_{t' > t} gamma^(t'-t) r_t'`: the reward of step `t` itself is left out.
    #[default]
    Strict,
    /// `sum_{t' >= t} gamma^(t'-t) r_t'`.
    Inclusive,
}

/// Discounted returns over a truncated episode.
pub fn discounted_returns(rewards: &[f64], gamma: f64, convention: ReturnConvention) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    // `after` holds sum_{t' > t} gamma^(t'-t-1) r_t'.
    let mut after = 0.0;
    for t in (0..rewards.len()).rev() {
        out[t] = match convention {
            ReturnConvention::Strict => gamma * after,
            ReturnConvention::Inclusive => rewards[t] + gamma * after,
        };
        after = rewards[t] + gamma * after;
    }
    out
}

/// Optional PPO extras; all off by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateSettings {
    pub clip: f64,
    pub entropy_coef: f64,
    /// Rescale the gradient to at most this global norm.
    pub max_grad_norm: Option<f64>,
}

impl Default for SurrogateSettings {
    fn default() -> Self {
        Self { clip: 0.2, entropy_coef: 0.0, max_grad_norm: None }
    }
}

/// Training samples of one actor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ActorBatch {
    /// Concatenated encoded observations.
    pub observations: Vec<f32>,
    pub transmit: Vec<bool>,
    pub logp_old: Vec<f32>,
    pub advantages: Vec<f32>,
}

impl ActorBatch {
    pub fn len(&self) -> usize {
        self.transmit.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmit.is_empty()
    }

    pub fn push(&mut self, observation: &[f32], transmit: bool, logp_old: f32, advantage: f32) {
        self.observations.extend_from_slice(observation);
        self.transmit.push(transmit);
        self.logp_old.push(logp_old);
        self.advantages.push(advantage);
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SurrogateOutcome {
    /// Mean clipped surrogate over the used samples.
    pub objective: f64,
    pub ratios: Vec<f32>,
    /// Samples whose clip was active.
    pub clipped: usize,
    /// Samples dropped because the ratio was not finite.
    pub skipped: usize,
}

/// Accumulates the gradient of the negated clipped surrogate into `grads`,
/// ready for a descent step.
pub fn surrogate_gradient(
    net: &Net<f32>,
    batch: &ActorBatch,
    settings: &SurrogateSettings,
    tape: &mut Tape<f32>,
    grads: &mut [f32],
) -> SurrogateOutcome {
    let mut out = SurrogateOutcome::default();
    if batch.is_empty() {
        return out;
    }
    let logits = net.forward(&batch.observations, batch.len(), tape).expect("batch shape").to_vec();
    let eps = settings.clip as f32;
    let mut d_out = vec![0.0f32; logits.len()];
    let mut used = Vec::with_capacity(batch.len());
    for i in 0..batch.len() {
        let z = &logits[2 * i..2 * i + 2];
        let mut p = [0.0f32; 2];
        softmax(z, &mut p);
        let a = batch.transmit[i] as usize;
        let logp = crate::neural::log_softmax_at(z, a);
        let ratio = (logp - batch.logp_old[i]).exp();
        out.ratios.push(ratio);
        if !ratio.is_finite() {
            out.skipped += 1;
            continue;
        }
        let adv = batch.advantages[i];
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - eps, 1.0 + eps) * adv;
        used.push(i);
        if clipped < unclipped {
            out.clipped += 1;
            out.objective += clipped as f64;
            continue;
        }
        out.objective += unclipped as f64;
        // d(ratio)/d(z_k) = ratio * (1[k == a] - p_k).
        for k in 0..2 {
            let onehot = if k == a { 1.0 } else { 0.0 };
            d_out[2 * i + k] = -unclipped * (onehot - p[k]);
        }
    }
    let n = used.len();
    if n == 0 {
        return out;
    }
    out.objective /= n as f64;
    let scale = 1.0 / n as f32;
    for &i in &used {
        let z = &logits[2 * i..2 * i + 2];
        let mut p = [0.0f32; 2];
        softmax(z, &mut p);
        for k in 0..2 {
            d_out[2 * i + k] *= scale;
        }
        if settings.entropy_coef != 0.0 {
            // dH/dz_k = -p_k (log p_k + H).
            let h: f32 = -p.iter().map(|&q| q * q.max(f32::MIN_POSITIVE).ln()).sum::<f32>();
            for k in 0..2 {
                let dh = -p[k] * (p[k].max(f32::MIN_POSITIVE).ln() + h);
                d_out[2 * i + k] -= settings.entropy_coef as f32 * dh * scale;
            }
        }
    }
    net.backward(tape, &d_out, grads).expect("gradient shape");
    if let Some(max) = settings.max_grad_norm {
        clip_norm(grads, max as f32);
    }
    out
}

/// Mean squared error of the critic against `targets`; accumulates its gradient.
pub fn critic_gradient(net: &Net<f32>, states: &[f32], targets: &[f32], tape: &mut Tape<f32>, grads: &mut [f32]) -> f64 {
    if targets.is_empty() {
        return 0.0;
    }
    let values = net.forward(states, targets.len(), tape).expect("state shape");
    let n = targets.len() as f32;
    let mut loss = 0.0f64;
    let d_out: Vec<f32> = values
        .iter()
        .zip(targets)
        .map(|(&v, &y)| {
            loss += ((v - y) as f64).powi(2);
            2.0 * (v - y) / n
        })
        .collect();
    net.backward(tape, &d_out, grads).expect("gradient shape");
    loss / targets.len() as f64
}

fn clip_norm(grads: &mut [f32], max: f32) {
    let norm = grads.iter().map(|g| g * g).sum::<f32>().sqrt();
    if norm > max {
        let s = max / norm;
        grads.iter_mut().for_each(|g| *g *= s);
    }
}
