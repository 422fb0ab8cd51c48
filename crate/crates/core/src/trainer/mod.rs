//! Multi-agent PPO: every terminal owns an actor, a shared critic at the AP
//! scores global states, and one advantage sequence is broadcast to all.

mod ppo;
mod rollout;

pub use ppo::{
    critic_gradient, discounted_returns, gae_advantages, surrogate_gradient, ActorBatch, LengthMismatch,
    ReturnConvention, SurrogateOutcome, SurrogateSettings,
};
pub use rollout::{run_episode, ActionMode, Decision, Episode, PolicyAgent};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eval::{evaluate, EvalPlan, Evaluation};
use crate::medium::{AccessMode, ConfigError, SimConfig};
use crate::metrics::windowed_throughput;
use crate::neural::{AnyOptimizer, Net, NetShape, Optimizer, OptimizerKind, Tape};
use crate::observation::ObservationKind;
use crate::reward::RewardKind;
use crate::topology::TopologyGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// Gradient passes over each episode.
    pub update_epochs: usize,
    pub optimizer: OptimizerKind,
    pub surrogate: SurrogateSettings,
    /// Rescale each actor's advantages to zero mean and unit variance.
    pub normalize_advantages: bool,
    pub returns: ReturnConvention,
    /// Chosen by the agent family in experiment configs.
    #[serde(skip)]
    pub reward: RewardKind,
    #[serde(skip)]
    pub observation: ObservationKind,
    /// Evaluate every this many epochs (0 disables periodic evaluation).
    pub eval_every: usize,
    /// Evaluation windows per snapshot.
    pub eval_windows: u64,
    pub eval_mode: ActionMode,
    /// Start every actor near this transmit probability instead of the
    /// roughly even odds of a plain random initialization.
    pub initial_transmit_probability: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10_000,
            lr_actor: 1e-3,
            lr_critic: 5e-4,
            gamma: 0.99,
            lambda: 0.95,
            update_epochs: 4,
            optimizer: OptimizerKind::Adam,
            surrogate: SurrogateSettings::default(),
            normalize_advantages: false,
            returns: ReturnConvention::Strict,
            reward: RewardKind::Window,
            observation: ObservationKind::LookBack,
            eval_every: 100,
            eval_windows: 3,
            eval_mode: ActionMode::Sample,
            initial_transmit_probability: None,
        }
    }
}

/// Per-episode diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub slots_elapsed: u64,
    pub mean_reward: f64,
    pub unknown_fraction: f64,
    /// Throughput of each terminal over the episode's decision slots.
    pub throughput: Vec<f64>,
    /// Mean probability of transmitting over each terminal's unforced decisions.
    pub transmit_probability: Vec<f64>,
    pub surrogate: f64,
    pub critic_loss: f64,
    pub clipped: usize,
    pub skipped_ratios: usize,
}

pub struct Trainer {
    graph: TopologyGraph,
    sim: SimConfig,
    config: TrainConfig,
    actors: Vec<Net<f32>>,
    critic: Net<f32>,
    actor_opts: Vec<AnyOptimizer<f32>>,
    critic_opt: AnyOptimizer<f32>,
    rng: ChaCha8Rng,
    epoch: usize,
    slots_elapsed: u64,
}

impl Trainer {
    pub fn new(graph: TopologyGraph, sim: SimConfig, config: TrainConfig, seed: u64) -> Result<Self, ConfigError> {
        sim.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = graph.terminal_count();
        let mut actors: Vec<Net<f32>> = (0..n).map(|_| Net::init(NetShape::actor(sim.lookback), &mut rng)).collect();
        if let Some(p) = config.initial_transmit_probability {
            actors.iter_mut().for_each(|a| bias_towards(a, p));
        }
        let critic = Net::init(NetShape::critic(n, sim.lookback), &mut rng);
        let actor_opts =
            actors.iter().map(|a| AnyOptimizer::new(config.optimizer, config.lr_actor, a.param_count())).collect();
        let critic_opt = AnyOptimizer::new(config.optimizer, config.lr_critic, critic.param_count());
        Ok(Self { graph, sim, config, actors, critic, actor_opts, critic_opt, rng, epoch: 0, slots_elapsed: 0 })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn sim(&self) -> &SimConfig {
        &self.sim
    }

    pub fn graph(&self) -> &TopologyGraph {
        &self.graph
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn actors(&self) -> &[Net<f32>] {
        &self.actors
    }

    pub fn critic(&self) -> &Net<f32> {
        &self.critic
    }

    fn agent_rngs(&mut self) -> Vec<ChaCha8Rng> {
        (0..self.actors.len()).map(|_| ChaCha8Rng::seed_from_u64(self.rng.gen())).collect()
    }

    /// Plays one episode with the current policies.
    pub fn rollout(&mut self) -> Result<Episode, ConfigError> {
        let rngs = self.agent_rngs();
        run_episode(&self.graph, &self.sim, &self.actors, rngs, self.config.observation, self.config.reward)
    }

    /// Critic values of every state in the episode.
    pub fn values(&self, episode: &Episode) -> Vec<f64> {
        let mut tape = Tape::new();
        self.critic.forward(&episode.states, episode.len(), &mut tape).expect("state shape").iter().map(|&v| v as f64).collect()
    }

    /// Actor samples of terminal `n`: unforced decisions on rewarded slots.
    pub fn actor_batch(episode: &Episode, n: usize, advantages: &[f64]) -> ActorBatch {
        let mut batch = ActorBatch::default();
        for d in &episode.decisions[n] {
            if d.forced {
                continue;
            }
            if let Some(i) = episode.step_index(d.slot) {
                batch.push(&d.observation, d.transmit, d.logp, advantages[i] as f32);
            }
        }
        batch
    }

    /// One full iteration: rollout, advantages, actor and critic updates.
    pub fn train_epoch(&mut self) -> Result<EpochStats, ConfigError> {
        let episode = self.rollout()?;
        let values = self.values(&episode);
        let cfg = &self.config;
        let advantages = gae_advantages(&episode.rewards, &values, cfg.gamma, cfg.lambda).expect("aligned values");
        let targets: Vec<f32> =
            discounted_returns(&episode.rewards, cfg.gamma, cfg.returns).iter().map(|&x| x as f32).collect();

        let mut batches: Vec<ActorBatch> =
            (0..self.actors.len()).map(|n| Self::actor_batch(&episode, n, &advantages)).collect();
        if cfg.normalize_advantages {
            batches.iter_mut().for_each(|b| normalize(&mut b.advantages));
        }
        let (update_epochs, surrogate) = (cfg.update_epochs, cfg.surrogate);
        let outcomes: Vec<(f64, usize, usize)> = self
            .actors
            .par_iter_mut()
            .zip(self.actor_opts.par_iter_mut())
            .zip(batches.par_iter())
            .map(|((net, opt), batch)| update_actor(net, opt, batch, &surrogate, update_epochs))
            .collect();

        let mut tape = Tape::new();
        let mut grads = vec![0.0f32; self.critic.param_count()];
        let mut critic_loss = 0.0;
        for pass in 0..update_epochs {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let loss = critic_gradient(&self.critic, &episode.states, &targets, &mut tape, &mut grads);
            if pass == 0 {
                critic_loss = loss;
            }
            self.critic_opt.step(&mut self.critic.params, &grads);
        }

        self.epoch += 1;
        self.slots_elapsed += self.sim.episode_len as u64;
        let w = self.sim.lookback as u64;
        let span = self.sim.episode_len as u64 - w;
        Ok(EpochStats {
            epoch: self.epoch,
            slots_elapsed: self.slots_elapsed,
            mean_reward: episode.rewards.iter().sum::<f64>() / episode.len().max(1) as f64,
            unknown_fraction: episode.unknown_fraction,
            throughput: windowed_throughput(&episode.ledger, w, span),
            transmit_probability: episode.decisions.iter().map(|d| mean_transmit_probability(d)).collect(),
            surrogate: outcomes.iter().map(|o| o.0).sum::<f64>() / outcomes.len() as f64,
            critic_loss,
            clipped: outcomes.iter().map(|o| o.1).sum(),
            skipped_ratios: outcomes.iter().map(|o| o.2).sum(),
        })
    }

    /// Runs the current policies without learning.
    pub fn evaluate(&self, plan: &EvalPlan, mode: ActionMode, seed: u64) -> Result<Evaluation, ConfigError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let agents: Vec<PolicyAgent> = self
            .actors
            .iter()
            .map(|net| PolicyAgent::new(net, ChaCha8Rng::seed_from_u64(rng.gen()), mode))
            .collect();
        evaluate(&self.graph, self.sim.clone(), AccessMode::Basic, self.config.observation, agents, plan)
    }
}

/// Shrinks the output layer and sets its bias so the actor starts close to
/// transmitting with probability `p` whatever it observes.
fn bias_towards(actor: &mut Net<f32>, p: f64) {
    let p = p.clamp(1e-6, 1.0 - 1e-6);
    let (w3, b3) = (actor.layout().w3.clone(), actor.layout().b3.clone());
    actor.params[w3].iter_mut().for_each(|w| *w *= 0.01);
    let b = &mut actor.params[b3];
    b[0] = 0.0;
    b[1] = (p / (1.0 - p)).ln() as f32;
}

/// `update_epochs` descent steps on the clipped surrogate. Returns the first
/// pass's objective and the clip and skip counts summed over passes.
fn update_actor(
    net: &mut Net<f32>,
    opt: &mut AnyOptimizer<f32>,
    batch: &ActorBatch,
    settings: &SurrogateSettings,
    passes: usize,
) -> (f64, usize, usize) {
    let mut tape = Tape::new();
    let mut grads = vec![0.0f32; net.param_count()];
    let (mut objective, mut clipped, mut skipped) = (0.0, 0, 0);
    if batch.is_empty() {
        return (0.0, 0, 0);
    }
    for pass in 0..passes {
        grads.iter_mut().for_each(|g| *g = 0.0);
        let out = surrogate_gradient(net, batch, settings, &mut tape, &mut grads);
        if pass == 0 {
            objective = out.objective;
        }
        clipped += out.clipped;
        skipped += out.skipped;
        opt.step(&mut net.params, &grads);
    }
    (objective, clipped, skipped)
}

fn mean_transmit_probability(decisions: &[Decision]) -> f64 {
    let (mut sum, mut count) = (0.0, 0);
    for d in decisions.iter().filter(|d| !d.forced) {
        let p = d.probability() as f64;
        sum += if d.transmit { p } else { 1.0 - p };
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

fn normalize(xs: &mut [f32]) {
    if xs.len() < 2 {
        return;
    }
    let n = xs.len() as f32;
    let mean = xs.iter().sum::<f32>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f32>() / n;
    let sd = var.sqrt().max(1e-8);
    xs.iter_mut().for_each(|x| *x = (*x - mean) / sd);
}
