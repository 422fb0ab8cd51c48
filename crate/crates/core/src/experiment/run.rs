use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::baseline::{CsmaAgent, RtsCtsAgent};
use crate::eval::{evaluate, EvalPlan, Evaluation};
use crate::neural::save_checkpoint;
use crate::oracle::{optimal_bound, OracleConfig};
use crate::topology::{resolve, TopologyGraph};
use crate::trainer::{EpochStats, Trainer};

use super::config::{AgentFamily, ExperimentConfig, VERSION};
use super::RunError;

/// Derives an independent seed for one purpose of one run.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

const STREAM_AGENTS: u64 = 1;
const STREAM_EVAL: u64 = 2;
const STREAM_SNAPSHOT: u64 = 3;

/// Everything the runner needs besides the config.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub graph: TopologyGraph,
    pub upper_bound: f64,
    pub bound_is_fallback: bool,
    pub hash: String,
}

pub fn prepare(config: &ExperimentConfig) -> Result<Prepared, RunError> {
    config.sim.validate().map_err(|e| RunError::Config(e.to_string()))?;
    let graph = resolve(&config.topology).map_err(|e| RunError::Config(e.to_string()))?;
    if config.seeds.is_empty() {
        return Err(RunError::Config("at least one seed is required".into()));
    }
    if config.eval.window == 0 || config.eval.slots < config.eval.window {
        return Err(RunError::Config("evaluation must cover at least one window".into()));
    }
    let bound = optimal_bound(&graph, config.sim.packet_len, config.sim.difs, config.fairness, &OracleConfig::default())
        .map_err(|e| RunError::Config(e.to_string()))?;
    Ok(Prepared { graph, upper_bound: bound.value, bound_is_fallback: bound.fallback(), hash: config.hash() })
}

/// Final evaluation of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub evaluation: Evaluation,
}

fn header(hash: &str) -> String {
    format!("# autoca {VERSION} config {hash}\n")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |e| RunError::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    fs::write(path, bytes).map_err(io_err(path))
}

fn csv_bytes(hash: &str, head: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = header(hash).into_bytes();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(head).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    out.extend(w.into_inner().expect("in-memory write"));
    out
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt).unwrap_or_default()
}

/// Columns of `eval.csv`, shared with the comparison reader.
pub fn eval_header(graph: &TopologyGraph) -> Vec<String> {
    let mut h: Vec<String> = [
        "seed",
        "normalized_fairness",
        "fairness",
        "bss_throughput",
        "pcr",
        "delay_ms",
        "jitter_ms",
        "successive_jitter_ms",
        "delivered",
        "drops",
        "unknown_fraction",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(graph.names().iter().map(|n| format!("throughput_{n}")));
    h
}

fn eval_row(seed: u64, ev: &Evaluation) -> Vec<String> {
    let r = &ev.report;
    let mut row = vec![
        seed.to_string(),
        fmt(r.normalized_fairness),
        fmt(r.fairness),
        fmt(r.bss_throughput),
        opt(r.pcr),
        fmt(r.delay_ms),
        fmt(r.jitter_ms),
        fmt(r.successive_jitter_ms),
        r.delivered.to_string(),
        r.drops.to_string(),
        fmt(ev.unknown_fraction),
    ];
    row.extend(r.throughput.iter().map(|&t| fmt(t)));
    row
}

fn metrics_header(graph: &TopologyGraph) -> Vec<String> {
    let mut h: Vec<String> = [
        "epoch",
        "slots_elapsed",
        "normalized_fairness",
        "fairness",
        "bss_throughput",
        "pcr",
        "mean_reward",
        "unknown_fraction",
        "delay_ms",
        "jitter_ms",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.extend(graph.names().iter().map(|n| format!("throughput_{n}")));
    h
}

fn episodes_header(graph: &TopologyGraph) -> Vec<String> {
    let mut h: Vec<String> =
        ["epoch", "slots_elapsed", "mean_reward", "unknown_fraction", "surrogate", "critic_loss", "clipped", "skipped"]
            .iter()
            .map(|s| s.to_string())
            .collect();
    h.extend(graph.names().iter().map(|n| format!("throughput_{n}")));
    h.extend(graph.names().iter().map(|n| format!("transmit_probability_{n}")));
    h
}

fn episode_row(s: &EpochStats) -> Vec<String> {
    let mut row = vec![
        s.epoch.to_string(),
        s.slots_elapsed.to_string(),
        fmt(s.mean_reward),
        fmt(s.unknown_fraction),
        fmt(s.surrogate),
        fmt(s.critic_loss),
        s.clipped.to_string(),
        s.skipped_ratios.to_string(),
    ];
    row.extend(s.throughput.iter().map(|&t| fmt(t)));
    row.extend(s.transmit_probability.iter().map(|&t| fmt(t)));
    row
}

fn plan(config: &ExperimentConfig, prep: &Prepared, slots: u64, trace_slots: u64) -> EvalPlan {
    EvalPlan {
        warmup: config.sim.lookback as u64,
        slots,
        window: config.eval.window,
        fairness: config.fairness,
        upper_bound: prep.upper_bound,
        trace_slots,
    }
}

fn write_trace(dir: &Path, hash: &str, ev: &Evaluation) -> Result<(), RunError> {
    let mut out = header(hash).into_bytes();
    for record in &ev.trace {
        serde_json::to_writer(&mut out, record).expect("trace serializes");
        out.push(b'\n');
    }
    write_file(&dir.join("trace.jsonl"), &out)
}

fn save_networks(trainer: &Trainer, dir: &Path, hash: &str) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (n, actor) in trainer.actors().iter().enumerate() {
        let path = dir.join(format!("actor-{}.ckpt", trainer.graph().name(n)));
        let mut buf = Vec::new();
        save_checkpoint(actor, hash, &mut buf).map_err(|e| RunError::Io(e.to_string()))?;
        write_file(&path, &buf)?;
    }
    let mut buf = Vec::new();
    save_checkpoint(trainer.critic(), hash, &mut buf).map_err(|e| RunError::Io(e.to_string()))?;
    write_file(&dir.join("critic.ckpt"), &buf)
}

fn classical_agents(config: &ExperimentConfig, graph: &TopologyGraph, seed: u64) -> Vec<Box<dyn Agent + Send>> {
    let base = derive_seed(seed, STREAM_AGENTS);
    (0..graph.terminal_count())
        .map(|n| {
            let rng = ChaCha8Rng::seed_from_u64(derive_seed(base, n as u64));
            let agent: Box<dyn Agent + Send> = match config.agent {
                AgentFamily::RtsCts => {
                    Box::new(RtsCtsAgent::new(config.backoff, config.sim.difs, config.sim.packet_len, rng))
                }
                _ => Box::new(CsmaAgent::new(config.backoff, config.sim.difs, rng)),
            };
            agent
        })
        .collect()
}

/// Trains one seed, writing its per-epoch files into `dir`, and returns the trainer.
pub fn train_seed(config: &ExperimentConfig, prep: &Prepared, seed: u64, dir: &Path) -> Result<Trainer, RunError> {
    let mut trainer = Trainer::new(prep.graph.clone(), config.sim.clone(), config.train_config(), seed)
        .map_err(|e| RunError::Config(e.to_string()))?;
    let train = &config.train;
    let snapshot = plan(config, prep, train.eval_windows.max(1) * config.eval.window, 0);
    let mut episodes = Vec::new();
    let mut metrics = Vec::new();
    for epoch in 1..=train.epochs {
        let stats = trainer.train_epoch().map_err(|e| RunError::Config(e.to_string()))?;
        episodes.push(episode_row(&stats));
        if train.eval_every > 0 && epoch % train.eval_every == 0 {
            let ev = trainer
                .evaluate(&snapshot, train.eval_mode, derive_seed(derive_seed(seed, STREAM_SNAPSHOT), epoch as u64))
                .map_err(|e| RunError::Config(e.to_string()))?;
            let r = &ev.report;
            let mut row = vec![
                epoch.to_string(),
                stats.slots_elapsed.to_string(),
                fmt(r.normalized_fairness),
                fmt(r.fairness),
                fmt(r.bss_throughput),
                opt(r.pcr),
                fmt(stats.mean_reward),
                fmt(ev.unknown_fraction),
                fmt(r.delay_ms),
                fmt(r.jitter_ms),
            ];
            row.extend(r.throughput.iter().map(|&t| fmt(t)));
            metrics.push(row);
        }
        if config.checkpoint_every > 0 && epoch % config.checkpoint_every == 0 && epoch < train.epochs {
            save_networks(&trainer, &dir.join(format!("checkpoints/epoch-{epoch:06}")), &prep.hash)?;
        }
    }
    save_networks(&trainer, &dir.join("checkpoints/final"), &prep.hash)?;
    write_file(&dir.join("episodes.csv"), &csv_bytes(&prep.hash, &episodes_header(&prep.graph), &episodes))?;
    write_file(&dir.join("metrics.csv"), &csv_bytes(&prep.hash, &metrics_header(&prep.graph), &metrics))?;
    Ok(trainer)
}

/// Runs (and for learned families, first trains) one seed.
pub fn run_seed(config: &ExperimentConfig, prep: &Prepared, seed: u64, dir: &Path) -> Result<SeedResult, RunError> {
    let dir = dir.join(format!("seed-{seed}"));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let final_plan = plan(config, prep, config.eval.slots, config.eval.trace_slots);
    let eval_seed = derive_seed(seed, STREAM_EVAL);
    let evaluation = if config.agent.is_learned() {
        let trainer = train_seed(config, prep, seed, &dir)?;
        trainer.evaluate(&final_plan, config.eval.mode, eval_seed)
    } else {
        let agents = classical_agents(config, &prep.graph, eval_seed);
        evaluate(&prep.graph, config.sim.clone(), config.agent.access_mode(), config.agent.observation(), agents, &final_plan)
    }
    .map_err(|e| RunError::Config(e.to_string()))?;
    write_trace(&dir, &prep.hash, &evaluation)?;
    Ok(SeedResult { seed, evaluation })
}

/// Summary of an arm across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub version: String,
    pub config_hash: String,
    pub topology: String,
    pub agent: AgentFamily,
    pub upper_bound: f64,
    pub upper_bound_is_fallback: bool,
    pub seeds: Vec<SeedResult>,
}

/// Runs every seed of one arm (in parallel) and writes the arm directory.
pub fn run_arm(config: &ExperimentConfig, out: &Path) -> Result<ArmSummary, RunError> {
    let prep = prepare(config)?;
    let dir = out.join(&config.name);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    write_file(&dir.join("config.toml"), format!("{}{}", header(&prep.hash), config.to_toml()).as_bytes())?;
    let seeds: Vec<SeedResult> =
        config.seeds.par_iter().map(|&s| run_seed(config, &prep, s, &dir)).collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> = seeds.iter().map(|s| eval_row(s.seed, &s.evaluation)).collect();
    write_file(&dir.join("eval.csv"), &csv_bytes(&prep.hash, &eval_header(&prep.graph), &rows))?;
    let summary = ArmSummary {
        name: config.name.clone(),
        version: VERSION.into(),
        config_hash: prep.hash.clone(),
        topology: prep.graph.to_spec(),
        agent: config.agent,
        upper_bound: prep.upper_bound,
        upper_bound_is_fallback: prep.bound_is_fallback,
        seeds,
    };
    let path = dir.join("summary.json");
    let mut f = fs::File::create(&path).map_err(io_err(&path))?;
    serde_json::to_writer_pretty(&mut f, &summary).expect("summary serializes");
    writeln!(f).map_err(io_err(&path))?;
    Ok(summary)
}

/// Runs every arm in order; returns the arm directories.
pub fn run_all(arms: &[ExperimentConfig], out: &Path) -> Result<Vec<PathBuf>, RunError> {
    let mut names = std::collections::HashSet::new();
    for arm in arms {
        if !names.insert(arm.name.as_str()) {
            return Err(RunError::Config(format!("duplicate arm name {}", arm.name)));
        }
    }
    arms.iter().map(|arm| run_arm(arm, out).map(|_| out.join(&arm.name))).collect()
}
