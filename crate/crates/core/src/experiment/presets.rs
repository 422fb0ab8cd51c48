//! Named experiments. Each preset expands to one or more arms that share a
//! topology (or sweep one) and differ in the agent family.

use crate::eval::EVAL_WINDOW;

use super::config::{AgentFamily, EvalSettings, ExperimentConfig};

/// Desk-scale training length.
pub const DESK_EPOCHS: usize = 2000;

/// Slots in one second of simulated time, the baseline evaluation length.
const ONE_SECOND: u64 = 111_111;

pub const PRESETS: &[&str] = &[
    "topo2-reward-ablation",
    "topo2p-obs-ablation",
    "topo3-fairness",
    "topo3p-fairness",
    "topo3pp-fairness",
    "topo4-fairness",
    "topo4p-fairness",
    "topo4pp-fairness",
    "topo4-qos",
    "topo3p-rtscts",
];

/// A learned arm with desk-scale defaults.
pub fn learned(name: &str, topology: &str, agent: AgentFamily) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        name: name.into(),
        topology: topology.into(),
        agent,
        seeds: vec![1, 2, 3],
        checkpoint_every: 500,
        ..Default::default()
    };
    c.train.epochs = DESK_EPOCHS;
    c.train.eval_every = 50;
    c.train.eval_windows = 1;
    c
}

/// A classical arm evaluated over ten seeds of one simulated second.
pub fn baseline(name: &str, topology: &str, agent: AgentFamily) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        topology: topology.into(),
        agent,
        seeds: (1..=10).collect(),
        eval: EvalSettings { slots: ONE_SECOND, ..Default::default() },
        ..Default::default()
    }
}

/// Arms of a named preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<Vec<ExperimentConfig>> {
    use AgentFamily::*;
    let fairness = |topo: &str| vec![learned("madrl-ht", topo, MadrlHt), baseline("csma", topo, Csma)];
    Some(match name {
        "topo2-reward-ablation" => vec![
            learned("window-reward", "topo2", MadrlHt),
            learned("alpha-reward", "topo2", MadrlAlphaReward),
        ],
        "topo2p-obs-ablation" => {
            vec![learned("lookback-obs", "topo2p", MadrlHt), learned("ack-row-obs", "topo2p", MadrlAltObs)]
        }
        "topo3-fairness" => fairness("topo3"),
        "topo3p-fairness" => fairness("topo3p"),
        "topo3pp-fairness" => fairness("topo3pp"),
        "topo4-fairness" => fairness("topo4"),
        "topo4p-fairness" => fairness("topo4p"),
        "topo4pp-fairness" => fairness("topo4pp"),
        "topo4-qos" => {
            let mut arms = Vec::new();
            for topo in ["topo4", "topo4p"] {
                let mut m = learned(&format!("madrl-ht-{topo}"), topo, MadrlHt);
                // Delay statistics need a long look at the trained policies.
                m.eval.slots = 100 * EVAL_WINDOW;
                arms.push(m);
                arms.push(baseline(&format!("csma-{topo}"), topo, Csma));
            }
            arms
        }
        "topo3p-rtscts" => vec![
            baseline("csma", "topo3p", Csma),
            baseline("rtscts", "topo3p", RtsCts),
            learned("madrl-ht", "topo3p", MadrlHt),
        ],
        _ => return None,
    })
}
