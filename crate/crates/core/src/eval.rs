//! Long evaluation runs of any agent population.

use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::bss::Bss;
use crate::medium::{AccessMode, ConfigError, SimConfig, SlotRecord};
use crate::metrics::{EvalContext, EvalReport, Fairness};
use crate::observation::ObservationKind;
use crate::topology::TopologyGraph;

/// Slots per evaluation window, 0.01 s of 9 µs slots.
pub const EVAL_WINDOW: u64 = 1111;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub report: EvalReport,
    /// Mean share of unknown entries over every terminal and slot.
    pub unknown_fraction: f64,
    pub slots: u64,
    /// The first `trace_slots` measured slots.
    #[serde(skip)]
    pub trace: Vec<SlotRecord>,
}

/// How an evaluation run is laid out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPlan {
    /// Idle slots before measurement starts, so observations are full.
    pub warmup: u64,
    /// Measured slots after the warmup.
    pub slots: u64,
    pub window: u64,
    pub fairness: Fairness,
    pub upper_bound: f64,
    /// Measured slots to keep verbatim.
    pub trace_slots: u64,
}

impl EvalPlan {
    pub fn context(&self, sim: &SimConfig) -> EvalContext {
        EvalContext {
            fairness: self.fairness,
            upper_bound: self.upper_bound,
            window: self.window,
            from: self.warmup,
            deadline: sim.drop_deadline_slots(),
            slot_ms: sim.slots_to_ms(1.0),
        }
    }
}

/// Runs `agents` for the planned number of slots and summarizes the result.
pub fn evaluate<A: Agent>(
    graph: &TopologyGraph,
    sim: SimConfig,
    mode: AccessMode,
    kind: ObservationKind,
    agents: Vec<A>,
    plan: &EvalPlan,
) -> Result<Evaluation, ConfigError> {
    let mut bss = Bss::with_observations(graph, sim.clone(), mode, agents, kind)?;
    bss.idle_slots(plan.warmup as usize);
    let mut unknown = 0.0;
    let mut trace = Vec::new();
    for k in 0..plan.slots {
        let record = bss.step();
        if k < plan.trace_slots {
            trace.push(record.clone());
        }
        unknown += bss.unknown_fraction();
    }
    let (medium, _) = bss.into_parts();
    let report = EvalReport::from_ledger(medium.ledger(), &plan.context(&sim));
    Ok(Evaluation { report, unknown_fraction: unknown / plan.slots.max(1) as f64, slots: plan.slots, trace })
}
