//! CSMA/CA with binary exponential backoff, with and without RTS/CTS, on a
//! topology given on the command line (default `topo4p`), averaged over seeds.
//!
//!     cargo run --release --example csma_baseline -- topo3p

use autoca::baseline::{BackoffConfig, CsmaAgent, RtsCtsAgent};
use autoca::eval::{evaluate, EvalPlan, EVAL_WINDOW};
use autoca::medium::{AccessMode, SimConfig};
use autoca::metrics::{EvalReport, Fairness};
use autoca::observation::ObservationKind;
use autoca::oracle::{optimal_bound, OracleConfig};
use autoca::topology::resolve;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "topo4p".into());
    let graph = resolve(&name).unwrap();
    let sim = SimConfig::default();
    let fairness = Fairness::default();
    let bound = optimal_bound(&graph, sim.packet_len, sim.difs, fairness, &OracleConfig::default()).unwrap();
    let plan = EvalPlan {
        warmup: sim.lookback as u64,
        slots: sim.slots_in(0.2),
        window: EVAL_WINDOW,
        fairness,
        upper_bound: bound.value,
        trace_slots: 0,
    };
    let backoff = BackoffConfig::default();
    for mode in [AccessMode::Basic, AccessMode::RtsCts] {
        let reports: Vec<EvalReport> = (1..=5u64)
            .map(|seed| {
                let rng = |n: usize| ChaCha8Rng::seed_from_u64(seed * 1000 + n as u64);
                let agents: Vec<Box<dyn autoca::agent::Agent>> = (0..graph.terminal_count())
                    .map(|n| -> Box<dyn autoca::agent::Agent> {
                        match mode {
                            AccessMode::Basic => Box::new(CsmaAgent::new(backoff, sim.difs, rng(n))),
                            AccessMode::RtsCts => Box::new(RtsCtsAgent::new(backoff, sim.difs, sim.packet_len, rng(n))),
                        }
                    })
                    .collect();
                evaluate(&graph, sim.clone(), mode, ObservationKind::LookBack, agents, &plan).unwrap().report
            })
            .collect();
        let mean = |f: &dyn Fn(&EvalReport) -> f64| reports.iter().map(f).sum::<f64>() / reports.len() as f64;
        println!(
            "{name} {mode:?}: norm. fairness {:.3}  throughput {:.3}  pcr {:.3}  delay {:.2} ms  jitter {:.2} ms",
            mean(&|r| r.normalized_fairness),
            mean(&|r| r.bss_throughput),
            mean(&|r| r.pcr.unwrap_or(0.0)),
            mean(&|r| r.delay_ms),
            mean(&|r| r.jitter_ms),
        );
    }
}
