//! Trains MADRL-HT agents on a topology and reports evaluation snapshots.
//!
//!     cargo run --release --example train -- topo2 300 1
//!
//! Arguments: topology (default `topo2`), epochs (default 200), seed.

use autoca::eval::{EvalPlan, EVAL_WINDOW};
use autoca::medium::SimConfig;
use autoca::metrics::Fairness;
use autoca::oracle::{optimal_bound, OracleConfig};
use autoca::topology::resolve;
use autoca::trainer::{ActionMode, TrainConfig, Trainer};

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "topo2".into());
    let epochs: usize = args.next().map_or(200, |s| s.parse().expect("epochs"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let graph = resolve(&name).unwrap();
    let sim = SimConfig::default();
    let fairness = Fairness::default();
    let bound = optimal_bound(&graph, sim.packet_len, sim.difs, fairness, &OracleConfig::default()).unwrap();
    let plan = EvalPlan {
        warmup: sim.lookback as u64,
        slots: EVAL_WINDOW,
        window: EVAL_WINDOW,
        fairness,
        upper_bound: bound.value,
        trace_slots: 0,
    };
    let config = TrainConfig { epochs, ..TrainConfig::default() };
    let mut trainer = Trainer::new(graph, sim, config, seed).unwrap();
    println!("epoch  reward  transmit p          norm. fairness  throughput");
    for epoch in 1..=epochs {
        let stats = trainer.train_epoch().unwrap();
        if epoch % 25 == 0 || epoch == epochs {
            let ev = trainer.evaluate(&plan, ActionMode::Sample, 99).unwrap();
            let p: Vec<String> = stats.transmit_probability.iter().map(|p| format!("{p:.3}")).collect();
            let tp: Vec<String> = ev.report.throughput.iter().map(|t| format!("{t:.3}")).collect();
            println!(
                "{epoch:5}  {:6.3}  [{}]  {:14.3}  [{}]",
                stats.mean_reward,
                p.join(", "),
                ev.report.normalized_fairness,
                tp.join(", ")
            );
        }
    }
}
