//! The window reward versus the α-fairness reward on two schedules with the
//! same channel use: one shared fairly between two hidden terminals, one
//! hogged by a single terminal.

use autoca::agent::Scripted;
use autoca::bss::Bss;
use autoca::ledger::TransmissionLedger;
use autoca::medium::{AccessMode, SimConfig};
use autoca::reward::{reward_series, RewardKind};
use autoca::topology::resolve;

fn ledger(a: &str, b: &str) -> TransmissionLedger {
    let graph = resolve("topo2p").unwrap();
    let agents = vec![Scripted::from_bits(a), Scripted::from_bits(b)];
    let mut bss = Bss::new(&graph, SimConfig::default(), AccessMode::Basic, agents).unwrap();
    for _ in 0..240 {
        bss.step();
    }
    bss.into_parts().0.ledger().clone()
}

fn main() {
    // Packets are five slots long with one idle slot between them.
    let fair = ledger(&"100000000000".repeat(20), &"000000100000".repeat(20));
    let hogged = ledger(&"100000".repeat(40), "0");
    let kinds = [("window", RewardKind::Window), ("alpha", RewardKind::Alpha { alpha: 1.0, eps: 0.001 })];
    for (label, l) in [("alternating", &fair), ("one terminal", &hogged)] {
        for (name, kind) in kinds {
            let r = reward_series(l, kind, 40, 230, 40);
            let total: f64 = r.iter().sum();
            println!("{label:12} {name:6} total {total:8.2}  mean {:7.3}", total / r.len() as f64);
        }
    }
}
