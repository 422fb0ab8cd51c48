//! Two hidden terminals on fixed schedules: the first pair collides, the
//! second alternates cleanly. A terminal may only start after a free slot,
//! so slot 0 never carries a packet start. Prints who is on the air in each slot and the
//! AP's verdicts.

use autoca::agent::Scripted;
use autoca::bss::Bss;
use autoca::medium::{AccessMode, FeedbackKind, SimConfig};
use autoca::topology::resolve;

fn run(title: &str, a: &str, b: &str) {
    let graph = resolve("topo2p").unwrap();
    let agents = vec![Scripted::from_bits(a), Scripted::from_bits(b)];
    let mut bss = Bss::new(&graph, SimConfig::default(), AccessMode::Basic, agents).unwrap();
    println!("{title}");
    println!("slot  A B  feedback");
    for _ in 0..24 {
        let r = bss.step();
        let verdicts: Vec<String> = r
            .feedback
            .iter()
            .map(|f| {
                let kind = if f.kind == FeedbackKind::Ack { "ACK" } else { "NACK" };
                format!("{kind} {} (started {})", graph.name(f.terminal), f.packet_start)
            })
            .collect();
        println!("{:4}  {} {}  {}", r.slot, r.actions[0], r.actions[1], verdicts.join(", "));
    }
    println!();
}

fn main() {
    run("overlapping packets", "010000000000", "000100000000");
    run("alternation with a one-slot gap", "010000000000", "000000010000");
}
