//! How a terminal's view fills in: hidden neighbors are unknown until an
//! AP acknowledgement lets the terminal revise the judged window.
//!
//! Terminal C of `{A,B|C}` cannot hear A. It watches A's packet, gets the
//! ACK, and marks those slots as hidden activity.

use autoca::agent::Scripted;
use autoca::bss::Bss;
use autoca::medium::{AccessMode, SimConfig};
use autoca::observation::{Entry, ObservationBuffer};
use autoca::topology::resolve;

fn row(entries: impl Iterator<Item = Entry>) -> String {
    entries
        .map(|e| match e {
            Entry::Zero => '0',
            Entry::One => '1',
            Entry::Unk => '?',
        })
        .collect()
}

fn show(bss: &Bss<Scripted>, n: usize, name: &str) {
    let ObservationBuffer::LookBack(obs) = bss.observation(n) else { unreachable!() };
    let own = row(obs.columns().map(|c| Entry::from_bit(c.own)));
    let oh = row(obs.columns().map(|c| c.oh));
    let th = row(obs.columns().map(|c| c.th));
    println!("{name}  own {own}\n   oh  {oh}\n   th  {th}   unknown {:.2}", obs.unknown_fraction());
}

fn main() {
    let graph = resolve("topo3p").unwrap();
    let sim = SimConfig { lookback: 16, ..SimConfig::default() };
    // A sends once at slot 2; B and C stay silent.
    let agents = vec![
        Scripted::from_bits(&format!("{:0<64}", "001")),
        Scripted::from_bits("0"),
        Scripted::from_bits("0"),
    ];
    let mut bss = Bss::new(&graph, sim, AccessMode::Basic, agents).unwrap();
    bss.track_revisions(true);
    for slot in 0..10 {
        bss.step();
        if slot == 5 || slot == 6 || slot == 9 {
            println!("after slot {slot}:");
            show(&bss, 1, "B");
            show(&bss, 2, "C");
            println!();
        }
    }
    println!("C's revisions: {:?}", bss.revisions(2).iter().filter(|r| format!("{r:?}") != "None").collect::<Vec<_>>());
}
