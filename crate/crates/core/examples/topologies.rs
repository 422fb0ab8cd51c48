//! Parses the named topologies and some custom group notation, then prints
//! each terminal's one-hop and two-hop neighbors.
//!
//!     cargo run --example topologies -- "{A,B|B,C|C,D}"

use autoca::topology::{resolve, NAMED_TOPOLOGIES};

fn main() {
    let mut specs: Vec<String> = NAMED_TOPOLOGIES.iter().map(|(name, _)| name.to_string()).collect();
    specs.extend(std::env::args().skip(1));
    for spec in specs {
        let graph = match resolve(&spec) {
            Ok(g) => g,
            Err(e) => {
                eprintln!("{spec}: {e}");
                continue;
            }
        };
        println!("{spec} = {}  ({} terminals)", graph.to_spec(), graph.terminal_count());
        for (n, part) in graph.partitions().iter().enumerate() {
            let names = |ids: &[usize]| ids.iter().map(|&i| graph.name(i)).collect::<Vec<_>>().join(",");
            println!("  {}: hears [{}]  hidden [{}]", graph.name(n), names(&part.oh_set), names(&part.th_set));
        }
    }
}
