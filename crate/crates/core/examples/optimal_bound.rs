//! Best achievable proportional fairness of every named topology, found by
//! enumerating collision-free cyclic schedules.

use autoca::metrics::Fairness;
use autoca::oracle::{optimal_bound, OracleConfig};
use autoca::topology::{resolve, NAMED_TOPOLOGIES};

fn main() {
    let fairness = Fairness::default();
    for (name, spec) in NAMED_TOPOLOGIES {
        let graph = resolve(name).unwrap();
        let b = optimal_bound(&graph, 5, 1, fairness, &OracleConfig::default()).unwrap();
        let tp: Vec<String> = b.throughput.iter().map(|t| format!("{t:.3}")).collect();
        println!("{name:8} {spec:14} F_UB {:9.4}  {:?}  witness {}  throughput [{}]", b.value, b.method, b.witness, tp.join(", "));
    }
}
