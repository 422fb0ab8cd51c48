//! Runs two short arms on the same topology into a temporary directory,
//! then lines them up the way `autoca compare` does.

use autoca::experiment::{baseline, compare, learned, run_all, AgentFamily};

fn main() {
    let out = std::env::temp_dir().join(format!("autoca-example-{}", std::process::id()));
    let mut csma = baseline("csma", "topo3p", AgentFamily::Csma);
    csma.seeds = vec![1, 2];
    csma.eval.slots = 20_000;
    let mut learner = learned("madrl-ht", "topo3p", AgentFamily::MadrlHt);
    learner.seeds = vec![1, 2];
    learner.train.epochs = 20;
    learner.train.eval_every = 10;
    learner.checkpoint_every = 0;

    let dirs = run_all(&[csma, learner], &out).unwrap();
    for d in &dirs {
        println!("wrote {}", d.display());
    }
    print!("{}", compare(&[out.clone()]).unwrap().render());
    std::fs::remove_dir_all(&out).unwrap();
}
