//! Generalized advantage estimates and discounted returns for a short reward
//! sequence, under both return conventions.

use autoca::trainer::{discounted_returns, gae_advantages, ReturnConvention};

fn main() {
    let rewards = [0.0, 1.0, -1.0, 0.0, 1.0, 1.0];
    let values = [0.2, 0.4, 0.1, -0.3, 0.5, 0.6];
    for lambda in [0.0, 0.95, 1.0] {
        let adv = gae_advantages(&rewards, &values, 0.99, lambda).unwrap();
        println!("λ = {lambda:<4}  advantages {:?}", adv.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>());
    }
    for convention in [ReturnConvention::Strict, ReturnConvention::Inclusive] {
        let g = discounted_returns(&rewards, 0.99, convention);
        println!("{convention:?} returns {:?}", g.iter().map(|a| (a * 1e4).round() / 1e4).collect::<Vec<_>>());
    }
}
